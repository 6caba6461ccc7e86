#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "gtlsynth/dfa.hpp"
#include "gtlsynth/model.hpp"

namespace gtlsynth {

// Product of the owner's neighborhood MDP with its specification DFA.
// Neighborhood states are mixed-radix codes over members (first member least
// significant). Members whose kernels condition on agents outside N(owner)
// see those agents frozen at their initial states.
class ProductModel {
public:
    ProductModel(const FactoredMdp& model, int owner, std::shared_ptr<const Dfa> dfa);

    int owner() const { return owner_; }
    const std::vector<int>& members() const { return members_; }
    const Dfa& dfa() const { return *dfa_; }
    std::shared_ptr<const Dfa> dfa_ptr() const { return dfa_; }
    const FactoredMdp& model() const { return *model_; }

    int64_t nbhd_states() const { return nbhd_states_; }
    // |S_N(owner)| * |Q|
    int64_t state_space_size() const { return nbhd_states_ * dfa_->num_states; }
    int64_t joint_actions() const { return joint_actions_; }

    int64_t encode(const std::vector<int>& local) const;
    std::vector<int> decode(int64_t code) const;
    int component(int64_t code, int member_pos) const;
    int member_pos(int agent) const;  // -1 if not a member

    int64_t initial_nbhd() const { return initial_nbhd_; }
    int initial_q() const { return initial_q_; }
    int letter(int64_t code) const;
    int next_q(int q, int64_t next_code) const { return dfa_->step(q, letter(next_code)); }
    bool accepting(int q) const { return dfa_->accepting(q); }

    // Joint-action code over members, same radix convention as states.
    std::vector<int> decode_action(int64_t code) const;
    // Successor neighborhood states under joint member actions.
    void successors(int64_t code, const std::vector<int>& actions, std::vector<std::pair<int64_t, double>>& out) const;
    // R^p((s,q),a) = R_owner(s_owner, a)
    double reward(int64_t code, int owner_action) const;

private:
    const FactoredMdp* model_;
    int owner_;
    std::vector<int> members_;
    std::vector<int> sizes_;
    std::vector<int> act_sizes_;
    std::shared_ptr<const Dfa> dfa_;
    int64_t nbhd_states_ = 1;
    int64_t joint_actions_ = 1;
    int64_t initial_nbhd_ = 0;
    int initial_q_ = 0;
    std::vector<int> base_;
    std::vector<int> letters_;  // cached per neighborhood state
};

} // namespace gtlsynth
