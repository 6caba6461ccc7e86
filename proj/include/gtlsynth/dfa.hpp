#pragma once

#include <string>
#include <vector>

#include "gtlsynth/gtl.hpp"
#include "gtlsynth/model.hpp"

namespace gtlsynth {

// Node predicate at the owner, or a counting predicate over the owner's
// neighborhood. Either is decided by a single joint state.
struct GraphPredicate {
    bool is_exists = false;
    NodePred node;                // !is_exists
    int count = 0;                // is_exists
    std::vector<EdgeProp> chain;  // is_exists, written order
    Formula sub;                  // is_exists, temporal-free
    std::string key;

    // joint holds a state for every agent; only N(owner) is consulted
    bool eval(const FactoredMdp& model, int owner, const int* joint) const;
};

// Syntactic predicate list in first-occurrence order, without graph checks.
std::vector<GraphPredicate> atomic_predicates(const Formula& f);

// As atomic_predicates, but also checks every neighboring chain stays inside
// N(owner); throws ErrorCode::escape naming the subformula otherwise.
std::vector<GraphPredicate> extract_predicates(const Formula& f, int owner, const AgentGraph& graph);

struct Dfa {
    std::vector<GraphPredicate> preds;
    int num_states = 0;
    int initial = 0;
    int accept_sink = -1;  // progression reached true
    int reject_sink = -1;  // progression reached false
    std::vector<int> delta;  // q * letters() + letter
    std::vector<std::string> state_text;

    int letters() const { return 1 << preds.size(); }
    int step(int q, int letter) const { return delta[static_cast<size_t>(q) * letters() + letter]; }
    bool accepting(int q) const { return q == accept_sink; }
    bool run(const std::vector<int>& word) const;
    // letter of the joint state for the given owner
    int letter(const FactoredMdp& model, int owner, const int* joint) const;
};

// Formula progression with hash-consed states. Throws ErrorCode::state_cap
// when more than state_cap states are reached.
Dfa compile_dfa(const Formula& f, int state_cap = 100000);

// Text table: states, letters, transitions, accepting set.
std::string dump_dfa(const Dfa& dfa);

} // namespace gtlsynth
