#include "gtlsynth/product.hpp"

#include <string>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

namespace {
constexpr int64_t kLetterCacheLimit = 20'000'000;
}

ProductModel::ProductModel(const FactoredMdp& model, int owner, std::shared_ptr<const Dfa> dfa)
    : model_(&model), owner_(owner), dfa_(std::move(dfa)) {
    members_ = model.graph.closed(owner);
    for (const auto& p : dfa_->preds)
        if (p.is_exists) {
            // re-run the neighborhood check on the concrete graph
            auto f = gtl::exists(p.count, p.chain, p.sub);
            extract_predicates(f, owner, model.graph);
        }
    for (int k : members_) {
        sizes_.push_back(model.agents[k].num_states());
        act_sizes_.push_back(model.agents[k].num_actions());
        if (nbhd_states_ > (int64_t{1} << 50) / sizes_.back() || joint_actions_ > (int64_t{1} << 50) / act_sizes_.back())
            throw Error(ErrorCode::state_cap, "neighborhood of agent " + std::to_string(owner) + " is too large to index");
        nbhd_states_ *= sizes_.back();
        joint_actions_ *= act_sizes_.back();
    }
    for (const auto& ag : model.agents) base_.push_back(ag.initial);
    std::vector<int> init;
    for (int k : members_) init.push_back(model.agents[k].initial);
    initial_nbhd_ = encode(init);
    if (nbhd_states_ <= kLetterCacheLimit) {
        letters_.resize(static_cast<size_t>(nbhd_states_));
        std::vector<int> joint = base_;
        for (int64_t c = 0; c < nbhd_states_; ++c) {
            int64_t rest = c;
            for (size_t p = 0; p < members_.size(); ++p) {
                joint[members_[p]] = static_cast<int>(rest % sizes_[p]);
                rest /= sizes_[p];
            }
            letters_[static_cast<size_t>(c)] = dfa_->letter(model, owner, joint.data());
        }
    }
    initial_q_ = dfa_->step(dfa_->initial, letter(initial_nbhd_));
}

int64_t ProductModel::encode(const std::vector<int>& local) const {
    int64_t c = 0, r = 1;
    for (size_t p = 0; p < members_.size(); ++p) {
        c += r * local[p];
        r *= sizes_[p];
    }
    return c;
}

std::vector<int> ProductModel::decode(int64_t code) const {
    std::vector<int> out(members_.size());
    for (size_t p = 0; p < members_.size(); ++p) {
        out[p] = static_cast<int>(code % sizes_[p]);
        code /= sizes_[p];
    }
    return out;
}

int ProductModel::component(int64_t code, int pos) const {
    for (int p = 0; p < pos; ++p) code /= sizes_[p];
    return static_cast<int>(code % sizes_[pos]);
}

int ProductModel::member_pos(int agent) const {
    for (size_t p = 0; p < members_.size(); ++p)
        if (members_[p] == agent) return static_cast<int>(p);
    return -1;
}

int ProductModel::letter(int64_t code) const {
    if (!letters_.empty()) return letters_[static_cast<size_t>(code)];
    std::vector<int> joint = base_;
    auto local = decode(code);
    for (size_t p = 0; p < members_.size(); ++p) joint[members_[p]] = local[p];
    return dfa_->letter(*model_, owner_, joint.data());
}

std::vector<int> ProductModel::decode_action(int64_t code) const {
    std::vector<int> out(members_.size());
    for (size_t p = 0; p < members_.size(); ++p) {
        out[p] = static_cast<int>(code % act_sizes_[p]);
        code /= act_sizes_[p];
    }
    return out;
}

void ProductModel::successors(int64_t code, const std::vector<int>& actions,
                              std::vector<std::pair<int64_t, double>>& out) const {
    out.clear();
    std::vector<int> joint = base_;
    auto local = decode(code);
    for (size_t p = 0; p < members_.size(); ++p) joint[members_[p]] = local[p];
    out.emplace_back(0, 1.0);
    int64_t radix = 1;
    std::vector<std::pair<int64_t, double>> next;
    for (size_t p = 0; p < members_.size(); ++p) {
        const auto& row = model_->row(members_[p], joint.data(), actions[p]);
        next.clear();
        for (const auto& [c, pr] : out)
            for (const auto& tr : row)
                if (tr.prob > 0) next.emplace_back(c + radix * tr.next, pr * tr.prob);
        out.swap(next);
        radix *= sizes_[p];
    }
}

double ProductModel::reward(int64_t code, int owner_action) const {
    const int pos = member_pos(owner_);
    return model_->reward(owner_, component(code, pos), owner_action);
}

} // namespace gtlsynth
