#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gtlsynth/gtl.hpp"
#include "gtlsynth/lp.hpp"
#include "gtlsynth/model.hpp"
#include "gtlsynth/product.hpp"

namespace gtlsynth {

// Explicit MDP with one or more reachability constraints (Acc_k, lambda_k).
struct FlatMdp {
    int num_states = 0;
    int num_actions = 0;
    int initial = 0;
    std::vector<std::vector<Transition>> kernel;  // s * num_actions + a
    std::vector<double> reward;                   // s * num_actions + a
    std::vector<std::vector<char>> accepting;     // per constraint, per state
    std::vector<double> lambda;
};

OccupancyLp build_monolithic_lp(const FlatMdp& mdp, int horizon);

// Per-agent specifications. Agents without a formula are unconstrained.
struct SynthesisProblem {
    const FactoredMdp* model = nullptr;
    std::vector<std::optional<Formula>> formulas;
    std::vector<std::shared_ptr<const ProductModel>> products;  // null when unconstrained
    std::vector<double> lambda;
    int horizon = 0;

    bool constrained(int i) const { return products[i] != nullptr; }
};

// Compiles DFAs and products. horizon < 0 uses the largest formula horizon;
// a larger value extends it.
SynthesisProblem make_problem(const FactoredMdp& model, const std::vector<std::optional<Formula>>& formulas,
                              const std::vector<double>& lambda, int horizon = -1, int dfa_cap = 100000);

struct LpOptions {
    long long var_cap = 2'000'000;
    // Lets the local formulation accept neighborhood-form kernels through a
    // relaxed joint (own state, neighbor classes, own action) mass.
    bool coupled_kernels = false;
};

OccupancyLp build_neighboring_lp(const SynthesisProblem& p, const LpOptions& opt = {});
// For each member position of the product, the representative (smallest
// equivalent state) of every local state. Two states are equivalent when all
// node predicates of the DFA agree on them and no edge proposition can tell
// them apart. The local formulation indexes neighborhood mass by these
// classes.
std::vector<std::vector<int>> local_state_classes(const ProductModel& product);

OccupancyLp build_local_lp(const SynthesisProblem& p, const LpOptions& opt = {});

} // namespace gtlsynth
