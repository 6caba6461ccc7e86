#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "gtlsynth/formulations.hpp"
#include "gtlsynth/lp.hpp"
#include "gtlsynth/product.hpp"

namespace gtlsynth {

enum class PolicyForm { local, neighborhood, flat };

// Time-varying randomized policy of one agent over its own actions. State
// keys are the local state (local, flat) or the neighborhood code plus DFA
// state (neighborhood). Missing keys mean uniform.
struct AgentPolicy {
    int agent = 0;
    PolicyForm form = PolicyForm::local;
    int num_actions = 1;
    std::map<std::tuple<int, int64_t, int>, std::vector<double>> table;  // (t, state, q)
    std::shared_ptr<const ProductModel> product;  // neighborhood form only

    std::vector<double> distribution(int t, int64_t state, int q = -1) const;
};

struct Policy {
    std::string formulation;
    double objective = 0;
    std::vector<double> lambda;
    int horizon = 0;
    std::vector<AgentPolicy> agents;
};

// sigma(s,a,t) = o(s,a,t) / sum_a' o(s,a',t), uniform when the denominator
// is at most 1e-12. num_actions is indexed by agent (index 0 for flat LPs).
Policy extract_policy(const OccupancyLp& lp, const std::vector<double>& x, const std::vector<int>& num_actions);

// Attaches neighborhood products; unconstrained agents get the trivial DFA.
void attach_products(Policy& policy, const SynthesisProblem& problem);

std::string serialize_policy(const Policy& policy);
Policy parse_policy(const std::string& text);

} // namespace gtlsynth
