#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gtlsynth/formulations.hpp"
#include "gtlsynth/gtl.hpp"
#include "gtlsynth/policy.hpp"
#include "gtlsynth/trajectory.hpp"

namespace gtlsynth {

// Flat joint model. State code = joint agent states (agent 0 least
// significant) followed by the DFA state of each constrained agent.
struct JointMdp {
    FlatMdp mdp;
    std::vector<int> state_radix;   // |S_i| per agent, then |Q_k| per constrained agent
    std::vector<int> action_radix;  // |A_i| per agent
    std::vector<int> constrained;   // agent index per accepting set
};

constexpr int64_t kJointCap = 1'000'000;

JointMdp compose_joint(const SynthesisProblem& problem, int64_t cap = kJointCap);

struct AgentEvaluation {
    int agent = 0;
    double probability = 0;
    double half_width = 0;  // zero for exact evaluation
    double lower = 0, upper = 0;
    double expected_reward = 0;
    int horizon = 0;
    int runs = 0;  // zero for exact evaluation
    bool exact = true;
};

struct EvaluationReport {
    double confidence = 0.95;
    int horizon = 0;
    std::vector<AgentEvaluation> agents;  // constrained agents
    double total_reward = 0;     // summed over agents and t = 0..horizon
    double total_reward_se = 0;  // standard error, Monte Carlo only
};

// Exact forward propagation of the joint distribution under the policies
// over T_phi steps. Throws state_cap if the support exceeds the cap.
AgentEvaluation exact_satisfaction(const FactoredMdp& model, const Policy& policy, const Formula& f, int owner,
                                   int64_t cap = kJointCap);

// Total expected reward over time steps 0..horizon.
double exact_expected_reward(const FactoredMdp& model, const Policy& policy, int horizon, int64_t cap = kJointCap);

GraphTrajectory simulate(const FactoredMdp& model, const Policy& policy, int horizon, uint64_t seed);

AgentEvaluation monte_carlo_satisfaction(const FactoredMdp& model, const Policy& policy, const Formula& f, int owner,
                                         int runs, uint64_t seed, double confidence = 0.95);

// Every constrained agent plus the total reward over the largest formula
// horizon (at least `horizon`).
EvaluationReport exact_report(const FactoredMdp& model, const Policy& policy,
                              const std::vector<std::optional<Formula>>& formulas, int horizon = 0,
                              int64_t cap = kJointCap);

// One simulation per run serves all agents. Run r uses seed splitmix64(seed + r).
EvaluationReport monte_carlo_report(const FactoredMdp& model, const Policy& policy,
                                    const std::vector<std::optional<Formula>>& formulas, int runs, uint64_t seed,
                                    double confidence = 0.95, int horizon = 0);

// Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(int64_t k, int64_t n, double confidence);

// Per-agent state marginals o_k(s,t) under local policies.
std::vector<std::vector<std::vector<double>>> local_marginals(const FactoredMdp& model, const Policy& policy,
                                                              int horizon);

// Product-of-marginals assignment for a local LP: fills the local
// state-action variables and the neighborhood state variables, leaving DFA
// mass and transport variables at zero.
std::vector<double> marginal_product_assignment(const OccupancyLp& lp, const SynthesisProblem& problem, const Policy& policy);

} // namespace gtlsynth
