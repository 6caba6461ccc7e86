#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "gtlsynth/graph.hpp"

namespace gtlsynth {

enum class KernelForm { neighborhood, local };

struct Transition {
    int next = 0;
    double prob = 0.0;
    bool operator==(const Transition&) const = default;
};

struct AgentModel {
    std::string name;
    std::vector<std::string> states;
    std::vector<std::string> actions;
    std::vector<std::vector<int>> coords;                 // per state, may be empty
    std::vector<std::map<std::string, double>> attrs;     // per state
    std::vector<std::vector<std::string>> labels;         // per state
    int initial = 0;
    // Agents (sorted, from the open neighborhood) the kernel conditions on.
    std::vector<int> depends_on;
    // Indexed by context * |A| + a, where context = s + |S| * (mixed radix of
    // the depends_on states, first dependency least significant).
    std::vector<std::vector<Transition>> kernel;
    std::vector<double> reward;                           // s * |A| + a

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions() const { return static_cast<int>(actions.size()); }
    bool has_label(int s, const std::string& l) const;
    std::optional<double> attr(int s, const std::string& key) const;
    int state_index(const std::string& n) const;   // -1 if absent
    int action_index(const std::string& n) const;  // -1 if absent
};

struct EdgeLabel {
    enum class Kind { manhattan, constant, table };
    Kind kind = Kind::constant;
    double value = 0.0;                   // constant value, or table default
    bool has_default = false;
    // (edge index, state of lower endpoint, state of higher endpoint) -> y
    std::map<std::tuple<int, int, int>, double> table;
};

class FactoredMdp {
public:
    AgentGraph graph;
    std::vector<AgentModel> agents;
    EdgeLabel edge_label;
    KernelForm form = KernelForm::local;

    int size() const { return graph.size(); }
    const AgentModel& agent(int i) const { return agents.at(i); }

    // Context index for agent i given a state vector indexed by agent id.
    int context(int i, const int* joint) const;
    int context_count(int i) const;
    const std::vector<Transition>& row(int i, const int* joint, int a) const {
        const auto& ag = agents[i];
        return ag.kernel[static_cast<size_t>(context(i, joint)) * ag.actions.size() + a];
    }
    double reward(int i, int s, int a) const { return agents[i].reward[s * agents[i].num_actions() + a]; }
    // y_e for endpoint states given in the order of graph.edges()[e]
    double edge_value(int e, int s_first, int s_second) const;
};

// Each entry names the offending location.
struct ValidationIssue {
    enum class Kind { stochasticity, reward, index, schema, kernel_form };
    Kind kind;
    std::string message;
};

std::vector<ValidationIssue> validate(const FactoredMdp& model);

} // namespace gtlsynth
