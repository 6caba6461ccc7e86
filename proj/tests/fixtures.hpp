#pragma once

#include <string>
#include <vector>

#include "gtlsynth/model.hpp"

namespace fixtures {

using namespace gtlsynth;

// Agent with named states and uniform kernel rows over `nexts` successors.
inline AgentModel plain_agent(const std::string& name, std::vector<std::string> states, std::vector<std::string> actions) {
    AgentModel ag;
    ag.name = name;
    ag.states = std::move(states);
    ag.actions = std::move(actions);
    const size_t ns = ag.states.size();
    ag.coords.assign(ns, {});
    ag.attrs.assign(ns, {});
    ag.labels.assign(ns, {});
    ag.reward.assign(ns * ag.actions.size(), 0.0);
    return ag;
}

inline void uniform_kernel(FactoredMdp& m, int i) {
    auto& ag = m.agents[i];
    const int ns = ag.num_states();
    ag.kernel.assign(static_cast<size_t>(m.context_count(i)) * ag.num_actions(), {});
    for (auto& row : ag.kernel)
        for (int s = 0; s < ns; ++s) row.push_back({s, 1.0 / ns});
}

// Four agents on the five-edge example graph, state counts 3,4,4,3,
// agent 0 conditioned on agents 1 and 2.
inline FactoredMdp fig2_model() {
    FactoredMdp m;
    m.form = KernelForm::neighborhood;
    m.graph = AgentGraph(4, {{0, 1}, {0, 2}, {1, 3}, {1, 2}, {2, 3}});
    const int counts[4] = {3, 4, 4, 3};
    for (int i = 0; i < 4; ++i) {
        std::vector<std::string> st;
        for (int s = 0; s < counts[i]; ++s) st.push_back("s" + std::to_string(s));
        m.agents.push_back(plain_agent("v" + std::to_string(i + 1), st, {"a"}));
        for (int s = 0; s < counts[i]; ++s) m.agents[i].attrs[s]["x"] = s;
    }
    m.agents[0].depends_on = {1, 2};
    for (int i = 0; i < 4; ++i) uniform_kernel(m, i);
    return m;
}

// Colored nodes with the edge labels of the two-step example trajectory.
inline FactoredMdp fig4_model() {
    FactoredMdp m = fig2_model();
    m.form = KernelForm::local;
    m.graph = AgentGraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {1, 2}});
    for (int i = 0; i < 4; ++i) {
        m.agents[i] = plain_agent("v" + std::to_string(i + 1), {"blue", "orange", "red"}, {"a"});
        for (int s = 0; s < 3; ++s) m.agents[i].labels[s] = {m.agents[i].states[s]};
        uniform_kernel(m, i);
    }
    enum { B, O, R };
    auto& tb = m.edge_label;
    tb.kind = EdgeLabel::Kind::table;
    tb.has_default = true;
    tb.value = 99;
    // t=1 states: 1 blue, 2 orange, 3 red, 4 blue; t=2: 1 red, 2 blue, 3 orange, 4 red
    tb.table[{0, B, O}] = 1; tb.table[{0, R, B}] = 2;
    tb.table[{1, B, R}] = 4; tb.table[{1, R, O}] = 1;
    tb.table[{2, O, B}] = 1; tb.table[{2, B, R}] = 3;
    tb.table[{3, R, B}] = 2; tb.table[{3, O, R}] = 3;
    tb.table[{4, O, R}] = 3; tb.table[{4, B, O}] = 2;
    return m;
}

inline const char* two_agent_doc() {
    return R"({
  "kernel_form": "local",
  "edges": [[0, 1]],
  "edge_label": {"kind": "constant", "value": 1},
  "agents": [
    {"name": "a", "states": [{"name": "u"}, {"name": "v"}], "actions": ["go"], "initial": "u",
     "kernel": [{"state": "u", "action": "go", "next": "u", "prob": 0.5},
                {"state": "u", "action": "go", "next": "v", "prob": 0.5},
                {"state": "v", "action": "go", "next": "u", "prob": 0.5},
                {"state": "v", "action": "go", "next": "v", "prob": 0.5}],
     "reward": [{"state": "u", "action": "go", "value": 1}]},
    {"name": "b", "states": [{"name": "u", "labels": ["home"]}, {"name": "v"}], "actions": ["go"], "initial": "v",
     "kernel": [{"state": "u", "action": "go", "next": "u", "prob": 0.5},
                {"state": "u", "action": "go", "next": "v", "prob": 0.5},
                {"state": "v", "action": "go", "next": "u", "prob": 0.5},
                {"state": "v", "action": "go", "next": "v", "prob": 0.5}]}
  ]
})";
}

} // namespace fixtures
