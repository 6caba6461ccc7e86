#include "gtlsynth/trajectory.hpp"

#include <string>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

GraphTrajectory make_trajectory(const FactoredMdp& model, std::vector<std::vector<int>> states) {
    if (states.empty()) throw Error(ErrorCode::argument, "trajectory needs at least one time index");
    GraphTrajectory g;
    g.horizon = static_cast<int>(states.size()) - 1;
    const auto& edges = model.graph.edges();
    for (size_t t = 0; t < states.size(); ++t) {
        const auto& st = states[t];
        if (static_cast<int>(st.size()) != model.size())
            throw Error(ErrorCode::argument, "trajectory row " + std::to_string(t) + " has wrong agent count");
        for (int i = 0; i < model.size(); ++i)
            if (st[i] < 0 || st[i] >= model.agents[i].num_states())
                throw Error(ErrorCode::index, "trajectory state out of range at t=" + std::to_string(t));
        std::vector<double> y(edges.size());
        for (size_t e = 0; e < edges.size(); ++e)
            y[e] = model.edge_value(static_cast<int>(e), st[edges[e].first], st[edges[e].second]);
        g.y.push_back(std::move(y));
    }
    g.states = std::move(states);
    return g;
}

} // namespace gtlsynth
