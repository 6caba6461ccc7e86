#include "gtlsynth/graph.hpp"

#include <algorithm>
#include <string>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

AgentGraph::AgentGraph(int num_agents, std::vector<std::pair<int, int>> edges)
    : m_(num_agents), closed_(num_agents), incident_(num_agents) {
    if (num_agents < 0) throw Error(ErrorCode::argument, "negative agent count");
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= m_ || v >= m_)
            throw Error(ErrorCode::index, "edge {" + std::to_string(u) + "," + std::to_string(v) +
                                              "} references an agent outside 0.." + std::to_string(m_ - 1));
        if (u == v) throw Error(ErrorCode::schema, "self-loop on agent " + std::to_string(u));
        if (u > v) std::swap(u, v);
        if (std::find(edges_.begin(), edges_.end(), std::make_pair(u, v)) != edges_.end())
            throw Error(ErrorCode::schema, "duplicate edge {" + std::to_string(u) + "," + std::to_string(v) + "}");
        edges_.emplace_back(u, v);
    }
    for (int i = 0; i < m_; ++i) closed_[i].push_back(i);
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        auto [u, v] = edges_[e];
        closed_[u].push_back(v);
        closed_[v].push_back(u);
        incident_[u].emplace_back(e, v);
        incident_[v].emplace_back(e, u);
    }
    for (auto& n : closed_) std::sort(n.begin(), n.end());
}

void AgentGraph::check(int i) const {
    if (i < 0 || i >= m_)
        throw Error(ErrorCode::index, "agent index " + std::to_string(i) + " out of range (M=" + std::to_string(m_) + ")");
}

const std::vector<int>& AgentGraph::closed(int i) const {
    check(i);
    return closed_[i];
}

std::vector<int> AgentGraph::open(int i) const {
    check(i);
    std::vector<int> out;
    for (int k : closed_[i])
        if (k != i) out.push_back(k);
    return out;
}

std::vector<int> AgentGraph::common(int i, int j) const {
    check(i);
    check(j);
    std::vector<int> out;
    std::set_intersection(closed_[i].begin(), closed_[i].end(), closed_[j].begin(), closed_[j].end(),
                          std::back_inserter(out));
    return out;
}

std::vector<int> AgentGraph::minus(int i, int j) const {
    check(i);
    check(j);
    std::vector<int> out;
    std::set_difference(closed_[i].begin(), closed_[i].end(), closed_[j].begin(), closed_[j].end(),
                        std::back_inserter(out));
    return out;
}

bool AgentGraph::adjacent(int i, int j) const { return edge_index(i, j) >= 0; }

int AgentGraph::edge_index(int i, int j) const {
    check(i);
    check(j);
    for (auto [e, o] : incident_[i])
        if (o == j) return e;
    return -1;
}

const std::vector<std::pair<int, int>>& AgentGraph::incident(int i) const {
    check(i);
    return incident_[i];
}

} // namespace gtlsynth
