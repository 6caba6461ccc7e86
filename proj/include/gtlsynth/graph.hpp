#pragma once

#include <utility>
#include <vector>

namespace gtlsynth {

// Undirected interaction graph. Neighborhoods are closed and kept sorted.
class AgentGraph {
public:
    AgentGraph() = default;
    AgentGraph(int num_agents, std::vector<std::pair<int, int>> edges);

    int size() const { return m_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    const std::vector<int>& closed(int i) const;  // N(i)
    std::vector<int> open(int i) const;           // N(i) \ {i}
    std::vector<int> common(int i, int j) const;  // N(i) ∩ N(j)
    std::vector<int> minus(int i, int j) const;   // N(i) \ N(j)
    bool adjacent(int i, int j) const;
    // index into edges(), or -1
    int edge_index(int i, int j) const;
    // edges incident to i as (edge index, other endpoint)
    const std::vector<std::pair<int, int>>& incident(int i) const;

private:
    void check(int i) const;

    int m_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> closed_;
    std::vector<std::vector<std::pair<int, int>>> incident_;
};

} // namespace gtlsynth
