#pragma once

#include <vector>

#include "gtlsynth/model.hpp"

namespace gtlsynth {

// States at time indices 0..horizon; edge labels are always derived from the
// model's edge-label function.
struct GraphTrajectory {
    int horizon = 0;
    std::vector<std::vector<int>> states;   // [t][agent]
    std::vector<std::vector<double>> y;     // [t][edge]
};

GraphTrajectory make_trajectory(const FactoredMdp& model, std::vector<std::vector<int>> states);

} // namespace gtlsynth
