#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gtlsynth/gtl.hpp"
#include "gtlsynth/model.hpp"

namespace gtlsynth {

struct ScenarioConfig {
    std::string kind = "crop";  // crop | urban | rescue
    int agents = 4;             // crop fields or rescue robots
    int rows = 0, cols = 0;     // crop torus layout; 0 means square
    double epsilon = 0.05;
    double p = 0.1;
    double xi = 0.1;
    double r = 10.0;
    double lambda = 0.9;
    double constrained_fraction = 0.5;
    int initial_state = 0;      // crop: 0 is uninfected
    uint64_t seed = 1;

    void validate() const;
};

struct Scenario {
    ScenarioConfig config;
    FactoredMdp model;
    std::vector<std::optional<Formula>> formulas;
    std::vector<double> lambda;
    std::vector<int> constrained;
};

// eps + (1 - eps) (1 - (1 - p)^n)
double crop_escalation(double eps, double p, int infected_neighbors);

extern const char* const kCropFormula;
extern const char* const kRescueFormula;

Scenario gen_crop(const ScenarioConfig& config);
Scenario gen_urban(const ScenarioConfig& config);
Scenario gen_rescue(const ScenarioConfig& config);
Scenario gen_scenario(const ScenarioConfig& config);

// Fisher-Yates selection of round(fraction * n) indices, sorted.
std::vector<int> sample_subset(int n, double fraction, uint64_t seed);

} // namespace gtlsynth
