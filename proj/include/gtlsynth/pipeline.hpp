#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gtlsynth/admm.hpp"
#include "gtlsynth/formulations.hpp"
#include "gtlsynth/oracle.hpp"
#include "gtlsynth/policy.hpp"
#include "gtlsynth/scenarios.hpp"

namespace gtlsynth {

// A model together with its per-agent specifications.
struct Instance {
    FactoredMdp model;
    std::vector<std::optional<Formula>> formulas;
    std::vector<double> lambda;
};

Instance instance_from(const Scenario& sc);

// {"specs": [{"agent": 0, "formula": "...", "lambda": 0.9}, ...]}
void apply_specs(Instance& inst, const std::string& json_text);
std::string serialize_specs(const Instance& inst);

enum class Method { monolithic, neighboring, local, admm };
Method parse_method(const std::string& name);
std::string to_string(Method m);

struct SynthOptions {
    Method method = Method::local;
    Method admm_base = Method::local;  // formulation that ADMM splits
    int horizon = -1;
    std::optional<double> lambda;      // replaces the threshold of every constrained agent
    LpOptions lp;
    SolverOptions solver;
    AdmmOptions admm;
};

struct SynthOutcome {
    SolveStatus status = SolveStatus::failed;
    std::string message;
    std::string formulation;
    double objective = 0;
    Policy policy;
    int num_vars = 0, num_rows = 0;
    size_t num_nonzeros = 0;
    ResidualReport residuals;
    std::vector<AdmmTraceRow> trace;
    int iterations = 0;
    bool converged = false;
    double build_seconds = 0, solve_seconds = 0;
    std::string backend;
};

// Infeasible instances come back with status infeasible; other failures throw.
SynthOutcome synthesize(const Instance& inst, const SynthOptions& opt);

std::string report_csv(const EvaluationReport& rep);

} // namespace gtlsynth
