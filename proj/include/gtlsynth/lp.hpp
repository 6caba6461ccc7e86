#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace gtlsynth {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { state_action, nbhd_state, dfa_mass, transport, aux };

// Identifies what an LP column stands for. Unused fields stay -1.
struct VarKey {
    int agent = -1;
    VarKind kind = VarKind::state_action;
    int64_t state = -1;   // local state or neighborhood code (or letter for transport)
    int q = -1;
    int64_t action = -1;  // local action or joint-action code
    int t = -1;
    int own_action = -1;  // owner's component of a joint action
};

enum class Sense { eq, ge, le };

// Linear program: maximize obj'x - 1/2 sum quad_j x_j^2 subject to rows and
// bounds. Coupling rows are the consistency rows shared between agents.
class OccupancyLp {
public:
    int add_var(const VarKey& key, double lb, double ub, double obj);
    int add_row(Sense sense, double rhs, int block, bool coupling = false);
    void add(int row, int var, double v);

    int num_vars() const { return static_cast<int>(keys.size()); }
    int num_rows() const { return static_cast<int>(rhs.size()); }
    size_t num_nonzeros() const { return val.size(); }

    std::vector<VarKey> keys;
    std::vector<double> lb, ub, obj, quad;
    std::vector<Sense> sense;
    std::vector<double> rhs;
    std::vector<char> coupling;
    std::vector<int> block;          // owning agent per row, -1 for shared rows
    std::vector<int> row_of, col_of; // triplets
    std::vector<double> val;
    std::vector<int> threshold_rows;
    std::string formulation;
};

struct ResidualReport {
    double max_violation = 0;      // rows and bounds
    double max_row_violation = 0;
    double max_bound_violation = 0;
    double coupling_violation = 0; // max over coupling rows
    double coupling_norm2 = 0;     // sum of squared coupling-row residuals
    double threshold_slack = kInf; // min over threshold rows of lhs - rhs
    double objective = 0;
    std::vector<int> violated_rows;  // rows above tolerance
};

ResidualReport check_solution(const OccupancyLp& lp, const std::vector<double>& x, double tol = 1e-6);

// Text in the CPLEX LP interchange format.
std::string export_lp_text(const OccupancyLp& lp);

enum class SolveStatus { optimal, infeasible, failed };

// Full primal-dual point of a solve, reusable as a starting point for a
// solve of an LP with the same shape.
struct SolverIterate {
    std::vector<double> x, y, zl, zu;
};

struct SolveResult {
    SolveStatus status = SolveStatus::failed;
    std::vector<double> x;
    std::vector<double> y;  // row duals
    double objective = 0;
    int iterations = 0;
    std::string message;
    std::shared_ptr<const SolverIterate> iterate;  // null when the backend keeps none
};

struct SolverOptions {
    double tol = 1e-9;
    int max_iter = 200;
    bool verbose = false;
};

// Pluggable backend. One solve per instance at a time.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string id() const = 0;
    virtual bool supports_qp() const = 0;
    virtual SolveResult solve(const OccupancyLp& lp) = 0;
    // Same LP shape as the solve that produced `start`; backends without
    // warm starts ignore it.
    virtual SolveResult solve_warm(const OccupancyLp& lp, const SolverIterate& /*start*/) { return solve(lp); }
};

class InteriorPointSolver : public SolverBackend {
public:
    explicit InteriorPointSolver(SolverOptions opt = {}) : opt_(opt) {}
    std::string id() const override;
    bool supports_qp() const override { return true; }
    SolveResult solve(const OccupancyLp& lp) override;
    SolveResult solve_warm(const OccupancyLp& lp, const SolverIterate& start) override;

private:
    SolveResult run(const OccupancyLp& lp, const SolverIterate* start);
    SolverOptions opt_;
};

} // namespace gtlsynth
