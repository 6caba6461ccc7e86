#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gtlsynth/lp.hpp"

namespace gtlsynth {

// One agent's slice of a coupled LP. Columns are the agent's variables in
// global order; B holds its coefficients on the coupling rows it touches.
struct Block {
    int agent = 0;
    std::vector<int> vars;        // global column per local column
    OccupancyLp lp;               // own rows only, plus u_r = (B o)_r rows and u columns
    std::vector<int> touched;     // coupling row ids (index into BlockProblem::coupling_rows)
    std::vector<int> u_col;       // local column of u per touched row
    std::vector<std::vector<std::pair<int, double>>> b_rows;  // per touched row: (local col, coeff)
    int num_own_vars = 0;         // columns before the u block
};

struct BlockProblem {
    int num_vars = 0;             // of the source LP
    std::vector<int> coupling_rows;  // source row per coupling row
    std::vector<std::array<int, 2>> row_blocks;  // the two blocks each coupling row touches
    std::vector<Block> blocks;
    std::vector<double> obj;      // source objective
};

// Throws ErrorCode::argument when the LP has no agent blocks, when an own
// row mixes agents, or when a coupling row does not touch exactly two agents.
BlockProblem split_blocks(const OccupancyLp& lp);

// Iterate state. z and nu live in the full coupling space of every block; a
// coupling row touches two blocks, and every other block shares one value
// (z_out, nu_out) per row, which is stored once.
struct AdmmState {
    int k = 0;
    double beta = 1.0;
    std::vector<std::vector<double>> o, o_prev;     // per block, own columns
    std::vector<std::vector<double>> z, nu;         // per block, per touched row
    std::vector<double> z_out, nu_out;              // per coupling row
    double res_p = 0, res_d = 0;
    std::vector<std::shared_ptr<const SolverIterate>> warm;  // last QP point per block
};

struct AdmmTraceRow {
    int iteration = 0;
    double res_p = 0, res_d = 0, objective = 0, wall_ms = 0;
};

struct AdmmResult {
    std::vector<double> x;  // source LP columns
    std::vector<AdmmTraceRow> trace;
    int iterations = 0;
    bool converged = false;
    double objective = 0;
};

using BackendFactory = std::function<std::unique_ptr<SolverBackend>()>;

// o^0 from each block's uncoupled LP, nu^0 = 0, z^0 = B o^0 - mean.
AdmmState admm_init(BlockProblem& blocks, double beta, SolverBackend& backend);

// z-update, o-update (a QP per block), nu-update; then residuals.
void admm_step(AdmmState& state, BlockProblem& blocks, SolverBackend& backend);

// res_p = sum_i ||B_i o_i - z_i||^2, res_d = sum_i beta ||B_i (o_i - o_i^prev)||^2
std::pair<double, double> residuals(const AdmmState& state, const BlockProblem& blocks);

// B_i o_i restricted to the touched rows
std::vector<double> block_coupling(const Block& b, const std::vector<double>& o);

std::vector<double> assemble(const AdmmState& state, const BlockProblem& blocks);

struct AdmmOptions {
    double beta = 1.0;
    double gamma = 1e-4;
    int max_iter = 500;
    // called after every iteration; return false to stop
    std::function<bool(const AdmmTraceRow&)> on_iteration;
};

AdmmResult run_admm(BlockProblem& blocks, const AdmmOptions& opt, SolverBackend& backend);

std::string trace_csv(const std::vector<AdmmTraceRow>& trace);

} // namespace gtlsynth
