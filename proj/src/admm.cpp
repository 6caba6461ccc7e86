#include "gtlsynth/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

namespace {

// keeps the first nvars columns and nrows rows
OccupancyLp truncate(const OccupancyLp& lp, int nvars, int nrows) {
    OccupancyLp out;
    out.formulation = lp.formulation;
    out.keys.assign(lp.keys.begin(), lp.keys.begin() + nvars);
    out.lb.assign(lp.lb.begin(), lp.lb.begin() + nvars);
    out.ub.assign(lp.ub.begin(), lp.ub.begin() + nvars);
    out.obj.assign(lp.obj.begin(), lp.obj.begin() + nvars);
    out.quad.assign(lp.quad.begin(), lp.quad.begin() + nvars);
    out.sense.assign(lp.sense.begin(), lp.sense.begin() + nrows);
    out.rhs.assign(lp.rhs.begin(), lp.rhs.begin() + nrows);
    out.coupling.assign(lp.coupling.begin(), lp.coupling.begin() + nrows);
    out.block.assign(lp.block.begin(), lp.block.begin() + nrows);
    for (size_t k = 0; k < lp.val.size(); ++k)
        if (lp.row_of[k] < nrows && lp.col_of[k] < nvars) {
            out.row_of.push_back(lp.row_of[k]);
            out.col_of.push_back(lp.col_of[k]);
            out.val.push_back(lp.val[k]);
        }
    for (int r : lp.threshold_rows)
        if (r < nrows) out.threshold_rows.push_back(r);
    return out;
}

std::vector<double> solve_block(SolverBackend& backend, const OccupancyLp& lp, int agent, int keep,
                                std::shared_ptr<const SolverIterate>* warm = nullptr) {
    auto r = warm && *warm ? backend.solve_warm(lp, **warm) : backend.solve(lp);
    if (r.status != SolveStatus::optimal && warm && *warm) r = backend.solve(lp);  // retry cold
    if (r.status != SolveStatus::optimal) {
        // an iteration-limited solve that is primal feasible is still usable
        const bool finite = std::all_of(r.x.begin(), r.x.end(), [](double v) { return std::isfinite(v); });
        if (r.status == SolveStatus::failed && finite && check_solution(lp, r.x).max_violation <= 1e-6) {
        } else {
            throw Error(r.status == SolveStatus::infeasible ? ErrorCode::infeasible : ErrorCode::solver,
                        "agent " + std::to_string(agent) + " subproblem: " + r.message);
        }
    }
    if (warm) *warm = r.iterate;
    r.x.resize(keep);
    return r.x;
}

} // namespace

BlockProblem split_blocks(const OccupancyLp& lp) {
    BlockProblem bp;
    bp.num_vars = lp.num_vars();
    bp.obj = lp.obj;
    std::map<int, int> block_of_agent;
    std::vector<int> local(lp.num_vars());
    for (int v = 0; v < lp.num_vars(); ++v) {
        const int agent = lp.keys[v].agent;
        if (agent < 0) throw Error(ErrorCode::argument, "LP column without an agent; nothing to split");
        auto it = block_of_agent.find(agent);
        if (it == block_of_agent.end()) {
            it = block_of_agent.emplace(agent, static_cast<int>(bp.blocks.size())).first;
            bp.blocks.emplace_back();
            bp.blocks.back().agent = agent;
            bp.blocks.back().lp.formulation = lp.formulation;
        }
        auto& b = bp.blocks[it->second];
        local[v] = static_cast<int>(b.vars.size());
        b.vars.push_back(v);
        b.lp.add_var(lp.keys[v], lp.lb[v], lp.ub[v], lp.obj[v]);
        b.lp.quad.back() = lp.quad[v];
    }
    std::vector<int> var_block(lp.num_vars());
    for (size_t bi = 0; bi < bp.blocks.size(); ++bi)
        for (int v : bp.blocks[bi].vars) var_block[v] = static_cast<int>(bi);

    std::vector<std::vector<std::pair<int, double>>> rows(lp.num_rows());
    for (size_t k = 0; k < lp.val.size(); ++k) rows[lp.row_of[k]].emplace_back(lp.col_of[k], lp.val[k]);
    std::vector<char> is_threshold(lp.num_rows(), 0);
    for (int r : lp.threshold_rows) is_threshold[r] = 1;
    for (int r = 0; r < lp.num_rows(); ++r) {
        if (lp.coupling[r]) continue;
        if (rows[r].empty()) continue;
        const int bi = var_block[rows[r][0].first];
        if (lp.block[r] >= 0 && bp.blocks[bi].agent != lp.block[r])
            throw Error(ErrorCode::argument, "row " + std::to_string(r) + " is owned by a different agent");
        auto& b = bp.blocks[bi];
        const int row = b.lp.add_row(lp.sense[r], lp.rhs[r], b.agent);
        if (is_threshold[r]) b.lp.threshold_rows.push_back(row);
        for (auto [v, c] : rows[r]) {
            if (var_block[v] != bi)
                throw Error(ErrorCode::argument, "unmarked coupling structure: row " + std::to_string(r) + " spans agents");
            b.lp.add(row, local[v], c);
        }
    }
    for (auto& b : bp.blocks) b.num_own_vars = b.lp.num_vars();
    for (int r = 0; r < lp.num_rows(); ++r) {
        if (!lp.coupling[r]) continue;
        if (lp.sense[r] != Sense::eq || lp.rhs[r] != 0.0)
            throw Error(ErrorCode::argument, "coupling row " + std::to_string(r) + " is not a homogeneous equality");
        std::map<int, std::vector<std::pair<int, double>>> parts;
        for (auto [v, c] : rows[r]) parts[var_block[v]].emplace_back(local[v], c);
        if (parts.size() != 2)
            throw Error(ErrorCode::argument, "coupling row " + std::to_string(r) + " touches " + std::to_string(parts.size()) +
                                                 " agents, expected two");
        const int id = static_cast<int>(bp.coupling_rows.size());
        bp.coupling_rows.push_back(r);
        std::array<int, 2> pair{};
        int side = 0;
        for (auto& [bi, entries] : parts) {
            pair[side++] = bi;
            auto& b = bp.blocks[bi];
            b.touched.push_back(id);
            b.b_rows.push_back(std::move(entries));
        }
        bp.row_blocks.push_back(pair);
    }
    // u_r = (B o)_r rows keep the quadratic penalty diagonal
    for (auto& b : bp.blocks) {
        for (size_t t = 0; t < b.touched.size(); ++t) {
            VarKey key;
            key.agent = b.agent;
            key.kind = VarKind::aux;
            key.state = b.touched[t];
            const int u = b.lp.add_var(key, -kInf, kInf, 0.0);
            b.u_col.push_back(u);
            const int row = b.lp.add_row(Sense::eq, 0.0, b.agent);
            b.lp.add(row, u, 1.0);
            for (auto [v, c] : b.b_rows[t]) b.lp.add(row, v, -c);
        }
    }
    return bp;
}

std::vector<double> block_coupling(const Block& b, const std::vector<double>& o) {
    std::vector<double> out(b.touched.size(), 0.0);
    for (size_t t = 0; t < b.touched.size(); ++t)
        for (auto [v, c] : b.b_rows[t]) out[t] += c * o[v];
    return out;
}

namespace {

// z-update shared by init and step; nu = 0 reproduces the initial split
void update_z(AdmmState& st, const BlockProblem& bp) {
    const int nb = static_cast<int>(bp.blocks.size());
    const size_t nr = bp.coupling_rows.size();
    std::vector<double> g(nr, 0.0);
    std::vector<std::vector<double>> bo(nb);
    for (int i = 0; i < nb; ++i) {
        bo[i] = block_coupling(bp.blocks[i], st.o[i]);
        const auto& b = bp.blocks[i];
        for (size_t t = 0; t < b.touched.size(); ++t) g[b.touched[t]] += bo[i][t] - st.nu[i][t] / st.beta;
    }
    for (size_t r = 0; r < nr; ++r) g[r] -= (nb - 2) * st.nu_out[r] / st.beta;
    for (int i = 0; i < nb; ++i) {
        const auto& b = bp.blocks[i];
        for (size_t t = 0; t < b.touched.size(); ++t)
            st.z[i][t] = bo[i][t] - st.nu[i][t] / st.beta - g[b.touched[t]] / nb;
    }
    for (size_t r = 0; r < nr; ++r) st.z_out[r] = -st.nu_out[r] / st.beta - g[r] / nb;
}

} // namespace

AdmmState admm_init(BlockProblem& bp, double beta, SolverBackend& backend) {
    if (!(beta > 0)) throw Error(ErrorCode::argument, "beta must be positive");
    if (!backend.supports_qp()) throw Error(ErrorCode::argument, "ADMM needs a QP-capable backend");
    AdmmState st;
    st.beta = beta;
    const int nb = static_cast<int>(bp.blocks.size());
    st.o.resize(nb);
    st.warm.assign(nb, nullptr);
    st.z.resize(nb);
    st.nu.resize(nb);
    for (int i = 0; i < nb; ++i) {
        auto& b = bp.blocks[i];
        for (int u : b.u_col) b.lp.quad[u] = beta;
        const int own_rows = b.lp.num_rows() - static_cast<int>(b.touched.size());
        st.o[i] = solve_block(backend, truncate(b.lp, b.num_own_vars, own_rows), b.agent, b.num_own_vars);
        st.z[i].assign(b.touched.size(), 0.0);
        st.nu[i].assign(b.touched.size(), 0.0);
    }
    st.z_out.assign(bp.coupling_rows.size(), 0.0);
    st.nu_out.assign(bp.coupling_rows.size(), 0.0);
    update_z(st, bp);
    st.o_prev = st.o;
    std::tie(st.res_p, st.res_d) = residuals(st, bp);
    return st;
}

void admm_step(AdmmState& st, BlockProblem& bp, SolverBackend& backend) {
    const int nb = static_cast<int>(bp.blocks.size());
    update_z(st, bp);
    st.o_prev = st.o;
    for (int i = 0; i < nb; ++i) {
        auto& b = bp.blocks[i];
        if (b.touched.empty() && st.k > 0) continue;  // uncoupled block: fixed point
        for (size_t t = 0; t < b.touched.size(); ++t)
            b.lp.obj[b.u_col[t]] = st.beta * (st.z[i][t] + st.nu[i][t] / st.beta);
        st.o[i] = solve_block(backend, b.lp, b.agent, b.num_own_vars, &st.warm[i]);
    }
    for (int i = 0; i < nb; ++i) {
        const auto& b = bp.blocks[i];
        const auto bo = block_coupling(b, st.o[i]);
        for (size_t t = 0; t < b.touched.size(); ++t) st.nu[i][t] -= st.beta * (bo[t] - st.z[i][t]);
    }
    for (size_t r = 0; r < bp.coupling_rows.size(); ++r) st.nu_out[r] += st.beta * st.z_out[r];
    ++st.k;
    std::tie(st.res_p, st.res_d) = residuals(st, bp);
}

std::pair<double, double> residuals(const AdmmState& st, const BlockProblem& bp) {
    const int nb = static_cast<int>(bp.blocks.size());
    double rp = 0, rd = 0;
    for (int i = 0; i < nb; ++i) {
        const auto& b = bp.blocks[i];
        const auto bo = block_coupling(b, st.o[i]);
        const auto bp_prev = block_coupling(b, st.o_prev[i]);
        for (size_t t = 0; t < b.touched.size(); ++t) {
            rp += (bo[t] - st.z[i][t]) * (bo[t] - st.z[i][t]);
            rd += st.beta * (bo[t] - bp_prev[t]) * (bo[t] - bp_prev[t]);
        }
    }
    for (double z : st.z_out) rp += (nb - 2) * z * z;
    return {rp, rd};
}

std::vector<double> assemble(const AdmmState& st, const BlockProblem& bp) {
    std::vector<double> x(bp.num_vars, 0.0);
    for (size_t i = 0; i < bp.blocks.size(); ++i)
        for (size_t v = 0; v < bp.blocks[i].vars.size(); ++v) x[bp.blocks[i].vars[v]] = st.o[i][v];
    return x;
}

AdmmResult run_admm(BlockProblem& bp, const AdmmOptions& opt, SolverBackend& backend) {
    if (!(opt.gamma > 0) || opt.max_iter < 1) throw Error(ErrorCode::argument, "ADMM needs gamma > 0 and at least one iteration");
    const auto start = std::chrono::steady_clock::now();
    AdmmState st = admm_init(bp, opt.beta, backend);
    AdmmResult res;
    for (int it = 1; it <= opt.max_iter; ++it) {
        admm_step(st, bp, backend);
        AdmmTraceRow row;
        row.iteration = st.k;
        row.res_p = st.res_p;
        row.res_d = st.res_d;
        const auto x = assemble(st, bp);
        for (int v = 0; v < bp.num_vars; ++v) row.objective += bp.obj[v] * x[v];
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        res.trace.push_back(row);
        res.iterations = st.k;
        if (st.res_p <= opt.gamma && st.res_d <= opt.gamma) {
            res.converged = true;
            break;
        }
        if (opt.on_iteration && !opt.on_iteration(row)) break;
    }
    res.x = assemble(st, bp);
    for (int v = 0; v < bp.num_vars; ++v) res.objective += bp.obj[v] * res.x[v];
    return res;
}

std::string trace_csv(const std::vector<AdmmTraceRow>& trace) {
    std::ostringstream os;
    os.precision(10);
    os << "iteration,res_p,res_d,objective,wall_ms\n";
    for (const auto& r : trace)
        os << r.iteration << ',' << r.res_p << ',' << r.res_d << ',' << r.objective << ',' << r.wall_ms << '\n';
    return os.str();
}

} // namespace gtlsynth
