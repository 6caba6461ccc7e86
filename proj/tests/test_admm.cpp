#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "gtlsynth/admm.hpp"
#include "gtlsynth/error.hpp"
#include "gtlsynth/formulations.hpp"
#include "gtlsynth/gtl.hpp"

using namespace gtlsynth;

namespace {

// agent k owns (x_k0, x_k1) on the simplex with objective (c_k0, c_k1);
// row r couples x_{r,0} - x_{r+1,0} = 0
OccupancyLp simplex_chain(const std::vector<std::pair<double, double>>& costs) {
    OccupancyLp lp;
    const int m = static_cast<int>(costs.size());
    for (int k = 0; k < m; ++k) {
        VarKey key;
        key.agent = k;
        key.state = 0;
        lp.add_var(key, 0, kInf, costs[k].first);
        key.state = 1;
        lp.add_var(key, 0, kInf, costs[k].second);
        const int row = lp.add_row(Sense::eq, 1.0, k);
        lp.add(row, 2 * k, 1.0);
        lp.add(row, 2 * k + 1, 1.0);
    }
    for (int k = 0; k + 1 < m; ++k) {
        const int row = lp.add_row(Sense::eq, 0.0, -1, true);
        lp.add(row, 2 * k, 1.0);
        lp.add(row, 2 * (k + 1), -1.0);
    }
    return lp;
}

// Straight-line ADMM on two simplex agents coupled by x_a0 - x_b0 = 0.
// Each QP is max (c0 - c1) x + c1 - beta/2 (b x - v)^2 on x in [0,1], which
// has the closed form x = clamp(v / b + (c0 - c1) / (beta b^2), 0, 1).
struct Reference {
    double beta;
    double c[2][2];
    double b[2] = {1.0, -1.0};
    double x[2], xprev[2], z[2] = {0, 0}, nu[2] = {0, 0};
    double res_p = 0, res_d = 0;

    void init() {
        for (int i = 0; i < 2; ++i) x[i] = c[i][0] > c[i][1] ? 1.0 : 0.0;
        std::copy(x, x + 2, xprev);
    }
    void step() {
        const double bo[2] = {b[0] * x[0], b[1] * x[1]};
        const double sum = (bo[0] - nu[0] / beta) + (bo[1] - nu[1] / beta);
        for (int i = 0; i < 2; ++i) z[i] = -sum / 2 + bo[i] - nu[i] / beta;
        std::copy(x, x + 2, xprev);
        for (int i = 0; i < 2; ++i) {
            const double v = z[i] + nu[i] / beta;
            x[i] = std::clamp(v / b[i] + (c[i][0] - c[i][1]) / (beta * b[i] * b[i]), 0.0, 1.0);
        }
        for (int i = 0; i < 2; ++i) nu[i] -= beta * (b[i] * x[i] - z[i]);
        res_p = res_d = 0;
        for (int i = 0; i < 2; ++i) {
            res_p += std::pow(b[i] * x[i] - z[i], 2);
            res_d += beta * std::pow(b[i] * (x[i] - xprev[i]), 2);
        }
    }
};

InteriorPointSolver tight_solver() {
    SolverOptions o;
    o.tol = 1e-12;
    o.max_iter = 300;
    return InteriorPointSolver(o);
}

// dense z for block i on coupling row r
double z_at(const AdmmState& st, const BlockProblem& bp, int i, int r) {
    const auto& t = bp.blocks[i].touched;
    auto it = std::find(t.begin(), t.end(), r);
    return it == t.end() ? st.z_out[r] : st.z[i][it - t.begin()];
}

double nu_at(const AdmmState& st, const BlockProblem& bp, int i, int r) {
    const auto& t = bp.blocks[i].touched;
    auto it = std::find(t.begin(), t.end(), r);
    return it == t.end() ? st.nu_out[r] : st.nu[i][it - t.begin()];
}

FactoredMdp toggle_pair(bool edge) {
    FactoredMdp m;
    m.form = KernelForm::local;
    m.graph = edge ? AgentGraph(2, {{0, 1}}) : AgentGraph(2, {});
    for (int i = 0; i < 2; ++i) {
        auto ag = fixtures::plain_agent("a" + std::to_string(i), {"s0", "s1"}, {"stay", "go"});
        ag.labels[0] = {"g"};
        ag.initial = 1;
        ag.kernel = {{{0, 1.0}}, {{1, 1.0}}, {{1, 1.0}}, {{0, 1.0}}};
        ag.reward = {1, 0, 3, 0};
        m.agents.push_back(ag);
    }
    return m;
}

} // namespace

TEST_CASE("split_blocks: two-block toy structure and reassembly") {
    auto lp = simplex_chain({{1.0, 0.3}, {0.2, 1.0}, {0.5, 0.5}});
    auto bp = split_blocks(lp);
    REQUIRE(bp.blocks.size() == 3);
    CHECK(bp.coupling_rows.size() == 2);
    CHECK(bp.blocks[1].touched.size() == 2);
    // every source column in exactly one block, own rows plus coupling rows cover the LP
    std::set<int> cols;
    int own_rows = 0;
    size_t own_nnz = 0;
    for (const auto& b : bp.blocks) {
        for (int v : b.vars) CHECK(cols.insert(v).second);
        own_rows += b.lp.num_rows() - static_cast<int>(b.touched.size());
        for (size_t k = 0; k < b.lp.val.size(); ++k)
            if (b.lp.row_of[k] < b.lp.num_rows() - static_cast<int>(b.touched.size())) ++own_nnz;
    }
    CHECK(static_cast<int>(cols.size()) == lp.num_vars());
    size_t coupling_nnz = 0;
    for (const auto& b : bp.blocks)
        for (const auto& row : b.b_rows) coupling_nnz += row.size();
    CHECK(own_rows + static_cast<int>(bp.coupling_rows.size()) == lp.num_rows());
    CHECK(own_nnz + coupling_nnz == lp.num_nonzeros());
    for (size_t r = 0; r < bp.coupling_rows.size(); ++r) CHECK(bp.row_blocks[r][0] != bp.row_blocks[r][1]);
}

TEST_CASE("split_blocks: errors") {
    OccupancyLp lp;
    VarKey key;
    key.agent = 0;
    lp.add_var(key, 0, 1, 1);
    key.agent = 1;
    lp.add_var(key, 0, 1, 1);
    key.agent = 2;
    lp.add_var(key, 0, 1, 1);
    SUBCASE("own row mixing agents") {
        const int r = lp.add_row(Sense::eq, 1.0, 0);
        lp.add(r, 0, 1);
        lp.add(r, 1, 1);
        CHECK_THROWS_AS(split_blocks(lp), Error);
    }
    SUBCASE("coupling row over three agents") {
        const int r = lp.add_row(Sense::eq, 0.0, -1, true);
        lp.add(r, 0, 1);
        lp.add(r, 1, 1);
        lp.add(r, 2, -2);
        CHECK_THROWS_AS(split_blocks(lp), Error);
    }
}

TEST_CASE("admm: two-block toy matches a straight-line reference") {
    auto lp = simplex_chain({{1.0, 0.3}, {0.2, 1.0}});
    auto bp = split_blocks(lp);
    auto ipm = tight_solver();
    Reference ref{1.0, {{1.0, 0.3}, {0.2, 1.0}}};
    ref.init();
    auto st = admm_init(bp, 1.0, ipm);
    CHECK(st.o[0][0] == doctest::Approx(ref.x[0]).epsilon(1e-8));
    CHECK(st.o[1][0] == doctest::Approx(ref.x[1]).epsilon(1e-8));
    // first z from nu = 0: z_i = B_i o_i - mean
    CHECK(st.z[0][0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(st.z[1][0] == doctest::Approx(-0.5).epsilon(1e-9));
    for (int k = 1; k <= 6; ++k) {
        ref.step();
        admm_step(st, bp, ipm);
        CHECK(std::abs(st.o[0][0] - ref.x[0]) <= 1e-8);
        CHECK(std::abs(st.o[1][0] - ref.x[1]) <= 1e-8);
        CHECK(std::abs(st.z[0][0] - ref.z[0]) <= 1e-8);
        CHECK(std::abs(st.nu[1][0] - ref.nu[1]) <= 1e-8);
        CHECK(std::abs(st.res_p - ref.res_p) <= 1e-8);
        CHECK(std::abs(st.res_d - ref.res_d) <= 1e-8);
    }
}

TEST_CASE("admm: z sums to zero and matches the dense update with bystander blocks") {
    auto lp = simplex_chain({{1.0, 0.3}, {0.2, 1.0}, {0.6, 0.1}, {0.0, 0.4}});
    auto bp = split_blocks(lp);
    InteriorPointSolver ipm;
    auto st = admm_init(bp, 0.7, ipm);
    const int m = static_cast<int>(bp.blocks.size());
    const int rows = static_cast<int>(bp.coupling_rows.size());
    for (int k = 0; k < 5; ++k) {
        const auto prev = st;
        admm_step(st, bp, ipm);
        for (int r = 0; r < rows; ++r) {
            std::vector<double> bo(m, 0.0);
            double g = 0, zsum = 0;
            for (int i = 0; i < m; ++i) {
                const auto& t = bp.blocks[i].touched;
                auto it = std::find(t.begin(), t.end(), r);
                if (it != t.end()) bo[i] = block_coupling(bp.blocks[i], prev.o[i])[it - t.begin()];
                g += bo[i] - nu_at(prev, bp, i, r) / prev.beta;
            }
            for (int i = 0; i < m; ++i) {
                const double z = z_at(st, bp, i, r);
                CHECK(std::abs(z - (-g / m + bo[i] - nu_at(prev, bp, i, r) / prev.beta)) <= 1e-12);
                zsum += z;
            }
            CHECK(std::abs(zsum) <= 1e-9);
        }
        CHECK(st.res_p >= 0);
        CHECK(st.res_d >= 0);
    }
}

TEST_CASE("admm: decoupled agents stop after one iteration at the per-agent optima") {
    auto model = toggle_pair(false);
    auto f = parse_gtl("F[0,2] g");
    auto prob = make_problem(model, {f, f}, {0.9, 0.9});
    auto lp = build_neighboring_lp(prob, {});
    InteriorPointSolver ipm;
    const auto central = ipm.solve(lp);
    REQUIRE(central.status == SolveStatus::optimal);
    auto bp = split_blocks(lp);
    for (const auto& b : bp.blocks) CHECK(b.touched.empty());
    AdmmOptions opt;
    opt.gamma = 1e-6;
    auto st = admm_init(bp, 1.0, ipm);
    CHECK(st.res_p == 0.0);
    auto res = run_admm(bp, opt, ipm);
    CHECK(res.converged);
    CHECK(res.iterations == 1);
    CHECK(res.objective == doctest::Approx(central.objective).epsilon(1e-7));
}

TEST_CASE("admm: coupled pair agrees with the centralized optimum") {
    auto model = toggle_pair(true);
    auto f = parse_gtl("F[0,3] (g & E^1 O{true} g)");
    auto prob = make_problem(model, {f, std::nullopt}, {0.8, 0.0});
    auto lp = build_neighboring_lp(prob, {});
    InteriorPointSolver ipm;
    const auto central = ipm.solve(lp);
    REQUIRE(central.status == SolveStatus::optimal);
    auto bp = split_blocks(lp);
    CHECK(!bp.coupling_rows.empty());
    AdmmOptions opt;
    opt.max_iter = 2000;
    auto res = run_admm(bp, opt, ipm);
    CHECK(res.converged);
    CHECK(std::abs(res.objective - central.objective) <= 1e-2 * std::abs(central.objective));
    CHECK(check_solution(lp, res.x).max_violation <= 1e-2);
    const auto csv = trace_csv(res.trace);
    CHECK(csv.rfind("iteration,res_p,res_d,objective,wall_ms\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(res.trace.size()) + 1);
}

TEST_CASE("admm: example graph pair rows carry opposite signs") {
    auto model = fixtures::fig2_model();
    auto prob = make_problem(model, {std::nullopt, std::nullopt, std::nullopt, std::nullopt}, {0, 0, 0, 0}, 1);
    auto lp = build_neighboring_lp(prob, {});
    auto bp = split_blocks(lp);
    int rows01 = 0;
    for (size_t r = 0; r < bp.coupling_rows.size(); ++r) {
        const auto [a, b] = bp.row_blocks[r];
        if (bp.blocks[a].agent != 0 || bp.blocks[b].agent != 1) continue;
        ++rows01;
        auto coeffs = [&](int bi) {
            const auto& t = bp.blocks[bi].touched;
            return bp.blocks[bi].b_rows[std::find(t.begin(), t.end(), static_cast<int>(r)) - t.begin()];
        };
        for (auto [v, c] : coeffs(a)) CHECK(c == 1.0);
        for (auto [v, c] : coeffs(b)) CHECK(c == -1.0);
    }
    CHECK(rows01 == 49);
}

TEST_CASE("admm: argument checks") {
    auto bp = split_blocks(simplex_chain({{1, 0}, {0, 1}}));
    InteriorPointSolver ipm;
    CHECK_THROWS_AS(admm_init(bp, 0.0, ipm), Error);
    AdmmOptions opt;
    opt.gamma = 0;
    CHECK_THROWS_AS(run_admm(bp, opt, ipm), Error);
}

TEST_CASE("warm-started QP reaches the cold-start solution") {
    auto model = toggle_pair(true);
    auto f = parse_gtl("F[0,3] (g & E^1 O{true} g)");
    auto prob = make_problem(model, {f, std::nullopt}, {0.8, 0.0});
    auto bp = split_blocks(build_neighboring_lp(prob, {}));
    auto& lp = bp.blocks[0].lp;
    REQUIRE(!bp.blocks[0].u_col.empty());
    for (int c : bp.blocks[0].u_col) lp.quad[c] = 1.0;
    InteriorPointSolver ipm;
    const auto first = ipm.solve(lp);
    REQUIRE(first.status == SolveStatus::optimal);
    REQUIRE(first.iterate);
    for (size_t t = 0; t < bp.blocks[0].u_col.size(); ++t) lp.obj[bp.blocks[0].u_col[t]] = 0.1 * (t % 3) - 0.05;
    const auto cold = ipm.solve(lp);
    const auto warm = ipm.solve_warm(lp, *first.iterate);
    REQUIRE(cold.status == SolveStatus::optimal);
    REQUIRE(warm.status == SolveStatus::optimal);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-7));
    double dx = 0;
    // only the u columns carry curvature, so only they are unique
    for (int c : bp.blocks[0].u_col) dx = std::max(dx, std::abs(cold.x[c] - warm.x[c]));
    CHECK(dx <= 1e-5);
}
