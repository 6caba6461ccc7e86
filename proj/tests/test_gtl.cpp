#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "gtlsynth/error.hpp"
#include "gtlsynth/gtl.hpp"

using namespace gtlsynth;

TEST_CASE("parse crop formula") {
    auto f = parse_gtl("G[0,30](!F G<=2 d & !F G<=3 E^2 O{true} d)");
    REQUIRE(f->op == Op::always);
    CHECK(f->a == 0);
    CHECK(f->b == 30);
    const auto& body = f->kids[0];
    REQUIRE(body->op == Op::conj);
    const auto& left = body->kids[0];
    REQUIRE(left->op == Op::neg);
    CHECK(left->kids[0]->op == Op::eventually);
    CHECK(left->kids[0]->kids[0]->op == Op::always);
    CHECK(left->kids[0]->kids[0]->le_form);
    const auto& ex = body->kids[1]->kids[0]->kids[0]->kids[0];
    REQUIRE(ex->op == Op::exists);
    CHECK(ex->count == 2);
    CHECK(ex->chain.size() == 1);
    CHECK(horizon(f) == 33);
}

TEST_CASE("horizons") {
    CHECK(horizon(parse_gtl("X F[0,5] E^2 O{true} (x>=2)")) == 6);
    CHECK(horizon(parse_gtl("G[0,10] F<=3 E^2 O{y<=4} (x>=3)")) == 13);
    CHECK(horizon(parse_gtl("d")) == 0);
    CHECK(horizon(parse_gtl("G[0,20](F<=3(c | E^1 O{true} c))")) == 23);
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse_gtl("G[0,3");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.column() == 6);
    }
    CHECK_THROWS_AS(parse_gtl("G[3,1] d"), ParseError);
    CHECK_THROWS_AS(parse_gtl("d & "), ParseError);
    CHECK_THROWS_AS(parse_gtl("d $ e"), ParseError);
    CHECK_THROWS_AS(parse_gtl("E^0 d"), ParseError);
}

TEST_CASE("pretty printing re-parses to the same tree") {
    const char* cases[] = {
        "G[0,30](!F G<=2 d & !F G<=3 E^2 O{true} d)",
        "X F[0,5] E^2 O{true} (x>=2)",
        "G[0,20](Red -> (F<=2 E^3 O{y<=4} Green & F<=2 E^3 O{y<=4} Blue))",
        "a | b & c | !(a & b)",
        "(a | b) & c",
        "label == G & x == 1.5 & y2 <= -2",
        "E^1 O{y>=1} O{false} O{y==2} true",
    };
    for (const char* c : cases) {
        auto f = parse_gtl(c);
        auto g = parse_gtl(to_string(f));
        CHECK_MESSAGE(equal(f, g), c);
        CHECK(to_string(f) == to_string(g));
    }
}

TEST_CASE("implication is right associative and binds loosest") {
    auto f = parse_gtl("a -> b -> c & d");
    REQUIRE(f->op == Op::disj);
    CHECK(f->kids[0]->op == Op::neg);
    CHECK(f->kids[1]->op == Op::disj);
}

TEST_CASE("neighbor reach on the two-step example trajectory") {
    auto m = fixtures::fig4_model();
    auto g = make_trajectory(m, {{0, 1, 2, 0}, {2, 0, 1, 2}});
    EdgeProp le2{EdgeProp::Kind::le, 2};
    // node 1 is agent 0; y<=2 holds on e1,e3,e4 at the first index and only e1 touches node 1
    CHECK(neighbor_reach(m, g, {0}, 0, {le2}) == std::set<int>{1});
    CHECK(neighbor_reach(m, g, {0}, 1, {le2}) == std::set<int>{1, 2});
    CHECK(neighbor_reach(m, g, {}, 0, {le2}).empty());
    CHECK(neighbor_reach(m, g, {0}, 0, {EdgeProp{EdgeProp::Kind::bottom, 0}}).empty());
    CHECK_THROWS_AS(neighbor_reach(m, g, {0}, 2, {le2}), Error);
    // two hops: first from {0} via y<=2, then via any edge
    CHECK(neighbor_reach(m, g, {0}, 0, {EdgeProp{}, le2}) == std::set<int>{0, 2, 3});
}

TEST_CASE("node propositions on the example trajectory") {
    auto m = fixtures::fig4_model();
    auto g = make_trajectory(m, {{0, 1, 2, 0}, {2, 0, 1, 2}});
    auto pi = parse_gtl("blue | orange");
    std::vector<int> sat0, sat1;
    for (int v = 0; v < 4; ++v) {
        if (evaluate(m, g, v, 0, pi)) sat0.push_back(v);
        if (evaluate(m, g, v, 1, pi)) sat1.push_back(v);
    }
    CHECK(sat0 == std::vector<int>{0, 1, 3});
    CHECK(sat1 == std::vector<int>{1, 2});
    CHECK(evaluate(m, g, 0, 0, parse_gtl("true")));
    CHECK(evaluate(m, g, 0, 0, parse_gtl("E^1 O{y<=2} orange")));
    CHECK(!evaluate(m, g, 0, 0, parse_gtl("E^2 O{true} orange")));
    CHECK_THROWS_AS(evaluate(m, g, 0, 0, parse_gtl("X X blue")), Error);
}

namespace {

Formula random_formula(std::mt19937_64& rng, int depth) {
    const char* props[] = {"x >= 1", "x <= 0", "x == 2", "p"};
    if (depth == 0 || rng() % 4 == 0) return parse_gtl(props[rng() % 4]);
    switch (rng() % 7) {
    case 0: return gtl::neg(random_formula(rng, depth - 1));
    case 1: return gtl::conj(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 2: return gtl::disj(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 3: return gtl::next(random_formula(rng, depth - 1));
    case 4: {
        int a = rng() % 2, b = a + rng() % 2;
        return gtl::eventually(a, b, random_formula(rng, depth - 1));
    }
    case 5: {
        int a = rng() % 2, b = a + rng() % 2;
        return gtl::always(a, b, random_formula(rng, depth - 1));
    }
    default:
        return gtl::exists(1 + rng() % 2, {EdgeProp{EdgeProp::Kind::le, static_cast<double>(rng() % 3)}},
                           random_formula(rng, depth - 1));
    }
}

// Explicit Boolean expansion: temporal operators unrolled into time-shifted
// propositional terms, evaluated without the monitor's recursion on windows.
bool expand(const FactoredMdp& m, const GraphTrajectory& g, int v, int t, const Formula& f) {
    switch (f->op) {
    case Op::top: return true;
    case Op::bottom: return false;
    case Op::pred: return f->pred.holds(m.agents[v], g.states[t][v]);
    case Op::neg: return !expand(m, g, v, t, f->kids[0]);
    case Op::conj: return expand(m, g, v, t, f->kids[0]) && expand(m, g, v, t, f->kids[1]);
    case Op::disj: return expand(m, g, v, t, f->kids[0]) || expand(m, g, v, t, f->kids[1]);
    case Op::next: return expand(m, g, v, t + 1, f->kids[0]);
    case Op::eventually:
    case Op::always: {
        std::vector<bool> terms;
        for (int k = f->a; k <= f->b; ++k) terms.push_back(expand(m, g, v, t + k, f->kids[0]));
        return f->op == Op::always ? std::all_of(terms.begin(), terms.end(), [](bool b) { return b; })
                                   : std::any_of(terms.begin(), terms.end(), [](bool b) { return b; });
    }
    case Op::exists: {
        int hits = 0;
        for (auto [e, u] : m.graph.incident(v))
            if (f->chain[0].holds(g.y[t][e]) && expand(m, g, u, t, f->kids[0])) ++hits;
        return hits >= f->count;
    }
    }
    return false;
}

FactoredMdp small_model(int n, std::mt19937_64& rng) {
    using namespace fixtures;
    FactoredMdp m;
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng() % 2) edges.emplace_back(u, v);
    m.graph = AgentGraph(n, edges);
    for (int i = 0; i < n; ++i) {
        m.agents.push_back(plain_agent("n" + std::to_string(i), {"0", "1", "2"}, {"a"}));
        for (int s = 0; s < 3; ++s) {
            m.agents[i].attrs[s]["x"] = s;
            m.agents[i].coords[s] = {s, i % 2};
        }
        m.agents[i].labels[1] = {"p"};
        uniform_kernel(m, i);
    }
    m.edge_label.kind = EdgeLabel::Kind::manhattan;
    return m;
}

} // namespace

TEST_CASE("monitor agrees with explicit expansion") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 300; ++rep) {
        auto m = small_model(2 + rng() % 3, rng);
        auto f = random_formula(rng, 3);
        const int h = horizon(f);
        if (h > 6) continue;
        std::vector<std::vector<int>> st(h + 1, std::vector<int>(m.size()));
        for (auto& row : st)
            for (auto& s : row) s = rng() % 3;
        auto g = make_trajectory(m, st);
        for (int v = 0; v < m.size(); ++v) {
            int max_read = -1;
            CHECK(evaluate(m, g, v, 0, f, &max_read) == expand(m, g, v, 0, f));
            CHECK(max_read <= h);
        }
    }
}

TEST_CASE("exists monotonicity") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        auto m = small_model(4, rng);
        std::vector<std::vector<int>> st(1, std::vector<int>(4));
        for (auto& s : st[0]) s = rng() % 3;
        auto g = make_trajectory(m, st);
        for (int n = 2; n <= 3; ++n) {
            auto hi = gtl::exists(n, {EdgeProp{EdgeProp::Kind::le, 2}}, parse_gtl("x >= 1"));
            auto lo = gtl::exists(n - 1, {EdgeProp{EdgeProp::Kind::le, 2}}, parse_gtl("x >= 1"));
            for (int v = 0; v < 4; ++v)
                if (evaluate(m, g, v, 0, hi)) CHECK(evaluate(m, g, v, 0, lo));
        }
    }
}

TEST_CASE("always expands to a conjunction") {
    std::mt19937_64 rng(3);
    auto m = small_model(3, rng);
    auto f = parse_gtl("G[0,2] p");
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<std::vector<int>> st(3, std::vector<int>(3));
        for (auto& row : st)
            for (auto& s : row) s = rng() % 3;
        auto g = make_trajectory(m, st);
        bool want = m.agents[0].has_label(st[0][0], "p") && m.agents[0].has_label(st[1][0], "p") &&
                    m.agents[0].has_label(st[2][0], "p");
        CHECK(evaluate(m, g, 0, 0, f) == want);
    }
}
