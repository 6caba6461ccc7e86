#include "gtlsynth/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

const char* const kCropFormula = "G[0,30] (!F G<=2 d & !F G<=3 E^2 O{true} d)";
const char* const kRescueFormula =
    "G[0,20] (red -> (F<=2 E^3 O{y <= 4} green & F<=2 E^3 O{y <= 4} blue))";

void ScenarioConfig::validate() const {
    for (double v : {epsilon, p, xi, lambda, constrained_fraction})
        if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::argument, "scenario probabilities must lie in [0,1]");
    if (agents < 1 || rows < 0 || cols < 0) throw Error(ErrorCode::argument, "scenario sizes must be positive");
    if (kind != "crop" && kind != "urban" && kind != "rescue")
        throw Error(ErrorCode::argument, "unknown scenario kind '" + kind + "'");
}

double crop_escalation(double eps, double p, int n) { return eps + (1 - eps) * (1 - std::pow(1 - p, n)); }

std::vector<int> sample_subset(int n, double fraction, uint64_t seed) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    const int k = static_cast<int>(std::lround(fraction * n));
    std::mt19937_64 rng(seed);
    for (int i = 0; i < k; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const int j = i + static_cast<int>(u * (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Scenario gen_crop(const ScenarioConfig& cfg) {
    cfg.validate();
    int rows = cfg.rows, cols = cfg.cols;
    if (rows == 0 && cols == 0) {
        rows = static_cast<int>(std::lround(std::sqrt(cfg.agents)));
        if (rows * rows != cfg.agents)
            throw Error(ErrorCode::argument, "crop torus needs a square field count, got " + std::to_string(cfg.agents) +
                                                 " (pass rows and cols)");
        cols = rows;
    } else if (rows * cols != cfg.agents) {
        throw Error(ErrorCode::argument, "rows * cols must equal the field count");
    }
    const int m = rows * cols;
    std::set<std::pair<int, int>> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int v = r * cols + c;
            for (int w : {r * cols + (c + 1) % cols, ((r + 1) % rows) * cols + c})
                if (w != v) edges.insert({std::min(v, w), std::max(v, w)});
        }
    Scenario sc;
    sc.config = cfg;
    auto& model = sc.model;
    model.form = KernelForm::neighborhood;
    model.graph = AgentGraph(m, {edges.begin(), edges.end()});
    model.edge_label.kind = EdgeLabel::Kind::constant;
    model.edge_label.value = 1;
    const double rewards[3] = {cfg.r, (cfg.r + 1 + cfg.r / 10) / 2, 1 + cfg.r / 10};
    for (int i = 0; i < m; ++i) {
        AgentModel ag;
        ag.name = "field" + std::to_string(i);
        ag.states = {"1", "2", "3"};
        ag.actions = {"cultivate", "fallow"};
        ag.coords.assign(3, {});
        ag.attrs.assign(3, {});
        ag.labels.assign(3, {});
        for (int s = 0; s < 3; ++s) ag.attrs[s]["x"] = s + 1;
        ag.labels[1] = {"d"};
        ag.labels[2] = {"d"};
        ag.initial = cfg.initial_state;
        ag.depends_on = model.graph.open(i);
        const int nd = static_cast<int>(ag.depends_on.size());
        int contexts = 3;
        for (int k = 0; k < nd; ++k) contexts *= 3;
        ag.kernel.resize(static_cast<size_t>(contexts) * 2);
        for (int ctx = 0; ctx < contexts; ++ctx) {
            const int s = ctx % 3;
            int rest = ctx / 3, infected = 0;
            for (int k = 0; k < nd; ++k) {
                if (rest % 3 != 0) ++infected;
                rest /= 3;
            }
            const double pe = crop_escalation(cfg.epsilon, cfg.p, infected);
            auto& cult = ag.kernel[ctx * 2 + 0];
            auto& fall = ag.kernel[ctx * 2 + 1];
            if (s < 2) {
                if (pe < 1) cult.push_back({s, 1 - pe});
                if (pe > 0) cult.push_back({s + 1, pe});
            } else {
                cult.push_back({2, 1.0});
            }
            if (s == 0) {
                fall.push_back({0, 1.0});
            } else {
                if (cfg.xi > 0) fall.push_back({0, cfg.xi});
                if (cfg.xi < 1) fall.push_back({s, 1 - cfg.xi});
            }
        }
        ag.reward = {rewards[0], 1, rewards[1], 1, rewards[2], 1};
        model.agents.push_back(std::move(ag));
    }
    sc.constrained = sample_subset(m, cfg.constrained_fraction, cfg.seed);
    const Formula f = parse_gtl(kCropFormula);
    sc.formulas.assign(m, std::nullopt);
    sc.lambda.assign(m, 0.0);
    for (int i : sc.constrained) {
        sc.formulas[i] = f;
        sc.lambda[i] = cfg.lambda;
    }
    return sc;
}

namespace {

// crime counts, row 1 (bottom) first; columns x1 = 1..5
constexpr std::array<std::array<int, 5>, 7> kCrime = {{
    {17, 25, 48, 69, 80},
    {43, 19, 15, 23, 21},
    {17, 9, 2, 36, 8},
    {17, 19, 2, 11, 8},
    {5, 7, 10, 12, 7},
    {2, 25, 7, 5, 12},
    {17, 26, 33, 23, 14},
}};

struct Critical {
    int x1, x2;
    const char* label;
};
constexpr Critical kCritical[] = {{3, 1, "c48"}, {4, 3, "c36"}, {3, 7, "c33"}};

} // namespace

Scenario gen_urban(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario sc;
    sc.config = cfg;
    auto& model = sc.model;
    model.form = KernelForm::local;
    model.edge_label.kind = EdgeLabel::Kind::constant;
    model.edge_label.value = 1;
    // officer (a, b) patrols x1 in [a+1, a+3], x2 in [b+1, b+3]
    auto officer = [](int a, int b) { return b * 3 + a; };
    std::vector<std::pair<int, int>> edges;
    for (int b = 0; b < 5; ++b)
        for (int a = 0; a < 3; ++a) {
            if (a + 1 < 3) edges.push_back({officer(a, b), officer(a + 1, b)});
            if (b + 1 < 5) edges.push_back({officer(a, b), officer(a, b + 1)});
        }
    model.graph = AgentGraph(15, edges);
    const char* moves[5] = {"stay", "north", "south", "east", "west"};
    const int dx[5] = {0, 0, 0, 1, -1}, dy[5] = {0, 1, -1, 0, 0};
    sc.formulas.assign(15, std::nullopt);
    sc.lambda.assign(15, 0.0);
    for (int b = 0; b < 5; ++b)
        for (int a = 0; a < 3; ++a) {
            AgentModel ag;
            ag.name = "officer_x" + std::to_string(a + 1) + "_y" + std::to_string(b + 1);
            ag.actions.assign(moves, moves + 5);
            std::vector<std::string> conj;
            for (int j = 0; j < 3; ++j)
                for (int i = 0; i < 3; ++i) {
                    const int x1 = a + 1 + i, x2 = b + 1 + j;
                    ag.states.push_back("x" + std::to_string(x1) + "y" + std::to_string(x2));
                    ag.coords.push_back({x1, x2});
                    ag.attrs.push_back({{"x1", x1}, {"x2", x2}});
                    std::vector<std::string> labels;
                    for (const auto& c : kCritical)
                        if (c.x1 == x1 && c.x2 == x2) {
                            labels.push_back(c.label);
                            conj.push_back(c.label);
                        }
                    ag.labels.push_back(labels);
                }
            ag.initial = 4;  // window centre
            ag.kernel.resize(9 * 5);
            ag.reward.resize(9 * 5);
            for (int s = 0; s < 9; ++s)
                for (int k = 0; k < 5; ++k) {
                    const int i = std::clamp(s % 3 + dx[k], 0, 2), j = std::clamp(s / 3 + dy[k], 0, 2);
                    ag.kernel[s * 5 + k] = {{j * 3 + i, 1.0}};
                    ag.reward[s * 5 + k] = kCrime[b + s / 3][a + s % 3];
                }
            const int id = officer(a, b);
            if (!conj.empty()) {
                std::string text;
                for (const auto& l : conj) {
                    if (!text.empty()) text += " & ";
                    text += "G[0,20] (F<=3 (" + l + " | E^1 O{true} " + l + "))";
                }
                sc.formulas[id] = parse_gtl(text);
                sc.lambda[id] = cfg.lambda;
                sc.constrained.push_back(id);
            }
            model.agents.push_back(std::move(ag));
        }
    std::sort(sc.constrained.begin(), sc.constrained.end());
    return sc;
}

namespace {

// closed tour over the 5x5 area grid with Manhattan steps of at most 2
std::vector<std::pair<int, int>> area_tour() {
    std::vector<std::pair<int, int>> t;
    for (int c = 0; c < 5; ++c) t.push_back({c, 0});
    for (int r = 1; r <= 4; ++r) t.push_back({4, r});
    for (int r = 4; r >= 1; --r) t.push_back({3, r});
    for (int r = 1; r <= 4; ++r) t.push_back({2, r});
    for (auto cell : {std::pair{1, 4}, {0, 4}, {0, 3}, {1, 3}, {1, 2}, {0, 2}, {0, 1}, {1, 1}}) t.push_back(cell);
    return t;
}

} // namespace

Scenario gen_rescue(const ScenarioConfig& cfg) {
    cfg.validate();
    const int m = cfg.agents;
    if (m < 4 || m % 2 != 0) throw Error(ErrorCode::argument, "rescue needs an even number of robots, at least 4");
    Scenario sc;
    sc.config = cfg;
    auto& model = sc.model;
    model.form = KernelForm::local;
    model.edge_label.kind = EdgeLabel::Kind::manhattan;
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i) {
        const int j = (i + 1) % m, k = (i + m / 2) % m;
        edges.insert({std::min(i, j), std::max(i, j)});
        edges.insert({std::min(i, k), std::max(i, k)});
    }
    model.graph = AgentGraph(m, {edges.begin(), edges.end()});
    const auto tour = area_tour();
    const char* colors[3] = {"red", "green", "blue"};
    const Formula f = parse_gtl(kRescueFormula);
    for (int i = 0; i < m; ++i) {
        const auto [c, r] = tour[i % 25];
        const int c0 = std::min(c, 2);
        AgentModel ag;
        ag.name = "robot" + std::to_string(i);
        ag.states.resize(3);
        ag.coords.resize(3);
        ag.attrs.assign(3, {});
        ag.labels.resize(3);
        // the three cells of a row segment carry distinct colors
        for (int d = 0; d < 3; ++d) {
            const int cc = c0 + d;
            const int color = (cc + r) % 3;
            ag.states[color] = "area" + std::to_string(r * 5 + cc);
            ag.coords[color] = {cc, r};
            ag.labels[color] = {colors[color]};
        }
        ag.actions = {"to_red", "to_green", "to_blue"};
        ag.initial = 0;
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 3; ++a) ag.kernel.push_back({{a, 1.0}});
        ag.reward.assign(9, 0.0);
        for (int a = 0; a < 3; ++a) ag.reward[a] = cfg.r;
        model.agents.push_back(std::move(ag));
    }
    sc.formulas.assign(m, f);
    sc.lambda.assign(m, cfg.lambda);
    for (int i = 0; i < m; ++i) sc.constrained.push_back(i);
    return sc;
}

Scenario gen_scenario(const ScenarioConfig& cfg) {
    if (cfg.kind == "crop") return gen_crop(cfg);
    if (cfg.kind == "urban") return gen_urban(cfg);
    if (cfg.kind == "rescue") return gen_rescue(cfg);
    cfg.validate();
    throw Error(ErrorCode::argument, "unknown scenario kind");
}

} // namespace gtlsynth
