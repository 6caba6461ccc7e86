#include <doctest.h>

#include <set>

#include "gtlsynth/error.hpp"
#include "gtlsynth/model_io.hpp"
#include "gtlsynth/scenarios.hpp"

using namespace gtlsynth;

TEST_CASE("crop: escalation, rewards, topology") {
    CHECK(crop_escalation(0.05, 0.1, 1) == doctest::Approx(0.145));
    CHECK(crop_escalation(0.05, 0.1, 0) == doctest::Approx(0.05));
    for (double p : {0.0, 0.1, 0.5, 0.8, 1.0})
        for (int n = 0; n < 4; ++n) {
            CHECK(crop_escalation(0.05, p, n + 1) >= crop_escalation(0.05, p, n));
            CHECK(crop_escalation(0.05, std::min(1.0, p + 0.1), n) >= crop_escalation(0.05, p, n));
        }
    ScenarioConfig cfg;
    cfg.agents = 16;
    auto sc = gen_crop(cfg);
    const auto& ag = sc.model.agents[0];
    CHECK(ag.reward[0 * 2 + 0] == 10.0);
    CHECK(ag.reward[1 * 2 + 0] == 6.0);
    CHECK(ag.reward[2 * 2 + 0] == 2.0);
    CHECK(ag.reward[0 * 2 + 1] == 1.0);
    for (int i = 0; i < 16; ++i) CHECK(sc.model.graph.open(i).size() == 4);
    CHECK(sc.constrained.size() == 8);
    CHECK(sc.formulas[sc.constrained[0]].has_value());

    cfg.agents = 10;
    CHECK_THROWS_AS(gen_crop(cfg), Error);
}

TEST_CASE("urban: windows, crime counts, critical intersections") {
    ScenarioConfig cfg;
    cfg.kind = "urban";
    auto sc = gen_urban(cfg);
    REQUIRE(sc.model.size() == 15);
    bool window = false, saw80 = false;
    std::set<std::pair<int, int>> cells;
    for (const auto& ag : sc.model.agents) {
        int lo1 = 99, hi1 = 0, lo2 = 99, hi2 = 0;
        for (size_t s = 0; s < ag.states.size(); ++s) {
            const int x1 = static_cast<int>(ag.attrs[s].at("x1")), x2 = static_cast<int>(ag.attrs[s].at("x2"));
            lo1 = std::min(lo1, x1), hi1 = std::max(hi1, x1), lo2 = std::min(lo2, x2), hi2 = std::max(hi2, x2);
            cells.insert({x1, x2});
            if (x1 == 5 && x2 == 1) saw80 = ag.reward[s * ag.num_actions()] == 80.0;
        }
        window = window || (lo1 == 3 && hi1 == 5 && lo2 == 5 && hi2 == 7);
    }
    CHECK(window);
    CHECK(saw80);
    CHECK(cells.size() == 35);
    std::set<std::string> critical;
    for (const auto& ag : sc.model.agents)
        for (const auto& ls : ag.labels)
            for (const auto& l : ls) critical.insert(l);
    CHECK(critical == std::set<std::string>{"c33", "c36", "c48"});
    CHECK(!sc.constrained.empty());
}

TEST_CASE("rescue: defaults") {
    ScenarioConfig cfg;
    cfg.kind = "rescue";
    cfg.agents = 50;
    cfg.lambda = 0.95;
    auto sc = gen_rescue(cfg);
    REQUIRE(sc.model.size() == 50);
    std::set<std::string> areas;
    for (int i = 0; i < 50; ++i) {
        const auto& ag = sc.model.agents[i];
        CHECK(sc.model.graph.open(i).size() == 3);
        CHECK(ag.labels[ag.initial] == std::vector<std::string>{"red"});
        for (const auto& s : ag.states) areas.insert(s);
        CHECK(ag.reward[ag.initial * 3] == cfg.r);
    }
    CHECK(areas.size() == 25);
    CHECK(sc.constrained.size() == 50);
    cfg.agents = 7;
    CHECK_THROWS_AS(gen_rescue(cfg), Error);
}

TEST_CASE("generators are deterministic and seed-sensitive") {
    for (const char* kind : {"crop", "urban", "rescue"}) {
        ScenarioConfig cfg;
        cfg.kind = kind;
        cfg.agents = 16;
        CHECK(serialize(gen_scenario(cfg).model) == serialize(gen_scenario(cfg).model));
    }
    ScenarioConfig a, b;
    a.agents = b.agents = 100;
    b.seed = 2;
    CHECK(gen_crop(a).constrained == gen_crop(a).constrained);
    CHECK(gen_crop(a).constrained != gen_crop(b).constrained);
    CHECK(sample_subset(10, 0.0, 1).empty());
    CHECK(sample_subset(10, 1.0, 1).size() == 10);
}

TEST_CASE("config validation") {
    ScenarioConfig cfg;
    cfg.p = 1.5;
    CHECK_THROWS_AS(gen_crop(cfg), Error);
    cfg = {};
    cfg.constrained_fraction = -0.1;
    CHECK_THROWS_AS(gen_crop(cfg), Error);
    cfg = {};
    cfg.kind = "orchard";
    CHECK_THROWS_AS(gen_scenario(cfg), Error);
}
