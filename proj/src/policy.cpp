#include "gtlsynth/policy.hpp"

#include <cmath>
#include <algorithm>
#include <json.hpp>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

std::vector<double> AgentPolicy::distribution(int t, int64_t state, int q) const {
    auto it = table.find({t, state, q});
    if (it != table.end()) return it->second;
    return std::vector<double>(num_actions, 1.0 / num_actions);
}

Policy extract_policy(const OccupancyLp& lp, const std::vector<double>& x, const std::vector<int>& num_actions) {
    if (static_cast<int>(x.size()) != lp.num_vars())
        throw Error(ErrorCode::argument, "solution size does not match the LP");
    Policy pol;
    pol.formulation = lp.formulation;
    pol.agents.resize(num_actions.size());
    for (size_t i = 0; i < num_actions.size(); ++i) {
        pol.agents[i].agent = static_cast<int>(i);
        pol.agents[i].num_actions = num_actions[i];
        pol.agents[i].form = lp.formulation == "neighboring" ? PolicyForm::neighborhood
                             : lp.formulation == "monolithic" ? PolicyForm::flat
                                                              : PolicyForm::local;
    }
    for (int v = 0; v < lp.num_vars(); ++v) {
        const auto& k = lp.keys[v];
        if (k.kind != VarKind::state_action) continue;
        const int agent = std::max(k.agent, 0);
        if (agent >= static_cast<int>(num_actions.size())) throw Error(ErrorCode::index, "agent out of range");
        auto& ap = pol.agents[agent];
        pol.horizon = std::max(pol.horizon, k.t);
        auto& dist = ap.table[{k.t, k.state, k.q}];
        if (dist.empty()) dist.assign(ap.num_actions, 0.0);
        dist.at(k.own_action) += std::max(x[v], 0.0);
    }
    for (auto& ap : pol.agents) {
        for (auto it = ap.table.begin(); it != ap.table.end();) {
            double sum = 0;
            for (double p : it->second) sum += p;
            if (sum <= 1e-12) {
                it = ap.table.erase(it);
                continue;
            }
            for (double& p : it->second) p /= sum;
            ++it;
        }
    }
    double obj = 0;
    for (int v = 0; v < lp.num_vars(); ++v) obj += lp.obj[v] * x[v];
    pol.objective = obj;
    return pol;
}

void attach_products(Policy& policy, const SynthesisProblem& problem) {
    std::shared_ptr<const Dfa> trivial;
    for (auto& ap : policy.agents) {
        if (ap.form != PolicyForm::neighborhood) continue;
        if (problem.products[ap.agent]) {
            ap.product = problem.products[ap.agent];
            continue;
        }
        if (!trivial) trivial = std::make_shared<const Dfa>(compile_dfa(gtl::top()));
        ap.product = std::make_shared<const ProductModel>(*problem.model, ap.agent, trivial);
    }
}

namespace {
const char* form_name(PolicyForm f) {
    switch (f) {
    case PolicyForm::local: return "local";
    case PolicyForm::neighborhood: return "neighborhood";
    case PolicyForm::flat: return "flat";
    }
    return "local";
}
} // namespace

std::string serialize_policy(const Policy& policy) {
    nlohmann::json j;
    j["formulation"] = policy.formulation;
    j["objective"] = policy.objective;
    j["lambda"] = policy.lambda;
    j["horizon"] = policy.horizon;
    j["agents"] = nlohmann::json::array();
    for (const auto& ap : policy.agents) {
        nlohmann::json a;
        a["agent"] = ap.agent;
        a["form"] = form_name(ap.form);
        a["actions"] = ap.num_actions;
        a["entries"] = nlohmann::json::array();
        for (const auto& [key, dist] : ap.table) {
            const auto& [t, s, q] = key;
            a["entries"].push_back({{"t", t}, {"state", s}, {"q", q}, {"p", dist}});
        }
        j["agents"].push_back(a);
    }
    return j.dump(1) + "\n";
}

Policy parse_policy(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema, std::string("policy document: ") + e.what());
    }
    try {
        Policy pol;
        pol.formulation = j.at("formulation").get<std::string>();
        pol.objective = j.at("objective").get<double>();
        pol.lambda = j.at("lambda").get<std::vector<double>>();
        pol.horizon = j.at("horizon").get<int>();
        for (const auto& a : j.at("agents")) {
            AgentPolicy ap;
            ap.agent = a.at("agent").get<int>();
            const auto form = a.at("form").get<std::string>();
            if (form == "local") ap.form = PolicyForm::local;
            else if (form == "neighborhood") ap.form = PolicyForm::neighborhood;
            else if (form == "flat") ap.form = PolicyForm::flat;
            else throw Error(ErrorCode::schema, "unknown policy form '" + form + "'");
            ap.num_actions = a.at("actions").get<int>();
            if (ap.num_actions < 1) throw Error(ErrorCode::schema, "policy needs at least one action");
            for (const auto& e : a.at("entries")) {
                auto p = e.at("p").get<std::vector<double>>();
                if (static_cast<int>(p.size()) != ap.num_actions)
                    throw Error(ErrorCode::schema, "distribution length does not match the action count");
                double sum = 0;
                for (double v : p) {
                    if (v < 0) throw Error(ErrorCode::schema, "negative probability in policy");
                    sum += v;
                }
                if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::stochasticity, "policy distribution does not sum to 1");
                ap.table[{e.at("t").get<int>(), e.at("state").get<int64_t>(), e.at("q").get<int>()}] = std::move(p);
            }
            pol.agents.push_back(std::move(ap));
        }
        return pol;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema, std::string("policy document: ") + e.what());
    }
}

} // namespace gtlsynth
