#include "gtlsynth/pipeline.hpp"

#include <chrono>
#include <sstream>

#include <json.hpp>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<int> action_counts(const FactoredMdp& m) {
    std::vector<int> out;
    for (const auto& ag : m.agents) out.push_back(ag.num_actions());
    return out;
}

OccupancyLp build(Method m, const SynthesisProblem& prob, const LpOptions& lp) {
    switch (m) {
    case Method::neighboring: return build_neighboring_lp(prob, lp);
    case Method::local: return build_local_lp(prob, lp);
    default: throw Error(ErrorCode::argument, "ADMM splits the neighboring or local formulation only");
    }
}

} // namespace

Instance instance_from(const Scenario& sc) { return {sc.model, sc.formulas, sc.lambda}; }

void apply_specs(Instance& inst, const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema, std::string("spec document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("specs") || !doc["specs"].is_array())
        throw Error(ErrorCode::schema, "spec document needs a \"specs\" array");
    const int m = inst.model.size();
    inst.formulas.assign(m, std::nullopt);
    inst.lambda.assign(m, 0.0);
    for (const auto& e : doc["specs"]) {
        if (!e.contains("agent") || !e.contains("formula") || !e["agent"].is_number_integer() || !e["formula"].is_string())
            throw Error(ErrorCode::schema, "each spec needs an integer agent and a formula string");
        const int agent = e["agent"].get<int>();
        if (agent < 0 || agent >= m) throw Error(ErrorCode::index, "spec agent " + std::to_string(agent) + " out of range");
        const double lambda = e.value("lambda", 0.0);
        if (!(lambda >= 0 && lambda <= 1)) throw Error(ErrorCode::argument, "lambda must lie in [0,1]");
        inst.formulas[agent] = parse_gtl(e["formula"].get<std::string>());
        inst.lambda[agent] = lambda;
    }
}

std::string serialize_specs(const Instance& inst) {
    nlohmann::json specs = nlohmann::json::array();
    for (size_t i = 0; i < inst.formulas.size(); ++i)
        if (inst.formulas[i])
            specs.push_back({{"agent", i}, {"formula", to_string(*inst.formulas[i])}, {"lambda", inst.lambda[i]}});
    return nlohmann::json{{"specs", specs}}.dump(2) + "\n";
}

Method parse_method(const std::string& name) {
    if (name == "monolithic") return Method::monolithic;
    if (name == "neighboring") return Method::neighboring;
    if (name == "local") return Method::local;
    if (name == "admm") return Method::admm;
    throw Error(ErrorCode::argument, "unknown method '" + name + "'");
}

std::string to_string(Method m) {
    switch (m) {
    case Method::monolithic: return "monolithic";
    case Method::neighboring: return "neighboring";
    case Method::local: return "local";
    case Method::admm: return "admm";
    }
    return "?";
}

SynthOutcome synthesize(const Instance& inst, const SynthOptions& opt) {
    SynthOutcome out;
    auto lambda = inst.lambda;
    if (opt.lambda)
        for (size_t i = 0; i < lambda.size(); ++i)
            if (inst.formulas[i]) lambda[i] = *opt.lambda;
    const auto t0 = Clock::now();
    const auto prob = make_problem(inst.model, inst.formulas, lambda, opt.horizon);
    InteriorPointSolver ipm(opt.solver);
    out.backend = ipm.id();

    OccupancyLp lp;
    if (opt.method == Method::monolithic) {
        const auto joint = compose_joint(prob);
        lp = build_monolithic_lp(joint.mdp, prob.horizon);
    } else {
        lp = build(opt.method == Method::admm ? opt.admm_base : opt.method, prob, opt.lp);
    }
    out.formulation = opt.method == Method::admm ? "admm/" + lp.formulation : lp.formulation;
    out.num_vars = lp.num_vars();
    out.num_rows = lp.num_rows();
    out.num_nonzeros = lp.num_nonzeros();
    out.build_seconds = seconds_since(t0);

    const auto t1 = Clock::now();
    std::vector<double> x;
    if (opt.method == Method::admm) {
        auto blocks = split_blocks(lp);
        try {
            auto res = run_admm(blocks, opt.admm, ipm);
            x = std::move(res.x);
            out.trace = std::move(res.trace);
            out.iterations = res.iterations;
            out.converged = res.converged;
            out.status = SolveStatus::optimal;
            if (!res.converged) out.message = "iteration limit reached before the residuals fell below gamma";
        } catch (const Error& e) {
            if (e.code() != ErrorCode::infeasible) throw;
            out.status = SolveStatus::infeasible;
            out.message = e.what();
        }
    } else {
        auto r = ipm.solve(lp);
        out.status = r.status;
        out.message = r.message;
        out.iterations = r.iterations;
        out.converged = r.status == SolveStatus::optimal;
        x = std::move(r.x);
    }
    out.solve_seconds = seconds_since(t1);
    if (out.status == SolveStatus::failed) throw Error(ErrorCode::solver, "solver failed: " + out.message);
    if (out.status == SolveStatus::infeasible) return out;

    out.residuals = check_solution(lp, x);
    out.objective = out.residuals.objective;
    if (opt.method == Method::monolithic) {
        int joint_actions = 1;
        for (const auto& ag : inst.model.agents) joint_actions *= ag.num_actions();
        out.policy = extract_policy(lp, x, {joint_actions});
        out.policy.agents[0].form = PolicyForm::flat;
    } else {
        out.policy = extract_policy(lp, x, action_counts(inst.model));
        attach_products(out.policy, prob);
    }
    out.policy.formulation = out.formulation;
    out.policy.objective = out.objective;
    out.policy.lambda = lambda;
    out.policy.horizon = prob.horizon;
    return out;
}

std::string report_csv(const EvaluationReport& rep) {
    std::ostringstream os;
    os.precision(10);
    os << "agent,probability,lower,upper,half_width,expected_reward,horizon,runs,exact\n";
    for (const auto& a : rep.agents)
        os << a.agent << ',' << a.probability << ',' << a.lower << ',' << a.upper << ',' << a.half_width << ','
           << a.expected_reward << ',' << a.horizon << ',' << a.runs << ',' << (a.exact ? 1 : 0) << '\n';
    return os.str();
}

} // namespace gtlsynth
