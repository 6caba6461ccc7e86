#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtlsynth/gtlsynth.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

struct Failure {
    int code;
    std::string message;
};

std::string take(char* s) {
    std::string out = s ? s : "";
    gs_string_free(s);
    return out;
}

void check(gs_status s) {
    if (s == GS_OK) return;
    const int code = s == GS_ERR_INFEASIBLE ? kExitInfeasible
                     : (s == GS_ERR_ARGUMENT || s == GS_ERR_IO || s == GS_ERR_SCHEMA || s == GS_ERR_PARSE ||
                        s == GS_ERR_INDEX || s == GS_ERR_STOCHASTICITY || s == GS_ERR_KERNEL_FORM)
                         ? kExitUsage
                         : kExitFailure;
    throw Failure{code, gs_last_error()};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kExitUsage, "cannot read " + path};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string now_iso() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

double since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// Written with status "running" before work starts and rewritten on exit.
class Manifest {
public:
    Manifest(fs::path dir, std::string command, std::vector<std::string> argv)
        : dir_(std::move(dir)), path_(dir_ / (command + "_manifest.json")) {
        doc_["tool"] = "gtlsynth";
        doc_["version"] = gs_version();
        doc_["command"] = command;
        doc_["argv"] = argv;
        doc_["started"] = now_iso();
        doc_["status"] = "running";
        doc_["seeds"] = json::array();
        doc_["timings"] = json::object();
        doc_["outputs"] = json::array();
    }
    json& config() { return doc_["config"]; }
    void seed(uint64_t s) { doc_["seeds"].push_back(s); }
    void timing(const std::string& key, double s) { doc_["timings"][key] = s; }
    void set(const std::string& key, json v) { doc_[key] = std::move(v); }
    fs::path output(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw Failure{kExitFailure, "cannot write " + p.string()};
        out << content;
        doc_["outputs"].push_back(p.string());
        return p;
    }
    void write() {
        fs::create_directories(dir_);
        std::ofstream out(path_, std::ios::binary);
        out << doc_.dump(2) << '\n';
    }
    void finish(const std::string& status, const std::string& message = "") {
        doc_["status"] = status;
        if (!message.empty()) doc_["message"] = message;
        doc_["finished"] = now_iso();
        write();
    }
    void print_outputs() const {
        for (const auto& p : doc_["outputs"]) std::cout << p.get<std::string>() << '\n';
        std::cout << path_.string() << '\n';
    }

private:
    fs::path dir_, path_;
    json doc_;
};

struct InstanceArgs {
    std::string model, specs, scenario;
    int agents = 0, rows = 0, cols = 0, initial_state = 0;
    double epsilon = 0.05, p = 0.1, xi = 0.1, r = 10, fraction = 0.5;
    uint64_t seed = 1;

    void add(CLI::App* app) {
        app->add_option("--model", model, "model document (JSON)");
        app->add_option("--specs", specs, "spec document (JSON)");
        app->add_option("--scenario", scenario, "built-in scenario")->check(CLI::IsMember({"crop", "urban", "rescue"}));
        app->add_option("--agents", agents, "fields (crop) or robots (rescue)");
        app->add_option("--rows", rows, "crop torus rows");
        app->add_option("--cols", cols, "crop torus columns");
        app->add_option("--epsilon", epsilon, "crop base infection probability")->check(CLI::Range(0.0, 1.0));
        app->add_option("--p", p, "crop per-neighbor infection probability")->check(CLI::Range(0.0, 1.0));
        app->add_option("--xi", xi, "crop recovery probability")->check(CLI::Range(0.0, 1.0));
        app->add_option("--reward", r, "maximal reward r");
        app->add_option("--fraction", fraction, "constrained fraction")->check(CLI::Range(0.0, 1.0));
        app->add_option("--initial-state", initial_state, "crop initial state index");
        app->add_option("--scenario-seed", seed, "seed of the constrained-subset draw");
    }

    json echo() const {
        if (!scenario.empty())
            return {{"scenario", scenario}, {"agents", agents}, {"rows", rows},      {"cols", cols},
                    {"epsilon", epsilon},   {"p", p},           {"xi", xi},          {"reward", r},
                    {"fraction", fraction}, {"initial_state", initial_state},       {"scenario_seed", seed}};
        return {{"model", model}, {"specs", specs}};
    }

    gs_instance* load(double lambda) const {
        gs_instance* inst = nullptr;
        if (!scenario.empty() == !model.empty()) throw Failure{kExitUsage, "give exactly one of --model and --scenario"};
        if (!scenario.empty()) {
            gs_scenario_config c;
            gs_scenario_config_default(&c);
            c.kind = scenario.c_str();
            c.agents = agents > 0 ? agents : (scenario == "rescue" ? 50 : scenario == "urban" ? 15 : 100);
            c.rows = rows;
            c.cols = cols;
            c.epsilon = epsilon;
            c.p = p;
            c.xi = xi;
            c.r = r;
            c.lambda = lambda >= 0 ? lambda : c.lambda;
            c.constrained_fraction = fraction;
            c.initial_state = initial_state;
            c.seed = seed;
            check(gs_instance_scenario(&c, &inst));
        } else {
            const std::string m = read_file(model);
            const std::string s = specs.empty() ? "" : read_file(specs);
            check(gs_instance_load(m.c_str(), specs.empty() ? nullptr : s.c_str(), &inst));
        }
        return inst;
    }
};

struct InstanceHandle {
    gs_instance* h = nullptr;
    ~InstanceHandle() { gs_instance_free(h); }
};

struct ResultHandle {
    gs_result* h = nullptr;
    ~ResultHandle() { gs_result_free(h); }
};

struct SynthArgs {
    std::string method = "local", admm_base = "local", backend = "ipm";
    double lambda = -1, beta = 1, gamma = 1e-4, tol = 1e-9;
    int iters = 500, horizon = -1;
    long long var_cap = 2'000'000;
    bool coupled = false;

    void add(CLI::App* app, bool with_method) {
        if (with_method)
            app->add_option("--method", method, "formulation")
                ->check(CLI::IsMember({"monolithic", "neighboring", "local", "admm"}));
        app->add_option("--admm-base", admm_base, "formulation split by ADMM")->check(CLI::IsMember({"neighboring", "local"}));
        app->add_option("--lambda", lambda, "satisfaction threshold for every constrained agent")->check(CLI::Range(0.0, 1.0));
        app->add_option("--beta", beta, "ADMM penalty")->check(CLI::PositiveNumber);
        app->add_option("--gamma", gamma, "ADMM stopping threshold")->check(CLI::PositiveNumber);
        app->add_option("--iters", iters, "ADMM iteration limit")->check(CLI::PositiveNumber);
        app->add_option("--backend", backend, "LP/QP backend")->check(CLI::IsMember({"ipm"}));
        app->add_option("--horizon", horizon, "horizon override (at least the formula horizon)");
        app->add_option("--var-cap", var_cap, "LP column cap");
        app->add_option("--tol", tol, "interior-point tolerance")->check(CLI::PositiveNumber);
        app->add_flag("--coupled-kernels", coupled, "let the local formulation relax neighborhood-form kernels");
    }

    gs_synth_options options(const std::string& m) const {
        gs_synth_options o;
        gs_synth_options_default(&o);
        o.method = m.c_str();
        o.admm_base = admm_base.c_str();
        o.lambda = lambda;
        o.horizon = horizon;
        o.beta = beta;
        o.gamma = gamma;
        o.max_iter = iters;
        o.var_cap = var_cap;
        o.coupled_kernels = coupled;
        o.solver_tol = tol;
        return o;
    }

    json echo() const {
        return {{"method", method}, {"admm_base", admm_base}, {"backend", backend}, {"lambda", lambda},
                {"beta", beta},     {"gamma", gamma},         {"iters", iters},     {"horizon", horizon},
                {"var_cap", var_cap}, {"coupled_kernels", coupled}, {"tol", tol}};
    }
};

json info_json(const gs_result* r) {
    gs_result_info i;
    gs_result_info_get(r, &i);
    return {{"formulation", gs_result_formulation(r)},
            {"backend", gs_result_backend(r)},
            {"infeasible", i.infeasible != 0},
            {"objective", i.objective},
            {"num_vars", i.num_vars},
            {"num_rows", i.num_rows},
            {"num_nonzeros", i.num_nonzeros},
            {"iterations", i.iterations},
            {"converged", i.converged != 0},
            {"build_seconds", i.build_seconds},
            {"solve_seconds", i.solve_seconds},
            {"max_violation", i.max_violation},
            {"coupling_violation", i.coupling_violation},
            {"threshold_slack", i.threshold_slack},
            {"message", gs_result_message(r)}};
}

// "50..500" with a step, or a comma list
std::vector<int> parse_range(const std::string& text, int step) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int a = std::stoi(text.substr(0, dots)), b = std::stoi(text.substr(dots + 2));
        if (step <= 0 || a > b) throw Failure{kExitUsage, "bad range " + text};
        for (int v = a; v <= b; v += step) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

int run_guarded(Manifest& mf, const std::function<int()>& body) {
    mf.write();
    try {
        const int code = body();
        mf.finish(code == kExitOk ? "ok" : code == kExitInfeasible ? "infeasible" : "failed");
        mf.print_outputs();
        return code;
    } catch (const Failure& f) {
        mf.finish(f.code == kExitInfeasible ? "infeasible" : "failed", f.message);
        std::cerr << "error: " << f.message << '\n';
        mf.print_outputs();
        return f.code;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Policy synthesis for multi-agent factored MDPs under graph temporal logic"};
    app.require_subcommand(1);
    std::string out_dir = "gtlsynth_out";
    app.add_option("--out", out_dir, "output directory");
    app.set_version_flag("--version", gs_version());
    std::vector<std::string> args(argv, argv + argc);

    // compile
    auto* compile = app.add_subcommand("compile", "compile a GTL formula and dump its DFA");
    std::string formula;
    int dfa_cap = 100000;
    compile->add_option("formula", formula, "GTL formula")->required();
    compile->add_option("--cap", dfa_cap, "DFA state cap");

    // synth
    auto* synth = app.add_subcommand("synth", "synthesize policies");
    InstanceArgs synth_in;
    SynthArgs synth_args;
    synth_in.add(synth);
    synth_args.add(synth, true);

    // simulate
    auto* sim = app.add_subcommand("simulate", "sample a trajectory under a policy");
    InstanceArgs sim_in;
    std::string sim_policy;
    int sim_steps = 20;
    uint64_t sim_seed = 1;
    sim_in.add(sim);
    sim->add_option("--policy", sim_policy, "policy file")->required()->check(CLI::ExistingFile);
    sim->add_option("--steps", sim_steps, "trajectory length")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "sampling seed");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "satisfaction probabilities and expected reward of a policy");
    InstanceArgs eval_in;
    std::string eval_policy, eval_mode = "auto";
    int eval_runs = 10000, eval_horizon = 0;
    uint64_t eval_seed = 1;
    double confidence = 0.95;
    bool eval_exact = false, eval_mc = false;
    eval_in.add(eval);
    eval->add_option("--policy", eval_policy, "policy file")->required()->check(CLI::ExistingFile);
    eval->add_option("--mode", eval_mode, "exact, mc or auto")->check(CLI::IsMember({"exact", "mc", "auto"}));
    eval->add_flag("--exact", eval_exact, "same as --mode exact");
    eval->add_flag("--mc", eval_mc, "same as --mode mc");
    eval->add_option("--runs", eval_runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
    eval->add_option("--seed", eval_seed, "Monte Carlo seed");
    eval->add_option("--confidence", confidence, "interval confidence")->check(CLI::Range(0.5, 0.9999));
    eval->add_option("--horizon", eval_horizon, "reward horizon (at least the formula horizons)");

    // bench
    auto* bench = app.add_subcommand("bench", "benchmark harness");
    bench->require_subcommand(1);
    SynthArgs bench_args;
    std::string lambdas = "0.9,0.8,0.7,0.6", pxis = "0.1,0.2,0.5,0.8", epsilons = "0.05", agent_range = "50,100,200,400";
    int bench_runs = 2000, range_step = 50, central_limit = 0;
    uint64_t bench_seed = 1;
    InstanceArgs bench_in;
    auto* b_crop = bench->add_subcommand("crop", "average yield over lambda and (p, xi)");
    auto* b_urban = bench->add_subcommand("urban", "urban security patrol");
    auto* b_rescue = bench->add_subcommand("rescue", "search and rescue at scale");
    auto* b_scale = bench->add_subcommand("scaling", "ADMM and centralized wall time against crop field count");
    for (auto* b : {b_crop, b_urban, b_rescue, b_scale}) {
        bench_args.add(b, b != b_scale);
        b->add_option("--runs", bench_runs, "Monte Carlo runs per evaluation")->check(CLI::PositiveNumber);
        b->add_option("--seed", bench_seed, "Monte Carlo seed");
        b->add_option("--scenario-seed", bench_in.seed, "seed of the constrained-subset draw");
    }
    b_crop->add_option("--agents", bench_in.agents, "fields");
    b_crop->add_option("--lambdas", lambdas, "comma list");
    b_crop->add_option("--pxi", pxis, "comma list of p = xi values");
    b_crop->add_option("--epsilons", epsilons, "comma list");
    b_rescue->add_option("--agents", bench_in.agents, "robots");
    b_scale->add_option("--agents", agent_range, "comma list or a..b");
    b_scale->add_option("--step", range_step, "step for a..b ranges");
    b_scale->add_option("--central-limit", central_limit, "largest M for the centralized solve (0 for all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return e.get_exit_code() == 0 ? 0 : kExitUsage;
        (void)rc;
    }
    const fs::path dir(out_dir);
    try {
        fs::create_directories(dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (compile->parsed()) {
        Manifest mf(dir, "compile", args);
        mf.config() = {{"formula", formula}, {"cap", dfa_cap}};
        return run_guarded(mf, [&] {
            char* text = nullptr;
            int states = 0;
            const auto t0 = std::chrono::steady_clock::now();
            check(gs_compile(formula.c_str(), dfa_cap, &text, &states));
            mf.timing("compile_seconds", since(t0));
            mf.set("dfa_states", states);
            mf.output("dfa.txt", take(text));
            return kExitOk;
        });
    }

    if (synth->parsed()) {
        Manifest mf(dir, "synth", args);
        mf.config() = {{"instance", synth_in.echo()}, {"synth", synth_args.echo()}};
        mf.set("backend", synth_args.backend);
        return run_guarded(mf, [&] {
            InstanceHandle inst{synth_in.load(synth_args.lambda)};
            mf.output("model.json", take([&] { char* s = nullptr; check(gs_instance_model_json(inst.h, &s)); return s; }()));
            mf.output("specs.json", take([&] { char* s = nullptr; check(gs_instance_specs_json(inst.h, &s)); return s; }()));
            const auto opt = synth_args.options(synth_args.method);
            ResultHandle res;
            const gs_status st = gs_synthesize(inst.h, &opt, &res.h);
            if (res.h) {
                const json info = info_json(res.h);
                mf.set("result", info);
                mf.timing("build_seconds", info["build_seconds"]);
                mf.timing("solve_seconds", info["solve_seconds"]);
                std::cerr << "objective " << num(info["objective"]) << ", " << info["num_vars"] << " columns, "
                          << info["iterations"] << " iterations\n";
            }
            check(st);
            char* pol = nullptr;
            check(gs_result_policy_json(res.h, &pol));
            mf.output("policy.json", take(pol));
            if (synth_args.method == "admm") {
                char* csv = nullptr;
                check(gs_result_trace_csv(res.h, &csv));
                mf.output("residuals.csv", take(csv));
                gs_result_info i;
                gs_result_info_get(res.h, &i);
                if (!i.converged) std::cerr << "warning: " << gs_result_message(res.h) << '\n';
            }
            return kExitOk;
        });
    }

    if (sim->parsed()) {
        Manifest mf(dir, "simulate", args);
        mf.config() = {{"instance", sim_in.echo()}, {"policy", sim_policy}, {"steps", sim_steps}};
        mf.seed(sim_seed);
        return run_guarded(mf, [&] {
            InstanceHandle inst{sim_in.load(-1)};
            const std::string pol = read_file(sim_policy);
            char* text = nullptr;
            check(gs_simulate(inst.h, pol.c_str(), sim_steps, sim_seed, &text));
            mf.output("trajectory.txt", take(text));
            return kExitOk;
        });
    }

    if (eval->parsed()) {
        if (eval_exact && eval_mc) {
            std::cerr << "error: --exact and --mc are exclusive\n";
            return kExitUsage;
        }
        if (eval_exact) eval_mode = "exact";
        if (eval_mc) eval_mode = "mc";
        Manifest mf(dir, "evaluate", args);
        mf.config() = {{"instance", eval_in.echo()}, {"policy", eval_policy}, {"mode", eval_mode},
                       {"runs", eval_runs},          {"confidence", confidence}, {"horizon", eval_horizon}};
        mf.seed(eval_seed);
        return run_guarded(mf, [&] {
            InstanceHandle inst{eval_in.load(-1)};
            const std::string pol = read_file(eval_policy);
            char* csv = nullptr;
            gs_eval_summary s;
            const auto t0 = std::chrono::steady_clock::now();
            check(gs_evaluate(inst.h, pol.c_str(), eval_mode.c_str(), eval_runs, eval_seed, confidence, eval_horizon,
                              &csv, &s));
            mf.timing("evaluate_seconds", since(t0));
            mf.set("summary", {{"exact", s.exact != 0},
                               {"horizon", s.horizon},
                               {"total_reward", s.total_reward},
                               {"total_reward_se", s.total_reward_se},
                               {"min_probability", s.min_probability}});
            std::cerr << (s.exact ? "exact" : "Monte Carlo") << ": min probability " << num(s.min_probability)
                      << ", expected reward " << num(s.total_reward) << '\n';
            mf.output("evaluation.csv", take(csv));
            return kExitOk;
        });
    }

    // bench
    Manifest mf(dir, std::string("bench_") + bench->get_subcommands()[0]->get_name(), args);
    mf.config() = {{"synth", bench_args.echo()}, {"runs", bench_runs}, {"scenario_seed", bench_in.seed}};
    mf.set("backend", bench_args.backend);
    mf.seed(bench_seed);

    // synthesize and evaluate one instance; returns a CSV row fragment
    auto synth_eval = [&](gs_instance* inst, const std::string& method, int agents, json& rec) -> bool {
        const auto opt = bench_args.options(method);
        ResultHandle res;
        const gs_status st = gs_synthesize(inst, &opt, &res.h);
        if (res.h) rec["result"] = info_json(res.h);
        if (st == GS_ERR_INFEASIBLE) return false;
        check(st);
        char* pol = nullptr;
        check(gs_result_policy_json(res.h, &pol));
        const std::string policy = take(pol);
        gs_eval_summary s;
        char* csv = nullptr;
        check(gs_evaluate(inst, policy.c_str(), "auto", bench_runs, bench_seed, 0.95, 0, &csv, &s));
        gs_string_free(csv);
        rec["eval"] = {{"exact", s.exact != 0},
                       {"horizon", s.horizon},
                       {"total_reward", s.total_reward},
                       {"total_reward_se", s.total_reward_se},
                       {"min_probability", s.min_probability},
                       {"min_lower", s.min_lower},
                       {"yield", s.total_reward / (agents * (s.horizon + 1.0))}};
        return true;
    };

    if (b_crop->parsed()) {
        return run_guarded(mf, [&] {
            if (bench_args.method == "local") bench_args.coupled = true;
            const int m = bench_in.agents > 0 ? bench_in.agents : 25;
            std::ostringstream csv;
            csv << "epsilon,p,xi,lambda,status,objective,lp_yield,yield,yield_se,min_probability,solve_seconds\n";
            json records = json::array();
            for (double eps : parse_list(epsilons))
                for (double pxi : parse_list(pxis))
                    for (double lam : parse_list(lambdas)) {
                        gs_scenario_config c;
                        gs_scenario_config_default(&c);
                        c.kind = "crop";
                        c.agents = m;
                        c.epsilon = eps;
                        c.p = c.xi = pxi;
                        c.lambda = lam;
                        c.seed = bench_in.seed;
                        InstanceHandle inst;
                        check(gs_instance_scenario(&c, &inst.h));
                        json rec = {{"epsilon", eps}, {"p", pxi}, {"xi", pxi}, {"lambda", lam}};
                        const bool ok = synth_eval(inst.h, bench_args.method, m, rec);
                        const auto& r = rec["result"];
                        csv << eps << ',' << pxi << ',' << pxi << ',' << lam << ',' << (ok ? "ok" : "infeasible") << ',';
                        if (ok) {
                            const auto& e = rec["eval"];
                            const double h = e["horizon"].get<double>() + 1;
                            csv << num(r["objective"]) << ',' << num(r["objective"].get<double>() / (m * h)) << ','
                                << num(e["yield"]) << ',' << num(e["total_reward_se"].get<double>() / (m * h)) << ','
                                << num(e["min_probability"]) << ',' << num(r["solve_seconds"]) << '\n';
                        } else {
                            csv << ",,,,,\n";
                        }
                        std::cerr << "eps " << eps << " p=xi " << pxi << " lambda " << lam << ": "
                                  << (ok ? "yield " + num(rec["eval"]["yield"]) : std::string("infeasible")) << '\n';
                        records.push_back(rec);
                    }
            mf.set("records", records);
            mf.output("crop_yield.csv", csv.str());
            return kExitOk;
        });
    }

    if (b_urban->parsed() || b_rescue->parsed()) {
        const bool urban = b_urban->parsed();
        return run_guarded(mf, [&] {
            gs_scenario_config c;
            gs_scenario_config_default(&c);
            c.kind = urban ? "urban" : "rescue";
            c.agents = urban ? 15 : (bench_in.agents > 0 ? bench_in.agents : 50);
            c.lambda = bench_args.lambda >= 0 ? bench_args.lambda : (urban ? 0.9 : 0.95);
            c.seed = bench_in.seed;
            InstanceHandle inst;
            check(gs_instance_scenario(&c, &inst.h));
            std::ostringstream csv;
            csv << "method,status,objective,num_vars,iterations,converged,solve_seconds,min_probability,exact,total_reward\n";
            json records = json::array();
            std::vector<std::string> methods = {bench_args.method};
            if (!urban && bench_args.method != "neighboring") methods.push_back("neighboring");
            for (const auto& method : methods) {
                json rec = {{"method", method}};
                std::string status;
                try {
                    status = synth_eval(inst.h, method, c.agents, rec) ? "ok" : "infeasible";
                } catch (const Failure& f) {
                    status = "error";
                    rec["error"] = f.message;
                    std::cerr << method << ": " << f.message << '\n';
                }
                csv << method << ',' << status << ',';
                if (status == "ok") {
                    const auto& r = rec["result"];
                    const auto& e = rec["eval"];
                    csv << num(r["objective"]) << ',' << r["num_vars"] << ',' << r["iterations"] << ','
                        << (r["converged"].get<bool>() ? 1 : 0) << ',' << num(r["solve_seconds"]) << ','
                        << num(e["min_probability"]) << ',' << (e["exact"].get<bool>() ? 1 : 0) << ','
                        << num(e["total_reward"]) << '\n';
                } else {
                    csv << ",,,,,,,\n";
                }
                records.push_back(rec);
            }
            mf.set("records", records);
            mf.output(urban ? "urban.csv" : "rescue.csv", csv.str());
            return kExitOk;
        });
    }

    // scaling
    return run_guarded(mf, [&] {
        std::ostringstream csv;
        csv << "agents,num_vars,admm_seconds,admm_iterations,admm_seconds_per_iteration,central_seconds\n";
        bench_args.coupled = true;
        for (int m : parse_range(agent_range, range_step)) {
            gs_scenario_config c;
            gs_scenario_config_default(&c);
            c.kind = "crop";
            c.agents = m;
            const int side = static_cast<int>(std::lround(std::sqrt(m)));
            if (side * side != m) {
                // nearest rectangular torus with at least three rows
                int rows = side;
                while (rows > 3 && m % rows != 0) --rows;
                c.rows = rows;
                c.cols = m / rows;
            }
            c.lambda = bench_args.lambda >= 0 ? bench_args.lambda : 0.9;
            c.seed = bench_in.seed;
            InstanceHandle inst;
            check(gs_instance_scenario(&c, &inst.h));
            auto opt = bench_args.options("admm");
            opt.gamma = 1e-300;  // fixed iteration count
            ResultHandle res;
            check(gs_synthesize(inst.h, &opt, &res.h));
            gs_result_info a;
            gs_result_info_get(res.h, &a);
            double central = NAN;
            if (central_limit == 0 || m <= central_limit) {
                auto copt = bench_args.options("local");
                ResultHandle cres;
                check(gs_synthesize(inst.h, &copt, &cres.h));
                gs_result_info ci;
                gs_result_info_get(cres.h, &ci);
                central = ci.solve_seconds;
            }
            csv << m << ',' << a.num_vars << ',' << num(a.solve_seconds) << ',' << a.iterations << ','
                << num(a.solve_seconds / std::max(1, a.iterations)) << ',' << (std::isnan(central) ? "" : num(central))
                << '\n';
            std::cerr << "M " << m << ": admm " << num(a.solve_seconds) << " s, central "
                      << (std::isnan(central) ? std::string("skipped") : num(central) + " s") << '\n';
        }
        mf.output("scaling.csv", csv.str());
        return kExitOk;
    });
}
