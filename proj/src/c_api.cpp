#include "gtlsynth/gtlsynth.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "gtlsynth/dfa.hpp"
#include "gtlsynth/error.hpp"
#include "gtlsynth/model_io.hpp"
#include "gtlsynth/pipeline.hpp"

using namespace gtlsynth;

struct gs_instance {
    Instance inst;
};

struct gs_result {
    SynthOutcome out;
};

namespace {

thread_local std::string g_error;

gs_status fail(gs_status s, const std::string& msg) {
    g_error = msg;
    return s;
}

template <class F>
gs_status guard(F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        return fail(static_cast<gs_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(GS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(GS_ERR_INTERNAL, e.what());
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

Policy load_policy(const Instance& inst, const char* text) {
    if (!text) throw Error(ErrorCode::argument, "policy text is null");
    Policy pol = parse_policy(text);
    if (static_cast<int>(pol.agents.size()) != inst.model.size())
        throw Error(ErrorCode::argument, "policy covers " + std::to_string(pol.agents.size()) + " agents, model has " +
                                             std::to_string(inst.model.size()));
    bool neighborhood = false;
    for (const auto& a : pol.agents) neighborhood = neighborhood || a.form == PolicyForm::neighborhood;
    if (neighborhood) {
        auto lambda = pol.lambda.size() == inst.lambda.size() ? pol.lambda : inst.lambda;
        attach_products(pol, make_problem(inst.model, inst.formulas, lambda, pol.horizon));
    }
    return pol;
}

} // namespace

extern "C" {

const char* gs_version(void) { return "0.1.0"; }

const char* gs_last_error(void) { return g_error.c_str(); }

void gs_string_free(char* s) { std::free(s); }

gs_status gs_compile(const char* formula, int state_cap, char** dfa_text, int* num_states) {
    return guard([&] {
        if (!formula || !dfa_text) return fail(GS_ERR_ARGUMENT, "null argument");
        const Dfa d = compile_dfa(parse_gtl(formula), state_cap > 0 ? state_cap : 100000);
        *dfa_text = dup(dump_dfa(d));
        if (num_states) *num_states = d.num_states;
        return GS_OK;
    });
}

gs_status gs_instance_load(const char* model_json, const char* specs_json, gs_instance** out) {
    return guard([&] {
        if (!model_json || !out) return fail(GS_ERR_ARGUMENT, "null argument");
        auto h = std::make_unique<gs_instance>();
        h->inst.model = build_model(model_json);
        h->inst.formulas.assign(h->inst.model.size(), std::nullopt);
        h->inst.lambda.assign(h->inst.model.size(), 0.0);
        if (specs_json) apply_specs(h->inst, specs_json);
        *out = h.release();
        return GS_OK;
    });
}

void gs_scenario_config_default(gs_scenario_config* cfg) {
    if (!cfg) return;
    const ScenarioConfig d;
    cfg->kind = "crop";
    cfg->agents = d.agents;
    cfg->rows = d.rows;
    cfg->cols = d.cols;
    cfg->epsilon = d.epsilon;
    cfg->p = d.p;
    cfg->xi = d.xi;
    cfg->r = d.r;
    cfg->lambda = d.lambda;
    cfg->constrained_fraction = d.constrained_fraction;
    cfg->initial_state = d.initial_state;
    cfg->seed = d.seed;
}

gs_status gs_instance_scenario(const gs_scenario_config* cfg, gs_instance** out) {
    return guard([&] {
        if (!cfg || !out || !cfg->kind) return fail(GS_ERR_ARGUMENT, "null argument");
        ScenarioConfig c;
        c.kind = cfg->kind;
        c.agents = cfg->agents;
        c.rows = cfg->rows;
        c.cols = cfg->cols;
        c.epsilon = cfg->epsilon;
        c.p = cfg->p;
        c.xi = cfg->xi;
        c.r = cfg->r;
        c.lambda = cfg->lambda;
        c.constrained_fraction = cfg->constrained_fraction;
        c.initial_state = cfg->initial_state;
        c.seed = cfg->seed;
        auto h = std::make_unique<gs_instance>();
        h->inst = instance_from(gen_scenario(c));
        *out = h.release();
        return GS_OK;
    });
}

int gs_instance_num_agents(const gs_instance* inst) { return inst ? inst->inst.model.size() : 0; }

gs_status gs_instance_model_json(const gs_instance* inst, char** out) {
    return guard([&] {
        if (!inst || !out) return fail(GS_ERR_ARGUMENT, "null argument");
        *out = dup(serialize(inst->inst.model));
        return GS_OK;
    });
}

gs_status gs_instance_specs_json(const gs_instance* inst, char** out) {
    return guard([&] {
        if (!inst || !out) return fail(GS_ERR_ARGUMENT, "null argument");
        *out = dup(serialize_specs(inst->inst));
        return GS_OK;
    });
}

void gs_instance_free(gs_instance* inst) { delete inst; }

void gs_synth_options_default(gs_synth_options* opt) {
    if (!opt) return;
    const SynthOptions d;
    opt->method = "local";
    opt->admm_base = "local";
    opt->lambda = -1;
    opt->horizon = -1;
    opt->beta = d.admm.beta;
    opt->gamma = d.admm.gamma;
    opt->max_iter = d.admm.max_iter;
    opt->var_cap = d.lp.var_cap;
    opt->coupled_kernels = 0;
    opt->solver_tol = d.solver.tol;
    opt->solver_max_iter = d.solver.max_iter;
    opt->on_iteration = nullptr;
    opt->user = nullptr;
}

gs_status gs_synthesize(const gs_instance* inst, const gs_synth_options* opt, gs_result** out) {
    return guard([&] {
        if (!inst || !opt || !out || !opt->method) return fail(GS_ERR_ARGUMENT, "null argument");
        *out = nullptr;
        SynthOptions o;
        o.method = parse_method(opt->method);
        o.admm_base = parse_method(opt->admm_base ? opt->admm_base : "local");
        if (opt->lambda >= 0) {
            if (opt->lambda > 1) return fail(GS_ERR_ARGUMENT, "lambda must lie in [0,1]");
            o.lambda = opt->lambda;
        }
        o.horizon = opt->horizon;
        o.admm.beta = opt->beta;
        o.admm.gamma = opt->gamma;
        o.admm.max_iter = opt->max_iter;
        if (opt->on_iteration) {
            auto cb = opt->on_iteration;
            void* user = opt->user;
            o.admm.on_iteration = [cb, user](const AdmmTraceRow& r) {
                return cb(r.iteration, r.res_p, r.res_d, r.objective, user) != 0;
            };
        }
        o.lp.var_cap = opt->var_cap;
        o.lp.coupled_kernels = opt->coupled_kernels != 0;
        o.solver.tol = opt->solver_tol;
        o.solver.max_iter = opt->solver_max_iter;
        auto h = std::make_unique<gs_result>();
        h->out = synthesize(inst->inst, o);
        const bool infeasible = h->out.status == SolveStatus::infeasible;
        const std::string msg = h->out.message;
        *out = h.release();
        return infeasible ? fail(GS_ERR_INFEASIBLE, "infeasible: " + msg) : GS_OK;
    });
}

void gs_result_info_get(const gs_result* res, gs_result_info* info) {
    if (!res || !info) return;
    const auto& o = res->out;
    info->infeasible = o.status == SolveStatus::infeasible;
    info->objective = o.objective;
    info->num_vars = o.num_vars;
    info->num_rows = o.num_rows;
    info->num_nonzeros = o.num_nonzeros;
    info->iterations = o.iterations;
    info->converged = o.converged;
    info->build_seconds = o.build_seconds;
    info->solve_seconds = o.solve_seconds;
    info->max_violation = o.residuals.max_violation;
    info->coupling_violation = o.residuals.coupling_violation;
    info->threshold_slack = std::isfinite(o.residuals.threshold_slack) ? o.residuals.threshold_slack : 0.0;
}

const char* gs_result_formulation(const gs_result* res) { return res ? res->out.formulation.c_str() : ""; }
const char* gs_result_backend(const gs_result* res) { return res ? res->out.backend.c_str() : ""; }
const char* gs_result_message(const gs_result* res) { return res ? res->out.message.c_str() : ""; }

gs_status gs_result_policy_json(const gs_result* res, char** out) {
    return guard([&] {
        if (!res || !out) return fail(GS_ERR_ARGUMENT, "null argument");
        if (res->out.status != SolveStatus::optimal) return fail(GS_ERR_INFEASIBLE, "no policy for an infeasible instance");
        *out = dup(serialize_policy(res->out.policy));
        return GS_OK;
    });
}

gs_status gs_result_trace_csv(const gs_result* res, char** out) {
    return guard([&] {
        if (!res || !out) return fail(GS_ERR_ARGUMENT, "null argument");
        *out = dup(trace_csv(res->out.trace));
        return GS_OK;
    });
}

void gs_result_free(gs_result* res) { delete res; }

gs_status gs_evaluate(const gs_instance* inst, const char* policy_json, const char* mode, int runs, uint64_t seed,
                      double confidence, int horizon, char** csv, gs_eval_summary* summary) {
    return guard([&] {
        if (!inst || !mode) return fail(GS_ERR_ARGUMENT, "null argument");
        const std::string m = mode;
        if (m != "exact" && m != "mc" && m != "auto") return fail(GS_ERR_ARGUMENT, "mode must be exact, mc or auto");
        if (!(confidence > 0 && confidence < 1)) return fail(GS_ERR_ARGUMENT, "confidence must lie in (0,1)");
        const Policy pol = load_policy(inst->inst, policy_json);
        EvaluationReport rep;
        bool exact = m != "mc";
        if (exact) {
            try {
                rep = exact_report(inst->inst.model, pol, inst->inst.formulas, std::max(0, horizon));
            } catch (const Error& e) {
                if (m == "exact" || e.code() != ErrorCode::state_cap) throw;
                exact = false;
            }
        }
        if (!exact) rep = monte_carlo_report(inst->inst.model, pol, inst->inst.formulas, runs, seed, confidence,
                                             std::max(0, horizon));
        rep.confidence = confidence;
        if (csv) *csv = dup(report_csv(rep));
        if (summary) {
            summary->exact = exact;
            summary->horizon = rep.horizon;
            summary->total_reward = rep.total_reward;
            summary->total_reward_se = rep.total_reward_se;
            summary->min_probability = 1.0;
            summary->min_lower = 1.0;
            for (const auto& a : rep.agents) {
                summary->min_probability = std::min(summary->min_probability, a.probability);
                summary->min_lower = std::min(summary->min_lower, a.lower);
            }
        }
        return GS_OK;
    });
}

gs_status gs_simulate(const gs_instance* inst, const char* policy_json, int horizon, uint64_t seed, char** out) {
    return guard([&] {
        if (!inst || !out) return fail(GS_ERR_ARGUMENT, "null argument");
        if (horizon < 1) return fail(GS_ERR_ARGUMENT, "horizon must be at least 1");
        const Policy pol = load_policy(inst->inst, policy_json);
        const auto g = simulate(inst->inst.model, pol, horizon, seed);
        std::ostringstream os;
        for (size_t t = 0; t < g.states.size(); ++t) {
            os << t;
            for (int s : g.states[t]) os << ' ' << s;
            os << '\n';
        }
        *out = dup(os.str());
        return GS_OK;
    });
}

} // extern "C"
