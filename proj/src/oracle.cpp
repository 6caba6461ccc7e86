#include "gtlsynth/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

namespace {

struct VecHash {
    size_t operator()(const std::vector<int>& v) const {
        uint64_t h = 1469598103934665603ull;
        for (int x : v) h = (h ^ static_cast<uint32_t>(x)) * 1099511628211ull;
        return static_cast<size_t>(h);
    }
};

using Dist = std::unordered_map<std::vector<int>, double, VecHash>;

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int sample(const std::vector<double>& p, std::mt19937_64& rng) {
    double u = uniform01(rng);
    for (size_t k = 0; k < p.size(); ++k) {
        if (u < p[k]) return static_cast<int>(k);
        u -= p[k];
    }
    for (size_t k = p.size(); k-- > 0;)
        if (p[k] > 0) return static_cast<int>(k);
    return 0;
}

// Policy state carried alongside the joint agent state: the DFA state of each
// neighborhood-form policy.
struct Executor {
    const FactoredMdp& model;
    const Policy& policy;
    std::vector<int> tracked;  // agents with neighborhood-form policies

    Executor(const FactoredMdp& m, const Policy& p) : model(m), policy(p) {
        if (static_cast<int>(p.agents.size()) != m.size())
            throw Error(ErrorCode::argument, "policy covers " + std::to_string(p.agents.size()) + " agents, model has " +
                                                 std::to_string(m.size()));
        for (const auto& ap : p.agents) {
            if (ap.form == PolicyForm::flat) throw Error(ErrorCode::argument, "flat policies cannot drive a factored model");
            if (ap.num_actions != m.agents[ap.agent].num_actions())
                throw Error(ErrorCode::argument, "policy action count mismatch for agent " + std::to_string(ap.agent));
            if (ap.form == PolicyForm::neighborhood) {
                if (!ap.product) throw Error(ErrorCode::argument, "neighborhood policy without product model");
                tracked.push_back(ap.agent);
            }
        }
    }

    int64_t nbhd_code(int agent, const int* joint) const {
        const auto& pr = *policy.agents[agent].product;
        std::vector<int> local;
        for (int k : pr.members()) local.push_back(joint[k]);
        return pr.encode(local);
    }

    // initial policy DFA states
    std::vector<int> initial_q(const int* joint) const {
        std::vector<int> q;
        for (int k : tracked) q.push_back(policy.agents[k].product->next_q(policy.agents[k].product->dfa().initial, nbhd_code(k, joint)));
        return q;
    }

    std::vector<int> advance_q(const std::vector<int>& q, const int* joint) const {
        std::vector<int> out(q.size());
        for (size_t k = 0; k < tracked.size(); ++k) out[k] = policy.agents[tracked[k]].product->next_q(q[k], nbhd_code(tracked[k], joint));
        return out;
    }

    std::vector<double> action_dist(int agent, int t, const int* joint, const std::vector<int>& q) const {
        const auto& ap = policy.agents[agent];
        if (ap.form == PolicyForm::local) return ap.distribution(t, joint[agent], -1);
        const size_t pos = std::find(tracked.begin(), tracked.end(), agent) - tracked.begin();
        return ap.distribution(t, nbhd_code(agent, joint), q[pos]);
    }
};

// Distribution keys: agent states, then tracked policy DFA states, then the
// owner's specification DFA state (when present).
template <class Visit>
void propagate(const FactoredMdp& model, const Policy& policy, const Dfa* spec, int owner, int horizon, int64_t cap,
               Visit&& visit) {
    Executor ex(model, policy);
    const int m = model.size();
    const int nt = static_cast<int>(ex.tracked.size());
    std::vector<int> s0(m);
    for (int i = 0; i < m; ++i) s0[i] = model.agents[i].initial;
    std::vector<int> key = s0;
    for (int q : ex.initial_q(s0.data())) key.push_back(q);
    if (spec) key.push_back(spec->step(spec->initial, spec->letter(model, owner, s0.data())));
    Dist dist{{key, 1.0}};
    for (int t = 0; t <= horizon; ++t) {
        Dist next;
        for (const auto& [k, p] : dist) {
            const int* joint = k.data();
            std::vector<int> q(k.begin() + m, k.begin() + m + nt);
            std::vector<std::vector<double>> sig(m);
            for (int i = 0; i < m; ++i) sig[i] = ex.action_dist(i, t, joint, q);
            visit(t, k, p, sig);
            if (t == horizon) continue;
            // each agent moves independently given the current joint state
            std::vector<std::vector<std::pair<int, double>>> moves(m);
            for (int i = 0; i < m; ++i) {
                std::vector<double> acc(model.agents[i].num_states(), 0.0);
                for (int a = 0; a < model.agents[i].num_actions(); ++a) {
                    if (sig[i][a] <= 0) continue;
                    for (const auto& tr : model.row(i, joint, a)) acc[tr.next] += sig[i][a] * tr.prob;
                }
                for (int s = 0; s < static_cast<int>(acc.size()); ++s)
                    if (acc[s] > 0) moves[i].push_back({s, acc[s]});
            }
            std::vector<int> nk(k.size());
            std::vector<size_t> idx(m, 0);
            while (true) {
                double pr = p;
                for (int i = 0; i < m; ++i) {
                    nk[i] = moves[i][idx[i]].first;
                    pr *= moves[i][idx[i]].second;
                }
                auto nq = ex.advance_q(q, nk.data());
                std::copy(nq.begin(), nq.end(), nk.begin() + m);
                if (spec) nk.back() = spec->step(k.back(), spec->letter(model, owner, nk.data()));
                next[nk] += pr;
                if (static_cast<int64_t>(next.size()) > cap)
                    throw Error(ErrorCode::state_cap, "joint distribution support exceeds the cap of " + std::to_string(cap));
                int i = 0;
                for (; i < m; ++i) {
                    if (++idx[i] < moves[i].size()) break;
                    idx[i] = 0;
                }
                if (i == m) break;
            }
        }
        dist.swap(next);
    }
}

double z_value(double confidence) {
    // two-sided normal quantile by bisection on erfc
    const double alpha = 1.0 - confidence;
    double lo = 0, hi = 40;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / std::sqrt(2.0)) > alpha) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

JointMdp compose_joint(const SynthesisProblem& problem, int64_t cap) {
    const FactoredMdp& model = *problem.model;
    const int m = model.size();
    JointMdp j;
    int64_t ns = 1, na = 1;
    for (int i = 0; i < m; ++i) {
        j.state_radix.push_back(model.agents[i].num_states());
        j.action_radix.push_back(model.agents[i].num_actions());
        ns *= model.agents[i].num_states();
        na *= model.agents[i].num_actions();
        if (ns > cap) throw Error(ErrorCode::state_cap, "joint state space exceeds the cap of " + std::to_string(cap));
    }
    for (int i = 0; i < m; ++i) {
        if (!problem.products[i]) continue;
        j.constrained.push_back(i);
        j.state_radix.push_back(problem.products[i]->dfa().num_states);
        ns *= problem.products[i]->dfa().num_states;
        if (ns > cap) throw Error(ErrorCode::state_cap, "joint product state space exceeds the cap of " + std::to_string(cap));
    }
    if (ns * na > 20 * cap) throw Error(ErrorCode::state_cap, "joint kernel exceeds the cap");
    const int nc = static_cast<int>(j.constrained.size());
    auto decode = [&](int64_t code, std::vector<int>& out) {
        for (size_t k = 0; k < j.state_radix.size(); ++k) {
            out[k] = static_cast<int>(code % j.state_radix[k]);
            code /= j.state_radix[k];
        }
    };
    auto encode = [&](const std::vector<int>& v) {
        int64_t code = 0;
        for (size_t k = j.state_radix.size(); k-- > 0;) code = code * j.state_radix[k] + v[k];
        return code;
    };
    auto& f = j.mdp;
    f.num_states = static_cast<int>(ns);
    f.num_actions = static_cast<int>(na);
    f.kernel.assign(static_cast<size_t>(ns * na), {});
    f.reward.assign(static_cast<size_t>(ns * na), 0.0);
    f.accepting.assign(nc, std::vector<char>(ns, 0));
    for (int k = 0; k < nc; ++k) f.lambda.push_back(problem.lambda[j.constrained[k]]);
    std::vector<int> st(j.state_radix.size()), nx(j.state_radix.size()), act(m);
    for (int i = 0; i < m; ++i) st[i] = model.agents[i].initial;
    for (int k = 0; k < nc; ++k) {
        const auto& pr = *problem.products[j.constrained[k]];
        st[m + k] = pr.dfa().step(pr.dfa().initial, pr.dfa().letter(model, j.constrained[k], st.data()));
    }
    f.initial = static_cast<int>(encode(st));
    for (int64_t s = 0; s < ns; ++s) {
        decode(s, st);
        for (int k = 0; k < nc; ++k) f.accepting[k][s] = problem.products[j.constrained[k]]->dfa().accepting(st[m + k]);
        for (int64_t a = 0; a < na; ++a) {
            int64_t rest = a;
            double r = 0;
            for (int i = 0; i < m; ++i) {
                act[i] = static_cast<int>(rest % j.action_radix[i]);
                rest /= j.action_radix[i];
                r += model.reward(i, st[i], act[i]);
            }
            const size_t row = static_cast<size_t>(s * na + a);
            f.reward[row] = r;
            // product of per-agent rows
            std::vector<std::pair<std::vector<int>, double>> partial{{{}, 1.0}};
            for (int i = 0; i < m; ++i) {
                std::vector<std::pair<std::vector<int>, double>> grown;
                for (const auto& [pre, p] : partial)
                    for (const auto& tr : model.row(i, st.data(), act[i])) {
                        if (tr.prob <= 0) continue;
                        auto v = pre;
                        v.push_back(tr.next);
                        grown.emplace_back(std::move(v), p * tr.prob);
                    }
                partial.swap(grown);
            }
            for (const auto& [nxt, p] : partial) {
                std::copy(nxt.begin(), nxt.end(), nx.begin());
                for (int k = 0; k < nc; ++k) {
                    const auto& d = problem.products[j.constrained[k]]->dfa();
                    nx[m + k] = d.step(st[m + k], d.letter(model, j.constrained[k], nx.data()));
                }
                f.kernel[row].push_back({static_cast<int>(encode(nx)), p});
            }
        }
    }
    return j;
}

AgentEvaluation exact_satisfaction(const FactoredMdp& model, const Policy& policy, const Formula& f, int owner,
                                   int64_t cap) {
    const Dfa dfa = compile_dfa(f);
    AgentEvaluation ev;
    ev.agent = owner;
    ev.horizon = gtlsynth::horizon(f);
    double mass = 0, reward = 0;
    propagate(model, policy, &dfa, owner, ev.horizon, cap,
              [&](int t, const std::vector<int>& k, double p, const std::vector<std::vector<double>>& sig) {
                  for (int a = 0; a < model.agents[owner].num_actions(); ++a)
                      reward += p * sig[owner][a] * model.reward(owner, k[owner], a);
                  if (t == ev.horizon && dfa.accepting(k.back())) mass += p;
              });
    ev.probability = std::clamp(mass, 0.0, 1.0);
    ev.lower = ev.upper = ev.probability;
    ev.expected_reward = reward;
    return ev;
}

double exact_expected_reward(const FactoredMdp& model, const Policy& policy, int horizon, int64_t cap) {
    double reward = 0;
    propagate(model, policy, nullptr, 0, horizon, cap,
              [&](int, const std::vector<int>& k, double p, const std::vector<std::vector<double>>& sig) {
                  for (int i = 0; i < model.size(); ++i)
                      for (int a = 0; a < model.agents[i].num_actions(); ++a)
                          reward += p * sig[i][a] * model.reward(i, k[i], a);
              });
    return reward;
}

namespace {

// states at 0..horizon; actions at 0..horizon when requested
std::vector<std::vector<int>> run_once(const FactoredMdp& model, const Executor& ex, int horizon, uint64_t seed,
                                       std::vector<std::vector<int>>* actions) {
    std::mt19937_64 rng(seed);
    const int m = model.size();
    std::vector<std::vector<int>> states;
    std::vector<int> cur(m);
    for (int i = 0; i < m; ++i) cur[i] = model.agents[i].initial;
    auto q = ex.initial_q(cur.data());
    states.push_back(cur);
    std::vector<double> probs;
    std::vector<int> act(m);
    for (int t = 0; t < horizon; ++t) {
        std::vector<int> nxt(m);
        for (int i = 0; i < m; ++i) {
            const int a = sample(ex.action_dist(i, t, cur.data(), q), rng);
            act[i] = a;
            const auto& row = model.row(i, cur.data(), a);
            probs.clear();
            for (const auto& tr : row) probs.push_back(tr.prob);
            nxt[i] = row[sample(probs, rng)].next;
        }
        if (actions) actions->push_back(act);
        q = ex.advance_q(q, nxt.data());
        cur = nxt;
        states.push_back(cur);
    }
    if (actions) {
        for (int i = 0; i < m; ++i) act[i] = sample(ex.action_dist(i, horizon, cur.data(), q), rng);
        actions->push_back(act);
    }
    return states;
}

} // namespace

GraphTrajectory simulate(const FactoredMdp& model, const Policy& policy, int horizon, uint64_t seed) {
    Executor ex(model, policy);
    return make_trajectory(model, run_once(model, ex, horizon, seed, nullptr));
}

std::pair<double, double> wilson_interval(int64_t k, int64_t n, double confidence) {
    if (n <= 0) return {0.0, 1.0};
    const double z = z_value(confidence);
    const double p = static_cast<double>(k) / n;
    const double z2 = z * z / n;
    const double centre = (p + z2 / 2) / (1 + z2);
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n)) / (1 + z2);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

AgentEvaluation monte_carlo_satisfaction(const FactoredMdp& model, const Policy& policy, const Formula& f, int owner,
                                         int runs, uint64_t seed, double confidence) {
    if (runs < 1) throw Error(ErrorCode::argument, "runs must be at least 1");
    AgentEvaluation ev;
    ev.agent = owner;
    ev.exact = false;
    ev.runs = runs;
    ev.horizon = gtlsynth::horizon(f);
    int64_t hits = 0;
    for (int r = 0; r < runs; ++r) {
        const auto g = simulate(model, policy, ev.horizon, splitmix64(seed + static_cast<uint64_t>(r)));
        if (evaluate(model, g, owner, 0, f)) ++hits;
    }
    ev.probability = static_cast<double>(hits) / runs;
    if (hits == runs || hits == 0) {
        // degenerate samples: report the point estimate with zero width
        ev.lower = ev.upper = ev.probability;
    } else {
        std::tie(ev.lower, ev.upper) = wilson_interval(hits, runs, confidence);
    }
    ev.half_width = 0.5 * (ev.upper - ev.lower);
    return ev;
}

std::vector<std::vector<std::vector<double>>> local_marginals(const FactoredMdp& model, const Policy& policy,
                                                              int horizon) {
    if (model.form != KernelForm::local) throw Error(ErrorCode::kernel_form, "marginals need local-form kernels");
    std::vector<std::vector<std::vector<double>>> out(model.size());
    for (int i = 0; i < model.size(); ++i) {
        const auto& ag = model.agents[i];
        const auto& ap = policy.agents.at(i);
        if (ap.form != PolicyForm::local) throw Error(ErrorCode::argument, "product construction needs local policies");
        std::vector<double> d(ag.num_states(), 0.0);
        d[ag.initial] = 1.0;
        for (int t = 0; t <= horizon; ++t) {
            out[i].push_back(d);
            std::vector<double> nd(ag.num_states(), 0.0);
            for (int s = 0; s < ag.num_states(); ++s) {
                if (d[s] == 0) continue;
                const auto sig = ap.distribution(t, s);
                for (int a = 0; a < ag.num_actions(); ++a)
                    for (const auto& tr : ag.kernel[static_cast<size_t>(s) * ag.num_actions() + a])
                        nd[tr.next] += d[s] * sig[a] * tr.prob;
            }
            d = nd;
        }
    }
    return out;
}

std::vector<double> marginal_product_assignment(const OccupancyLp& lp, const SynthesisProblem& problem, const Policy& policy) {
    const auto marg = local_marginals(*problem.model, policy, problem.horizon);
    std::map<int, std::vector<std::vector<int>>> classes;
    for (int i = 0; i < problem.model->size(); ++i)
        if (problem.products[i]) classes[i] = local_state_classes(*problem.products[i]);
    std::vector<double> x(lp.num_vars(), 0.0);
    for (int v = 0; v < lp.num_vars(); ++v) {
        const auto& k = lp.keys[v];
        if (k.kind == VarKind::state_action) {
            const double ps = marg[k.agent][k.t][k.state];
            x[v] = ps * policy.agents[k.agent].distribution(k.t, k.state)[k.action];
        } else if (k.kind == VarKind::nbhd_state) {
            const auto& pr = *problem.products[k.agent];
            const auto& cls = classes.at(k.agent);
            double p = 1;
            for (size_t pos = 0; pos < pr.members().size(); ++pos) {
                const int rep = pr.component(k.state, static_cast<int>(pos));
                const auto& mk = marg[pr.members()[pos]][k.t];
                double sum = 0;
                for (size_t s = 0; s < mk.size(); ++s)
                    if (cls[pos][s] == rep) sum += mk[s];
                p *= sum;
            }
            x[v] = p;
        }
    }
    return x;
}

EvaluationReport exact_report(const FactoredMdp& model, const Policy& policy,
                              const std::vector<std::optional<Formula>>& formulas, int horizon, int64_t cap) {
    EvaluationReport rep;
    rep.horizon = horizon;
    for (size_t i = 0; i < formulas.size(); ++i) {
        if (!formulas[i]) continue;
        rep.agents.push_back(exact_satisfaction(model, policy, *formulas[i], static_cast<int>(i), cap));
        rep.horizon = std::max(rep.horizon, rep.agents.back().horizon);
    }
    rep.total_reward = exact_expected_reward(model, policy, rep.horizon, cap);
    return rep;
}

EvaluationReport monte_carlo_report(const FactoredMdp& model, const Policy& policy,
                                    const std::vector<std::optional<Formula>>& formulas, int runs, uint64_t seed,
                                    double confidence, int horizon) {
    if (runs < 1) throw Error(ErrorCode::argument, "runs must be at least 1");
    Executor ex(model, policy);
    EvaluationReport rep;
    rep.confidence = confidence;
    rep.horizon = horizon;
    std::vector<int> owners;
    for (size_t i = 0; i < formulas.size(); ++i)
        if (formulas[i]) {
            owners.push_back(static_cast<int>(i));
            rep.horizon = std::max(rep.horizon, gtlsynth::horizon(*formulas[i]));
        }
    std::vector<int64_t> hits(owners.size(), 0);
    std::vector<double> own_reward(owners.size(), 0.0);
    double sum = 0, sum2 = 0;
    for (int r = 0; r < runs; ++r) {
        std::vector<std::vector<int>> actions;
        auto states = run_once(model, ex, rep.horizon, splitmix64(seed + static_cast<uint64_t>(r)), &actions);
        double total = 0;
        std::vector<double> per_agent(model.size(), 0.0);
        for (int t = 0; t <= rep.horizon; ++t)
            for (int i = 0; i < model.size(); ++i) per_agent[i] += model.reward(i, states[t][i], actions[t][i]);
        for (double v : per_agent) total += v;
        sum += total;
        sum2 += total * total;
        const auto g = make_trajectory(model, std::move(states));
        for (size_t k = 0; k < owners.size(); ++k) {
            hits[k] += evaluate(model, g, owners[k], 0, *formulas[owners[k]]);
            own_reward[k] += per_agent[owners[k]];
        }
    }
    for (size_t k = 0; k < owners.size(); ++k) {
        AgentEvaluation ev;
        ev.agent = owners[k];
        ev.exact = false;
        ev.runs = runs;
        ev.horizon = gtlsynth::horizon(*formulas[owners[k]]);
        ev.probability = static_cast<double>(hits[k]) / runs;
        if (hits[k] == runs || hits[k] == 0) {
            ev.lower = ev.upper = ev.probability;
        } else {
            std::tie(ev.lower, ev.upper) = wilson_interval(hits[k], runs, confidence);
        }
        ev.half_width = 0.5 * (ev.upper - ev.lower);
        ev.expected_reward = own_reward[k] / runs;
        rep.agents.push_back(ev);
    }
    rep.total_reward = sum / runs;
    const double var = runs > 1 ? std::max(0.0, (sum2 - sum * sum / runs) / (runs - 1)) : 0.0;
    rep.total_reward_se = std::sqrt(var / runs);
    return rep;
}

} // namespace gtlsynth
