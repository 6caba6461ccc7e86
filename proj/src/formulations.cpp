#include "gtlsynth/formulations.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

namespace {

void check_lambda(double l) {
    if (!(l >= 0.0 && l <= 1.0)) throw Error(ErrorCode::argument, "lambda " + std::to_string(l) + " outside [0,1]");
}

[[noreturn]] void cap_exceeded(const char* what, long long need, long long cap) {
    throw Error(ErrorCode::state_cap, std::string("state-space cap exceeded: ") + what + " formulation needs more than " +
                                          std::to_string(need) + " variables (cap " + std::to_string(cap) + ")");
}

// states reachable under any action and any neighbor context, per time index
std::vector<std::vector<int>> local_reach(const AgentModel& ag, int horizon) {
    const int ns = ag.num_states(), na = ag.num_actions();
    const size_t contexts = ag.kernel.size() / na;
    std::vector<std::vector<int>> out(horizon + 1);
    std::vector<char> cur(ns, 0);
    cur[ag.initial] = 1;
    for (int t = 0; t <= horizon; ++t) {
        std::vector<char> nxt(ns, 0);
        for (int s = 0; s < ns; ++s)
            if (cur[s]) out[t].push_back(s);
        for (size_t ctx = 0; ctx < contexts; ++ctx) {
            if (!cur[ctx % ns]) continue;
            for (int a = 0; a < na; ++a)
                for (const auto& tr : ag.kernel[ctx * na + a])
                    if (tr.prob > 0) nxt[tr.next] = 1;
        }
        cur.swap(nxt);
    }
    return out;
}

// For each dependency of agent k, the representative of every state: states
// the kernel of k cannot tell apart share a class.
std::vector<std::vector<int>> kernel_classes(const FactoredMdp& model, int k) {
    const auto& ag = model.agents[k];
    const int ns = ag.num_states(), na = ag.num_actions();
    const int contexts = static_cast<int>(ag.kernel.size() / na);
    std::vector<std::vector<int>> out;
    int stride = ns;
    for (int j : ag.depends_on) {
        const int nj = model.agents[j].num_states();
        std::vector<int> cls(nj);
        for (int s = 0; s < nj; ++s) {
            cls[s] = s;
            for (int r = 0; r < s; ++r) {
                if (cls[r] != r) continue;
                bool same = true;
                for (int ctx = 0; ctx < contexts && same; ++ctx) {
                    if ((ctx / stride) % nj != s) continue;
                    const int other = ctx - (s - r) * stride;
                    for (int a = 0; a < na && same; ++a)
                        same = ag.kernel[static_cast<size_t>(ctx) * na + a] == ag.kernel[static_cast<size_t>(other) * na + a];
                }
                if (same) {
                    cls[s] = r;
                    break;
                }
            }
        }
        out.push_back(std::move(cls));
        stride *= nj;
    }
    return out;
}

void collect_preds(const Formula& f, std::vector<NodePred>& out) {
    if (f->op == Op::pred && std::find(out.begin(), out.end(), f->pred) == out.end()) out.push_back(f->pred);
    for (const auto& k : f->kids) collect_preds(k, out);
}

// union of two partitions given by representatives
std::vector<int> join_classes(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> parent(a.size());
    for (size_t s = 0; s < a.size(); ++s) parent[s] = static_cast<int>(s);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto unite = [&](int x, int y) {
        x = find(x);
        y = find(y);
        if (x != y) parent[std::max(x, y)] = std::min(x, y);
    };
    for (size_t s = 0; s < a.size(); ++s) {
        unite(static_cast<int>(s), a[s]);
        unite(static_cast<int>(s), b[s]);
    }
    std::vector<int> out(a.size());
    for (size_t s = 0; s < a.size(); ++s) out[s] = find(static_cast<int>(s));
    return out;
}

} // namespace

std::vector<std::vector<int>> local_state_classes(const ProductModel& pr) {
    const FactoredMdp& model = pr.model();
    std::vector<NodePred> preds;
    bool edges_matter = false;
    for (const auto& gp : pr.dfa().preds) {
        if (!gp.is_exists) {
            if (std::find(preds.begin(), preds.end(), gp.node) == preds.end()) preds.push_back(gp.node);
            continue;
        }
        collect_preds(gp.sub, preds);
        for (const auto& e : gp.chain)
            if (e.kind != EdgeProp::Kind::top && e.kind != EdgeProp::Kind::bottom &&
                model.edge_label.kind != EdgeLabel::Kind::constant)
                edges_matter = true;
    }
    std::vector<std::vector<int>> out;
    for (int k : pr.members()) {
        const auto& ag = model.agents[k];
        std::vector<int> cls(ag.num_states());
        std::map<std::vector<bool>, int> seen;
        for (int s = 0; s < ag.num_states(); ++s) {
            if (edges_matter) {
                cls[s] = s;
                continue;
            }
            std::vector<bool> sig;
            for (const auto& p : preds) sig.push_back(p.holds(ag, s));
            cls[s] = seen.emplace(sig, s).first->second;
        }
        out.push_back(std::move(cls));
    }
    return out;
}

OccupancyLp build_monolithic_lp(const FlatMdp& mdp, int horizon) {
    if (horizon < 0) throw Error(ErrorCode::argument, "negative horizon");
    if (mdp.lambda.size() != mdp.accepting.size()) throw Error(ErrorCode::argument, "one lambda per accepting set");
    for (double l : mdp.lambda) check_lambda(l);
    const int na = mdp.num_actions;
    std::vector<char> any_acc(mdp.num_states, 0);
    for (const auto& acc : mdp.accepting) {
        for (int s = 0; s < mdp.num_states; ++s) {
            if (!acc[s]) continue;
            any_acc[s] = 1;
            for (int a = 0; a < na; ++a)
                for (const auto& tr : mdp.kernel[static_cast<size_t>(s) * na + a])
                    if (tr.prob > 0 && !acc[tr.next])
                        throw Error(ErrorCode::argument, "accepting state " + std::to_string(s) + " is not absorbing");
        }
    }
    OccupancyLp lp;
    lp.formulation = "monolithic";
    std::map<int, int> rows;  // state -> flow row at t
    rows[mdp.initial] = lp.add_row(Sense::eq, 1.0, 0);
    std::vector<std::vector<int>> last;  // (var) at T per state
    std::vector<std::pair<int, int>> final_vars;
    for (int t = 0; t <= horizon; ++t) {
        std::map<int, int> next_rows;
        for (auto [s, row] : rows) {
            for (int a = 0; a < na; ++a) {
                const size_t r = static_cast<size_t>(s) * na + a;
                VarKey key;
                key.state = s;
                key.action = a;
                key.own_action = a;
                key.t = t;
                const int v = lp.add_var(key, 0.0, any_acc[s] ? 1.0 : kInf, mdp.reward[r]);
                lp.add(row, v, 1.0);
                if (t == horizon) {
                    final_vars.emplace_back(s, v);
                    continue;
                }
                for (const auto& tr : mdp.kernel[r]) {
                    if (tr.prob <= 0) continue;
                    auto it = next_rows.find(tr.next);
                    if (it == next_rows.end()) it = next_rows.emplace(tr.next, lp.add_row(Sense::eq, 0.0, 0)).first;
                    lp.add(it->second, v, -tr.prob);
                }
            }
        }
        rows.swap(next_rows);
    }
    for (size_t k = 0; k < mdp.accepting.size(); ++k) {
        const int row = lp.add_row(Sense::ge, mdp.lambda[k], 0);
        lp.threshold_rows.push_back(row);
        for (auto [s, v] : final_vars)
            if (mdp.accepting[k][s]) lp.add(row, v, 1.0);
    }
    return lp;
}

SynthesisProblem make_problem(const FactoredMdp& model, const std::vector<std::optional<Formula>>& formulas,
                              const std::vector<double>& lambda, int horizon, int dfa_cap) {
    if (static_cast<int>(formulas.size()) != model.size() || static_cast<int>(lambda.size()) != model.size())
        throw Error(ErrorCode::argument, "need one formula slot and one lambda per agent");
    SynthesisProblem p;
    p.model = &model;
    p.formulas = formulas;
    p.lambda = lambda;
    p.products.resize(model.size());
    int h = 0;
    std::map<std::string, std::shared_ptr<const Dfa>> cache;
    for (int i = 0; i < model.size(); ++i) {
        if (!formulas[i]) continue;
        check_lambda(lambda[i]);
        const auto& f = *formulas[i];
        h = std::max(h, gtlsynth::horizon(f));
        const std::string key = to_string(f);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, std::make_shared<const Dfa>(compile_dfa(f, dfa_cap))).first;
        p.products[i] = std::make_shared<const ProductModel>(model, i, it->second);
    }
    if (horizon >= 0 && horizon < h)
        throw Error(ErrorCode::argument, "horizon " + std::to_string(horizon) + " is shorter than the formula horizon " +
                                             std::to_string(h));
    p.horizon = horizon >= 0 ? horizon : h;
    return p;
}

OccupancyLp build_neighboring_lp(const SynthesisProblem& p, const LpOptions& opt) {
    const FactoredMdp& model = *p.model;
    const int m = model.size();
    const int horizon = p.horizon;
    auto trivial = std::make_shared<const Dfa>(compile_dfa(gtl::top()));
    std::vector<std::shared_ptr<const ProductModel>> prods(m);
    long long lower = 0;
    for (int i = 0; i < m; ++i) {
        prods[i] = p.products[i] ? p.products[i] : std::make_shared<const ProductModel>(model, i, trivial);
        lower += static_cast<long long>(horizon + 1) * prods[i]->joint_actions();
        if (lower > opt.var_cap) cap_exceeded("neighboring", lower, opt.var_cap);
    }

    OccupancyLp lp;
    lp.formulation = "neighboring";
    std::vector<std::vector<int>> vars(m);  // per agent, LP columns
    long long count = 0;
    std::vector<std::pair<int64_t, double>> succ;
    for (int i = 0; i < m; ++i) {
        const auto& pr = *prods[i];
        const int own = pr.member_pos(i);
        const int64_t nja = pr.joint_actions();
        std::vector<std::vector<int>> acts(nja);
        for (int64_t a = 0; a < nja; ++a) acts[a] = pr.decode_action(a);
        std::map<std::pair<int64_t, int>, int> rows;
        rows[{pr.initial_nbhd(), pr.initial_q()}] = lp.add_row(Sense::eq, 1.0, i);
        std::vector<int> final_vars;
        for (int t = 0; t <= horizon; ++t) {
            count += static_cast<long long>(rows.size()) * nja;
            if (count > opt.var_cap) cap_exceeded("neighboring", count, opt.var_cap);
            std::map<std::pair<int64_t, int>, int> next_rows;
            for (const auto& [sq, row] : rows) {
                const auto [s, q] = sq;
                const bool acc = pr.accepting(q);
                for (int64_t a = 0; a < nja; ++a) {
                    VarKey key;
                    key.agent = i;
                    key.state = s;
                    key.q = q;
                    key.action = a;
                    key.own_action = acts[a][own];
                    key.t = t;
                    const int v = lp.add_var(key, 0.0, acc ? 1.0 : kInf, pr.reward(s, acts[a][own]));
                    vars[i].push_back(v);
                    lp.add(row, v, 1.0);
                    if (t == horizon) {
                        if (acc) final_vars.push_back(v);
                        continue;
                    }
                    pr.successors(s, acts[a], succ);
                    for (const auto& [s2, prob] : succ) {
                        const std::pair<int64_t, int> k2{s2, pr.next_q(q, s2)};
                        auto it = next_rows.find(k2);
                        if (it == next_rows.end()) it = next_rows.emplace(k2, lp.add_row(Sense::eq, 0.0, i)).first;
                        lp.add(it->second, v, -prob);
                    }
                }
            }
            rows.swap(next_rows);
        }
        if (p.products[i]) {
            check_lambda(p.lambda[i]);
            const int row = lp.add_row(Sense::ge, p.lambda[i], i);
            lp.threshold_rows.push_back(row);
            for (int v : final_vars) lp.add(row, v, 1.0);
        }
    }

    // pairwise consistency over N(i,j)
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const auto shared = model.graph.common(i, j);
            if (shared.empty()) continue;
            std::map<std::tuple<int, int64_t, int64_t>, int> rows;
            auto project = [&](int agent, int v) {
                const auto& pr = *prods[agent];
                const auto& key = lp.keys[v];
                const auto local = pr.decode(key.state);
                const auto act = pr.decode_action(key.action);
                int64_t sc = 0, ac = 0, sr = 1, ar = 1;
                for (int k : shared) {
                    const int pos = pr.member_pos(k);
                    sc += sr * local[pos];
                    ac += ar * act[pos];
                    sr *= model.agents[k].num_states();
                    ar *= model.agents[k].num_actions();
                }
                return std::make_tuple(key.t, sc, ac);
            };
            for (int side = 0; side < 2; ++side) {
                const int agent = side == 0 ? i : j;
                for (int v : vars[agent]) {
                    auto k = project(agent, v);
                    auto it = rows.find(k);
                    if (it == rows.end()) it = rows.emplace(k, lp.add_row(Sense::eq, 0.0, -1, true)).first;
                    lp.add(it->second, v, side == 0 ? 1.0 : -1.0);
                }
            }
        }
    }
    return lp;
}

OccupancyLp build_local_lp(const SynthesisProblem& p, const LpOptions& opt) {
    const FactoredMdp& model = *p.model;
    if (model.form != KernelForm::local && !opt.coupled_kernels)
        throw Error(ErrorCode::kernel_form, "local formulation requires local-form kernels P_i(s_i,a_i)");
    const int m = model.size();
    const int horizon = p.horizon;
    OccupancyLp lp;
    lp.formulation = "local";

    std::vector<std::vector<std::vector<int>>> reach(m);
    for (int i = 0; i < m; ++i) reach[i] = local_reach(model.agents[i], horizon);
    // o_k(s,a,t) columns, indexed [k][t][s * |A| + a]; -1 when unreachable
    std::vector<std::vector<std::vector<int>>> ovar(m);
    // flow row per (agent, t, state)
    std::vector<std::vector<std::vector<int>>> srow(m);
    long long count = 0;
    for (int i = 0; i < m; ++i) {
        const auto& ag = model.agents[i];
        const int na = ag.num_actions();
        ovar[i].assign(horizon + 1, std::vector<int>(static_cast<size_t>(ag.num_states()) * na, -1));
        srow[i].assign(horizon + 1, std::vector<int>(ag.num_states(), -1));
        for (int t = 0; t <= horizon; ++t) {
            count += static_cast<long long>(reach[i][t].size()) * na;
            if (count > opt.var_cap) cap_exceeded("local", count, opt.var_cap);
            for (int s : reach[i][t]) {
                const int row = lp.add_row(Sense::eq, t == 0 && s == ag.initial ? 1.0 : 0.0, i);
                srow[i][t][s] = row;
                for (int a = 0; a < na; ++a) {
                    VarKey key;
                    key.agent = i;
                    key.state = s;
                    key.action = a;
                    key.own_action = a;
                    key.t = t;
                    const int v = lp.add_var(key, 0.0, kInf, ag.reward[s * na + a]);
                    ovar[i][t][s * na + a] = v;
                    lp.add(row, v, 1.0);
                }
            }
        }
    }
    for (int i = 0; i < m; ++i) {
        const auto& ag = model.agents[i];
        const int na = ag.num_actions();
        for (int t = 0; t < horizon; ++t) {
            const auto& next_rows = srow[i][t + 1];
            if (ag.depends_on.empty()) {
                for (int s : reach[i][t])
                    for (int a = 0; a < na; ++a)
                        for (const auto& tr : ag.kernel[static_cast<size_t>(s) * na + a])
                            if (tr.prob > 0) lp.add(next_rows[tr.next], ovar[i][t][s * na + a], -tr.prob);
            } else {
                // w_i(s, c, a, t): joint mass of own state, dependency classes and
                // own action; its marginals are pinned to the occupancies
                const auto cls = kernel_classes(model, i);
                const auto& deps = ag.depends_on;
                std::vector<std::vector<int>> reps(deps.size());
                long long combos = 1;
                for (size_t d = 0; d < deps.size(); ++d) {
                    for (int s : reach[deps[d]][t]) reps[d].push_back(cls[d][s]);
                    std::sort(reps[d].begin(), reps[d].end());
                    reps[d].erase(std::unique(reps[d].begin(), reps[d].end()), reps[d].end());
                    combos *= static_cast<long long>(reps[d].size());
                }
                count += combos * static_cast<long long>(reach[i][t].size()) * na;
                if (count > opt.var_cap) cap_exceeded("local", count, opt.var_cap);
                std::vector<std::map<int, int>> dep_rows(deps.size());
                for (size_t d = 0; d < deps.size(); ++d) {
                    const int j = deps[d];
                    const int naj = model.agents[j].num_actions();
                    for (int s : reach[j][t]) {
                        auto it = dep_rows[d].find(cls[d][s]);
                        if (it == dep_rows[d].end())
                            it = dep_rows[d].emplace(cls[d][s], lp.add_row(Sense::eq, 0.0, -1, true)).first;
                        for (int a = 0; a < naj; ++a) lp.add(it->second, ovar[j][t][s * naj + a], -1.0);
                    }
                }
                std::vector<size_t> idx(deps.size());
                for (int s : reach[i][t]) {
                    for (int a = 0; a < na; ++a) {
                        const int own_row = lp.add_row(Sense::eq, 0.0, i);
                        lp.add(own_row, ovar[i][t][s * na + a], 1.0);
                        std::fill(idx.begin(), idx.end(), 0);
                        for (long long c = 0; c < combos; ++c) {
                            int ctx = s, stride = ag.num_states(), code = 0, cstride = 1;
                            for (size_t d = 0; d < deps.size(); ++d) {
                                ctx += stride * reps[d][idx[d]];
                                stride *= model.agents[deps[d]].num_states();
                                code += cstride * reps[d][idx[d]];
                                cstride *= model.agents[deps[d]].num_states();
                            }
                            VarKey key;
                            key.agent = i;
                            key.kind = VarKind::aux;
                            key.state = s;
                            key.q = code;
                            key.action = a;
                            key.own_action = a;
                            key.t = t;
                            const int w = lp.add_var(key, 0.0, kInf, 0.0);
                            lp.add(own_row, w, -1.0);
                            for (size_t d = 0; d < deps.size(); ++d) lp.add(dep_rows[d].at(reps[d][idx[d]]), w, 1.0);
                            for (const auto& tr : ag.kernel[static_cast<size_t>(ctx) * na + a])
                                if (tr.prob > 0) lp.add(next_rows[tr.next], w, -tr.prob);
                            for (size_t d = 0; d < deps.size(); ++d) {
                                if (++idx[d] < reps[d].size()) break;
                                idx[d] = 0;
                            }
                        }
                    }
                }
            }
        }
    }

    // neighborhood variables for constrained agents: m_i(s,t) over state
    // classes, d_i(q,t), x_i(q,sigma,t)
    struct Nb {
        std::vector<std::vector<int>> classes;    // per member position
        std::vector<std::vector<int64_t>> codes;  // per t, codes of class representatives
        std::vector<std::vector<int>> mvar;       // per t, parallel to codes
    };
    std::vector<Nb> nb(m);
    for (int i = 0; i < m; ++i) {
        if (!p.products[i]) continue;
        check_lambda(p.lambda[i]);
        const auto& pr = *p.products[i];
        const auto& mem = pr.members();
        nb[i].classes = local_state_classes(pr);
        nb[i].codes.resize(horizon + 1);
        nb[i].mvar.resize(horizon + 1);
        for (int t = 0; t <= horizon; ++t) {
            std::vector<std::vector<int>> reps(mem.size());
            long long n = 1;
            for (size_t k = 0; k < mem.size(); ++k) {
                for (int s : reach[mem[k]][t]) reps[k].push_back(nb[i].classes[k][s]);
                std::sort(reps[k].begin(), reps[k].end());
                reps[k].erase(std::unique(reps[k].begin(), reps[k].end()), reps[k].end());
                n *= static_cast<long long>(reps[k].size());
                if (count + n > opt.var_cap) cap_exceeded("local", count + n, opt.var_cap);
            }
            count += n;
            std::vector<size_t> idx(mem.size(), 0);
            std::vector<int> local(mem.size());
            for (long long c = 0; c < n; ++c) {
                for (size_t k = 0; k < mem.size(); ++k) local[k] = reps[k][idx[k]];
                const int64_t code = pr.encode(local);
                VarKey key;
                key.agent = i;
                key.kind = VarKind::nbhd_state;
                key.state = code;
                key.t = t;
                nb[i].codes[t].push_back(code);
                nb[i].mvar[t].push_back(lp.add_var(key, 0.0, kInf, 0.0));
                for (size_t k = 0; k < mem.size(); ++k) {
                    if (++idx[k] < reps[k].size()) break;
                    idx[k] = 0;
                }
            }
        }
        // linking rows: class marginal of m_i on member k equals agent k's
        // state occupancy summed over the class
        for (int t = 0; t <= horizon; ++t) {
            for (size_t pos = 0; pos < mem.size(); ++pos) {
                const int k = mem[pos];
                const int na = model.agents[k].num_actions();
                std::map<int, int> rows;
                for (int s : reach[k][t]) {
                    const int rep = nb[i].classes[pos][s];
                    auto it = rows.find(rep);
                    if (it == rows.end()) it = rows.emplace(rep, lp.add_row(Sense::eq, 0.0, k == i ? i : -1, k != i)).first;
                    for (int a = 0; a < na; ++a) lp.add(it->second, ovar[k][t][s * na + a], -1.0);
                }
                for (size_t c = 0; c < nb[i].codes[t].size(); ++c)
                    lp.add(rows.at(pr.component(nb[i].codes[t][c], static_cast<int>(pos))), nb[i].mvar[t][c], 1.0);
            }
        }
        // DFA mass transport
        const Dfa& dfa = pr.dfa();
        std::map<int, int> dvar;  // q -> column at t
        {
            VarKey key;
            key.agent = i;
            key.kind = VarKind::dfa_mass;
            key.q = pr.initial_q();
            key.t = 0;
            const int v = lp.add_var(key, 0.0, dfa.accepting(pr.initial_q()) ? 1.0 : kInf, 0.0);
            dvar[pr.initial_q()] = v;
            const int row = lp.add_row(Sense::eq, 1.0, i);
            lp.add(row, v, 1.0);
        }
        for (int t = 0; t < horizon; ++t) {
            // letters realized at t+1
            std::map<int, int> letter_rows;
            for (size_t c = 0; c < nb[i].codes[t + 1].size(); ++c) {
                const int l = pr.letter(nb[i].codes[t + 1][c]);
                auto it = letter_rows.find(l);
                if (it == letter_rows.end()) it = letter_rows.emplace(l, lp.add_row(Sense::eq, 0.0, i)).first;
                lp.add(it->second, nb[i].mvar[t + 1][c], -1.0);
            }
            std::map<int, int> next_rows;  // q' -> row d(q',t+1) = sum x
            std::map<int, int> next_d;
            for (auto [q, dv] : dvar) {
                const int row_d = lp.add_row(Sense::eq, 0.0, i);
                lp.add(row_d, dv, -1.0);
                for (auto [l, lrow] : letter_rows) {
                    VarKey key;
                    key.agent = i;
                    key.kind = VarKind::transport;
                    key.q = q;
                    key.state = l;
                    key.t = t;
                    const int xv = lp.add_var(key, 0.0, kInf, 0.0);
                    lp.add(row_d, xv, 1.0);
                    lp.add(lrow, xv, 1.0);
                    const int q2 = dfa.step(q, l);
                    auto it = next_rows.find(q2);
                    if (it == next_rows.end()) {
                        VarKey dk;
                        dk.agent = i;
                        dk.kind = VarKind::dfa_mass;
                        dk.q = q2;
                        dk.t = t + 1;
                        const int v = lp.add_var(dk, 0.0, dfa.accepting(q2) ? 1.0 : kInf, 0.0);
                        next_d[q2] = v;
                        it = next_rows.emplace(q2, lp.add_row(Sense::eq, 0.0, i)).first;
                        lp.add(it->second, v, 1.0);
                    }
                    lp.add(it->second, xv, -1.0);
                }
            }
            dvar.swap(next_d);
        }
        const int row = lp.add_row(Sense::ge, p.lambda[i], i);
        lp.threshold_rows.push_back(row);
        for (auto [q, v] : dvar)
            if (dfa.accepting(q)) lp.add(row, v, 1.0);
    }

    // pairwise consistency of neighborhood occupancies over N(i,j); shared
    // sets of size one are already pinned by the linking rows
    for (int i = 0; i < m; ++i) {
        if (!p.products[i]) continue;
        for (int j = i + 1; j < m; ++j) {
            if (!p.products[j]) continue;
            const auto shared = model.graph.common(i, j);
            if (shared.size() < 2) continue;
            const auto& pi = *p.products[i];
            const auto& pj = *p.products[j];
            std::vector<std::vector<int>> joint_cls;
            for (int k : shared)
                joint_cls.push_back(join_classes(nb[i].classes[pi.member_pos(k)], nb[j].classes[pj.member_pos(k)]));
            for (int t = 0; t <= horizon; ++t) {
                std::map<int64_t, int> rows;
                for (int side = 0; side < 2; ++side) {
                    const int agent = side == 0 ? i : j;
                    const auto& pr = *p.products[agent];
                    for (size_t c = 0; c < nb[agent].codes[t].size(); ++c) {
                        int64_t key = 0, r = 1;
                        for (size_t sk = 0; sk < shared.size(); ++sk) {
                            const int k = shared[sk];
                            key += r * joint_cls[sk][pr.component(nb[agent].codes[t][c], pr.member_pos(k))];
                            r *= model.agents[k].num_states();
                        }
                        auto it = rows.find(key);
                        if (it == rows.end()) it = rows.emplace(key, lp.add_row(Sense::eq, 0.0, -1, true)).first;
                        lp.add(it->second, nb[agent].mvar[t][c], side == 0 ? 1.0 : -1.0);
                    }
                }
            }
        }
    }
    return lp;
}

} // namespace gtlsynth
