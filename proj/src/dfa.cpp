#include "gtlsynth/dfa.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

namespace {

bool temporal_free(const Formula& f) {
    switch (f->op) {
    case Op::next:
    case Op::eventually:
    case Op::always:
        return false;
    default:
        for (const auto& k : f->kids)
            if (!temporal_free(k)) return false;
        return true;
    }
}

std::set<int> static_reach(const FactoredMdp& m, const int* joint, const std::set<int>& from,
                           const std::vector<EdgeProp>& chain) {
    std::set<int> cur = from;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        std::set<int> nxt;
        for (int v : cur)
            for (auto [e, o] : m.graph.incident(v)) {
                auto [a, b] = m.graph.edges()[e];
                if (it->holds(m.edge_value(e, joint[a], joint[b]))) nxt.insert(o);
            }
        cur = std::move(nxt);
    }
    return cur;
}

bool eval_static(const FactoredMdp& m, const int* joint, int v, const Formula& f) {
    switch (f->op) {
    case Op::top: return true;
    case Op::bottom: return false;
    case Op::pred: return f->pred.holds(m.agents[v], joint[v]);
    case Op::neg: return !eval_static(m, joint, v, f->kids[0]);
    case Op::conj: return eval_static(m, joint, v, f->kids[0]) && eval_static(m, joint, v, f->kids[1]);
    case Op::disj: return eval_static(m, joint, v, f->kids[0]) || eval_static(m, joint, v, f->kids[1]);
    case Op::exists: {
        int hits = 0;
        for (int u : static_reach(m, joint, {v}, f->chain))
            if (eval_static(m, joint, u, f->kids[0])) ++hits;
        return hits >= f->count;
    }
    default:
        throw Error(ErrorCode::unbounded, "temporal operator inside a neighboring predicate");
    }
}

void collect(const Formula& f, std::vector<GraphPredicate>& out) {
    auto add = [&](GraphPredicate p) {
        for (const auto& q : out)
            if (q.key == p.key) return;
        out.push_back(std::move(p));
    };
    switch (f->op) {
    case Op::pred: {
        GraphPredicate p;
        p.node = f->pred;
        p.key = to_string(f->pred);
        add(std::move(p));
        return;
    }
    case Op::exists: {
        if (!temporal_free(f->kids[0]))
            throw Error(ErrorCode::unbounded, "temporal operator under E^N is outside the supported fragment: " + to_string(f));
        GraphPredicate p;
        p.is_exists = true;
        p.count = f->count;
        p.chain = f->chain;
        p.sub = f->kids[0];
        p.key = to_string(f);
        add(std::move(p));
        return;
    }
    default:
        for (const auto& k : f->kids) collect(k, out);
    }
}

// Every node touched while following chains from `from` must lie in `allowed`.
void check_reach(const Formula& f, const std::set<int>& from, const std::set<int>& allowed, const AgentGraph& g,
                 const Formula& whole) {
    for (const auto& k : f->kids) check_reach(k, from, allowed, g, whole);
    if (f->op != Op::exists) return;
    std::set<int> cur = from;
    for (size_t step = 0; step < f->chain.size(); ++step) {
        std::set<int> nxt;
        for (int v : cur)
            for (auto [e, o] : g.incident(v)) nxt.insert(o);
        for (int v : nxt)
            if (!allowed.count(v))
                throw Error(ErrorCode::escape, "neighboring chain in '" + to_string(f) + "' of '" + to_string(whole) +
                                                   "' reaches agent " + std::to_string(v) + " outside the owner's neighborhood");
        cur = std::move(nxt);
    }
    check_reach(f->kids[0], cur, allowed, g, whole);
}

} // namespace

bool GraphPredicate::eval(const FactoredMdp& model, int owner, const int* joint) const {
    if (!is_exists) return node.holds(model.agents[owner], joint[owner]);
    int hits = 0;
    for (int u : static_reach(model, joint, {owner}, chain))
        if (eval_static(model, joint, u, sub)) ++hits;
    return hits >= count;
}

std::vector<GraphPredicate> atomic_predicates(const Formula& f) {
    std::vector<GraphPredicate> out;
    collect(f, out);
    return out;
}

std::vector<GraphPredicate> extract_predicates(const Formula& f, int owner, const AgentGraph& graph) {
    const auto& n = graph.closed(owner);
    check_reach(f, {owner}, std::set<int>(n.begin(), n.end()), graph, f);
    return atomic_predicates(f);
}

bool Dfa::run(const std::vector<int>& word) const {
    int q = initial;
    for (int l : word) q = step(q, l);
    return accepting(q);
}

int Dfa::letter(const FactoredMdp& model, int owner, const int* joint) const {
    int l = 0;
    for (size_t k = 0; k < preds.size(); ++k)
        if (preds[k].eval(model, owner, joint)) l |= 1 << k;
    return l;
}

// ---- progression ----

namespace {

enum class P { top, bottom, lit, conj, disj, next, ev, al };

struct PNode {
    P op = P::top;
    int lit = -1;
    bool positive = true;
    int a = 0, b = 0;
    std::vector<int> kids;

    bool operator==(const PNode&) const = default;
};

PNode node(P op) {
    PNode n;
    n.op = op;
    return n;
}

struct PHash {
    size_t operator()(const PNode& n) const {
        size_t h = static_cast<size_t>(n.op) * 1000003u;
        auto mix = [&](size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
        mix(static_cast<size_t>(n.lit + 1));
        mix(n.positive);
        mix(static_cast<size_t>(n.a));
        mix(static_cast<size_t>(n.b));
        for (int k : n.kids) mix(static_cast<size_t>(k));
        return h;
    }
};

class Progression {
public:
    explicit Progression(const std::vector<GraphPredicate>& preds) : preds_(preds) {
        top_ = intern(node(P::top));
        bottom_ = intern(node(P::bottom));
    }

    int top() const { return top_; }
    int bottom() const { return bottom_; }

    int from_ast(const Formula& f, bool negate) {
        switch (f->op) {
        case Op::top: return negate ? bottom_ : top_;
        case Op::bottom: return negate ? top_ : bottom_;
        case Op::pred:
        case Op::exists: {
            PNode n = node(P::lit);
            n.lit = pred_index(f);
            n.positive = !negate;
            return intern(std::move(n));
        }
        case Op::neg: return from_ast(f->kids[0], !negate);
        case Op::conj:
        case Op::disj: {
            std::vector<int> k{from_ast(f->kids[0], negate), from_ast(f->kids[1], negate)};
            return (f->op == Op::conj) != negate ? mk_and(std::move(k)) : mk_or(std::move(k));
        }
        case Op::next: return mk_next(from_ast(f->kids[0], negate));
        case Op::eventually:
        case Op::always: {
            int k = from_ast(f->kids[0], negate);
            return (f->op == Op::eventually) != negate ? mk_ev(f->a, f->b, k) : mk_al(f->a, f->b, k);
        }
        }
        return top_;
    }

    int progress(int id, int letter) {
        const PNode n = nodes_[id];
        switch (n.op) {
        case P::top:
        case P::bottom:
            return id;
        case P::lit:
            return (((letter >> n.lit) & 1) != 0) == n.positive ? top_ : bottom_;
        case P::conj:
        case P::disj: {
            std::vector<int> k;
            for (int c : n.kids) k.push_back(progress(c, letter));
            return n.op == P::conj ? mk_and(std::move(k)) : mk_or(std::move(k));
        }
        case P::next:
            return n.kids[0];
        case P::ev:
            if (n.a > 0) return mk_ev(n.a - 1, n.b - 1, n.kids[0]);
            return mk_or({progress(n.kids[0], letter), n.b > 0 ? mk_ev(0, n.b - 1, n.kids[0]) : bottom_});
        case P::al:
            if (n.a > 0) return mk_al(n.a - 1, n.b - 1, n.kids[0]);
            return mk_and({progress(n.kids[0], letter), n.b > 0 ? mk_al(0, n.b - 1, n.kids[0]) : top_});
        }
        return id;
    }

    std::string text(int id) const {
        const PNode& n = nodes_[id];
        auto kid = [&](int k) { return text(nodes_[id].kids[k]); };
        switch (n.op) {
        case P::top: return "true";
        case P::bottom: return "false";
        case P::lit: return (n.positive ? "" : "!") + std::string("p") + std::to_string(n.lit);
        case P::conj:
        case P::disj: {
            std::string s = "(";
            for (size_t k = 0; k < n.kids.size(); ++k) {
                if (k) s += n.op == P::conj ? " & " : " | ";
                s += kid(static_cast<int>(k));
            }
            return s + ")";
        }
        case P::next: return "X " + kid(0);
        case P::ev: return "F[" + std::to_string(n.a) + "," + std::to_string(n.b) + "] " + kid(0);
        case P::al: return "G[" + std::to_string(n.a) + "," + std::to_string(n.b) + "] " + kid(0);
        }
        return {};
    }

private:
    int pred_index(const Formula& f) {
        const std::string key = f->op == Op::pred ? to_string(f->pred) : to_string(f);
        for (size_t k = 0; k < preds_.size(); ++k)
            if (preds_[k].key == key) return static_cast<int>(k);
        throw Error(ErrorCode::argument, "predicate missing from alphabet: " + key);
    }

    int intern(PNode n) {
        auto it = table_.find(n);
        if (it != table_.end()) return it->second;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(n);
        table_.emplace(std::move(n), id);
        return id;
    }

    int mk_next(int k) {
        if (k == top_ || k == bottom_) return k;
        PNode n = node(P::next);
        n.kids = {k};
        return intern(std::move(n));
    }

    int mk_ev(int a, int b, int k) {
        if (k == top_ || k == bottom_ || (a == 0 && b == 0)) return k;
        PNode n = node(P::ev);
        n.a = a;
        n.b = b;
        n.kids = {k};
        return intern(std::move(n));
    }

    int mk_al(int a, int b, int k) {
        if (k == top_ || k == bottom_ || (a == 0 && b == 0)) return k;
        PNode n = node(P::al);
        n.a = a;
        n.b = b;
        n.kids = {k};
        return intern(std::move(n));
    }

    // conj == true builds a conjunction; otherwise a disjunction
    int mk_junction(std::vector<int> in, bool conj) {
        const P self = conj ? P::conj : P::disj;
        const int unit = conj ? top_ : bottom_;
        const int zero = conj ? bottom_ : top_;
        std::vector<int> flat;
        for (int k : in) {
            if (k == zero) return zero;
            if (k == unit) continue;
            if (nodes_[k].op == self)
                flat.insert(flat.end(), nodes_[k].kids.begin(), nodes_[k].kids.end());
            else
                flat.push_back(k);
        }
        // F[0,x] g / G[0,x] g over the same g: keep the dominating window
        std::map<std::pair<int, int>, int> windows;  // (op, g) -> chosen b
        std::vector<int> rest;
        for (int k : flat) {
            const PNode& n = nodes_[k];
            if ((n.op == P::ev || n.op == P::al) && n.a == 0) {
                const bool keep_min = (n.op == P::ev) == conj;
                auto key = std::make_pair(static_cast<int>(n.op), n.kids[0]);
                auto it = windows.find(key);
                if (it == windows.end())
                    windows[key] = n.b;
                else
                    it->second = keep_min ? std::min(it->second, n.b) : std::max(it->second, n.b);
            } else {
                rest.push_back(k);
            }
        }
        // a bare g acts as window 0 for the same g
        for (auto& [key, b] : windows) {
            const bool keep_min = (key.first == static_cast<int>(P::ev)) == conj;
            auto it = std::find(rest.begin(), rest.end(), key.second);
            if (it != rest.end()) {
                if (keep_min) {
                    b = -1;  // the bare g dominates
                } else {
                    rest.erase(it);
                }
            }
        }
        for (auto& [key, b] : windows)
            if (b >= 0)
                rest.push_back(key.first == static_cast<int>(P::ev) ? mk_ev(0, b, key.second) : mk_al(0, b, key.second));
        std::sort(rest.begin(), rest.end());
        rest.erase(std::unique(rest.begin(), rest.end()), rest.end());
        for (int k : rest) {
            const PNode& n = nodes_[k];
            if (n.op != P::lit) continue;
            PNode c = n;
            c.positive = !c.positive;
            auto it = table_.find(c);
            if (it != table_.end() && std::binary_search(rest.begin(), rest.end(), it->second)) return zero;
        }
        if (rest.empty()) return unit;
        if (rest.size() == 1) return rest[0];
        PNode n = node(self);
        n.kids = std::move(rest);
        return intern(std::move(n));
    }

    int mk_and(std::vector<int> k) { return mk_junction(std::move(k), true); }
    int mk_or(std::vector<int> k) { return mk_junction(std::move(k), false); }

    const std::vector<GraphPredicate>& preds_;
    std::vector<PNode> nodes_;
    std::unordered_map<PNode, int, PHash> table_;
    int top_ = -1, bottom_ = -1;
};

} // namespace

Dfa compile_dfa(const Formula& f, int state_cap) {
    Dfa d;
    d.preds = atomic_predicates(f);
    if (d.preds.size() > 16) throw Error(ErrorCode::state_cap, "too many atomic predicates for an explicit alphabet");
    Progression prog(d.preds);
    const int root = prog.from_ast(f, false);
    std::unordered_map<int, int> index;  // formula id -> dfa state
    std::vector<int> order{root};
    index[root] = 0;
    const int nl = d.letters();
    for (size_t q = 0; q < order.size(); ++q) {
        for (int l = 0; l < nl; ++l) {
            const int nxt = prog.progress(order[q], l);
            auto it = index.find(nxt);
            int target;
            if (it == index.end()) {
                target = static_cast<int>(order.size());
                if (target >= state_cap)
                    throw Error(ErrorCode::state_cap, "DFA exceeds the state cap of " + std::to_string(state_cap) + " states");
                index[nxt] = target;
                order.push_back(nxt);
            } else {
                target = it->second;
            }
            d.delta.push_back(target);
        }
    }
    d.num_states = static_cast<int>(order.size());
    d.initial = 0;
    if (auto it = index.find(prog.top()); it != index.end()) d.accept_sink = it->second;
    if (auto it = index.find(prog.bottom()); it != index.end()) d.reject_sink = it->second;
    for (int id : order) d.state_text.push_back(prog.text(id));
    return d;
}

std::string dump_dfa(const Dfa& d) {
    std::ostringstream os;
    os << "predicates " << d.preds.size() << "\n";
    for (size_t k = 0; k < d.preds.size(); ++k) os << "  p" << k << " " << d.preds[k].key << "\n";
    os << "states " << d.num_states << "\n";
    for (int q = 0; q < d.num_states; ++q) {
        os << "  q" << q << (q == d.initial ? " init" : "") << (d.accepting(q) ? " accept" : "")
           << (q == d.reject_sink ? " reject" : "") << " " << d.state_text[q] << "\n";
    }
    os << "transitions\n";
    for (int q = 0; q < d.num_states; ++q)
        for (int l = 0; l < d.letters(); ++l) os << "  q" << q << " " << l << " -> q" << d.step(q, l) << "\n";
    os << "accepting";
    for (int q = 0; q < d.num_states; ++q)
        if (d.accepting(q)) os << " q" << q;
    os << "\n";
    return os.str();
}

} // namespace gtlsynth
