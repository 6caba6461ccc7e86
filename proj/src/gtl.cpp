#include "gtlsynth/gtl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

bool NodePred::holds(const AgentModel& ag, int s) const {
    if (kind == Kind::label) return ag.has_label(s, name);
    auto v = ag.attr(s, name);
    if (!v) return false;
    switch (kind) {
    case Kind::ge:
        return *v >= c;
    case Kind::le:
        return *v <= c;
    case Kind::eq:
        return std::abs(*v - c) < 1e-12;
    default:
        return false;
    }
}

bool EdgeProp::holds(double y) const {
    switch (kind) {
    case Kind::le:
        return y <= c;
    case Kind::ge:
        return y >= c;
    case Kind::eq:
        return std::abs(y - c) < 1e-12;
    case Kind::top:
        return true;
    case Kind::bottom:
        return false;
    }
    return false;
}

namespace gtl {

namespace {
Formula make(GtlNode n) { return std::make_shared<const GtlNode>(std::move(n)); }

void check_window(int a, int b) {
    if (a < 0 || b < a) throw Error(ErrorCode::argument, "malformed interval [" + std::to_string(a) + "," + std::to_string(b) + "]");
}
} // namespace

Formula top() {
    GtlNode n;
    n.op = Op::top;
    return make(std::move(n));
}
Formula bottom() {
    GtlNode n;
    n.op = Op::bottom;
    return make(std::move(n));
}
Formula pred(NodePred p) {
    GtlNode n;
    n.op = Op::pred;
    n.pred = std::move(p);
    return make(std::move(n));
}
Formula neg(Formula f) {
    GtlNode n;
    n.op = Op::neg;
    n.kids = {std::move(f)};
    return make(std::move(n));
}
Formula conj(Formula l, Formula r) {
    GtlNode n;
    n.op = Op::conj;
    n.kids = {std::move(l), std::move(r)};
    return make(std::move(n));
}
Formula disj(Formula l, Formula r) {
    GtlNode n;
    n.op = Op::disj;
    n.kids = {std::move(l), std::move(r)};
    return make(std::move(n));
}
Formula next(Formula f) {
    GtlNode n;
    n.op = Op::next;
    n.kids = {std::move(f)};
    return make(std::move(n));
}
Formula eventually(int a, int b, Formula f, bool le_form) {
    check_window(a, b);
    GtlNode n;
    n.op = Op::eventually;
    n.a = a;
    n.b = b;
    n.le_form = le_form;
    n.kids = {std::move(f)};
    return make(std::move(n));
}
Formula always(int a, int b, Formula f, bool le_form) {
    check_window(a, b);
    GtlNode n;
    n.op = Op::always;
    n.a = a;
    n.b = b;
    n.le_form = le_form;
    n.kids = {std::move(f)};
    return make(std::move(n));
}
Formula exists(int count, std::vector<EdgeProp> chain, Formula f) {
    if (count < 1) throw Error(ErrorCode::argument, "exists threshold must be >= 1");
    if (chain.empty()) chain.push_back({EdgeProp::Kind::top, 0});
    GtlNode n;
    n.op = Op::exists;
    n.count = count;
    n.chain = std::move(chain);
    n.kids = {std::move(f)};
    return make(std::move(n));
}

} // namespace gtl

// ---- lexer / parser ----

namespace {

enum class Tok { ident, number, lparen, rparen, lbrack, rbrack, lbrace, rbrace, comma, bang, amp, bar, arrow, le, ge, eq, caret, end };

struct Token {
    Tok kind;
    std::string text;
    int col;  // 1-based
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        const int col = static_cast<int>(i) + 1;
        if (static_cast<unsigned char>(c) > 127) throw ParseError(col, "non-ASCII character");
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Tok::ident, s.substr(i, j - i), col});
            i = j;
            continue;
        }
        const bool neg_num = c == '-' && i + 1 < s.size() && (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '.');
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || neg_num) {
            size_t j = i + 1;
            while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.' || s[j] == 'e' ||
                                    s[j] == 'E' || ((s[j] == '-' || s[j] == '+') && (s[j - 1] == 'e' || s[j - 1] == 'E'))))
                ++j;
            out.push_back({Tok::number, s.substr(i, j - i), col});
            i = j;
            continue;
        }
        auto two = s.substr(i, 2);
        if (two == "->") { out.push_back({Tok::arrow, two, col}); i += 2; continue; }
        if (two == "<=") { out.push_back({Tok::le, two, col}); i += 2; continue; }
        if (two == ">=") { out.push_back({Tok::ge, two, col}); i += 2; continue; }
        if (two == "==") { out.push_back({Tok::eq, two, col}); i += 2; continue; }
        Tok k;
        switch (c) {
        case '(': k = Tok::lparen; break;
        case ')': k = Tok::rparen; break;
        case '[': k = Tok::lbrack; break;
        case ']': k = Tok::rbrack; break;
        case '{': k = Tok::lbrace; break;
        case '}': k = Tok::rbrace; break;
        case ',': k = Tok::comma; break;
        case '!': k = Tok::bang; break;
        case '&': k = Tok::amp; break;
        case '|': k = Tok::bar; break;
        case '=': k = Tok::eq; break;
        case '^': k = Tok::caret; break;
        default:
            throw ParseError(col, std::string("unexpected character '") + c + "'");
        }
        out.push_back({k, std::string(1, c), col});
        ++i;
    }
    out.push_back({Tok::end, "", static_cast<int>(s.size()) + 1});
    return out;
}

bool is_keyword(const std::string& s) {
    return s == "G" || s == "F" || s == "X" || s == "E" || s == "O" || s == "true" || s == "false" || s == "label";
}

class Parser {
public:
    explicit Parser(const std::string& s) : toks_(lex(s)) {}

    Formula run() {
        auto f = implication();
        if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
        return f;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(peek().col, peek().kind == Tok::end ? msg + " (end of input)" : msg);
    }
    void expect(Tok k, const char* what) {
        if (peek().kind != k) fail(std::string("expected ") + what);
        ++pos_;
    }
    bool is_ident(const char* s) const { return peek().kind == Tok::ident && peek().text == s; }

    int integer() {
        if (peek().kind != Tok::number) fail("expected an integer");
        const auto& t = take();
        int v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size()) throw ParseError(t.col, "expected an integer");
        return v;
    }

    double number() {
        if (peek().kind != Tok::number) fail("expected a number");
        const auto& t = take();
        try {
            size_t used = 0;
            double v = std::stod(t.text, &used);
            if (used != t.text.size() || !std::isfinite(v)) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ParseError(t.col, "malformed number '" + t.text + "'");
        }
    }

    Formula implication() {
        auto l = disjunction();
        if (peek().kind == Tok::arrow) {
            take();
            auto r = implication();
            return gtl::disj(gtl::neg(l), r);
        }
        return l;
    }

    Formula disjunction() {
        auto l = conjunction();
        while (peek().kind == Tok::bar) {
            take();
            l = gtl::disj(l, conjunction());
        }
        return l;
    }

    Formula conjunction() {
        auto l = unary();
        while (peek().kind == Tok::amp) {
            take();
            l = gtl::conj(l, unary());
        }
        return l;
    }

    Formula unary() {
        if (peek().kind == Tok::bang) {
            take();
            return gtl::neg(unary());
        }
        if (is_ident("X")) {
            take();
            return gtl::next(unary());
        }
        if (is_ident("G") || is_ident("F")) {
            const bool always = take().text == "G";
            int a = 0, b = 0;
            bool le_form = false;
            if (peek().kind == Tok::lbrack) {
                const int col = take().col;
                a = integer();
                expect(Tok::comma, "','");
                b = integer();
                expect(Tok::rbrack, "']'");
                if (a > b) throw ParseError(col, "malformed interval: lower bound exceeds upper bound");
            } else if (peek().kind == Tok::le) {
                take();
                b = integer();
                if (b < 0) fail("negative bound");
                le_form = true;
            }
            auto kid = unary();
            return always ? gtl::always(a, b, kid, le_form) : gtl::eventually(a, b, kid, le_form);
        }
        if (is_ident("E")) {
            take();
            expect(Tok::caret, "'^'");
            const int col = peek().col;
            const int n = integer();
            if (n < 1) throw ParseError(col, "exists threshold must be >= 1");
            std::vector<EdgeProp> chain;
            while (is_ident("O")) {
                take();
                expect(Tok::lbrace, "'{'");
                chain.push_back(edge_prop());
                expect(Tok::rbrace, "'}'");
            }
            return gtl::exists(n, std::move(chain), unary());
        }
        return primary();
    }

    EdgeProp edge_prop() {
        if (is_ident("true")) {
            take();
            return {EdgeProp::Kind::top, 0};
        }
        if (is_ident("false")) {
            take();
            return {EdgeProp::Kind::bottom, 0};
        }
        if (!is_ident("y")) fail("expected an edge proposition over y");
        take();
        EdgeProp p;
        switch (peek().kind) {
        case Tok::le: p.kind = EdgeProp::Kind::le; break;
        case Tok::ge: p.kind = EdgeProp::Kind::ge; break;
        case Tok::eq: p.kind = EdgeProp::Kind::eq; break;
        default: fail("expected <=, >= or ==");
        }
        take();
        p.c = number();
        return p;
    }

    Formula primary() {
        if (peek().kind == Tok::lparen) {
            take();
            auto f = implication();
            expect(Tok::rparen, "')'");
            return f;
        }
        if (peek().kind != Tok::ident) fail("expected a formula");
        if (is_ident("true")) {
            take();
            return gtl::top();
        }
        if (is_ident("false")) {
            take();
            return gtl::bottom();
        }
        if (is_ident("label")) {
            take();
            expect(Tok::eq, "'=='");
            if (peek().kind != Tok::ident) fail("expected a label name");
            return gtl::pred({NodePred::Kind::label, take().text, 0});
        }
        if (is_keyword(peek().text)) fail("unexpected keyword '" + peek().text + "'");
        std::string name = take().text;
        NodePred p{NodePred::Kind::label, name, 0};
        switch (peek().kind) {
        case Tok::ge: p.kind = NodePred::Kind::ge; break;
        case Tok::le: p.kind = NodePred::Kind::le; break;
        case Tok::eq: p.kind = NodePred::Kind::eq; break;
        default: return gtl::pred(p);
        }
        take();
        p.c = number();
        return gtl::pred(p);
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string wrap(const Formula& f) {
    auto s = to_string(f);
    return (f->op == Op::conj || f->op == Op::disj) ? "(" + s + ")" : s;
}

} // namespace

Formula parse_gtl(const std::string& text) { return Parser(text).run(); }

std::string to_string(const NodePred& p) {
    switch (p.kind) {
    case NodePred::Kind::label:
        return is_keyword(p.name) || p.name == "y" ? "label == " + p.name : p.name;
    case NodePred::Kind::ge:
        return p.name + " >= " + fmt(p.c);
    case NodePred::Kind::le:
        return p.name + " <= " + fmt(p.c);
    case NodePred::Kind::eq:
        return p.name + " == " + fmt(p.c);
    }
    return {};
}

std::string to_string(const EdgeProp& p) {
    switch (p.kind) {
    case EdgeProp::Kind::le: return "y <= " + fmt(p.c);
    case EdgeProp::Kind::ge: return "y >= " + fmt(p.c);
    case EdgeProp::Kind::eq: return "y == " + fmt(p.c);
    case EdgeProp::Kind::top: return "true";
    case EdgeProp::Kind::bottom: return "false";
    }
    return {};
}

std::string to_string(const Formula& f) {
    switch (f->op) {
    case Op::top: return "true";
    case Op::bottom: return "false";
    case Op::pred: {
        auto s = to_string(f->pred);
        return f->pred.kind == NodePred::Kind::label && s.find(' ') == std::string::npos ? s : "(" + s + ")";
    }
    case Op::neg: return "!" + wrap(f->kids[0]);
    case Op::conj: return wrap(f->kids[0]) + " & " + wrap(f->kids[1]);
    case Op::disj: return wrap(f->kids[0]) + " | " + wrap(f->kids[1]);
    case Op::next: return "X " + wrap(f->kids[0]);
    case Op::eventually:
    case Op::always: {
        std::string s = f->op == Op::always ? "G" : "F";
        s += f->le_form ? "<=" + std::to_string(f->b) : "[" + std::to_string(f->a) + "," + std::to_string(f->b) + "]";
        return s + " " + wrap(f->kids[0]);
    }
    case Op::exists: {
        std::string s = "E^" + std::to_string(f->count);
        for (const auto& p : f->chain) s += " O{" + to_string(p) + "}";
        return s + " " + wrap(f->kids[0]);
    }
    }
    return {};
}

bool equal(const Formula& x, const Formula& y) {
    if (x->op != y->op || x->kids.size() != y->kids.size()) return false;
    switch (x->op) {
    case Op::pred:
        if (!(x->pred == y->pred)) return false;
        break;
    case Op::eventually:
    case Op::always:
        if (x->a != y->a || x->b != y->b || x->le_form != y->le_form) return false;
        break;
    case Op::exists:
        if (x->count != y->count || x->chain != y->chain) return false;
        break;
    default:
        break;
    }
    for (size_t k = 0; k < x->kids.size(); ++k)
        if (!equal(x->kids[k], y->kids[k])) return false;
    return true;
}

int horizon(const Formula& f) {
    switch (f->op) {
    case Op::top:
    case Op::bottom:
    case Op::pred:
        return 0;
    case Op::neg:
    case Op::exists:
        return horizon(f->kids[0]);
    case Op::conj:
    case Op::disj:
        return std::max(horizon(f->kids[0]), horizon(f->kids[1]));
    case Op::next:
        return 1 + horizon(f->kids[0]);
    case Op::eventually:
    case Op::always:
        return f->b + horizon(f->kids[0]);
    }
    return 0;
}

std::set<int> neighbor_reach(const FactoredMdp& model, const GraphTrajectory& g, const std::set<int>& from, int t,
                             const std::vector<EdgeProp>& chain) {
    if (t < 0 || t > g.horizon)
        throw Error(ErrorCode::horizon, "time index " + std::to_string(t) + " outside trajectory 0.." + std::to_string(g.horizon));
    std::set<int> cur = from;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        std::set<int> nxt;
        for (int v : cur)
            for (auto [e, o] : model.graph.incident(v))
                if (it->holds(g.y[t][e])) nxt.insert(o);
        cur = std::move(nxt);
    }
    return cur;
}

namespace {

bool eval(const FactoredMdp& m, const GraphTrajectory& g, int v, int t, const GtlNode& f, int& max_read) {
    switch (f.op) {
    case Op::top: return true;
    case Op::bottom: return false;
    case Op::pred:
        max_read = std::max(max_read, t);
        return f.pred.holds(m.agents[v], g.states[t][v]);
    case Op::neg: return !eval(m, g, v, t, *f.kids[0], max_read);
    case Op::conj: {
        // evaluate both sides so max_read reflects the full formula
        bool l = eval(m, g, v, t, *f.kids[0], max_read);
        bool r = eval(m, g, v, t, *f.kids[1], max_read);
        return l && r;
    }
    case Op::disj: {
        bool l = eval(m, g, v, t, *f.kids[0], max_read);
        bool r = eval(m, g, v, t, *f.kids[1], max_read);
        return l || r;
    }
    case Op::next: return eval(m, g, v, t + 1, *f.kids[0], max_read);
    case Op::eventually: {
        bool any = false;
        for (int k = f.a; k <= f.b; ++k) any = eval(m, g, v, t + k, *f.kids[0], max_read) || any;
        return any;
    }
    case Op::always: {
        bool all = true;
        for (int k = f.a; k <= f.b; ++k) all = eval(m, g, v, t + k, *f.kids[0], max_read) && all;
        return all;
    }
    case Op::exists: {
        max_read = std::max(max_read, t);
        int hits = 0;
        for (int u : neighbor_reach(m, g, {v}, t, f.chain))
            if (eval(m, g, u, t, *f.kids[0], max_read)) ++hits;
        return hits >= f.count;
    }
    }
    return false;
}

} // namespace

bool evaluate(const FactoredMdp& model, const GraphTrajectory& g, int v, int t, const Formula& f, int* max_read) {
    if (v < 0 || v >= model.size()) throw Error(ErrorCode::index, "node " + std::to_string(v) + " out of range");
    if (t < 0 || t + horizon(f) > g.horizon)
        throw Error(ErrorCode::horizon, "trajectory of horizon " + std::to_string(g.horizon) + " too short for formula horizon " +
                                            std::to_string(horizon(f)) + " at t=" + std::to_string(t));
    int mr = t;
    bool r = eval(model, g, v, t, *f, mr);
    if (max_read) *max_read = mr;
    return r;
}

} // namespace gtlsynth
