#include "gtlsynth/model_io.hpp"

#include <algorithm>
#include <json.hpp>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::schema, msg); }

const json& field(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) schema(ctx + ": missing field '" + key + "'");
    return j.at(key);
}

std::string str(const json& j, const std::string& ctx) {
    if (!j.is_string()) schema(ctx + ": expected a string");
    return j.get<std::string>();
}

double num(const json& j, const std::string& ctx) {
    if (!j.is_number()) schema(ctx + ": expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& ctx) {
    if (!j.is_number_integer()) schema(ctx + ": expected an integer");
    return j.get<int>();
}

const json& array(const json& j, const std::string& ctx) {
    if (!j.is_array()) schema(ctx + ": expected an array");
    return j;
}

int lookup(const std::vector<std::string>& names, const std::string& n, const std::string& ctx) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end()) schema(ctx + ": unknown name '" + n + "'");
    return static_cast<int>(it - names.begin());
}

} // namespace

FactoredMdp build_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        schema(std::string("malformed document: ") + e.what());
    }
    if (!doc.is_object()) schema("document root must be an object");

    FactoredMdp m;
    const std::string form = doc.contains("kernel_form") ? str(doc["kernel_form"], "kernel_form") : "local";
    if (form == "local")
        m.form = KernelForm::local;
    else if (form == "neighborhood")
        m.form = KernelForm::neighborhood;
    else
        schema("kernel_form must be 'local' or 'neighborhood'");

    const auto& jagents = array(field(doc, "agents", "document"), "agents");
    const int n = static_cast<int>(jagents.size());
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : array(field(doc, "edges", "document"), "edges")) {
        if (!e.is_array() || e.size() != 2) schema("edges: each edge must be a pair of agent indices");
        edges.emplace_back(integer(e[0], "edges"), integer(e[1], "edges"));
    }
    m.graph = AgentGraph(n, edges);

    const auto& jl = field(doc, "edge_label", "document");
    const std::string kind = str(field(jl, "kind", "edge_label"), "edge_label.kind");
    if (kind == "manhattan-distance") {
        m.edge_label.kind = EdgeLabel::Kind::manhattan;
    } else if (kind == "constant") {
        m.edge_label.kind = EdgeLabel::Kind::constant;
        m.edge_label.value = num(field(jl, "value", "edge_label"), "edge_label.value");
    } else if (kind == "table") {
        m.edge_label.kind = EdgeLabel::Kind::table;
        if (jl.contains("default")) {
            m.edge_label.has_default = true;
            m.edge_label.value = num(jl["default"], "edge_label.default");
        }
    } else {
        schema("edge_label.kind must be manhattan-distance, constant or table");
    }

    m.agents.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto& ja = jagents[i];
        const std::string ctx = "agents[" + std::to_string(i) + "]";
        auto& ag = m.agents[i];
        ag.name = str(field(ja, "name", ctx), ctx + ".name");
        for (const auto& js : array(field(ja, "states", ctx), ctx + ".states")) {
            ag.states.push_back(str(field(js, "name", ctx + ".states"), ctx + ".states.name"));
            std::vector<int> c;
            if (js.contains("coords"))
                for (const auto& v : array(js["coords"], ctx + ".coords")) c.push_back(integer(v, ctx + ".coords"));
            ag.coords.push_back(std::move(c));
            std::map<std::string, double> at;
            if (js.contains("attrs")) {
                if (!js["attrs"].is_object()) schema(ctx + ".attrs: expected an object");
                for (const auto& [k, v] : js["attrs"].items()) at[k] = num(v, ctx + ".attrs." + k);
            }
            ag.attrs.push_back(std::move(at));
            std::vector<std::string> lb;
            if (js.contains("labels"))
                for (const auto& v : array(js["labels"], ctx + ".labels")) lb.push_back(str(v, ctx + ".labels"));
            std::sort(lb.begin(), lb.end());
            ag.labels.push_back(std::move(lb));
        }
        for (const auto& v : array(field(ja, "actions", ctx), ctx + ".actions"))
            ag.actions.push_back(str(v, ctx + ".actions"));
        ag.initial = lookup(ag.states, str(field(ja, "initial", ctx), ctx + ".initial"), ctx + ".initial");
        if (ja.contains("depends_on"))
            for (const auto& v : array(ja["depends_on"], ctx + ".depends_on"))
                ag.depends_on.push_back(integer(v, ctx + ".depends_on"));
        if (!std::is_sorted(ag.depends_on.begin(), ag.depends_on.end()))
            schema(ctx + ".depends_on must be sorted");
        for (int k : ag.depends_on)
            if (k < 0 || k >= n) throw Error(ErrorCode::index, ctx + ".depends_on: agent " + std::to_string(k) + " does not exist");
    }

    if (m.edge_label.kind == EdgeLabel::Kind::table) {
        for (const auto& je : array(field(jl, "entries", "edge_label"), "edge_label.entries")) {
            const auto& pr = field(je, "edge", "edge_label.entries");
            if (!pr.is_array() || pr.size() != 2) schema("edge_label.entries.edge must be a pair");
            const int u = integer(pr[0], "edge"), v = integer(pr[1], "edge");
            const int e = m.graph.edge_index(u, v);
            if (e < 0) schema("edge_label.entries: {" + std::to_string(u) + "," + std::to_string(v) + "} is not an edge");
            auto [a, b] = m.graph.edges()[e];
            const auto& sa = m.agents[a].states;
            const auto& sb = m.agents[b].states;
            const auto& ju = field(je, "states", "edge_label.entries");
            if (!ju.is_array() || ju.size() != 2) schema("edge_label.entries.states must be a pair");
            int x = lookup(u == a ? sa : sb, str(ju[0], "states"), "edge_label.entries");
            int y = lookup(u == a ? sb : sa, str(ju[1], "states"), "edge_label.entries");
            if (u != a) std::swap(x, y);
            m.edge_label.table[{e, x, y}] = num(field(je, "value", "edge_label.entries"), "value");
        }
    }

    for (int i = 0; i < n; ++i) {
        const auto& ja = jagents[i];
        const std::string ctx = "agents[" + std::to_string(i) + "]";
        auto& ag = m.agents[i];
        const int ns = ag.num_states(), na = ag.num_actions();
        size_t ctxs = static_cast<size_t>(ns);
        for (int k : ag.depends_on) ctxs *= m.agents[k].num_states();
        ag.kernel.assign(ctxs * na, {});
        for (const auto& jk : array(field(ja, "kernel", ctx), ctx + ".kernel")) {
            const int s = lookup(ag.states, str(field(jk, "state", ctx + ".kernel"), "state"), ctx + ".kernel.state");
            const int a = lookup(ag.actions, str(field(jk, "action", ctx + ".kernel"), "action"), ctx + ".kernel.action");
            const int nx = lookup(ag.states, str(field(jk, "next", ctx + ".kernel"), "next"), ctx + ".kernel.next");
            const double p = num(field(jk, "prob", ctx + ".kernel"), ctx + ".kernel.prob");
            size_t c = 0, radix = 1;
            if (!ag.depends_on.empty()) {
                const auto& jc = array(field(jk, "condition", ctx + ".kernel"), ctx + ".kernel.condition");
                if (jc.size() != ag.depends_on.size()) schema(ctx + ".kernel.condition: length differs from depends_on");
                for (size_t d = 0; d < jc.size(); ++d) {
                    const auto& other = m.agents[ag.depends_on[d]];
                    c += radix * lookup(other.states, str(jc[d], "condition"), ctx + ".kernel.condition");
                    radix *= other.num_states();
                }
            }
            auto& row = ag.kernel[(s + ns * c) * na + a];
            for (const auto& tr : row)
                if (tr.next == nx) schema(ctx + ".kernel: duplicate transition entry");
            row.push_back({nx, p});
        }
        for (auto& row : ag.kernel)
            std::sort(row.begin(), row.end(), [](const Transition& x, const Transition& y) { return x.next < y.next; });
        ag.reward.assign(static_cast<size_t>(ns) * na, 0.0);
        if (ja.contains("reward"))
            for (const auto& jr : array(ja["reward"], ctx + ".reward")) {
                const int s = lookup(ag.states, str(field(jr, "state", ctx + ".reward"), "state"), ctx + ".reward.state");
                const int a = lookup(ag.actions, str(field(jr, "action", ctx + ".reward"), "action"), ctx + ".reward.action");
                ag.reward[s * na + a] = num(field(jr, "value", ctx + ".reward"), ctx + ".reward.value");
            }
    }

    auto issues = validate(m);
    for (const auto& is : issues)
        if (is.kind == ValidationIssue::Kind::stochasticity) throw Error(ErrorCode::stochasticity, is.message);
    if (!issues.empty()) {
        auto code = issues.front().kind == ValidationIssue::Kind::kernel_form ? ErrorCode::kernel_form
                    : issues.front().kind == ValidationIssue::Kind::index     ? ErrorCode::index
                                                                              : ErrorCode::schema;
        throw Error(code, issues.front().message);
    }
    return m;
}

std::string serialize(const FactoredMdp& m) {
    json doc;
    doc["kernel_form"] = m.form == KernelForm::local ? "local" : "neighborhood";
    json edges = json::array();
    for (auto [u, v] : m.graph.edges()) edges.push_back({u, v});
    doc["edges"] = edges;
    json jl;
    switch (m.edge_label.kind) {
    case EdgeLabel::Kind::manhattan:
        jl["kind"] = "manhattan-distance";
        break;
    case EdgeLabel::Kind::constant:
        jl["kind"] = "constant";
        jl["value"] = m.edge_label.value;
        break;
    case EdgeLabel::Kind::table: {
        jl["kind"] = "table";
        if (m.edge_label.has_default) jl["default"] = m.edge_label.value;
        json entries = json::array();
        for (const auto& [key, y] : m.edge_label.table) {
            auto [e, x, z] = key;
            auto [u, v] = m.graph.edges()[e];
            entries.push_back({{"edge", {u, v}},
                               {"states", {m.agents[u].states[x], m.agents[v].states[z]}},
                               {"value", y}});
        }
        jl["entries"] = entries;
        break;
    }
    }
    doc["edge_label"] = jl;

    json agents = json::array();
    for (int i = 0; i < m.size(); ++i) {
        const auto& ag = m.agents[i];
        json ja;
        ja["name"] = ag.name;
        ja["actions"] = ag.actions;
        ja["initial"] = ag.states[ag.initial];
        if (!ag.depends_on.empty()) ja["depends_on"] = ag.depends_on;
        json states = json::array();
        for (int s = 0; s < ag.num_states(); ++s) {
            json js;
            js["name"] = ag.states[s];
            if (!ag.coords[s].empty()) js["coords"] = ag.coords[s];
            if (!ag.attrs[s].empty()) js["attrs"] = ag.attrs[s];
            if (!ag.labels[s].empty()) js["labels"] = ag.labels[s];
            states.push_back(js);
        }
        ja["states"] = states;
        const int ns = ag.num_states(), na = ag.num_actions();
        json kernel = json::array();
        for (size_t r = 0; r < ag.kernel.size(); ++r) {
            const size_t c = r / na;
            const int a = static_cast<int>(r % na);
            const int s = static_cast<int>(c % ns);
            json cond = json::array();
            size_t rest = c / ns;
            for (int k : ag.depends_on) {
                const int nk = m.agents[k].num_states();
                cond.push_back(m.agents[k].states[rest % nk]);
                rest /= nk;
            }
            for (const auto& tr : ag.kernel[r]) {
                json jk{{"state", ag.states[s]}, {"action", ag.actions[a]}, {"next", ag.states[tr.next]}, {"prob", tr.prob}};
                if (!ag.depends_on.empty()) jk["condition"] = cond;
                kernel.push_back(jk);
            }
        }
        ja["kernel"] = kernel;
        json reward = json::array();
        for (int s = 0; s < ns; ++s)
            for (int a = 0; a < na; ++a)
                if (ag.reward[s * na + a] != 0.0)
                    reward.push_back({{"state", ag.states[s]}, {"action", ag.actions[a]}, {"value", ag.reward[s * na + a]}});
        ja["reward"] = reward;
        agents.push_back(ja);
    }
    doc["agents"] = agents;
    return doc.dump(1) + "\n";
}

bool same_model(const FactoredMdp& a, const FactoredMdp& b) {
    if (a.form != b.form || a.size() != b.size() || a.graph.edges() != b.graph.edges()) return false;
    if (a.edge_label.kind != b.edge_label.kind || a.edge_label.value != b.edge_label.value ||
        a.edge_label.has_default != b.edge_label.has_default || a.edge_label.table != b.edge_label.table)
        return false;
    for (int i = 0; i < a.size(); ++i) {
        const auto& x = a.agents[i];
        const auto& y = b.agents[i];
        if (x.name != y.name || x.states != y.states || x.actions != y.actions || x.coords != y.coords ||
            x.attrs != y.attrs || x.labels != y.labels || x.initial != y.initial || x.depends_on != y.depends_on ||
            x.reward != y.reward || x.kernel.size() != y.kernel.size())
            return false;
        for (size_t r = 0; r < x.kernel.size(); ++r) {
            if (x.kernel[r].size() != y.kernel[r].size()) return false;
            for (size_t k = 0; k < x.kernel[r].size(); ++k)
                if (x.kernel[r][k].next != y.kernel[r][k].next || x.kernel[r][k].prob != y.kernel[r][k].prob) return false;
        }
    }
    return true;
}

} // namespace gtlsynth
