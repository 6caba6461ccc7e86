#include "gtlsynth/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

bool AgentModel::has_label(int s, const std::string& l) const {
    if (s < 0 || s >= static_cast<int>(labels.size())) return false;
    const auto& v = labels[s];
    return std::find(v.begin(), v.end(), l) != v.end();
}

std::optional<double> AgentModel::attr(int s, const std::string& key) const {
    if (s < 0 || s >= static_cast<int>(attrs.size())) return std::nullopt;
    auto it = attrs[s].find(key);
    if (it == attrs[s].end()) return std::nullopt;
    return it->second;
}

int AgentModel::state_index(const std::string& n) const {
    auto it = std::find(states.begin(), states.end(), n);
    return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

int AgentModel::action_index(const std::string& n) const {
    auto it = std::find(actions.begin(), actions.end(), n);
    return it == actions.end() ? -1 : static_cast<int>(it - actions.begin());
}

int FactoredMdp::context(int i, const int* joint) const {
    const auto& ag = agents[i];
    int ctx = 0;
    int radix = 1;
    for (int k : ag.depends_on) {
        ctx += radix * joint[k];
        radix *= agents[k].num_states();
    }
    return joint[i] + ag.num_states() * ctx;
}

int FactoredMdp::context_count(int i) const {
    const auto& ag = agents[i];
    int n = ag.num_states();
    for (int k : ag.depends_on) n *= agents[k].num_states();
    return n;
}

double FactoredMdp::edge_value(int e, int s_first, int s_second) const {
    switch (edge_label.kind) {
    case EdgeLabel::Kind::constant:
        return edge_label.value;
    case EdgeLabel::Kind::manhattan: {
        auto [u, v] = graph.edges()[e];
        const auto& a = agents[u].coords[s_first];
        const auto& b = agents[v].coords[s_second];
        double d = 0;
        for (size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
        return d;
    }
    case EdgeLabel::Kind::table: {
        auto it = edge_label.table.find({e, s_first, s_second});
        if (it != edge_label.table.end()) return it->second;
        if (edge_label.has_default) return edge_label.value;
        throw Error(ErrorCode::schema, "edge label table has no entry for edge " + std::to_string(e) + " states (" +
                                           std::to_string(s_first) + "," + std::to_string(s_second) + ")");
    }
    }
    return 0.0;
}

namespace {

std::string where(const AgentModel& ag, int i) { return "agent " + std::to_string(i) + " (" + ag.name + ")"; }

} // namespace

std::vector<ValidationIssue> validate(const FactoredMdp& model) {
    using K = ValidationIssue::Kind;
    std::vector<ValidationIssue> out;
    const int m = model.size();
    if (static_cast<int>(model.agents.size()) != m) {
        out.push_back({K::schema, "graph has " + std::to_string(m) + " agents but model lists " +
                                      std::to_string(model.agents.size())});
        return out;
    }
    for (int i = 0; i < m; ++i) {
        const auto& ag = model.agents[i];
        const int ns = ag.num_states(), na = ag.num_actions();
        if (ns == 0) out.push_back({K::schema, where(ag, i) + ": empty state set"});
        if (na == 0) out.push_back({K::schema, where(ag, i) + ": empty action set"});
        if (ns == 0 || na == 0) continue;
        if (ag.initial < 0 || ag.initial >= ns) out.push_back({K::index, where(ag, i) + ": initial state out of range"});
        if (static_cast<int>(ag.labels.size()) != ns || static_cast<int>(ag.attrs.size()) != ns ||
            static_cast<int>(ag.coords.size()) != ns)
            out.push_back({K::schema, where(ag, i) + ": per-state tables do not match the state count"});
        if (model.form == KernelForm::local && !ag.depends_on.empty())
            out.push_back({K::kernel_form, where(ag, i) + ": local kernel form but kernel depends on neighbors"});
        bool deps_ok = std::is_sorted(ag.depends_on.begin(), ag.depends_on.end());
        for (int k : ag.depends_on) {
            if (k < 0 || k >= m || k == i || !model.graph.adjacent(i, k)) {
                out.push_back({K::index, where(ag, i) + ": kernel depends on agent " + std::to_string(k) +
                                             " outside its neighborhood"});
                deps_ok = false;
            }
        }
        if (!deps_ok) continue;
        const size_t rows = static_cast<size_t>(model.context_count(i)) * na;
        if (ag.kernel.size() != rows) {
            out.push_back({K::schema, where(ag, i) + ": kernel has " + std::to_string(ag.kernel.size()) +
                                          " rows, expected " + std::to_string(rows)});
            continue;
        }
        for (size_t r = 0; r < rows; ++r) {
            const int ctx = static_cast<int>(r / na), a = static_cast<int>(r % na);
            const std::string cell = where(ag, i) + " kernel context " + std::to_string(ctx) + " (state " +
                                     ag.states[ctx % ns] + ") action " + ag.actions[a];
            double sum = 0;
            for (const auto& tr : ag.kernel[r]) {
                if (tr.next < 0 || tr.next >= ns)
                    out.push_back({K::index, cell + ": next state " + std::to_string(tr.next) + " unknown"});
                if (tr.prob < 0 || !std::isfinite(tr.prob))
                    out.push_back({K::stochasticity, cell + ": invalid probability " + std::to_string(tr.prob)});
                sum += tr.prob;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                out.push_back({K::stochasticity, cell + ": row sums to " + std::to_string(sum)});
        }
        if (static_cast<int>(ag.reward.size()) != ns * na) {
            out.push_back({K::schema, where(ag, i) + ": reward table size mismatch"});
        } else {
            for (int s = 0; s < ns; ++s)
                for (int a = 0; a < na; ++a)
                    if (!(ag.reward[s * na + a] >= 0))
                        out.push_back({K::reward, where(ag, i) + ": reward R_i(" + ag.states[s] + "," + ag.actions[a] +
                                                      ") is negative; rewards must satisfy R_i >= 0"});
        }
    }
    if (model.edge_label.kind == EdgeLabel::Kind::manhattan) {
        for (auto [u, v] : model.graph.edges()) {
            const auto& a = model.agents[u];
            const auto& b = model.agents[v];
            for (int s = 0; s < a.num_states() && s < static_cast<int>(a.coords.size()); ++s)
                for (int t = 0; t < b.num_states() && t < static_cast<int>(b.coords.size()); ++t)
                    if (a.coords[s].empty() || a.coords[s].size() != b.coords[t].size()) {
                        out.push_back({K::schema, "manhattan edge label needs equal-length coordinates on edge {" +
                                                      std::to_string(u) + "," + std::to_string(v) + "}"});
                        s = a.num_states();
                        break;
                    }
        }
    }
    return out;
}

} // namespace gtlsynth
