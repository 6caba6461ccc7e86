#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gtlsynth/model.hpp"
#include "gtlsynth/trajectory.hpp"

namespace gtlsynth {

struct NodePred {
    enum class Kind { label, ge, le, eq };
    Kind kind = Kind::label;
    std::string name;  // label name, or attribute name for comparisons
    double c = 0.0;

    bool holds(const AgentModel& ag, int s) const;
    bool operator==(const NodePred&) const = default;
};

struct EdgeProp {
    enum class Kind { le, ge, eq, top, bottom };
    Kind kind = Kind::top;
    double c = 0.0;

    bool holds(double y) const;
    bool operator==(const EdgeProp&) const = default;
};

enum class Op { top, bottom, pred, neg, conj, disj, next, eventually, always, exists };

struct GtlNode;
using Formula = std::shared_ptr<const GtlNode>;

struct GtlNode {
    Op op = Op::top;
    NodePred pred;                // Op::pred
    int a = 0, b = 0;             // eventually / always window, inclusive
    bool le_form = false;         // written as F<=k / G<=k
    int count = 0;                // exists threshold N
    std::vector<EdgeProp> chain;  // exists chain in written order (outermost first)
    std::vector<Formula> kids;
};

namespace gtl {
Formula top();
Formula bottom();
Formula pred(NodePred p);
Formula neg(Formula f);
Formula conj(Formula l, Formula r);
Formula disj(Formula l, Formula r);
Formula next(Formula f);
Formula eventually(int a, int b, Formula f, bool le_form = false);
Formula always(int a, int b, Formula f, bool le_form = false);
Formula exists(int n, std::vector<EdgeProp> chain, Formula f);
} // namespace gtl

Formula parse_gtl(const std::string& text);
std::string to_string(const Formula& f);
std::string to_string(const NodePred& p);
std::string to_string(const EdgeProp& p);
bool equal(const Formula& a, const Formula& b);

int horizon(const Formula& f);

// Applies the chain innermost-first (last written element first).
std::set<int> neighbor_reach(const FactoredMdp& model, const GraphTrajectory& g, const std::set<int>& from, int t,
                             const std::vector<EdgeProp>& chain);

// Semantic monitor. If max_read is non-null it receives the largest time
// index consulted.
bool evaluate(const FactoredMdp& model, const GraphTrajectory& g, int v, int t, const Formula& f,
              int* max_read = nullptr);

} // namespace gtlsynth
