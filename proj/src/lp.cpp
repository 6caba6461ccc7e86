#include "gtlsynth/lp.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <sstream>

#include "gtlsynth/error.hpp"

namespace gtlsynth {

int OccupancyLp::add_var(const VarKey& key, double l, double u, double c) {
    keys.push_back(key);
    lb.push_back(l);
    ub.push_back(u);
    obj.push_back(c);
    quad.push_back(0.0);
    return static_cast<int>(keys.size()) - 1;
}

int OccupancyLp::add_row(Sense s, double r, int blk, bool coupled) {
    sense.push_back(s);
    rhs.push_back(r);
    coupling.push_back(coupled ? 1 : 0);
    block.push_back(blk);
    return static_cast<int>(rhs.size()) - 1;
}

void OccupancyLp::add(int row, int var, double v) {
    if (v == 0.0) return;
    row_of.push_back(row);
    col_of.push_back(var);
    val.push_back(v);
}

ResidualReport check_solution(const OccupancyLp& lp, const std::vector<double>& x, double tol) {
    if (static_cast<int>(x.size()) != lp.num_vars())
        throw Error(ErrorCode::argument, "solution length does not match the LP");
    ResidualReport rep;
    std::vector<double> lhs(lp.num_rows(), 0.0);
    for (size_t k = 0; k < lp.val.size(); ++k) lhs[lp.row_of[k]] += lp.val[k] * x[lp.col_of[k]];
    for (int r = 0; r < lp.num_rows(); ++r) {
        double v = 0;
        const double d = lhs[r] - lp.rhs[r];
        switch (lp.sense[r]) {
        case Sense::eq: v = std::abs(d); break;
        case Sense::ge: v = std::max(0.0, -d); break;
        case Sense::le: v = std::max(0.0, d); break;
        }
        rep.max_row_violation = std::max(rep.max_row_violation, v);
        if (v > tol) rep.violated_rows.push_back(r);
        if (lp.coupling[r]) {
            rep.coupling_violation = std::max(rep.coupling_violation, v);
            rep.coupling_norm2 += v * v;
        }
    }
    for (int r : lp.threshold_rows) rep.threshold_slack = std::min(rep.threshold_slack, lhs[r] - lp.rhs[r]);
    for (int j = 0; j < lp.num_vars(); ++j) {
        rep.max_bound_violation = std::max({rep.max_bound_violation, lp.lb[j] - x[j], x[j] - lp.ub[j]});
        rep.objective += lp.obj[j] * x[j] - 0.5 * lp.quad[j] * x[j] * x[j];
    }
    rep.max_violation = std::max(rep.max_row_violation, rep.max_bound_violation);
    return rep;
}

namespace {
// shortest round-trip representation
std::string num(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}
} // namespace

std::string export_lp_text(const OccupancyLp& lp) {
    std::ostringstream os;
    auto name = [](int j) { return "x" + std::to_string(j); };
    os << "\\ " << lp.formulation << "\nMaximize\n obj:";
    bool any = false;
    for (int j = 0; j < lp.num_vars(); ++j)
        if (lp.obj[j] != 0.0) {
            os << (lp.obj[j] < 0 ? " - " : " + ") << num(std::abs(lp.obj[j])) << " " << name(j);
            any = true;
        }
    bool quad = std::any_of(lp.quad.begin(), lp.quad.end(), [](double q) { return q != 0.0; });
    if (quad) {
        os << " + [";
        for (int j = 0; j < lp.num_vars(); ++j)
            if (lp.quad[j] != 0.0) os << " - " << num(lp.quad[j]) << " " << name(j) << " ^ 2";
        os << " ] / 2";
    } else if (!any) {
        os << " 0 x0";
    }
    os << "\nSubject To\n";
    std::vector<std::vector<std::pair<int, double>>> rows(lp.num_rows());
    for (size_t k = 0; k < lp.val.size(); ++k) rows[lp.row_of[k]].emplace_back(lp.col_of[k], lp.val[k]);
    for (int r = 0; r < lp.num_rows(); ++r) {
        os << " " << (lp.coupling[r] ? "c" : "r") << r << ":";
        if (rows[r].empty()) os << " 0 x0";
        for (auto [j, v] : rows[r]) os << (v < 0 ? " - " : " + ") << num(std::abs(v)) << " " << name(j);
        os << (lp.sense[r] == Sense::eq ? " = " : lp.sense[r] == Sense::ge ? " >= " : " <= ") << num(lp.rhs[r]) << "\n";
    }
    os << "Bounds\n";
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (std::isinf(lp.lb[j]) && std::isinf(lp.ub[j])) {
            os << " " << name(j) << " free\n";
            continue;
        }
        os << " ";
        if (std::isinf(lp.lb[j])) os << "-inf";
        else os << num(lp.lb[j]);
        os << " <= " << name(j) << " <= ";
        if (std::isinf(lp.ub[j])) os << "+inf";
        else os << num(lp.ub[j]);
        os << "\n";
    }
    os << "End\n";
    return os.str();
}

} // namespace gtlsynth
