// Mehrotra predictor-corrector interior point method on the normal equations.
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "gtlsynth/error.hpp"
#include "gtlsynth/lp.hpp"

#ifdef GTLSYNTH_HAVE_CHOLMOD
#include <cholmod.h>
#else
#include <Eigen/SparseCholesky>
#endif

namespace gtlsynth {

namespace {

// residual level at which a stalled solve is still reported optimal
constexpr double kAcceptable = 1e-6;
// distance from the bounds for a warm-started point
constexpr double kWarmShift = 1e-3;

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// Factorization of A diag(h) A' + delta I.
class NormalSolver {
public:
    explicit NormalSolver(const SpMat& a) : a_(a) {
#ifdef GTLSYNTH_HAVE_CHOLMOD
        cholmod_start(&c_);
        c_.print = 0;
        c_.error_handler = nullptr;
        // the supernodal path reports spurious non-definiteness with the system BLAS
        c_.supernodal = CHOLMOD_SIMPLICIAL;
        // F = [A diag(sqrt h), sqrt(delta) I] so that F F' is the regularized operator
        {
            std::vector<Eigen::Triplet<double, int>> trip;
            trip.reserve(a_.nonZeros() + a_.rows());
            for (int j = 0; j < a_.outerSize(); ++j)
                for (SpMat::InnerIterator it(a_, j); it; ++it) trip.emplace_back(it.row(), j, it.value());
            for (int r = 0; r < a_.rows(); ++r) trip.emplace_back(r, a_.cols() + r, 1.0);
            f_.resize(a_.rows(), a_.cols() + a_.rows());
            f_.setFromTriplets(trip.begin(), trip.end());
            f_.makeCompressed();
        }
        wrap_.nrow = f_.rows();
        wrap_.ncol = f_.cols();
        wrap_.nzmax = f_.nonZeros();
        wrap_.p = f_.outerIndexPtr();
        wrap_.i = f_.innerIndexPtr();
        wrap_.nz = nullptr;
        wrap_.x = f_.valuePtr();
        wrap_.z = nullptr;
        wrap_.stype = 0;
        wrap_.itype = CHOLMOD_INT;
        wrap_.xtype = CHOLMOD_REAL;
        wrap_.dtype = CHOLMOD_DOUBLE;
        wrap_.sorted = 1;
        wrap_.packed = 1;
        l_ = cholmod_analyze(&wrap_, &c_);
        if (!l_ || c_.status < CHOLMOD_OK) throw Error(ErrorCode::solver, "CHOLMOD symbolic analysis failed");
#endif
    }

    ~NormalSolver() {
#ifdef GTLSYNTH_HAVE_CHOLMOD
        if (l_) cholmod_free_factor(&l_, &c_);
        cholmod_finish(&c_);
#endif
    }

    NormalSolver(const NormalSolver&) = delete;
    NormalSolver& operator=(const NormalSolver&) = delete;

    bool factor(const Vec& h, double delta) {
        h_ = h;
        delta_ = delta;
#ifdef GTLSYNTH_HAVE_CHOLMOD
        for (int j = 0; j < a_.outerSize(); ++j) {
            const double s = std::sqrt(h[j]);
            for (int k = a_.outerIndexPtr()[j]; k < a_.outerIndexPtr()[j + 1]; ++k)
                f_.valuePtr()[k] = a_.valuePtr()[k] * s;
        }
        const double sd = std::sqrt(delta);
        for (int j = a_.outerSize(); j < f_.outerSize(); ++j) f_.valuePtr()[f_.outerIndexPtr()[j]] = sd;
        cholmod_factorize(&wrap_, l_, &c_);
        return c_.status == CHOLMOD_OK;
#else
        SpMat n = a_ * h.asDiagonal() * a_.transpose();
        SpMat id(n.rows(), n.cols());
        id.setIdentity();
        n += delta * id;
        if (!analyzed_) {
            llt_.analyzePattern(n);
            analyzed_ = true;
        }
        llt_.factorize(n);
        return llt_.info() == Eigen::Success;
#endif
    }

    // Solves (A H A') x = rhs with iterative refinement against the
    // unregularized operator.
    Vec solve(const Vec& rhs) const {
        Vec x = raw_solve(rhs);
        for (int k = 0; k < 2; ++k) {
            Vec r = rhs - apply(x);
            if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * (1 + rhs.lpNorm<Eigen::Infinity>())) break;
            x += raw_solve(r);
        }
        return x;
    }

private:
    Vec apply(const Vec& y) const { return a_ * (h_.asDiagonal() * (a_.transpose() * y)); }

    Vec raw_solve(const Vec& rhs) const {
#ifdef GTLSYNTH_HAVE_CHOLMOD
        cholmod_dense b;
        b.nrow = rhs.size();
        b.ncol = 1;
        b.nzmax = rhs.size();
        b.d = rhs.size();
        b.x = const_cast<double*>(rhs.data());
        b.z = nullptr;
        b.xtype = CHOLMOD_REAL;
        b.dtype = CHOLMOD_DOUBLE;
        cholmod_dense* x = cholmod_solve(CHOLMOD_A, l_, &b, &c_);
        Vec out = Eigen::Map<Vec>(static_cast<double*>(x->x), rhs.size());
        cholmod_free_dense(&x, &c_);
        return out;
#else
        return llt_.solve(rhs);
#endif
    }

    const SpMat& a_;
    Vec h_;
    double delta_ = 0;
#ifdef GTLSYNTH_HAVE_CHOLMOD
    mutable cholmod_common c_;
    cholmod_factor* l_ = nullptr;
    SpMat f_;
    cholmod_sparse wrap_{};
#else
    Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
    bool analyzed_ = false;
#endif
};

double step_to_boundary(const Vec& v, const Vec& dv, const std::vector<int>& idx) {
    double a = 1.0;
    for (int j : idx)
        if (dv[j] < 0) a = std::min(a, -v[j] / dv[j]);
    return a;
}

} // namespace

std::string InteriorPointSolver::id() const {
#ifdef GTLSYNTH_HAVE_CHOLMOD
    return "ipm-cholmod";
#else
    return "ipm-eigen";
#endif
}

SolveResult InteriorPointSolver::solve(const OccupancyLp& lp) { return run(lp, nullptr); }

SolveResult InteriorPointSolver::solve_warm(const OccupancyLp& lp, const SolverIterate& start) {
    return run(lp, &start);
}

SolveResult InteriorPointSolver::run(const OccupancyLp& lp, const SolverIterate* start) {
    const int n0 = lp.num_vars();
    const int m = lp.num_rows();
    int nslack = 0;
    for (auto s : lp.sense)
        if (s != Sense::eq) ++nslack;
    const int n = n0 + nslack;

    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(lp.val.size() + nslack);
    for (size_t k = 0; k < lp.val.size(); ++k) trip.emplace_back(lp.row_of[k], lp.col_of[k], lp.val[k]);
    Vec l(n), u(n), c(n), q(n), b(m);
    for (int j = 0; j < n0; ++j) {
        l[j] = lp.lb[j];
        u[j] = lp.ub[j];
        c[j] = -lp.obj[j];
        q[j] = lp.quad[j];
    }
    {
        int s = n0;
        for (int r = 0; r < m; ++r) {
            b[r] = lp.rhs[r];
            if (lp.sense[r] == Sense::eq) continue;
            trip.emplace_back(r, s, lp.sense[r] == Sense::ge ? -1.0 : 1.0);
            l[s] = 0;
            u[s] = kInf;
            c[s] = 0;
            q[s] = 0;
            ++s;
        }
    }
    SpMat a(m, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    trip.clear();
    trip.shrink_to_fit();

    // scale the objective so duals stay O(1)
    const double cscale = std::max({1.0, c.lpNorm<Eigen::Infinity>(), q.lpNorm<Eigen::Infinity>()});
    c /= cscale;
    q /= cscale;

    std::vector<int> lo, hi;
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(l[j])) lo.push_back(j);
        if (std::isfinite(u[j])) hi.push_back(j);
        if (!std::isfinite(l[j]) && !std::isfinite(u[j]) && q[j] <= 0)
            throw Error(ErrorCode::solver, "free variable without a quadratic term");
    }
    Vec x(n), zl = Vec::Zero(n), zu = Vec::Zero(n), y = Vec::Zero(m);
    for (int j = 0; j < n; ++j) {
        const bool fl = std::isfinite(l[j]), fu = std::isfinite(u[j]);
        if (fl && fu) x[j] = 0.5 * (l[j] + u[j]);
        else if (fl) x[j] = l[j] + 1.0;
        else if (fu) x[j] = u[j] - 1.0;
        else x[j] = 0.0;
    }
    for (int j : lo) zl[j] = 1.0;
    for (int j : hi) zu[j] = 1.0;
    if (start && static_cast<int>(start->x.size()) == n && static_cast<int>(start->y.size()) == m) {
        // previous point pushed back into the interior
        const double th = kWarmShift;
        for (int j = 0; j < n; ++j) {
            const bool fl = std::isfinite(l[j]), fu = std::isfinite(u[j]);
            double v = start->x[j];
            if (fl && fu && u[j] - l[j] <= 2 * th) v = 0.5 * (l[j] + u[j]);
            else {
                if (fl) v = std::max(v, l[j] + th);
                if (fu) v = std::min(v, u[j] - th);
            }
            x[j] = v;
            zl[j] = fl ? std::max(start->zl[j] / cscale, th) : 0.0;
            zu[j] = fu ? std::max(start->zu[j] / cscale, th) : 0.0;
        }
        y = Eigen::Map<const Vec>(start->y.data(), m) / cscale;
    }
    const int ncomp = static_cast<int>(lo.size() + hi.size());

    SolveResult res;
    NormalSolver ns(a);
    const double bnorm = 1 + b.lpNorm<Eigen::Infinity>();
    const double cnorm = 1 + c.lpNorm<Eigen::Infinity>();
    const bool has_quad = q.lpNorm<Eigen::Infinity>() > 0;
    double best_rp = kInf;
    int stall = 0;
    // best iterate so far; returned when the iteration breaks down late
    double best_merit = kInf;
    int since_best = 0;
    Vec bx, by;

    Vec xl(n), xu(n), h(n), dx(n), dy(m), dzl(n), dzu(n);
    auto gaps = [&]() {
        xl.setOnes();
        xu.setOnes();
        for (int j : lo) xl[j] = x[j] - l[j];
        for (int j : hi) xu[j] = u[j] - x[j];
    };

    // Newton direction for complementarity targets rl, ru
    auto direction = [&](const Vec& rp, const Vec& rd, const Vec& rl, const Vec& ru) {
        Vec rx = -rd;
        for (int j : lo) rx[j] += rl[j] / xl[j];
        for (int j : hi) rx[j] -= ru[j] / xu[j];
        Vec hr = h.cwiseProduct(rx);
        dy = m > 0 ? ns.solve(rp - a * hr) : Vec();
        dx = hr + (m > 0 ? Vec(h.cwiseProduct(a.transpose() * dy)) : Vec::Zero(n));
        dzl.setZero();
        dzu.setZero();
        for (int j : lo) dzl[j] = (rl[j] - zl[j] * dx[j]) / xl[j];
        for (int j : hi) dzu[j] = (ru[j] + zu[j] * dx[j]) / xu[j];
    };

    for (int it = 0; it < opt_.max_iter; ++it) {
        res.iterations = it;
        gaps();
        Vec rp = b - a * x;
        Vec rd = c + q.cwiseProduct(x) - (m > 0 ? Vec(a.transpose() * y) : Vec::Zero(n)) - zl + zu;
        double mu = 0;
        for (int j : lo) mu += xl[j] * zl[j];
        for (int j : hi) mu += xu[j] * zu[j];
        mu = ncomp ? mu / ncomp : 0;
        const double pres = rp.lpNorm<Eigen::Infinity>() / bnorm;
        const double dres = rd.lpNorm<Eigen::Infinity>() / cnorm;
        double pobj = c.dot(x) + 0.5 * x.dot(q.cwiseProduct(x));
        double dobj = b.dot(y) - 0.5 * x.dot(q.cwiseProduct(x));
        for (int j : lo) dobj += l[j] * zl[j];
        for (int j : hi) dobj -= u[j] * zu[j];
        const double gap = std::abs(pobj - dobj) / (1 + std::abs(pobj));
        if (opt_.verbose)
            std::fprintf(stderr, "ipm %3d pres %.2e dres %.2e gap %.2e mu %.2e\n", it, pres, dres, gap, mu);
        if (pres <= opt_.tol && dres <= opt_.tol && gap <= opt_.tol) {
            res.status = SolveStatus::optimal;
            break;
        }
        const double merit = std::max({pres, dres, gap});
        if (!std::isfinite(merit)) break;
        if (merit < best_merit) {
            best_merit = merit;
            since_best = 0;
            bx = x;
            by = y;
        } else if (++since_best > 15 && best_merit <= kAcceptable) {
            break;
        }
        if (pres < 0.9 * best_rp) {
            best_rp = pres;
            stall = 0;
        } else {
            ++stall;
        }
        // diverging duals with stuck primal residual: no feasible point
        if (pres > 1e-7 && (y.lpNorm<Eigen::Infinity>() > 1e10 || (stall > 30 && mu < 1e-10))) {
            res.status = SolveStatus::infeasible;
            res.message = "primal infeasible (residual " + std::to_string(pres) + ")";
            break;
        }

        h = q;
        for (int j : lo) h[j] += zl[j] / xl[j];
        for (int j : hi) h[j] += zu[j] / xu[j];
        const double reg = 1e-12;
        for (int j = 0; j < n; ++j) h[j] = 1.0 / (h[j] + reg);
        if (m > 0) {
            // dependent rows make A H A' singular; regularize relative to its diagonal
            double dmax = 0;
            {
                Vec diag = Vec::Zero(m);
                for (int j = 0; j < n; ++j)
                    for (SpMat::InnerIterator itr(a, j); itr; ++itr) diag[itr.row()] += itr.value() * itr.value() * h[j];
                dmax = std::max(diag.maxCoeff(), 1e-300);
            }
            double delta = 1e-14 * dmax;
            while (!ns.factor(h, delta)) {
                delta *= 100;
                if (delta > 1e-2 * dmax) throw Error(ErrorCode::solver, "normal equations could not be factorized");
            }
        }

        // predictor
        Vec rl = Vec::Zero(n), ru = Vec::Zero(n);
        for (int j : lo) rl[j] = -xl[j] * zl[j];
        for (int j : hi) ru[j] = -xu[j] * zu[j];
        direction(rp, rd, rl, ru);
        Vec ndx = -dx;
        double ap = std::min(step_to_boundary(xl, dx, lo), step_to_boundary(xu, ndx, hi));
        double ad = std::min(step_to_boundary(zl, dzl, lo), step_to_boundary(zu, dzu, hi));
        if (has_quad) ap = ad = std::min(ap, ad);
        double mu_aff = 0;
        for (int j : lo) mu_aff += (xl[j] + ap * dx[j]) * (zl[j] + ad * dzl[j]);
        for (int j : hi) mu_aff += (xu[j] - ap * dx[j]) * (zu[j] + ad * dzu[j]);
        mu_aff = ncomp ? mu_aff / ncomp : 0;
        const double sigma = mu > 0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0;

        // corrector
        for (int j : lo) rl[j] = sigma * mu - xl[j] * zl[j] - dx[j] * dzl[j];
        for (int j : hi) ru[j] = sigma * mu - xu[j] * zu[j] + dx[j] * dzu[j];
        direction(rp, rd, rl, ru);
        ndx = -dx;
        ap = std::min(step_to_boundary(xl, dx, lo), step_to_boundary(xu, ndx, hi));
        ad = std::min(step_to_boundary(zl, dzl, lo), step_to_boundary(zu, dzu, hi));
        const double eta = std::max(0.9, 1.0 - 10 * mu);
        ap = std::min(1.0, eta * ap);
        ad = std::min(1.0, eta * ad);
        if (has_quad) ap = ad = std::min(ap, ad);
        x += ap * dx;
        y += ad * dy;
        zl += ad * dzl;
        zu += ad * dzu;
        res.iterations = it + 1;
    }
    if (res.status == SolveStatus::failed && res.message.empty() && best_merit <= kAcceptable) {
        x = bx;
        y = by;
        res.status = SolveStatus::optimal;
        res.message = "stopped at acceptable accuracy " + std::to_string(best_merit);
    }
    if (res.status == SolveStatus::failed && res.message.empty() && bx.size() == n && !x.allFinite()) {
        x = bx;
        y = by;
    }
    if (res.status == SolveStatus::failed && res.message.empty()) {
        gaps();
        const double pres = (b - a * x).lpNorm<Eigen::Infinity>() / bnorm;
        if (pres > 1e-6) {
            res.status = SolveStatus::infeasible;
            res.message = "no feasible point found (primal residual " + std::to_string(pres) + ")";
        } else {
            res.message = "iteration limit reached";
        }
    }
    {
        auto it = std::make_shared<SolverIterate>();
        it->x.assign(x.data(), x.data() + n);
        it->y.assign(y.data(), y.data() + m);
        it->zl.assign(zl.data(), zl.data() + n);
        it->zu.assign(zu.data(), zu.data() + n);
        for (auto* v : {&it->y, &it->zl, &it->zu})
            for (double& e : *v) e *= cscale;
        res.iterate = std::move(it);
    }
    res.x.assign(x.data(), x.data() + n0);
    // clip tiny bound excursions
    for (int j = 0; j < n0; ++j) res.x[j] = std::clamp(res.x[j], lp.lb[j], lp.ub[j]);
    res.y.assign(y.data(), y.data() + m);
    for (auto& v : res.y) v *= cscale;
    res.objective = 0;
    for (int j = 0; j < n0; ++j) res.objective += lp.obj[j] * res.x[j] - 0.5 * lp.quad[j] * res.x[j] * res.x[j];
    return res;
}

} // namespace gtlsynth
