#pragma once

#include "gausslab/common.hpp"
#include "gausslab/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace gausslab {

/// Finite convex potential with gradient; Hessian optional. Inputs to the
/// Moreau-Yosida machinery and log-densities of the weighted measures.
class ConvexPotential {
public:
    virtual ~ConvexPotential() = default;

    virtual double value(const Point& x) const = 0;
    virtual Point gradient(const Point& x) const = 0;
    virtual bool has_hessian() const { return false; }
    virtual Matrix hessian(const Point& x) const {
        throw std::logic_error("potential has no Hessian");
    }
};

class ZeroPotential final : public ConvexPotential {
public:
    double value(const Point&) const override { return 0.0; }
    Point gradient(const Point& x) const override { return Point::Zero(x.size()); }
    bool has_hessian() const override { return true; }
    Matrix hessian(const Point& x) const override { return Matrix::Zero(x.size(), x.size()); }
};

/// U(x) = scale * |x|^2 / 2.
class QuadraticPotential final : public ConvexPotential {
public:
    explicit QuadraticPotential(double scale = 1.0) : scale_(scale) {}

    double value(const Point& x) const override { return 0.5 * scale_ * x.squaredNorm(); }
    Point gradient(const Point& x) const override { return scale_ * x; }
    bool has_hessian() const override { return true; }
    Matrix hessian(const Point& x) const override {
        return scale_ * Matrix::Identity(x.size(), x.size());
    }

private:
    double scale_;
};

/// U(x) = <b, x>.
class LinearPotential final : public ConvexPotential {
public:
    explicit LinearPotential(Point b) : b_(std::move(b)) {}

    double value(const Point& x) const override { return b_.dot(x); }
    Point gradient(const Point&) const override { return b_; }
    bool has_hessian() const override { return true; }
    Matrix hessian(const Point& x) const override { return Matrix::Zero(x.size(), x.size()); }

private:
    Point b_;
};

/// Potential assembled from callables; handy for tests and custom weights.
class FunctionPotential final : public ConvexPotential {
public:
    using ValueFn = std::function<double(const Point&)>;
    using GradFn = std::function<Point(const Point&)>;
    using HessFn = std::function<Matrix(const Point&)>;

    FunctionPotential(ValueFn value, GradFn grad, HessFn hess = nullptr)
        : value_(std::move(value)), grad_(std::move(grad)), hess_(std::move(hess)) {}

    double value(const Point& x) const override { return value_(x); }
    Point gradient(const Point& x) const override { return grad_(x); }
    bool has_hessian() const override { return static_cast<bool>(hess_); }
    Matrix hessian(const Point& x) const override {
        if (!hess_) throw std::logic_error("potential has no Hessian");
        return hess_(x);
    }

private:
    ValueFn value_;
    GradFn grad_;
    HessFn hess_;
};

/// Result of the inner minimization of U(x+h) + |h|^2 / (2 alpha).
struct ProxResult {
    Point minimizer;       // P(x, alpha)
    double envelope_value = 0.0;
    Point envelope_grad;   // -P / alpha, exact by construction
    int iterations = 0;
    double grad_residual = 0.0;
};

namespace detail {

inline void check_finite(double v, const char* where) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(where) + ": non-finite value encountered");
}

}  // namespace detail

/// Minimizes g(h) = U(x + h) + |h|^2/(2 alpha). Damped Newton when a
/// Hessian is available; otherwise gradient descent with step
/// alpha/(1 + alpha L) where L is adapted by Armijo backtracking
/// (c = 1e-4, shrink 0.5). The inner problem is (1/alpha)-strongly convex.
inline ProxResult prox(const ConvexPotential& u, const Point& x, double alpha,
                       double tol = 1e-10, int max_iter = 500) {
    if (alpha <= 0.0) throw std::invalid_argument("prox: alpha must be positive");
    const int n = static_cast<int>(x.size());
    Point h = Point::Zero(n);
    auto objective = [&](const Point& p) {
        const double v = u.value(x + p) + p.squaredNorm() / (2.0 * alpha);
        detail::check_finite(v, "prox");
        return v;
    };
    auto grad = [&](const Point& p) -> Point { return u.gradient(x + p) + p / alpha; };

    double gval = objective(h);
    Point g = grad(h);
    int it = 0;
    // round-off slack so the solver can keep polishing near the optimum
    auto accept_level = [&] { return gval + 1e-14 * (1.0 + std::abs(gval)); };

    if (u.has_hessian()) {
        double damping = 0.0;
        for (; it < max_iter; ++it) {
            if (g.norm() <= tol) break;
            bool stagnated = false;
            while (true) {
                Matrix hess = u.hessian(x + h);
                hess.diagonal().array() += 1.0 / alpha + damping;
                const Point step = hess.ldlt().solve(-g);
                const Point trial = h + step;
                const double tval = objective(trial);
                if (tval <= accept_level()) {
                    h = trial;
                    gval = tval;
                    break;
                }
                damping = std::max(1e-8, damping * 10.0);
                if (damping > 1e13) {
                    stagnated = true;
                    break;
                }
            }
            if (stagnated) break;
            g = grad(h);
            damping *= 0.25;
            if (damping < 1e-14) damping = 0.0;
        }
    } else {
        double lips = 1.0;  // running curvature estimate of grad U
        const double armijo_c = 1e-4;
        for (; it < max_iter; ++it) {
            const double gn2 = g.squaredNorm();
            if (std::sqrt(gn2) <= tol) break;
            double step = alpha / (1.0 + alpha * lips);
            Point trial = h - step * g;
            double tval = objective(trial);
            int backtracks = 0;
            while (tval > accept_level() - armijo_c * step * gn2 && backtracks < 60) {
                step *= 0.5;
                lips = 1.0 / step - 1.0 / alpha;  // keep the estimate consistent with the step
                trial = h - step * g;
                tval = objective(trial);
                ++backtracks;
            }
            h = trial;
            gval = tval;
            g = grad(h);
            if (backtracks == 0) lips = std::max(lips * 0.9, 1e-12);
        }
    }

    const double res = g.norm();
    if (res > tol) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e", res);
        throw IterationLimitError(std::string("prox: inner solver hit iteration limit, residual ") +
                                      buf,
                                  h, res);
    }

    ProxResult out;
    out.minimizer = h;
    out.envelope_value = gval;
    out.envelope_grad = -h / alpha;
    out.iterations = it;
    out.grad_residual = res;
    return out;
}

inline double envelope_value(const ConvexPotential& u, const Point& x, double alpha,
                             double tol = 1e-10) {
    return prox(u, x, alpha, tol).envelope_value;
}

inline Point envelope_grad(const ConvexPotential& u, const Point& x, double alpha,
                           double tol = 1e-10) {
    return prox(u, x, alpha, tol).envelope_grad;
}

/// The alpha-envelope of a convex potential, itself a convex potential.
/// The gradient is the analytic -P(x, alpha)/alpha, not a finite difference.
class EnvelopePotential final : public ConvexPotential {
public:
    EnvelopePotential(const ConvexPotential& base, double alpha, double tol = 1e-10)
        : base_(base), alpha_(alpha), tol_(tol) {}

    double value(const Point& x) const override { return prox(base_, x, alpha_, tol_).envelope_value; }
    Point gradient(const Point& x) const override { return prox(base_, x, alpha_, tol_).envelope_grad; }

    double alpha() const { return alpha_; }

private:
    const ConvexPotential& base_;
    double alpha_;
    double tol_;
};

/// Both sides of the semigroup identity (f_alpha)_beta(x) = f_{alpha+beta}(x).
inline std::pair<double, double> semigroup_check(const ConvexPotential& u, const Point& x,
                                                 double alpha, double beta,
                                                 double tol = 1e-10) {
    if (alpha <= 0.0 || beta <= 0.0) throw std::invalid_argument("semigroup_check: levels must be positive");
    EnvelopePotential inner(u, alpha, tol);
    const double lhs = prox(inner, x, beta, tol).envelope_value;
    const double rhs = prox(u, x, alpha + beta, tol).envelope_value;
    return {lhs, rhs};
}

/// (|grad f_{alpha+beta}(x)|, |grad f_alpha(x)|); the first never exceeds
/// the second, and both are bounded by |grad U(x)|.
inline std::pair<double, double> gradient_monotonicity_check(const ConvexPotential& u,
                                                             const Point& x, double alpha,
                                                             double beta, double tol = 1e-10) {
    const double coarse = prox(u, x, alpha + beta, tol).envelope_grad.norm();
    const double fine = prox(u, x, alpha, tol).envelope_grad.norm();
    return {coarse, fine};
}

/// Worst violation of the subgradient inequality
/// U(x+h) >= U(x+P) + <grad f_alpha(x), h - P> over the probe shifts;
/// nonnegative when grad f_alpha(x) is a subgradient at P(x, alpha).
inline double subdifferential_inclusion_check(const ConvexPotential& u, const Point& x,
                                              double alpha, const std::vector<Point>& probes,
                                              double tol = 1e-10) {
    const ProxResult pr = prox(u, x, alpha, tol);
    const double up = u.value(x + pr.minimizer);
    double worst = std::numeric_limits<double>::infinity();
    for (const Point& h : probes) {
        worst = std::min(worst,
                         u.value(x + h) - up - pr.envelope_grad.dot(h - pr.minimizer));
    }
    return worst;
}

/// Two-stage Richardson limit of a sequence sampled at dyadic parameters
/// alpha, alpha/2, alpha/4: eliminates the alpha and alpha^2 error modes,
/// leaving O(alpha^3).
inline double dyadic_richardson_limit(double f0, double f1, double f2) {
    return (8.0 * f2 - 6.0 * f1 + f0) / 3.0;
}

struct PotentialProbeReport {
    double worst_midpoint_convexity = 0.0;  // max of value((x+y)/2) - (value(x)+value(y))/2
    double worst_gradient_mismatch = 0.0;   // max relative FD error
};

/// Spot-checks midpoint convexity and gradient-vs-finite-difference
/// consistency on random Gaussian probes.
inline PotentialProbeReport probe_potential(const ConvexPotential& u, int n,
                                            GaussianSampler sampler, int points = 50,
                                            double fd_step = 1e-5) {
    PotentialProbeReport rep;
    for (int i = 0; i < points; ++i) {
        const Point x = sampler.normal_vector(n);
        const Point y = sampler.normal_vector(n);
        const double mid = u.value(0.5 * (x + y)) - 0.5 * (u.value(x) + u.value(y));
        rep.worst_midpoint_convexity = std::max(rep.worst_midpoint_convexity, mid);

        const Point g = u.gradient(x);
        const double scale = 1.0 + g.norm();
        for (int d = 0; d < n; ++d) {
            Point e = Point::Zero(n);
            e[d] = fd_step;
            const double fd = (u.value(x + e) - u.value(x - e)) / (2.0 * fd_step);
            rep.worst_gradient_mismatch =
                std::max(rep.worst_gradient_mismatch, std::abs(fd - g[d]) / scale);
        }
    }
    return rep;
}

}  // namespace gausslab
