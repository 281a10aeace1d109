#pragma once

#include "gausslab/common.hpp"
#include "gausslab/model.hpp"
#include "gausslab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace gausslab {

/// Nearest-point data for the projection onto a closed convex set: the
/// offset m = x - p is the minimal-norm element of x - Omega.
struct ProjectionResult {
    Point point;       // nearest point p in Omega
    Point offset;      // m = x - p
    double distance = 0.0;
    int iterations = 0;
    double vi_residual = 0.0;  // min over sampled c of <(x-c)-m, m>; filled by project_checked
};

/// Convex sublevel set Omega = {x : G(x) <= 0} with defining function data
/// and a projector returning the nearest point of Omega.
class ConvexDomain {
public:
    virtual ~ConvexDomain() = default;

    virtual double g_value(const Point& x) const = 0;
    virtual Point g_grad(const Point& x) const = 0;
    virtual Matrix g_hess(const Point& x) const = 0;
    virtual ProjectionResult project(const Point& x) const = 0;
    virtual std::string kind() const = 0;

    bool contains(const Point& x) const { return g_value(x) <= 0.0; }

    double distance_sq(const Point& x) const {
        const ProjectionResult pr = project(x);
        return pr.distance * pr.distance;
    }

    /// Gradient of the squared distance: 2 m(x, Omega).
    Point grad_distance_sq(const Point& x) const { return 2.0 * project(x).offset; }
};

/// Whole space as a degenerate domain (G == -1); projection is the identity.
class WholeSpaceDomain final : public ConvexDomain {
public:
    explicit WholeSpaceDomain(int n) : n_(n) {}

    double g_value(const Point&) const override { return -1.0; }
    Point g_grad(const Point&) const override { return Point::Zero(n_); }
    Matrix g_hess(const Point&) const override { return Matrix::Zero(n_, n_); }
    std::string kind() const override { return "none"; }

    ProjectionResult project(const Point& x) const override {
        ProjectionResult pr;
        pr.point = x;
        pr.offset = Point::Zero(x.size());
        return pr;
    }

private:
    int n_;
};

/// Halfspace {x : <a, x> <= c}; closed-form projection.
class HalfspaceDomain final : public ConvexDomain {
public:
    HalfspaceDomain(Point a, double c) : a_(std::move(a)), c_(c) {
        if (a_.norm() == 0.0) throw std::invalid_argument("HalfspaceDomain: a must be nonzero");
    }

    /// Coefficients from a measure sigma on [0, 1] given as (node, mass)
    /// pairs: a_k = sqrt(lambda_k) sum_j w_j e_k(xi_j).
    static HalfspaceDomain from_measure(const TruncatedModel& model,
                                        const std::vector<std::pair<double, double>>& sigma,
                                        double c) {
        Point a = Point::Zero(model.dimension());
        for (int k = 1; k <= model.dimension(); ++k) {
            double s = 0.0;
            for (const auto& [xi, w] : sigma) s += w * model.basis_eval(k, xi);
            a[k - 1] = model.sqrt_eigenvalue(k) * s;
        }
        return HalfspaceDomain(std::move(a), c);
    }

    const Point& normal() const { return a_; }
    double level() const { return c_; }

    double g_value(const Point& x) const override { return a_.dot(x) - c_; }
    Point g_grad(const Point&) const override { return a_; }
    Matrix g_hess(const Point& x) const override { return Matrix::Zero(x.size(), x.size()); }
    std::string kind() const override { return "halfspace"; }

    ProjectionResult project(const Point& x) const override {
        ProjectionResult pr;
        const double excess = std::max(0.0, (a_.dot(x) - c_)) / a_.squaredNorm();
        pr.offset = excess * a_;
        pr.point = x - pr.offset;
        pr.distance = pr.offset.norm();
        return pr;
    }

private:
    Point a_;
    double c_;
};

/// Ellipsoid {x : sum_k lambda_k x_k^2 <= r^2}, the coordinate form of the
/// L^2-ball of paths. Projection solves the multiplier equation
/// phi(t) = sum_k lambda_k x_k^2 / (1 + 2 t lambda_k)^2 - r^2 = 0
/// by safeguarded Newton (phi is strictly decreasing in t >= 0).
class EllipsoidDomain final : public ConvexDomain {
public:
    EllipsoidDomain(Eigen::VectorXd axis_weights, double r)
        : lambda_(std::move(axis_weights)), r_(r) {
        if (r <= 0.0) throw std::invalid_argument("EllipsoidDomain: r must be positive");
        if ((lambda_.array() <= 0.0).any()) {
            throw std::invalid_argument("EllipsoidDomain: axis weights must be positive");
        }
    }

    static EllipsoidDomain from_model(const TruncatedModel& model, double r) {
        Eigen::VectorXd lam(model.dimension());
        for (int k = 1; k <= model.dimension(); ++k) lam[k - 1] = model.eigenvalue(k);
        return EllipsoidDomain(std::move(lam), r);
    }

    const Eigen::VectorXd& axis_weights() const { return lambda_; }
    double radius() const { return r_; }

    double g_value(const Point& x) const override {
        return (lambda_.array() * x.array().square()).sum() - r_ * r_;
    }
    Point g_grad(const Point& x) const override { return 2.0 * lambda_.cwiseProduct(x); }
    Matrix g_hess(const Point& x) const override {
        Matrix h = Matrix::Zero(x.size(), x.size());
        h.diagonal() = 2.0 * lambda_;
        return h;
    }
    std::string kind() const override { return "ellipsoid"; }

    ProjectionResult project(const Point& x) const override {
        ProjectionResult pr;
        if (g_value(x) <= 0.0) {
            pr.point = x;
            pr.offset = Point::Zero(x.size());
            return pr;
        }
        const double t = solve_multiplier(x, pr.iterations);
        pr.point = x.array() / (1.0 + 2.0 * t * lambda_.array());
        pr.offset = x - pr.point;
        pr.distance = pr.offset.norm();
        return pr;
    }

private:
    double phi(const Point& x, double t) const {
        return (lambda_.array() * x.array().square() / (1.0 + 2.0 * t * lambda_.array()).square()).sum() -
               r_ * r_;
    }

    double phi_deriv(const Point& x, double t) const {
        return -4.0 * (lambda_.array().square() * x.array().square() /
                       (1.0 + 2.0 * t * lambda_.array()).cube())
                          .sum();
    }

    double solve_multiplier(const Point& x, int& iterations) const {
        double lo = 0.0;
        double hi = 1.0;
        while (phi(x, hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e18) {
                throw IterationLimitError("ellipsoid projection: bracket expansion failed", x, phi(x, hi));
            }
        }
        double t = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double v = phi(x, t);
            iterations = it + 1;
            if (std::abs(v) <= 1e-12) return t;
            if (v > 0.0) lo = t; else hi = t;
            const double dv = phi_deriv(x, t);
            double next = t - v / dv;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
            t = next;
        }
        throw IterationLimitError(
            "ellipsoid projection: multiplier search hit iteration limit; bracket [" +
                std::to_string(lo) + ", " + std::to_string(hi) + "]",
            x, phi(x, t));
    }

    Eigen::VectorXd lambda_;
    double r_;
};

/// Projection plus a sampled variational-inequality residual
/// min_c <(x - c) - m, m> over boundary-biased samples c in Omega
/// (projections of Gaussian draws). The paper's inequality makes this >= 0.
inline ProjectionResult project_checked(const ConvexDomain& domain, const Point& x,
                                        GaussianSampler sampler, int samples = 64) {
    ProjectionResult pr = domain.project(x);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Point c = domain.project(sampler.normal_vector(static_cast<int>(x.size()))).point;
        worst = std::min(worst, ((x - c) - pr.offset).dot(pr.offset));
    }
    pr.vi_residual = worst;
    return pr;
}

/// Max over displacements h of |m(x+h) - m(x)| / |h|; at most 1 for convex sets.
inline double lipschitz_probe(const ConvexDomain& domain, const Point& x,
                              const std::vector<Point>& displacements) {
    const Point m0 = domain.project(x).offset;
    double worst = 0.0;
    for (const Point& h : displacements) {
        const double hn = h.norm();
        if (hn == 0.0) throw std::invalid_argument("lipschitz_probe: zero displacement");
        const Point mh = domain.project(x + h).offset;
        worst = std::max(worst, (mh - m0).norm() / hn);
    }
    return worst;
}

}  // namespace gausslab
