#pragma once

#include "gausslab/common.hpp"
#include "gausslab/domains.hpp"
#include "gausslab/model.hpp"
#include "gausslab/potentials.hpp"
#include "gausslab/quadrature.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gausslab {

/// Scalar convex profile with first two derivatives.
struct ScalarProfile {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::function<double(double)> second;
};

inline ScalarProfile phi_profile(const std::string& kind) {
    if (kind == "cosh") {
        return {"cosh", [](double s) { return std::cosh(s); }, [](double s) { return std::sinh(s); },
                [](double s) { return std::cosh(s); }};
    }
    if (kind == "square") {
        return {"square", [](double s) { return s * s; }, [](double s) { return 2.0 * s; },
                [](double) { return 2.0; }};
    }
    if (kind == "softplus") {
        auto sigmoid = [](double s) { return 1.0 / (1.0 + std::exp(-std::abs(s))); };
        return {"softplus",
                [](double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); },
                [](double s) { return s > 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); },
                [sigmoid](double s) { const double p = sigmoid(s); return p * (1.0 - p); }};
    }
    throw std::invalid_argument("unknown phi kind: " + kind);
}

struct GrowthBound {
    double C = 1.0;
    double beta = 1.0;
};

/// U1(x) = Phi(<t, x>) where t_k = sqrt(lambda_k) * integral of e_k against
/// the measure tau; the coordinate form of Phi applied to the tau-average of
/// the embedded path.
class WeightU1 final : public ConvexPotential {
public:
    WeightU1(const TruncatedModel& model, ScalarProfile phi,
             std::vector<std::pair<double, double>> tau, GrowthBound growth)
        : phi_(std::move(phi)), tau_(std::move(tau)), growth_(growth) {
        t_coeffs_ = Point::Zero(model.dimension());
        for (int k = 1; k <= model.dimension(); ++k) {
            double s = 0.0;
            for (const auto& [xi, w] : tau_) {
                if (w < 0.0) throw std::invalid_argument("WeightU1: tau masses must be nonnegative");
                s += w * model.basis_eval(k, xi);
            }
            t_coeffs_[k - 1] = model.sqrt_eigenvalue(k) * s;
        }
    }

    double value(const Point& x) const override { return phi_.value(t_coeffs_.dot(x)); }
    Point gradient(const Point& x) const override { return phi_.deriv(t_coeffs_.dot(x)) * t_coeffs_; }
    bool has_hessian() const override { return true; }
    Matrix hessian(const Point& x) const override {
        return phi_.second(t_coeffs_.dot(x)) * (t_coeffs_ * t_coeffs_.transpose());
    }

    const Point& t_coeffs() const { return t_coeffs_; }
    const ScalarProfile& phi() const { return phi_; }
    const GrowthBound& growth() const { return growth_; }

private:
    ScalarProfile phi_;
    std::vector<std::pair<double, double>> tau_;
    GrowthBound growth_;
    Point t_coeffs_;
};

inline ScalarProfile psi_profile(const std::string& kind) {
    if (kind == "square" || kind == "cosh") return phi_profile(kind);
    throw std::invalid_argument("unknown psi kind: " + kind);
}

/// U2(x) = integral over [0,1] of Psi(f_x(xi), xi) with f_x the embedded
/// path, discretized by a Gauss-Legendre rule in xi.
class WeightU2 final : public ConvexPotential {
public:
    WeightU2(const TruncatedModel& model, ScalarProfile psi, int xi_nodes, GrowthBound growth)
        : psi_(std::move(psi)), growth_(growth) {
        if (xi_nodes < 1) throw std::invalid_argument("WeightU2: xi_nodes must be >= 1");
        const Rule1D rule = gauss_legendre_01(xi_nodes);
        xi_nodes_ = rule.nodes;
        xi_weights_ = rule.weights;
        embed_.resize(xi_nodes, model.dimension());
        for (int j = 0; j < xi_nodes; ++j) {
            for (int k = 1; k <= model.dimension(); ++k) {
                embed_(j, k - 1) = model.sqrt_eigenvalue(k) * model.basis_eval(k, xi_nodes_[j]);
            }
        }
    }

    double value(const Point& x) const override {
        const Eigen::VectorXd f = embed_ * x;
        double acc = 0.0;
        for (int j = 0; j < f.size(); ++j) acc += xi_weights_[j] * psi_.value(f[j]);
        return acc;
    }

    Point gradient(const Point& x) const override {
        const Eigen::VectorXd f = embed_ * x;
        Eigen::VectorXd s(f.size());
        for (int j = 0; j < f.size(); ++j) s[j] = xi_weights_[j] * psi_.deriv(f[j]);
        return embed_.transpose() * s;
    }

    bool has_hessian() const override { return true; }
    Matrix hessian(const Point& x) const override {
        const Eigen::VectorXd f = embed_ * x;
        Eigen::VectorXd s(f.size());
        for (int j = 0; j < f.size(); ++j) s[j] = xi_weights_[j] * psi_.second(f[j]);
        return embed_.transpose() * s.asDiagonal() * embed_;
    }

    const ScalarProfile& psi() const { return psi_; }
    const GrowthBound& growth() const { return growth_; }
    const Eigen::VectorXd& xi_grid() const { return xi_nodes_; }

private:
    ScalarProfile psi_;
    GrowthBound growth_;
    Eigen::VectorXd xi_nodes_;
    Eigen::VectorXd xi_weights_;
    Matrix embed_;  // row j holds sqrt(lambda_k) e_k(xi_j)
};

struct GrowthReport {
    double max_ratio = 0.0;
    double worst_s = 0.0;
};

namespace detail {

inline GrowthReport probe_growth(const std::function<double(double)>& deriv, const GrowthBound& b) {
    GrowthReport rep;
    for (int i = 0; i <= 400; ++i) {
        const double s = -20.0 + 0.1 * i;
        const double bound = b.C * std::exp(b.beta * std::abs(s));
        const double ratio = bound > 0.0 ? std::abs(deriv(s)) / bound
                                         : (deriv(s) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.worst_s = s;
        }
    }
    return rep;
}

}  // namespace detail

/// Probes the declared growth bound |Phi'(s)| <= C e^{beta |s|} on the grid
/// s in [-20, 20]; throws when the certificate is violated.
inline GrowthReport growth_certificate(const WeightU1& w) {
    GrowthReport rep = detail::probe_growth(w.phi().deriv, w.growth());
    if (rep.max_ratio > 1.0) {
        throw ValidationError({"weight.growth: |phi'(s)| exceeds C e^{beta|s|} at s = " +
                               std::to_string(rep.worst_s)});
    }
    return rep;
}

inline GrowthReport growth_certificate(const WeightU2& w) {
    GrowthReport rep = detail::probe_growth(w.psi().deriv, w.growth());
    if (rep.max_ratio > 1.0) {
        throw ValidationError({"weight.growth: |dPsi/ds(s, .)| exceeds C(.) e^{beta|s|} at s = " +
                               std::to_string(rep.worst_s)});
    }
    return rep;
}

/// V_alpha(x) = U_alpha(x) + d_H^2(x, Omega) / (2 alpha); the log-density of
/// the penalized measure. In exact-weight mode the base potential replaces
/// its envelope (valid for the solver, which only needs some convex weight).
class PenalizedPotential final : public ConvexPotential {
public:
    PenalizedPotential(std::shared_ptr<const ConvexPotential> base,
                       std::shared_ptr<const ConvexDomain> domain, double alpha,
                       bool exact_weight_mode = false, double prox_tol = 1e-10)
        : base_(std::move(base)), domain_(std::move(domain)), alpha_(alpha),
          exact_weight_(exact_weight_mode), prox_tol_(prox_tol) {
        if (alpha_ <= 0.0) throw std::invalid_argument("PenalizedPotential: alpha must be positive");
    }

    double value(const Point& x) const override {
        const double base_val = exact_weight_ ? base_->value(x)
                                              : prox(*base_, x, alpha_, prox_tol_).envelope_value;
        return base_val + domain_->distance_sq(x) / (2.0 * alpha_);
    }

    Point gradient(const Point& x) const override {
        const Point base_grad = exact_weight_ ? base_->gradient(x)
                                              : prox(*base_, x, alpha_, prox_tol_).envelope_grad;
        return base_grad + domain_->project(x).offset / alpha_;
    }

    double alpha() const { return alpha_; }
    const ConvexDomain& domain() const { return *domain_; }
    const ConvexPotential& base() const { return *base_; }

private:
    std::shared_ptr<const ConvexPotential> base_;
    std::shared_ptr<const ConvexDomain> domain_;
    double alpha_;
    bool exact_weight_;
    double prox_tol_;
};

}  // namespace gausslab
