#pragma once

#include "gausslab/common.hpp"
#include "gausslab/model.hpp"
#include "gausslab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

namespace gausslab {

struct Rule1D {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

namespace detail {

// Enforce the exact +- symmetry of rules with even weight functions so odd
// monomials cancel to zero instead of eigen-solver round-off.
inline void symmetrize(Rule1D& r) {
    const Eigen::Index q = r.nodes.size();
    for (Eigen::Index i = 0; i < q / 2; ++i) {
        const Eigen::Index j = q - 1 - i;
        const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
        r.nodes[i] = -x;
        r.nodes[j] = x;
        const double w = 0.5 * (r.weights[i] + r.weights[j]);
        r.weights[i] = r.weights[j] = w;
    }
    if (q % 2 == 1) r.nodes[q / 2] = 0.0;
}

}  // namespace detail

/// Probabilists' Gauss-Hermite rule: integrates p(x) against the standard
/// Gaussian density exactly for deg(p) <= 2q-1. Weights sum to 1.
inline Rule1D gauss_hermite_1d(int q) {
    if (q < 1) throw std::invalid_argument("gauss_hermite_1d: q must be >= 1");
    Matrix jacobi = Matrix::Zero(q, q);
    for (int k = 1; k < q; ++k) {
        jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
    Rule1D r;
    r.nodes = es.eigenvalues();
    r.weights = es.eigenvectors().row(0).transpose().array().square();
    detail::symmetrize(r);
    return r;
}

/// Gauss-Legendre on [-1, 1] with total weight 2.
inline Rule1D gauss_legendre_1d(int q) {
    if (q < 1) throw std::invalid_argument("gauss_legendre_1d: q must be >= 1");
    Matrix jacobi = Matrix::Zero(q, q);
    for (int k = 1; k < q; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k - 1, k) = jacobi(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
    Rule1D r;
    r.nodes = es.eigenvalues();
    r.weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    detail::symmetrize(r);
    return r;
}

/// Gauss-Legendre mapped to [a, b].
inline Rule1D gauss_legendre_ab(int q, double a, double b) {
    Rule1D base = gauss_legendre_1d(q);
    Rule1D r;
    r.nodes = 0.5 * (b - a) * base.nodes.array() + 0.5 * (a + b);
    r.weights = 0.5 * (b - a) * base.weights;
    return r;
}

inline Rule1D gauss_legendre_01(int q) { return gauss_legendre_ab(q, 0.0, 1.0); }

inline double gaussian_density_1d(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
}

namespace detail {

// Geometric panel breakpoints accumulating at 0 from below: -T, -T/2, ..., 0.
inline std::vector<double> graded_offsets(double extent, int panels) {
    std::vector<double> off(panels + 1);
    off[0] = -extent;
    for (int j = 1; j < panels; ++j) off[j] = -extent * std::pow(0.5, j);
    off[panels] = 0.0;
    return off;
}

}  // namespace detail

/// Composite Gauss-Legendre rule for integrals against the 1-D standard
/// Gaussian over (-inf, beta]. Panels are graded toward the cut so the
/// rule stays accurate for integrands with structure near the boundary.
inline Rule1D halfline_gaussian_rule(double beta, int points_per_panel, int panels = 9) {
    const double extent = 13.0 + std::max(beta, 0.0);
    const auto off = detail::graded_offsets(extent, panels);
    const Rule1D base = gauss_legendre_1d(points_per_panel);
    Rule1D r;
    r.nodes.resize(panels * points_per_panel);
    r.weights.resize(panels * points_per_panel);
    int idx = 0;
    for (int p = 0; p < panels; ++p) {
        const double a = beta + off[p];
        const double b = beta + off[p + 1];
        for (int i = 0; i < points_per_panel; ++i) {
            const double x = 0.5 * (b - a) * base.nodes[i] + 0.5 * (a + b);
            r.nodes[idx] = x;
            r.weights[idx] = 0.5 * (b - a) * base.weights[i] * gaussian_density_1d(x);
            ++idx;
        }
    }
    return r;
}

/// Mirror image of halfline_gaussian_rule: Gaussian integrals over
/// [beta, +inf), graded toward beta.
inline Rule1D halfline_gaussian_rule_above(double beta, int points_per_panel, int panels = 9) {
    Rule1D below = halfline_gaussian_rule(-beta, points_per_panel, panels);
    Rule1D r;
    r.nodes = -below.nodes.reverse();
    r.weights = below.weights.reverse();
    return r;
}

enum class RuleKind { TensorGaussHermite, MonteCarlo, HalfspaceTensor, SplitHalfspaceTensor };

/// Nodes and weights realizing integration of g against the n-dimensional
/// standard Gaussian over a region: integral ~ sum_i w_i g(x_i). For
/// whole-space rules the weights sum to 1; for region rules they sum to
/// the Gaussian measure of the region.
struct QuadratureRule {
    RuleKind kind = RuleKind::TensorGaussHermite;
    Matrix nodes;             // one node per row
    Eigen::VectorXd weights;  // positive
    std::uint64_t total_draws = 0;  // Monte Carlo only: draws before masking

    int dimension() const { return static_cast<int>(nodes.cols()); }
    int size() const { return static_cast<int>(nodes.rows()); }
    bool is_monte_carlo() const { return kind == RuleKind::MonteCarlo; }
};

namespace detail {

inline QuadratureRule tensor_product(const std::vector<Rule1D>& axes, RuleKind kind) {
    const int n = static_cast<int>(axes.size());
    std::uint64_t m = 1;
    for (const auto& ax : axes) m *= static_cast<std::uint64_t>(ax.nodes.size());
    QuadratureRule rule;
    rule.kind = kind;
    rule.nodes.resize(static_cast<Eigen::Index>(m), n);
    rule.weights.resize(static_cast<Eigen::Index>(m));
    std::vector<int> idx(n, 0);
    for (std::uint64_t i = 0; i < m; ++i) {
        double w = 1.0;
        for (int d = 0; d < n; ++d) {
            rule.nodes(static_cast<Eigen::Index>(i), d) = axes[d].nodes[idx[d]];
            w *= axes[d].weights[idx[d]];
        }
        rule.weights[static_cast<Eigen::Index>(i)] = w;
        for (int d = n - 1; d >= 0; --d) {
            if (++idx[d] < axes[d].nodes.size()) break;
            idx[d] = 0;
        }
    }
    return rule;
}

}  // namespace detail

/// Tensor Gauss-Hermite rule over R^n; exact for per-axis degree <= 2q-1.
inline QuadratureRule tensor_gauss_hermite(int n, int q,
                                           std::uint64_t node_budget = 1'000'000) {
    double requested = std::pow(static_cast<double>(q), n);
    if (requested > static_cast<double>(node_budget)) {
        throw NodeBudgetError(
            "tensor rule would need " + std::to_string(static_cast<std::uint64_t>(requested)) +
                " nodes (budget " + std::to_string(node_budget) +
                "); use a monte-carlo rule instead",
            static_cast<std::uint64_t>(requested), node_budget);
    }
    std::vector<Rule1D> axes(n, gauss_hermite_1d(q));
    return detail::tensor_product(axes, RuleKind::TensorGaussHermite);
}

/// Monte Carlo rule: `draws` standard Gaussian samples, weight 1/draws each.
inline QuadratureRule monte_carlo_rule(int n, int draws, GaussianSampler sampler) {
    QuadratureRule rule;
    rule.kind = RuleKind::MonteCarlo;
    rule.nodes.resize(draws, n);
    rule.weights = Eigen::VectorXd::Constant(draws, 1.0 / draws);
    rule.total_draws = static_cast<std::uint64_t>(draws);
    for (int i = 0; i < draws; ++i) {
        for (int d = 0; d < n; ++d) rule.nodes(i, d) = sampler.normal();
    }
    return rule;
}

/// Monte Carlo rule restricted to a region: nodes failing the predicate are
/// dropped, weights stay 1/draws, so sums estimate region integrals.
inline QuadratureRule masked_monte_carlo_rule(int n, int draws, GaussianSampler sampler,
                                              const std::function<bool(const Point&)>& inside) {
    QuadratureRule full = monte_carlo_rule(n, draws, sampler);
    std::vector<Eigen::Index> keep;
    keep.reserve(draws);
    for (Eigen::Index i = 0; i < full.nodes.rows(); ++i) {
        if (inside(full.nodes.row(i).transpose())) keep.push_back(i);
    }
    QuadratureRule rule;
    rule.kind = RuleKind::MonteCarlo;
    rule.total_draws = static_cast<std::uint64_t>(draws);
    rule.nodes.resize(static_cast<Eigen::Index>(keep.size()), n);
    rule.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(keep.size()), 1.0 / draws);
    for (std::size_t j = 0; j < keep.size(); ++j) rule.nodes.row(static_cast<Eigen::Index>(j)) = full.nodes.row(keep[j]);
    return rule;
}

/// Spec'd entry point: tensor-gauss-hermite or monte-carlo against the
/// n-dimensional standard Gaussian.
inline QuadratureRule build_quadrature(const TruncatedModel& model, RuleKind kind, int resolution,
                                       std::uint64_t node_budget = 1'000'000) {
    if (resolution < 1) throw std::invalid_argument("build_quadrature: resolution must be >= 1");
    switch (kind) {
        case RuleKind::TensorGaussHermite:
            return tensor_gauss_hermite(model.dimension(), resolution, node_budget);
        case RuleKind::MonteCarlo:
            return monte_carlo_rule(model.dimension(), resolution, model.sampler(/*stream=*/1));
        default:
            throw std::invalid_argument("build_quadrature: unsupported kind");
    }
}

/// Householder matrix Q with Q * e1 = direction (unit) and Q = Q^T.
inline Matrix rotation_to_axis(const Point& direction) {
    const int n = static_cast<int>(direction.size());
    Point u = direction / direction.norm();
    Point v = u;
    v[0] -= 1.0;
    const double vn2 = v.squaredNorm();
    if (vn2 < 1e-28) return Matrix::Identity(n, n);
    return Matrix::Identity(n, n) - (2.0 / vn2) * (v * v.transpose());
}

/// Product rule for Gaussian integrals over the halfspace {a.x <= c}:
/// half-line composite rule along a/|a|, Gauss-Hermite tangentially.
/// Exact boundary treatment; weights sum to the Gaussian mass of the halfspace.
inline QuadratureRule halfspace_rule(const Point& a, double c, int resolution,
                                     std::uint64_t node_budget = 1'000'000) {
    const int n = static_cast<int>(a.size());
    const double beta = c / a.norm();
    std::vector<Rule1D> axes;
    axes.push_back(halfline_gaussian_rule(beta, resolution));
    for (int d = 1; d < n; ++d) axes.push_back(gauss_hermite_1d(resolution));
    double requested = static_cast<double>(axes[0].nodes.size()) * std::pow(static_cast<double>(resolution), n - 1);
    if (requested > static_cast<double>(node_budget)) {
        throw NodeBudgetError("halfspace rule exceeds node budget",
                              static_cast<std::uint64_t>(requested), node_budget);
    }
    QuadratureRule rule = detail::tensor_product(axes, RuleKind::HalfspaceTensor);
    const Matrix q = rotation_to_axis(a);
    rule.nodes = rule.nodes * q.transpose();  // x = Q y, rows are nodes
    return rule;
}

/// Whole-space Gaussian rule with nodes split along the hyperplane
/// {a.x = c}: accurate for densities that are analytic on each side of the
/// hyperplane but only C^1 across it (halfspace penalization weights).
inline QuadratureRule split_halfspace_rule(const Point& a, double c, int resolution,
                                           std::uint64_t node_budget = 1'000'000) {
    const int n = static_cast<int>(a.size());
    const double beta = c / a.norm();
    Rule1D below = halfline_gaussian_rule(beta, resolution);
    Rule1D above = halfline_gaussian_rule_above(beta, resolution);
    Rule1D axis0;
    axis0.nodes.resize(below.nodes.size() + above.nodes.size());
    axis0.weights.resize(axis0.nodes.size());
    axis0.nodes << below.nodes, above.nodes;
    axis0.weights << below.weights, above.weights;
    std::vector<Rule1D> axes;
    axes.push_back(axis0);
    for (int d = 1; d < n; ++d) axes.push_back(gauss_hermite_1d(resolution));
    double requested = static_cast<double>(axis0.nodes.size()) * std::pow(static_cast<double>(resolution), n - 1);
    if (requested > static_cast<double>(node_budget)) {
        throw NodeBudgetError("split halfspace rule exceeds node budget",
                              static_cast<std::uint64_t>(requested), node_budget);
    }
    QuadratureRule rule = detail::tensor_product(axes, RuleKind::SplitHalfspaceTensor);
    const Matrix q = rotation_to_axis(a);
    rule.nodes = rule.nodes * q.transpose();
    return rule;
}

inline double integrate(const QuadratureRule& rule,
                        const std::function<double(const Point&)>& g) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        acc += rule.weights[i] * g(rule.nodes.row(i).transpose());
    }
    return acc;
}

struct MeanStderr {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Integral with a Monte Carlo standard error (zero for deterministic rules).
inline MeanStderr integrate_with_stderr(const QuadratureRule& rule,
                                        const std::function<double(const Point&)>& g) {
    MeanStderr out;
    if (!rule.is_monte_carlo()) {
        out.value = integrate(rule, g);
        return out;
    }
    // Masked nodes contribute zero, so E[Y^2] over all draws is the weighted
    // sum of g^2 over the kept nodes.
    const double n_draws = static_cast<double>(rule.total_draws);
    double mean = 0.0, second = 0.0;
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        const double gi = g(rule.nodes.row(i).transpose());
        mean += rule.weights[i] * gi;
        second += rule.weights[i] * gi * gi;
    }
    out.value = mean;
    const double var = std::max(0.0, second - mean * mean);
    out.stderr_ = std::sqrt(var / n_draws);
    return out;
}

}  // namespace gausslab
