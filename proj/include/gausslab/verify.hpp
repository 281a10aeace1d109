#pragma once

#include "gausslab/common.hpp"
#include "gausslab/domains.hpp"
#include "gausslab/hermite.hpp"
#include "gausslab/model.hpp"
#include "gausslab/potentials.hpp"
#include "gausslab/quadrature.hpp"
#include "gausslab/solver.hpp"
#include "gausslab/weights.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace gausslab {

/// Polar (n = 2) and spherical (n = 3) product rules for Gaussian integrals
/// over an ellipsoid region; the boundary is treated exactly and the
/// integrand is analytic in the parametrization, so convergence is spectral.
inline QuadratureRule ellipsoid_region_rule(const EllipsoidDomain& el, int resolution) {
    const Eigen::VectorXd& lam = el.axis_weights();
    const int n = static_cast<int>(lam.size());
    const double r = el.radius();
    QuadratureRule rule;
    rule.kind = RuleKind::TensorGaussHermite;
    if (n == 1) {
        const double a1 = r / std::sqrt(lam[0]);
        const Rule1D s = gauss_legendre_ab(std::max(8, 4 * resolution), -a1, a1);
        rule.nodes.resize(s.nodes.size(), 1);
        rule.weights.resize(s.nodes.size());
        for (Eigen::Index i = 0; i < s.nodes.size(); ++i) {
            rule.nodes(i, 0) = s.nodes[i];
            rule.weights[i] = s.weights[i] * gaussian_density_1d(s.nodes[i]);
        }
        return rule;
    }
    if (n == 2) {
        const double a1 = r / std::sqrt(lam[0]);
        const double a2 = r / std::sqrt(lam[1]);
        const Rule1D s = gauss_legendre_ab(resolution, 0.0, 1.0);
        const int m_th = 2 * resolution;
        rule.nodes.resize(s.nodes.size() * m_th, 2);
        rule.weights.resize(s.nodes.size() * m_th);
        Eigen::Index idx = 0;
        for (Eigen::Index i = 0; i < s.nodes.size(); ++i) {
            for (int j = 0; j < m_th; ++j) {
                const double th = 2.0 * pi * j / m_th;
                const Eigen::Vector2d x(s.nodes[i] * a1 * std::cos(th),
                                        s.nodes[i] * a2 * std::sin(th));
                rule.nodes.row(idx) = x.transpose();
                rule.weights[idx] = a1 * a2 * s.weights[i] * s.nodes[i] *
                                    std::exp(-0.5 * x.squaredNorm()) / m_th;
                ++idx;
            }
        }
        return rule;
    }
    if (n == 3) {
        const double a1 = r / std::sqrt(lam[0]);
        const double a2 = r / std::sqrt(lam[1]);
        const double a3 = r / std::sqrt(lam[2]);
        const Rule1D s = gauss_legendre_ab(resolution, 0.0, 1.0);
        const Rule1D th = gauss_legendre_ab(resolution, 0.0, pi);
        const int m_ph = 2 * resolution;
        rule.nodes.resize(s.nodes.size() * th.nodes.size() * m_ph, 3);
        rule.weights.resize(rule.nodes.rows());
        Eigen::Index idx = 0;
        for (Eigen::Index i = 0; i < s.nodes.size(); ++i) {
            for (Eigen::Index j = 0; j < th.nodes.size(); ++j) {
                for (int k = 0; k < m_ph; ++k) {
                    const double ph = 2.0 * pi * k / m_ph;
                    const Eigen::Vector3d x(
                        s.nodes[i] * a1 * std::sin(th.nodes[j]) * std::cos(ph),
                        s.nodes[i] * a2 * std::sin(th.nodes[j]) * std::sin(ph),
                        s.nodes[i] * a3 * std::cos(th.nodes[j]));
                    rule.nodes.row(idx) = x.transpose();
                    rule.weights[idx] = a1 * a2 * a3 * s.weights[i] * sqr(s.nodes[i]) *
                                        th.weights[j] * std::sin(th.nodes[j]) *
                                        std::exp(-0.5 * x.squaredNorm()) /
                                        (m_ph * std::sqrt(2.0 * pi));
                    ++idx;
                }
            }
        }
        return rule;
    }
    throw std::invalid_argument("ellipsoid_region_rule: n <= 3 only; use a monte-carlo rule");
}

/// Region-adapted Gaussian rule for a domain: rotated half-line product rule
/// for halfspaces, polar rules for ellipsoids in n <= 3, indicator-masked
/// rules otherwise. Weights sum to the Gaussian mass of the region.
inline QuadratureRule region_rule(const TruncatedModel& model, const ConvexDomain& domain,
                                  RuleKind kind, int resolution,
                                  std::uint64_t node_budget = 1'000'000,
                                  std::uint64_t mc_stream = 2) {
    if (domain.kind() == "none") return build_quadrature(model, kind, resolution, node_budget);
    if (domain.kind() == "halfspace" && kind == RuleKind::TensorGaussHermite) {
        const auto& hs = dynamic_cast<const HalfspaceDomain&>(domain);
        return halfspace_rule(hs.normal(), hs.level(), resolution, node_budget);
    }
    if (domain.kind() == "ellipsoid" && kind == RuleKind::TensorGaussHermite &&
        model.dimension() <= 3) {
        return ellipsoid_region_rule(dynamic_cast<const EllipsoidDomain&>(domain), resolution);
    }
    if (kind == RuleKind::MonteCarlo) {
        return masked_monte_carlo_rule(model.dimension(), resolution, model.sampler(mc_stream),
                                       [&](const Point& x) { return domain.contains(x); });
    }
    // Indicator-masked tensor rule: supported but inaccurate at the boundary.
    QuadratureRule rule = build_quadrature(model, kind, resolution, node_budget);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        if (domain.contains(rule.nodes.row(i).transpose())) keep.push_back(i);
    }
    QuadratureRule masked;
    masked.kind = rule.kind;
    masked.nodes.resize(static_cast<Eigen::Index>(keep.size()), rule.dimension());
    masked.weights.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        masked.nodes.row(static_cast<Eigen::Index>(j)) = rule.nodes.row(keep[j]);
        masked.weights[static_cast<Eigen::Index>(j)] = rule.weights[keep[j]];
    }
    return masked;
}

/// Whole-space rule for penalized solves; for halfspace domains the nodes
/// split along the boundary hyperplane where the penalty density has a kink.
inline QuadratureRule penalized_rule(const TruncatedModel& model, const ConvexDomain& domain,
                                     RuleKind kind, int resolution,
                                     std::uint64_t node_budget = 1'000'000,
                                     std::uint64_t mc_stream = 3) {
    if (domain.kind() == "halfspace" && kind == RuleKind::TensorGaussHermite) {
        const auto& hs = dynamic_cast<const HalfspaceDomain&>(domain);
        return split_halfspace_rule(hs.normal(), hs.level(), resolution, node_budget);
    }
    if (kind == RuleKind::MonteCarlo) {
        return monte_carlo_rule(model.dimension(), resolution, model.sampler(mc_stream));
    }
    return build_quadrature(model, kind, resolution, node_budget);
}

/// L^2(nu) norms of a solution and the data, with the constants of the
/// resolvent estimates: ratio_u = lambda ||u|| / ||f||,
/// ratio_grad = sqrt(lambda) ||grad u|| / ||f||,
/// ratio_hess = ||hess u|| / (sqrt(2) ||f||).
struct SobolevReport {
    double norm_u = 0.0, norm_grad = 0.0, norm_hess = 0.0, norm_f = 0.0;
    double ratio_u = 0.0, ratio_grad = 0.0, ratio_hess = 0.0;
    double stderr_u = 0.0, stderr_grad = 0.0, stderr_hess = 0.0, stderr_f = 0.0;
    double stderr_ratio_u = 0.0, stderr_ratio_grad = 0.0, stderr_ratio_hess = 0.0;
};

inline SobolevReport sobolev_report(const GalerkinSolution& sol, const ConvexPotential& log_weight,
                                    const ScalarField& f, const QuadratureRule& rule) {
    const double n_draws = rule.is_monte_carlo() ? static_cast<double>(rule.total_draws) : 0.0;
    double s_u = 0.0, s_g = 0.0, s_h = 0.0, s_f = 0.0;
    double q_u = 0.0, q_g = 0.0, q_h = 0.0, q_f = 0.0;  // second moments for MC stderr
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        const Point x = rule.nodes.row(i).transpose();
        const double w = rule.weights[i] * std::exp(-log_weight.value(x));
        const SolutionEval ev = sol.evaluate(x, 2);
        const double fu = ev.value * ev.value;
        const double fg = ev.grad.squaredNorm();
        const double fh = ev.hess.squaredNorm();
        const double ff = sqr(f(x));
        s_u += w * fu; s_g += w * fg; s_h += w * fh; s_f += w * ff;
        if (n_draws > 0.0) {
            const double e = std::exp(-log_weight.value(x));
            q_u += w * e * fu * fu; q_g += w * e * fg * fg;
            q_h += w * e * fh * fh; q_f += w * e * ff * ff;
        }
    }
    SobolevReport rep;
    rep.norm_u = std::sqrt(std::max(0.0, s_u));
    rep.norm_grad = std::sqrt(std::max(0.0, s_g));
    rep.norm_hess = std::sqrt(std::max(0.0, s_h));
    rep.norm_f = std::sqrt(std::max(0.0, s_f));
    const double lambda = sol.lambda;
    if (rep.norm_f > 0.0) {
        rep.ratio_u = lambda * rep.norm_u / rep.norm_f;
        rep.ratio_grad = std::sqrt(lambda) * rep.norm_grad / rep.norm_f;
        rep.ratio_hess = rep.norm_hess / (std::sqrt(2.0) * rep.norm_f);
    }
    if (n_draws > 0.0) {
        auto se_of_norm = [&](double s, double q, double norm) {
            const double var = std::max(0.0, q - s * s);
            const double se_sq = std::sqrt(var / n_draws);
            return norm > 0.0 ? se_sq / (2.0 * norm) : std::sqrt(se_sq);
        };
        rep.stderr_u = se_of_norm(s_u, q_u, rep.norm_u);
        rep.stderr_grad = se_of_norm(s_g, q_g, rep.norm_grad);
        rep.stderr_hess = se_of_norm(s_h, q_h, rep.norm_hess);
        rep.stderr_f = se_of_norm(s_f, q_f, rep.norm_f);
        auto ratio_se = [&](double ratio, double se_num, double norm_num) {
            if (ratio == 0.0 || rep.norm_f == 0.0 || norm_num == 0.0) return 0.0;
            const double rel = std::sqrt(sqr(se_num / norm_num) + sqr(rep.stderr_f / rep.norm_f));
            return ratio * rel;
        };
        rep.stderr_ratio_u = ratio_se(rep.ratio_u, rep.stderr_u, rep.norm_u);
        rep.stderr_ratio_grad = ratio_se(rep.ratio_grad, rep.stderr_grad, rep.norm_grad);
        rep.stderr_ratio_hess = ratio_se(rep.ratio_hess, rep.stderr_hess, rep.norm_hess);
    }
    return rep;
}

/// Rule realizing the Gaussian-weighted surface measure on G^{-1}(0):
/// rho = (2 pi)^{-n/2} e^{-|x|^2/2} H_{n-1} restricted to the boundary.
struct BoundaryRule {
    Matrix nodes;
    Eigen::VectorXd weights;
    std::string description;
};

inline BoundaryRule boundary_rule(const ConvexDomain& domain, int n, int resolution) {
    BoundaryRule br;
    if (domain.kind() == "halfspace") {
        const auto& hs = dynamic_cast<const HalfspaceDomain&>(domain);
        const double beta = hs.level() / hs.normal().norm();
        const double mass = gaussian_density_1d(beta);
        const Matrix q = rotation_to_axis(hs.normal());
        if (n == 1) {
            br.nodes.resize(1, 1);
            br.nodes(0, 0) = beta * (hs.normal()[0] > 0 ? 1.0 : -1.0);
            br.weights = Eigen::VectorXd::Constant(1, mass);
            br.description = "halfspace point mass";
            return br;
        }
        std::vector<Rule1D> axes(n - 1, gauss_hermite_1d(resolution));
        QuadratureRule tang = detail::tensor_product(axes, RuleKind::TensorGaussHermite);
        br.nodes.resize(tang.size(), n);
        br.weights.resize(tang.size());
        for (Eigen::Index i = 0; i < tang.size(); ++i) {
            Point y(n);
            y[0] = beta;
            y.tail(n - 1) = tang.nodes.row(i).transpose();
            br.nodes.row(i) = (q * y).transpose();
            br.weights[i] = mass * tang.weights[i];
        }
        br.description = "halfspace tangential Gauss-Hermite, q=" + std::to_string(resolution);
        return br;
    }
    if (domain.kind() == "ellipsoid") {
        const auto& el = dynamic_cast<const EllipsoidDomain&>(domain);
        const Eigen::VectorXd& lam = el.axis_weights();
        const double r = el.radius();
        if (n == 1) {
            const double p = r / std::sqrt(lam[0]);
            br.nodes.resize(2, 1);
            br.nodes(0, 0) = -p;
            br.nodes(1, 0) = p;
            br.weights.resize(2);
            br.weights[0] = gaussian_density_1d(-p);
            br.weights[1] = gaussian_density_1d(p);
            br.description = "interval endpoints";
            return br;
        }
        if (n == 2) {
            const int m = std::max(8, resolution);
            br.nodes.resize(m, 2);
            br.weights.resize(m);
            const double a1 = r / std::sqrt(lam[0]);
            const double a2 = r / std::sqrt(lam[1]);
            for (int i = 0; i < m; ++i) {
                const double th = 2.0 * pi * i / m;
                const Eigen::Vector2d x(a1 * std::cos(th), a2 * std::sin(th));
                const double jac = std::hypot(a1 * std::sin(th), a2 * std::cos(th));
                br.nodes.row(i) = x.transpose();
                br.weights[i] = (2.0 * pi / m) * jac * std::exp(-0.5 * x.squaredNorm()) / (2.0 * pi);
            }
            br.description = "ellipse angular grid, m=" + std::to_string(m);
            return br;
        }
        if (n == 3) {
            const int m_theta = std::max(8, resolution);
            const int m_phi = 2 * m_theta;
            const Rule1D th_rule = gauss_legendre_ab(m_theta, 0.0, pi);
            br.nodes.resize(m_theta * m_phi, 3);
            br.weights.resize(m_theta * m_phi);
            const double a1 = r / std::sqrt(lam[0]);
            const double a2 = r / std::sqrt(lam[1]);
            const double a3 = r / std::sqrt(lam[2]);
            int idx = 0;
            for (int i = 0; i < m_theta; ++i) {
                const double th = th_rule.nodes[i];
                for (int j = 0; j < m_phi; ++j) {
                    const double ph = 2.0 * pi * j / m_phi;
                    const Eigen::Vector3d x(a1 * std::sin(th) * std::cos(ph),
                                            a2 * std::sin(th) * std::sin(ph), a3 * std::cos(th));
                    // cross product of the theta and phi tangent vectors
                    const Eigen::Vector3d xt(a1 * std::cos(th) * std::cos(ph),
                                             a2 * std::cos(th) * std::sin(ph), -a3 * std::sin(th));
                    const Eigen::Vector3d xp(-a1 * std::sin(th) * std::sin(ph),
                                             a2 * std::sin(th) * std::cos(ph), 0.0);
                    const double jac = xt.cross(xp).norm();
                    br.nodes.row(idx) = x.transpose();
                    br.weights[idx] = th_rule.weights[i] * (2.0 * pi / m_phi) * jac *
                                      std::exp(-0.5 * x.squaredNorm()) / std::pow(2.0 * pi, 1.5);
                    ++idx;
                }
            }
            br.description = "ellipsoid spherical grid";
            return br;
        }
        throw std::invalid_argument("boundary_rule: ellipsoid boundaries supported for n <= 3 only");
    }
    throw std::invalid_argument("boundary_rule: no boundary parametrization for domain kind '" +
                                domain.kind() + "'");
}

/// Weighted boundary L^2 norm of the conormal derivative <grad u, grad G/|grad G|>:
/// the executable form of the Neumann condition.
struct NeumannReport {
    double residual = 0.0;
    std::string boundary_rule_desc;
    std::vector<int> degrees;
    std::vector<double> degree_series;
};

inline double neumann_residual(const GalerkinSolution& sol, const ConvexDomain& domain,
                               const ConvexPotential& weight, int boundary_resolution) {
    const int n = sol.basis.dimension();
    const BoundaryRule br = boundary_rule(domain, n, boundary_resolution);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < br.nodes.rows(); ++i) {
        const Point x = br.nodes.row(i).transpose();
        const Point grad_g = domain.g_grad(x);
        const Point grad_u = sol.evaluate(x, 1).grad;
        const double conormal = grad_u.dot(grad_g) / grad_g.norm();
        acc += br.weights[i] * conormal * conormal * std::exp(-weight.value(x));
    }
    return std::sqrt(std::max(0.0, acc));
}

/// Both sides of the trace integration-by-parts identity for axis k (0-based):
/// lhs = int_Omega (d_k phi - phi d_k U - phi x_k) e^{-U} dgamma,
/// rhs = int_{G=0} phi (d_k G / |grad G|) e^{-U} drho.
struct IbpResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double stderr_lhs = 0.0;
};

inline IbpResult ibp_check(const ConvexPotential& weight, const ConvexDomain& domain,
                           const ScalarField& phi,
                           const std::function<Point(const Point&)>& phi_grad, int axis,
                           const QuadratureRule& rule, int boundary_resolution) {
    IbpResult out;
    const MeanStderr lhs = integrate_with_stderr(rule, [&](const Point& x) {
        const double p = phi(x);
        return (phi_grad(x)[axis] - p * weight.gradient(x)[axis] - p * x[axis]) *
               std::exp(-weight.value(x));
    });
    out.lhs = lhs.value;
    out.stderr_lhs = lhs.stderr_;
    const BoundaryRule br = boundary_rule(domain, rule.dimension(), boundary_resolution);
    double rhs = 0.0;
    for (Eigen::Index i = 0; i < br.nodes.rows(); ++i) {
        const Point x = br.nodes.row(i).transpose();
        const Point g = domain.g_grad(x);
        rhs += br.weights[i] * phi(x) * (g[axis] / g.norm()) * std::exp(-weight.value(x));
    }
    out.rhs = rhs;
    return out;
}

/// Partial sum of lambda_i^2 toward the closed-form limit 1/6, with the
/// integral tail bound 16 / (3 pi^4 (2K-1)^3).
struct LambdaSumReport {
    double partial = 0.0;
    double tail_bound = 0.0;
    double target = 1.0 / 6.0;
};

inline LambdaSumReport lambda_sum_check(int K) {
    if (K < 1) throw std::invalid_argument("lambda_sum_check: K must be >= 1");
    LambdaSumReport rep;
    for (int i = K; i >= 1; --i) {  // ascending magnitudes for a tighter sum
        rep.partial += sqr(4.0 / (sqr(pi) * sqr(2.0 * i - 1.0)));
    }
    rep.tail_bound = 16.0 / (3.0 * std::pow(pi, 4) * std::pow(2.0 * K - 1.0, 3));
    return rep;
}

struct SweepConfig {
    int degree = 12;
    RuleKind quad_kind = RuleKind::TensorGaussHermite;
    int resolution = 24;       // tensor points per axis / per panel, or MC draws
    bool exact_weight_mode = false;
    int threads = 1;
    std::uint64_t node_budget = 1'000'000;
};

/// Penalization limit experiment: solve the whole-space problems with the
/// densities e^{-V_alpha} and track the L^2(Omega, nu) distance to the
/// direct domain solution as alpha decreases.
struct PenalizationSweep {
    std::vector<double> alphas;
    std::vector<double> distances;
    std::vector<SobolevReport> reports;
    GalerkinSolution direct_solution;
};

inline PenalizationSweep penalization_sweep(const TruncatedModel& model,
                                            std::shared_ptr<const ConvexPotential> weight,
                                            std::shared_ptr<const ConvexDomain> domain,
                                            const ScalarField& f, double lambda,
                                            const std::vector<double>& alphas,
                                            const SweepConfig& cfg = {}) {
    for (std::size_t i = 0; i + 1 < alphas.size(); ++i) {
        if (!(alphas[i] > alphas[i + 1])) {
            throw std::invalid_argument("penalization_sweep: alphas must be strictly decreasing");
        }
    }
    if (!alphas.empty() && alphas.back() <= 0.0) {
        throw std::invalid_argument("penalization_sweep: alphas must be positive");
    }
    const HermiteBasis basis(model.dimension(), cfg.degree);
    const QuadratureRule domain_rule =
        region_rule(model, *domain, cfg.quad_kind, cfg.resolution, cfg.node_budget);
    const GalerkinSystem direct_sys =
        assemble(basis, *weight, f, lambda, domain_rule, domain.get(), cfg.threads);
    GalerkinSolution direct = solve(direct_sys, basis);

    PenalizationSweep sweep{alphas, {}, {}, direct};
    const QuadratureRule whole_rule =
        penalized_rule(model, *domain, cfg.quad_kind, cfg.resolution, cfg.node_budget);
    for (double alpha : alphas) {
        PenalizedPotential v_alpha(weight, domain, alpha, cfg.exact_weight_mode);
        const GalerkinSystem sys =
            assemble(basis, v_alpha, f, lambda, whole_rule, nullptr, cfg.threads);
        GalerkinSolution sol = solve(sys, basis);
        double dist_sq = 0.0;
        for (Eigen::Index i = 0; i < domain_rule.size(); ++i) {
            const Point x = domain_rule.nodes.row(i).transpose();
            const double diff = sol.evaluate(x, 0).value - direct.evaluate(x, 0).value;
            dist_sq += domain_rule.weights[i] * std::exp(-weight->value(x)) * diff * diff;
        }
        sweep.distances.push_back(std::sqrt(std::max(0.0, dist_sq)));
        sweep.reports.push_back(sobolev_report(sol, v_alpha, f, whole_rule));
    }
    return sweep;
}

}  // namespace gausslab
