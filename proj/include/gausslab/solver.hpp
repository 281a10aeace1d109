#pragma once

#include "gausslab/common.hpp"
#include "gausslab/domains.hpp"
#include "gausslab/hermite.hpp"
#include "gausslab/potentials.hpp"
#include "gausslab/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <functional>
#include <future>
#include <string>
#include <vector>

namespace gausslab {

using ScalarField = std::function<double(const Point&)>;

/// Discrete weak form of lambda u - L u = f against the density e^{-V}:
/// stiffness A_kl = int <grad phi_k, grad phi_l> e^{-V} dgamma,
/// mass M_kl = int phi_k phi_l e^{-V} dgamma, rhs b_k = int f phi_k e^{-V} dgamma.
struct GalerkinSystem {
    Matrix stiffness;
    Matrix mass;
    Eigen::VectorXd rhs;
    double lambda = 1.0;
    std::string weight_kind;
};

struct GalerkinSolution {
    Eigen::VectorXd coeffs;
    HermiteBasis basis;
    double lambda = 1.0;
    double solve_residual = 0.0;
    double condition_estimate = 0.0;

    SolutionEval evaluate(const Point& x, int order = 2) const {
        return basis.evaluate(coeffs, x, order);
    }
};

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct AssemblyPartial {
    Matrix mass;
    Matrix stiffness;
    Eigen::VectorXd rhs;
};

inline AssemblyPartial assemble_chunk(const HermiteBasis& basis, const ConvexPotential& log_weight,
                                      const ScalarField& f, const QuadratureRule& rule,
                                      const ConvexDomain* domain, Eigen::Index begin,
                                      Eigen::Index end) {
    const int m = basis.size();
    AssemblyPartial part{Matrix::Zero(m, m), Matrix::Zero(m, m), Eigen::VectorXd::Zero(m)};
    Matrix h, d1, d2;
    Eigen::VectorXd vals;
    Matrix grads;
    for (Eigen::Index i = begin; i < end; ++i) {
        const Point x = rule.nodes.row(i).transpose();
        if (domain != nullptr && !domain->contains(x)) continue;
        const double w = rule.weights[i] * std::exp(-log_weight.value(x));
        if (!std::isfinite(w)) {
            throw std::domain_error("assemble: non-finite weight at node " + std::to_string(i));
        }
        if (w == 0.0) continue;
        const double fx = f(x);
        if (!std::isfinite(fx)) {
            throw std::domain_error("assemble: non-finite rhs integrand at node " + std::to_string(i));
        }
        basis.tabulate(x, h, d1, d2);
        basis.values_and_grads(h, d1, vals, grads);
        part.mass.selfadjointView<Eigen::Lower>().rankUpdate(vals, w);
        for (int a = 0; a < basis.dimension(); ++a) {
            part.stiffness.selfadjointView<Eigen::Lower>().rankUpdate(grads.col(a), w);
        }
        part.rhs.noalias() += (w * fx) * vals;
    }
    return part;
}

}  // namespace detail

/// Assembles the Galerkin system over a quadrature rule. Nodes are processed
/// in fixed chunks combined in chunk order, so the result is bit-stable for
/// any thread count. An optional domain masks nodes by the indicator of
/// {G <= 0}; region-adapted rules already restrict their nodes.
inline GalerkinSystem assemble(const HermiteBasis& basis, const ConvexPotential& log_weight,
                               const ScalarField& f, double lambda, const QuadratureRule& rule,
                               const ConvexDomain* domain = nullptr, int threads = 1) {
    if (lambda <= 0.0) throw std::invalid_argument("assemble: lambda must be positive");
    if (rule.dimension() != basis.dimension()) {
        throw std::invalid_argument("assemble: rule dimension does not match basis");
    }
    const Eigen::Index m = rule.size();
    const Eigen::Index chunk_count = std::max<Eigen::Index>(1, std::min<Eigen::Index>(64, m / 2048));
    const Eigen::Index chunk_size = (m + chunk_count - 1) / chunk_count;

    detail::AssemblyPartial total{Matrix::Zero(basis.size(), basis.size()),
                                  Matrix::Zero(basis.size(), basis.size()),
                                  Eigen::VectorXd::Zero(basis.size())};
    if (threads <= 1) {
        for (Eigen::Index c = 0; c < chunk_count; ++c) {
            const Eigen::Index begin = c * chunk_size;
            const Eigen::Index end = std::min(m, begin + chunk_size);
            auto part = detail::assemble_chunk(basis, log_weight, f, rule, domain, begin, end);
            total.mass += part.mass;
            total.stiffness += part.stiffness;
            total.rhs += part.rhs;
        }
    } else {
        std::vector<std::future<detail::AssemblyPartial>> pending;
        Eigen::Index next = 0;
        Eigen::Index joined = 0;
        while (joined < chunk_count) {
            while (next < chunk_count && static_cast<int>(pending.size()) < threads) {
                const Eigen::Index begin = next * chunk_size;
                const Eigen::Index end = std::min(m, begin + chunk_size);
                pending.push_back(std::async(std::launch::async, [&, begin, end] {
                    return detail::assemble_chunk(basis, log_weight, f, rule, domain, begin, end);
                }));
                ++next;
            }
            auto part = pending.front().get();  // join in chunk order
            pending.erase(pending.begin());
            total.mass += part.mass;
            total.stiffness += part.stiffness;
            total.rhs += part.rhs;
            ++joined;
        }
    }

    GalerkinSystem sys;
    sys.mass = total.mass.selfadjointView<Eigen::Lower>();
    sys.stiffness = total.stiffness.selfadjointView<Eigen::Lower>();
    sys.rhs = total.rhs;
    sys.lambda = lambda;

    const Matrix k = lambda * sys.mass + sys.stiffness;
    const Eigen::VectorXd d = Eigen::LDLT<Matrix>(k).vectorD();
    if (d.minCoeff() < -1e-8 * std::max(1.0, d.maxCoeff())) {
        throw AssemblyError("assemble: lambda M + A is indefinite");
    }
    return sys;
}

/// Solves (lambda M + A) c = b by Cholesky with iterative refinement for
/// systems up to 5000 unknowns, diagonally preconditioned CG beyond.
inline GalerkinSolution solve(const GalerkinSystem& sys, const HermiteBasis& basis) {
    const Matrix k = sys.lambda * sys.mass + sys.stiffness;
    const double bnorm = sys.rhs.norm();
    GalerkinSolution sol{Eigen::VectorXd(), basis, sys.lambda, 0.0, 0.0};

    if (k.rows() <= 5000) {
        Eigen::LLT<Matrix> llt(k);
        if (llt.info() == Eigen::Success) {
            sol.coeffs = llt.solve(sys.rhs);
            for (int pass = 0; pass < 6; ++pass) {
                const Eigen::VectorXd r = sys.rhs - k * sol.coeffs;
                const double rel = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
                if (rel <= 1e-10) break;
                sol.coeffs += llt.solve(r);
            }
            sol.condition_estimate = 1.0 / std::max(llt.rcond(), 1e-300);
        } else {
            // Bases restricted to a subdomain can be numerically dependent;
            // solve on the numerically resolvable eigenspace of lambda M + A.
            // This is still a conforming Galerkin solve in a smaller subspace.
            Eigen::SelfAdjointEigenSolver<Matrix> es(k);
            if (es.info() != Eigen::Success) {
                throw AssemblyError("solve: factorization failed; diagonal range [" +
                                    std::to_string(k.diagonal().minCoeff()) + ", " +
                                    std::to_string(k.diagonal().maxCoeff()) + "]");
            }
            const Eigen::VectorXd& ev = es.eigenvalues();
            const double cutoff = 1e-13 * ev.maxCoeff();
            if (ev.minCoeff() < -cutoff) {
                throw AssemblyError("solve: lambda M + A is indefinite (min eigenvalue " +
                                    std::to_string(ev.minCoeff()) + ")");
            }
            Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
            for (Eigen::Index i = 0; i < ev.size(); ++i) {
                if (ev[i] > cutoff) inv[i] = 1.0 / ev[i];
            }
            sol.coeffs = es.eigenvectors() * inv.asDiagonal() *
                         (es.eigenvectors().transpose() * sys.rhs);
            sol.condition_estimate = ev.maxCoeff() / cutoff;
        }
    } else {
        Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(1e-12);
        cg.compute(k);
        sol.coeffs = cg.solve(sys.rhs);
        sol.condition_estimate = 0.0;
    }
    const Eigen::VectorXd r = sys.rhs - k * sol.coeffs;
    sol.solve_residual = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
    return sol;
}

/// The weighted Ornstein-Uhlenbeck operator applied pointwise:
/// L psi = trace(hess psi) - <x + grad V(x), grad psi>.
inline double apply_operator(const ConvexPotential& log_weight, const SolutionEval& psi,
                             const Point& x) {
    return psi.hess.trace() - (x + log_weight.gradient(x)).dot(psi.grad);
}

inline double apply_operator(const ConvexPotential& log_weight, const GalerkinSolution& sol,
                             const Point& x) {
    return apply_operator(log_weight, sol.evaluate(x, 2), x);
}

/// || lambda u - L u - f || in L^2 of the rule measure times e^{-V}.
inline double strong_residual(const GalerkinSolution& sol, const ConvexPotential& log_weight,
                              const ScalarField& f, const QuadratureRule& rule) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        const Point x = rule.nodes.row(i).transpose();
        const SolutionEval ev = sol.evaluate(x, 2);
        const double lu = apply_operator(log_weight, ev, x);
        const double r = sol.lambda * ev.value - lu - f(x);
        acc += rule.weights[i] * std::exp(-log_weight.value(x)) * r * r;
    }
    return std::sqrt(acc);
}

}  // namespace gausslab
