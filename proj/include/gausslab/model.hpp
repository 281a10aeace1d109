#pragma once

#include "gausslab/common.hpp"
#include "gausslab/rng.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace gausslab {

/// Finite-dimensional truncation of the classical Wiener space.
///
/// Coordinates are taken with respect to the orthonormal Cameron-Martin
/// basis {sqrt(lambda_k) e_k}, so the coordinate law is the standard
/// Gaussian on R^n, the H inner product is the Euclidean one, and the
/// k-th coordinate functional is x -> x_k.
class TruncatedModel {
public:
    explicit TruncatedModel(int n, std::uint64_t seed = 0) : n_(n), seed_(seed) {
        if (n < 1) throw std::invalid_argument("TruncatedModel: n must be >= 1");
        eigenvalues_.resize(n);
        for (int k = 1; k <= n; ++k) {
            eigenvalues_[k - 1] = 4.0 / (sqr(pi) * sqr(2.0 * k - 1.0));
        }
    }

    int dimension() const { return n_; }
    std::uint64_t seed() const { return seed_; }

    /// lambda_k = 4 / (pi^2 (2k-1)^2), 1-based k.
    double eigenvalue(int k) const {
        check_index(k);
        return eigenvalues_[k - 1];
    }

    double sqrt_eigenvalue(int k) const { return std::sqrt(eigenvalue(k)); }

    /// e_k(xi) = sqrt(2) sin(xi / sqrt(lambda_k)) on [0, 1], 1-based k.
    double basis_eval(int k, double xi) const {
        check_index(k);
        if (xi < 0.0 || xi > 1.0) throw std::out_of_range("basis_eval: xi outside [0, 1]");
        return std::sqrt(2.0) * std::sin(xi / std::sqrt(eigenvalues_[k - 1]));
    }

    /// Path value f(xi) = sum_k x_k sqrt(lambda_k) e_k(xi); f(0) = 0.
    double embed_path(const Point& x, double xi) const {
        if (x.size() != n_) throw std::invalid_argument("embed_path: coordinate size mismatch");
        double f = 0.0;
        for (int k = 1; k <= n_; ++k) {
            f += x[k - 1] * std::sqrt(eigenvalues_[k - 1]) * basis_eval(k, xi);
        }
        return f;
    }

    GaussianSampler sampler(std::uint64_t stream = 0) const { return GaussianSampler(seed_, stream); }

private:
    void check_index(int k) const {
        if (k < 1 || k > n_) {
            throw std::out_of_range("eigenvalue index k=" + std::to_string(k) +
                                    " outside [1, " + std::to_string(n_) + "]");
        }
    }

    int n_;
    std::uint64_t seed_;
    std::vector<double> eigenvalues_;
};

}  // namespace gausslab
