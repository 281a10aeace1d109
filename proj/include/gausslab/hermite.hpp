#pragma once

#include "gausslab/common.hpp"

#include <string>
#include <vector>

namespace gausslab {

/// Orthonormal probabilists' Hermite values h_0..h_d at x:
/// h_0 = 1, h_1 = x, sqrt(k+1) h_{k+1} = x h_k - sqrt(k) h_{k-1}.
/// Orthonormal against the standard Gaussian; h_k' = sqrt(k) h_{k-1}.
inline Eigen::VectorXd hermite_orthonormal_1d(double x, int degree) {
    Eigen::VectorXd h(degree + 1);
    h[0] = 1.0;
    if (degree >= 1) h[1] = x;
    for (int k = 1; k < degree; ++k) {
        h[k + 1] = (x * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) /
                   std::sqrt(static_cast<double>(k + 1));
    }
    return h;
}

struct SolutionEval {
    double value = 0.0;
    Point grad;
    Matrix hess;
};

/// Tensor-product Hermite basis with a total-degree cap; the discrete
/// stand-in for cylindrical test functions. Basis size is C(n + d, d).
class HermiteBasis {
public:
    HermiteBasis() : HermiteBasis(1, 0) {}

    HermiteBasis(int n, int degree) : n_(n), degree_(degree) {
        if (n < 1 || degree < 0) throw std::invalid_argument("HermiteBasis: bad n or degree");
        std::vector<int> idx(n, 0);
        for (int total = 0; total <= degree; ++total) emit(idx, 0, total);
    }

    int dimension() const { return n_; }
    int degree() const { return degree_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const std::vector<int>& index(int i) const { return indices_[i]; }
    const std::vector<std::vector<int>>& indices() const { return indices_; }

    std::string index_label(int i) const {
        std::string s = "(";
        for (int d = 0; d < n_; ++d) {
            if (d) s += " ";
            s += std::to_string(indices_[i][d]);
        }
        return s + ")";
    }

    /// Position of a multi-index in the basis ordering, or -1.
    int find(const std::vector<int>& k) const {
        for (int i = 0; i < size(); ++i) {
            if (indices_[i] == k) return i;
        }
        return -1;
    }

    /// Per-axis value/derivative tables at a point; rows are degrees 0..d.
    void tabulate(const Point& x, Matrix& h, Matrix& d1, Matrix& d2) const {
        h.resize(degree_ + 1, n_);
        d1.resize(degree_ + 1, n_);
        d2.resize(degree_ + 1, n_);
        for (int a = 0; a < n_; ++a) {
            h.col(a) = hermite_orthonormal_1d(x[a], degree_);
            for (int k = 0; k <= degree_; ++k) {
                d1(k, a) = k >= 1 ? std::sqrt(static_cast<double>(k)) * h(k - 1, a) : 0.0;
                d2(k, a) = k >= 2 ? std::sqrt(static_cast<double>(k) * (k - 1)) * h(k - 2, a) : 0.0;
            }
        }
    }

    /// Values and gradients of every basis function from point tables.
    void values_and_grads(const Matrix& h, const Matrix& d1, Eigen::VectorXd& vals,
                          Matrix& grads) const {
        const int m = size();
        vals.resize(m);
        grads.resize(m, n_);
        for (int i = 0; i < m; ++i) {
            const auto& k = indices_[i];
            double prod = 1.0;
            for (int a = 0; a < n_; ++a) prod *= h(k[a], a);
            vals[i] = prod;
            for (int a = 0; a < n_; ++a) {
                double g = d1(k[a], a);
                for (int b = 0; b < n_; ++b) {
                    if (b != a) g *= h(k[b], b);
                }
                grads(i, a) = g;
            }
        }
    }

    double eval_index(const std::vector<int>& k, const Point& x) const {
        double prod = 1.0;
        for (int a = 0; a < n_; ++a) prod *= hermite_orthonormal_1d(x[a], k[a])[k[a]];
        return prod;
    }

    /// u, grad u, hess u at x for a coefficient vector over this basis.
    SolutionEval evaluate(const Eigen::VectorXd& coeffs, const Point& x, int order = 2) const {
        if (coeffs.size() != size()) throw std::invalid_argument("evaluate: coefficient size mismatch");
        Matrix h, d1, d2;
        tabulate(x, h, d1, d2);
        SolutionEval out;
        out.grad = Point::Zero(n_);
        if (order >= 2) out.hess = Matrix::Zero(n_, n_);
        for (int i = 0; i < size(); ++i) {
            const double c = coeffs[i];
            if (c == 0.0) continue;
            const auto& k = indices_[i];
            double prod = 1.0;
            for (int a = 0; a < n_; ++a) prod *= h(k[a], a);
            out.value += c * prod;
            if (order < 1) continue;
            for (int a = 0; a < n_; ++a) {
                double g = d1(k[a], a);
                for (int b = 0; b < n_; ++b) {
                    if (b != a) g *= h(k[b], b);
                }
                out.grad[a] += c * g;
                if (order < 2) continue;
                for (int b = a; b < n_; ++b) {
                    double s;
                    if (a == b) {
                        s = d2(k[a], a);
                        for (int t = 0; t < n_; ++t) {
                            if (t != a) s *= h(k[t], t);
                        }
                    } else {
                        s = d1(k[a], a) * d1(k[b], b);
                        for (int t = 0; t < n_; ++t) {
                            if (t != a && t != b) s *= h(k[t], t);
                        }
                    }
                    out.hess(a, b) += c * s;
                }
            }
        }
        if (order >= 2) out.hess = out.hess.selfadjointView<Eigen::Upper>();
        return out;
    }

private:
    void emit(std::vector<int>& idx, int axis, int remaining) {
        if (axis == n_ - 1) {
            idx[axis] = remaining;
            indices_.push_back(idx);
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            idx[axis] = k;
            emit(idx, axis + 1, remaining - k);
        }
    }

    int n_;
    int degree_;
    std::vector<std::vector<int>> indices_;
};

}  // namespace gausslab
