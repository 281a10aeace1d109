#pragma once

// Independent reference computations for the test suite. Everything here is
// deliberately written from scratch (no gausslab quadrature or solver code)
// so it can serve as an oracle for the library.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights on [a, b] by Newton iteration on the
/// Legendre recurrence (independent of the library's eigenvalue route).
inline Rule gauss_legendre(int q, double a, double b) {
    Rule r;
    r.nodes.resize(q);
    r.weights.resize(q);
    const double eps = 1e-15;
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < eps) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.nodes[i] = 0.5 * (b - a) * (-x) + 0.5 * (a + b);
        r.nodes[q - 1 - i] = 0.5 * (b - a) * x + 0.5 * (a + b);
        r.weights[i] = 0.5 * (b - a) * w;
        r.weights[q - 1 - i] = 0.5 * (b - a) * w;
    }
    return r;
}

inline double integrate_01(const std::function<double(double)>& f, int q = 64) {
    const Rule r = gauss_legendre(q, 0.0, 1.0);
    double acc = 0.0;
    for (int i = 0; i < q; ++i) acc += r.weights[i] * f(r.nodes[i]);
    return acc;
}

/// (2k-1)!! for the even Gaussian moments, 1 for k = 0.
inline double double_factorial_odd(int k) {
    double v = 1.0;
    for (int j = 2 * k - 1; j >= 1; j -= 2) v *= j;
    return v;
}

/// Gaussian moment E[x^p] for the standard normal.
inline double gaussian_moment(int p) {
    if (p % 2 == 1) return 0.0;
    return double_factorial_odd(p / 2);
}

/// Dense finite-difference solve of the 1-D half-line problem
///   lambda u - u'' + x u' = f   on [-L, 0]
/// with reflection (zero conormal derivative) at both ends; the weak
/// problem for the standard Gaussian on (-inf, 0] truncated at -L.
struct HalflineSolution {
    std::vector<double> grid;
    std::vector<double> values;

    double at(double x) const {
        if (x <= grid.front()) return values.front();
        if (x >= grid.back()) return values.back();
        const double h = grid[1] - grid[0];
        const auto j = static_cast<std::size_t>((x - grid.front()) / h);
        const std::size_t i = std::min(j, grid.size() - 2);
        const double t = (x - grid[i]) / h;
        return (1.0 - t) * values[i] + t * values[i + 1];
    }
};

inline HalflineSolution fd_halfline_solve(double lambda, const std::function<double(double)>& f,
                                          double length = 8.0, double h = 1e-3) {
    const int m = static_cast<int>(std::lround(length / h)) + 1;
    std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
    for (int i = 0; i < m; ++i) {
        const double x = -length + i * h;
        rhs[i] = f(x);
        if (i == 0 || i == m - 1) {
            // reflected ghost point: u_{i-1} = u_{i+1}; drift term vanishes
            // at x = 0 and is negligible at x = -L
            diag[i] = lambda + 2.0 / (h * h);
            if (i == 0) upper[i] = -2.0 / (h * h);
            else lower[i] = -2.0 / (h * h);
        } else {
            diag[i] = lambda + 2.0 / (h * h);
            lower[i] = -1.0 / (h * h) - x / (2.0 * h);
            upper[i] = -1.0 / (h * h) + x / (2.0 * h);
        }
    }
    // Thomas algorithm
    std::vector<double> c(m, 0.0), d(m, 0.0);
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (int i = 1; i < m; ++i) {
        const double denom = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    HalflineSolution sol;
    sol.values.assign(m, 0.0);
    sol.grid.resize(m);
    sol.values[m - 1] = d[m - 1];
    for (int i = m - 2; i >= 0; --i) sol.values[i] = d[i] - c[i] * sol.values[i + 1];
    for (int i = 0; i < m; ++i) sol.grid[i] = -length + i * h;
    return sol;
}

/// Dense grid search for the Moreau-Yosida inner problem
/// min_h U(x + h) + |h|^2 / (2 alpha), n <= 2.
struct GridSearchResult {
    Eigen::VectorXd minimizer;
    double value = 0.0;
};

inline GridSearchResult prox_grid_search(const std::function<double(const Eigen::VectorXd&)>& u,
                                         const Eigen::VectorXd& x, double alpha,
                                         const Eigen::VectorXd& center, double radius = 5.0,
                                         double step = 1e-3) {
    const int n = static_cast<int>(x.size());
    if (n > 2) throw std::invalid_argument("prox_grid_search: n <= 2 only");
    const int half = static_cast<int>(std::lround(radius / step));
    GridSearchResult best;
    best.value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd h(n);
    if (n == 1) {
        for (int i = -half; i <= half; ++i) {
            h[0] = center[0] + i * step;
            const double v = u(x + h) + h.squaredNorm() / (2.0 * alpha);
            if (v < best.value) {
                best.value = v;
                best.minimizer = h;
            }
        }
        return best;
    }
    for (int i = -half; i <= half; ++i) {
        h[0] = center[0] + i * step;
        for (int j = -half; j <= half; ++j) {
            h[1] = center[1] + j * step;
            const double v = u(x + h) + h.squaredNorm() / (2.0 * alpha);
            if (v < best.value) {
                best.value = v;
                best.minimizer = h;
            }
        }
    }
    return best;
}

inline double central_diff(const std::function<double(double)>& g, double x, double step = 1e-5) {
    return (g(x + step) - g(x - step)) / (2.0 * step);
}

}  // namespace oracles
