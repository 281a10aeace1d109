#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gausslab {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double pi = 3.14159265358979323846;

/// Thrown when an iterative routine exhausts its budget; carries the best
/// iterate seen so it can be inspected or reported.
class IterationLimitError : public std::runtime_error {
public:
    IterationLimitError(const std::string& what, Point best, double residual)
        : std::runtime_error(what), best_iterate(std::move(best)), residual(residual) {}

    Point best_iterate;
    double residual;
};

/// Thrown when a tensor rule would exceed the configured node budget.
class NodeBudgetError : public std::runtime_error {
public:
    NodeBudgetError(const std::string& what, std::uint64_t requested, std::uint64_t budget)
        : std::runtime_error(what), requested(requested), budget(budget) {}

    std::uint64_t requested;
    std::uint64_t budget;
};

/// Input/schema validation failure; lists every offending key at once.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues(std::move(issues)) {}

    std::vector<std::string> issues;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "validation failed:";
        for (const auto& e : v) {
            s += "\n  - " + e;
        }
        return s;
    }
};

inline double sqr(double x) { return x * x; }

}  // namespace gausslab
