#pragma once

#include "gausslab/common.hpp"
#include "gausslab/domains.hpp"
#include "gausslab/hermite.hpp"
#include "gausslab/model.hpp"
#include "gausslab/potentials.hpp"
#include "gausslab/quadrature.hpp"
#include "gausslab/solver.hpp"
#include "gausslab/weights.hpp"

#include <json.hpp>

#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace gausslab {

using nlohmann::json;

struct ModelConfig {
    int n = 4;
    std::uint64_t seed = 0;
};

struct DomainConfig {
    std::string kind = "none";  // none | halfspace | ellipsoid
    double c = 0.0;
    double r = 1.0;
    std::vector<std::pair<double, double>> sigma;  // (node, mass) pairs for halfspaces
    std::vector<double> a;                         // direct normal, overrides sigma
};

struct WeightConfig {
    std::string kind = "zero";  // zero | quadratic | u1 | u2
    std::string phi = "cosh";
    std::string psi = "square";
    std::vector<std::pair<double, double>> tau;
    GrowthBound growth{1.0, 1.0};
    int xi_nodes = 64;
};

struct RhsConfig {
    std::string kind = "hermite";  // hermite | constant
    std::vector<int> index = {1};
    double value = 1.0;
};

struct SolverConfig {
    int degree = 10;
    double lambda = 1.0;
    std::string mode = "domain-direct";  // domain-direct | whole-space-penalized
    std::string quad_kind = "tensor";    // tensor | monte-carlo
    int resolution = 20;
    double alpha = 0.1;
    bool exact_weight = false;
    std::uint64_t node_budget = 1'000'000;
};

struct VerifyBlockConfig {
    std::vector<double> alphas = {1.0, 0.3, 0.1, 0.03, 0.01};
    int boundary_resolution = 64;
    std::vector<int> degrees = {4, 8, 12};
    int identity_terms = 100;
    int probes = 100;
};

struct OutputConfig {
    std::string directory = "out";
};

struct RunConfig {
    ModelConfig model;
    DomainConfig domain;
    WeightConfig weight;
    RhsConfig rhs;
    SolverConfig solver;
    VerifyBlockConfig verify;
    OutputConfig output;
    int threads = 1;
};

namespace detail {

inline std::vector<std::pair<double, double>> parse_pairs(const json& j, const std::string& key,
                                                          std::vector<std::string>& issues) {
    std::vector<std::pair<double, double>> out;
    if (!j.is_array()) {
        issues.push_back(key + ": expected an array of [node, mass] pairs");
        return out;
    }
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            issues.push_back(key + ": each entry must be a [node, mass] pair");
            return out;
        }
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

template <typename T>
void read_field(const json& block, const char* key, const std::string& path, T& target,
                std::vector<std::string>& issues) {
    if (!block.contains(key)) return;
    try {
        target = block.at(key).get<T>();
    } catch (const json::exception&) {
        issues.push_back(path + ": invalid type");
    }
}

}  // namespace detail

/// Parses and validates a run configuration; every offending key is
/// reported at once through ValidationError.
inline RunConfig parse_config(const json& j) {
    std::vector<std::string> issues;
    RunConfig cfg;

    if (j.contains("model")) {
        const auto& m = j.at("model");
        detail::read_field(m, "n", "model.n", cfg.model.n, issues);
        detail::read_field(m, "seed", "model.seed", cfg.model.seed, issues);
    }
    if (cfg.model.n < 1) issues.push_back("model.n: must be >= 1");

    if (j.contains("domain")) {
        const auto& d = j.at("domain");
        detail::read_field(d, "kind", "domain.kind", cfg.domain.kind, issues);
        detail::read_field(d, "c", "domain.c", cfg.domain.c, issues);
        detail::read_field(d, "r", "domain.r", cfg.domain.r, issues);
        detail::read_field(d, "a", "domain.a", cfg.domain.a, issues);
        if (d.contains("sigma")) cfg.domain.sigma = detail::parse_pairs(d.at("sigma"), "domain.sigma", issues);
    }
    if (cfg.domain.kind != "none" && cfg.domain.kind != "halfspace" &&
        cfg.domain.kind != "ellipsoid") {
        issues.push_back("domain.kind: unknown kind '" + cfg.domain.kind + "'");
    }
    if (cfg.domain.kind == "halfspace" && cfg.domain.a.empty() && cfg.domain.sigma.empty()) {
        issues.push_back("domain.a or domain.sigma: halfspace needs a normal");
    }
    if (cfg.domain.kind == "ellipsoid" && cfg.domain.r <= 0.0) {
        issues.push_back("domain.r: must be positive");
    }

    if (j.contains("weight")) {
        const auto& w = j.at("weight");
        detail::read_field(w, "kind", "weight.kind", cfg.weight.kind, issues);
        detail::read_field(w, "phi", "weight.phi", cfg.weight.phi, issues);
        detail::read_field(w, "psi", "weight.psi", cfg.weight.psi, issues);
        detail::read_field(w, "xi_nodes", "weight.xi_nodes", cfg.weight.xi_nodes, issues);
        if (w.contains("tau")) cfg.weight.tau = detail::parse_pairs(w.at("tau"), "weight.tau", issues);
        if (w.contains("growth")) {
            detail::read_field(w.at("growth"), "C", "weight.growth.C", cfg.weight.growth.C, issues);
            detail::read_field(w.at("growth"), "beta", "weight.growth.beta", cfg.weight.growth.beta,
                               issues);
        }
    }
    if (cfg.weight.kind != "zero" && cfg.weight.kind != "quadratic" && cfg.weight.kind != "u1" &&
        cfg.weight.kind != "u2") {
        issues.push_back("weight.kind: unknown kind '" + cfg.weight.kind + "'");
    }
    if (cfg.weight.kind == "u1" && cfg.weight.tau.empty()) {
        issues.push_back("weight.tau: u1 needs a (node, mass) list");
    }
    if (cfg.weight.kind == "u1" && cfg.weight.phi != "cosh" && cfg.weight.phi != "square" &&
        cfg.weight.phi != "softplus") {
        issues.push_back("weight.phi: unknown profile '" + cfg.weight.phi + "'");
    }
    if (cfg.weight.kind == "u2" && cfg.weight.psi != "square" && cfg.weight.psi != "cosh") {
        issues.push_back("weight.psi: unknown profile '" + cfg.weight.psi + "'");
    }
    if (cfg.weight.xi_nodes < 1) issues.push_back("weight.xi_nodes: must be >= 1");

    if (j.contains("rhs")) {
        const auto& r = j.at("rhs");
        detail::read_field(r, "kind", "rhs.kind", cfg.rhs.kind, issues);
        detail::read_field(r, "index", "rhs.index", cfg.rhs.index, issues);
        detail::read_field(r, "value", "rhs.value", cfg.rhs.value, issues);
    }
    if (cfg.rhs.kind != "hermite" && cfg.rhs.kind != "constant") {
        issues.push_back("rhs.kind: unknown kind '" + cfg.rhs.kind + "'");
    }

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        detail::read_field(s, "degree", "solver.degree", cfg.solver.degree, issues);
        detail::read_field(s, "lambda", "solver.lambda", cfg.solver.lambda, issues);
        detail::read_field(s, "mode", "solver.mode", cfg.solver.mode, issues);
        detail::read_field(s, "alpha", "solver.alpha", cfg.solver.alpha, issues);
        detail::read_field(s, "exact_weight", "solver.exact_weight", cfg.solver.exact_weight,
                           issues);
        detail::read_field(s, "node_budget", "solver.node_budget", cfg.solver.node_budget, issues);
        if (s.contains("quadrature")) {
            detail::read_field(s.at("quadrature"), "kind", "solver.quadrature.kind",
                               cfg.solver.quad_kind, issues);
            detail::read_field(s.at("quadrature"), "resolution", "solver.quadrature.resolution",
                               cfg.solver.resolution, issues);
        }
    }
    if (cfg.solver.lambda <= 0.0) issues.push_back("solver.lambda: must be positive");
    if (cfg.solver.degree < 0) issues.push_back("solver.degree: must be >= 0");
    if (cfg.solver.mode != "domain-direct" && cfg.solver.mode != "whole-space-penalized") {
        issues.push_back("solver.mode: unknown mode '" + cfg.solver.mode + "'");
    }
    if (cfg.solver.quad_kind != "tensor" && cfg.solver.quad_kind != "monte-carlo") {
        issues.push_back("solver.quadrature.kind: unknown kind '" + cfg.solver.quad_kind + "'");
    }
    if (cfg.solver.resolution < 1) issues.push_back("solver.quadrature.resolution: must be >= 1");
    if (cfg.solver.alpha <= 0.0) issues.push_back("solver.alpha: must be positive");

    if (j.contains("verify")) {
        const auto& v = j.at("verify");
        detail::read_field(v, "alphas", "verify.alphas", cfg.verify.alphas, issues);
        detail::read_field(v, "boundary_resolution", "verify.boundary_resolution",
                           cfg.verify.boundary_resolution, issues);
        detail::read_field(v, "degrees", "verify.degrees", cfg.verify.degrees, issues);
        detail::read_field(v, "identity_terms", "verify.identity_terms",
                           cfg.verify.identity_terms, issues);
        detail::read_field(v, "probes", "verify.probes", cfg.verify.probes, issues);
    }
    for (std::size_t i = 0; i + 1 < cfg.verify.alphas.size(); ++i) {
        if (!(cfg.verify.alphas[i] > cfg.verify.alphas[i + 1])) {
            issues.push_back("verify.alphas: must be strictly decreasing");
            break;
        }
    }
    if (!cfg.verify.alphas.empty() && cfg.verify.alphas.back() <= 0.0) {
        issues.push_back("verify.alphas: must be positive");
    }
    if (cfg.verify.identity_terms < 1) issues.push_back("verify.identity_terms: must be >= 1");

    if (j.contains("output")) {
        detail::read_field(j.at("output"), "directory", "output.directory",
                           cfg.output.directory, issues);
    }

    if (!issues.empty()) throw ValidationError(issues);
    return cfg;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"config: cannot open '" + path + "'"});
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError({std::string("config: JSON parse error: ") + e.what()});
    }
}

/// Applies a dotted-path override such as "solver.lambda=2.5"; the value is
/// parsed as JSON when possible, otherwise kept as a string.
inline void apply_override(json& j, const std::string& entry) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
        throw ValidationError({"override '" + entry + "': expected key=value"});
    }
    const std::string path = entry.substr(0, eq);
    const std::string raw = entry.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw ValidationError({"override '" + entry + "': empty path segment"});
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

inline TruncatedModel make_model(const RunConfig& cfg) {
    return TruncatedModel(cfg.model.n, cfg.model.seed);
}

inline std::shared_ptr<const ConvexDomain> make_domain(const RunConfig& cfg,
                                                       const TruncatedModel& model) {
    if (cfg.domain.kind == "none") return std::make_shared<WholeSpaceDomain>(model.dimension());
    if (cfg.domain.kind == "halfspace") {
        if (!cfg.domain.a.empty()) {
            if (static_cast<int>(cfg.domain.a.size()) != model.dimension()) {
                throw ValidationError({"domain.a: length must equal model.n"});
            }
            Point a(model.dimension());
            for (int i = 0; i < model.dimension(); ++i) a[i] = cfg.domain.a[i];
            return std::make_shared<HalfspaceDomain>(std::move(a), cfg.domain.c);
        }
        return std::make_shared<HalfspaceDomain>(
            HalfspaceDomain::from_measure(model, cfg.domain.sigma, cfg.domain.c));
    }
    return std::make_shared<EllipsoidDomain>(EllipsoidDomain::from_model(model, cfg.domain.r));
}

inline std::shared_ptr<const ConvexPotential> make_weight(const RunConfig& cfg,
                                                          const TruncatedModel& model) {
    if (cfg.weight.kind == "zero") return std::make_shared<ZeroPotential>();
    if (cfg.weight.kind == "quadratic") return std::make_shared<QuadraticPotential>();
    if (cfg.weight.kind == "u1") {
        return std::make_shared<WeightU1>(model, phi_profile(cfg.weight.phi), cfg.weight.tau,
                                          cfg.weight.growth);
    }
    return std::make_shared<WeightU2>(model, psi_profile(cfg.weight.psi), cfg.weight.xi_nodes,
                                      cfg.weight.growth);
}

inline ScalarField make_rhs(const RunConfig& cfg, const TruncatedModel& model) {
    if (cfg.rhs.kind == "constant") {
        const double v = cfg.rhs.value;
        return [v](const Point&) { return v; };
    }
    std::vector<int> index = cfg.rhs.index;
    index.resize(model.dimension(), 0);
    return [index](const Point& x) {
        double prod = 1.0;
        for (std::size_t a = 0; a < index.size(); ++a) {
            prod *= hermite_orthonormal_1d(x[static_cast<Eigen::Index>(a)], index[a])[index[a]];
        }
        return prod;
    };
}

inline RuleKind parse_rule_kind(const std::string& kind) {
    return kind == "monte-carlo" ? RuleKind::MonteCarlo : RuleKind::TensorGaussHermite;
}

}  // namespace gausslab
