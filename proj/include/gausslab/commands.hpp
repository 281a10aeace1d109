#pragma once

#include "gausslab/config.hpp"
#include "gausslab/verify.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <array>
#include <map>
#include <string>
#include <vector>

namespace gausslab {

/// 17 significant digits: round-trip exact, so artifact diffs are byte-stable.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ContractCheck {
    std::string name;
    double observed = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string criterion;  // which acceptance criterion this maps onto
};

namespace detail {

class ArtifactWriter {
public:
    ArtifactWriter(std::string dir, std::string command)
        : dir_(std::move(dir)), command_(std::move(command)) {
        std::filesystem::create_directories(dir_);
    }

    void csv(const std::string& name, const std::string& header,
             const std::vector<std::vector<std::string>>& rows) const {
        std::ofstream out(dir_ + "/" + name, std::ios::binary);
        out << header << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ",";
                out << row[i];
            }
            out << "\n";
        }
    }

    void add(ContractCheck check) { checks_.push_back(std::move(check)); }

    void add(const std::string& name, double observed, double bound, const std::string& criterion,
             bool less_equal = true) {
        ContractCheck c{name, observed, bound, less_equal ? observed <= bound : observed >= bound,
                        criterion};
        checks_.push_back(std::move(c));
    }

    /// Writes summary.json and prints one line per check; returns the exit code.
    int finish() const {
        json summary;
        summary["command"] = command_;
        json checks = json::array();
        json violations = json::array();
        bool all_pass = true;
        for (const auto& c : checks_) {
            json e;
            e["name"] = c.name;
            e["observed"] = c.observed;
            e["bound"] = c.bound;
            e["pass"] = c.pass;
            e["criterion"] = c.criterion;
            checks.push_back(e);
            if (!c.pass) {
                all_pass = false;
                violations.push_back(c.name);
            }
            std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name
                      << " observed=" << fmt17(c.observed) << " bound=" << fmt17(c.bound) << "\n";
        }
        summary["checks"] = checks;
        summary["violations"] = violations;
        summary["pass"] = all_pass;
        std::ofstream out(dir_ + "/summary.json", std::ios::binary);
        out << summary.dump(2) << "\n";
        return all_pass ? 0 : 2;
    }

    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::string command_;
    std::vector<ContractCheck> checks_;
};

struct Problem {
    TruncatedModel model;
    std::shared_ptr<const ConvexDomain> domain;
    std::shared_ptr<const ConvexPotential> weight;
    ScalarField rhs;
};

inline Problem build_problem(const RunConfig& cfg) {
    TruncatedModel model = make_model(cfg);
    auto domain = make_domain(cfg, model);
    auto weight = make_weight(cfg, model);
    auto rhs = make_rhs(cfg, model);
    return Problem{std::move(model), std::move(domain), std::move(weight), std::move(rhs)};
}

struct SolveArtifacts {
    GalerkinSolution solution;
    SobolevReport report;
    QuadratureRule rule;
    std::shared_ptr<const ConvexPotential> log_weight;  // density actually used
};

inline SolveArtifacts run_solve_pipeline(const RunConfig& cfg, const Problem& prob) {
    const RuleKind kind = parse_rule_kind(cfg.solver.quad_kind);
    HermiteBasis basis(prob.model.dimension(), cfg.solver.degree);
    SolveArtifacts art;
    if (cfg.solver.mode == "whole-space-penalized") {
        art.rule = penalized_rule(prob.model, *prob.domain, kind, cfg.solver.resolution,
                                  cfg.solver.node_budget);
        art.log_weight = std::make_shared<PenalizedPotential>(prob.weight, prob.domain,
                                                              cfg.solver.alpha,
                                                              cfg.solver.exact_weight);
        const auto sys = assemble(basis, *art.log_weight, prob.rhs, cfg.solver.lambda, art.rule,
                                  nullptr, cfg.threads);
        art.solution = solve(sys, basis);
    } else {
        art.rule = region_rule(prob.model, *prob.domain, kind, cfg.solver.resolution,
                               cfg.solver.node_budget);
        art.log_weight = prob.weight;
        const auto sys = assemble(basis, *art.log_weight, prob.rhs, cfg.solver.lambda, art.rule,
                                  prob.domain.get(), cfg.threads);
        art.solution = solve(sys, basis);
    }
    art.report = sobolev_report(art.solution, *art.log_weight, prob.rhs, art.rule);
    return art;
}

}  // namespace detail

inline int run_solve(const RunConfig& cfg, detail::ArtifactWriter& out) {
    const auto prob = detail::build_problem(cfg);
    const auto art = detail::run_solve_pipeline(cfg, prob);

    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < art.solution.basis.size(); ++i) {
        rows.push_back({"\"" + art.solution.basis.index_label(i) + "\"",
                        fmt17(art.solution.coeffs[i])});
    }
    out.csv("solution.csv", "index,coefficient", rows);

    const auto& rep = art.report;
    out.csv("sobolev.csv",
            "norm_u,norm_grad,norm_hess,norm_f,ratio_u,ratio_grad,ratio_hess,stderr_u,stderr_grad,"
            "stderr_hess,stderr_f",
            {{fmt17(rep.norm_u), fmt17(rep.norm_grad), fmt17(rep.norm_hess), fmt17(rep.norm_f),
              fmt17(rep.ratio_u), fmt17(rep.ratio_grad), fmt17(rep.ratio_hess), fmt17(rep.stderr_u),
              fmt17(rep.stderr_grad), fmt17(rep.stderr_hess), fmt17(rep.stderr_f)}});

    const bool mc = art.rule.is_monte_carlo();
    const double tol_u = mc ? 3.0 * rep.stderr_ratio_u : 1e-8;
    const double tol_g = mc ? 3.0 * rep.stderr_ratio_grad : 1e-8;
    out.add("sobolev-ratio-u", rep.ratio_u, 1.0 + tol_u, "3");
    out.add("sobolev-ratio-grad", rep.ratio_grad, 1.0 + tol_g, "3");
    if (cfg.solver.degree >= 10) {
        out.add("sobolev-ratio-hess", rep.ratio_hess, 1.05, "3");
    }
    out.add("solve-residual", art.solution.solve_residual, 1e-10, "2");
    return out.finish();
}

inline int run_penalize_sweep(const RunConfig& cfg, detail::ArtifactWriter& out) {
    const auto prob = detail::build_problem(cfg);
    SweepConfig scfg;
    scfg.degree = cfg.solver.degree;
    scfg.quad_kind = parse_rule_kind(cfg.solver.quad_kind);
    scfg.resolution = cfg.solver.resolution;
    scfg.exact_weight_mode = cfg.solver.exact_weight;
    scfg.threads = cfg.threads;
    scfg.node_budget = cfg.solver.node_budget;
    const auto sweep = penalization_sweep(prob.model, prob.weight, prob.domain, prob.rhs,
                                          cfg.solver.lambda, cfg.verify.alphas, scfg);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < sweep.alphas.size(); ++i) {
        rows.push_back({fmt17(sweep.alphas[i]), fmt17(sweep.distances[i]),
                        fmt17(sweep.reports[i].ratio_u), fmt17(sweep.reports[i].ratio_grad),
                        fmt17(sweep.reports[i].ratio_hess)});
    }
    out.csv("sweep.csv", "alpha,distance,ratio_u,ratio_grad,ratio_hess", rows);

    double worst_increase = 0.0;
    for (std::size_t i = 0; i + 1 < sweep.distances.size(); ++i) {
        worst_increase = std::max(worst_increase, sweep.distances[i + 1] - sweep.distances[i]);
    }
    out.add("sweep-distances-nonincreasing", worst_increase, 0.0, "6");
    if (!sweep.distances.empty()) {
        out.add("sweep-last-below-first", sweep.distances.back(), sweep.distances.front(), "6");
    }
    return out.finish();
}

inline int run_prox_check(const RunConfig& cfg, detail::ArtifactWriter& out) {
    const auto prob = detail::build_problem(cfg);
    const auto& u = *prob.weight;
    const int n = prob.model.dimension();
    auto sampler = prob.model.sampler(11);
    const int probes = cfg.verify.probes;

    double worst_dominance = -1e300, worst_value_monotone = -1e300;
    double worst_grad_monotone = -1e300, worst_grad_vs_potential = -1e300;
    double worst_semigroup = 0.0, worst_fd = 0.0, worst_subdiff = 1e300;
    double worst_value_tail = 0.0, worst_grad_tail = 0.0;

    for (int rep = 0; rep < probes; ++rep) {
        const Point x = sampler.normal_vector(n);

        double alpha = 1.0;
        double prev_value = -1e300, prev_grad = -1e300;
        std::array<double, 3> tail_v{}, tail_g{};
        for (int level = 0; level <= 10; ++level) {
            const auto pr = prox(u, x, alpha);
            const double gn = pr.envelope_grad.norm();
            worst_dominance = std::max(worst_dominance, pr.envelope_value - u.value(x));
            worst_value_monotone = std::max(worst_value_monotone, prev_value - pr.envelope_value);
            worst_grad_monotone = std::max(worst_grad_monotone, prev_grad - gn);
            worst_grad_vs_potential = std::max(worst_grad_vs_potential, gn - u.gradient(x).norm());
            prev_value = pr.envelope_value;
            prev_grad = gn;
            tail_v = {tail_v[1], tail_v[2], pr.envelope_value};
            tail_g = {tail_g[1], tail_g[2], gn};
            alpha *= 0.5;
        }
        // extrapolated limits of the dyadic tails
        worst_value_tail = std::max(
            worst_value_tail, std::abs(dyadic_richardson_limit(tail_v[0], tail_v[1], tail_v[2]) - u.value(x)));
        worst_grad_tail = std::max(
            worst_grad_tail,
            std::abs(dyadic_richardson_limit(tail_g[0], tail_g[1], tail_g[2]) - u.gradient(x).norm()));

        const double a = 0.1 + sampler.uniform();
        const double b = 0.1 + sampler.uniform();
        const auto [lhs, rhs] = semigroup_check(u, x, a, b);
        worst_semigroup = std::max(worst_semigroup, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));

        const Point g = envelope_grad(u, x, a);
        for (int d = 0; d < n; ++d) {
            Point e = Point::Zero(n);
            e[d] = 1e-5;
            const double fd = (envelope_value(u, x + e, a) - envelope_value(u, x - e, a)) / 2e-5;
            worst_fd = std::max(worst_fd, std::abs(fd - g[d]) / (1.0 + std::abs(g[d])));
        }

        std::vector<Point> shift_probes;
        for (int i = 0; i < 20; ++i) shift_probes.push_back(sampler.normal_vector(n));
        worst_subdiff =
            std::min(worst_subdiff, subdifferential_inclusion_check(u, x, a, shift_probes));
    }

    out.add("prox-envelope-dominance", worst_dominance, 1e-10, "4");
    out.add("prox-value-monotone", worst_value_monotone, 1e-9, "4");
    out.add("prox-grad-monotone", worst_grad_monotone, 1e-8, "4");
    out.add("prox-grad-below-potential", worst_grad_vs_potential, 1e-8, "4");
    out.add("prox-value-limit", worst_value_tail, 1e-5, "4");
    out.add("prox-grad-limit", worst_grad_tail, 1e-6, "4");
    out.add("prox-semigroup", worst_semigroup, 1e-7, "4");
    out.add("prox-grad-fd", worst_fd, 1e-5, "4");
    out.add("prox-subdifferential", worst_subdiff, -1e-8, "4", /*less_equal=*/false);

    out.csv("checks.csv", "check,observed,bound",
            {{"prox-envelope-dominance", fmt17(worst_dominance), fmt17(1e-10)},
             {"prox-value-monotone", fmt17(worst_value_monotone), fmt17(1e-9)},
             {"prox-grad-monotone", fmt17(worst_grad_monotone), fmt17(1e-8)},
             {"prox-grad-below-potential", fmt17(worst_grad_vs_potential), fmt17(1e-8)},
             {"prox-value-limit", fmt17(worst_value_tail), fmt17(1e-5)},
             {"prox-grad-limit", fmt17(worst_grad_tail), fmt17(1e-6)},
             {"prox-semigroup", fmt17(worst_semigroup), fmt17(1e-7)},
             {"prox-grad-fd", fmt17(worst_fd), fmt17(1e-5)},
             {"prox-subdifferential", fmt17(worst_subdiff), fmt17(-1e-8)}});
    return out.finish();
}

inline int run_project_check(const RunConfig& cfg, detail::ArtifactWriter& out) {
    const auto prob = detail::build_problem(cfg);
    const auto& dom = *prob.domain;
    const int n = prob.model.dimension();
    auto sampler = prob.model.sampler(13);
    const int probes = cfg.verify.probes;

    double worst_vi = 0.0, worst_lip = 0.0, worst_monotone = 0.0, worst_fd = 0.0;
    double worst_idem = 0.0;
    for (int rep = 0; rep < probes; ++rep) {
        const Point x = 3.0 * sampler.normal_vector(n);
        const auto pr = project_checked(dom, x, sampler.split(rep), 64);
        worst_vi = std::min(worst_vi, pr.vi_residual);
        worst_idem = std::max(worst_idem, dom.project(pr.point).offset.norm());

        const Point h = sampler.normal_vector(n);
        const Point mh = dom.project(x + h).offset;
        worst_lip = std::max(worst_lip, (mh - pr.offset).norm() - h.norm());
        worst_monotone = std::min(worst_monotone, (mh - pr.offset).dot(h));

        const Point g = dom.grad_distance_sq(x);
        for (int d = 0; d < n; ++d) {
            Point e = Point::Zero(n);
            e[d] = 1e-5;
            const double fd = (dom.distance_sq(x + e) - dom.distance_sq(x - e)) / 2e-5;
            worst_fd = std::max(worst_fd, std::abs(fd - g[d]) / (1.0 + std::abs(g[d])));
        }
    }

    int membership_mismatches = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        const Point x = 2.0 * sampler.normal_vector(n);
        const bool member = dom.g_value(x) <= 0.0;
        const bool zero_dist = dom.distance_sq(x) == 0.0;
        if (member != zero_dist) ++membership_mismatches;
    }

    out.add("project-variational-inequality", worst_vi, -1e-9, "5", /*less_equal=*/false);
    out.add("project-idempotence", worst_idem, 1e-10, "5");
    out.add("project-lipschitz", worst_lip, 1e-8, "5");
    out.add("project-monotonicity", worst_monotone, -1e-9, "5", /*less_equal=*/false);
    out.add("project-grad-fd", worst_fd, 1e-6, "5");
    out.add("project-membership", membership_mismatches, 0.0, "5");

    out.csv("checks.csv", "check,observed,bound",
            {{"project-variational-inequality", fmt17(worst_vi), fmt17(-1e-9)},
             {"project-idempotence", fmt17(worst_idem), fmt17(1e-10)},
             {"project-lipschitz", fmt17(worst_lip), fmt17(1e-8)},
             {"project-monotonicity", fmt17(worst_monotone), fmt17(-1e-9)},
             {"project-grad-fd", fmt17(worst_fd), fmt17(1e-6)},
             {"project-membership", fmt17(membership_mismatches), fmt17(0.0)}});
    return out.finish();
}

inline int run_neumann_check(const RunConfig& cfg, detail::ArtifactWriter& out) {
    const auto prob = detail::build_problem(cfg);
    if (prob.domain->kind() == "none") {
        throw ValidationError({"domain.kind: neumann-check needs a domain with a boundary"});
    }
    const RuleKind kind = parse_rule_kind(cfg.solver.quad_kind);
    const auto rule = region_rule(prob.model, *prob.domain, kind, cfg.solver.resolution,
                                  cfg.solver.node_budget);

    std::vector<std::vector<std::string>> rows;
    std::vector<double> series;
    for (int d : cfg.verify.degrees) {
        HermiteBasis basis(prob.model.dimension(), d);
        const auto sys = assemble(basis, *prob.weight, prob.rhs, cfg.solver.lambda, rule,
                                  prob.domain.get(), cfg.threads);
        const auto sol = solve(sys, basis);
        const double res =
            neumann_residual(sol, *prob.domain, *prob.weight, cfg.verify.boundary_resolution);
        series.push_back(res);
        rows.push_back({std::to_string(d), fmt17(res)});
    }
    out.csv("neumann.csv", "degree,residual", rows);

    double worst_increase = 0.0;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        worst_increase = std::max(worst_increase, series[i + 1] - series[i]);
    }
    out.add("neumann-series-nonincreasing", worst_increase, 0.0, "7");
    if (series.size() >= 2) {
        out.add("neumann-final-reduction", series.back(), 0.25 * series.front(), "7");
    }
    return out.finish();
}

inline int run_ibp_check(const RunConfig& cfg, detail::ArtifactWriter& out) {
    const auto prob = detail::build_problem(cfg);
    if (prob.domain->kind() == "none") {
        throw ValidationError({"domain.kind: ibp-check needs a domain with a boundary"});
    }
    const RuleKind kind = parse_rule_kind(cfg.solver.quad_kind);
    const auto rule = region_rule(prob.model, *prob.domain, kind, cfg.solver.resolution,
                                  cfg.solver.node_budget);
    const int n = prob.model.dimension();
    HermiteBasis poly(n, 3);
    auto sampler = prob.model.sampler(29);

    std::vector<std::vector<std::string>> rows;
    double worst_margin = -1e300;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd c(poly.size());
        for (int i = 0; i < c.size(); ++i) c[i] = sampler.normal();
        GalerkinSolution phi{c, poly, 1.0, 0.0, 0.0};
        const int axis = rep % n;
        const auto res = ibp_check(
            *prob.weight, *prob.domain, [&](const Point& x) { return phi.evaluate(x, 0).value; },
            [&](const Point& x) { return phi.evaluate(x, 1).grad; }, axis, rule,
            cfg.verify.boundary_resolution);
        const double diff = std::abs(res.lhs - res.rhs);
        const double tol = std::max(1e-8, 3.0 * res.stderr_lhs);
        worst_margin = std::max(worst_margin, diff - tol);
        rows.push_back({std::to_string(rep), fmt17(res.lhs), fmt17(res.rhs), fmt17(diff),
                        fmt17(res.stderr_lhs)});
    }
    out.csv("ibp.csv", "config_id,lhs,rhs,abs_diff,stderr", rows);
    out.add("ibp-worst-margin", worst_margin, 0.0, "8");
    return out.finish();
}

inline int run_identities(const RunConfig& cfg, detail::ArtifactWriter& out) {
    const auto rep = lambda_sum_check(cfg.verify.identity_terms);
    const TruncatedModel model(1, cfg.model.seed);
    const double lambda1 = model.eigenvalue(1);

    out.csv("identities.csv", "K,partial_sum,tail_bound,target,lambda1",
            {{std::to_string(cfg.verify.identity_terms), fmt17(rep.partial), fmt17(rep.tail_bound),
              fmt17(rep.target), fmt17(lambda1)}});

    out.add("identity-lambda1", std::abs(lambda1 - 4.0 / (pi * pi)), 1e-12 * (4.0 / (pi * pi)),
            "1");
    out.add("identity-lambda-sq-sum", std::abs(rep.partial - rep.target), rep.tail_bound, "1");
    if (cfg.verify.identity_terms >= 100) {
        out.add("identity-lambda-sq-sum-6e7", std::abs(rep.partial - rep.target), 6e-7, "1");
    }
    return out.finish();
}

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"solve",         "penalize-sweep", "prox-check",
                                                "project-check", "neumann-check",  "ibp-check",
                                                "identities"};
    return names;
}

inline std::string command_help(const std::string& name) {
    static const std::map<std::string, std::string> help{
        {"solve", "assemble and solve one elliptic problem; emit solution and norm reports"},
        {"penalize-sweep", "solve penalized problems over the alpha grid and compare to the domain solve"},
        {"prox-check", "Moreau-Yosida property suite for the configured weight"},
        {"project-check", "projection property suite for the configured domain"},
        {"neumann-check", "boundary residual of domain solves across Galerkin degrees"},
        {"ibp-check", "volume-vs-boundary integration-by-parts identity on random polynomials"},
        {"identities", "closed-form eigenvalue identities of the path basis"}};
    return help.at(name);
}

inline int run_command(const std::string& command, const std::string& config_path,
                       const std::string& out_dir, int threads,
                       const std::vector<std::string>& overrides) {
    try {
        json j = load_json_file(config_path);
        for (const auto& o : overrides) apply_override(j, o);
        RunConfig cfg = parse_config(j);
        cfg.threads = std::max(1, threads);
        if (!out_dir.empty()) cfg.output.directory = out_dir;
        detail::ArtifactWriter writer(cfg.output.directory, command);

        if (command == "solve") return run_solve(cfg, writer);
        if (command == "penalize-sweep") return run_penalize_sweep(cfg, writer);
        if (command == "prox-check") return run_prox_check(cfg, writer);
        if (command == "project-check") return run_project_check(cfg, writer);
        if (command == "neumann-check") return run_neumann_check(cfg, writer);
        if (command == "ibp-check") return run_ibp_check(cfg, writer);
        if (command == "identities") return run_identities(cfg, writer);
        std::cerr << "unknown command: " << command << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace gausslab
