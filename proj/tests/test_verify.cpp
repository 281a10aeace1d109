#include <catch2/catch_amalgamated.hpp>

#include "gausslab/hermite.hpp"
#include "gausslab/model.hpp"
#include "gausslab/solver.hpp"
#include "gausslab/verify.hpp"
#include "gausslab/weights.hpp"

#include "support/oracles.hpp"

#include <cmath>
#include <memory>

using namespace gausslab;
using Catch::Approx;

namespace {

double hermite1(const Point& x) { return hermite_orthonormal_1d(x[0], 1)[1]; }

}  // namespace

TEST_CASE("sobolev report for the exact resolvent") {
    TruncatedModel model(1);
    ZeroPotential zero;
    HermiteBasis basis(1, 6);
    const auto rule = build_quadrature(model, RuleKind::TensorGaussHermite, 16);
    const auto sol = solve(assemble(basis, zero, hermite1, 1.0, rule), basis);
    const auto rep = sobolev_report(sol, zero, hermite1, rule);

    CHECK(rep.norm_u == Approx(0.5).margin(1e-10));
    CHECK(rep.norm_grad == Approx(0.5).margin(1e-10));
    CHECK(rep.norm_f == Approx(1.0).margin(1e-10));
    CHECK(rep.ratio_u == Approx(0.5).margin(1e-9));
    CHECK(rep.ratio_grad == Approx(0.5).margin(1e-9));

    SECTION("constant data saturates the first bound") {
        const auto solc = solve(assemble(basis, zero, [](const Point&) { return 1.0; }, 0.7, rule),
                                basis);
        const auto repc = sobolev_report(solc, zero, [](const Point&) { return 1.0; }, rule);
        CHECK(repc.ratio_u == Approx(1.0).margin(1e-9));
        CHECK(repc.ratio_grad <= 1e-9);
        CHECK(repc.ratio_hess <= 1e-9);
    }

    SECTION("large lambda pushes the ratio toward one from below") {
        double prev = 0.0;
        for (double lambda : {1.0, 4.0, 16.0, 64.0}) {
            const auto s = solve(assemble(basis, zero, hermite1, lambda, rule), basis);
            const auto r = sobolev_report(s, zero, hermite1, rule);
            CHECK(r.ratio_u == Approx(lambda / (lambda + 1.0)).margin(1e-9));
            CHECK(r.ratio_u > prev);
            CHECK(r.ratio_u <= 1.0 + 1e-8);
            prev = r.ratio_u;
        }
    }
}

TEST_CASE("resolvent bounds hold with the assembly rule across configurations") {
    TruncatedModel model(2, 5);
    auto zero = std::make_shared<ZeroPotential>();
    auto quad = std::make_shared<QuadraticPotential>();
    auto u1 = std::make_shared<WeightU1>(model, phi_profile("cosh"),
                                         std::vector<std::pair<double, double>>{{0.5, 1.0}},
                                         GrowthBound{1.0, 1.0});
    auto hs = std::make_shared<HalfspaceDomain>((Point(2) << 1.0, 0.5).finished(), 0.2);
    auto el = std::make_shared<EllipsoidDomain>(EllipsoidDomain::from_model(model, 1.0));

    std::vector<std::shared_ptr<const ConvexPotential>> weights{zero, quad, u1};
    std::vector<std::shared_ptr<const ConvexDomain>> domains{nullptr, hs, el};

    for (const auto& w : weights) {
        for (const auto& dom : domains) {
            QuadratureRule rule =
                dom ? region_rule(model, *dom, RuleKind::TensorGaussHermite, 16)
                    : build_quadrature(model, RuleKind::TensorGaussHermite, 16);
            for (double lambda : {0.5, 4.0}) {
                HermiteBasis basis(2, 8);
                const auto sol =
                    solve(assemble(basis, *w, hermite1, lambda, rule, dom.get()), basis);
                const auto rep = sobolev_report(sol, *w, hermite1, rule);
                INFO("weight/domain/lambda config, lambda=" << lambda);
                CHECK(rep.ratio_u <= 1.0 + 1e-8);
                CHECK(rep.ratio_grad <= 1.0 + 1e-8);
            }
        }
    }
}

TEST_CASE("monte carlo domain rules report standard errors") {
    TruncatedModel model(2, 5);
    ZeroPotential zero;
    auto el = std::make_shared<EllipsoidDomain>(EllipsoidDomain::from_model(model, 1.0));
    const auto rule = region_rule(model, *el, RuleKind::MonteCarlo, 100000);
    HermiteBasis basis(2, 6);
    const auto sol = solve(assemble(basis, zero, hermite1, 1.0, rule, el.get()), basis);
    const auto rep = sobolev_report(sol, zero, hermite1, rule);
    CHECK(rep.stderr_f > 0.0);
    CHECK(rep.ratio_u <= 1.0 + 3.0 * rep.stderr_ratio_u + 1e-12);
    CHECK(rep.ratio_grad <= 1.0 + 3.0 * rep.stderr_ratio_grad + 1e-12);

    SECTION("matches the polar rule within monte carlo error") {
        const auto polar = region_rule(model, *el, RuleKind::TensorGaussHermite, 24);
        const auto sol_p = solve(assemble(basis, zero, hermite1, 1.0, polar, el.get()), basis);
        const auto rep_p = sobolev_report(sol_p, zero, hermite1, polar);
        CHECK(rep.norm_u == Approx(rep_p.norm_u).margin(4.0 * rep.stderr_u + 1e-6));
        CHECK(rep.norm_grad == Approx(rep_p.norm_grad).margin(4.0 * rep.stderr_grad + 1e-6));
    }
}

TEST_CASE("neumann residual closed forms") {
    TruncatedModel model(1);
    ZeroPotential zero;
    auto hs = std::make_shared<HalfspaceDomain>((Point(1) << 1.0).finished(), 0.0);

    SECTION("constant solutions have zero residual") {
        HermiteBasis basis(1, 4);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
        c[0] = 2.0;
        GalerkinSolution flat{c, basis, 1.0, 0.0, 0.0};
        CHECK(neumann_residual(flat, *hs, zero, 16) == 0.0);
    }

    SECTION("point evaluation at the boundary in one dimension") {
        HermiteBasis basis(1, 3);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
        c[basis.find({1})] = 1.0;  // u = x, u'(0) = 1
        GalerkinSolution lin{c, basis, 1.0, 0.0, 0.0};
        const double expected = std::sqrt(1.0 / std::sqrt(2.0 * pi));
        CHECK(neumann_residual(lin, *hs, zero, 16) == Approx(expected).margin(1e-12));
    }

    SECTION("degree series decreases for the direct domain solve") {
        const auto rule = region_rule(model, *hs, RuleKind::TensorGaussHermite, 20);
        std::vector<double> series;
        for (int d : {4, 8, 12}) {
            HermiteBasis b(1, d);
            const auto sol = solve(assemble(b, zero, hermite1, 1.0, rule, hs.get()), b);
            series.push_back(neumann_residual(sol, *hs, zero, 64));
        }
        CHECK(series[1] <= series[0]);
        CHECK(series[2] <= series[1]);
        CHECK(series[2] <= 0.25 * series[0]);

        // oracle: the reflected finite-difference solution itself has
        // vanishing conormal derivative at 0 by construction
        const auto fd = oracles::fd_halfline_solve(1.0, [](double x) { return x; });
        const std::size_t m = fd.values.size();
        const double fd_deriv = (fd.values[m - 1] - fd.values[m - 2]) / (fd.grid[1] - fd.grid[0]);
        CHECK(std::abs(fd_deriv) < 1e-2);  // one-sided difference of a reflected end
    }
}

TEST_CASE("integration by parts with traces") {
    TruncatedModel model(1);
    ZeroPotential zero;
    auto hs = std::make_shared<HalfspaceDomain>((Point(1) << 1.0).finished(), 0.0);
    const auto rule = region_rule(model, *hs, RuleKind::TensorGaussHermite, 20);

    SECTION("closed-form constant test function") {
        const auto res = ibp_check(zero, *hs, [](const Point&) { return 1.0; },
                                   [](const Point& x) { return Point::Zero(x.size()); }, 0, rule,
                                   16);
        const double expected = 1.0 / std::sqrt(2.0 * pi);
        CHECK(res.lhs == Approx(expected).margin(1e-10));
        CHECK(res.rhs == Approx(expected).margin(1e-12));
        CHECK(std::abs(res.lhs - res.rhs) <= 1e-10);
    }

    SECTION("zero test function") {
        const auto res = ibp_check(zero, *hs, [](const Point&) { return 0.0; },
                                   [](const Point& x) { return Point::Zero(x.size()); }, 0, rule,
                                   16);
        CHECK(res.lhs == 0.0);
        CHECK(res.rhs == 0.0);
    }

    SECTION("odd symmetry in two dimensions") {
        TruncatedModel m2(2);
        auto hs2 = std::make_shared<HalfspaceDomain>((Point(2) << 1.0, 0.0).finished(), 0.0);
        const auto rule2 = region_rule(m2, *hs2, RuleKind::TensorGaussHermite, 16);
        const auto res = ibp_check(zero, *hs2, [](const Point& x) { return x[1]; },
                                   [](const Point& x) {
                                       Point g = Point::Zero(2);
                                       g[1] = 1.0;
                                       return g;
                                   },
                                   0, rule2, 24);
        CHECK(std::abs(res.lhs) < 1e-10);
        CHECK(std::abs(res.rhs) < 1e-10);
    }

    SECTION("randomized polynomials across weights and domains") {
        TruncatedModel m2(2, 17);
        auto quad = std::make_shared<QuadraticPotential>();
        auto el = std::make_shared<EllipsoidDomain>(EllipsoidDomain::from_model(m2, 1.0));
        auto hs2 = std::make_shared<HalfspaceDomain>((Point(2) << 0.6, -0.8).finished(), 0.4);
        auto sampler = m2.sampler(23);
        HermiteBasis poly(2, 3);

        struct Config {
            std::shared_ptr<const ConvexPotential> w;
            std::shared_ptr<const ConvexDomain> dom;
        };
        std::vector<Config> configs{{std::make_shared<ZeroPotential>(), hs2},
                                    {quad, hs2},
                                    {std::make_shared<ZeroPotential>(), el},
                                    {quad, el}};
        for (const auto& cfg : configs) {
            const auto rrule = region_rule(m2, *cfg.dom, RuleKind::TensorGaussHermite, 24);
            for (int rep = 0; rep < 20; ++rep) {
                Eigen::VectorXd c(poly.size());
                for (int i = 0; i < c.size(); ++i) c[i] = sampler.normal();
                GalerkinSolution phi{c, poly, 1.0, 0.0, 0.0};
                const int axis = rep % 2;
                const auto res = ibp_check(
                    *cfg.w, *cfg.dom, [&](const Point& x) { return phi.evaluate(x, 0).value; },
                    [&](const Point& x) { return phi.evaluate(x, 1).grad; }, axis, rrule, 48);
                CHECK(std::abs(res.lhs - res.rhs) <=
                      std::max(1e-8, 3.0 * res.stderr_lhs));
            }
        }
    }
}

TEST_CASE("lambda square-sum identity") {
    const auto r1 = lambda_sum_check(1);
    CHECK(r1.partial == Approx(16.0 / std::pow(pi, 4)).epsilon(1e-14));
    CHECK(r1.partial == Approx(0.164255).margin(1e-6));

    const auto r100 = lambda_sum_check(100);
    CHECK(std::abs(r100.partial - 1.0 / 6.0) <= 6e-7);
    CHECK(std::abs(r100.partial - 1.0 / 6.0) <= r100.tail_bound);

    SECTION("tail bound formula") {
        CHECK(r100.tail_bound == Approx(16.0 / (3.0 * std::pow(pi, 4) * std::pow(199.0, 3))));
        CHECK_THROWS_AS(lambda_sum_check(0), std::invalid_argument);
    }
}

TEST_CASE("penalization sweep") {
    TruncatedModel model(1, 42);
    auto zero = std::make_shared<ZeroPotential>();

    SECTION("whole space makes the penalty vanish") {
        auto all = std::make_shared<WholeSpaceDomain>(1);
        SweepConfig cfg;
        cfg.degree = 8;
        cfg.resolution = 16;
        const auto sweep = penalization_sweep(model, zero, all, hermite1, 1.0, {1.0, 0.1}, cfg);
        for (double d : sweep.distances) CHECK(d <= 1e-9);
    }

    SECTION("constant data solves every penalized problem") {
        auto hs = std::make_shared<HalfspaceDomain>((Point(1) << 1.0).finished(), 0.0);
        SweepConfig cfg;
        cfg.degree = 8;
        cfg.resolution = 16;
        const auto sweep = penalization_sweep(model, zero, hs,
                                              [](const Point&) { return 3.0; }, 1.5, {1.0, 0.1},
                                              cfg);
        for (double d : sweep.distances) CHECK(d <= 1e-9);
    }

    SECTION("halfspace distances decrease and match the fd oracle") {
        auto hs = std::make_shared<HalfspaceDomain>((Point(1) << 1.0).finished(), 0.0);
        SweepConfig cfg;
        cfg.degree = 12;
        cfg.resolution = 20;
        const auto sweep =
            penalization_sweep(model, zero, hs, hermite1, 1.0, {1.0, 0.1, 0.01}, cfg);
        CHECK(sweep.distances[1] < sweep.distances[0]);
        CHECK(sweep.distances[2] < sweep.distances[1]);
        CHECK(sweep.distances.back() <= sweep.distances.front());

        // direct solution against the dense reflected finite-difference solve
        const auto fd = oracles::fd_halfline_solve(1.0, [](double x) { return x; }, 8.0, 1e-3);
        const auto rule = region_rule(model, *hs, RuleKind::TensorGaussHermite, 20);
        double err_sq = 0.0;
        for (Eigen::Index i = 0; i < rule.size(); ++i) {
            const Point x = rule.nodes.row(i).transpose();
            const double diff = sweep.direct_solution.evaluate(x, 0).value - fd.at(x[0]);
            err_sq += rule.weights[i] * diff * diff;
        }
        CHECK(std::sqrt(err_sq) <= 1e-3);

        // per-alpha reports still satisfy the resolvent bounds
        for (const auto& rep : sweep.reports) {
            CHECK(rep.ratio_u <= 1.0 + 1e-8);
            CHECK(rep.ratio_grad <= 1.0 + 1e-8);
        }
    }

    SECTION("alpha grid validation") {
        auto hs = std::make_shared<HalfspaceDomain>((Point(1) << 1.0).finished(), 0.0);
        CHECK_THROWS_AS(penalization_sweep(model, zero, hs, hermite1, 1.0, {0.1, 1.0}, {}),
                        std::invalid_argument);
        CHECK_THROWS_AS(penalization_sweep(model, zero, hs, hermite1, 1.0, {1.0, -0.1}, {}),
                        std::invalid_argument);
    }
}

TEST_CASE("boundary rule capability errors") {
    TruncatedModel model(2);
    WholeSpaceDomain all(2);
    CHECK_THROWS_AS(boundary_rule(all, 2, 16), std::invalid_argument);
}
