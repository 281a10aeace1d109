#include <catch2/catch_amalgamated.hpp>

#include "gausslab/commands.hpp"
#include "gausslab/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gausslab;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("gausslab_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json base_config() {
    json j;
    j["model"] = {{"n", 1}, {"seed", 42}};
    j["domain"] = {{"kind", "halfspace"}, {"a", {1.0}}, {"c", 0.0}};
    j["weight"] = {{"kind", "zero"}};
    j["rhs"] = {{"kind", "hermite"}, {"index", {1}}};
    j["solver"] = {{"degree", 10},
                   {"lambda", 1.0},
                   {"mode", "domain-direct"},
                   {"quadrature", {{"kind", "tensor"}, {"resolution", 16}}}};
    j["verify"] = {{"alphas", {1.0, 0.1, 0.01}}, {"degrees", {4, 8, 12}},
                   {"boundary_resolution", 32}, {"probes", 25}};
    return j;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream out(p);
    out << j.dump(2);
    return p;
}

}  // namespace

TEST_CASE("config validation lists every offending key at once") {
    json bad = base_config();
    bad["solver"]["lambda"] = 0.0;
    bad["model"]["n"] = 0;
    bad["weight"]["kind"] = "mystery";
    try {
        parse_config(bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("solver.lambda") != std::string::npos);
        CHECK(msg.find("model.n") != std::string::npos);
        CHECK(msg.find("weight.kind") != std::string::npos);
        CHECK(e.issues.size() == 3);
    }
}

TEST_CASE("dotted-path overrides") {
    json j = base_config();
    apply_override(j, "solver.lambda=2.5");
    apply_override(j, "solver.quadrature.resolution=8");
    apply_override(j, "domain.kind=none");
    const RunConfig cfg = parse_config(j);
    CHECK(cfg.solver.lambda == 2.5);
    CHECK(cfg.solver.resolution == 8);
    CHECK(cfg.domain.kind == "none");
    CHECK_THROWS_AS(apply_override(j, "nonsense"), ValidationError);
}

TEST_CASE("identities command emits the closed-form sums") {
    const auto dir = temp_dir("identities");
    json j = base_config();
    j["verify"]["identity_terms"] = 100;
    const auto cfg_path = write_config(dir, j);
    const int code = run_command("identities", cfg_path.string(), (dir / "out").string(), 1, {});
    CHECK(code == 0);
    const std::string csv = read_file(dir / "out" / "identities.csv");
    CHECK(csv.find("K,partial_sum,tail_bound,target,lambda1") != std::string::npos);
    const json summary = json::parse(read_file(dir / "out" / "summary.json"));
    CHECK(summary["pass"] == true);
    CHECK(summary["command"] == "identities");
}

TEST_CASE("solve command writes the resolvent coefficient table") {
    const auto dir = temp_dir("solve");
    json j = base_config();
    j["domain"]["kind"] = "none";
    const auto cfg_path = write_config(dir, j);
    const int code = run_command("solve", cfg_path.string(), (dir / "out").string(), 1, {});
    CHECK(code == 0);
    const std::string csv = read_file(dir / "out" / "solution.csv");
    // OU resolvent of the degree-1 eigenfunction at lambda=1: coefficient 1/2
    CHECK(csv.find("\"(1)\",0.5") != std::string::npos);

    SECTION("bad lambda exits with an input error naming the key") {
        json bad = j;
        bad["solver"]["lambda"] = 0.0;
        const auto bad_path = dir / "bad.json";
        std::ofstream out(bad_path);
        out << bad.dump();
        out.close();
        CHECK(run_command("solve", bad_path.string(), (dir / "out2").string(), 1, {}) == 1);
    }

    SECTION("missing config file") {
        CHECK(run_command("solve", (dir / "absent.json").string(), (dir / "out3").string(), 1,
                          {}) == 1);
    }
}

TEST_CASE("project and prox check commands pass on shipped configurations") {
    const auto dir = temp_dir("checks");
    json j = base_config();
    j["model"]["n"] = 2;
    j["domain"] = {{"kind", "ellipsoid"}, {"r", 1.0}};
    j["weight"] = {{"kind", "quadratic"}};
    j["rhs"] = {{"kind", "hermite"}, {"index", {1, 0}}};
    j["verify"]["probes"] = 20;
    const auto cfg_path = write_config(dir, j);
    CHECK(run_command("project-check", cfg_path.string(), (dir / "proj").string(), 1, {}) == 0);
    CHECK(run_command("prox-check", cfg_path.string(), (dir / "prox").string(), 1, {}) == 0);
    const json summary = json::parse(read_file(dir / "proj" / "summary.json"));
    CHECK(summary["violations"].empty());
}

TEST_CASE("cli binary produces byte-identical artifacts for identical runs") {
    const char* cli = std::getenv("GAUSSLAB_CLI");
    REQUIRE(cli != nullptr);
    const auto dir = temp_dir("determinism");
    json j = base_config();
    j["model"]["n"] = 2;
    j["domain"] = {{"kind", "ellipsoid"}, {"r", 1.0}};
    j["solver"]["quadrature"] = {{"kind", "monte-carlo"}, {"resolution", 20000}};
    j["rhs"] = {{"kind", "hermite"}, {"index", {1, 0}}};
    const auto cfg_path = write_config(dir, j);

    auto run_once = [&](const std::string& tag) {
        std::ostringstream cmd;
        cmd << "'" << cli << "' solve --config '" << cfg_path.string() << "' --out '"
            << (dir / tag).string() << "' > '" << (dir / (tag + ".log")).string() << "' 2>&1";
        return std::system(cmd.str().c_str());
    };
    REQUIRE(run_once("a") == 0);
    REQUIRE(run_once("b") == 0);
    CHECK(read_file(dir / "a" / "solution.csv") == read_file(dir / "b" / "solution.csv"));
    CHECK(read_file(dir / "a" / "sobolev.csv") == read_file(dir / "b" / "sobolev.csv"));
    CHECK(read_file(dir / "a" / "summary.json") == read_file(dir / "b" / "summary.json"));
    CHECK_FALSE(read_file(dir / "a" / "solution.csv").empty());

    SECTION("threads do not change the bytes") {
        std::ostringstream cmd;
        cmd << "'" << cli << "' solve --config '" << cfg_path.string() << "' --out '"
            << (dir / "c").string() << "' --threads 4 > /dev/null 2>&1";
        REQUIRE(std::system(cmd.str().c_str()) == 0);
        CHECK(read_file(dir / "a" / "solution.csv") == read_file(dir / "c" / "solution.csv"));
    }

    SECTION("exit code 2 on contract violation with machine-readable list") {
        // running the degree series backwards makes the residuals increase,
        // so the nonincreasing contract genuinely fails
        json rev = base_config();
        rev["verify"]["degrees"] = {12, 8, 4};
        rev["solver"]["quadrature"]["resolution"] = 20;
        const auto p = dir / "reversed.json";
        std::ofstream out(p);
        out << rev.dump();
        out.close();
        CHECK(run_command("neumann-check", p.string(), (dir / "rev").string(), 1, {}) == 2);
        const json summary = json::parse(read_file(dir / "rev" / "summary.json"));
        CHECK(summary["pass"] == false);
        CHECK(!summary["violations"].empty());
    }
}

TEST_CASE("neumann and ibp commands run end to end") {
    const auto dir = temp_dir("neumann");
    json j = base_config();
    j["solver"]["quadrature"]["resolution"] = 20;
    const auto cfg_path = write_config(dir, j);
    CHECK(run_command("neumann-check", cfg_path.string(), (dir / "n").string(), 1, {}) == 0);
    const std::string csv = read_file(dir / "n" / "neumann.csv");
    CHECK(csv.rfind("degree,residual", 0) == 0);

    CHECK(run_command("ibp-check", cfg_path.string(), (dir / "i").string(), 1, {}) == 0);
    const std::string ibp = read_file(dir / "i" / "ibp.csv");
    CHECK(ibp.rfind("config_id,lhs,rhs,abs_diff,stderr", 0) == 0);

    SECTION("neumann-check refuses a boundaryless domain") {
        json none = j;
        none["domain"] = {{"kind", "none"}};
        const auto p = dir / "none.json";
        std::ofstream out(p);
        out << none.dump();
        out.close();
        CHECK(run_command("neumann-check", p.string(), (dir / "x").string(), 1, {}) == 1);
    }
}

TEST_CASE("penalize-sweep command") {
    const auto dir = temp_dir("sweep");
    json j = base_config();
    j["solver"]["degree"] = 12;
    j["solver"]["quadrature"]["resolution"] = 20;
    const auto cfg_path = write_config(dir, j);
    CHECK(run_command("penalize-sweep", cfg_path.string(), (dir / "s").string(), 1, {}) == 0);
    const std::string csv = read_file(dir / "s" / "sweep.csv");
    CHECK(csv.rfind("alpha,distance,ratio_u,ratio_grad,ratio_hess", 0) == 0);
    const json summary = json::parse(read_file(dir / "s" / "summary.json"));
    CHECK(summary["pass"] == true);
}
