#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "risktree/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

using namespace risktree;

namespace {

std::string write_temp_config(const std::string& name, const std::string& body) {
    auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream os(path, std::ios::binary);
    os << body;
    return path;
}

std::vector<std::string> load_errors(const std::string& path) {
    try {
        cli::load_model(path);
    } catch (const cli::ConfigError& e) {
        return e.errors;
    }
    return {};
}

bool any_contains(const std::vector<std::string>& errs, const std::string& needle) {
    for (const auto& e : errs)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("shipped fixture loads") {
    auto cfg = cli::load_model(std::string(FIXTURES_DIR) + "/two_state_T1.json");
    CHECK(cfg.name == "two_state_T1");
    CHECK(cfg.horizon == 1);
    CHECK(cfg.states.size() == 2);
    CHECK(cfg.d == 1);
    CHECK(cfg.suite == "all");
    CHECK(cfg.mode == "float");
    CHECK(cfg.seed == 0);
}

TEST_CASE("schema validation reports named errors") {
    SUBCASE("mu normalization") {
        auto p = write_temp_config("risktree_bad_mu.json", R"({
            "format_version": 1,
            "space": {
                "horizon": 1,
                "states": ["u", "dn"],
                "partitions": [[[0, 1]], [[0], [1]]],
                "prob": [0.5, 0.5],
                "mu": [[0.5, 0.5], [0.4, 0.4]]
            }
        })");
        auto errs = load_errors(p);
        CHECK(any_contains(errs, "mu does not sum to 1"));
        CHECK(any_contains(errs, "normalization"));
        std::remove(p.c_str());
    }
    SUBCASE("non-refining partitions name the offending atoms") {
        auto p = write_temp_config("risktree_bad_part.json", R"({
            "format_version": 1,
            "space": {
                "horizon": 2,
                "states": ["a", "b", "c"],
                "partitions": [[[0, 1, 2]], [[0, 1], [2]], [[0], [1, 2]]],
                "prob": [0.25, 0.25, 0.5]
            }
        })");
        auto errs = load_errors(p);
        CHECK(any_contains(errs, "do not refine"));
        CHECK(any_contains(errs, "atom 1 at time 2"));
        std::remove(p.c_str());
    }
    SUBCASE("error accumulation across blocks") {
        auto p = write_temp_config("risktree_bad_many.json", R"({
            "format_version": 2,
            "space": {
                "horizon": 1,
                "states": ["u", "dn"],
                "partitions": [[[0, 1]], [[0], [1]]],
                "prob": [0.6, 0.6]
            },
            "assets": { "d": 1, "m": 2 },
            "suite": "bogus",
            "mode": "decimal"
        })");
        auto errs = load_errors(p);
        CHECK(errs.size() >= 4);
        CHECK(any_contains(errs, "format_version"));
        CHECK(any_contains(errs, "prob does not sum to 1"));
        CHECK(any_contains(errs, "1 <= m <= d"));
        CHECK(any_contains(errs, "unknown suite"));
        CHECK(any_contains(errs, "mode"));
        std::remove(p.c_str());
    }
    SUBCASE("broken family needs two eligible assets") {
        auto p = write_temp_config("risktree_bad_broken.json", R"({
            "format_version": 1,
            "space": {
                "horizon": 1,
                "states": ["u", "dn"],
                "partitions": [[[0, 1]], [[0], [1]]],
                "prob": [0.5, 0.5]
            },
            "risk": { "family": "broken" }
        })");
        auto errs = load_errors(p);
        CHECK(any_contains(errs, "broken requires at least two eligible assets"));
        std::remove(p.c_str());
    }
}

TEST_CASE("suite selection errors are usage errors") {
    auto cfg = cli::load_model(std::string(FIXTURES_DIR) + "/two_state_T1.json");
    CHECK_THROWS_AS(cli::run_suite(cfg, ""), cli::UsageError);
    CHECK_THROWS_AS(cli::run_suite(cfg, "everything"), cli::UsageError);
}

TEST_CASE("explain cites the anchors and rejects unknown ids") {
    auto dual = cli::explain("duality.coherent-exact");
    CHECK(dual.find("Corollary 2.3") != std::string::npos);
    auto equiv = cli::explain("equivalence.evaluation");
    CHECK(equiv.find("Theorem 3.1") != std::string::npos);
    try {
        cli::explain("nope");
        CHECK(false);
    } catch (const cli::UsageError& e) {
        std::string msg = e.what();
        CHECK(msg.find("unknown check id") != std::string::npos);
        CHECK(msg.find("consistency.equivalence") != std::string::npos);
    }
}

TEST_CASE("machine reports are byte-identical under a fixed seed") {
    auto cfg = cli::load_model(std::string(FIXTURES_DIR) + "/two_state_T1.json");
    cfg.dual_samples = 10;
    cfg.process_samples = 30;
    auto a = cli::run_suite(cfg, "all");
    auto b = cli::run_suite(cfg, "all");
    CHECK(a.ok());
    CHECK(a.machine_json() == b.machine_json());
    // human rendering agrees on every status field even though it shows timings
    for (std::size_t i = 0; i < a.checks.size(); ++i)
        CHECK(a.checks[i].status == b.checks[i].status);
}

TEST_CASE("machine report matches the shipped golden file") {
    auto cfg = cli::load_model(std::string(FIXTURES_DIR) + "/two_state_T1.json");
    auto rep = cli::run_suite(cfg, "all");
    std::ifstream is(std::string(FIXTURES_DIR) + "/two_state_T1.all.report.json",
                     std::ios::binary);
    REQUIRE(is.good());
    std::string golden((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
    CHECK(rep.machine_json() == golden);
}

TEST_CASE("broken fixture fails the consistency suite with witnesses") {
    auto cfg =
        cli::load_model(std::string(FIXTURES_DIR) + "/two_state_T1_broken.json");
    auto rep = cli::run_suite(cfg, "consistency");
    CHECK(!rep.ok());
    int failing = 0;
    for (const auto& c : rep.checks)
        if (c.status == "fail") {
            ++failing;
            CHECK(!c.witness.empty());
        }
    CHECK(failing >= 1);
    // the process- and vector-side MPTC checks must both flag the family
    for (const auto& c : rep.checks)
        if (c.id == "consistency.process-mptc" || c.id == "consistency.vector-mptc")
            CHECK(c.status == "fail");
}
