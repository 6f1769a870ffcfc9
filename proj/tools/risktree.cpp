#include "risktree/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

int write_reports(const risktree::cli::Report& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory " << out_dir << ": "
                  << ec.message() << "\n";
        return 2;
    }
    const std::string stem = rep.model + "." + rep.suite;
    const fs::path machine = fs::path(out_dir) / (stem + ".report.json");
    const fs::path human = fs::path(out_dir) / (stem + ".report.txt");
    {
        std::ofstream os(machine, std::ios::binary);
        if (!os) {
            std::cerr << "error: output path unwritable: " << machine.string() << "\n";
            return 2;
        }
        os << rep.machine_json();
    }
    {
        std::ofstream os(human, std::ios::binary);
        if (!os) {
            std::cerr << "error: output path unwritable: " << human.string() << "\n";
            return 2;
        }
        os << rep.human_text();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scenario-tree engine for set-valued dynamic risk measures"};
    app.failure_message(CLI::FailureMessage::simple);

    std::string config_path;
    std::string suite;
    std::string mode;
    std::string out_dir = ".";
    std::string explain_id;
    std::uint64_t seed = 0;
    double tolerance = 0.0;

    app.add_option("config", config_path, "model configuration file");
    app.add_option("--suite", suite,
                   "check suite: axioms | equivalence | duality | consistency | all");
    app.add_option("--seed", seed, "override the sampling seed");
    app.add_option("--tolerance", tolerance, "override the numeric tolerance");
    app.add_option("--mode", mode, "arithmetic mode: float | rational");
    app.add_option("--out", out_dir, "output directory for report files");
    app.add_option("--explain", explain_id, "describe a check id and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!explain_id.empty()) {
            std::cout << risktree::cli::explain(explain_id);
            return 0;
        }
        if (config_path.empty()) {
            std::cerr << "error: a config file is required unless --explain is used\n";
            return 2;
        }

        auto cfg = risktree::cli::load_model(config_path);
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--tolerance")) {
            if (tolerance <= 0.0) {
                std::cerr << "error: tolerance must be positive\n";
                return 2;
            }
            cfg.tolerance = tolerance;
        }
        if (!mode.empty()) {
            if (mode != "float" && mode != "rational") {
                std::cerr << "error: mode must be float or rational\n";
                return 2;
            }
            cfg.mode = mode;
        }
        if (!suite.empty()) cfg.suite = suite;

        auto rep = risktree::cli::run_suite(cfg, cfg.suite);
        if (int rc = write_reports(rep, out_dir)) return rc;
        std::cout << rep.human_text();
        return rep.ok() ? 0 : 1;
    } catch (const risktree::cli::ConfigError& e) {
        std::cerr << "config error:\n";
        for (const auto& msg : e.errors) std::cerr << "  " << msg << "\n";
        return 2;
    } catch (const risktree::cli::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
