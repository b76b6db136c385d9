#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli_commands.hpp"

namespace {

using poncelet::cli::RunConfig;

void add_geometry(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--R", cfg.R, "outer radius")->capture_default_str();
    cmd->add_option("--c", cfg.c, "offset of the inner center")->capture_default_str();
}

void add_output(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--out", cfg.out, "output path (stdout when absent)");
    cmd->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_family(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--family", cfg.family, "poncelet, arnold or rigid")
        ->check(CLI::IsMember({"poncelet", "arnold", "rigid"}))
        ->capture_default_str();
    cmd->add_option("--K", cfg.K, "Arnold coupling in [0, 1]")->capture_default_str();
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out{path, std::ios::binary};
    out << text;
    return static_cast<bool>(out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poncelet pairs, rotation numbers and continued fractions"};
    app.require_subcommand(1);
    RunConfig cfg;
    double tau = 0.0;
    double tol = 0.0;

    auto* orbit = app.add_subcommand("orbit", "billiard orbit tangent to the inner circle");
    add_geometry(orbit, cfg);
    orbit->add_option("--t", cfg.t, "inner radius")->capture_default_str();
    orbit->add_option("--steps", cfg.steps, "number of steps")->capture_default_str();
    orbit->add_option("--theta0", cfg.theta0, "starting angle")->capture_default_str();
    add_output(orbit, cfg);

    auto* stair = app.add_subcommand("staircase", "rotation number over a parameter grid");
    add_geometry(stair, cfg);
    add_family(stair, cfg);
    stair->add_option("--points", cfg.points, "grid points")->capture_default_str();
    stair->add_option("--tol", tol, "rotation tolerance");
    add_output(stair, cfg);

    auto* count = app.add_subcommand("count", "n-Poncelet pairs for a range of n");
    add_geometry(count, cfg);
    count->add_option("--n-min", cfg.n_min, "smallest n")->capture_default_str();
    count->add_option("--n-max", cfg.n_max, "largest n")->capture_default_str();
    count->add_option("--seed", cfg.seed, "seed of the closure starts")->capture_default_str();
    count->add_option("--tol", tol, "rotation tolerance at the endpoints");
    add_output(count, cfg);

    auto* cf = app.add_subcommand("cf", "continued fractions and remainder bounds");
    cf->add_option("--x", cfg.x, "golden, a decimal, or p/q");
    cf->add_option("--random", cfg.random, "number of random samples");
    cf->add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
    cf->add_option("--terms", cfg.terms, "number of quotients")->capture_default_str();
    cf->add_option("--eps", cfg.eps, "epsilon of the balanced pairs")->capture_default_str();
    add_output(cf, cfg);

    auto* prop2 = app.add_subcommand("prop2", "second-order growth of r at tau");
    add_geometry(prop2, cfg);
    add_family(prop2, cfg);
    prop2->add_option("--tau", tau, "parameter (located automatically when absent)");
    prop2->add_option("--eps", cfg.eps, "epsilon of the convergent pairs")->capture_default_str();
    prop2->add_option("--tol", tol, "rotation tolerance");
    add_output(prop2, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return poncelet::cli::exit_invalid;
    }

    CLI::App* chosen = app.get_subcommands().front();
    cfg.command = chosen->get_name();
    if (auto* opt = chosen->get_option_no_throw("--tau"); opt && opt->count() > 0) {
        cfg.tau = tau;
    }
    if (auto* opt = chosen->get_option_no_throw("--tol"); opt && opt->count() > 0) {
        cfg.tol = tol;
    }

    const auto result = poncelet::cli::run(cfg);
    if (result.exit_code == poncelet::cli::exit_invalid) {
        std::cerr << "error: " << result.error << "\n";
        return result.exit_code;
    }
    if (cfg.out.empty()) {
        std::cout << result.body;
        if (!result.sidecar.empty()) {
            std::cerr << result.sidecar;
        }
    } else {
        if (!write_file(cfg.out, result.body)) {
            std::cerr << "error: cannot write " << cfg.out << "\n";
            return poncelet::cli::exit_invalid;
        }
        if (!result.sidecar.empty() && !write_file(cfg.out + ".verdict.json", result.sidecar)) {
            std::cerr << "error: cannot write " << cfg.out << ".verdict.json\n";
            return poncelet::cli::exit_invalid;
        }
    }
    return result.exit_code;
}
