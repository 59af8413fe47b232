// Command-line front end: single runs, replicated scenario batches, and
// paired scenario comparison over previously written batch output.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "caresim/caresim.hpp"

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("CARESIM_OUT");
    return env ? std::string(env) : std::string();
}

std::string require_out(const std::string& cli) {
    if (!cli.empty()) return cli;
    std::string env = default_out_dir();
    if (!env.empty()) return env;
    throw CLI::ValidationError("--out", "no output directory given (or set CARESIM_OUT)");
}

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"caresim: agent-based household care microsimulation"};
    app.require_subcommand(1);

    std::string configPath, scenarioArg = "benchmark", outArg;
    std::uint64_t seed = 1;
    bool plots = false;

    auto* sim = app.add_subcommand("simulate", "run one scenario once and write metrics");
    sim->add_option("--config", configPath, "key = value config file");
    sim->add_option("--scenario", scenarioArg, "preset name or scenario file");
    sim->add_option("--seed", seed, "random seed");
    sim->add_option("--out", outArg, "output directory (default: $CARESIM_OUT)");
    sim->add_flag("--plots", plots, "also write plots.svg");

    std::string scenariosArg = "benchmark,P1,P2,P3,P4";
    int replicates = 20;
    std::uint64_t baseSeed = 1;

    auto* batch = app.add_subcommand("batch", "run replicated scenarios with paired seeds");
    batch->add_option("--config", configPath, "key = value config file");
    batch->add_option("--scenarios", scenariosArg, "comma-separated scenario names/files");
    batch->add_option("--replicates", replicates, "replicates per scenario")
        ->check(CLI::PositiveNumber);
    batch->add_option("--base-seed", baseSeed, "seed of replicate 0 (replicate i uses +i)");
    batch->add_option("--out", outArg, "output directory (default: $CARESIM_OUT)");

    std::string inDir;
    auto* cmp = app.add_subcommand("compare", "paired differences of batch output vs benchmark");
    cmp->add_option("--in", inDir, "batch output directory")->required();
    cmp->add_option("--out", outArg, "output directory (default: $CARESIM_OUT)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            std::string out = require_out(outArg);
            caresim::SimConfig cfg =
                configPath.empty() ? caresim::SimConfig{} : caresim::load_config(configPath);
            caresim::Scenario scen = caresim::load_scenario(scenarioArg);
            auto result = caresim::run_simulation(cfg, scen, seed);
            std::filesystem::create_directories(out);
            caresim::write_metrics_csv(out + "/metrics.csv", result.years);
            if (plots) caresim::render_plots(result.years, out);
            std::cout << "wrote " << out << "/metrics.csv (" << result.years.size()
                      << " years, scenario " << scen.name << ")\n";
        } else if (batch->parsed()) {
            std::string out = require_out(outArg);
            caresim::SimConfig cfg =
                configPath.empty() ? caresim::SimConfig{} : caresim::load_config(configPath);
            auto names = split_names(scenariosArg);
            if (names.empty()) throw std::runtime_error("batch: empty scenario list");
            caresim::run_batch(cfg, names, replicates, baseSeed, out);
            std::cout << "wrote " << names.size() << " scenario(s) x " << replicates
                      << " replicate(s) under " << out << "\n";
        } else if (cmp->parsed()) {
            std::string out = require_out(outArg);
            auto comparisons = caresim::compare_directory(inDir);
            caresim::write_comparison(comparisons, out);
            std::cout << "wrote comparison for " << comparisons.size() << " scenario(s) to "
                      << out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
