#include "calibra/scenario.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <thread>

using namespace calibra;

int main(int argc, char** argv) {
    CLI::App app{"calibra: piecewise-smooth candidates, lifted fields and calibration "
                 "certificates for free-discontinuity energies"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run scenario files and write reports");
    std::vector<std::string> scenario_paths;
    cli::RunOptions run_opts;
    const char* env_out = std::getenv("CALIBRA_OUT");
    run_opts.out_dir = env_out ? env_out : "out";
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    run_cmd->add_option("--scenario", scenario_paths, "scenario JSON file (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    run_cmd->add_option("--out", run_opts.out_dir, "output directory (env CALIBRA_OUT)");
    run_cmd->add_option("--jobs", jobs, "parallel scenario workers");
    run_cmd->add_option("--tolerance-scale", run_opts.tolerance_scale,
                        "multiply every tolerance by this factor");
    std::uint64_t seed = 0;
    run_cmd->add_option("--seed", seed, "override the fuzz seed of every scenario");

    auto* list_cmd = app.add_subcommand("list", "list the built-in constructions");
    auto* describe_cmd =
        app.add_subcommand("describe", "describe one construction and its parameters");
    std::string describe_name;
    describe_cmd->add_option("name", describe_name, "construction name")->required();

    CLI11_PARSE(app, argc, argv);

    if (list_cmd->parsed()) {
        for (const auto& e : cli::catalog())
            std::cout << e.name << "\n    " << e.summary << "\n";
        std::cout << cli::catalog().size() << " constructions\n";
        return 0;
    }
    if (describe_cmd->parsed()) {
        const auto* entry = cli::find_construction(describe_name);
        if (!entry) {
            std::cerr << "unknown construction: " << describe_name << "\n";
            return cli::kExitInputError;
        }
        nlohmann::json j;
        j["name"] = entry->name;
        j["summary"] = entry->summary;
        j["parameters"] = entry->parameters;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    run_opts.seed_override = seed;
    jobs = std::max(1, jobs);
    std::atomic<size_t> next{0};
    std::vector<cli::RunResult> results(scenario_paths.size());
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= scenario_paths.size()) return;
            results[i] = cli::run_scenario_file(scenario_paths[i], run_opts);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min<int>(jobs, static_cast<int>(scenario_paths.size()));
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int exit_code = 0;
    for (size_t i = 0; i < scenario_paths.size(); ++i) {
        const auto& r = results[i];
        if (!r.error.empty()) {
            std::cerr << scenario_paths[i] << ": error: " << r.error << "\n";
        } else {
            std::cout << scenario_paths[i] << ": "
                      << r.report.value("outcome", std::string("?")) << " (expected "
                      << r.report.value("expectation", std::string("?")) << ") -> "
                      << (r.exit_code == 0 ? "ok" : "MISMATCH") << "\n";
        }
        exit_code = std::max(exit_code, r.exit_code);
    }
    return exit_code;
}
