// retrialq: experiment runner for multiserver retrial queues.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "retrial/config.hpp"
#include "retrial/experiment.hpp"

namespace fs = std::filesystem;
using namespace retrial;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon;
    std::optional<int> replications;
    std::optional<double> epsilon;
    std::string out;
    bool trace = false;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "experiment config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "base seed (u64)");
    cmd->add_option("--horizon", f.horizon, "simulation horizon T");
    cmd->add_option("--replications", f.replications, "independent replications");
    cmd->add_option("--epsilon", f.epsilon, "truncation threshold (default 1/T)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_flag("--trace", f.trace, "write the event trace of replication 0");
    cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
}

ExperimentConfig resolve(const CommonFlags& f) {
    ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.horizon) cfg.horizon = *f.horizon;
    if (f.replications) cfg.replications = *f.replications;
    if (f.epsilon) cfg.epsilon = *f.epsilon;
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (f.trace) cfg.trace = true;
    if (f.threads) cfg.threads = *f.threads;
    cfg.validate();
    return cfg;
}

int run_and_report(const ExperimentConfig& cfg) {
    std::optional<std::ofstream> trace;
    if (cfg.trace) {
        if (cfg.output_dir.empty()) throw ConfigError("--trace needs an output directory (--out)");
        fs::create_directories(cfg.output_dir);
        trace.emplace(fs::path(cfg.output_dir) / "trace.txt");
    }
    const auto report = run_experiment(cfg, trace ? &*trace : nullptr);
    std::cout << summarize(report);
    std::cout << "wall clock      " << report.wall_seconds << " s\n";
    if (!cfg.output_dir.empty()) write_artifacts(report, cfg.output_dir);
    return 0;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and numerical solution of multiserver retrial queues"};
    app.require_subcommand(1);

    CommonFlags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "simulate, estimate functionals and solve the balance system");
    add_common(simulate, sim_flags);

    CommonFlags solve_flags;
    std::string input;
    auto* solve = app.add_subcommand("solve", "solve the balance system from a jump-functional CSV");
    add_common(solve, solve_flags);
    solve->add_option("--input", input, "jump-functional CSV (i,j,value)")->required()->check(CLI::ExistingFile);

    CommonFlags oracle_flags;
    auto* oracle = app.add_subcommand("oracle", "CTMC stationary distribution or closed-form D/M/2 values");
    add_common(oracle, oracle_flags);

    int table_id = 0;
    std::uint64_t table_seed = 1;
    double table_horizon = 100'000.0;
    std::string table_out;
    std::string data_path = std::string(RETRIAL_DATA_DIR) + "/published_tables.csv";
    int table_threads = 0;
    auto* reproduce = app.add_subcommand("reproduce-table", "rerun a published table and diff against it");
    reproduce->add_option("table", table_id, "table number 1..5")->required()->check(CLI::Range(1, 5));
    reproduce->add_option("--seed", table_seed, "base seed");
    reproduce->add_option("--horizon", table_horizon, "simulation horizon T");
    reproduce->add_option("--data", data_path, "published values with tolerances")->check(CLI::ExistingFile);
    reproduce->add_option("--out", table_out, "output directory");
    reproduce->add_option("--threads", table_threads, "worker threads (0: all cores)");

    CommonFlags conv_flags;
    std::string grid_text = "1,10,100";
    std::string reference = "auto";
    auto* convergence = app.add_subcommand("convergence", "orbit decay and distance to the standard queue over mu2");
    add_common(convergence, conv_flags);
    convergence->add_option("--mu2", grid_text, "comma-separated retrial rates");
    convergence->add_option("--reference", reference, "auto | simulation | dm2")
        ->check(CLI::IsMember({"auto", "simulation", "dm2"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            auto cfg = resolve(sim_flags);
            if (cfg.mode != Mode::retrial && cfg.mode != Mode::standard) {
                throw ConfigError("simulate needs mode = retrial or standard");
            }
            return run_and_report(cfg);
        }
        if (*oracle) {
            auto cfg = resolve(oracle_flags);
            if (cfg.mode == Mode::retrial) cfg.mode = Mode::markov_oracle;
            if (cfg.mode == Mode::standard) cfg.mode = Mode::dm2_oracle;
            return run_and_report(cfg);
        }
        if (*solve) {
            const auto cfg = resolve(solve_flags);
            std::ifstream in(input);
            auto fn = read_jump_functional_csv(in);
            if (fn.servers() != cfg.params.servers) {
                throw ConfigError("CSV has " + std::to_string(fn.servers()) + " servers, config says " +
                                  std::to_string(cfg.params.servers));
            }
            double epsilon = 0.0;
            if (cfg.epsilon) {
                epsilon = *cfg.epsilon;
            } else if (fn.horizon() > 0.0) {
                epsilon = 1.0 / fn.horizon();
            } else {
                epsilon = 1.0 / cfg.horizon;
            }
            const long w = truncation_level(fn, epsilon);
            const auto result = solve_frequencies(assemble_system(fn, cfg.params, w));
            std::cout << "W          " << w << '\n'
                      << "residual   " << result.residual << '\n'
                      << "clipped    " << result.clipped << '\n'
                      << "condition  " << result.condition << (result.ill_conditioned ? "  (ill-conditioned)" : "")
                      << "\n\n"
                      << render_table({{"solver", result.frequencies}});
            if (!cfg.output_dir.empty()) {
                fs::create_directories(cfg.output_dir);
                std::ofstream out(fs::path(cfg.output_dir) / "solver_frequencies.csv");
                write_csv(out, result.frequencies);
            }
            return 0;
        }
        if (*reproduce) {
            const auto published = load_published_cells(data_path);
            const auto result = reproduce_table(table_id, table_seed, published, table_horizon, table_threads);
            std::cout << result.rendered << '\n' << result.render_checks();
            if (!table_out.empty()) {
                fs::create_directories(table_out);
                std::ofstream(fs::path(table_out) / ("table" + std::to_string(table_id) + ".txt"))
                    << result.rendered << '\n'
                    << result.render_checks();
                for (const auto& c : result.columns) {
                    std::ofstream out(fs::path(table_out) /
                                      ("table" + std::to_string(table_id) + "_" + c.title + ".csv"));
                    write_csv(out, c.values);
                }
            }
            if (!result.all_pass()) {
                std::cerr << "reproduce-table " << table_id << ": some cells are outside tolerance\n";
                return 2;
            }
            return 0;
        }
        if (*convergence) {
            const auto cfg = resolve(conv_flags);
            const auto source = reference == "dm2"          ? ReferenceSource::dm2_analytic
                                : reference == "simulation" ? ReferenceSource::standard_simulation
                                                            : ReferenceSource::automatic;
            const auto report = convergence_study(cfg.params.servers, cfg.params.mu1, parse_list(grid_text),
                                                  cfg.arrival, cfg.horizon, cfg.seed, source, cfg.threads);
            std::cout << report.render();
            if (!cfg.output_dir.empty()) {
                fs::create_directories(cfg.output_dir);
                std::ofstream(fs::path(cfg.output_dir) / "convergence.txt") << report.render();
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
