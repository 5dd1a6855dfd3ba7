#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "retrial/config.hpp"
#include "retrial/estimators.hpp"
#include "retrial/oracles.hpp"
#include "retrial/solver.hpp"

namespace retrial {

struct ExperimentReport {
    ExperimentConfig config;
    Stability stability = Stability::stable;

    // Simulation routes (retrial and standard modes).
    std::vector<TrajectoryRecord> trajectories;
    std::optional<JumpFunctional> jump;
    std::optional<FrequencyMatrix> occupancy;

    // Solver route (retrial mode).
    std::optional<FrequencyMatrix> solver;
    long truncation = -1;
    double balance_residual = 0.0;
    int clipped = 0;
    double condition = 0.0;
    bool ill_conditioned = false;
    std::optional<double> route_discrepancy;  // max |solver - occupancy|

    // Oracle comparison (markov-oracle / dm2-oracle modes, or retrial with
    // Poisson arrivals, or standard with the D/M/2 setting).
    std::optional<FrequencyMatrix> oracle;
    std::optional<double> oracle_residual;
    std::optional<double> solver_vs_oracle;
    std::optional<double> occupancy_vs_oracle;

    /// Mean over replications of q2(T)/T.
    double orbit_drift = 0.0;
    double wall_seconds = 0.0;
};

/// Stability check, replicated simulation, merge, W selection, assembly and
/// solve, plus whatever oracle applies. `trace`, when given, receives the
/// transition trace of the first replication.
ExperimentReport run_experiment(const ExperimentConfig& config, std::ostream* trace = nullptr);

/// Writes every matrix as CSV plus `summary.txt` into `dir`.
void write_artifacts(const ExperimentReport& report, const std::filesystem::path& dir);

/// Human-readable summary (deterministic: no timings).
std::string summarize(const ExperimentReport& report);

struct TableColumn {
    std::string title;
    FrequencyMatrix values;
};

/// Fixed-width table over (i,j) rows; cells below 5e-5 print as "-".
std::string render_table(const std::vector<TableColumn>& columns);

// ---------------------------------------------------------------------------
// Reproduction of published tables

/// One printed cell. `kind` is "P" (cell i,j), "Pt" (standard-queue level
/// k stored in `i`) or "W" (truncation level, value in `value`).
struct PublishedCell {
    int table = 0;
    std::string column;
    std::string kind;
    int i = 0;
    long j = 0;
    std::optional<double> value;  // nullopt: printed as a dash
    double tolerance = 0.0;
};

std::vector<PublishedCell> load_published_cells(const std::filesystem::path& csv);

struct CellCheck {
    PublishedCell cell;
    double measured = 0.0;
    double difference = 0.0;
    bool pass = false;
};

struct TableReproduction {
    int table = 0;
    std::string rendered;
    std::vector<CellCheck> checks;
    std::vector<TableColumn> columns;
    std::vector<std::pair<std::string, long>> truncation_levels;

    bool all_pass() const;
    std::string render_checks() const;
};

/// Runs the parameter grid of the given table (1..5) at T = 1e5 and compares
/// against `published` (rows for other tables are ignored).
TableReproduction reproduce_table(int table, std::uint64_t seed, const std::vector<PublishedCell>& published,
                                  double horizon = 100'000.0, int threads = 0);

// ---------------------------------------------------------------------------
// Convergence in the retrial rate

enum class ReferenceSource { automatic, standard_simulation, dm2_analytic };

struct ConvergencePoint {
    double mu2 = 0.0;
    long truncation = 0;
    std::vector<double> orbit_moments;  // S_i = sum_j j P(i,j), i = 0..m-1
    double discrepancy = 0.0;           // max over (i,0) and (m,j) of |P(i,j) - Pt(i+j)|
    FrequencyMatrix frequencies;
};

struct ConvergenceReport {
    std::vector<ConvergencePoint> points;
    FrequencyMatrix reference;
    ReferenceSource source = ReferenceSource::standard_simulation;

    std::string render() const;
};

/// For each mu2 solves the retrial system (solver route) and compares it with
/// the standard queue. With `automatic`, the closed-form D/M/2 reference is
/// used for m = 2, mu1 = 1, unit deterministic arrivals; otherwise the
/// standard queue is simulated with the same arrivals, horizon and seed.
ConvergenceReport convergence_study(int servers, double mu1, const std::vector<double>& mu2_grid,
                                    const ArrivalSpec& arrival, double horizon, std::uint64_t seed,
                                    ReferenceSource source = ReferenceSource::automatic, int threads = 0);

}  // namespace retrial
