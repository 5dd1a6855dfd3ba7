#include "retrial/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "retrial/detail/parallel.hpp"

namespace retrial {

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string general(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool is_unit_deterministic(const ArrivalSpec& a) {
    const auto* d = std::get_if<Deterministic>(&a);
    return d && d->interval == 1.0;
}

bool is_dm2_setting(int servers, double mu1, const ArrivalSpec& a) {
    return servers == 2 && mu1 == 1.0 && is_unit_deterministic(a);
}

struct Replication {
    TrajectoryRecord record;
    JumpCounts jumps;
    OccupancyAccumulator occupancy;
};

struct Simulated {
    std::vector<TrajectoryRecord> trajectories;
    JumpFunctional jump;
    FrequencyMatrix occupancy;
    double drift = 0.0;
};

Simulated simulate_replications(const ExperimentConfig& cfg, bool standard, std::ostream* trace) {
    const int m = cfg.params.servers;
    const SimulationOptions options{cfg.orbit_cap, cfg.burn_in};
    auto reps = detail::parallel_map(
        static_cast<std::size_t>(cfg.replications), cfg.threads, [&](std::size_t k) {
            Replication rep{{}, JumpCounts(m), OccupancyAccumulator(m)};
            std::vector<EventSink*> sinks{&rep.jumps, &rep.occupancy};
            std::optional<TraceSink> tracer;
            if (trace && k == 0) {
                tracer.emplace(*trace);
                sinks.push_back(&*tracer);
            }
            const std::uint64_t seed = derive_seed(cfg.seed, k);
            rep.record = standard ? simulate_standard(m, cfg.params.mu1, cfg.arrival, cfg.horizon, seed, sinks, options)
                                  : simulate_retrial(cfg.params, cfg.arrival, cfg.horizon, seed, sinks, options);
            return rep;
        });

    JumpCounts jumps(m);
    OccupancyAccumulator occupancy(m);
    Simulated out;
    for (const auto& rep : reps) {
        jumps.merge(rep.jumps);
        occupancy.merge(rep.occupancy);
        out.trajectories.push_back(rep.record);
        out.drift += static_cast<double>(rep.record.final_state.q2) / rep.record.horizon;
    }
    out.drift /= static_cast<double>(reps.size());
    out.jump = jumps.finalize();
    out.occupancy = occupancy.frequencies();
    return out;
}

void run_retrial(const ExperimentConfig& cfg, ExperimentReport& report, std::ostream* trace) {
    auto sim = simulate_replications(cfg, false, trace);
    report.trajectories = std::move(sim.trajectories);
    report.orbit_drift = sim.drift;
    report.occupancy = sim.occupancy;
    report.jump = sim.jump;
    // Unstable: no limiting frequencies to solve for.
    if (report.stability != Stability::stable) return;

    const double epsilon = cfg.epsilon.value_or(1.0 / sim.jump.horizon());
    report.truncation = truncation_level(sim.jump, epsilon);
    const auto system = assemble_system(sim.jump, cfg.params, report.truncation);
    const auto solved = solve_frequencies(system);
    report.solver = solved.frequencies;
    report.balance_residual = solved.residual;
    report.clipped = solved.clipped;
    report.condition = solved.condition;
    report.ill_conditioned = solved.ill_conditioned;
    report.route_discrepancy = max_abs_difference(*report.solver, *report.occupancy);

    if (const auto* poisson = std::get_if<Poisson>(&cfg.arrival)) {
        const long j = std::max(cfg.ctmc_truncation, report.truncation);
        const auto stationary = stationary_distribution(build_markov_generator(poisson->rate, cfg.params, j));
        report.oracle = stationary.pi;
        report.oracle_residual = stationary.residual;
        report.solver_vs_oracle = max_abs_difference(*report.solver, stationary.pi);
        report.occupancy_vs_oracle = max_abs_difference(*report.occupancy, stationary.pi);
    }
}

void run_standard(const ExperimentConfig& cfg, ExperimentReport& report, std::ostream* trace) {
    auto sim = simulate_replications(cfg, true, trace);
    report.trajectories = std::move(sim.trajectories);
    report.orbit_drift = sim.drift;
    report.occupancy = sim.occupancy;
    report.jump = sim.jump;
    if (is_dm2_setting(cfg.params.servers, cfg.params.mu1, cfg.arrival)) {
        const long levels = sim.occupancy.truncation() + 2;
        report.oracle = dm2_reference().as_frequencies(levels);
        report.occupancy_vs_oracle = max_abs_difference(*report.occupancy, *report.oracle);
    }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, std::ostream* trace) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();

    ExperimentReport report;
    report.config = config;
    report.stability = check_stability(config.arrival, config.params);

    switch (config.mode) {
        case Mode::retrial:
            run_retrial(config, report, trace);
            break;
        case Mode::standard:
            run_standard(config, report, trace);
            break;
        case Mode::markov_oracle: {
            const auto* poisson = std::get_if<Poisson>(&config.arrival);
            if (!poisson) throw ConfigError("markov-oracle mode needs poisson arrivals");
            const auto model = build_markov_generator(poisson->rate, config.params, config.ctmc_truncation);
            const auto stationary = stationary_distribution(model);
            report.oracle = stationary.pi;
            report.oracle_residual = stationary.residual;
            break;
        }
        case Mode::dm2_oracle:
            if (!is_dm2_setting(config.params.servers, config.params.mu1, config.arrival)) {
                throw ConfigError("dm2-oracle mode covers only m=2, mu1=1, deterministic unit arrivals");
            }
            report.oracle = dm2_reference().as_frequencies(40);
            break;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string render_table(const std::vector<TableColumn>& columns) {
    constexpr double kDash = 5e-5;
    if (columns.empty()) return {};
    const int m = columns.front().values.servers();
    long width = 0;
    for (const auto& c : columns) width = std::max(width, c.values.truncation());

    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-8s", "(i,j)");
    os << buf;
    for (const auto& c : columns) {
        std::snprintf(buf, sizeof buf, " %14s", c.title.c_str());
        os << buf;
    }
    os << '\n';
    for (int i = 0; i <= m; ++i) {
        for (long j = 0; j <= width; ++j) {
            bool any = false;
            for (const auto& c : columns) any = any || c.values.at(i, j) >= kDash;
            if (!any) continue;
            std::snprintf(buf, sizeof buf, "(%d,%ld)", i, j);
            std::string label = buf;
            std::snprintf(buf, sizeof buf, "%-8s", label.c_str());
            os << buf;
            for (const auto& c : columns) {
                const double v = c.values.at(i, j);
                const std::string cell = v >= kDash ? fixed(v) : "-";
                std::snprintf(buf, sizeof buf, " %14s", cell.c_str());
                os << buf;
            }
            os << '\n';
        }
    }
    return os.str();
}

std::string summarize(const ExperimentReport& r) {
    const auto& c = r.config;
    std::ostringstream os;
    os << "mode            " << to_string(c.mode) << '\n'
       << "arrival         " << describe(c.arrival) << '\n'
       << "servers         " << c.params.servers << '\n'
       << "mu1             " << general(c.params.mu1) << '\n'
       << "mu2             " << general(c.params.mu2) << '\n'
       << "stability       " << to_string(r.stability) << '\n';
    if (r.stability == Stability::unstable_or_critical) {
        os << "warning         arrival rate >= m*mu1; limiting frequencies need not exist\n";
    }
    if (!r.trajectories.empty()) {
        os << "horizon         " << general(c.horizon) << '\n'
           << "replications    " << c.replications << '\n'
           << "seed            " << c.seed << '\n';
        std::uint64_t arrivals = 0;
        std::uint64_t completions = 0;
        std::uint64_t blocked = 0;
        std::uint64_t retrials = 0;
        bool conserved = true;
        for (const auto& t : r.trajectories) {
            arrivals += t.arrivals;
            completions += t.completions;
            blocked += t.blocked;
            retrials += t.retrials;
            const auto q1 = static_cast<std::uint64_t>(t.final_state.q1);
            const auto q2 = static_cast<std::uint64_t>(t.final_state.q2);
            conserved = conserved && t.arrivals == t.completions + q1 + q2 && t.blocked == t.retrials + q2;
        }
        os << "arrivals        " << arrivals << '\n'
           << "completions     " << completions << '\n'
           << "blocked         " << blocked << '\n'
           << "retrials        " << retrials << '\n'
           << "conservation    " << (conserved ? "exact" : "VIOLATED") << '\n'
           << "orbit drift     " << general(r.orbit_drift) << "  (q2(T)/T)\n";
    }
    if (r.solver) {
        os << "W               " << r.truncation << '\n'
           << "residual        " << general(r.balance_residual) << '\n'
           << "clipped         " << r.clipped << '\n'
           << "condition       " << general(r.condition) << (r.ill_conditioned ? "  (ill-conditioned)" : "")
           << '\n';
    }
    if (r.route_discrepancy) os << "solver-occupancy max diff  " << general(*r.route_discrepancy) << '\n';
    if (r.oracle_residual) os << "oracle residual ||pi G||   " << general(*r.oracle_residual) << '\n';
    if (r.solver_vs_oracle) os << "solver-oracle max diff     " << general(*r.solver_vs_oracle) << '\n';
    if (r.occupancy_vs_oracle) os << "occupancy-oracle max diff  " << general(*r.occupancy_vs_oracle) << '\n';

    std::vector<TableColumn> cols;
    if (r.solver) cols.push_back({"solver", *r.solver});
    if (r.occupancy) cols.push_back({"occupancy", *r.occupancy});
    if (r.oracle) cols.push_back({"oracle", *r.oracle});
    if (r.stability != Stability::stable) cols.clear();
    if (!cols.empty()) os << '\n' << render_table(cols);
    return os.str();
}

void write_artifacts(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto emit = [&](const std::string& name, auto&& writer) {
        std::ofstream out(dir / name);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        writer(out);
    };
    if (report.jump) emit("jump_functional.csv", [&](std::ostream& o) { write_csv(o, *report.jump); });
    if (report.solver) emit("solver_frequencies.csv", [&](std::ostream& o) { write_csv(o, *report.solver); });
    if (report.occupancy) emit("occupancy_frequencies.csv", [&](std::ostream& o) { write_csv(o, *report.occupancy); });
    if (report.oracle) emit("oracle_frequencies.csv", [&](std::ostream& o) { write_csv(o, *report.oracle); });
    emit("summary.txt", [&](std::ostream& o) { o << summarize(report); });
}

// ---------------------------------------------------------------------------

std::vector<PublishedCell> load_published_cells(const std::filesystem::path& csv) {
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot open published table data " + csv.string());
    std::vector<PublishedCell> cells;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#' || line.rfind("table,", 0) == 0) continue;
        std::vector<std::string> f;
        std::istringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) f.push_back(field);
        if (f.size() != 7) {
            throw std::runtime_error(csv.string() + ":" + std::to_string(line_no) + ": expected 7 fields");
        }
        PublishedCell c;
        c.table = std::stoi(f[0]);
        c.column = f[1];
        c.kind = f[2];
        c.i = f[3].empty() ? 0 : std::stoi(f[3]);
        c.j = f[4].empty() ? 0 : std::stol(f[4]);
        if (f[5] != "-") c.value = std::stod(f[5]);
        c.tolerance = std::stod(f[6]);
        cells.push_back(c);
    }
    return cells;
}

bool TableReproduction::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CellCheck& c) { return c.pass; });
}

std::string TableReproduction::render_checks() const {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-14s %-6s %10s %10s %10s %10s  %s\n", "column", "cell", "published", "measured",
                  "|diff|", "tol", "result");
    os << buf;
    for (const auto& c : checks) {
        std::string cell;
        if (c.cell.kind == "P") cell = "(" + std::to_string(c.cell.i) + "," + std::to_string(c.cell.j) + ")";
        else if (c.cell.kind == "Pt") cell = "k=" + std::to_string(c.cell.i);
        else cell = "W";
        const std::string expected = c.cell.value ? (c.cell.kind == "W" ? std::to_string(static_cast<long>(*c.cell.value))
                                                                     : fixed(*c.cell.value))
                                               : "-";
        const std::string measured = c.cell.kind == "W" ? std::to_string(static_cast<long>(c.measured)) : fixed(c.measured);
        std::snprintf(buf, sizeof buf, "%-14s %-6s %10s %10s %10s %10s  %s\n", c.cell.column.c_str(), cell.c_str(),
                      expected.c_str(), measured.c_str(), fixed(c.difference).c_str(), general(c.cell.tolerance).c_str(),
                      c.pass ? "ok" : "FAIL");
        os << buf;
    }
    return os.str();
}

namespace {

struct ColumnRun {
    std::string title;
    FrequencyMatrix values;
    std::optional<long> truncation;
};

struct ColumnJob {
    std::string title;
    Mode mode;
    double mu1;
    double mu2;
    ArrivalSpec arrival;
};

ColumnRun run_column(const ColumnJob& job, std::uint64_t seed, double horizon) {
    if (job.mode == Mode::dm2_oracle) return {job.title, dm2_reference().as_frequencies(40), std::nullopt};
    ExperimentConfig cfg;
    cfg.mode = job.mode;
    cfg.params = SystemParams{2, job.mu1, job.mu2};
    cfg.arrival = job.arrival;
    cfg.horizon = horizon;
    cfg.seed = seed;
    cfg.threads = 1;
    const auto report = run_experiment(cfg);
    if (job.mode == Mode::retrial) return {job.title, *report.solver, report.truncation};
    return {job.title, *report.occupancy, std::nullopt};
}

std::vector<ColumnJob> table_jobs(int table) {
    const ArrivalSpec det = Deterministic{1.0};
    switch (table) {
        case 1:
        case 2: {
            const double mu1 = table == 1 ? 2.5 : 1.0;
            return {{"mu2=0.1", Mode::retrial, mu1, 0.1, det},
                    {"mu2=1", Mode::retrial, mu1, 1.0, det},
                    {"mu2=10", Mode::retrial, mu1, 10.0, det}};
        }
        case 3:
            return {{"retrial", Mode::retrial, 1.0, 10.0, det}, {"standard", Mode::dm2_oracle, 1.0, 10.0, det}};
        case 4:
            return {{"retrial", Mode::retrial, 0.6, 10.0, det}, {"standard", Mode::standard, 0.6, 10.0, det}};
        case 5:
            return {{"alternating", Mode::retrial, 1.0, 10.0, AlternatingUniform{}},
                    {"deterministic", Mode::retrial, 1.0, 10.0, det}};
        default:
            throw std::invalid_argument("table id must be 1..5");
    }
}

}  // namespace

TableReproduction reproduce_table(int table, std::uint64_t seed, const std::vector<PublishedCell>& published,
                                  double horizon, int threads) {
    const auto jobs = table_jobs(table);
    const auto runs = detail::parallel_map(jobs.size(), threads,
                                           [&](std::size_t k) { return run_column(jobs[k], seed, horizon); });

    TableReproduction out;
    out.table = table;
    std::map<std::string, const ColumnRun*> by_title;
    for (const auto& run : runs) {
        out.columns.push_back({run.title, run.values});
        if (run.truncation) out.truncation_levels.emplace_back(run.title, *run.truncation);
        by_title[run.title] = &run;
    }

    for (const auto& cell : published) {
        if (cell.table != table) continue;
        const auto it = by_title.find(cell.column);
        if (it == by_title.end()) throw std::runtime_error("published data names unknown column '" + cell.column + "'");
        const ColumnRun& run = *it->second;
        CellCheck check{cell, 0.0, 0.0, false};
        const double expected = cell.value.value_or(0.0);
        if (cell.kind == "W") {
            if (!run.truncation) throw std::runtime_error("column '" + cell.column + "' has no truncation level");
            check.measured = static_cast<double>(*run.truncation);
        } else if (cell.kind == "Pt") {
            check.measured = run.values.level(cell.i);
        } else if (cell.kind == "P") {
            check.measured = run.values.at(cell.i, cell.j);
        } else {
            throw std::runtime_error("unknown published cell kind '" + cell.kind + "'");
        }
        check.difference = std::abs(check.measured - expected);
        check.pass = check.difference <= cell.tolerance;
        out.checks.push_back(check);
    }

    std::ostringstream os;
    os << "Table " << table << " (T=" << general(horizon) << ", seed=" << seed << ")\n";
    // Standard-queue columns appear in the (min(k,2), k-2) layout, so row (i,j) holds level k = i + j.
    os << render_table(out.columns);
    for (const auto& [title, w] : out.truncation_levels) os << "W[" << title << "] = " << w << '\n';
    out.rendered = os.str();
    return out;
}

// ---------------------------------------------------------------------------

std::string ConvergenceReport::render() const {
    std::ostringstream os;
    char buf[64];
    os << "reference: "
       << (source == ReferenceSource::dm2_analytic ? "closed-form D/M/2" : "standard-queue simulation") << '\n';
    std::snprintf(buf, sizeof buf, "%10s %6s", "mu2", "W");
    os << buf;
    const std::size_t moments = points.empty() ? 0 : points.front().orbit_moments.size();
    for (std::size_t i = 0; i < moments; ++i) {
        std::snprintf(buf, sizeof buf, " %12s", ("S_" + std::to_string(i)).c_str());
        os << buf;
    }
    std::snprintf(buf, sizeof buf, " %12s\n", "D(mu2)");
    os << buf;
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%10s %6ld", general(p.mu2).c_str(), p.truncation);
        os << buf;
        for (double s : p.orbit_moments) {
            std::snprintf(buf, sizeof buf, " %12.6f", s);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, " %12.6f\n", p.discrepancy);
        os << buf;
    }
    return os.str();
}

ConvergenceReport convergence_study(int servers, double mu1, const std::vector<double>& mu2_grid,
                                    const ArrivalSpec& arrival, double horizon, std::uint64_t seed,
                                    ReferenceSource source, int threads) {
    if (mu2_grid.empty()) throw std::invalid_argument("mu2 grid is empty");
    if (check_stability(arrival, SystemParams{servers, mu1, 1.0}) != Stability::stable) {
        throw std::invalid_argument("convergence study needs stable parameters");
    }
    if (source == ReferenceSource::automatic) {
        source = is_dm2_setting(servers, mu1, arrival) ? ReferenceSource::dm2_analytic
                                                        : ReferenceSource::standard_simulation;
    }
    if (source == ReferenceSource::dm2_analytic && !is_dm2_setting(servers, mu1, arrival)) {
        throw std::invalid_argument("closed-form reference needs m=2, mu1=1, unit deterministic arrivals");
    }

    ConvergenceReport report;
    report.source = source;

    // Job 0 is the reference; jobs 1.. are the grid points.
    const auto results = detail::parallel_map(mu2_grid.size() + 1, threads, [&](std::size_t k) {
        ExperimentConfig cfg;
        cfg.params = SystemParams{servers, mu1, k == 0 ? 1.0 : mu2_grid[k - 1]};
        cfg.arrival = arrival;
        cfg.horizon = horizon;
        cfg.seed = seed;
        cfg.threads = 1;
        if (k == 0) {
            if (source == ReferenceSource::dm2_analytic) {
                return std::pair{dm2_reference().as_frequencies(60), -1L};
            }
            cfg.mode = Mode::standard;
            return std::pair{*run_experiment(cfg).occupancy, -1L};
        }
        const auto r = run_experiment(cfg);
        return std::pair{*r.solver, r.truncation};
    });

    report.reference = results.front().first;
    for (std::size_t k = 1; k < results.size(); ++k) {
        ConvergencePoint point;
        point.mu2 = mu2_grid[k - 1];
        point.frequencies = results[k].first;
        point.truncation = results[k].second;
        const auto& p = point.frequencies;
        for (int i = 0; i < servers; ++i) {
            double s = 0.0;
            for (long j = 1; j <= p.truncation(); ++j) s += static_cast<double>(j) * p.at(i, j);
            point.orbit_moments.push_back(s);
        }
        double d = 0.0;
        for (int i = 0; i <= servers; ++i) d = std::max(d, std::abs(p.at(i, 0) - report.reference.level(i)));
        for (long j = 0; j <= p.truncation(); ++j) {
            d = std::max(d, std::abs(p.at(servers, j) - report.reference.level(servers + j)));
        }
        point.discrepancy = d;
        report.points.push_back(std::move(point));
    }
    return report;
}

}  // namespace retrial
