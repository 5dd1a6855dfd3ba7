#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>

#include "retrial/engine.hpp"
#include "retrial/state_matrix.hpp"

namespace retrial {

/// Limiting frequencies P(i,j), i in 0..m, j in 0..W.
class FrequencyMatrix {
public:
    FrequencyMatrix() = default;
    FrequencyMatrix(int servers, long truncation)
        : cells_(servers, static_cast<std::size_t>(truncation) + 1) {}
    explicit FrequencyMatrix(StateMatrix<double> cells) : cells_(std::move(cells)) {}

    int servers() const { return cells_.servers(); }
    long truncation() const { return static_cast<long>(cells_.width()) - 1; }

    double at(int i, long j) const { return cells_.at(i, j); }
    double& ref(int i, long j) { return cells_.ref(i, static_cast<std::size_t>(j)); }
    double sum() const { return cells_.sum(); }

    /// Mass of the standard-queue length k, read through the (min(k,m), k-m) layout.
    double level(long k) const;

    const StateMatrix<double>& cells() const { return cells_; }

private:
    StateMatrix<double> cells_;
};

/// Largest per-cell absolute difference over the union of both supports.
double max_abs_difference(const FrequencyMatrix& a, const FrequencyMatrix& b);

/// Time spent in each state; the cells partition the observed window.
class OccupancyAccumulator final : public EventSink {
public:
    explicit OccupancyAccumulator(int servers) : time_(servers) {}

    void record_sojourn(const QueueState& state, double dt);
    void on_sojourn(const QueueState& state, double, double duration) override {
        record_sojourn(state, duration);
    }

    int servers() const { return time_.servers(); }
    double total_time() const { return total_; }
    double time_at(int i, long j) const { return time_.at(i, j); }
    const StateMatrix<double>& cells() const { return time_; }

    /// Cellwise sum; throws on mismatched server counts.
    void merge(const OccupancyAccumulator& other);

    /// Time fractions; width trimmed to the last visited orbit level.
    FrequencyMatrix frequencies() const;

private:
    StateMatrix<double> time_;
    double total_ = 0.0;
};

/// Arrival-weighted pre-jump values a(i,j) = (#arrivals seeing (i,j)) / T.
class JumpFunctional {
public:
    JumpFunctional() = default;
    JumpFunctional(StateMatrix<double> values, double horizon, std::uint64_t arrivals)
        : values_(std::move(values)), horizon_(horizon), arrivals_(arrivals) {}

    int servers() const { return values_.servers(); }
    double at(int i, long j) const { return values_.at(i, j); }
    double horizon() const { return horizon_; }
    std::uint64_t total_arrivals() const { return arrivals_; }
    const StateMatrix<double>& values() const { return values_; }

private:
    StateMatrix<double> values_;
    double horizon_ = 0.0;
    std::uint64_t arrivals_ = 0;
};

/// Integer arrival counts by pre-jump state plus the observed horizon.
class JumpCounts final : public EventSink {
public:
    explicit JumpCounts(int servers) : counts_(servers) {}

    void record_arrival_jump(const QueueState& pre_jump);
    void add_horizon(double duration) { horizon_ += duration; }

    void on_arrival(const QueueState& pre_jump) override { record_arrival_jump(pre_jump); }
    void on_sojourn(const QueueState&, double, double duration) override { horizon_ += duration; }

    int servers() const { return counts_.servers(); }
    std::uint64_t count(int i, long j) const { return counts_.at(i, j); }
    std::uint64_t total_arrivals() const { return arrivals_; }
    double horizon() const { return horizon_; }
    const StateMatrix<std::uint64_t>& cells() const { return counts_; }

    void merge(const JumpCounts& other);

    /// Divides counts by the accumulated horizon.
    JumpFunctional finalize() const;

private:
    StateMatrix<std::uint64_t> counts_;
    std::uint64_t arrivals_ = 0;
    double horizon_ = 0.0;
};

OccupancyAccumulator merge(OccupancyAccumulator x, const OccupancyAccumulator& y);
JumpCounts merge(JumpCounts x, const JumpCounts& y);

class DegenerateRun : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// W = max{ j : a(i,j) >= epsilon for some i }. Throws DegenerateRun when no
/// cell reaches epsilon.
long truncation_level(const JumpFunctional& fn, double epsilon);

/// Default threshold 1/T.
long truncation_level(const JumpFunctional& fn);

// CSV layout shared by all matrices: header `i,j,value`, one row per cell.
void write_csv(std::ostream& out, const StateMatrix<double>& cells);
void write_csv(std::ostream& out, const FrequencyMatrix& p);
/// Adds a `# horizon=<T> arrivals=<A>` comment ahead of the header.
void write_csv(std::ostream& out, const JumpFunctional& fn);

/// Reads the `i,j,value` layout; `#` lines are comments, and a
/// `# horizon=... arrivals=...` comment restores those fields.
JumpFunctional read_jump_functional_csv(std::istream& in);
FrequencyMatrix read_frequency_csv(std::istream& in);

}  // namespace retrial
