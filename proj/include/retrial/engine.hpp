#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string_view>

#include "retrial/arrivals.hpp"

namespace retrial {

/// Server count m, per-server service rate mu1 and per-customer retrial rate mu2.
struct SystemParams {
    int servers = 1;
    double mu1 = 1.0;
    double mu2 = 1.0;

    void validate() const;
};

struct QueueState {
    double t = 0.0;
    int q1 = 0;   // busy servers, 0..m
    long q2 = 0;  // orbit size (waiting line for the standard queue)

    bool operator==(const QueueState&) const = default;
};

enum class EventKind {
    arrival_to_server,
    arrival_to_orbit,
    service_completion,
    retrial_success,
};

std::string_view to_string(EventKind kind);

enum class Stability { stable, unstable_or_critical };

std::string_view to_string(Stability s);

/// Stable iff the long-run arrival rate is strictly below m * mu1.
Stability check_stability(const ArrivalSpec& arrival, const SystemParams& params);

/// Observer of a running simulation. All hooks default to no-ops.
class EventSink {
public:
    virtual ~EventSink() = default;
    /// The process sat in `state` on [begin, begin + duration).
    virtual void on_sojourn(const QueueState& state, double begin, double duration) {
        (void)state, (void)begin, (void)duration;
    }
    /// An arrival is about to be applied; `pre_jump` is the state at t-.
    virtual void on_arrival(const QueueState& pre_jump) { (void)pre_jump; }
    virtual void on_transition(EventKind kind, const QueueState& post) { (void)kind, (void)post; }
};

/// Writes one line per transition: `<time> <kind> <q1> <q2>`.
class TraceSink final : public EventSink {
public:
    explicit TraceSink(std::ostream& out) : out_(out) {}
    void on_transition(EventKind kind, const QueueState& post) override;

private:
    std::ostream& out_;
};

struct SimulationOptions {
    long orbit_cap = 1'000'000;
    /// Sinks only observe (burn_in, horizon]; the record always covers [0, horizon].
    double burn_in = 0.0;
};

/// Counts over [0, horizon]. For the standard queue `blocked` counts arrivals
/// that had to wait and `retrials` counts waiting customers entering service.
struct TrajectoryRecord {
    double horizon = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t completions = 0;
    std::uint64_t blocked = 0;
    std::uint64_t retrials = 0;
    QueueState final_state;
    Stability stability = Stability::stable;

    bool operator==(const TrajectoryRecord&) const = default;
};

class OrbitOverflow : public std::runtime_error {
public:
    explicit OrbitOverflow(long cap);
    long cap() const { return cap_; }

private:
    long cap_;
};

/// Retrial queue from the empty state: arrivals join a free server or the
/// orbit; orbit customers retry at rate mu2 each, only while a server is free.
TrajectoryRecord simulate_retrial(const SystemParams& params, const ArrivalSpec& arrival,
                                  double horizon, std::uint64_t seed,
                                  std::span<EventSink* const> sinks = {},
                                  const SimulationOptions& options = {});

/// Standard A/M/m/infinity queue. States are reported as (min(q,m), max(q-m,0)),
/// so cell (i,j) of any accumulator holds the mass of q = i + j.
TrajectoryRecord simulate_standard(int servers, double mu1, const ArrivalSpec& arrival,
                                   double horizon, std::uint64_t seed,
                                   std::span<EventSink* const> sinks = {},
                                   const SimulationOptions& options = {});

}  // namespace retrial
