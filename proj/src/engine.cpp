#include "retrial/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace retrial {

void SystemParams::validate() const {
    if (servers < 1) throw std::invalid_argument("server count m must be >= 1");
    if (!(std::isfinite(mu1) && mu1 > 0.0)) throw std::invalid_argument("mu1 must be positive");
    if (!(std::isfinite(mu2) && mu2 > 0.0)) throw std::invalid_argument("mu2 must be positive");
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::arrival_to_server: return "arrival";
        case EventKind::arrival_to_orbit: return "blocked";
        case EventKind::service_completion: return "service";
        case EventKind::retrial_success: return "retrial";
    }
    return "unknown";
}

std::string_view to_string(Stability s) {
    return s == Stability::stable ? "stable" : "unstable-or-critical";
}

Stability check_stability(const ArrivalSpec& arrival, const SystemParams& params) {
    const double lambda = mean_rate(arrival);
    return lambda < params.mu1 * params.servers ? Stability::stable
                                                : Stability::unstable_or_critical;
}

void TraceSink::on_transition(EventKind kind, const QueueState& post) {
    char time[32];
    std::snprintf(time, sizeof time, "%.17g", post.t);
    out_ << time << ' ' << to_string(kind) << ' ' << post.q1 << ' ' << post.q2 << '\n';
}

OrbitOverflow::OrbitOverflow(long cap)
    : std::runtime_error("orbit size exceeded the hard cap of " + std::to_string(cap) +
                         " customers"),
      cap_(cap) {}

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

// Fans events out to sinks. Sojourns are clipped to [from, to]; with a burn-in,
// jumps at exactly `from` belong to the run that ends there.
class Dispatch {
public:
    Dispatch(std::span<EventSink* const> sinks, double from, double to)
        : sinks_(sinks), from_(from), to_(to) {}

    void sojourn(const QueueState& s, double begin, double end) const {
        begin = std::max(begin, from_);
        end = std::min(end, to_);
        if (end <= begin) return;
        for (EventSink* sink : sinks_) sink->on_sojourn(s, begin, end - begin);
    }
    void arrival(const QueueState& pre) const {
        if (from_ > 0.0 && pre.t <= from_) return;
        for (EventSink* sink : sinks_) sink->on_arrival(pre);
    }
    void transition(EventKind kind, const QueueState& post) const {
        if (from_ > 0.0 && post.t <= from_) return;
        for (EventSink* sink : sinks_) sink->on_transition(kind, post);
    }

private:
    std::span<EventSink* const> sinks_;
    double from_;
    double to_;
};

void check_run_args(double horizon, const SimulationOptions& options) {
    if (!(std::isfinite(horizon) && horizon > 0.0)) {
        throw std::invalid_argument("horizon must be positive and finite");
    }
    if (!(options.burn_in >= 0.0 && options.burn_in < horizon)) {
        throw std::invalid_argument("burn-in must lie in [0, horizon)");
    }
    if (options.orbit_cap < 1) throw std::invalid_argument("orbit cap must be >= 1");
}

}  // namespace

TrajectoryRecord simulate_retrial(const SystemParams& params, const ArrivalSpec& arrival,
                                  double horizon, std::uint64_t seed,
                                  std::span<EventSink* const> sinks,
                                  const SimulationOptions& options) {
    params.validate();
    check_run_args(horizon, options);

    TrajectoryRecord record;
    record.horizon = horizon;
    record.stability = check_stability(arrival, params);

    const Dispatch out(sinks, options.burn_in, horizon);
    ArrivalStream stream(arrival, derive_seed(seed, 0));
    Rng clocks(derive_seed(seed, 1));

    const int m = params.servers;
    QueueState s;
    double next_arrival = stream.next_epoch();

    for (;;) {
        const double service_rate = params.mu1 * s.q1;
        // Orbit customers cannot retry while every server is busy.
        const double retrial_rate = s.q1 < m ? params.mu2 * static_cast<double>(s.q2) : 0.0;
        const double total = service_rate + retrial_rate;
        const double next_clock = total > 0.0 ? s.t + clocks.exponential(total) : kNever;

        // Ties go to the arrival.
        const bool arrival_first = next_arrival <= next_clock;
        const double t_next = arrival_first ? next_arrival : next_clock;
        if (t_next > horizon) {
            out.sojourn(s, s.t, horizon);
            break;
        }
        out.sojourn(s, s.t, t_next);
        s.t = t_next;

        EventKind kind;
        if (arrival_first) {
            out.arrival(s);
            ++record.arrivals;
            if (s.q1 < m) {
                ++s.q1;
                kind = EventKind::arrival_to_server;
            } else {
                if (s.q2 >= options.orbit_cap) throw OrbitOverflow(options.orbit_cap);
                ++s.q2;
                ++record.blocked;
                kind = EventKind::arrival_to_orbit;
            }
            next_arrival = stream.next_epoch();
        } else if (clocks.uniform_open() * total < service_rate) {
            --s.q1;
            ++record.completions;
            kind = EventKind::service_completion;
        } else {
            ++s.q1;
            --s.q2;
            ++record.retrials;
            kind = EventKind::retrial_success;
        }
        out.transition(kind, s);
    }

    s.t = horizon;
    record.final_state = s;
    return record;
}

TrajectoryRecord simulate_standard(int servers, double mu1, const ArrivalSpec& arrival,
                                   double horizon, std::uint64_t seed,
                                   std::span<EventSink* const> sinks,
                                   const SimulationOptions& options) {
    const SystemParams params{servers, mu1, 1.0};
    params.validate();
    check_run_args(horizon, options);

    TrajectoryRecord record;
    record.horizon = horizon;
    record.stability = check_stability(arrival, params);

    const Dispatch out(sinks, options.burn_in, horizon);
    ArrivalStream stream(arrival, derive_seed(seed, 0));
    Rng clocks(derive_seed(seed, 1));

    long q = 0;
    double t = 0.0;
    auto view = [&] {
        return QueueState{t, static_cast<int>(std::min<long>(q, servers)),
                          std::max<long>(q - servers, 0)};
    };
    double next_arrival = stream.next_epoch();

    for (;;) {
        const double rate = mu1 * static_cast<double>(std::min<long>(q, servers));
        const double next_departure = rate > 0.0 ? t + clocks.exponential(rate) : kNever;
        const bool arrival_first = next_arrival <= next_departure;
        const double t_next = arrival_first ? next_arrival : next_departure;
        if (t_next > horizon) {
            out.sojourn(view(), t, horizon);
            break;
        }
        out.sojourn(view(), t, t_next);
        t = t_next;

        EventKind kind;
        if (arrival_first) {
            out.arrival(view());
            ++record.arrivals;
            if (q < servers) {
                kind = EventKind::arrival_to_server;
            } else {
                if (q - servers >= options.orbit_cap) throw OrbitOverflow(options.orbit_cap);
                ++record.blocked;
                kind = EventKind::arrival_to_orbit;
            }
            ++q;
            next_arrival = stream.next_epoch();
        } else {
            if (q > servers) ++record.retrials;
            --q;
            ++record.completions;
            kind = EventKind::service_completion;
        }
        out.transition(kind, view());
    }

    t = horizon;
    record.final_state = view();
    return record;
}

}  // namespace retrial
