#pragma once

// Independent models used only to cross-check the library.

#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "retrial/arrivals.hpp"
#include "retrial/engine.hpp"
#include "retrial/estimators.hpp"

namespace retrial::testing {

struct ReferenceRun {
    FrequencyMatrix occupancy;
    FrequencyMatrix jump;  // arrivals by pre-jump state, divided by T
    std::uint64_t arrivals = 0;
};

/// Retrial queue driven by an event calendar with one exponential clock per
/// busy server and per orbit customer. A retrial that finds every server busy
/// fails and the customer draws a fresh clock.
inline ReferenceRun per_customer_retrial(const SystemParams& p, const ArrivalSpec& arrival, double horizon,
                                         std::uint64_t seed) {
    enum Kind { arrive, finish, retry };
    struct Event {
        double t;
        Kind kind;
        bool operator>(const Event& o) const { return t > o.t; }
    };
    std::priority_queue<Event, std::vector<Event>, std::greater<>> calendar;
    std::mt19937_64 gen(seed);
    std::exponential_distribution<double> service(p.mu1);
    std::exponential_distribution<double> retrial(p.mu2);
    ArrivalStream stream(arrival, seed ^ 0xA5A5A5A5ULL);

    ReferenceRun run{FrequencyMatrix(p.servers, 0), FrequencyMatrix(p.servers, 0), 0};
    int q1 = 0;
    long q2 = 0;
    double now = 0.0;
    calendar.push({stream.next_epoch(), arrive});
    while (true) {
        const Event e = calendar.top();
        const double until = std::min(e.t, horizon);
        run.occupancy.ref(q1, q2) += until - now;
        now = until;
        if (e.t > horizon) break;
        calendar.pop();
        switch (e.kind) {
            case arrive:
                run.jump.ref(q1, q2) += 1.0;
                ++run.arrivals;
                if (q1 < p.servers) {
                    ++q1;
                    calendar.push({now + service(gen), finish});
                } else {
                    ++q2;
                    calendar.push({now + retrial(gen), retry});
                }
                calendar.push({stream.next_epoch(), arrive});
                break;
            case finish:
                --q1;
                break;
            case retry:
                if (q1 < p.servers) {
                    ++q1;
                    --q2;
                    calendar.push({now + service(gen), finish});
                } else {
                    calendar.push({now + retrial(gen), retry});
                }
                break;
        }
    }
    StateMatrix<double> occ = run.occupancy.cells();
    StateMatrix<double> jmp = run.jump.cells();
    for (int i = 0; i <= p.servers; ++i) {
        for (std::size_t j = 0; j < occ.width(); ++j) occ.ref(i, j) /= horizon;
        for (std::size_t j = 0; j < jmp.width(); ++j) jmp.ref(i, j) /= horizon;
    }
    run.occupancy = FrequencyMatrix(occ);
    run.jump = FrequencyMatrix(jmp);
    return run;
}

/// Visit frequencies of the uniformized Markovian retrial chain with the orbit
/// capped at `cap` (arrivals that would exceed it are lost).
inline FrequencyMatrix uniformized_frequencies(double lambda, const SystemParams& p, long cap, std::uint64_t steps,
                                               std::uint64_t seed) {
    const double total = lambda + p.servers * p.mu1 + p.mu2 * static_cast<double>(cap);
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, total);
    StateMatrix<double> visits(p.servers, static_cast<std::size_t>(cap) + 1);
    int q1 = 0;
    long q2 = 0;
    for (std::uint64_t s = 0; s < steps; ++s) {
        visits.ref(q1, static_cast<std::size_t>(q2)) += 1.0;
        double x = u(gen);
        if (x < lambda) {
            if (q1 < p.servers) ++q1;
            else if (q2 < cap) ++q2;
            continue;
        }
        x -= lambda;
        if (x < q1 * p.mu1) {
            --q1;
            continue;
        }
        x -= p.servers * p.mu1;
        if (x >= 0.0 && x < q2 * p.mu2 && q1 < p.servers) {
            ++q1;
            --q2;
        }
    }
    for (int i = 0; i <= p.servers; ++i) {
        for (std::size_t j = 0; j < visits.width(); ++j) visits.ref(i, j) /= static_cast<double>(steps);
    }
    return FrequencyMatrix(visits);
}

/// Standard M/M/m queue: stationary probability of k customers.
inline double mmm_level(double lambda, double mu, int m, long k) {
    const double a = lambda / mu;
    const double rho = a / m;
    if (rho >= 1.0) throw std::invalid_argument("unstable M/M/m");
    std::vector<double> head(static_cast<std::size_t>(m) + 1);
    head[0] = 1.0;
    for (int n = 1; n <= m; ++n) head[n] = head[n - 1] * a / n;
    double norm = 0.0;
    for (int n = 0; n < m; ++n) norm += head[n];
    norm += head[m] / (1.0 - rho);
    if (k <= m) return head[static_cast<std::size_t>(k)] / norm;
    return head[m] * std::pow(rho, static_cast<double>(k - m)) / norm;
}

/// D/M/2 with unit gaps and unit service rate, solved numerically: the chain
/// embedded at arrival epochs is built from the matrix exponential of the
/// pure-death generator, and time averages integrate the transient law over
/// one gap.
struct NumericDm2 {
    std::vector<double> embedded;
    std::vector<double> time_average;
};

inline NumericDm2 numeric_dm2(int levels = 90, int panels = 400) {
    const int n = levels + 1;
    Eigen::MatrixXd death = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double rate = std::min(k, 2);
        death(k, k - 1) = rate;
        death(k, k) = -rate;
    }
    const Eigen::MatrixXd step = death.exp();

    // Seen-by-arrival chain: k seen -> k+1 present -> survivors after one gap.
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const int after = std::min(k + 1, n - 1);
        kernel.row(k) = step.row(after);
    }
    Eigen::MatrixXd a = kernel.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::VectorXd p = a.fullPivLu().solve(b);

    Eigen::VectorXd start = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) start(std::min(k + 1, n - 1)) += p(k);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(n);
    const double h = 1.0 / panels;
    for (int s = 0; s <= panels; ++s) {
        const double w = (s == 0 || s == panels) ? 1.0 : (s % 2 ? 4.0 : 2.0);
        const Eigen::MatrixXd flow = (death * (s * h)).exp();
        avg += w * (flow.transpose() * start);
    }
    avg *= h / 3.0;

    NumericDm2 out;
    out.embedded.assign(p.data(), p.data() + n);
    out.time_average.assign(avg.data(), avg.data() + n);
    return out;
}

}  // namespace retrial::testing
