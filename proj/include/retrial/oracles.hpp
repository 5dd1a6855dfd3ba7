#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "retrial/engine.hpp"
#include "retrial/estimators.hpp"

namespace retrial {

/// Markovian retrial queue (Poisson arrivals) truncated at orbit level J.
/// At level J the blocked-arrival transition out of (m,J) is removed.
struct CtmcModel {
    double lambda = 1.0;
    SystemParams params;
    long truncation = 0;
    Eigen::MatrixXd generator;  // state (i,j) at index i*(J+1)+j

    long index(int i, long j) const { return i * (truncation + 1) + j; }
    long states() const { return static_cast<long>(generator.rows()); }
};

struct StationaryResult {
    FrequencyMatrix pi;
    double residual = 0.0;  // ||pi G||_inf
};

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

CtmcModel build_markov_generator(double lambda, const SystemParams& params, long truncation,
                                 long max_states = 20000);

/// Solves pi G = 0, sum pi = 1 by a dense direct solve with one balance
/// column replaced by the normalization condition.
StationaryResult stationary_distribution(const CtmcModel& model);

/// Root of log z = 2z - 2 in (0,1), bisected to 1e-14.
double dm2_phi();

/// Closed-form D/M/2 queue with unit interarrival time and mu1 = 1.
struct Dm2Reference {
    double phi = 0.0;
    double psi1 = 0.0;
    double psi2 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double r = 0.0;
    double u0 = 0.0;
    double u1 = 0.0;

    /// Probability an arrival finds k customers in the system.
    double embedded(long k) const;
    /// Long-run fraction of time with k customers in the system.
    double time_average(long k) const;
    /// Sum over all k of time_average(k), with the geometric tail in closed form.
    double total_mass() const;
    /// time_average laid out as (min(k,2), k-2) for k <= max_level.
    FrequencyMatrix as_frequencies(long max_level) const;
};

Dm2Reference dm2_reference();

}  // namespace retrial
