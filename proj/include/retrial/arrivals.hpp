#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "retrial/rng.hpp"

namespace retrial {

struct Poisson {
    double rate;
};

struct Deterministic {
    double interval;
};

/// Correlated gaps: the first is Uniform(0,2), every later one is two minus
/// its predecessor. `first_gap` pins the phase instead of drawing it.
struct AlternatingUniform {
    std::optional<double> first_gap;
};

struct ExponentialKernel {
    double rate;
};
struct UniformKernel {
    double lo;
    double hi;
};
struct DeterministicKernel {
    double value;
};
using RenewalKernel = std::variant<ExponentialKernel, UniformKernel, DeterministicKernel>;

struct Renewal {
    RenewalKernel kernel;
};

using ArrivalSpec = std::variant<Poisson, Deterministic, AlternatingUniform, Renewal>;

class InvalidArrivalSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws InvalidArrivalSpec on non-positive or non-finite parameters.
void validate(const ArrivalSpec& spec);

/// Long-run arrival rate 1/E[gap]. Throws InvalidArrivalSpec when the mean
/// gap is not finite and positive.
double mean_rate(const ArrivalSpec& spec);

std::string describe(const ArrivalSpec& spec);

/// Stateful generator of interarrival gaps for one replication.
class ArrivalStream {
public:
    ArrivalStream(ArrivalSpec spec, std::uint64_t seed);

    double next_interarrival();

    /// Epoch of the next arrival; advances the stream.
    double next_epoch();

    const ArrivalSpec& spec() const { return spec_; }

private:
    ArrivalSpec spec_;
    Rng rng_;
    double clock_ = 0.0;
    std::optional<double> phase_;
    std::uint64_t drawn_ = 0;
};

}  // namespace retrial
