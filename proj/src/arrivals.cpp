#include "retrial/arrivals.hpp"

#include <cmath>
#include <sstream>

#include "retrial/detail/overloaded.hpp"

namespace retrial {

namespace {

using detail::overloaded;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArrivalSpec(what);
}

double kernel_mean(const RenewalKernel& kernel) {
    return std::visit(overloaded{
                          [](const ExponentialKernel& k) { return 1.0 / k.rate; },
                          [](const UniformKernel& k) { return 0.5 * (k.lo + k.hi); },
                          [](const DeterministicKernel& k) { return k.value; },
                      },
                      kernel);
}

// Uniform(0,2) on a 2^-51 grid, so that 2 - x is exact and x + (2 - x) == 2.
double draw_alternating_phase(Rng& rng) {
    std::uint64_t k = 0;
    while (k == 0) k = rng.next_u64() >> 12;
    return static_cast<double>(k) * 0x1.0p-51;
}

}  // namespace

void validate(const ArrivalSpec& spec) {
    std::visit(overloaded{
                   [](const Poisson& p) {
                       require(positive_finite(p.rate), "poisson rate must be positive and finite");
                   },
                   [](const Deterministic& d) {
                       require(positive_finite(d.interval),
                               "deterministic interval must be positive and finite");
                   },
                   [](const AlternatingUniform& a) {
                       if (a.first_gap) {
                           require(*a.first_gap > 0.0 && *a.first_gap < 2.0,
                                   "alternating-uniform first gap must lie in (0,2)");
                       }
                   },
                   [](const Renewal& r) {
                       std::visit(overloaded{
                                      [](const ExponentialKernel& k) {
                                          require(positive_finite(k.rate),
                                                  "exponential kernel rate must be positive");
                                      },
                                      [](const UniformKernel& k) {
                                          require(std::isfinite(k.lo) && std::isfinite(k.hi) &&
                                                      k.lo >= 0.0 && k.hi > k.lo,
                                                  "uniform kernel needs 0 <= lo < hi");
                                      },
                                      [](const DeterministicKernel& k) {
                                          require(positive_finite(k.value),
                                                  "deterministic kernel value must be positive");
                                      },
                                  },
                                  r.kernel);
                   },
               },
               spec);
}

double mean_rate(const ArrivalSpec& spec) {
    validate(spec);
    const double mean_gap =
        std::visit(overloaded{
                       [](const Poisson& p) { return 1.0 / p.rate; },
                       [](const Deterministic& d) { return d.interval; },
                       [](const AlternatingUniform&) { return 1.0; },
                       [](const Renewal& r) { return kernel_mean(r.kernel); },
                   },
                   spec);
    const double rate = 1.0 / mean_gap;
    if (!positive_finite(mean_gap) || !positive_finite(rate)) {
        throw InvalidArrivalSpec("arrival process has no finite positive mean gap; "
                                 "stability cannot be checked");
    }
    return rate;
}

std::string describe(const ArrivalSpec& spec) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Poisson& p) { os << "poisson(rate=" << p.rate << ")"; },
                   [&](const Deterministic& d) { os << "deterministic(interval=" << d.interval << ")"; },
                   [&](const AlternatingUniform& a) {
                       os << "alternating_uniform";
                       if (a.first_gap) os << "(first_gap=" << *a.first_gap << ")";
                   },
                   [&](const Renewal& r) {
                       std::visit(overloaded{
                                      [&](const ExponentialKernel& k) {
                                          os << "renewal(exponential, rate=" << k.rate << ")";
                                      },
                                      [&](const UniformKernel& k) {
                                          os << "renewal(uniform, " << k.lo << ", " << k.hi << ")";
                                      },
                                      [&](const DeterministicKernel& k) {
                                          os << "renewal(deterministic, " << k.value << ")";
                                      },
                                  },
                                  r.kernel);
                   },
               },
               spec);
    return os.str();
}

ArrivalStream::ArrivalStream(ArrivalSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed) {
    validate(spec_);
}

double ArrivalStream::next_interarrival() {
    return std::visit(
        overloaded{
            [&](const Poisson& p) { return rng_.exponential(p.rate); },
            [&](const Deterministic& d) { return d.interval; },
            [&](const AlternatingUniform& a) {
                if (!phase_) phase_ = a.first_gap ? *a.first_gap : draw_alternating_phase(rng_);
                const bool odd = (drawn_++ % 2) == 1;
                return odd ? 2.0 - *phase_ : *phase_;
            },
            [&](const Renewal& r) {
                return std::visit(overloaded{
                                      [&](const ExponentialKernel& k) { return rng_.exponential(k.rate); },
                                      [&](const UniformKernel& k) {
                                          return k.lo + (k.hi - k.lo) * rng_.uniform_open();
                                      },
                                      [&](const DeterministicKernel& k) { return k.value; },
                                  },
                                  r.kernel);
            },
        },
        spec_);
}

double ArrivalStream::next_epoch() {
    clock_ += next_interarrival();
    return clock_;
}

}  // namespace retrial
