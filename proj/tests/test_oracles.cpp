#include <doctest.h>

#include <cmath>

#include "retrial/oracles.hpp"
#include "support/reference_models.hpp"

using namespace retrial;

TEST_CASE("generator rows sum to zero and respect the reflecting boundary") {
    const auto model = build_markov_generator(1.0, {2, 1.0, 1.0}, 5);
    CHECK(model.states() == 18);
    CHECK(model.generator.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(model.generator(model.index(2, 5), model.index(2, 5)) == -2.0);
    CHECK(model.generator(model.index(1, 3), model.index(2, 2)) == 3.0);
    CHECK(model.generator(model.index(2, 3), model.index(2, 4)) == 1.0);
    CHECK_THROWS_AS(build_markov_generator(1.0, {2, 1.0, 1.0}, 10, 20), OracleError);
    CHECK_THROWS_AS(build_markov_generator(0.0, {2, 1.0, 1.0}, 10), std::invalid_argument);
}

TEST_CASE("stationary vector solves pi G = 0") {
    const auto s = stationary_distribution(build_markov_generator(1.0, {2, 1.0, 1.0}, 60));
    CHECK(s.residual < 1e-10);
    CHECK(s.pi.sum() == doctest::Approx(1.0));
    // Busy-server mean equals lambda / mu1 (Little on the servers).
    double busy = 0.0;
    for (int i = 0; i <= 2; ++i) {
        for (long j = 0; j <= 60; ++j) busy += i * s.pi.at(i, j);
    }
    CHECK(busy == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single server: idle fraction equals 1 - rho") {
    const auto s = stationary_distribution(build_markov_generator(0.6, {1, 1.0, 2.0}, 80));
    double idle = 0.0;
    for (long j = 0; j <= 80; ++j) idle += s.pi.at(0, j);
    CHECK(idle == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("agrees with a uniformized sampler") {
    const SystemParams p{2, 1.0, 1.0};
    const long cap = 30;
    const auto s = stationary_distribution(build_markov_generator(1.0, p, cap));
    const auto sampled = testing::uniformized_frequencies(1.0, p, cap, 30'000'000, 3);
    CHECK(max_abs_difference(s.pi, sampled) < 0.005);
}

TEST_CASE("large retrial rate approaches the M/M/2 queue") {
    const auto s = stationary_distribution(build_markov_generator(1.0, {2, 1.0, 1e4}, 40));
    for (long k = 0; k <= 6; ++k) {
        CHECK(std::abs(s.pi.level(k) - testing::mmm_level(1.0, 1.0, 2, k)) < 1e-3);
    }
}

TEST_CASE("phi solves log z = 2z - 2 inside (0,1)") {
    const double phi = dm2_phi();
    CHECK(std::abs(std::log(phi) - 2.0 * phi + 2.0) < 1e-12);
    CHECK(phi == doctest::Approx(0.203188).epsilon(1e-5));
}

TEST_CASE("closed-form D/M/2 constants") {
    const auto d = dm2_reference();
    CHECK(d.psi1 == doctest::Approx(std::exp(-1.0)));
    CHECK(d.psi2 == doctest::Approx(std::exp(-2.0)));
    CHECK(d.c1 == doctest::Approx(0.581977).epsilon(1e-5));
    CHECK(d.r == doctest::Approx(0.08243).epsilon(1e-3));
    CHECK(d.u0 == doctest::Approx(0.89655).epsilon(1e-4));
    CHECK(d.u1 == doctest::Approx(0.40568).epsilon(1e-4));
    CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    double embedded = 0.0;
    for (long k = 0; k < 200; ++k) embedded += d.embedded(k);
    CHECK(embedded == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed form matches the numeric embedded chain") {
    const auto d = dm2_reference();
    const auto numeric = testing::numeric_dm2();
    for (long k = 0; k <= 20; ++k) {
        CAPTURE(k);
        CHECK(std::abs(d.embedded(k) - numeric.embedded[k]) < 1e-8);
        CHECK(std::abs(d.time_average(k) - numeric.time_average[k]) < 1e-8);
    }
}

TEST_CASE("as_frequencies lays levels out as (min(k,2), k-2)") {
    const auto d = dm2_reference();
    const auto p = d.as_frequencies(8);
    CHECK(p.truncation() == 6);
    for (long k = 0; k <= 8; ++k) CHECK(p.level(k) == d.time_average(k));
    CHECK(p.at(0, 1) == 0.0);
}
