#include <doctest.h>

#include <sstream>

#include "retrial/engine.hpp"
#include "retrial/estimators.hpp"

using namespace retrial;

namespace {

struct Run {
    TrajectoryRecord record;
    JumpCounts jumps{2};
    OccupancyAccumulator occ{2};
};

Run run(double horizon, std::uint64_t seed, double burn_in = 0.0, SystemParams p = {2, 1.0, 1.0},
        ArrivalSpec arrival = Poisson{1.0}) {
    Run r{{}, JumpCounts(p.servers), OccupancyAccumulator(p.servers)};
    EventSink* sinks[] = {&r.jumps, &r.occ};
    r.record = simulate_retrial(p, arrival, horizon, seed, sinks, {1'000'000, burn_in});
    return r;
}

}  // namespace

TEST_CASE("occupancy frequencies sum to one and cover the horizon") {
    const auto r = run(10'000.0, 1);
    CHECK(r.occ.total_time() == doctest::Approx(10'000.0));
    CHECK(r.occ.frequencies().sum() == doctest::Approx(1.0));
}

TEST_CASE("jump functional times the horizon counts every arrival") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto r = run(20'000.0, seed, 0.0, {2, 1.0, 10.0}, Deterministic{1.0});
        const auto a = r.jumps.finalize();
        CHECK(a.values().sum() * a.horizon() == doctest::Approx(static_cast<double>(r.record.arrivals)));
        CHECK(a.total_arrivals() == r.record.arrivals);
    }
}

TEST_CASE("merge has an identity and commutes") {
    const auto x = run(5000.0, 1);
    const auto y = run(5000.0, 2);
    const auto xy = merge(x.jumps, y.jumps);
    const auto yx = merge(y.jumps, x.jumps);
    CHECK(xy.cells().at(0, 0) == yx.cells().at(0, 0));
    for (int i = 0; i <= 2; ++i) {
        for (long j = 0; j < 40; ++j) CHECK(xy.count(i, j) == yx.count(i, j));
    }
    CHECK(xy.horizon() == yx.horizon());
    const auto same = merge(x.jumps, JumpCounts(2));
    for (long j = 0; j < 40; ++j) CHECK(same.count(1, j) == x.jumps.count(1, j));
    CHECK(same.horizon() == x.jumps.horizon());

    const auto oxy = merge(x.occ, y.occ);
    const auto oyx = merge(y.occ, x.occ);
    CHECK(max_abs_difference(oxy.frequencies(), oyx.frequencies()) == 0.0);
    CHECK(oxy.total_time() == doctest::Approx(10'000.0));
    CHECK_THROWS_AS(merge(x.occ, OccupancyAccumulator(3)), std::invalid_argument);
}

TEST_CASE("splitting one trajectory at T/2 and merging reproduces the full run") {
    const double horizon = 20'000.0;
    const auto full = run(horizon, 7);
    const auto head = run(horizon / 2, 7);
    const auto tail = run(horizon, 7, horizon / 2);
    const auto joined = merge(head.jumps, tail.jumps);
    for (int i = 0; i <= 2; ++i) {
        for (long j = 0; j < 60; ++j) REQUIRE(joined.count(i, j) == full.jumps.count(i, j));
    }
    CHECK(joined.horizon() == doctest::Approx(full.jumps.horizon()));
    const auto occ = merge(head.occ, tail.occ);
    CHECK(max_abs_difference(occ.frequencies(), full.occ.frequencies()) < 1e-12);

    // Deterministic arrivals land exactly on the split point.
    const SystemParams p{2, 1.0, 10.0};
    const auto d_full = run(horizon, 7, 0.0, p, Deterministic{1.0});
    const auto d_head = run(horizon / 2, 7, 0.0, p, Deterministic{1.0});
    const auto d_tail = run(horizon, 7, horizon / 2, p, Deterministic{1.0});
    const auto d_joined = merge(d_head.jumps, d_tail.jumps);
    CHECK(d_joined.total_arrivals() == d_full.jumps.total_arrivals());
    for (int i = 0; i <= 2; ++i) {
        for (long j = 0; j < 20; ++j) REQUIRE(d_joined.count(i, j) == d_full.jumps.count(i, j));
    }
}

TEST_CASE("truncation level picks the largest orbit index above epsilon") {
    StateMatrix<double> a(2, 6);
    a.ref(0, 0) = 0.5;
    a.ref(1, 3) = 0.02;
    a.ref(2, 5) = 0.001;
    const JumpFunctional fn(a, 100.0, 52);
    CHECK(truncation_level(fn, 0.01) == 3);
    CHECK(truncation_level(fn, 0.001) == 5);
    CHECK(truncation_level(fn) == 3);  // epsilon = 1/T = 0.01
    CHECK(truncation_level(fn, 0.5) == 0);
    CHECK_THROWS_AS(truncation_level(fn, 0.6), DegenerateRun);
    CHECK_THROWS_AS(JumpCounts(2).finalize(), DegenerateRun);
}

TEST_CASE("level reads the standard-queue layout") {
    StateMatrix<double> c(2, 3);
    c.ref(0, 0) = 0.1;
    c.ref(1, 0) = 0.2;
    c.ref(2, 0) = 0.3;
    c.ref(2, 2) = 0.4;
    const FrequencyMatrix p(c);
    CHECK(p.level(0) == 0.1);
    CHECK(p.level(1) == 0.2);
    CHECK(p.level(2) == 0.3);
    CHECK(p.level(3) == 0.0);
    CHECK(p.level(4) == 0.4);
    CHECK(p.level(-1) == 0.0);
}

TEST_CASE("csv round trip keeps values and the horizon comment") {
    const auto r = run(3000.0, 4);
    const auto a = r.jumps.finalize();
    std::stringstream ss;
    write_csv(ss, a);
    CHECK(ss.str().rfind("# horizon=3000 arrivals=", 0) == 0);
    const auto back = read_jump_functional_csv(ss);
    CHECK(back.horizon() == 3000.0);
    CHECK(back.total_arrivals() == a.total_arrivals());
    CHECK(back.servers() == 2);
    for (int i = 0; i <= 2; ++i) {
        for (long j = 0; j < 30; ++j) CHECK(back.at(i, j) == doctest::Approx(a.at(i, j)).epsilon(1e-11));
    }

    std::stringstream fs;
    write_csv(fs, r.occ.frequencies());
    const auto p = read_frequency_csv(fs);
    CHECK(max_abs_difference(p, r.occ.frequencies()) < 1e-11);
}

TEST_CASE("malformed csv is rejected") {
    std::istringstream bad("i,j,value\n0,x,1\n");
    CHECK_THROWS(read_frequency_csv(bad));
    std::istringstream empty("i,j,value\n");
    CHECK_THROWS(read_frequency_csv(empty));
    std::istringstream negative("i,j,value\n-1,0,1\n");
    CHECK_THROWS(read_frequency_csv(negative));
}
