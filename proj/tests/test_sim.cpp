#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "osaq/errors.hpp"
#include "osaq/sim.hpp"

using namespace osaq;

namespace {

SystemParams make_params(Protocol proto, double lambda, double p_c = 0.2) {
    RawParams r;
    r.n_nodes = 2;
    r.n_data_channels = 2;
    r.p_c = p_c;
    r.eta = 0.9;
    r.eta_c = 0.9;
    r.lambda = lambda;
    r.q = 0.5;
    r.p = 0.5;
    r.qs_max = 5;
    r.protocol = proto;
    return SystemParams::derive(r);
}

bool stats_equal(const SimStats& a, const SimStats& b) {
    return a.completed == b.completed && a.dropped == b.dropped &&
           a.mean_system_time == b.mean_system_time &&
           a.mean_occupancy == b.mean_occupancy &&
           a.lambda_eff == b.lambda_eff && a.mean_service == b.mean_service &&
           a.m2_service == b.m2_service &&
           a.mean_reservation == b.mean_reservation &&
           a.mean_interruptions == b.mean_interruptions &&
           a.mean_le == b.mean_le && a.mean_le_n == b.mean_le_n &&
           a.competition_hist == b.competition_hist;
}

} // namespace

TEST_CASE("horizon and replication validation") {
    const SystemParams params = make_params(Protocol::Buffering, 0.05);
    CHECK_THROWS_AS(run_replication(params, 5'000, 1), validation_error);
    CHECK_THROWS_AS(run_batch(params, 20'000, 1, 1), validation_error);
}

TEST_CASE("no arrivals means no delay statistic") {
    const SystemParams params = make_params(Protocol::Buffering, 0.0);
    const SimStats s = run_replication(params, 20'000, 3);
    CHECK(s.undefined);
    CHECK(s.completed == 0);
    CHECK(s.mean_occupancy == 0.0);
}

TEST_CASE("replications are deterministic in the seed") {
    const SystemParams params = make_params(Protocol::Switching, 0.05);
    const SimStats a = run_replication(params, 30'000, 42);
    const SimStats b = run_replication(params, 30'000, 42);
    const SimStats c = run_replication(params, 30'000, 43);
    CHECK(stats_equal(a, b));
    CHECK_FALSE(stats_equal(a, c));
}

TEST_CASE("protocols are bit-identical without primary users") {
    // p_c = 0 removes every protocol difference; the draw order is arranged
    // so the two replications consume the random stream identically
    const SystemParams buf = make_params(Protocol::Buffering, 0.05, 0.0);
    const SystemParams sw = make_params(Protocol::Switching, 0.05, 0.0);
    for (std::uint64_t seed : {1ull, 7ull, 99ull}) {
        const SimStats a = run_replication(buf, 50'000, seed);
        const SimStats b = run_replication(sw, 50'000, seed);
        CHECK(stats_equal(a, b));
        CHECK(b.mean_interruptions == 0.0);
    }
}

TEST_CASE("single node with deterministic service matches the closed form") {
    RawParams r;
    r.n_nodes = 1;
    r.n_data_channels = 1;
    r.p_c = 0.0;
    r.eta = 1.0;
    r.eta_c = 1.0;
    r.lambda = 0.1;
    r.q = 1.0;
    r.p = 1.0;
    r.qs_max = 5;
    const SystemParams params = SystemParams::derive(r);
    const SimStats s = run_batch(params, 400'000, 5, 17);
    const double expected = 2.0 + 0.1 / 0.8; // 2.125
    CHECK_FALSE(s.unstable);
    CHECK(std::abs(s.mean_system_time - expected) <
          std::max(s.ci95_halfwidth, 0.02));
    // service is exactly two slots: compete, then transmit
    CHECK(s.mean_service == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.m2_service == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("little's law ties occupancy to delay") {
    for (Protocol proto : {Protocol::Buffering, Protocol::Switching}) {
        const SystemParams params = make_params(proto, 0.05);
        const SimStats s = run_batch(params, 400'000, 4, 5);
        REQUIRE_FALSE(s.undefined);
        // N lambda_node = lambda_eff (per-system); L = lambda_eff * W
        CHECK(s.lambda_eff ==
              doctest::Approx(2 * params.lambda()).epsilon(0.05));
        CHECK(s.mean_occupancy ==
              doctest::Approx(s.lambda_eff * s.mean_system_time).epsilon(0.05));
    }
}

TEST_CASE("switching renewal bookkeeping matches the analysis") {
    RawParams r;
    r.n_nodes = 1;
    r.n_data_channels = 1;
    r.p_c = 0.3;
    r.eta = 1.0;
    r.eta_c = 1.0;
    r.lambda = 0.02;
    r.q = 0.5; // q*eta = 0.5
    r.p = 1.0;
    r.qs_max = 5;
    r.protocol = Protocol::Switching;
    const SystemParams params = SystemParams::derive(r);
    const SimStats s = run_batch(params, 600'000, 4, 23);
    const double qe = 0.5;
    const double n1 = r.p_c * (1.0 - qe) / qe;          // 0.3
    const double le1 = 1.0 / qe;                        // 2
    const double len = 2.0 * r.p_c * (1.0 - qe) / (qe * qe); // 1.2
    CHECK(s.mean_interruptions == doctest::Approx(n1).epsilon(0.05));
    CHECK(s.mean_reservations == doctest::Approx(n1 + 1.0).epsilon(0.05));
    CHECK(s.mean_le == doctest::Approx(le1).epsilon(0.05));
    CHECK(s.mean_le_n == doctest::Approx(len).epsilon(0.08));
}

TEST_CASE("truncated buffers drop arrivals under overload") {
    RawParams r = make_params(Protocol::Buffering, 0.45).raw();
    r.qs_max = 2;
    const SystemParams params = SystemParams::derive(r);
    const SimStats full = run_replication(params, 100'000, 3, true);
    CHECK(full.dropped > 0);
    const SimStats inf = run_replication(params, 100'000, 3, false);
    CHECK(inf.dropped == 0);
    CHECK(inf.unstable);
}

TEST_CASE("competition histogram accounts for every slot") {
    const SystemParams params = make_params(Protocol::Buffering, 0.05);
    const long horizon = 40'000;
    const SimStats s = run_replication(params, horizon, 9);
    long long slots = 0;
    for (long long c : s.competition_hist) slots += c;
    CHECK(slots == horizon);
    CHECK(s.competition_hist.size() == 3); // 0..N competitors
}

TEST_CASE("batch confidence interval shrinks with more replications") {
    const SystemParams params = make_params(Protocol::Buffering, 0.08);
    const SimStats few = run_batch(params, 50'000, 4, 101);
    const SimStats many = run_batch(params, 50'000, 16, 101);
    CHECK(many.ci95_halfwidth < few.ci95_halfwidth);
    CHECK(many.completed > few.completed);
}
