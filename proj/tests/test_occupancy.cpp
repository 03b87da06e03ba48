#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "osaq/errors.hpp"
#include "osaq/occupancy.hpp"

using namespace osaq;

namespace {

SystemParams single_node(double lambda, Protocol proto = Protocol::Buffering,
                         int qs = 2) {
    RawParams r;
    r.n_nodes = 1;
    r.n_data_channels = 1;
    r.p_c = 0.2;
    r.eta = 0.9;
    r.eta_c = 0.8;
    r.lambda = lambda;
    r.q = 0.5;
    r.p = 0.6;
    r.qs_max = qs;
    r.protocol = proto;
    return SystemParams::derive(r);
}

OccupancyState st(std::vector<int> n, std::vector<int> b) {
    OccupancyState s;
    s.n = std::move(n);
    s.b = std::move(b);
    return s;
}

} // namespace

TEST_CASE("single-node state enumeration") {
    const auto states = enumerate_states(single_node(0.1));
    REQUIRE(states.size() == 5);
    CHECK(states[0] == st({0}, {0}));
    CHECK(states[1] == st({1}, {0}));
    CHECK(states[2] == st({1}, {1}));
    CHECK(states[3] == st({2}, {0}));
    CHECK(states[4] == st({2}, {1}));
}

TEST_CASE("two-node enumeration respects the channel limit") {
    RawParams r = single_node(0.1).raw();
    r.n_nodes = 2;
    r.n_data_channels = 2;
    CHECK(enumerate_states(SystemParams::derive(r)).size() == 25);
    r.n_data_channels = 1; // s_max = 1: both nodes busy is impossible
    CHECK(enumerate_states(SystemParams::derive(r)).size() == 21);
    CHECK_THROWS_AS(enumerate_states(SystemParams::derive(r), 10),
                    numeric_error);
}

TEST_CASE("single-node buffering chain against a hand-built generator") {
    const SystemParams params = single_node(0.1);
    const double lam = 0.1;
    const double win = params.p() * params.chi();   // 0.6 * 0.64
    const double fin = params.q() * params.psi();   // 0.5 * 0.72
    const auto states = enumerate_states(params);
    const TransitionMatrix P = build_occupancy_matrix(states, params);

    // row (0,0)
    CHECK(P.at(0, 0) == doctest::Approx(1.0 - lam).epsilon(1e-12));
    CHECK(P.at(0, 1) == doctest::Approx(lam).epsilon(1e-12));
    // row (1,0): compete, then an arrival may stack
    CHECK(P.at(1, 2) == doctest::Approx(win * (1.0 - lam)).epsilon(1e-12));
    CHECK(P.at(1, 4) == doctest::Approx(win * lam).epsilon(1e-12));
    CHECK(P.at(1, 1) == doctest::Approx((1.0 - win) * (1.0 - lam)).epsilon(1e-12));
    CHECK(P.at(1, 3) == doctest::Approx((1.0 - win) * lam).epsilon(1e-12));
    // row (1,1): terminate or continue
    CHECK(P.at(2, 0) == doctest::Approx(fin * (1.0 - lam)).epsilon(1e-12));
    CHECK(P.at(2, 1) == doctest::Approx(fin * lam).epsilon(1e-12));
    CHECK(P.at(2, 2) == doctest::Approx((1.0 - fin) * (1.0 - lam)).epsilon(1e-12));
    CHECK(P.at(2, 4) == doctest::Approx((1.0 - fin) * lam).epsilon(1e-12));
    // row (2,0): arrivals fold at the buffer limit
    CHECK(P.at(3, 4) == doctest::Approx(win).epsilon(1e-12));
    CHECK(P.at(3, 3) == doctest::Approx(1.0 - win).epsilon(1e-12));
    // row (2,1)
    CHECK(P.at(4, 1) == doctest::Approx(fin * (1.0 - lam)).epsilon(1e-12));
    CHECK(P.at(4, 3) == doctest::Approx(fin * lam).epsilon(1e-12));
    CHECK(P.at(4, 4) == doctest::Approx(1.0 - fin).epsilon(1e-12));
    // impossible jumps carry no mass
    CHECK(P.at(0, 3) == 0.0);
    CHECK(P.at(0, 2) == 0.0); // an empty node cannot win
}

TEST_CASE("single-node switching chain, boundary rows") {
    const SystemParams params = single_node(0.1, Protocol::Switching);
    const double lam = 0.1;
    const double pc = params.p_c();
    const double qe = params.q() * params.eta(); // 0.45
    const double win = params.p() * params.chi() * (1.0 - pc);
    const auto states = enumerate_states(params);
    const TransitionMatrix P = build_occupancy_matrix(states, params);

    // row (1,1): the single busy node sits at the channel boundary
    CHECK(P.at(2, 0) == doctest::Approx(qe * (1.0 - lam)).epsilon(1e-12));
    CHECK(P.at(2, 1) ==
          doctest::Approx(qe * lam + (1.0 - qe) * pc * (1.0 - lam))
              .epsilon(1e-12));
    CHECK(P.at(2, 2) ==
          doctest::Approx((1.0 - qe) * (1.0 - pc) * (1.0 - lam)).epsilon(1e-12));
    CHECK(P.at(2, 3) == doctest::Approx((1.0 - qe) * pc * lam).epsilon(1e-12));
    CHECK(P.at(2, 4) ==
          doctest::Approx((1.0 - qe) * (1.0 - pc) * lam).epsilon(1e-12));
    // row (1,0): a win only sticks if the data channel survives sensing
    CHECK(P.at(1, 2) == doctest::Approx(win * (1.0 - lam)).epsilon(1e-12));
}

TEST_CASE("rows are stochastic for multi-node systems") {
    RawParams r = single_node(0.05).raw();
    r.n_nodes = 2;
    r.n_data_channels = 2;
    r.qs_max = 3;
    for (Protocol proto : {Protocol::Buffering, Protocol::Switching}) {
        r.protocol = proto;
        const SystemParams params = SystemParams::derive(r);
        const auto states = enumerate_states(params);
        const TransitionMatrix P = build_occupancy_matrix(states, params);
        for (std::size_t i = 0; i < P.size(); ++i) {
            CHECK(P.row_sum(i) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // the channel bottleneck case exercises the boundary machinery
    r.n_data_channels = 1;
    for (Protocol proto : {Protocol::Buffering, Protocol::Switching}) {
        r.protocol = proto;
        const SystemParams params = SystemParams::derive(r);
        const auto states = enumerate_states(params);
        CHECK_NOTHROW(build_occupancy_matrix(states, params));
    }
}

TEST_CASE("protocols coincide without primary users") {
    RawParams r = single_node(0.05).raw();
    r.n_nodes = 2;
    r.n_data_channels = 1;
    r.qs_max = 3;
    r.p_c = 0.0;
    r.protocol = Protocol::Buffering;
    const SystemParams buf = SystemParams::derive(r);
    r.protocol = Protocol::Switching;
    const SystemParams sw = SystemParams::derive(r);
    const auto states = enumerate_states(buf);
    const TransitionMatrix Pb = build_occupancy_matrix(states, buf);
    const TransitionMatrix Ps = build_occupancy_matrix(states, sw);
    REQUIRE(Pb.size() == Ps.size());
    for (std::size_t i = 0; i < Pb.size(); ++i) {
        for (std::size_t j = 0; j < Pb.size(); ++j) {
            CHECK(Pb.at(i, j) == doctest::Approx(Ps.at(i, j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("delay from the stationary distribution grows with load") {
    double prev = 0.0;
    for (double lam : {0.02, 0.05, 0.1, 0.15}) {
        const SystemParams params = single_node(lam, Protocol::Buffering, 5);
        const auto states = enumerate_states(params);
        const auto pi = steady_state(build_occupancy_matrix(states, params));
        const OccupancyDelay d = delay_from_pi(pi, states, params);
        CHECK(d.mean_system_time > prev);
        prev = d.mean_system_time;
        // throughput never exceeds the offered load
        CHECK(d.throughput <= lam + 1e-12);
    }
}

TEST_CASE("delay is undefined without throughput") {
    const SystemParams params = single_node(0.0);
    const auto states = enumerate_states(params);
    const auto pi = steady_state(build_occupancy_matrix(states, params));
    CHECK_THROWS_AS(delay_from_pi(pi, states, params), numeric_error);
}

TEST_CASE("state helpers") {
    const OccupancyState s = st({2, 0, 1}, {1, 0, 0});
    CHECK(s.busy_count() == 1);
    CHECK(s.competitor_count() == 1);
}
