#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "osaq/errors.hpp"
#include "osaq/params.hpp"
#include "osaq/pmf.hpp"
#include "osaq/rng.hpp"

using namespace osaq;

namespace {

RawParams base_raw() {
    RawParams r;
    r.n_nodes = 2;
    r.n_data_channels = 2;
    r.p_c = 0.2;
    r.eta = 0.9;
    r.eta_c = 0.85;
    r.lambda = 0.05;
    r.q = 0.5;
    r.p = 0.4;
    r.qs_max = 5;
    return r;
}

} // namespace

TEST_CASE("derived per-slot probabilities") {
    const SystemParams params = SystemParams::derive(base_raw());
    CHECK(params.psi() == doctest::Approx(0.72).epsilon(1e-12));
    CHECK(params.chi() == doctest::Approx(0.68).epsilon(1e-12));
    CHECK(params.s_max() == 2);

    RawParams wide = base_raw();
    wide.n_data_channels = 7;
    CHECK(SystemParams::derive(wide).s_max() == 2); // min(N, M_C)

    wide.n_nodes = 9;
    CHECK(SystemParams::derive(wide).s_max() == 7);
}

TEST_CASE("field validation names the offender") {
    auto check_rejects = [](auto mutate, const std::string& field) {
        RawParams r = base_raw();
        mutate(r);
        try {
            SystemParams::derive(r);
            FAIL("expected validation_error for ", field);
        } catch (const validation_error& e) {
            CHECK(e.field() == field);
        }
    };
    check_rejects([](RawParams& r) { r.n_nodes = 0; }, "n_nodes");
    check_rejects([](RawParams& r) { r.n_data_channels = 0; }, "n_data_channels");
    check_rejects([](RawParams& r) { r.p_c = -0.1; }, "p_c");
    check_rejects([](RawParams& r) { r.p_c = 1.5; }, "p_c");
    check_rejects([](RawParams& r) { r.eta = 0.0; }, "eta");
    check_rejects([](RawParams& r) { r.eta_c = 1.2; }, "eta_c");
    check_rejects([](RawParams& r) { r.lambda = 1.0; }, "lambda");
    check_rejects([](RawParams& r) { r.lambda = -0.2; }, "lambda");
    check_rejects([](RawParams& r) { r.q = 0.0; }, "q");
    check_rejects([](RawParams& r) { r.p = 0.0; }, "p");
    check_rejects([](RawParams& r) { r.qs_max = 0; }, "qs_max");

    // boundary values that must be accepted
    RawParams ok = base_raw();
    ok.p_c = 0.0;
    ok.lambda = 0.0;
    ok.q = 1.0;
    ok.p = 1.0;
    CHECK_NOTHROW(SystemParams::derive(ok));
}

TEST_CASE("with_lambda / with_protocol revalidate") {
    const SystemParams params = SystemParams::derive(base_raw());
    CHECK(params.with_lambda(0.2).lambda() == doctest::Approx(0.2));
    CHECK(params.with_protocol(Protocol::Switching).protocol() ==
          Protocol::Switching);
    CHECK_THROWS_AS(params.with_lambda(1.0), validation_error);
    // the original is untouched
    CHECK(params.lambda() == doctest::Approx(0.05));
}

TEST_CASE("protocol names round-trip") {
    CHECK(protocol_from_string(to_string(Protocol::Buffering)) ==
          Protocol::Buffering);
    CHECK(protocol_from_string(to_string(Protocol::Switching)) ==
          Protocol::Switching);
    CHECK_THROWS_AS(protocol_from_string("bogus"), validation_error);
}

TEST_CASE("pmf normalization is enforced") {
    CHECK_NOTHROW(DiscretePmf({0.0, 0.5, 0.5}, 0.0));
    CHECK_NOTHROW(DiscretePmf({0.0, 0.5}, 0.5));
    CHECK_THROWS_AS(DiscretePmf({0.0, 0.5, 0.6}, 0.0), numeric_error);
    CHECK_THROWS_AS(DiscretePmf({0.0, -0.1, 1.1}, 0.0), numeric_error);
    CHECK_THROWS_AS(DiscretePmf({0.0, 0.5, 0.5}, 0.2), numeric_error);
}

TEST_CASE("degenerate pmf") {
    const DiscretePmf d = DiscretePmf::degenerate(3);
    CHECK(d.mass(3) == 1.0);
    CHECK(d.mass(2) == 0.0);
    CHECK(d.tail_mass() == 0.0);
    CHECK(d.moments().m1 == doctest::Approx(3.0));
    CHECK(d.moments().m2 == doctest::Approx(9.0));
    CHECK(d.moments().variance() == doctest::Approx(0.0));
}

TEST_CASE("geometric pmf matches closed-form moments") {
    const double rate = 0.3;
    const DiscretePmf g = DiscretePmf::geometric(rate, 1e-12);
    CHECK(g.mass(0) == 0.0);
    CHECK(g.mass(1) == doctest::Approx(rate));
    CHECK(g.mass(4) == doctest::Approx(rate * 0.7 * 0.7 * 0.7));
    CHECK(g.tail_mass() <= 1e-12);
    const Moments m = g.moments();
    CHECK(m.m1 == doctest::Approx(1.0 / rate).epsilon(1e-9));
    CHECK(m.m2 == doctest::Approx((2.0 - rate) / (rate * rate)).epsilon(1e-9));
}

TEST_CASE("mixture is a convex combination") {
    const DiscretePmf a = DiscretePmf::degenerate(1);
    const DiscretePmf b = DiscretePmf::degenerate(4);
    const DiscretePmf mix = DiscretePmf::mixture({0.25, 0.75}, {&a, &b});
    CHECK(mix.mass(1) == doctest::Approx(0.25));
    CHECK(mix.mass(4) == doctest::Approx(0.75));
    CHECK(mix.moments().m1 == doctest::Approx(0.25 + 3.0));
    CHECK_THROWS_AS(DiscretePmf::mixture({0.4, 0.4}, {&a, &b}), numeric_error);
}

TEST_CASE("rng streams are reproducible and sane") {
    SlotRng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    bool differs = false;
    SlotRng a2(42);
    for (int i = 0; i < 100; ++i) differs = differs || a2.uniform() != c.uniform();
    CHECK(differs);
}

TEST_CASE("rng geometric has the right mean") {
    SlotRng rng(7);
    const double q = 0.25;
    double sum = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.geometric(q));
    CHECK(sum / n == doctest::Approx(1.0 / q).epsilon(0.02));
    CHECK(SlotRng(1).geometric(1.0) == 1);
}
