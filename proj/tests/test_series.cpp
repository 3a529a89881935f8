#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gldeg/chart_energy.hpp"
#include "gldeg/errors.hpp"
#include "gldeg/profiles.hpp"
#include "gldeg/series.hpp"

using namespace gldeg;

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss quadrature of g over [1-delta, 1]
template <typename G>
double quad(double delta, G g) {
    auto [x, w] = gauss_legendre(64);
    double total = 0.0;
    for (int i = 0; i < 64; ++i) {
        double h = 1.0 - 0.5 * delta + 0.5 * delta * x[i];
        total += 0.5 * delta * w[i] * g(h);
    }
    return total;
}

} // namespace

TEST_CASE("log series at X = 0.5") {
    auto c = check_power_identity("A1", 0.5, 0.0, 2000);
    CHECK(c.pass);
    CHECK(c.closed == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(std::fabs(c.partial - c.closed) <= c.bound + 1e-10);
}

TEST_CASE("geometric series at X = 0 is exact") {
    auto c = check_power_identity("A2", 0.0, 0.0, 2000);
    CHECK(c.partial == 1.0);
    CHECK(c.closed == 1.0);
    CHECK(c.pass);
}

TEST_CASE("arctan series at X = 0.9, delta = 0.7") {
    auto c = check_power_identity("A5", 0.9, 0.7, 100000);
    CHECK(c.pass);
    double expect = std::atan((0.9 - std::cos(0.7)) / std::sin(0.7)) +
                    std::atan(std::cos(0.7) / std::sin(0.7));
    CHECK(c.closed == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("all six identities pass over the parameter grid") {
    for (double X : {0.3, 0.9})
        for (double delta : {0.3, 0.7})
            for (const char* tag : {"A1", "A2", "A3", "A4", "A5", "A6"}) {
                auto c = check_power_identity(tag, X, delta, 4000);
                INFO(tag, " X=", X, " delta=", delta, " partial=", c.partial, " closed=",
                     c.closed, " bound=", c.bound);
                CHECK(c.pass);
            }
}

TEST_CASE("identity checks reject bad parameters") {
    CHECK_THROWS_AS(check_power_identity("A1", 1.0, 0.0, 2000), ParameterError);
    CHECK_THROWS_AS(check_power_identity("A1", 0.5, 0.0, 10), ParameterError);
    CHECK_THROWS_AS(check_power_identity("A99", 0.5, 0.0, 2000), ParameterError);
}

TEST_CASE("S(delta,t) direct sum vs closed form") {
    double delta = 0.5;
    double prev_gap = -1.0;
    for (double t : {0.1, 0.05, 0.02}) {
        int K = int(std::ceil(std::log(1e-13) / std::log(1 - t)));
        double sd = S_direct(delta, t, K);
        double gap = std::fabs(sd - S_closed(delta, t));
        CHECK(gap <= 10.0); // O(1) remainder stays bounded as t shrinks
        (void)prev_gap;
        prev_gap = gap;
        // amplitude bound: 4 t^2 S <= pi - delta + C t
        CHECK(4 * t * t * sd <= kPi - delta + 2.0 * t);
    }
}

TEST_CASE("S vanishes as delta -> 0") {
    double t = 0.05;
    int K = int(std::ceil(std::log(1e-13) / std::log(1 - t)));
    CHECK(std::fabs(4 * t * t * S_direct(1e-3, t, K)) <= 0.05);
}

TEST_CASE("S_direct enforces its truncation requirement") {
    CHECK_THROWS_AS(S_direct(0.5, 0.02, 100), TruncationError);
}

TEST_CASE("profile boundary values are exact") {
    ProfileSet p = make_profiles(10.0, 0.4);
    for (int k = -3; k <= 3; ++k) {
        CHECK(std::fabs(p.f(k, 1.0 - p.delta)) <= 1e-15);
        CHECK(p.f(k, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("profile closed forms match quadrature") {
    ProfileSet p = make_profiles(10.0, 0.4);
    SUBCASE("quadratic functional, k = 5") {
        int k = 5;
        double a = p.alpha(k);
        double q = quad(p.delta, [&](double h) {
            double fp = p.fp(k, h), f = p.f(k, h);
            return fp * fp + a * a * f * f;
        });
        CHECK(p.phi_closed(k) == doctest::Approx(q).epsilon(1e-8));
    }
    SUBCASE("mass of the profile") {
        for (int k : {1, 3, 8}) {
            double q = quad(p.delta, [&](double h) { return p.f(k, h); });
            CHECK(p.int_f(k) == doctest::Approx(q).epsilon(1e-8));
        }
    }
    SUBCASE("cross products, k = 4, l = 2") {
        int k = 4, l = 2;
        double qff = quad(p.delta, [&](double h) { return p.f(k, h) * p.f(l, h); });
        double qpp = quad(p.delta, [&](double h) { return p.fp(k, h) * p.fp(l, h); });
        CHECK(p.int_ff(k, l) == doctest::Approx(qff).epsilon(1e-8));
        CHECK(p.int_fpfp(k, l) == doctest::Approx(qpp).epsilon(1e-8));
    }
}

TEST_CASE("alpha_k is exactly |k| at lambda = 1") {
    auto checks = check_fk_estimates(12, 5, 1.0, 0.4);
    REQUIRE(!checks.empty());
    CHECK(checks[0].tag == "A0");
    CHECK(checks[0].partial == 0.0);
    CHECK(checks[0].closed == 0.0);
    CHECK(checks[0].pass);
}

TEST_CASE("profile estimates are stable under grid doubling") {
    for (auto [k, l] : {std::pair{20, 3}, {40, 7}, {80, 14}}) {
        for (const auto& c : check_fk_estimates(k, l, 10.0, 0.4)) {
            INFO(c.tag, " k=", k, " l=", l, " at-grid=", c.partial, " doubled=", c.closed);
            CHECK(c.pass);
        }
    }
}

TEST_CASE("cross-amplitude decay in l") {
    // Y_{k,l} <= C e^{-delta l}: doubling l at fixed k/l must shrink Y by
    // about e^{-10 delta}
    ProfileSet p = make_profiles(10.0, 0.4);
    double y1 = p.Y(30, 10);
    double y2 = p.Y(60, 20);
    CHECK(y2 / y1 <= std::exp(-10 * p.delta) * 1.5);
}

TEST_CASE("estimate checks reject |k| == |l|") {
    CHECK_THROWS_AS(check_fk_estimates(7, 7, 10.0, 0.4), ParameterError);
}

TEST_CASE("default battery has enough rows and all pass") {
    auto rows = default_series_suite();
    CHECK(rows.size() >= 20);
    for (const auto& c : rows) {
        INFO(c.tag, " ", c.params, " partial=", c.partial, " closed=", c.closed);
        CHECK(c.pass);
    }
    std::string csv = series_checks_to_csv(rows);
    CHECK(csv.rfind("tag,params,partial,closed,bound,pass\n", 0) == 0);
    size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == rows.size() + 1);
}
