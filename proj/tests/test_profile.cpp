#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "waveguide/profile.hpp"

#include "oracles.hpp"

using namespace waveguide;

namespace {

double bump_sum(double x, double gamma) {
    return std::exp(-(x - gamma) * (x - gamma)) + std::exp(-(x + gamma) * (x + gamma));
}

// Independent critical-alpha value: bisection on alpha over the sign of
// min_x phi, with the minimum located by scan + golden section.
double alpha_critical_oracle(double gamma) {
    auto min_phi = [gamma](double alpha) {
        auto phi = [alpha, gamma](double x) { return 1.0 - alpha * bump_sum(x, gamma); };
        return phi(oracles::scan_then_golden_min_x(phi, 0.0, gamma + 4.0));
    };
    return oracles::bisect(min_phi, 0.5, 2.0, 1e-13);
}

} // namespace

TEST_CASE("indented profile values and exact derivative") {
    const Profile p = make_indented_profile(0.8, 2.0);

    // phi(2) = 1 - 0.8 (1 + e^{-16})
    CHECK(p.width(2.0) == doctest::Approx(1.0 - 0.8 * (1.0 + std::exp(-16.0))).epsilon(1e-14));
    CHECK(p.width(2.0) > 0.0);

    // symmetry about x = 0
    for (double x : {0.3, 1.1, 2.7, 4.9})
        CHECK(p.width(x) == doctest::Approx(p.width(-x)).epsilon(1e-15));

    // derivative matches a central difference to O(h^2), h = 1e-5
    const double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double x = -4.0 + 8.0 * i / 100.0;
        const double fd = (p.width(x + h) - p.width(x - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - p.slope(x)));
    }
    CHECK(worst <= 1e-8);

    CHECK(p.slope(0.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("small alpha leaves the strip nearly flat") {
    const Profile p = make_indented_profile(1e-9, 2.0);
    for (double x : {0.0, 1.0, 2.0, 3.0}) {
        CHECK(std::abs(p.width(x) - 1.0) <= 2e-9);
        CHECK(std::abs(p.slope(x)) <= 2e-9);
    }
}

TEST_CASE("profile construction rejects nonpositive width") {
    CHECK_THROWS_AS(make_indented_profile(1.05, 2.0), NonpositiveWidthError);
    CHECK_THROWS_AS(make_indented_profile(-0.1, 2.0), ConfigError);
}

TEST_CASE("alpha_critical against the bisection oracle") {
    const double lib = alpha_critical(2.0);
    const double ref = alpha_critical_oracle(2.0);
    CHECK(std::abs(lib - ref) <= 1e-10);
    // approx 1, slightly below because the two bumps overlap
    CHECK(lib < 1.0);
    CHECK(lib == doctest::Approx(1.0).epsilon(1e-6));

    // wider separation moves the critical value toward 1 from below
    CHECK(alpha_critical(2.0) <= alpha_critical(10.0) + 1e-6);
}

TEST_CASE("tail validation") {
    const Profile p97 = make_indented_profile(0.97, 2.0);
    CHECK(validate_tail(p97, 5.4, 1e-4));

    const Profile p8 = make_indented_profile(0.8, 2.0);
    CHECK_FALSE(validate_tail(p8, 3.0, 1e-4));
    CHECK(validate_tail(p8, 3.0, std::numeric_limits<double>::infinity()));

    // the recorded tail onset satisfies its own tolerance
    REQUIRE(p8.flat_tail_start.has_value());
    CHECK(validate_tail(p8, *p8.flat_tail_start, 1e-4));
    CHECK(*p97.flat_tail_start <= 5.4 + 1e-9);
}

TEST_CASE("derivative fallback for profiles without an analytic slope") {
    const Profile p = make_profile([](double x) { return 1.0 + 0.1 * std::sin(x); },
                                   nullptr, -1.0, 6.0);
    double worst = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double x = -1.0 + 7.0 * i / 50.0;
        worst = std::max(worst, std::abs(p.slope(x) - 0.1 * std::cos(x)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("domain construction rules") {
    const Profile p = make_indented_profile(0.8, 2.0);

    CHECK_NOTHROW(make_compact_domain(p, 0.0, 2.0));
    CHECK_THROWS_AS(make_compact_domain(p, 2.0, 1.0), ConfigError);

    // radiation needs the truncation point inside the flat tail
    CHECK_NOTHROW(make_halfline_domain(p, 0.0, 5.4));
    CHECK_THROWS_AS(make_halfline_domain(p, 0.0, 3.0), ConfigError);

    const DomainSpec d = make_halfline_domain(p, 0.0, 5.4);
    CHECK(d.right_bc == BoundaryKind::radiation);
    CHECK(d.truncated_halfline);
}
