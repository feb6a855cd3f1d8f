#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "waveguide/beta_table.hpp"

#include "oracles.hpp"

using namespace waveguide;

namespace {
constexpr double kPi = std::numbers::pi;

// Defining integrals of the coupling coefficients, evaluated by adaptive
// quadrature, independent of the closed forms.
double beta12_quadrature(int k, int r) {
    return oracles::integrate(
        [k, r](double y) {
            return y * 2.0 * std::sin(kPi * k * y) * std::cos(kPi * r * y);
        },
        0.0, 1.0, 1e-15);
}

double beta22_quadrature(int k, int r) {
    return oracles::integrate(
        [k, r](double y) {
            return y * y * 2.0 * std::cos(kPi * k * y) * std::cos(kPi * r * y);
        },
        0.0, 1.0, 1e-15);
}
} // namespace

TEST_CASE("closed-form values quoted directly") {
    CHECK(beta12(1, 1) == doctest::Approx(-1.0 / (2.0 * kPi)).epsilon(1e-15));
    CHECK(beta12(1, 2) == doctest::Approx(-2.0 / (3.0 * kPi)).epsilon(1e-15));
    CHECK(beta22(1, 1) == doctest::Approx(1.0 / 3.0 + 1.0 / (2.0 * kPi * kPi)).epsilon(1e-15));
    CHECK(beta22(1, 2) == doctest::Approx(-20.0 / (9.0 * kPi * kPi)).epsilon(1e-15));
}

TEST_CASE("closed forms match the defining integrals for k,r <= 12") {
    double worst12 = 0.0, worst22 = 0.0;
    for (int k = 1; k <= 12; ++k)
        for (int r = 1; r <= 12; ++r) {
            worst12 = std::max(worst12, std::abs(beta12(k, r) - beta12_quadrature(k, r)));
            worst22 = std::max(worst22, std::abs(beta22(k, r) - beta22_quadrature(k, r)));
        }
    CHECK(worst12 <= 1e-12);
    CHECK(worst22 <= 1e-12);
}

TEST_CASE("table symmetries") {
    const BetaTable& t = BetaTable::shared(10);
    for (int k = 1; k <= 10; ++k)
        for (int r = 1; r <= 10; ++r) {
            CHECK(t.beta22(k, r) == t.beta22(r, k));  // exact by construction
            CHECK(t.beta12(k, r) == beta12(k, r));
        }
    CHECK(&BetaTable::shared(10) == &BetaTable::shared(10));  // cached
}
