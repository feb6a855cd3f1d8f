#ifndef WAVEGUIDE_PROFILE_HPP
#define WAVEGUIDE_PROFILE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "waveguide/errors.hpp"

namespace waveguide {

// Width profile phi(x) of a perturbed cylinder {a < x < b, 0 < y < phi(x)}.
// Values are immutable after construction and safe to share across threads.
struct Profile {
    std::function<double(double)> width;  // phi(x), must stay positive
    std::function<double(double)> slope;  // phi'(x)
    double x_min = 0.0;
    double x_max = 0.0;
    bool unbounded_right = false;
    std::optional<double> flat_tail_start;  // X with phi ~ 1, phi' ~ 0 beyond
};

namespace detail {

// Dense scan plus golden-section refinement around the best sample.
inline double min_on_interval(const std::function<double(double)>& f, double a,
                              double b, int samples = 10000) {
    double best_x = a;
    double best = f(a);
    for (int i = 1; i <= samples; ++i) {
        const double x = a + (b - a) * i / samples;
        const double v = f(x);
        if (v < best) {
            best = v;
            best_x = x;
        }
    }
    const double h = (b - a) / samples;
    double lo = std::max(a, best_x - h);
    double hi = std::min(b, best_x + h);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo))) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(d);
        }
    }
    return std::min(std::min(fc, fd), best);
}

} // namespace detail

// Builds a profile from user callables. When no derivative is supplied, a
// 4th-order central difference with step 1e-5 stands in; analytic slopes are
// preferred because Q and R depend on phi' and phi'^2.
inline Profile make_profile(std::function<double(double)> width,
                            std::function<double(double)> slope, double x_min,
                            double x_max, bool unbounded_right = false,
                            std::optional<double> flat_tail_start = {}) {
    Profile p;
    p.width = std::move(width);
    if (slope) {
        p.slope = std::move(slope);
    } else {
        auto w = p.width;
        p.slope = [w](double x) {
            const double h = 1e-5 * std::max(1.0, std::abs(x));
            return (w(x - 2 * h) - 8 * w(x - h) + 8 * w(x + h) - w(x + 2 * h)) /
                   (12 * h);
        };
    }
    p.x_min = x_min;
    p.x_max = x_max;
    p.unbounded_right = unbounded_right;
    p.flat_tail_start = flat_tail_start;

    const double hi = unbounded_right ? std::max(x_max, x_min + 1.0) : x_max;
    if (detail::min_on_interval(p.width, x_min, hi) <= 0.0)
        throw NonpositiveWidthError("profile width is nonpositive on its interval");
    return p;
}

// Critical indentation depth: the alpha at which the two boundary arcs of the
// indented waveguide touch. Equals 1 / max_x (e^{-(x-g)^2} + e^{-(x+g)^2}).
inline double alpha_critical(double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("alpha_critical: gamma must be > 0");
    auto neg_bump = [gamma](double x) {
        const double d1 = x - gamma, d2 = x + gamma;
        return -(std::exp(-d1 * d1) + std::exp(-d2 * d2));
    };
    const double peak = -detail::min_on_interval(neg_bump, 0.0, gamma + 4.0, 20000);
    return 1.0 / peak;
}

// Indented waveguide family: phi(x) = 1 - alpha (e^{-(x-g)^2} + e^{-(x+g)^2}).
// Rejects alpha at or beyond the touching value alpha_critical(gamma).
inline Profile make_indented_profile(double alpha, double gamma) {
    if (!(alpha > 0.0) || !(gamma > 0.0))
        throw ConfigError("make_indented_profile: alpha and gamma must be > 0");
    if (alpha >= alpha_critical(gamma))
        throw NonpositiveWidthError(
            "make_indented_profile: alpha >= alpha_critical(gamma), width vanishes");

    auto width = [alpha, gamma](double x) {
        const double d1 = x - gamma, d2 = x + gamma;
        return 1.0 - alpha * (std::exp(-d1 * d1) + std::exp(-d2 * d2));
    };
    auto slope = [alpha, gamma](double x) {
        const double d1 = x - gamma, d2 = x + gamma;
        return 2.0 * alpha * (d1 * std::exp(-d1 * d1) + d2 * std::exp(-d2 * d2));
    };

    // Tail onset: smallest grid X with both |phi-1| and |phi'| below 1e-4.
    const double tail_tol = 1e-4;
    double tail = gamma + 8.0;
    for (double x = gamma; x <= gamma + 8.0; x += 1.0 / 64.0) {
        if (std::abs(width(x) - 1.0) <= tail_tol && std::abs(slope(x)) <= tail_tol) {
            bool ok = true;
            for (double t = x; t <= x + 4.0 && ok; t += 1.0 / 64.0)
                ok = std::abs(width(t) - 1.0) <= tail_tol &&
                     std::abs(slope(t)) <= tail_tol;
            if (ok) {
                tail = x;
                break;
            }
        }
    }
    return make_profile(width, slope, -(gamma + 8.0), gamma + 8.0,
                        /*unbounded_right=*/true, tail);
}

// Unperturbed reference strip, phi == 1.
inline Profile make_flat_profile(double x_min, double x_max) {
    return make_profile([](double) { return 1.0; }, [](double) { return 0.0; },
                        x_min, x_max, false, x_min);
}

// True iff |phi - 1| <= tol and |phi'| <= tol on a dense sample of
// [X, X + margin].
inline bool validate_tail(const Profile& p, double X, double tol,
                          double margin = 2.0, int samples = 2000) {
    for (int i = 0; i <= samples; ++i) {
        const double x = X + margin * i / samples;
        if (std::abs(p.width(x) - 1.0) > tol) return false;
        if (std::abs(p.slope(x)) > tol) return false;
    }
    return true;
}

enum class BoundaryKind { dirichlet, neumann, radiation };

// A concrete boundary-value domain: either a compact piece (a,b) or a
// half-line problem truncated at X, where the lambda-dependent radiation
// condition replaces the right boundary condition.
struct DomainSpec {
    Profile profile;
    double a = 0.0;
    double b = 0.0;  // right end, or the truncation point X
    bool truncated_halfline = false;
    BoundaryKind left_bc = BoundaryKind::dirichlet;
    BoundaryKind right_bc = BoundaryKind::dirichlet;
};

inline DomainSpec make_compact_domain(Profile profile, double a, double b,
                                      BoundaryKind left = BoundaryKind::dirichlet,
                                      BoundaryKind right = BoundaryKind::dirichlet) {
    if (!(b > a)) throw ConfigError("domain: need b > a");
    if (left == BoundaryKind::radiation || right == BoundaryKind::radiation)
        throw ConfigError("radiation condition requires a truncated half-line domain");
    if (detail::min_on_interval(profile.width, a, b) <= 0.0)
        throw NonpositiveWidthError("domain: width nonpositive inside (a,b)");
    DomainSpec d;
    d.profile = std::move(profile);
    d.a = a;
    d.b = b;
    d.truncated_halfline = false;
    d.left_bc = left;
    d.right_bc = right;
    return d;
}

inline DomainSpec make_halfline_domain(Profile profile, double a, double X,
                                       BoundaryKind left = BoundaryKind::dirichlet) {
    if (!(X > a)) throw ConfigError("domain: need X > a");
    if (!profile.flat_tail_start || X < *profile.flat_tail_start)
        throw ConfigError("radiation truncation X lies before the flat tail of the profile");
    if (detail::min_on_interval(profile.width, a, X) <= 0.0)
        throw NonpositiveWidthError("domain: width nonpositive inside (a,X)");
    DomainSpec d;
    d.profile = std::move(profile);
    d.a = a;
    d.b = X;
    d.truncated_halfline = true;
    d.left_bc = left;
    d.right_bc = BoundaryKind::radiation;
    return d;
}

} // namespace waveguide

#endif
