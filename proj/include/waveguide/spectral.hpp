#ifndef WAVEGUIDE_SPECTRAL_HPP
#define WAVEGUIDE_SPECTRAL_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "waveguide/errors.hpp"
#include "waveguide/parallel.hpp"
#include "waveguide/transfer.hpp"

namespace waveguide {

// Circle in the lambda plane used for argument-principle root counting.
// Radii below 1e-4 are allowed but flagged: contour integrals were only
// found reliable down to that scale.
struct Contour {
    cdouble center;
    double radius = 0.0;
    int n_samples = 64;

    Contour(cdouble center_, double radius_, int n_samples_ = 64)
        : center(center_), radius(radius_), n_samples(n_samples_) {
        if (!(radius >= 1e-5))
            throw ConfigError("contour radius below the 1e-5 floor");
        if (n_samples < 64 || n_samples % 2 != 0)
            throw ConfigError("contour needs an even sample count >= 64");
    }

    bool below_reliable_radius() const { return radius < 1e-4; }
};

struct ContourScan {
    int winding = 0;
    double quality = 0.0;   // distance of the raw winding from the integer
    cdouble centroid = 0.0; // first argument-principle moment / winding
    int samples_used = 0;
    double median_abs = 0.0;  // median |f~| over the samples
};

enum class SpectralKind { eigenvalue, resonance };

struct SpectralResult {
    SpectralKind kind = SpectralKind::eigenvalue;
    cdouble omega = 0.0;   // wave number sqrt(lambda), Re > 0
    cdouble lambda = 0.0;  // raw root
    int n_modes_used = 0;
    double residual = 0.0;  // |f~| at the root
    // |f~(root)| relative to the median |f~| on the final contour; the
    // meaningful smallness measure, since |f~| itself is growth-normalized
    double residual_rel = 0.0;
    std::vector<std::pair<Contour, int>> contour_history;
    bool converged = false;
};

struct ScatteringResult {
    double omega = 0.0;
    cdouble s1 = 0.0;
    std::vector<cdouble> s_tail;  // mode amplitudes at X for k = 2..N
};

namespace detail {

inline void guard_thresholds(const DomainSpec& spec, const Contour& c, int n_modes) {
    if (spec.right_bc != BoundaryKind::radiation) return;
    const double pi = std::numbers::pi;
    for (int k = 1; k <= n_modes; ++k) {
        const double p = pi * k * pi * k;
        if (std::abs(c.center - p) < c.radius + 1e-3)
            throw BranchAmbiguityError(
                "contour passes or wraps a transverse threshold (pi k)^2, k=" +
                std::to_string(k));
    }
}

} // namespace detail

// Counts zeros of f~ inside the contour by the accumulated argument and, from
// the same samples, estimates their first moment (the centroid of the
// enclosed zeros). The increments are taken on the analytic logarithm
// log f~ - log_offset, so the normalization factor of the orthogonal
// transfer drops out of the quadrature. Samples are doubled until the
// winding is integer-like (quality < 0.05) and no single phase increment
// exceeds pi/2.
inline ContourScan count_zeros(const Contour& contour, const DomainSpec& spec,
                               int n_modes, const StepControl& sc = {}) {
    detail::guard_thresholds(spec, contour, n_modes);
    constexpr int kMaxSamples = 8192;
    const double two_pi = 2.0 * std::numbers::pi;

    std::vector<cdouble> vals, offs;
    int n = contour.n_samples;
    for (;; n *= 2) {
        std::vector<cdouble> next(n), noffs(n);
        const bool reuse = !vals.empty();
        parallel_for(reuse ? n / 2 : n, [&](int idx) {
            const int j = reuse ? 2 * idx + 1 : idx;
            const double th = two_pi * j / n;
            const cdouble lam =
                contour.center + contour.radius * cdouble(std::cos(th), std::sin(th));
            const CharacteristicValue cv = characteristic_det(lam, spec, n_modes, sc);
            next[j] = cv.value;
            noffs[j] = cv.log_offset;
        });
        if (reuse)
            for (int j = 0; j < n / 2; ++j) {
                next[2 * j] = vals[j];
                noffs[2 * j] = offs[j];
            }
        vals = std::move(next);
        offs = std::move(noffs);

        double fmax = 0.0, fmin = std::numeric_limits<double>::infinity();
        for (const cdouble& v : vals) {
            fmax = std::max(fmax, std::abs(v));
            fmin = std::min(fmin, std::abs(v));
        }
        if (fmin <= 1e-13 * fmax)
            throw ZeroOnContourError("characteristic function vanishes on the contour");

        // segment increments of the analytic log
        std::vector<cdouble> dlog(n);
        double acc = 0.0, max_step = 0.0;
        for (int j = 0; j < n; ++j) {
            const int j1 = (j + 1) % n;
            const cdouble ratio = vals[j1] * std::conj(vals[j]);
            const cdouble d(std::log(std::abs(vals[j1]) / std::abs(vals[j])) -
                                (offs[j1].real() - offs[j].real()),
                            std::arg(ratio) - (offs[j1].imag() - offs[j].imag()));
            dlog[j] = d;
            max_step = std::max(max_step, std::abs(d.imag()));
            acc += d.imag();
        }
        const double raw = acc / two_pi;
        const double quality = std::abs(raw - std::round(raw));
        if (quality < 0.05 && max_step <= 0.5 * std::numbers::pi) {
            ContourScan scan;
            scan.winding = static_cast<int>(std::llround(raw));
            scan.quality = quality;
            scan.samples_used = n;
            std::vector<double> mags(n);
            for (int j = 0; j < n; ++j) mags[j] = std::abs(vals[j]);
            std::nth_element(mags.begin(), mags.begin() + n / 2, mags.end());
            scan.median_abs = mags[n / 2];
            if (scan.winding != 0) {
                // first moment (1/2 pi i) sum mid_j dlog f
                cdouble mu = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double thj = two_pi * j / n;
                    const double thj1 = two_pi * (j + 1) / n;
                    const cdouble lj =
                        contour.center +
                        contour.radius * cdouble(std::cos(thj), std::sin(thj));
                    const cdouble lj1 =
                        contour.center +
                        contour.radius * cdouble(std::cos(thj1), std::sin(thj1));
                    mu += 0.5 * (lj + lj1) * dlog[j];
                }
                mu /= cdouble(0.0, two_pi);
                scan.centroid = mu / static_cast<double>(scan.winding);
            }
            return scan;
        }
        if (2 * n > kMaxSamples)
            throw NonIntegerWindingError(
                "winding did not settle near an integer after sample refinement");
    }
}

namespace detail {

inline SpectralResult eigenvalue_result(const DomainSpec& spec, double lam, int n_modes,
                                        const StepControl& sc, bool converged) {
    SpectralResult res;
    res.kind = SpectralKind::eigenvalue;
    res.lambda = lam;
    res.omega = std::sqrt(lam);
    res.n_modes_used = n_modes;
    res.residual = std::abs(characteristic_det(lam, spec, n_modes, sc).value);
    res.converged = converged;
    return res;
}

// Sign-change bracketing plus bisection around the seed, used when Newton
// cannot get traction (near-critical profiles steepen the crossing).
inline SpectralResult eigenvalue_by_bisection(const DomainSpec& spec, double seed,
                                              int n_modes, const StepControl& sc,
                                              double lo_bound, double hi_bound) {
    auto fval = [&](double lam) {
        return characteristic_det(lam, spec, n_modes, sc).value.real();
    };
    double a = seed, b = seed, fa = fval(seed), fb = fa;
    double step = 0.01 * std::max(1.0, std::abs(seed));
    for (int it = 0; it < 60; ++it) {
        const double left = std::max(lo_bound, a - step);
        const double fl = fval(left);
        if (fl * fa < 0.0) {
            b = a;
            fb = fa;
            a = left;
            fa = fl;
            break;
        }
        a = left;
        fa = fl;
        const double right = std::min(hi_bound, b + step);
        const double fr = fval(right);
        if (fr * fb < 0.0) {
            a = b;
            fa = fb;
            b = right;
            fb = fr;
            break;
        }
        b = right;
        fb = fr;
        step *= 1.6;
        if (a <= lo_bound && b >= hi_bound)
            throw DivergenceError("find_eigenvalue: no sign change in [seed/4, 4 seed]");
    }
    if (fa * fb > 0.0)
        throw NoConvergenceError("find_eigenvalue: bracketing failed");
    while (b - a > 1e-10) {
        const double mid = 0.5 * (a + b);
        const double fm = fval(mid);
        if (fm == 0.0) {
            a = b = mid;
            break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return eigenvalue_result(spec, 0.5 * (a + b), n_modes, sc, true);
}

} // namespace detail

// Real eigenvalue of a self-adjoint problem by Newton iteration on the real
// characteristic function; the derivative is a central difference with step
// 1e-6 max(1,|lambda|). Falls back to sign-change bisection when the Newton
// path stalls or leaves the trust region.
inline SpectralResult find_eigenvalue(const DomainSpec& spec, double seed, int n_modes,
                                      const StepControl& sc = {}, int max_iter = 50) {
    if (spec.left_bc == BoundaryKind::radiation ||
        spec.right_bc == BoundaryKind::radiation)
        throw ConfigError("find_eigenvalue needs self-adjoint boundary conditions");
    if (!(seed > 0.0)) throw ConfigError("find_eigenvalue: seed must be positive");

    const double lo = seed / 4.0, hi = 4.0 * seed;
    double lam = seed;
    double scale = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double h = 1e-6 * std::max(1.0, std::abs(lam));
        double pts[3] = {lam - h, lam, lam + h};
        double out[3];
        parallel_for(3, [&](int i) {
            out[i] = characteristic_det(pts[i], spec, n_modes, sc).value.real();
        });
        const double fm = out[0], f0 = out[1], fp = out[2];
        scale = std::max({scale, std::abs(f0), std::abs(fm), std::abs(fp)});
        const double deriv = (fp - fm) / (2.0 * h);
        if (deriv == 0.0 || !std::isfinite(deriv))
            return detail::eigenvalue_by_bisection(spec, lam, n_modes, sc, lo, hi);
        const double delta = f0 / deriv;
        const double next = lam - delta;
        if (next < lo || next > hi)
            return detail::eigenvalue_by_bisection(spec, lam, n_modes, sc, lo, hi);
        lam = next;
        if (std::abs(delta) <= 1e-10 * std::max(1.0, std::abs(lam))) {
            const bool small_residual = std::abs(f0) <= 1e-10 * scale;
            if (small_residual)
                return detail::eigenvalue_result(spec, lam, n_modes, sc, true);
            return detail::eigenvalue_by_bisection(spec, lam, n_modes, sc, lo, hi);
        }
    }
    return detail::eigenvalue_by_bisection(spec, lam, n_modes, sc, lo, hi);
}

// Complex secant refinement of a root of f~ from two nearby starts. The
// secant runs on the de-normalized analytic value relative to the first
// sample, value * exp(-(log_offset - ref)), so the growth normalization does
// not bend the steps. Used to warm-start and to polish roots whose rough
// location is already known.
inline std::pair<cdouble, double> refine_root(const DomainSpec& spec, int n_modes,
                                              cdouble lambda0, cdouble lambda1,
                                              const StepControl& sc = {},
                                              double tol = 1e-9, int max_iter = 40) {
    const CharacteristicValue ref = characteristic_det(lambda0, spec, n_modes, sc);
    auto rel = [&](cdouble lam) {
        const CharacteristicValue cv = characteristic_det(lam, spec, n_modes, sc);
        return cv.value * std::exp(-(cv.log_offset - ref.log_offset));
    };
    cdouble f0 = ref.value;
    cdouble f1 = rel(lambda1);
    for (int it = 0; it < max_iter; ++it) {
        const cdouble denom = f1 - f0;
        if (std::abs(denom) == 0.0)
            throw NoConvergenceError("refine_root: stalled secant");
        const cdouble step = f1 * (lambda1 - lambda0) / denom;
        lambda0 = lambda1;
        f0 = f1;
        lambda1 -= step;
        f1 = rel(lambda1);
        if (std::abs(step) <= tol * std::max(1.0, std::abs(lambda1)))
            return {lambda1, std::abs(f1)};
    }
    throw NoConvergenceError("refine_root: no convergence");
}

struct ResonanceOptions {
    double initial_radius = 0.5;
    int n_samples = 64;
    bool crosscheck = true;
    double residual_tol = 0.25;  // bound on the relative residual at the root
};

// Locates one complex resonance by a shrinking sequence of counting contours:
// count, recenter on the argument-principle first moment, halve, down to
// target_radius. Afterwards the center is shifted by 1.5x the final radius in
// four directions, where the count must drop to zero.
inline SpectralResult locate_resonance(const DomainSpec& spec, cdouble seed_omega,
                                       int n_modes, double target_radius,
                                       const StepControl& sc = {},
                                       const ResonanceOptions& opt = {}) {
    if (spec.right_bc != BoundaryKind::radiation)
        throw ConfigError("locate_resonance needs a radiation boundary condition");
    if (!(target_radius >= 1e-5))
        throw ConfigError("locate_resonance: target radius below the 1e-5 contour floor");

    SpectralResult res;
    res.kind = SpectralKind::resonance;
    res.n_modes_used = n_modes;

    cdouble center = seed_omega * seed_omega;
    double radius = std::max(opt.initial_radius, target_radius);

    // Initial capture: grow until the contour holds something.
    ContourScan scan;
    int grow_tries = 0;
    for (;;) {
        Contour c(center, radius, opt.n_samples);
        scan = count_zeros(c, spec, n_modes, sc);
        res.contour_history.emplace_back(c, scan.winding);
        if (scan.winding != 0) break;
        if (++grow_tries > 4)
            throw LostRootError("locate_resonance: no root captured near the seed");
        radius *= 2.0;
    }
    if (scan.winding > 1) {
        // One attempt to isolate before giving up.
        radius *= 0.5;
        Contour c(center, radius, opt.n_samples);
        scan = count_zeros(c, spec, n_modes, sc);
        res.contour_history.emplace_back(c, scan.winding);
        if (scan.winding != 1)
            throw MultipleRootsError("locate_resonance: contour holds several roots",
                                     scan.winding);
    }
    if (scan.winding < 0)
        throw NonIntegerWindingError("locate_resonance: negative winding");

    center = scan.centroid;
    int recoveries = 0;
    while (radius > target_radius) {
        radius = std::max(0.5 * radius, target_radius);
        Contour c(center, radius, opt.n_samples);
        scan = count_zeros(c, spec, n_modes, sc);
        res.contour_history.emplace_back(c, scan.winding);
        if (scan.winding == 1) {
            center = scan.centroid;
        } else if (scan.winding == 0) {
            radius *= 4.0;
            if (++recoveries > 3)
                throw LostRootError(
                    "locate_resonance: root escaped the shrinking contours near |lambda|=" +
                    std::to_string(std::abs(center)));
        } else {
            throw MultipleRootsError("locate_resonance: contour holds several roots",
                                     scan.winding);
        }
    }

    res.lambda = center;
    // raw root recorded in lambda; the wave number is reported with Re > 0
    // and Im >= 0, the sign convention of the reference tables
    res.omega = std::sqrt(center);
    if (res.omega.real() < 0.0) res.omega = -res.omega;
    if (res.omega.imag() < 0.0) res.omega = std::conj(res.omega);

    // Residuals: the raw |f~| at the root is growth-normalized and need not
    // dip for hairline-width roots, so the convergence measure de-normalizes
    // against the analytic logarithm: |f(root)| relative to |f| on the final
    // circle, everything scaled by exp(-(log_offset - offset(root))).
    const CharacteristicValue at_root = characteristic_det(center, spec, n_modes, sc);
    res.residual = std::abs(at_root.value);
    {
        std::vector<double> ring;
        for (int q = 0; q < 4; ++q) {
            const cdouble dir = (q == 0)   ? cdouble(1, 0)
                                : (q == 1) ? cdouble(-1, 0)
                                : (q == 2) ? cdouble(0, 1)
                                           : cdouble(0, -1);
            const CharacteristicValue cv =
                characteristic_det(center + radius * dir, spec, n_modes, sc);
            ring.push_back(std::abs(
                cv.value * std::exp(-(cv.log_offset - at_root.log_offset))));
        }
        std::nth_element(ring.begin(), ring.begin() + 2, ring.end());
        res.residual_rel = res.residual / std::max(ring[2], 1e-300);
    }

    bool shifts_clean = true;
    if (opt.crosscheck) {
        const cdouble dirs[4] = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
        for (const cdouble& d : dirs) {
            Contour c(center + 1.5 * radius * d, radius, opt.n_samples);
            const ContourScan s = count_zeros(c, spec, n_modes, sc);
            res.contour_history.emplace_back(c, s.winding);
            if (s.winding != 0) shifts_clean = false;
        }
    }
    res.converged = shifts_clean && res.residual_rel <= opt.residual_tol;
    return res;
}

// Scattering coefficients at a real frequency with one propagating mode.
// The transfer from the left supplies N conditions psi~(X) H(X) = 0; H(X) is
// parametrized by the unit incoming wave plus the outgoing amplitudes, and
// the resulting N x N system is solved for them. s_k for k >= 2 are reported
// as the mode amplitudes at X (the system is solved in that scaling).
inline ScatteringResult scattering_coefficient(double omega, const DomainSpec& spec,
                                               int n_modes, const StepControl& sc = {}) {
    const double pi = std::numbers::pi;
    if (spec.right_bc != BoundaryKind::radiation)
        throw ConfigError("scattering_coefficient needs a radiation boundary condition");
    if (!(omega > pi && omega < 2.0 * pi))
        throw ConfigError("scattering_coefficient: omega outside the single-mode band");

    const int n = n_modes;
    const cdouble lambda = omega * omega;
    const double X = spec.b;
    TransferState state = transfer_integrate(lambda, spec, n, sc);
    const SystemCoefficients coeffs =
        assemble_pqr(X, lambda, n, spec.profile, BetaTable::shared(n));

    std::vector<cdouble> t(n + 1);
    for (int k = 1; k <= n; ++k) t[k] = mode_exponent(k, lambda);

    // H for outgoing mode k at amplitude 1 at X: h = e_k, h' = t_k e_k.
    auto column_h = [&](int k, cdouble amp, cdouble hprime_factor, CMatrix& H) {
        H.resize(2 * n, 1);
        H(k - 1, 0) = amp;
        for (int i = 0; i < n; ++i)
            H(n + i, 0) = coeffs.q_t[static_cast<std::size_t>(i) * n + (k - 1)] * amp;
        H(n + k - 1, 0) += coeffs.p[k - 1] * hprime_factor * amp;
    };

    CMatrix m(n, n), rhs(n, 1), col;
    for (int k = 1; k <= n; ++k) {
        column_h(k, 1.0, t[k], col);
        for (int i = 0; i < n; ++i) {
            cdouble s = 0.0;
            for (int l = 0; l < 2 * n; ++l) s += state.psi_tilde(i, l) * col(l, 0);
            m(i, k - 1) = s;
        }
    }
    const cdouble incoming_amp = std::exp(-t[1] * X);
    column_h(1, incoming_amp, -t[1], col);
    for (int i = 0; i < n; ++i) {
        cdouble s = 0.0;
        for (int l = 0; l < 2 * n; ++l) s += state.psi_tilde(i, l) * col(l, 0);
        rhs(i, 0) = -s;
    }
    solve_lu_inplace(m, rhs);

    ScatteringResult out;
    out.omega = omega;
    out.s1 = rhs(0, 0) * std::exp(-t[1] * X);
    out.s_tail.assign(n >= 2 ? n - 1 : 0, cdouble(0.0));
    for (int k = 2; k <= n; ++k) out.s_tail[k - 2] = rhs(k - 1, 0);
    return out;
}

// Increases the mode count one by one until two consecutive results agree to
// tol in omega. Hard cap at N = 40.
template <class Task>
SpectralResult adaptive_modes(Task&& task, int n_start, double tol) {
    if (n_start < 2) throw ConfigError("adaptive_modes: n_start must be >= 2");
    constexpr int kCap = 40;
    SpectralResult prev = task(n_start);
    for (int n = n_start + 1; n <= kCap; ++n) {
        SpectralResult cur = task(n);
        if (std::abs(cur.omega - prev.omega) <= tol) return cur;
        prev = cur;
    }
    throw NoConvergenceError("adaptive_modes: no convergence up to the N=40 cap");
}

} // namespace waveguide

#endif
