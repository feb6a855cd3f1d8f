#ifndef WAVEGUIDE_TRANSFER_HPP
#define WAVEGUIDE_TRANSFER_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "waveguide/assembly.hpp"
#include "waveguide/errors.hpp"
#include "waveguide/matrix.hpp"
#include "waveguide/profile.hpp"

namespace waveguide {

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;  // 0: choose from the local coefficient scale
    double h_max = 0.0;   // 0: |b-a|/8
    double h_min = 1e-12;
    double ortho_tol = 1e-10;  // allowed row-Gram drift per accepted step
    // Optional stiffness brake: where |phi'/phi| exceeds this, the step cap
    // is halved. Off by default; the error control usually suffices.
    double stiff_slope_ratio = std::numeric_limits<double>::infinity();
    long max_steps = 4000000;
    // Optional shared monitor: every accepted step folds its Gram drift in,
    // so long runs can report the worst orthonormality defect seen.
    std::atomic<double>* drift_monitor = nullptr;
};

struct TransferStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
    double max_ortho_drift = 0.0;
    double min_step = std::numeric_limits<double>::infinity();
};

// Row-orthonormal boundary-condition bundle psi~(x), N x 2N, together with
// the accumulated log-determinant of the normalizing factor nu in
// psi~ = nu psi (flow part plus the per-step Gram-Schmidt factors). The raw,
// analytic-in-lambda bundle is nu^{-1} psi~; keeping log det nu lets callers
// undo the normalization in logarithmic form where the raw object would
// overflow.
struct TransferState {
    CMatrix psi_tilde;
    double at_x = 0.0;
    cdouble log_detnu = 0.0;
};

// f~ = value, with value * exp(-log_offset) analytic in lambda. |value| is
// growth-normalized (bounded), so zeros are read off the phase; the
// log_offset lets argument-principle quadratures use the analytic logarithm.
struct CharacteristicValue {
    cdouble value = 0.0;
    cdouble lambda = 0.0;
    int n_modes = 0;
    cdouble log_offset = 0.0;
};

enum class Direction { forward, backward };

namespace detail {

// Right-hand side of the orthogonal transfer
//   psi~' = psi~ J K (I - psi~^* (psi~ psi~^*)^{-1} psi~),
// the projected form of the raw transfer psi' = psi J K. Both propagate the
// annihilator of the solution manifold of J H' = K H; the projection keeps
// psi~ psi~^* constant. Written in blocks psi~ = [U V]:
//   psi~ J K = [ W Q^T - V R | -W ],  W = (U + V Q) / phi.
class TransferRhs {
public:
    TransferRhs(const Profile& profile, cdouble lambda, int n_modes)
        : profile_(&profile), lambda_(lambda), n_(n_modes),
          mm_(&ModeMatrices::shared(n_modes)) {
        const int n = n_;
        t1_.resize(n, n);
        w_.resize(n, n);
        g_.resize(n, 2 * n);
        b_.resize(n, n);
        s_.resize(n, n);
        z_.resize(n, 3 * n);
        lu_.resize(n, n);
    }

    int n_modes() const { return n_; }

    // Fills dpsi and returns d(log det nu)/dx = -tr(psi~ J K psi~^* S^{-1}),
    // the growth rate of the normalizing factor.
    cdouble operator()(double x, const CMatrix& psi, CMatrix& dpsi) {
        const int n = n_;
        assemble_pqr_into(coeffs_, x, lambda_, n, *profile_, *mm_);
        const double invphi = 1.0 / coeffs_.width;
        const double* q = coeffs_.q.data();
        const double* qt = coeffs_.q_t.data();
        const cdouble* r = coeffs_.r.data();

        // T1 = V Q, W = (U + T1)/phi
        for (int i = 0; i < n; ++i) {
            const cdouble* v = psi.row(i) + n;
            cdouble* t1 = t1_.row(i);
            for (int j = 0; j < n; ++j) t1[j] = 0.0;
            for (int l = 0; l < n; ++l) {
                const cdouble vl = v[l];
                const double* ql = q + static_cast<std::size_t>(l) * n;
                for (int j = 0; j < n; ++j) t1[j] += vl * ql[j];
            }
            const cdouble* u = psi.row(i);
            cdouble* w = w_.row(i);
            for (int j = 0; j < n; ++j) w[j] = (u[j] + t1[j]) * invphi;
        }

        // G = [ W Q^T - V R | -W ]
        for (int i = 0; i < n; ++i) {
            cdouble* ga = g_.row(i);
            cdouble* gb = ga + n;
            for (int j = 0; j < n; ++j) ga[j] = 0.0;
            const cdouble* w = w_.row(i);
            for (int l = 0; l < n; ++l) {
                const cdouble wl = w[l];
                const double* qtl = qt + static_cast<std::size_t>(l) * n;
                for (int j = 0; j < n; ++j) ga[j] += wl * qtl[j];
            }
            const cdouble* v = psi.row(i) + n;
            for (int l = 0; l < n; ++l) {
                const cdouble vl = v[l];
                const cdouble* rl = r + static_cast<std::size_t>(l) * n;
                for (int j = 0; j < n; ++j) ga[j] -= vl * rl[j];
            }
            for (int j = 0; j < n; ++j) gb[j] = -w[j];
        }

        // B = G psi^*, S = psi psi^*
        for (int i = 0; i < n; ++i) {
            const cdouble* gi = g_.row(i);
            const cdouble* pi_ = psi.row(i);
            for (int j = 0; j < n; ++j) {
                const cdouble* pj = psi.row(j);
                cdouble sb = 0.0;
                for (int l = 0; l < 2 * n; ++l) sb += gi[l] * std::conj(pj[l]);
                b_(i, j) = sb;
                if (j >= i) {
                    cdouble ss = 0.0;
                    for (int l = 0; l < 2 * n; ++l) ss += pi_[l] * std::conj(pj[l]);
                    s_(i, j) = ss;
                    if (j > i) s_(j, i) = std::conj(ss);
                }
            }
        }

        // solve S [Z | W] = [psi | B], dpsi = G - B Z, trace from W
        for (int i = 0; i < n; ++i) {
            std::copy(psi.row(i), psi.row(i) + 2 * n, z_.row(i));
            std::copy(b_.row(i), b_.row(i) + n, z_.row(i) + 2 * n);
            std::copy(s_.row(i), s_.row(i) + n, lu_.row(i));
        }
        solve_lu_inplace(lu_, z_);
        for (int i = 0; i < n; ++i) {
            cdouble* d = dpsi.row(i);
            const cdouble* gi = g_.row(i);
            for (int j = 0; j < 2 * n; ++j) d[j] = gi[j];
            const cdouble* bi = b_.row(i);
            for (int l = 0; l < n; ++l) {
                const cdouble bl = bi[l];
                const cdouble* zl = z_.row(l);
                for (int j = 0; j < 2 * n; ++j) d[j] -= bl * zl[j];
            }
        }
        cdouble trace = 0.0;
        for (int i = 0; i < n; ++i) trace += z_(i, 2 * n + i);
        return -trace;
    }

    // Local rate bound used to seed the step size.
    double rate_estimate(double x) const {
        const double phi = profile_->width(x);
        const double pi = std::numbers::pi;
        const double rmax = std::abs(pi * n_ * pi * n_ / phi - lambda_ * phi) / phi;
        return std::sqrt(rmax) + 1.0;
    }

    double slope_ratio(double x) const {
        return std::abs(profile_->slope(x)) / profile_->width(x);
    }

private:
    const Profile* profile_;
    cdouble lambda_;
    int n_;
    const ModeMatrices* mm_;
    SystemCoefficients coeffs_;
    CMatrix t1_, w_, g_, b_, s_, z_, lu_;
};

inline void axpy(CMatrix& out, const CMatrix& y, double c, const CMatrix& k) {
    const cdouble* ys = y.data();
    const cdouble* ks = k.data();
    cdouble* os = out.data();
    const std::size_t len = static_cast<std::size_t>(y.rows()) * y.cols();
    for (std::size_t i = 0; i < len; ++i) os[i] = ys[i] + c * ks[i];
}

// One classical RK4 step with a precomputed first stage; returns the RK4
// increment of the log det nu companion scalar.
inline cdouble rk4_step(TransferRhs& rhs, double x, double h, const CMatrix& y,
                        const CMatrix& k1, cdouble t1, CMatrix& out, CMatrix& ytmp,
                        CMatrix& k2, CMatrix& k3, CMatrix& k4) {
    axpy(ytmp, y, 0.5 * h, k1);
    const cdouble t2 = rhs(x + 0.5 * h, ytmp, k2);
    axpy(ytmp, y, 0.5 * h, k2);
    const cdouble t3 = rhs(x + 0.5 * h, ytmp, k3);
    axpy(ytmp, y, h, k3);
    const cdouble t4 = rhs(x + h, ytmp, k4);
    const cdouble* ys = y.data();
    const cdouble* a = k1.data();
    const cdouble* b = k2.data();
    const cdouble* c = k3.data();
    const cdouble* d = k4.data();
    cdouble* os = out.data();
    const std::size_t len = static_cast<std::size_t>(y.rows()) * y.cols();
    const double h6 = h / 6.0;
    for (std::size_t i = 0; i < len; ++i)
        os[i] = ys[i] + h6 * (a[i] + 2.0 * (b[i] + c[i]) + d[i]);
    return h6 * (t1 + 2.0 * (t2 + t3) + t4);
}

inline double max_diff(const CMatrix& a, const CMatrix& b) {
    const cdouble* as = a.data();
    const cdouble* bs = b.data();
    const std::size_t len = static_cast<std::size_t>(a.rows()) * a.cols();
    double m = 0.0;
    for (std::size_t i = 0; i < len; ++i) m = std::max(m, std::abs(as[i] - bs[i]));
    return m;
}

// Adaptive RK4 with step-doubling error estimate; rows are re-orthonormalized
// after every accepted step and the pre-orthonormalization Gram drift is both
// capped (ortho_tol) and reported.
inline TransferState integrate_transfer(TransferRhs& rhs, CMatrix psi, double x_from,
                                        double x_to, const StepControl& sc,
                                        TransferStats* stats,
                                        cdouble log_detnu0 = 0.0) {
    const int n = rhs.n_modes();
    const double span = x_to - x_from;
    const double dir = (span >= 0.0) ? 1.0 : -1.0;
    const double h_cap = (sc.h_max > 0.0) ? sc.h_max : std::abs(span) / 8.0;

    CMatrix k1(n, 2 * n), k1m(n, 2 * n), k2(n, 2 * n), k3(n, 2 * n), k4(n, 2 * n);
    CMatrix big(n, 2 * n), half(n, 2 * n), fine(n, 2 * n), ytmp(n, 2 * n);

    double x = x_from;
    double h = sc.h_init > 0.0 ? sc.h_init
                               : std::min({h_cap, 1.0 / rhs.rate_estimate(x_from),
                                           std::abs(span) / 10.0});
    cdouble logdet = log_detnu0;
    TransferStats local;
    TransferStats& st = stats ? *stats : local;

    while (dir * (x_to - x) > 1e-14 * std::abs(span)) {
        if (st.accepted + st.rejected > sc.max_steps)
            throw IntegrationFailureError("transfer: step budget exhausted");
        double cap = h_cap;
        if (rhs.slope_ratio(x) > sc.stiff_slope_ratio) cap *= 0.5;
        h = std::min(h, cap);
        if (dir * (x + dir * h - x_to) > 0.0) h = std::abs(x_to - x);
        if (h < sc.h_min)
            throw IntegrationFailureError("transfer: step size underflow at x=" +
                                          std::to_string(x));
        const double hs = dir * h;

        const cdouble t1 = rhs(x, psi, k1);
        const cdouble s_big = rk4_step(rhs, x, hs, psi, k1, t1, big, ytmp, k2, k3, k4);
        cdouble s_fine = rk4_step(rhs, x, 0.5 * hs, psi, k1, t1, half, ytmp, k2, k3, k4);
        const cdouble t1m = rhs(x + 0.5 * hs, half, k1m);
        s_fine += rk4_step(rhs, x + 0.5 * hs, 0.5 * hs, half, k1m, t1m, fine, ytmp, k2,
                           k3, k4);
        st.rhs_evals += 11;

        const double err = max_diff(fine, big) / 15.0;
        const double tol = sc.atol + sc.rtol * std::max(1.0, fine.max_abs());
        bool accept = err <= tol;
        double drift = 0.0;
        if (accept) {
            // local extrapolation to 5th order
            const cdouble* f = fine.data();
            const cdouble* g = big.data();
            cdouble* p = psi.data();
            const std::size_t len = static_cast<std::size_t>(n) * 2 * n;
            for (std::size_t i = 0; i < len; ++i)
                ytmp.data()[i] = f[i] + (f[i] - g[i]) / 15.0;
            drift = gram_defect(ytmp);
            if (drift > sc.ortho_tol) {
                accept = false;
            } else {
                for (std::size_t i = 0; i < len; ++i) p[i] = ytmp.data()[i];
            }
        }

        if (accept) {
            x += hs;
            ++st.accepted;
            st.max_ortho_drift = std::max(st.max_ortho_drift, drift);
            if (sc.drift_monitor) {
                double cur = sc.drift_monitor->load(std::memory_order_relaxed);
                while (cur < drift &&
                       !sc.drift_monitor->compare_exchange_weak(cur, drift)) {
                }
            }
            st.min_step = std::min(st.min_step, h);
            logdet += s_fine + (s_fine - s_big) / 15.0;
            double lognorm = 0.0;
            if (!mgs_rows(psi, 1e-12, &lognorm))
                throw IntegrationFailureError("transfer: rank collapse after step");
            logdet -= lognorm;
            const double grow = (err > 0.0)
                                    ? 0.9 * std::pow(tol / err, 0.2)
                                    : 2.0;
            h = h * std::clamp(grow, 0.3, 2.0);
        } else {
            ++st.rejected;
            const double shrink = (err > 0.0)
                                      ? 0.9 * std::pow(tol / std::max(err, 1e-300), 0.2)
                                      : 0.5;
            h = h * std::clamp(shrink, 0.1, 0.5);
        }
    }

    TransferState out;
    out.psi_tilde = std::move(psi);
    out.at_x = x_to;
    out.log_detnu = logdet;
    return out;
}

} // namespace detail

inline BoundaryMatrix boundary_matrix_at(const DomainSpec& spec, BoundaryKind kind,
                                         double x, cdouble lambda, int n_modes) {
    switch (kind) {
        case BoundaryKind::dirichlet:
            return dirichlet_matrix(n_modes);
        case BoundaryKind::neumann:
            return neumann_matrix(n_modes);
        case BoundaryKind::radiation: {
            const SystemCoefficients c =
                assemble_pqr(x, lambda, n_modes, spec.profile, BetaTable::shared(n_modes));
            return radiation_matrix(lambda, n_modes, c);
        }
    }
    throw ConfigError("unknown boundary kind");
}

// Propagates an arbitrary start bundle between two points of a profile. The
// start matrix is orthonormalized first; a rank-deficient start is an error.
inline TransferState transfer_integrate_custom(CMatrix psi_start, double x_from,
                                               double x_to, cdouble lambda,
                                               const Profile& profile, int n_modes,
                                               const StepControl& sc = {},
                                               TransferStats* stats = nullptr) {
    double lognorm = 0.0;
    if (!mgs_rows(psi_start, 1e-12, &lognorm))
        throw SolverError("transfer: start boundary matrix is rank deficient");
    detail::TransferRhs rhs(profile, lambda, n_modes);
    return detail::integrate_transfer(rhs, std::move(psi_start), x_from, x_to, sc,
                                      stats, -lognorm);
}

// Propagates the left boundary-condition manifold to the right endpoint (or
// right to left when direction is backward). The start matrix is
// orthonormalized first; a rank-deficient start is an error.
inline TransferState transfer_integrate(cdouble lambda, const DomainSpec& spec,
                                        int n_modes, const StepControl& sc = {},
                                        TransferStats* stats = nullptr,
                                        Direction direction = Direction::forward) {
    const bool fwd = direction == Direction::forward;
    const double x_from = fwd ? spec.a : spec.b;
    const double x_to = fwd ? spec.b : spec.a;
    BoundaryMatrix start =
        boundary_matrix_at(spec, fwd ? spec.left_bc : spec.right_bc, x_from, lambda,
                           n_modes);
    return transfer_integrate_custom(std::move(start.psi), x_from, x_to, lambda,
                                     spec.profile, n_modes, sc, stats);
}

namespace detail {

// Scales rows to unit norm; returns the sum of the log norms removed.
inline double copy_normalized_rows(const CMatrix& src, CMatrix& stack, int row_offset) {
    const int n = src.rows();
    const int c = src.cols();
    double logsum = 0.0;
    for (int i = 0; i < n; ++i) {
        const cdouble* s = src.row(i);
        double nrm2 = 0.0;
        for (int j = 0; j < c; ++j) nrm2 += std::norm(s[j]);
        const double nrm = std::sqrt(nrm2);
        logsum += std::log(nrm);
        const double inv = 1.0 / nrm;
        cdouble* dst = stack.row(row_offset + i);
        for (int j = 0; j < c; ++j) dst[j] = s[j] * inv;
    }
    return logsum;
}

} // namespace detail

// Characteristic function f~(lambda): zero exactly at the eigenvalues /
// resonances, equal to the raw shooting determinant det[psi(b); psi_b] up to
// a positive factor from the orthonormalizations. The orthogonal transfer
// normalizes growth away, so |f~| carries little information; the zeros show
// up through the phase (sign, for self-adjoint problems).
//
// For the lambda-dependent radiation condition the stack is formed at the
// truncation point, [psi~(b); psi_X], as the condition itself lives there.
// For compact self-adjoint problems both ends are propagated to an interior
// matching point and the stack is [psi~_left(x_m); psi~_right(x_m)]: with a
// pinched endpoint the end-stacked determinant degenerates into a plateau
// with a jump at each root (the crossing information arrives exponentially
// compressed), while at an interior x_m the crossing is O(1) wide and the
// value is usable for Newton. Zero sets are identical either way.
//
// direction = backward checks direction independence: the radiation problem
// is integrated right to left, the compact one matched at a different
// interior point with the stacking order swapped.
inline CharacteristicValue characteristic_det(cdouble lambda, const DomainSpec& spec,
                                              int n_modes, const StepControl& sc = {},
                                              TransferStats* stats = nullptr,
                                              Direction direction = Direction::forward) {
    const int n = n_modes;
    const bool fwd = direction == Direction::forward;
    CMatrix stack(2 * n, 2 * n);
    cdouble log_offset = 0.0;

    if (spec.right_bc == BoundaryKind::radiation) {
        TransferState state =
            transfer_integrate(lambda, spec, n_modes, sc, stats, direction);
        BoundaryMatrix other = boundary_matrix_at(
            spec, fwd ? spec.right_bc : spec.left_bc, fwd ? spec.b : spec.a, lambda,
            n_modes);
        for (int i = 0; i < n; ++i)
            std::copy(state.psi_tilde.row(i), state.psi_tilde.row(i) + 2 * n,
                      stack.row(i));
        log_offset = state.log_detnu - detail::copy_normalized_rows(other.psi, stack, n);
    } else {
        const double x_m = spec.a + (fwd ? 0.5 : 0.4) * (spec.b - spec.a);
        BoundaryMatrix left_bm =
            boundary_matrix_at(spec, spec.left_bc, spec.a, lambda, n_modes);
        BoundaryMatrix right_bm =
            boundary_matrix_at(spec, spec.right_bc, spec.b, lambda, n_modes);
        TransferState left = transfer_integrate_custom(
            std::move(left_bm.psi), spec.a, x_m, lambda, spec.profile, n_modes, sc,
            stats);
        TransferState right = transfer_integrate_custom(
            std::move(right_bm.psi), spec.b, x_m, lambda, spec.profile, n_modes, sc,
            stats);
        log_offset = left.log_detnu + right.log_detnu;
        const CMatrix& top = fwd ? left.psi_tilde : right.psi_tilde;
        const CMatrix& bottom = fwd ? right.psi_tilde : left.psi_tilde;
        for (int i = 0; i < n; ++i) {
            std::copy(top.row(i), top.row(i) + 2 * n, stack.row(i));
            std::copy(bottom.row(i), bottom.row(i) + 2 * n, stack.row(n + i));
        }
    }

    CharacteristicValue cv;
    cv.value = det_lu(stack);
    cv.lambda = lambda;
    cv.n_modes = n_modes;
    cv.log_offset = log_offset;
    return cv;
}

} // namespace waveguide

#endif
