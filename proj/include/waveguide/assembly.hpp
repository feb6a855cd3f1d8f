#ifndef WAVEGUIDE_ASSEMBLY_HPP
#define WAVEGUIDE_ASSEMBLY_HPP

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "waveguide/beta_table.hpp"
#include "waveguide/errors.hpp"
#include "waveguide/matrix.hpp"
#include "waveguide/profile.hpp"

namespace waveguide {

// x-independent mode matrices. The coefficient matrices of the coupled-mode
// system factor as Q(x) = phi'(x) * qhat and the coupling part of R(x) as
// (phi'^2/phi) * rhat, so everything x-dependent reduces to scalars.
struct ModeMatrices {
    int n_modes = 0;
    std::vector<double> qhat;    // qhat(k,r) = -pi k beta12(r,k)
    std::vector<double> qhat_t;  // transpose of qhat
    std::vector<double> rhat;    // rhat(k,r) = pi^2 k r beta22(k,r)

    explicit ModeMatrices(int n) : n_modes(n), qhat(n * n), qhat_t(n * n), rhat(n * n) {
        const BetaTable& bt = BetaTable::shared(n);
        const double pi = std::numbers::pi;
        for (int k = 1; k <= n; ++k)
            for (int r = 1; r <= n; ++r) {
                const std::size_t i = static_cast<std::size_t>(k - 1) * n + (r - 1);
                qhat[i] = -pi * k * bt.beta12(r, k);
                rhat[i] = pi * pi * k * r * bt.beta22(k, r);
            }
        for (int k = 0; k < n; ++k)
            for (int r = 0; r < n; ++r)
                qhat_t[static_cast<std::size_t>(k) * n + r] =
                    qhat[static_cast<std::size_t>(r) * n + k];
    }

    static const ModeMatrices& shared(int n) {
        static std::mutex mu;
        static std::map<int, std::unique_ptr<ModeMatrices>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[n];
        if (!slot) slot = std::make_unique<ModeMatrices>(n);
        return *slot;
    }
};

// Coefficients of the canonical system -(Ph')' + Qh' - (Q^T h)' + Rh = 0 at a
// single x. P is diagonal (phi), Q is real, R is complex through lambda.
struct SystemCoefficients {
    int n_modes = 0;
    double at_x = 0.0;
    double width = 0.0;   // phi(x)
    double slope = 0.0;   // phi'(x)
    cdouble lambda = 0.0;
    std::vector<double> p;     // diagonal of P
    std::vector<double> q;     // N x N row-major
    std::vector<double> q_t;   // Q^T
    std::vector<cdouble> r;    // N x N row-major

    void resize(int n) {
        n_modes = n;
        p.assign(n, 0.0);
        q.assign(static_cast<std::size_t>(n) * n, 0.0);
        q_t.assign(static_cast<std::size_t>(n) * n, 0.0);
        r.assign(static_cast<std::size_t>(n) * n, cdouble(0.0));
    }
};

inline void assemble_pqr_into(SystemCoefficients& out, double x, cdouble lambda,
                              int n_modes, const Profile& profile,
                              const ModeMatrices& mm) {
    const double phi = profile.width(x);
    if (!(phi > 0.0))
        throw NonpositiveWidthError("assemble_pqr: phi(x) <= 0 at x=" + std::to_string(x));
    const double dphi = profile.slope(x);
    const double pi = std::numbers::pi;

    if (out.n_modes != n_modes) out.resize(n_modes);
    out.at_x = x;
    out.width = phi;
    out.slope = dphi;
    out.lambda = lambda;

    const int n = n_modes;
    for (int k = 0; k < n; ++k) out.p[k] = phi;
    const double couple = dphi * dphi / phi;
    for (std::size_t i = 0; i < out.q.size(); ++i) {
        out.q[i] = dphi * mm.qhat[i];
        out.q_t[i] = dphi * mm.qhat_t[i];
        out.r[i] = couple * mm.rhat[i];
    }
    for (int k = 1; k <= n; ++k) {
        const double pk = pi * k;
        out.r[static_cast<std::size_t>(k - 1) * n + (k - 1)] +=
            pk * pk / phi - lambda * phi;
    }
}

inline SystemCoefficients assemble_pqr(double x, cdouble lambda, int n_modes,
                                       const Profile& profile,
                                       const BetaTable& betas) {
    if (n_modes > betas.n_modes())
        throw ConfigError("assemble_pqr: n_modes exceeds the beta table");
    SystemCoefficients out;
    assemble_pqr_into(out, x, lambda, n_modes, profile, ModeMatrices::shared(n_modes));
    return out;
}

struct HamiltonianMatrix {
    CMatrix k;  // 2N x 2N
};

inline CMatrix symplectic_j(int n) {
    CMatrix j(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        j(i, n + i) = -1.0;
        j(n + i, i) = 1.0;
    }
    return j;
}

// K = [ -R + Q P^-1 Q^T , -Q P^-1 ; -P^-1 Q^T , P^-1 ], the system matrix of
// the Hamiltonian form J H' = K H with H = (h, Ph' + Q^T h).
inline HamiltonianMatrix assemble_k(const SystemCoefficients& c) {
    const int n = c.n_modes;
    HamiltonianMatrix out;
    out.k.resize(2 * n, 2 * n);
    std::vector<double> qpinv(static_cast<std::size_t>(n) * n);  // Q P^-1
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            qpinv[static_cast<std::size_t>(i) * n + j] =
                c.q[static_cast<std::size_t>(i) * n + j] / c.p[j];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int l = 0; l < n; ++l)
                s += qpinv[static_cast<std::size_t>(i) * n + l] *
                     c.q[static_cast<std::size_t>(j) * n + l];
            out.k(i, j) = -c.r[static_cast<std::size_t>(i) * n + j] + s;
            out.k(i, n + j) = -qpinv[static_cast<std::size_t>(i) * n + j];
            out.k(n + i, j) = -c.q_t[static_cast<std::size_t>(i) * n + j] / c.p[i];
        }
        out.k(n + i, n + i) = 1.0 / c.p[i];
    }
    return out;
}

// Mode exponent t_k = -sqrt((pi k)^2 - lambda) of the flat tail.
//
// Branch rule: principal square root (so Re t_k < 0 off the cut); across the
// cut lambda real > (pi k)^2 the value is continued from Im(lambda) >= 0.
// With this choice the characteristic function is analytic on the whole
// single-mode search band and resonances carry the +i Im omega sign.
inline cdouble mode_exponent(int k, cdouble lambda) {
    const double pi = std::numbers::pi;
    const double thresh = pi * k * pi * k;
    const cdouble w = thresh - lambda;
    if (std::abs(w) < 1e-12 * std::max(1.0, std::abs(lambda)))
        throw BranchAmbiguityError("mode exponent degenerates: lambda at threshold k=" +
                                   std::to_string(k));
    cdouble s = std::sqrt(w);
    if (w.real() < 0.0 && std::signbit(lambda.imag())) s = -s;
    return -s;
}

struct BoundaryMatrix {
    BoundaryKind kind = BoundaryKind::dirichlet;
    CMatrix psi;  // N x 2N, full row rank
};

// h = 0 at the endpoint: psi = (I, 0).
inline BoundaryMatrix dirichlet_matrix(int n_modes) {
    BoundaryMatrix bm;
    bm.kind = BoundaryKind::dirichlet;
    bm.psi.resize(n_modes, 2 * n_modes);
    for (int i = 0; i < n_modes; ++i) bm.psi(i, i) = 1.0;
    return bm;
}

// h' = 0 at an endpoint with phi' = 0 (then Ph' + Q^T h = phi h'): psi = (0, I).
inline BoundaryMatrix neumann_matrix(int n_modes) {
    BoundaryMatrix bm;
    bm.kind = BoundaryKind::neumann;
    bm.psi.resize(n_modes, 2 * n_modes);
    for (int i = 0; i < n_modes; ++i) bm.psi(i, n_modes + i) = 1.0;
    return bm;
}

// Outgoing-wave condition at the truncation point X:
//   psi_X = (T - P^-1 Q^T, P^-1),  T = diag(t_1, -t_2, ..., -t_N),
// selecting h_1 ~ e^{-t_1 x} and decaying h_k ~ e^{t_k x} for k >= 2.
inline BoundaryMatrix radiation_matrix(cdouble lambda, int n_modes,
                                       const SystemCoefficients& coeffs_at_x) {
    const int n = n_modes;
    BoundaryMatrix bm;
    bm.kind = BoundaryKind::radiation;
    bm.psi.resize(n, 2 * n);
    for (int k = 1; k <= n; ++k) {
        const cdouble t = mode_exponent(k, lambda);
        bm.psi(k - 1, k - 1) = (k == 1) ? t : -t;
    }
    for (int i = 0; i < n; ++i) {
        const double pinv = 1.0 / coeffs_at_x.p[i];
        for (int j = 0; j < n; ++j)
            bm.psi(i, j) -= pinv * coeffs_at_x.q_t[static_cast<std::size_t>(i) * n + j];
        bm.psi(i, n + i) = pinv;
    }
    return bm;
}

} // namespace waveguide

#endif
