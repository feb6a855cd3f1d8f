#ifndef WAVEGUIDE_TABLES_HPP
#define WAVEGUIDE_TABLES_HPP

#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "waveguide/fd_reference.hpp"
#include "waveguide/runconfig.hpp"
#include "waveguide/spectral.hpp"

namespace waveguide {

// Shared numeric knobs distilled from a RunConfig.
struct SolverSettings {
    double gamma = 2.0;
    double truncate_x = 5.4;
    double interval_a = 0.0;
    double interval_b = 0.0;  // 0: use gamma
    int n_modes = 0;          // fixed mode count if > 0
    int n_start = 4;
    double adaptive_tol = 1e-4;
    double contour_r0 = 0.5;
    double target_r = 1e-4;
    double residual_tol = 0.25;
    StepControl step;
};

inline SolverSettings settings_from(const RunConfig& cfg) {
    SolverSettings s;
    s.gamma = cfg.gamma;
    s.truncate_x = cfg.truncate_x;
    s.interval_a = cfg.interval_a;
    s.interval_b = cfg.interval_b;
    s.n_modes = cfg.modes;
    s.n_start = cfg.n_start;
    s.adaptive_tol = cfg.adaptive_tol;
    s.contour_r0 = cfg.contour_r0;
    s.target_r = cfg.target_r;
    s.residual_tol = cfg.root_tol;
    s.step.rtol = cfg.rtol;
    s.step.atol = cfg.atol;
    s.step.ortho_tol = cfg.ortho_tol;
    if (cfg.h_max > 0.0) s.step.h_max = cfg.h_max;
    if (cfg.stiff_slope_ratio > 0.0) s.step.stiff_slope_ratio = cfg.stiff_slope_ratio;
    return s;
}

namespace pipeline {

// Lowest real root of the compact problem by a coarse upward scan of the
// (real, sign-changing) matched determinant.
inline double coarse_lowest_root(const DomainSpec& spec, int n_modes,
                                 const StepControl& sc) {
    const double pi = std::numbers::pi;
    double prev_lam = 3.0;
    double prev = characteristic_det(prev_lam, spec, n_modes, sc).value.real();
    for (double lam = 3.5; lam < 4.0 * pi * pi - 0.5; lam += 0.5) {
        const double cur = characteristic_det(lam, spec, n_modes, sc).value.real();
        if (prev * cur < 0.0) return 0.5 * (prev_lam + lam);
        prev = cur;
        prev_lam = lam;
    }
    throw NoConvergenceError("coarse scan found no sign change below the second threshold");
}

inline DomainSpec cavity_domain(double alpha, const SolverSettings& s) {
    const double b = s.interval_b > 0.0 ? s.interval_b : s.gamma;
    return make_compact_domain(make_indented_profile(alpha, s.gamma), s.interval_a, b);
}

inline DomainSpec open_domain(double alpha, const SolverSettings& s) {
    return make_halfline_domain(make_indented_profile(alpha, s.gamma), s.interval_a,
                                s.truncate_x);
}

// Problem-1 eigenvalue with warm-started Newton and adaptive mode count.
inline SpectralResult eigenvalue_pipeline(double alpha, const SolverSettings& s,
                                          double seed_hint = 0.0) {
    const DomainSpec spec = cavity_domain(alpha, s);
    if (s.n_modes > 0) {
        const double seed = seed_hint > 0.0
                                ? seed_hint
                                : coarse_lowest_root(spec, s.n_modes, s.step);
        return find_eigenvalue(spec, seed, s.n_modes, s.step);
    }
    double seed = seed_hint > 0.0 ? seed_hint
                                  : coarse_lowest_root(spec, s.n_start, s.step);
    return adaptive_modes(
        [&](int n) {
            const SpectralResult r = find_eigenvalue(spec, seed, n, s.step);
            seed = r.lambda.real();
            return r;
        },
        s.n_start, s.adaptive_tol);
}

// Problem-2 resonance: full contour cascade at the starting mode count,
// secant-refined tracking while modes are added, certified contour cascade
// (with shift cross-checks) at the converged count.
inline SpectralResult resonance_pipeline(double alpha, const SolverSettings& s,
                                         double seed_omega_hint = 0.0) {
    const DomainSpec spec = open_domain(alpha, s);
    const double seed_omega =
        seed_omega_hint > 0.0 ? seed_omega_hint
                              : eigenvalue_pipeline(alpha, s).omega.real();

    ResonanceOptions opt;
    opt.initial_radius = s.contour_r0;
    opt.residual_tol = s.residual_tol;

    if (s.n_modes > 0)
        return locate_resonance(spec, seed_omega, s.n_modes, s.target_r, s.step, opt);

    std::vector<cdouble> roots;  // per N, from n_start upward
    ResonanceOptions scan_opt = opt;
    scan_opt.crosscheck = false;

    const SpectralResult settled = adaptive_modes(
        [&](int n) {
            SpectralResult r;
            if (roots.empty()) {
                r = locate_resonance(spec, seed_omega, n,
                                     std::max(s.target_r, 1e-4), s.step, scan_opt);
            } else {
                cdouble guess = roots.back();
                if (roots.size() >= 2)
                    guess += roots.back() - roots[roots.size() - 2];
                const cdouble offset(1e-6 * std::max(1.0, std::abs(guess)), 1e-7);
                auto [lam, resid] =
                    refine_root(spec, n, guess, guess + offset, s.step, 1e-10);
                r.kind = SpectralKind::resonance;
                r.lambda = lam;
                r.omega = std::sqrt(lam);
                if (r.omega.real() < 0.0) r.omega = -r.omega;
                r.n_modes_used = n;
                r.residual = resid;
                r.converged = true;
            }
            roots.push_back(r.lambda);
            return r;
        },
        s.n_start, s.adaptive_tol);

    ResonanceOptions final_opt = opt;
    final_opt.initial_radius = std::max(4.0 * s.target_r, 1e-3);
    return locate_resonance(spec, settled.omega, settled.n_modes_used, s.target_r,
                            s.step, final_opt);
}

} // namespace pipeline

struct SpectralRow {
    double alpha = 0.0;
    double eps = 0.0;
    bool ok = false;
    std::string error;
    SpectralResult result;
};

struct Table1Result {
    std::vector<SpectralRow> rows;
    double max_ortho_drift = 0.0;
    bool all_converged = false;
};

// Resonances over a set of indentation depths; rows seed one another.
inline Table1Result run_table1(const SolverSettings& settings,
                               const std::vector<double>& alphas) {
    Table1Result out;
    std::atomic<double> drift{0.0};
    SolverSettings s = settings;
    s.step.drift_monitor = &drift;

    double seed_omega = 0.0;
    for (double a : alphas) {
        SpectralRow row;
        row.alpha = a;
        row.eps = alpha_critical(s.gamma) - a;
        try {
            row.result = pipeline::resonance_pipeline(a, s, seed_omega);
            row.ok = row.result.converged;
            seed_omega = row.result.omega.real();
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            seed_omega = 0.0;
        }
        out.rows.push_back(std::move(row));
    }
    out.max_ortho_drift = drift.load();
    out.all_converged = true;
    for (const auto& r : out.rows) out.all_converged = out.all_converged && r.ok;
    return out;
}

struct Table2Row {
    double eps = 0.0;
    double alpha = 0.0;
    bool ok = false;
    std::string error;
    SpectralResult eigen;
    SpectralResult resonance;
    double delta = 0.0;  // omega_1 - Re omega_2
};

struct Table2Result {
    std::vector<Table2Row> rows;
    bool all_converged = false;
};

// Eigenvalue/resonance gap over a set of distances from the critical depth.
inline Table2Result run_table2(const SolverSettings& settings,
                               const std::vector<double>& epsilons) {
    const double astar = alpha_critical(settings.gamma);
    Table2Result out;
    double seed_eig = 0.0, seed_res = 0.0;
    for (double eps : epsilons) {
        Table2Row row;
        row.eps = eps;
        row.alpha = astar - eps;
        try {
            row.eigen = pipeline::eigenvalue_pipeline(row.alpha, settings, seed_eig);
            row.resonance =
                pipeline::resonance_pipeline(row.alpha, settings,
                                             seed_res > 0.0 ? seed_res
                                                            : row.eigen.omega.real());
            row.delta = row.eigen.omega.real() - row.resonance.omega.real();
            row.ok = row.eigen.converged && row.resonance.converged;
            seed_eig = row.eigen.lambda.real();
            seed_res = row.resonance.omega.real();
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            seed_eig = seed_res = 0.0;
        }
        out.rows.push_back(std::move(row));
    }
    out.all_converged = true;
    for (const auto& r : out.rows) out.all_converged = out.all_converged && r.ok;
    return out;
}

struct PowerFit {
    double exponent = 0.0;
    double log_prefactor = 0.0;
    double residual = 0.0;  // rms of log residuals
    int points = 0;
};

// Least-squares fit of log y against log x.
inline PowerFit fit_power_law(const std::vector<double>& xs,
                              const std::vector<double>& ys) {
    PowerFit fit;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    fit.points = static_cast<int>(lx.size());
    if (fit.points < 2) return fit;
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < fit.points; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= fit.points;
    my /= fit.points;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < fit.points; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    fit.exponent = sxy / sxx;
    fit.log_prefactor = my - fit.exponent * mx;
    double rss = 0.0;
    for (int i = 0; i < fit.points; ++i) {
        const double r = ly[i] - (fit.log_prefactor + fit.exponent * lx[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / fit.points);
    return fit;
}

struct SweepResult {
    Table2Result table;  // per-epsilon eigenvalues and resonances
    PowerFit im_fit;     // |Im omega_2| against epsilon, epsilon in [0.03, 0.2]
};

inline SweepResult run_sweep(const SolverSettings& settings,
                             const std::vector<double>& epsilons) {
    SweepResult out;
    out.table = run_table2(settings, epsilons);
    std::vector<double> xs, ys;
    for (const auto& r : out.table.rows) {
        if (!r.ok) continue;
        if (r.eps < 0.03 - 1e-12 || r.eps > 0.2 + 1e-12) continue;
        xs.push_back(r.eps);
        ys.push_back(std::abs(r.resonance.omega.imag()));
    }
    out.im_fit = fit_power_law(xs, ys);
    return out;
}

struct FdReportRow {
    int nx = 0;
    int ny = 0;
    double lambda1 = 0.0;
    double omega1 = 0.0;
    double richardson = 0.0;  // extrapolated against the previous level
};

// Mesh-convergence study of the 2D reference solver on the compact domain.
inline std::vector<FdReportRow> run_fd_report(double alpha, const SolverSettings& s,
                                              int base_nx, int base_ny, int levels) {
    const Profile p = make_indented_profile(alpha, s.gamma);
    const double b = s.interval_b > 0.0 ? s.interval_b : s.gamma;
    std::vector<FdReportRow> rows;
    for (int l = 0; l < levels; ++l) {
        const int nx = base_nx << l, ny = base_ny << l;
        const Grid2D g(nx, ny, s.interval_a, b);
        const SparseOperator stiff = assemble_transformed_laplacian(p, g);
        const SparseOperator mass = assemble_weight(p, g);
        FdReportRow row;
        row.nx = nx;
        row.ny = ny;
        row.lambda1 = smallest_eigenvalues(stiff, mass, 1)[0];
        row.omega1 = std::sqrt(row.lambda1);
        row.richardson =
            rows.empty() ? row.omega1
                         : std::sqrt((4.0 * row.lambda1 - rows.back().lambda1) / 3.0);
        rows.push_back(row);
    }
    return rows;
}

} // namespace waveguide

#endif
