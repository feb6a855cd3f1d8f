#ifndef WAVEGUIDE_REPORT_HPP
#define WAVEGUIDE_REPORT_HPP

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "waveguide/runconfig.hpp"
#include "waveguide/tables.hpp"

namespace waveguide {

namespace report_detail {

inline std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::string artifact_header(const RunConfig& cfg) {
    std::string h;
    h += "# config_hash: " + config_hash(cfg) + "\n";
    h += "# tolerances: rtol=" + num(cfg.rtol) + " atol=" + num(cfg.atol) +
         " ortho_tol=" + num(cfg.ortho_tol) + " adaptive_tol=" + num(cfg.adaptive_tol) +
         " target_r=" + num(cfg.target_r) + " contour_r0=" + num(cfg.contour_r0) +
         " root_tol=" + num(cfg.root_tol) + "\n";
    return h;
}

inline nlohmann::ordered_json tolerances_json(const RunConfig& cfg) {
    nlohmann::ordered_json t;
    t["rtol"] = cfg.rtol;
    t["atol"] = cfg.atol;
    t["ortho_tol"] = cfg.ortho_tol;
    t["adaptive_tol"] = cfg.adaptive_tol;
    t["target_r"] = cfg.target_r;
    t["contour_r0"] = cfg.contour_r0;
    t["root_tol"] = cfg.root_tol;
    return t;
}

} // namespace report_detail

inline std::string render_table1(const RunConfig& cfg, const Table1Result& t) {
    using report_detail::num;
    if (cfg.format == "json") {
        nlohmann::ordered_json j;
        j["config_hash"] = config_hash(cfg);
        j["tolerances"] = report_detail::tolerances_json(cfg);
        j["max_ortho_drift"] = t.max_ortho_drift;
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : t.rows) {
            nlohmann::ordered_json row;
            row["alpha"] = r.alpha;
            row["eps"] = r.eps;
            row["re_omega"] = r.result.omega.real();
            row["im_omega"] = r.result.omega.imag();
            row["n_modes"] = r.result.n_modes_used;
            row["residual"] = r.result.residual;
            row["residual_rel"] = r.result.residual_rel;
            row["converged"] = r.ok;
            row["error"] = r.error;
            j["rows"].push_back(row);
        }
        return j.dump(2) + "\n";
    }
    std::string s = report_detail::artifact_header(cfg);
    s += "# max_ortho_drift: " + num(t.max_ortho_drift) + "\n";
    s += "alpha,eps,re_omega,im_omega,n_modes,residual,residual_rel,converged,error\n";
    for (const auto& r : t.rows) {
        s += num(r.alpha) + "," + num(r.eps) + "," + num(r.result.omega.real()) + "," +
             num(r.result.omega.imag()) + "," + std::to_string(r.result.n_modes_used) +
             "," + num(r.result.residual) + "," + num(r.result.residual_rel) + "," +
             (r.ok ? "1" : "0") + "," + r.error + "\n";
    }
    return s;
}

inline std::string render_table2(const RunConfig& cfg, const Table2Result& t,
                                 const PowerFit* fit = nullptr) {
    using report_detail::num;
    if (cfg.format == "json") {
        nlohmann::ordered_json j;
        j["config_hash"] = config_hash(cfg);
        j["tolerances"] = report_detail::tolerances_json(cfg);
        if (fit) {
            j["im_fit_exponent"] = fit->exponent;
            j["im_fit_residual"] = fit->residual;
            j["im_fit_points"] = fit->points;
        }
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : t.rows) {
            nlohmann::ordered_json row;
            row["eps"] = r.eps;
            row["alpha"] = r.alpha;
            row["omega1"] = r.eigen.omega.real();
            row["re_omega2"] = r.resonance.omega.real();
            row["im_omega2"] = r.resonance.omega.imag();
            row["delta"] = r.delta;
            row["n_modes_eig"] = r.eigen.n_modes_used;
            row["n_modes_res"] = r.resonance.n_modes_used;
            row["converged"] = r.ok;
            row["error"] = r.error;
            j["rows"].push_back(row);
        }
        return j.dump(2) + "\n";
    }
    std::string s = report_detail::artifact_header(cfg);
    if (fit)
        s += "# im_fit: exponent=" + num(fit->exponent) + " residual=" +
             num(fit->residual) + " points=" + std::to_string(fit->points) + "\n";
    s += "eps,alpha,omega1,re_omega2,im_omega2,delta,n_modes_eig,n_modes_res,"
         "converged,error\n";
    for (const auto& r : t.rows) {
        s += num(r.eps) + "," + num(r.alpha) + "," + num(r.eigen.omega.real()) + "," +
             num(r.resonance.omega.real()) + "," + num(r.resonance.omega.imag()) +
             "," + num(r.delta) + "," + std::to_string(r.eigen.n_modes_used) + "," +
             std::to_string(r.resonance.n_modes_used) + "," + (r.ok ? "1" : "0") +
             "," + r.error + "\n";
    }
    return s;
}

inline std::string render_fd_report(const RunConfig& cfg,
                                    const std::vector<FdReportRow>& rows) {
    using report_detail::num;
    if (cfg.format == "json") {
        nlohmann::ordered_json j;
        j["config_hash"] = config_hash(cfg);
        j["tolerances"] = report_detail::tolerances_json(cfg);
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json row;
            row["nx"] = r.nx;
            row["ny"] = r.ny;
            row["lambda1"] = r.lambda1;
            row["omega1"] = r.omega1;
            row["richardson_estimate"] = r.richardson;
            j["rows"].push_back(row);
        }
        return j.dump(2) + "\n";
    }
    std::string s = report_detail::artifact_header(cfg);
    s += "nx,ny,lambda1,omega1,richardson_estimate\n";
    for (const auto& r : rows)
        s += std::to_string(r.nx) + "," + std::to_string(r.ny) + "," + num(r.lambda1) +
             "," + num(r.omega1) + "," + num(r.richardson) + "\n";
    return s;
}

inline std::string render_spectral(const RunConfig& cfg, const SpectralResult& r) {
    using report_detail::num;
    if (cfg.format == "json") {
        nlohmann::ordered_json j;
        j["config_hash"] = config_hash(cfg);
        j["tolerances"] = report_detail::tolerances_json(cfg);
        j["kind"] = r.kind == SpectralKind::eigenvalue ? "eigenvalue" : "resonance";
        j["alpha"] = cfg.alpha;
        j["re_omega"] = r.omega.real();
        j["im_omega"] = r.omega.imag();
        j["re_lambda"] = r.lambda.real();
        j["im_lambda"] = r.lambda.imag();
        j["n_modes"] = r.n_modes_used;
        j["residual"] = r.residual;
        j["residual_rel"] = r.residual_rel;
        j["converged"] = r.converged;
        j["contours"] = nlohmann::ordered_json::array();
        for (const auto& [c, w] : r.contour_history) {
            nlohmann::ordered_json cj;
            cj["re_center"] = c.center.real();
            cj["im_center"] = c.center.imag();
            cj["radius"] = c.radius;
            cj["winding"] = w;
            j["contours"].push_back(cj);
        }
        return j.dump(2) + "\n";
    }
    std::string s = report_detail::artifact_header(cfg);
    s += "alpha,re_omega,im_omega,re_lambda,im_lambda,n_modes,residual,residual_rel,"
         "converged\n";
    s += num(cfg.alpha) + "," + num(r.omega.real()) + "," + num(r.omega.imag()) + "," +
         num(r.lambda.real()) + "," + num(r.lambda.imag()) + "," +
         std::to_string(r.n_modes_used) + "," + num(r.residual) + "," +
         num(r.residual_rel) + "," + (r.converged ? "1" : "0") + "\n";
    return s;
}

inline std::string render_scatter(const RunConfig& cfg,
                                  const std::vector<ScatteringResult>& rows) {
    using report_detail::num;
    if (cfg.format == "json") {
        nlohmann::ordered_json j;
        j["config_hash"] = config_hash(cfg);
        j["tolerances"] = report_detail::tolerances_json(cfg);
        j["n_modes"] = cfg.modes;
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json row;
            row["omega"] = r.omega;
            row["re_s1"] = r.s1.real();
            row["im_s1"] = r.s1.imag();
            row["abs_s1"] = std::abs(r.s1);
            double tail = 0.0;
            for (const auto& sk : r.s_tail) tail = std::max(tail, std::abs(sk));
            row["max_tail_abs"] = tail;
            j["rows"].push_back(row);
        }
        return j.dump(2) + "\n";
    }
    std::string s = report_detail::artifact_header(cfg);
    s += "# n_modes: " + std::to_string(cfg.modes > 0 ? cfg.modes : 6) + "\n";
    s += "omega,re_s1,im_s1,abs_s1,max_tail_abs\n";
    for (const auto& r : rows) {
        double tail = 0.0;
        for (const auto& sk : r.s_tail) tail = std::max(tail, std::abs(sk));
        s += num(r.omega) + "," + num(r.s1.real()) + "," + num(r.s1.imag()) + "," +
             num(std::abs(r.s1)) + "," + num(tail) + "\n";
    }
    return s;
}

inline void write_artifact(const RunConfig& cfg, const std::string& content) {
    if (cfg.out.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw ConfigError("cannot open output path: " + cfg.out);
    f << content;
}

} // namespace waveguide

#endif
