// wgmodes: eigenvalues, resonances and scattering of planar waveguides with
// variable width, via the coupled-mode reduction and orthogonal transfer.

#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "waveguide/report.hpp"

using namespace waveguide;

namespace {

// 0: every row converged; 2: some rows failed; used as the process status.
int status_from(bool all_ok, bool any_rows) {
    if (!any_rows) return 0;
    return all_ok ? 0 : 2;
}

int dispatch(const RunConfig& cfg) {
    const SolverSettings settings = settings_from(cfg);

    if (cfg.problem == "eig") {
        const SpectralResult r = pipeline::eigenvalue_pipeline(cfg.alpha, settings);
        write_artifact(cfg, render_spectral(cfg, r));
        return r.converged ? 0 : 2;
    }
    if (cfg.problem == "res") {
        const SpectralResult r = pipeline::resonance_pipeline(cfg.alpha, settings);
        write_artifact(cfg, render_spectral(cfg, r));
        return r.converged ? 0 : 2;
    }
    if (cfg.problem == "scatter") {
        const DomainSpec spec = pipeline::open_domain(cfg.alpha, settings);
        const int n = cfg.modes > 0 ? cfg.modes : 6;
        std::vector<ScatteringResult> rows;
        if (cfg.scatter_count > 0) {
            const double pi = std::numbers::pi;
            const double lo = pi + 0.1, hi = 2.0 * pi - 0.1;
            for (int i = 0; i < cfg.scatter_count; ++i) {
                const double w = lo + (hi - lo) * (i + 0.5) / cfg.scatter_count;
                rows.push_back(scattering_coefficient(w, spec, n, settings.step));
            }
        } else {
            rows.push_back(scattering_coefficient(cfg.omega, spec, n, settings.step));
        }
        write_artifact(cfg, render_scatter(cfg, rows));
        return 0;
    }
    if (cfg.problem == "ref-fd") {
        const auto rows =
            run_fd_report(cfg.alpha, settings, cfg.fd_nx, cfg.fd_ny, cfg.fd_levels);
        write_artifact(cfg, render_fd_report(cfg, rows));
        return 0;
    }
    if (cfg.problem == "table1") {
        const Table1Result t = run_table1(settings, cfg.alphas);
        write_artifact(cfg, render_table1(cfg, t));
        return status_from(t.all_converged, !t.rows.empty());
    }
    if (cfg.problem == "table2") {
        const Table2Result t = run_table2(settings, cfg.epsilons);
        write_artifact(cfg, render_table2(cfg, t));
        return status_from(t.all_converged, !t.rows.empty());
    }
    if (cfg.problem == "sweep") {
        const SweepResult sw = run_sweep(settings, cfg.epsilons);
        write_artifact(cfg, render_table2(cfg, sw.table, &sw.im_fit));
        return status_from(sw.table.all_converged, !sw.table.rows.empty());
    }
    throw ConfigError("unknown problem: " + cfg.problem);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"waveguide eigenvalues, resonances and scattering"};
    app.require_subcommand(0, 1);

    std::string config_path;
    app.add_option("--config", config_path, "config file (key value lines)");

    double alpha = 0, gamma = 0, adaptive = 0, truncate_x = 0, r0 = 0, tr = 0;
    double omega = 0, ia = 0, ib = 0;
    int modes = 0, count = 0, fdnx = 0, fdny = 0, fdlv = 0;
    std::string out, format, alphas_s, eps_s;

    auto* oa = app.add_option("--alpha", alpha, "indentation depth");
    auto* og = app.add_option("--gamma", gamma, "indentation position (default 2.0)");
    auto* om = app.add_option("--modes", modes, "fixed transverse mode count");
    auto* oad = app.add_option("--adaptive", adaptive,
                               "adaptive mode-count tolerance on omega");
    om->excludes(oad);
    auto* ox = app.add_option("--truncate-x", truncate_x,
                              "radiation truncation point (default 5.4)");
    auto* or0 = app.add_option("--contour-r0", r0, "initial contour radius");
    auto* otr = app.add_option("--target-r", tr, "final contour radius (default 1e-4)");
    auto* oo = app.add_option("--out", out, "artifact path (default stdout)");
    auto* of = app.add_option("--format", format, "csv|json");
    auto* ow = app.add_option("--omega", omega, "scattering frequency");
    auto* oc = app.add_option("--scatter-count", count, "scattering sweep points");
    auto* oas = app.add_option("--alphas", alphas_s, "comma list of table rows");
    auto* oes = app.add_option("--epsilons", eps_s, "comma list of table rows");
    auto* onx = app.add_option("--fd-nx", fdnx, "reference grid cells in x");
    auto* ony = app.add_option("--fd-ny", fdny, "reference grid cells in y");
    auto* olv = app.add_option("--fd-levels", fdlv, "reference refinement levels");
    auto* oia = app.add_option("--interval-a", ia, "compact interval start");
    auto* oib = app.add_option("--interval-b", ib, "compact interval end");

    std::vector<CLI::App*> subs;
    for (const char* name :
         {"eig", "res", "scatter", "ref-fd", "table1", "table2", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot read config file: " + config_path);
            std::stringstream buf;
            buf << f.rdbuf();
            cfg = parse_config(buf.str());
        }

        for (const CLI::App* sub : subs)
            if (sub->parsed()) cfg.problem = sub->get_name();
        if (oa->count()) cfg.alpha = alpha;
        if (og->count()) cfg.gamma = gamma;
        if (om->count()) cfg.modes = modes;
        if (oad->count()) {
            cfg.modes = 0;
            cfg.adaptive_tol = adaptive;
        }
        if (ox->count()) cfg.truncate_x = truncate_x;
        if (or0->count()) cfg.contour_r0 = r0;
        if (otr->count()) cfg.target_r = tr;
        if (oo->count()) cfg.out = out;
        if (of->count()) cfg.format = format;
        if (ow->count()) cfg.omega = omega;
        if (oc->count()) cfg.scatter_count = count;
        if (oas->count()) cfg.alphas = config_detail::parse_list(alphas_s);
        if (oes->count()) cfg.epsilons = config_detail::parse_list(eps_s);
        if (onx->count()) cfg.fd_nx = fdnx;
        if (ony->count()) cfg.fd_ny = fdny;
        if (olv->count()) cfg.fd_levels = fdlv;
        if (oia->count()) cfg.interval_a = ia;
        if (oib->count()) cfg.interval_b = ib;
        if (cfg.format != "csv" && cfg.format != "json")
            throw ConfigError("format must be csv or json");

        return dispatch(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
