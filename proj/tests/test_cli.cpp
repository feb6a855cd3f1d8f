#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "waveguide/report.hpp"

using namespace waveguide;

TEST_CASE("config serialization round-trips byte-identically") {
    const std::string text =
        "# sample configuration\n"
        "problem table1\n"
        "alpha 0.8\n"
        "gamma 2\n"
        "modes 6\n"
        "alphas 0.7,0.8\n"
        "epsilons -\n"
        "out results.csv\n"
        "format csv\n";
    const RunConfig c1 = parse_config(text);
    const std::string s1 = serialize_config(c1);
    const RunConfig c2 = parse_config(s1);
    const std::string s2 = serialize_config(c2);
    CHECK(s1 == s2);

    CHECK(c1.problem == "table1");
    CHECK(c1.alpha == 0.8);
    CHECK(c1.modes == 6);
    CHECK(c1.alphas == std::vector<double>{0.7, 0.8});
    CHECK(c1.epsilons.empty());
    CHECK(c1.out == "results.csv");

    // defaults round-trip too
    const RunConfig d;
    CHECK(serialize_config(parse_config(serialize_config(d))) == serialize_config(d));
    CHECK(d.alphas.size() == 10);
    CHECK(d.epsilons.size() == 10);
}

TEST_CASE("config parse rejects junk") {
    CHECK_THROWS_AS(parse_config("no_such_key 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("alpha notanumber\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("format yaml\n"), ConfigError);
}

TEST_CASE("config hash tracks content") {
    RunConfig a, b;
    b.alpha = 0.91;
    CHECK(config_hash(a) == config_hash(a));
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("artifacts embed the header and honor row sets") {
    RunConfig cfg;
    cfg.problem = "sweep";
    cfg.epsilons.clear();  // explicitly empty: no rows, still a valid artifact
    const SolverSettings s = settings_from(cfg);
    const SweepResult sw = run_sweep(s, cfg.epsilons);
    CHECK(sw.table.rows.empty());
    CHECK(sw.table.all_converged);

    const std::string csv = render_table2(cfg, sw.table, &sw.im_fit);
    CHECK(csv.find("# config_hash: " + config_hash(cfg)) != std::string::npos);
    CHECK(csv.find("# tolerances:") != std::string::npos);
    CHECK(csv.find("eps,alpha,omega1") != std::string::npos);
    // header lines plus fit line plus the column row, nothing else
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("fd report columns match the published interface") {
    RunConfig cfg;
    cfg.problem = "ref-fd";
    cfg.alpha = 0.8;
    const SolverSettings s = settings_from(cfg);
    const auto rows = run_fd_report(0.8, s, 16, 8, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].nx == 32);
    CHECK(rows[1].ny == 16);
    CHECK(rows[0].lambda1 > 0.0);

    const std::string csv = render_fd_report(cfg, rows);
    CHECK(csv.find("nx,ny,lambda1,omega1,richardson_estimate\n") != std::string::npos);

    cfg.format = "json";
    const std::string js = render_fd_report(cfg, rows);
    CHECK(js.find("\"richardson_estimate\"") != std::string::npos);
}

TEST_CASE("table computation is deterministic across runs") {
    RunConfig cfg;
    cfg.problem = "table1";
    cfg.modes = 3;
    cfg.alphas = {0.4};
    cfg.target_r = 1e-3;
    cfg.contour_r0 = 0.3;
    const SolverSettings s = settings_from(cfg);

    const Table1Result t1 = run_table1(s, cfg.alphas);
    const Table1Result t2 = run_table1(s, cfg.alphas);
    const std::string a1 = render_table1(cfg, t1);
    const std::string a2 = render_table1(cfg, t2);
    CHECK(a1 == a2);
    REQUIRE(t1.rows.size() == 1);
    CHECK(t1.rows[0].ok);
    CHECK(t1.max_ortho_drift <= 1e-10);
    CHECK(t1.max_ortho_drift > 0.0);

    // json mirror carries the same numbers
    cfg.format = "json";
    const std::string js = render_table1(cfg, t1);
    CHECK(js.find("\"re_omega\"") != std::string::npos);
}

TEST_CASE("power-law fit recovers a known exponent") {
    std::vector<double> xs, ys;
    for (double x : {0.03, 0.05, 0.08, 0.13, 0.2}) {
        xs.push_back(x);
        ys.push_back(2.7 * std::pow(x, 1.5));
    }
    const PowerFit fit = fit_power_law(xs, ys);
    CHECK(fit.points == 5);
    CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.residual <= 1e-12);
    CHECK(std::exp(fit.log_prefactor) == doctest::Approx(2.7).epsilon(1e-10));
}
