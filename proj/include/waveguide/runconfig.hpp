#ifndef WAVEGUIDE_RUNCONFIG_HPP
#define WAVEGUIDE_RUNCONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "waveguide/errors.hpp"

namespace waveguide {

// Reference row sets reproduced by the table commands.
inline std::vector<double> default_table_alphas() {
    return {0.7, 0.75, 0.8, 0.825, 0.85, 0.9, 0.925, 0.95, 0.96, 0.97};
}
inline std::vector<double> default_table_epsilons() {
    return {0.3, 0.25, 0.2, 0.175, 0.15, 0.1, 0.075, 0.05, 0.04, 0.03};
}

// Run configuration shared by the CLI and the table runners. A config file is
// plain "key value" lines ('#' comments); flags override file values. The
// canonical serialization is stable, so parse -> serialize round-trips byte
// identically.
struct RunConfig {
    std::string problem = "eig";  // eig|res|scatter|ref-fd|table1|table2|sweep
    double alpha = 0.8;
    double gamma = 2.0;
    double interval_a = 0.0;
    double interval_b = 0.0;  // 0: use gamma
    double truncate_x = 5.4;
    int modes = 0;  // fixed mode count; 0 selects adaptive
    double adaptive_tol = 1e-4;
    int n_start = 4;
    double omega = 4.4;        // scatter frequency
    int scatter_count = 0;     // >0: sweep that many points across the band
    double contour_r0 = 0.5;
    double target_r = 1e-4;
    double root_tol = 0.25;    // relative residual bound for resonances
    double rtol = 1e-10;
    double atol = 1e-12;
    double ortho_tol = 1e-10;
    double h_max = 0.0;              // 0: span/8
    double stiff_slope_ratio = 0.0;  // 0: brake off; else halve the step cap
    // row sets for the table/sweep commands; explicitly empty means no rows
    std::vector<double> alphas = default_table_alphas();
    std::vector<double> epsilons = default_table_epsilons();
    int fd_nx = 64;
    int fd_ny = 32;
    int fd_levels = 3;
    std::string out;  // artifact path; empty writes to stdout
    std::string format = "csv";
};

namespace config_detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
    if (v.empty()) return "-";
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt_double(v[i]);
    }
    return s;
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    if (s == "-" || s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw ConfigError("bad list entry: " + item);
        }
    }
    return out;
}

} // namespace config_detail

inline std::string serialize_config(const RunConfig& c) {
    using config_detail::fmt_double;
    using config_detail::fmt_list;
    std::string s;
    auto kv = [&s](const std::string& k, const std::string& v) {
        s += k;
        s += ' ';
        s += v;
        s += '\n';
    };
    kv("problem", c.problem);
    kv("alpha", fmt_double(c.alpha));
    kv("gamma", fmt_double(c.gamma));
    kv("interval_a", fmt_double(c.interval_a));
    kv("interval_b", fmt_double(c.interval_b));
    kv("truncate_x", fmt_double(c.truncate_x));
    kv("modes", std::to_string(c.modes));
    kv("adaptive_tol", fmt_double(c.adaptive_tol));
    kv("n_start", std::to_string(c.n_start));
    kv("omega", fmt_double(c.omega));
    kv("scatter_count", std::to_string(c.scatter_count));
    kv("contour_r0", fmt_double(c.contour_r0));
    kv("target_r", fmt_double(c.target_r));
    kv("root_tol", fmt_double(c.root_tol));
    kv("rtol", fmt_double(c.rtol));
    kv("atol", fmt_double(c.atol));
    kv("ortho_tol", fmt_double(c.ortho_tol));
    kv("h_max", fmt_double(c.h_max));
    kv("stiff_slope_ratio", fmt_double(c.stiff_slope_ratio));
    kv("alphas", fmt_list(c.alphas));
    kv("epsilons", fmt_list(c.epsilons));
    kv("fd_nx", std::to_string(c.fd_nx));
    kv("fd_ny", std::to_string(c.fd_ny));
    kv("fd_levels", std::to_string(c.fd_levels));
    kv("out", c.out.empty() ? "-" : c.out);
    kv("format", c.format);
    return s;
}

inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::stringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string value;
        std::getline(ls, value);
        const auto first = value.find_first_not_of(" \t");
        value = (first == std::string::npos) ? "" : value.substr(first);
        const auto last = value.find_last_not_of(" \t\r");
        if (last != std::string::npos) value = value.substr(0, last + 1);

        auto as_double = [&]() {
            try {
                return std::stod(value);
            } catch (...) {
                throw ConfigError("line " + std::to_string(lineno) + ": bad number for " + key);
            }
        };
        auto as_int = [&]() {
            try {
                return std::stoi(value);
            } catch (...) {
                throw ConfigError("line " + std::to_string(lineno) + ": bad integer for " + key);
            }
        };

        if (key == "problem") c.problem = value;
        else if (key == "alpha") c.alpha = as_double();
        else if (key == "gamma") c.gamma = as_double();
        else if (key == "interval_a") c.interval_a = as_double();
        else if (key == "interval_b") c.interval_b = as_double();
        else if (key == "truncate_x") c.truncate_x = as_double();
        else if (key == "modes") c.modes = as_int();
        else if (key == "adaptive_tol") c.adaptive_tol = as_double();
        else if (key == "n_start") c.n_start = as_int();
        else if (key == "omega") c.omega = as_double();
        else if (key == "scatter_count") c.scatter_count = as_int();
        else if (key == "contour_r0") c.contour_r0 = as_double();
        else if (key == "target_r") c.target_r = as_double();
        else if (key == "root_tol") c.root_tol = as_double();
        else if (key == "rtol") c.rtol = as_double();
        else if (key == "atol") c.atol = as_double();
        else if (key == "ortho_tol") c.ortho_tol = as_double();
        else if (key == "h_max") c.h_max = as_double();
        else if (key == "stiff_slope_ratio") c.stiff_slope_ratio = as_double();
        else if (key == "alphas") c.alphas = config_detail::parse_list(value);
        else if (key == "epsilons") c.epsilons = config_detail::parse_list(value);
        else if (key == "fd_nx") c.fd_nx = as_int();
        else if (key == "fd_ny") c.fd_ny = as_int();
        else if (key == "fd_levels") c.fd_levels = as_int();
        else if (key == "out") c.out = (value == "-") ? "" : value;
        else if (key == "format") c.format = value;
        else throw ConfigError("line " + std::to_string(lineno) + ": unknown key " + key);
    }
    if (c.format != "csv" && c.format != "json")
        throw ConfigError("format must be csv or json");
    return c;
}

// FNV-1a over the canonical serialization; embedded in artifacts so outputs
// are traceable to their configuration.
inline std::string config_hash(const RunConfig& c) {
    const std::string s = serialize_config(c);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace waveguide

#endif
