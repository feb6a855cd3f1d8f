#ifndef WAVEGUIDE_FD_REFERENCE_HPP
#define WAVEGUIDE_FD_REFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "waveguide/errors.hpp"
#include "waveguide/profile.hpp"

namespace waveguide {

// Uniform tensor grid on (a,b) x (0,1); nx, ny count cells.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double a = 0.0;
    double b = 0.0;

    Grid2D(int nx_, int ny_, double a_, double b_) : nx(nx_), ny(ny_), a(a_), b(b_) {
        if (nx < 8 || ny < 8) throw ConfigError("Grid2D: need nx, ny >= 8");
        if ((nx - 1) * (ny - 1) < 49)
            throw ConfigError("Grid2D: fewer than 49 interior nodes");
        if (!(b > a)) throw ConfigError("Grid2D: need b > a");
    }

    double hx() const { return (b - a) / nx; }
    double hy() const { return 1.0 / ny; }
};

struct SparseOperator {
    int dim = 0;
    struct Entry {
        int row;
        int col;
        double value;
    };
    std::vector<Entry> entries;
    bool symmetric = false;
};

namespace fd_detail {

// Symmetric second-order discretization of the transformed quadratic form
//   J(f) = int [ a f_x^2 - 2 b f_x f_y + c f_y^2 ] dx dy,
//   a = phi, b = phi' y, c = (1 + (phi' y)^2)/phi,
// on a tensor grid with arbitrary monotone x nodes and uniform y. Dirichlet
// rows/columns are eliminated. Assembled as a sum of per-cell and per-node
// quadratic contributions, so the matrix is symmetric by construction.
struct FormAssembly {
    SparseOperator stiffness;
    SparseOperator weight;  // diagonal phi-weighted mass
};

inline FormAssembly assemble_form(const std::function<double(double)>& width,
                                  const std::function<double(double)>& slope,
                                  const std::vector<double>& x_nodes, int ny) {
    const int nx = static_cast<int>(x_nodes.size()) - 1;
    const int mi = nx - 1;  // interior x nodes
    const int mj = ny - 1;  // interior y nodes
    const double hy = 1.0 / ny;
    const int dim = mi * mj;

    auto id = [&](int i, int j) { return (i - 1) * mj + (j - 1); };
    std::vector<std::map<int, double>> rows(dim);
    auto add = [&](int r, int c, double v) {
        if (v != 0.0) rows[r][c] += v;
    };

    // x-derivative term: per x-cell, per interior y node
    for (int i = 0; i < nx; ++i) {
        const double hx = x_nodes[i + 1] - x_nodes[i];
        const double xm = 0.5 * (x_nodes[i] + x_nodes[i + 1]);
        const double phi = width(xm);
        if (!(phi > 0.0))
            throw NonpositiveWidthError("fd assembly: phi <= 0 at a cell midpoint");
        const double coef = phi * hy / hx;
        for (int j = 1; j <= mj; ++j) {
            const bool li = i >= 1, ri = i + 1 <= mi;
            if (li) add(id(i, j), id(i, j), coef);
            if (ri) add(id(i + 1, j), id(i + 1, j), coef);
            if (li && ri) {
                add(id(i, j), id(i + 1, j), -coef);
                add(id(i + 1, j), id(i, j), -coef);
            }
        }
    }

    // y-derivative term: per y-cell, per interior x node
    for (int i = 1; i <= mi; ++i) {
        const double wx = 0.5 * (x_nodes[i + 1] - x_nodes[i - 1]);
        const double phi = width(x_nodes[i]);
        if (!(phi > 0.0))
            throw NonpositiveWidthError("fd assembly: phi <= 0 at a grid node");
        const double dphi = slope(x_nodes[i]);
        for (int j = 0; j < ny; ++j) {
            const double ym = (j + 0.5) * hy;
            const double t = dphi * ym;
            const double coef = (1.0 + t * t) / phi * wx / hy;
            const bool lo = j >= 1, up = j + 1 <= mj;
            if (lo) add(id(i, j), id(i, j), coef);
            if (up) add(id(i, j + 1), id(i, j + 1), coef);
            if (lo && up) {
                add(id(i, j), id(i, j + 1), -coef);
                add(id(i, j + 1), id(i, j), -coef);
            }
        }
    }

    // mixed term, node-centered with central differences:
    // -2 b Dx f Dy f, symmetrized over the two factor orders
    for (int i = 1; i <= mi; ++i) {
        const double wx = 0.5 * (x_nodes[i + 1] - x_nodes[i - 1]);
        const double dphi = slope(x_nodes[i]);
        const double dx2 = x_nodes[i + 1] - x_nodes[i - 1];
        for (int j = 1; j <= mj; ++j) {
            const double b = dphi * j * hy;
            if (b == 0.0) continue;
            const double m = -b * wx * hy;  // coefficient of (DxF)(DyF), both orders
            // Dx f = (f_{i+1,j} - f_{i-1,j}) / dx2, Dy f = (f_{i,j+1} - f_{i,j-1}) / (2 hy)
            const int xs[2] = {i + 1, i - 1};
            const double xw[2] = {1.0 / dx2, -1.0 / dx2};
            const int ys[2] = {j + 1, j - 1};
            const double yw[2] = {1.0 / (2.0 * hy), -1.0 / (2.0 * hy)};
            for (int p = 0; p < 2; ++p) {
                if (xs[p] < 1 || xs[p] > mi) continue;
                for (int q = 0; q < 2; ++q) {
                    if (ys[q] < 1 || ys[q] > mj) continue;
                    const double v = m * xw[p] * yw[q];
                    add(id(xs[p], j), id(i, ys[q]), v);
                    add(id(i, ys[q]), id(xs[p], j), v);
                }
            }
        }
    }

    FormAssembly out;
    out.stiffness.dim = dim;
    out.stiffness.symmetric = true;
    for (int r = 0; r < dim; ++r)
        for (const auto& [c, v] : rows[r]) out.stiffness.entries.push_back({r, c, v});

    out.weight.dim = dim;
    out.weight.symmetric = true;
    for (int i = 1; i <= mi; ++i) {
        const double wx = 0.5 * (x_nodes[i + 1] - x_nodes[i - 1]);
        const double phi = width(x_nodes[i]);
        for (int j = 1; j <= mj; ++j)
            out.weight.entries.push_back({id(i, j), id(i, j), phi * wx * hy});
    }
    return out;
}

// Banded Cholesky for the shifted solves of the inverse iteration.
class BandCholesky {
public:
    BandCholesky(const SparseOperator& op) : n_(op.dim) {
        bw_ = 0;
        for (const auto& e : op.entries) bw_ = std::max(bw_, std::abs(e.row - e.col));
        band_.assign(static_cast<std::size_t>(n_) * (bw_ + 1), 0.0);
        for (const auto& e : op.entries)
            if (e.row >= e.col) at(e.row, e.row - e.col) = e.value;
        factor();
    }

    std::vector<double> solve(std::vector<double> b) const {
        for (int i = 0; i < n_; ++i) {
            double s = b[i];
            const int k0 = std::max(0, i - bw_);
            for (int k = k0; k < i; ++k) s -= cat(i, i - k) * b[k];
            b[i] = s / cat(i, 0);
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = b[i];
            const int k1 = std::min(n_ - 1, i + bw_);
            for (int k = i + 1; k <= k1; ++k) s -= cat(k, k - i) * b[k];
            b[i] = s / cat(i, 0);
        }
        return b;
    }

private:
    double& at(int i, int d) { return band_[static_cast<std::size_t>(i) * (bw_ + 1) + d]; }
    double cat(int i, int d) const {
        return band_[static_cast<std::size_t>(i) * (bw_ + 1) + d];
    }

    void factor() {
        for (int i = 0; i < n_; ++i) {
            const int j0 = std::max(0, i - bw_);
            for (int j = j0; j <= i; ++j) {
                double s = at(i, i - j);
                const int k0 = std::max(j0, j - bw_);
                for (int k = k0; k < j; ++k) s -= cat(i, i - k) * cat(j, j - k);
                if (j < i) {
                    at(i, i - j) = s / cat(j, 0);
                } else {
                    if (!(s > 0.0))
                        throw SolverError("band Cholesky: matrix not positive definite");
                    at(i, 0) = std::sqrt(s);
                }
            }
        }
    }

    int n_;
    int bw_;
    std::vector<double> band_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace fd_detail

inline std::vector<double> uniform_nodes(double a, double b, int n_cells) {
    std::vector<double> nodes(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) nodes[i] = a + (b - a) * i / n_cells;
    return nodes;
}

// Stiffness of the transformed Helmholtz form on the unit-height rectangle,
// Dirichlet boundary all around; pair with assemble_weight for the
// generalized eigenproblem S f = lambda M f.
inline SparseOperator assemble_transformed_laplacian(const Profile& profile,
                                                     const Grid2D& grid) {
    return fd_detail::assemble_form(profile.width, profile.slope,
                                    uniform_nodes(grid.a, grid.b, grid.nx), grid.ny)
        .stiffness;
}

inline SparseOperator assemble_weight(const Profile& profile, const Grid2D& grid) {
    return fd_detail::assemble_form(profile.width, profile.slope,
                                    uniform_nodes(grid.a, grid.b, grid.nx), grid.ny)
        .weight;
}

// The `count` smallest generalized eigenvalues of (op, weight) by inverse
// iteration with weight-orthogonal deflation. Converged when the relative
// Rayleigh-quotient change drops below 1e-10.
inline std::vector<double> smallest_eigenvalues(const SparseOperator& op,
                                                const SparseOperator& weight,
                                                int count, int max_iter = 2000) {
    const int n = op.dim;
    std::vector<double> mdiag(n, 0.0);
    for (const auto& e : weight.entries) {
        if (e.row != e.col)
            throw ConfigError("smallest_eigenvalues: weight must be diagonal");
        mdiag[e.row] = e.value;
    }
    fd_detail::BandCholesky chol(op);

    // applying the stiffness for Rayleigh quotients
    std::vector<std::vector<std::pair<int, double>>> srows(n);
    for (const auto& e : op.entries) srows[e.row].push_back({e.col, e.value});
    auto apply_s = [&](const std::vector<double>& x) {
        std::vector<double> y(n, 0.0);
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (const auto& [c, v] : srows[r]) s += v * x[c];
            y[r] = s;
        }
        return y;
    };

    std::vector<std::vector<double>> basis;
    std::vector<double> values;
    unsigned long long lcg = 88172645463325252ull;
    auto rnd = [&]() {
        lcg ^= lcg << 13;
        lcg ^= lcg >> 7;
        lcg ^= lcg << 17;
        return static_cast<double>(lcg % 1000003) / 1000003.0 - 0.5;
    };

    for (int j = 0; j < count; ++j) {
        std::vector<double> x(n);
        for (double& v : x) v = rnd();
        auto m_orth = [&](std::vector<double>& v) {
            for (const auto& u : basis) {
                double proj = 0.0;
                for (int i = 0; i < n; ++i) proj += u[i] * mdiag[i] * v[i];
                for (int i = 0; i < n; ++i) v[i] -= proj * u[i];
            }
        };
        m_orth(x);
        double nrm2 = 0.0;
        for (int i = 0; i < n; ++i) nrm2 += x[i] * mdiag[i] * x[i];
        for (double& v : x) v /= std::sqrt(nrm2);

        double rho_prev = 0.0;
        bool done = false;
        for (int it = 0; it < max_iter; ++it) {
            std::vector<double> b(n);
            for (int i = 0; i < n; ++i) b[i] = mdiag[i] * x[i];
            x = chol.solve(b);
            m_orth(x);
            nrm2 = 0.0;
            for (int i = 0; i < n; ++i) nrm2 += x[i] * mdiag[i] * x[i];
            const double inv = 1.0 / std::sqrt(nrm2);
            for (double& v : x) v *= inv;
            const std::vector<double> sx = apply_s(x);
            const double rho = fd_detail::dot(x, sx);
            if (it > 0 && std::abs(rho - rho_prev) <= 1e-10 * std::abs(rho)) {
                values.push_back(rho);
                basis.push_back(x);
                done = true;
                break;
            }
            rho_prev = rho;
        }
        if (!done)
            throw NoConvergenceError("smallest_eigenvalues: inverse iteration stalled");
    }
    std::sort(values.begin(), values.end());
    return values;
}

// x nodes for the cusp domain (0, x_star): uniform core, geometrically graded
// toward the cusp with the given ratio.
inline std::vector<double> cusp_graded_nodes(double x_star, int core_cells,
                                             double grade = 0.8, int layers = 18) {
    const double h_core = x_star / core_cells;
    // graded block, finest cell adjacent to the cusp
    std::vector<double> graded(layers);
    double h = h_core;
    double graded_len = 0.0;
    for (int l = 0; l < layers; ++l) {
        h *= grade;
        graded[l] = h;
        graded_len += h;
    }
    const double core_len = x_star - graded_len;
    if (core_len <= h_core)
        throw ConfigError("cusp_graded_nodes: grading swallowed the whole interval");
    const int n_core = std::max(4, static_cast<int>(std::round(core_len / h_core)));
    std::vector<double> nodes;
    nodes.push_back(0.0);
    for (int i = 1; i <= n_core; ++i) nodes.push_back(core_len * i / n_core);
    double pos = core_len;
    for (int l = 0; l < layers; ++l) {
        pos += graded[l];
        nodes.push_back(pos);
    }
    nodes.back() = x_star;
    return nodes;
}

struct CuspEstimate {
    double omega = 0.0;           // extrapolated wave number
    double error_estimate = 0.0;  // from the extrapolation sequence
    std::vector<double> per_level_omega;
};

// Lowest Dirichlet wave number of the limiting cusp domain (the middle
// component of the half-line problem at alpha = alpha_critical), by graded-
// mesh finite differences and Richardson extrapolation over the given grids.
inline CuspEstimate cusp_limit_estimate_detail(double gamma,
                                               const std::vector<Grid2D>& grids,
                                               double grade = 0.8) {
    const double astar = alpha_critical(gamma);
    auto width = [astar, gamma](double x) {
        const double d1 = x - gamma, d2 = x + gamma;
        return 1.0 - astar * (std::exp(-d1 * d1) + std::exp(-d2 * d2));
    };
    auto slope = [astar, gamma](double x) {
        const double d1 = x - gamma, d2 = x + gamma;
        return 2.0 * astar * (d1 * std::exp(-d1 * d1) + d2 * std::exp(-d2 * d2));
    };
    // touching point: minimizer of phi near x = gamma
    auto w = width;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.5 * gamma, hi = gamma + 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = w(c), fd = w(d);
    while (hi - lo > 1e-13) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = w(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = w(d);
        }
    }
    const double x_star = 0.5 * (lo + hi);

    CuspEstimate est;
    std::vector<double> lambdas;
    for (const Grid2D& g : grids) {
        const std::vector<double> nodes = cusp_graded_nodes(x_star, g.nx, grade);
        fd_detail::FormAssembly fa = fd_detail::assemble_form(width, slope, nodes, g.ny);
        const std::vector<double> vals = smallest_eigenvalues(fa.stiffness, fa.weight, 1);
        lambdas.push_back(vals[0]);
        est.per_level_omega.push_back(std::sqrt(vals[0]));
    }
    if (lambdas.size() >= 2) {
        const double l1 = lambdas[lambdas.size() - 2];
        const double l2 = lambdas[lambdas.size() - 1];
        const double rich = (4.0 * l2 - l1) / 3.0;
        est.omega = std::sqrt(rich);
        est.error_estimate = std::abs(est.omega - std::sqrt(l2));
        if (lambdas.size() >= 3) {
            const double l0 = lambdas[lambdas.size() - 3];
            const double rich_prev = (4.0 * l1 - l0) / 3.0;
            est.error_estimate =
                std::max(1e-12, std::abs(std::sqrt(rich) - std::sqrt(rich_prev)));
        }
    } else {
        est.omega = est.per_level_omega.back();
        est.error_estimate = 1.0;
    }
    return est;
}

inline double cusp_limit_estimate(double gamma, const std::vector<Grid2D>& grids) {
    return cusp_limit_estimate_detail(gamma, grids).omega;
}

} // namespace waveguide

#endif
