#ifndef WAVEGUIDE_BETA_TABLE_HPP
#define WAVEGUIDE_BETA_TABLE_HPP

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "waveguide/errors.hpp"

namespace waveguide {

// Closed-form Fourier coupling coefficients of the sine basis
// g_k = sqrt(2) sin(pi k y) and its cosine counterpart on (0,1):
//   beta12(k,r) = int_0^1 y * 2 sin(pi k y) cos(pi r y) dy
//   beta22(k,r) = int_0^1 y^2 * 2 cos(pi k y) cos(pi r y) dy
// beta11 vanishes identically and is not stored.

inline double beta12(int k, int r) {
    const double pi = std::numbers::pi;
    if (k == r) return -1.0 / (2.0 * pi * k);
    const double sign = ((k + r) % 2 == 0) ? 1.0 : -1.0;
    return sign * 2.0 * k /
           (pi * (static_cast<double>(r) * r - static_cast<double>(k) * k));
}

inline double beta22(int k, int r) {
    const double pi = std::numbers::pi;
    if (k == r) return 1.0 / 3.0 + 1.0 / (2.0 * pi * pi * k * k);
    const double sign = ((k + r) % 2 == 0) ? 1.0 : -1.0;
    const double k2 = static_cast<double>(k) * k, r2 = static_cast<double>(r) * r;
    return sign * 4.0 * (k2 + r2) / (pi * pi * (k2 - r2) * (k2 - r2));
}

// Precomputed table up to a mode count N. Tables are immutable, cached per N
// and shared, which keeps adaptive-N sweeps free of recomputation.
class BetaTable {
public:
    explicit BetaTable(int n_modes) : n_(n_modes), b12_(n_ * n_), b22_(n_ * n_) {
        if (n_modes < 1) throw ConfigError("BetaTable: n_modes must be >= 1");
        for (int k = 1; k <= n_; ++k)
            for (int r = 1; r <= n_; ++r) {
                b12_[idx(k, r)] = waveguide::beta12(k, r);
                b22_[idx(k, r)] = waveguide::beta22(k, r);
            }
    }

    int n_modes() const { return n_; }

    // 1-based mode indices, matching the transverse mode numbering.
    double beta12(int k, int r) const { return b12_[idx(k, r)]; }
    double beta22(int k, int r) const { return b22_[idx(k, r)]; }

    static const BetaTable& shared(int n_modes) {
        static std::mutex mu;
        static std::map<int, std::unique_ptr<BetaTable>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[n_modes];
        if (!slot) slot = std::make_unique<BetaTable>(n_modes);
        return *slot;
    }

private:
    std::size_t idx(int k, int r) const {
        return static_cast<std::size_t>(k - 1) * n_ + (r - 1);
    }

    int n_;
    std::vector<double> b12_, b22_;
};

} // namespace waveguide

#endif
