#ifndef WAVEGUIDE_MATRIX_HPP
#define WAVEGUIDE_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "waveguide/errors.hpp"

namespace waveguide {

using cdouble = std::complex<double>;

// Dense row-major complex matrix. Systems here are small (at most a few
// hundred rows), so contiguous storage plus straightforward kernels is all
// that is needed.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(int rows, int cols)
        : rows_(rows), cols_(cols),
          data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {}

    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cdouble& operator()(int i, int j) { return data_[idx(i, j)]; }
    const cdouble& operator()(int i, int j) const { return data_[idx(i, j)]; }

    cdouble* row(int i) { return data_.data() + idx(i, 0); }
    const cdouble* row(int i) const { return data_.data() + idx(i, 0); }

    cdouble* data() { return data_.data(); }
    const cdouble* data() const { return data_.data(); }

    void fill(cdouble v) { std::fill(data_.begin(), data_.end(), v); }
    void resize(int rows, int cols) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(static_cast<std::size_t>(rows) * cols, cdouble(0.0));
    }

    double max_abs() const {
        double m = 0.0;
        for (const cdouble& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * cols_ + j;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<cdouble> data_;
};

// out = a * b. out must not alias a or b.
inline void matmul(const CMatrix& a, const CMatrix& b, CMatrix& out) {
    const int n = a.rows(), k = a.cols(), m = b.cols();
    out.resize(n, m);
    for (int i = 0; i < n; ++i) {
        cdouble* ci = out.row(i);
        const cdouble* ai = a.row(i);
        for (int l = 0; l < k; ++l) {
            const cdouble alv = ai[l];
            const cdouble* bl = b.row(l);
            for (int j = 0; j < m; ++j) ci[j] += alv * bl[j];
        }
    }
}

inline CMatrix matmul(const CMatrix& a, const CMatrix& b) {
    CMatrix out;
    matmul(a, b, out);
    return out;
}

// out = a * conj(b)^T, i.e. entries sum_l a(i,l) * conj(b(j,l)).
inline void matmul_conjt(const CMatrix& a, const CMatrix& b, CMatrix& out) {
    const int n = a.rows(), k = a.cols(), m = b.rows();
    out.resize(n, m);
    for (int i = 0; i < n; ++i) {
        const cdouble* ai = a.row(i);
        cdouble* ci = out.row(i);
        for (int j = 0; j < m; ++j) {
            const cdouble* bj = b.row(j);
            cdouble s = 0.0;
            for (int l = 0; l < k; ++l) s += ai[l] * std::conj(bj[l]);
            ci[j] = s;
        }
    }
}

inline CMatrix conj_transpose(const CMatrix& a) {
    CMatrix out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

// Determinant by LU with partial pivoting; the copy is intentional.
inline cdouble det_lu(CMatrix m) {
    const int n = m.rows();
    cdouble det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(m(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(m(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(col, j));
            det = -det;
        }
        const cdouble d = m(col, col);
        det *= d;
        const cdouble inv = 1.0 / d;
        for (int r = col + 1; r < n; ++r) {
            const cdouble f = m(r, col) * inv;
            if (f == cdouble(0.0)) continue;
            m(r, col) = f;
            for (int j = col + 1; j < n; ++j) m(r, j) -= f * m(col, j);
        }
    }
    return det;
}

// Solves a * x = rhs in place (rhs becomes x). a is destroyed.
inline void solve_lu_inplace(CMatrix& a, CMatrix& rhs) {
    const int n = a.rows();
    const int m = rhs.cols();
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(a(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw SingularSystemError("singular matrix in solve_lu");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
            for (int j = 0; j < m; ++j) std::swap(rhs(piv, j), rhs(col, j));
        }
        const cdouble inv = 1.0 / a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const cdouble f = a(r, col) * inv;
            if (f == cdouble(0.0)) continue;
            for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
            for (int j = 0; j < m; ++j) rhs(r, j) -= f * rhs(col, j);
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        const cdouble inv = 1.0 / a(i, i);
        for (int j = 0; j < m; ++j) {
            cdouble s = rhs(i, j);
            for (int l = i + 1; l < n; ++l) s -= a(i, l) * rhs(l, j);
            rhs(i, j) = s * inv;
        }
    }
}

// Modified Gram-Schmidt on the rows, two passes for orthogonality at machine
// level. Returns false when a row collapses (rank deficiency). When
// log_norm_sum is given, the sum of log row norms is accumulated into it;
// the triangular factor applied to the rows then has log-determinant equal
// to minus that sum.
inline bool mgs_rows(CMatrix& m, double rank_tol = 1e-12,
                     double* log_norm_sum = nullptr) {
    const int n = m.rows(), c = m.cols();
    for (int i = 0; i < n; ++i) {
        cdouble* ri = m.row(i);
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < i; ++j) {
                const cdouble* rj = m.row(j);
                cdouble proj = 0.0;
                for (int l = 0; l < c; ++l) proj += std::conj(rj[l]) * ri[l];
                for (int l = 0; l < c; ++l) ri[l] -= proj * rj[l];
            }
        }
        double nrm2 = 0.0;
        for (int l = 0; l < c; ++l) nrm2 += std::norm(ri[l]);
        const double nrm = std::sqrt(nrm2);
        if (nrm < rank_tol) return false;
        if (log_norm_sum) *log_norm_sum += std::log(nrm);
        const double inv = 1.0 / nrm;
        for (int l = 0; l < c; ++l) ri[l] *= inv;
    }
    return true;
}

// max |m m^* - I|, the row-orthonormality defect.
inline double gram_defect(const CMatrix& m) {
    double worst = 0.0;
    const int n = m.rows(), c = m.cols();
    for (int i = 0; i < n; ++i) {
        const cdouble* ri = m.row(i);
        for (int j = i; j < n; ++j) {
            const cdouble* rj = m.row(j);
            cdouble s = 0.0;
            for (int l = 0; l < c; ++l) s += ri[l] * std::conj(rj[l]);
            if (i == j) s -= 1.0;
            worst = std::max(worst, std::abs(s));
        }
    }
    return worst;
}

} // namespace waveguide

#endif
