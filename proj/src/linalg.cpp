#include "aoisim/linalg.hpp"

#include <cmath>
#include <cstdlib>

#include "aoisim/kernels.hpp"

namespace aoisim::linalg {

namespace {
void require_dim(std::size_t d) {
    if (d == 0 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
}
}  // namespace

Vec::Vec(std::size_t d, double fill) : d_(d) {
    require_dim(d);
    e_.fill(0.0);
    for (std::size_t i = 0; i < d_; ++i) e_[i] = fill;
}

Vec::Vec(std::initializer_list<double> xs) : d_(xs.size()) {
    require_dim(d_);
    std::size_t i = 0;
    for (double x : xs) e_[i++] = x;
}

Mat::Mat(std::size_t d, double fill) : d_(d) {
    require_dim(d);
    e_.fill(0.0);
    for (std::size_t i = 0; i < d_ * d_; ++i) e_[i] = fill;
}

Mat Mat::identity(std::size_t d) {
    Mat m(d);
    for (std::size_t i = 0; i < d; ++i) m.at(i, i) = 1.0;
    return m;
}

double dot(const Vec& a, const Vec& b) {
    return kernels::active().dot(a.data(), b.data(), a.dim());
}

Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.dim());
    kernels::active().matvec(m.data(), x.data(), y.data(), m.dim());
    return y;
}

double quad_form(const Mat& m, const Vec& x) {
    return kernels::active().quad_form(m.data(), x.data(), m.dim());
}

void add_outer(Mat& m, const Vec& x, double scale) {
    kernels::active().rank1_sym(m.data(), x.data(), scale, m.dim());
}

Mat rank_one_update(const Mat& a_inv, const Vec& x) {
    const std::size_t d = a_inv.dim();
    for (std::size_t i = 0; i < d; ++i) {
        if (!std::isfinite(x[i])) throw std::invalid_argument("rank_one_update: non-finite entry");
    }
    // u = A^{-1} x; result = A^{-1} - u u^T / (1 + x^T u).
    const Vec u = matvec(a_inv, x);
    const double denom = 1.0 + dot(x, u);
    Mat out = a_inv;
    add_outer(out, u, -1.0 / denom);
    return out;
}

Mat cholesky_lower(const Mat& a) {
    const std::size_t d = a.dim();
    Mat l(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
            if (i == j) {
                if (s <= 1e-14) throw NotPositiveDefinite("cholesky_lower: pivot <= 1e-14");
                l.at(i, i) = std::sqrt(s);
            } else {
                l.at(i, j) = s / l.at(j, j);
            }
        }
    }
    return l;
}

Vec solve_theta(const Mat& a_inv, const Vec& b) { return matvec(a_inv, b); }

Mat invert(const Mat& a) {
    const std::size_t d = a.dim();
    Mat work = a;
    Mat out = Mat::identity(d);
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r) {
            if (std::abs(work.at(r, col)) > std::abs(work.at(piv, col))) piv = r;
        }
        if (std::abs(work.at(piv, col)) < 1e-300) throw std::domain_error("invert: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < d; ++j) {
                std::swap(work.at(piv, j), work.at(col, j));
                std::swap(out.at(piv, j), out.at(col, j));
            }
        }
        const double inv_p = 1.0 / work.at(col, col);
        for (std::size_t j = 0; j < d; ++j) {
            work.at(col, j) *= inv_p;
            out.at(col, j) *= inv_p;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = work.at(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j) {
                work.at(r, j) -= f * work.at(col, j);
                out.at(r, j) -= f * out.at(col, j);
            }
        }
    }
    return out;
}

}  // namespace aoisim::linalg
