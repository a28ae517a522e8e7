#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>

namespace aoisim::linalg {

// Dimensions are a run-time configuration bounded by kMaxDim; storage is
// inline so Vec/Mat are plain values, cheap to copy and safe to move
// between threads.
inline constexpr std::size_t kMaxDim = 16;

class Vec {
  public:
    Vec() = default;
    explicit Vec(std::size_t d, double fill = 0.0);
    Vec(std::initializer_list<double> xs);

    std::size_t dim() const { return d_; }
    double operator[](std::size_t i) const { return e_[i]; }
    double& operator[](std::size_t i) { return e_[i]; }
    const double* data() const { return e_.data(); }
    double* data() { return e_.data(); }

  private:
    std::array<double, kMaxDim> e_{};
    std::size_t d_ = 0;
};

// Row-major square matrix.
class Mat {
  public:
    Mat() = default;
    explicit Mat(std::size_t d, double fill = 0.0);
    static Mat identity(std::size_t d);

    std::size_t dim() const { return d_; }
    double at(std::size_t i, std::size_t j) const { return e_[i * d_ + j]; }
    double& at(std::size_t i, std::size_t j) { return e_[i * d_ + j]; }
    const double* data() const { return e_.data(); }
    double* data() { return e_.data(); }
    const double* row(std::size_t i) const { return e_.data() + i * d_; }

  private:
    std::array<double, kMaxDim * kMaxDim> e_{};
    std::size_t d_ = 0;
};

struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double dot(const Vec& a, const Vec& b);
Vec matvec(const Mat& m, const Vec& x);
double quad_form(const Mat& m, const Vec& x);         // x^T M x
void add_outer(Mat& m, const Vec& x, double scale);   // M += scale * x x^T

// (A + x x^T)^{-1} from A^{-1} by the Sherman-Morrison identity. Rejects
// non-finite x entries (contract violation, std::invalid_argument).
Mat rank_one_update(const Mat& a_inv, const Vec& x);

// Lower-triangular L with L L^T = A; throws NotPositiveDefinite when a
// pivot falls at or below 1e-14.
Mat cholesky_lower(const Mat& a);

// theta = A^{-1} b for an inverse maintained by rank_one_update.
Vec solve_theta(const Mat& a_inv, const Vec& b);

// Direct Gauss-Jordan inverse with partial pivoting; used to refresh a
// long Sherman-Morrison chain. Throws std::domain_error on singular input.
Mat invert(const Mat& a);

}  // namespace aoisim::linalg
