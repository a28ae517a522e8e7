#include "aoisim/kernels.hpp"

namespace aoisim::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void matvec_scalar(const double* m, const double* x, double* y, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) y[i] = dot_scalar(m + i * d, x, d);
}

double quad_form_scalar(const double* m, const double* x, std::size_t d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += x[i] * dot_scalar(m + i * d, x, d);
    return acc;
}

void rank1_sym_scalar(double* m, const double* x, double scale, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        const double s = scale * x[i];
        double* row = m + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] += s * x[j];
    }
}

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", dot_scalar, matvec_scalar, quad_form_scalar,
                         rank1_sym_scalar, axpy_scalar};
    return ops;
}

}  // namespace aoisim::kernels
