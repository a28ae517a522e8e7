#pragma once

#include <cstddef>
#include <string_view>

namespace aoisim::kernels {

// Function table for the dense inner loops of the bandit estimator.
// Matrices are row-major squares of runtime dimension d (d <= 16 in this
// project). Two backends implement the same table: a scalar reference and
// an AVX2 variant selected at runtime. Backends may differ in summation
// order, so cross-backend comparisons are tolerance-based, never bitwise.
struct Ops {
    const char* name;
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y = M x
    void (*matvec)(const double* m, const double* x, double* y, std::size_t d);
    // x^T M x
    double (*quad_form)(const double* m, const double* x, std::size_t d);
    // M += scale * x x^T
    void (*rank1_sym)(double* m, const double* x, double scale, std::size_t d);
    // y += a * x
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
};

const Ops& scalar_ops();

// Null when the build or the CPU lacks AVX2.
const Ops* avx2_ops();

// Backend used by linalg. Defaults to the widest supported one.
const Ops& active();

// "auto" | "scalar" | "avx2"; returns false (and leaves the backend
// unchanged) if the name is unknown or unsupported on this CPU.
bool select_backend(std::string_view name);

}  // namespace aoisim::kernels
