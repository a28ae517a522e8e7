#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "aoisim/kernels.hpp"
#include "aoisim/stochastic.hpp"

using aoisim::kernels::Ops;
using aoisim::stochastic::Purpose;
using aoisim::stochastic::RngStream;

namespace {

std::vector<double> random_vec(RngStream& rng, std::size_t n, double lo = -3.0, double hi = 3.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("scalar kernels match straightforward math") {
    const auto& ops = aoisim::kernels::scalar_ops();
    const double a[3] = {1.0, 2.0, 3.0};
    const double b[3] = {4.0, -5.0, 6.0};
    CHECK(ops.dot(a, b, 3) == doctest::Approx(1 * 4 - 2 * 5 + 3 * 6));

    // quad_form on the identity is the squared norm
    const double eye[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    CHECK(ops.quad_form(eye, a, 3) == doctest::Approx(14.0));

    double m[4] = {0, 0, 0, 0};
    const double x[2] = {2.0, -1.0};
    ops.rank1_sym(m, x, 0.5, 2);
    CHECK(m[0] == doctest::Approx(2.0));
    CHECK(m[1] == doctest::Approx(-1.0));
    CHECK(m[2] == doctest::Approx(-1.0));
    CHECK(m[3] == doctest::Approx(0.5));

    double y[3] = {1, 1, 1};
    ops.axpy(y, 2.0, a, 3);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[2] == doctest::Approx(7.0));
}

TEST_CASE("avx2 backend agrees with the scalar reference") {
    const Ops* avx2 = aoisim::kernels::avx2_ops();
    if (!avx2) {
        MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
        return;
    }
    const auto& ref = aoisim::kernels::scalar_ops();
    RngStream rng(99, 0, Purpose::policy, 0);
    for (std::size_t d = 1; d <= 16; ++d) {
        for (int rep = 0; rep < 20; ++rep) {
            const auto a = random_vec(rng, d);
            const auto b = random_vec(rng, d);
            const auto m = random_vec(rng, d * d);

            const double want_dot = ref.dot(a.data(), b.data(), d);
            CHECK(avx2->dot(a.data(), b.data(), d) == doctest::Approx(want_dot).epsilon(1e-12));

            std::vector<double> y_ref(d), y_avx(d);
            ref.matvec(m.data(), a.data(), y_ref.data(), d);
            avx2->matvec(m.data(), a.data(), y_avx.data(), d);
            for (std::size_t i = 0; i < d; ++i) {
                CHECK(y_avx[i] == doctest::Approx(y_ref[i]).epsilon(1e-12));
            }

            CHECK(avx2->quad_form(m.data(), a.data(), d) ==
                  doctest::Approx(ref.quad_form(m.data(), a.data(), d)).epsilon(1e-12));

            std::vector<double> m_ref = m, m_avx = m;
            ref.rank1_sym(m_ref.data(), a.data(), -0.7, d);
            avx2->rank1_sym(m_avx.data(), a.data(), -0.7, d);
            for (std::size_t i = 0; i < d * d; ++i) {
                CHECK(m_avx[i] == doctest::Approx(m_ref[i]).epsilon(1e-12));
            }

            std::vector<double> ya = a, yb = a;
            ref.axpy(ya.data(), 1.3, b.data(), d);
            avx2->axpy(yb.data(), 1.3, b.data(), d);
            for (std::size_t i = 0; i < d; ++i) {
                CHECK(yb[i] == doctest::Approx(ya[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("backend selection") {
    CHECK(aoisim::kernels::select_backend("scalar"));
    CHECK(std::string(aoisim::kernels::active().name) == "scalar");
    CHECK_FALSE(aoisim::kernels::select_backend("neon"));
    CHECK(std::string(aoisim::kernels::active().name) == "scalar");
    CHECK(aoisim::kernels::select_backend("auto"));
    if (aoisim::kernels::avx2_ops()) {
        CHECK(std::string(aoisim::kernels::active().name) == "avx2");
        CHECK(aoisim::kernels::select_backend("avx2"));
    }
    aoisim::kernels::select_backend("auto");
}
