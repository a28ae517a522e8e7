#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "aoisim/linalg.hpp"
#include "aoisim/stochastic.hpp"

using namespace aoisim::linalg;
using aoisim::stochastic::Purpose;
using aoisim::stochastic::RngStream;

namespace {

// Test-local Gauss-Jordan oracle, independent of the library path it checks.
std::vector<std::vector<double>> gauss_jordan(std::vector<std::vector<double>> a) {
    const std::size_t d = a.size();
    std::vector<std::vector<double>> inv(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double scale = 1.0 / a[col][col];
        for (std::size_t j = 0; j < d; ++j) {
            a[col][j] *= scale;
            inv[col][j] *= scale;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (std::size_t j = 0; j < d; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

Vec random_vec(RngStream& rng, std::size_t d, double scale) {
    Vec x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = rng.uniform(-scale, scale);
    return x;
}

}  // namespace

TEST_CASE("rank_one_update identity examples") {
    const Mat eye = Mat::identity(3);
    const Mat upd = rank_one_update(eye, Vec{1.0, 0.0, 0.0});
    CHECK(upd.at(0, 0) == doctest::Approx(0.5));
    CHECK(upd.at(1, 1) == doctest::Approx(1.0));
    CHECK(upd.at(2, 2) == doctest::Approx(1.0));
    CHECK(upd.at(0, 1) == doctest::Approx(0.0));

    const Mat noop = rank_one_update(eye, Vec{0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(noop.at(i, j) == doctest::Approx(eye.at(i, j)));
        }
    }

    CHECK_THROWS_AS(rank_one_update(eye, Vec{1.0, std::nan(""), 0.0}), std::invalid_argument);
}

TEST_CASE("sherman-morrison chain matches the Gauss-Jordan oracle: 20 updates") {
    RngStream rng(7, 0, Purpose::policy, 1);
    const std::size_t d = 3;
    Mat a = Mat::identity(d);
    Mat a_inv = Mat::identity(d);
    for (int i = 0; i < 20; ++i) {
        const Vec x = random_vec(rng, d, 1.5);
        add_outer(a, x, 1.0);
        a_inv = rank_one_update(a_inv, x);
    }
    std::vector<std::vector<double>> rows(d, std::vector<double>(d));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) rows[i][j] = a.at(i, j);
    }
    const auto oracle = gauss_jordan(rows);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            CHECK(std::abs(a_inv.at(i, j) - oracle[i][j]) < 1e-10);
        }
    }
}

TEST_CASE("sherman-morrison chain stays within 1e-8 over 1e4 bounded updates") {
    for (std::size_t d : {3u, 8u}) {
        RngStream rng(11, d, Purpose::policy, 2);
        Mat a = Mat::identity(d);
        Mat a_inv = Mat::identity(d);
        for (int i = 0; i < 10000; ++i) {
            // entries in [-2,2]: norm stays well under the contract bound of 10
            const Vec x = random_vec(rng, d, 2.0);
            add_outer(a, x, 1.0);
            a_inv = rank_one_update(a_inv, x);
        }
        std::vector<std::vector<double>> rows(d, std::vector<double>(d));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) rows[i][j] = a.at(i, j);
        }
        const auto oracle = gauss_jordan(rows);
        double worst = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                worst = std::max(worst, std::abs(a_inv.at(i, j) - oracle[i][j]));
            }
        }
        CHECK(worst < 1e-8);
        // SPD preserved on both sides of the pair
        CHECK_NOTHROW(cholesky_lower(a));
        CHECK_NOTHROW(cholesky_lower(a_inv));
    }
}

TEST_CASE("cholesky examples and reconstruction") {
    const Mat eye_l = cholesky_lower(Mat::identity(3));
    for (std::size_t i = 0; i < 3; ++i) CHECK(eye_l.at(i, i) == doctest::Approx(1.0));

    Mat diag(3);
    diag.at(0, 0) = 4.0;
    diag.at(1, 1) = 9.0;
    diag.at(2, 2) = 16.0;
    const Mat l = cholesky_lower(diag);
    CHECK(l.at(0, 0) == doctest::Approx(2.0));
    CHECK(l.at(1, 1) == doctest::Approx(3.0));
    CHECK(l.at(2, 2) == doctest::Approx(4.0));
    CHECK(l.at(1, 0) == doctest::Approx(0.0));

    // random SPD A = M M^T + I reconstructs through its factor
    RngStream rng(13, 0, Purpose::policy, 3);
    const std::size_t d = 5;
    Mat spd = Mat::identity(d);
    for (std::size_t r = 0; r < d; ++r) {
        const Vec x = random_vec(rng, d, 1.0);
        add_outer(spd, x, 1.0);
    }
    const Mat f = cholesky_lower(spd);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double rebuilt = 0.0;
            for (std::size_t k = 0; k < d; ++k) rebuilt += f.at(i, k) * f.at(j, k);
            CHECK(std::abs(rebuilt - spd.at(i, j)) < 1e-10);
        }
    }

    Mat not_pd(2);
    not_pd.at(0, 0) = 1.0;
    not_pd.at(0, 1) = 2.0;
    not_pd.at(1, 0) = 2.0;
    not_pd.at(1, 1) = 1.0;  // eigenvalues 3 and -1
    CHECK_THROWS_AS(cholesky_lower(not_pd), NotPositiveDefinite);
}

TEST_CASE("solve_theta examples") {
    CHECK(solve_theta(Mat::identity(3), Vec{0.9, 0.1, 0.7})[0] == doctest::Approx(0.9));
    CHECK(solve_theta(Mat::identity(3), Vec{0.9, 0.1, 0.7})[2] == doctest::Approx(0.7));

    Mat half = Mat::identity(3);
    half.at(0, 0) = 0.5;
    const Vec th = solve_theta(half, Vec{2.0, 0.0, 0.0});
    CHECK(th[0] == doctest::Approx(1.0));
    CHECK(th[1] == doctest::Approx(0.0));
}

TEST_CASE("solve_theta inverts matvec within 1e-9") {
    RngStream rng(17, 0, Purpose::policy, 4);
    const std::size_t d = 6;
    Mat a = Mat::identity(d);
    for (int i = 0; i < 30; ++i) add_outer(a, random_vec(rng, d, 1.0), 1.0);
    const Mat a_inv = invert(a);
    for (int rep = 0; rep < 10; ++rep) {
        const Vec y = random_vec(rng, d, 2.0);
        const Vec ay = matvec(a, y);
        const Vec back = solve_theta(a_inv, ay);
        for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(back[i] - y[i]) < 1e-9);
    }
}

TEST_CASE("regression consistency on synthetic linear data") {
    // 1000 updates of y = theta . x + U(-0.03, 0.03) keep the ridge
    // estimate within 0.05 of theta = (0.9, 0.1, 0.7)
    RngStream rng(19, 0, Purpose::policy, 5);
    const Vec theta{0.9, 0.1, 0.7};
    Mat a = Mat::identity(3);
    Vec b(3);
    for (int i = 0; i < 1000; ++i) {
        const Vec x = random_vec(rng, 3, 1.0);
        const double y = dot(theta, x) + rng.uniform(-0.03, 0.03);
        add_outer(a, x, 1.0);
        for (std::size_t j = 0; j < 3; ++j) b[j] += x[j] * y;
    }
    const Vec est = solve_theta(invert(a), b);
    double err2 = 0.0;
    for (std::size_t j = 0; j < 3; ++j) err2 += (est[j] - theta[j]) * (est[j] - theta[j]);
    CHECK(std::sqrt(err2) < 0.05);
}
