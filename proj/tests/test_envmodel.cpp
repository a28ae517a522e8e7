#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "aoisim/envmodel.hpp"

using namespace aoisim::envmodel;
using aoisim::stochastic::DistSpec;
using aoisim::stochastic::Purpose;
using aoisim::stochastic::RngStream;

namespace {

ChannelModel impulse_linear_model() {
    // channel 1 of the table preset with zero noise: mu is exactly 0.58
    ChannelModel m;
    m.num_channels = 1;
    m.ctx_dim = 3;
    m.context_specs = {{DistSpec::impulse(0.4), DistSpec::impulse(0.8), DistSpec::impulse(0.2)}};
    m.truth = LinearTruth{aoisim::linalg::Vec{0.9, 0.1, 0.7}, DistSpec::impulse(0.0)};
    return m;
}

}  // namespace

TEST_CASE("linear mu from impulse contexts") {
    const auto model = impulse_linear_model();
    model.validate();
    RngStream ctx(1, 0, Purpose::contexts), noise(1, 0, Purpose::noise);
    const SlotContext sc = generate_slot(model, 1, ctx, noise);
    CHECK(sc.mu_true[0] == doctest::Approx(0.58));
    CHECK(sc.raw[0] == 0.4);
    CHECK(sc.features[1] == 0.8);
    CHECK(sc.clamped == 0);
}

TEST_CASE("nonlinear snr boundary values") {
    ChannelModel m;
    m.num_channels = 1;
    m.ctx_dim = 1;
    m.feature_map = FeatureMap::affine_bias;
    m.context_specs = {{DistSpec::impulse(-2.0)}};
    m.truth = NonLinearSNRTruth{2.0, DistSpec::uniform(-2.0, 6.0)};
    m.validate();
    RngStream ctx(1, 0, Purpose::contexts), noise(1, 0, Purpose::noise);
    SlotContext sc = generate_slot(m, 1, ctx, noise);
    CHECK(sc.mu_true[0] == doctest::Approx(0.0));  // gamma = -2 -> 1 - exp(0)
    CHECK(sc.features[0] == 1.0);                  // affine bias feature
    CHECK(sc.features[1] == -2.0);

    m.context_specs = {{DistSpec::impulse(6.0)}};
    sc = generate_slot(m, 1, ctx, noise);
    CHECK(sc.mu_true[0] == doctest::Approx(1.0 - std::exp(-8.0)));
}

TEST_CASE("nonlinear snr mu stays in [0, 1-e^-8] for gamma ~ U(-2,6)") {
    const auto m = ChannelModel::nonlinear_snr();
    m.validate();
    RngStream ctx(5, 0, Purpose::contexts), noise(5, 0, Purpose::noise);
    const double hi = 1.0 - std::exp(-8.0);
    int clamped = 0;
    for (std::uint64_t t = 1; t <= 20000; ++t) {
        const SlotContext sc = generate_slot(m, t, ctx, noise);
        for (double mu : sc.mu_true) {
            CHECK(mu >= 0.0);
            CHECK(mu <= hi);
        }
        clamped += sc.clamped;
    }
    CHECK(clamped == 0);
}

TEST_CASE("nonlinear snr support validation") {
    ChannelModel m;
    m.num_channels = 1;
    m.ctx_dim = 1;
    m.context_specs = {{DistSpec::uniform(-3.0, 6.0)}};  // gamma below -offset
    m.truth = NonLinearSNRTruth{2.0, DistSpec::uniform(-3.0, 6.0)};
    CHECK_THROWS_AS(m.validate(), aoisim::stochastic::InvalidSpec);
}

TEST_CASE("best_channels selection and tie rule") {
    SlotContext sc;
    sc.num_channels = 5;
    sc.mu_true = {0.2, 0.9, 0.5, 0.9, 0.1};
    CHECK(best_channels(sc, 1) == std::vector<int>{1});

    sc.num_channels = 3;
    sc.mu_true = {0.9, 0.9, 0.5};
    CHECK(best_channels(sc, 2) == std::vector<int>{0, 1});
}

TEST_CASE("best_channels equals the full-sort oracle") {
    RngStream rng(3, 0, Purpose::contexts);
    for (int rep = 0; rep < 200; ++rep) {
        SlotContext sc;
        sc.num_channels = 7;
        sc.mu_true.resize(7);
        for (auto& mu : sc.mu_true) mu = rng.uniform();
        const std::size_t p = 1 + static_cast<std::size_t>(rng.uniform() * 6.0);

        std::vector<int> oracle(7);
        for (int i = 0; i < 7; ++i) oracle[i] = i;
        std::sort(oracle.begin(), oracle.end(), [&](int a, int b) {
            if (sc.mu_true[a] != sc.mu_true[b]) return sc.mu_true[a] > sc.mu_true[b];
            return a < b;
        });
        oracle.resize(std::min<std::size_t>(p, 7));
        CHECK(best_channels(sc, p) == oracle);
    }
}

TEST_CASE("linear mu average matches analytic expectation without clamping") {
    // contexts bounded so theta.x + noise stays inside [0,1]: no clamping,
    // so the slot average converges to E[phi(b)] . theta
    ChannelModel m;
    m.num_channels = 2;
    m.ctx_dim = 3;
    m.context_specs = {
        {DistSpec::uniform(0.1, 0.3), DistSpec::uniform(0.1, 0.3), DistSpec::uniform(0.1, 0.3)},
        {DistSpec::triangle(0.1, 0.3, 0.2), DistSpec::impulse(0.2), DistSpec::uniform(0.1, 0.6)},
    };
    m.truth = LinearTruth{aoisim::linalg::Vec{0.9, 0.1, 0.7}, DistSpec::uniform(-0.03, 0.03)};
    m.validate();

    RngStream ctx(11, 0, Purpose::contexts), noise(11, 0, Purpose::noise);
    double acc[2] = {0.0, 0.0};
    int clamped = 0;
    const int n = 100000;
    for (int t = 1; t <= n; ++t) {
        const SlotContext sc = generate_slot(m, static_cast<std::uint64_t>(t), ctx, noise);
        acc[0] += sc.mu_true[0];
        acc[1] += sc.mu_true[1];
        clamped += sc.clamped;
    }
    CHECK(clamped == 0);
    const double want0 = 0.2 * (0.9 + 0.1 + 0.7);
    const double want1 = 0.9 * 0.2 + 0.1 * 0.2 + 0.7 * 0.35;
    CHECK(std::abs(acc[0] / n - want0) / want0 < 0.01);
    CHECK(std::abs(acc[1] / n - want1) / want1 < 0.01);
}

TEST_CASE("table1 preset clamp activity is observable, not assumed zero") {
    const auto m = ChannelModel::table1();
    m.validate();
    RngStream ctx(13, 0, Purpose::contexts), noise(13, 0, Purpose::noise);
    long long clamped = 0, total = 0;
    for (std::uint64_t t = 1; t <= 20000; ++t) {
        const SlotContext sc = generate_slot(m, t, ctx, noise);
        clamped += sc.clamped;
        total += static_cast<long long>(sc.num_channels);
        for (double mu : sc.mu_true) {
            CHECK(mu >= 0.0);
            CHECK(mu <= 1.0);
        }
    }
    MESSAGE("table1 clamp fraction: ", static_cast<double>(clamped) / static_cast<double>(total));
    CHECK(total == 100000);
}

TEST_CASE("model validation catches inconsistent shapes") {
    ChannelModel m = ChannelModel::table1();
    m.num_channels = 4;  // five spec rows
    CHECK_THROWS_AS(m.validate(), aoisim::stochastic::InvalidSpec);

    ChannelModel bad_theta = ChannelModel::table1();
    bad_theta.truth = LinearTruth{aoisim::linalg::Vec{0.9, 0.1}, DistSpec::impulse(0.0)};
    CHECK_THROWS_AS(bad_theta.validate(), aoisim::stochastic::InvalidSpec);
}
