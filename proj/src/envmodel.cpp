#include "aoisim/envmodel.hpp"

#include <algorithm>
#include <cmath>

#include "aoisim/kernels.hpp"

namespace aoisim::envmodel {

using stochastic::DistSpec;

void ChannelModel::validate() const {
    if (num_channels == 0) throw stochastic::InvalidSpec("channel model: no channels");
    if (ctx_dim == 0 || feature_dim() > linalg::kMaxDim)
        throw stochastic::InvalidSpec("channel model: context dimension out of range");
    if (context_specs.size() != num_channels)
        throw stochastic::InvalidSpec("channel model: context spec rows != num_channels");
    for (const auto& row : context_specs) {
        if (row.size() != ctx_dim)
            throw stochastic::InvalidSpec("channel model: context spec row width != ctx_dim");
        for (const auto& s : row) s.validate();
    }
    if (const auto* lin = std::get_if<LinearTruth>(&truth)) {
        lin->noise.validate();
        if (lin->theta_true.dim() != feature_dim())
            throw stochastic::InvalidSpec("channel model: theta dimension != feature dimension");
    } else {
        const auto& nl = std::get<NonLinearSNRTruth>(truth);
        nl.snr_spec.validate();
        if (ctx_dim != 1)
            throw stochastic::InvalidSpec("nonlinear snr model: ctx_dim must be 1");
        for (const auto& row : context_specs) {
            if (row[0].support_min() < -nl.offset - 1e-12)
                throw stochastic::InvalidSpec(
                    "nonlinear snr model: snr support below -offset would push mu below 0");
        }
    }
}

SlotContext generate_slot(const ChannelModel& model, std::uint64_t t,
                          stochastic::RngStream& ctx_rng, stochastic::RngStream& noise_rng) {
    const std::size_t n_ch = model.num_channels;
    const std::size_t cd = model.ctx_dim;
    const std::size_t fd = model.feature_dim();

    SlotContext out;
    out.num_channels = n_ch;
    out.ctx_dim = cd;
    out.dim = fd;
    out.raw.resize(n_ch * cd);
    out.features.resize(n_ch * fd);
    out.mu_true.resize(n_ch);

    ctx_rng.begin_slot(t);
    noise_rng.begin_slot(t);

    for (std::size_t n = 0; n < n_ch; ++n) {
        for (std::size_t j = 0; j < cd; ++j) {
            out.raw[n * cd + j] = stochastic::sample(model.context_specs[n][j], ctx_rng);
        }
    }
    for (std::size_t n = 0; n < n_ch; ++n) {
        double* f = out.features.data() + n * fd;
        const double* r = out.raw.data() + n * cd;
        if (model.feature_map == FeatureMap::raw) {
            std::copy(r, r + cd, f);
        } else {
            f[0] = 1.0;
            std::copy(r, r + cd, f + 1);
        }
    }
    if (const auto* lin = std::get_if<LinearTruth>(&model.truth)) {
        for (std::size_t n = 0; n < n_ch; ++n) {
            const double eps = stochastic::sample(lin->noise, noise_rng);
            double mu = kernels::active().dot(out.feature_row(n), lin->theta_true.data(), fd) + eps;
            if (mu < 0.0 || mu > 1.0) {
                mu = std::clamp(mu, 0.0, 1.0);
                ++out.clamped;
            }
            out.mu_true[n] = mu;
        }
    } else {
        const auto& nl = std::get<NonLinearSNRTruth>(model.truth);
        for (std::size_t n = 0; n < n_ch; ++n) {
            const double snr = out.raw[n * cd];
            double mu = 1.0 - std::exp(-(snr + nl.offset));
            if (mu < 0.0 || mu > 1.0) {
                mu = std::clamp(mu, 0.0, 1.0);
                ++out.clamped;
            }
            out.mu_true[n] = mu;
        }
    }
    return out;
}

std::vector<int> top_by_value(const double* values, std::size_t n, std::size_t p) {
    std::vector<int> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return values[a] > values[b]; });
    idx.resize(std::min(p, n));
    return idx;
}

std::vector<int> best_channels(const SlotContext& ctx, std::size_t p) {
    return top_by_value(ctx.mu_true.data(), ctx.num_channels, p);
}

ChannelModel ChannelModel::table1() {
    ChannelModel m;
    m.num_channels = 5;
    m.ctx_dim = 3;
    m.feature_map = FeatureMap::raw;
    m.context_specs = {
        {DistSpec::impulse(0.4), DistSpec::impulse(0.8), DistSpec::impulse(0.2)},
        {DistSpec::uniform(0.0, 0.3), DistSpec::uniform(0.0, 2.5), DistSpec::uniform(0.0, 0.6)},
        {DistSpec::triangle(0.0, 0.3, 0.15), DistSpec::triangle(0.0, 2.4, 1.2),
         DistSpec::triangle(0.0, 0.6, 0.3)},
        {DistSpec::two_point(0.3, 0.4, 0.7, 0.2), DistSpec::two_point(0.3, 3.5, 0.7, 1.5),
         DistSpec::two_point(0.3, 0.3, 0.7, 0.4)},
        {DistSpec::scaled_beta(0.5, 3, 4), DistSpec::scaled_beta(3.0, 3, 4),
         DistSpec::scaled_beta(0.2, 3, 4)},
    };
    m.truth = LinearTruth{linalg::Vec{0.9, 0.1, 0.7}, DistSpec::uniform(-0.03, 0.03)};
    return m;
}

ChannelModel ChannelModel::nonlinear_snr() {
    ChannelModel m;
    m.num_channels = 5;
    m.ctx_dim = 1;
    m.feature_map = FeatureMap::affine_bias;
    m.context_specs.assign(5, {DistSpec::uniform(-2.0, 6.0)});
    m.truth = NonLinearSNRTruth{2.0, DistSpec::uniform(-2.0, 6.0)};
    return m;
}

ChannelModel ChannelModel::fixed_gap(double mu_hi, double mu_lo) {
    ChannelModel m;
    m.num_channels = 2;
    m.ctx_dim = 1;
    m.feature_map = FeatureMap::raw;
    m.context_specs = {{DistSpec::impulse(mu_hi)}, {DistSpec::impulse(mu_lo)}};
    m.truth = LinearTruth{linalg::Vec{1.0}, DistSpec::impulse(0.0)};
    return m;
}

}  // namespace aoisim::envmodel
