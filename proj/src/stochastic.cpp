#include "aoisim/stochastic.hpp"

#include <cmath>

namespace aoisim::stochastic {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t fmix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
    return fmix64(h + kGamma + v);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t round, Purpose purpose,
                     std::uint64_t subkey) {
    std::uint64_t h = fmix64(master_seed ^ 0x6a09e667f3bcc908ULL);
    h = combine(h, round);
    h = combine(h, static_cast<std::uint64_t>(purpose));
    h = combine(h, subkey);
    key_ = h;
    begin_slot(0);
}

void RngStream::begin_slot(std::uint64_t t) { state_ = combine(key_, fmix64(t)); }

std::uint64_t RngStream::next_u64() {
    state_ += kGamma;
    return fmix64(state_);
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double a, double b) { return a + (b - a) * uniform(); }

double RngStream::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));  // u1 < 1, so 1-u1 > 0
    return r * std::cos(kTwoPi * u2);
}

double coupling_uniform(std::uint64_t t, RngStream& coupling) {
    coupling.begin_slot(t);
    return coupling.uniform();
}

int bernoulli(double p, RngStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec("bernoulli: p outside [0,1]");
    return rng.uniform() < p ? 1 : 0;
}

DistSpec DistSpec::impulse(double a) {
    DistSpec s;
    s.kind = Kind::impulse;
    s.a = a;
    return s;
}

DistSpec DistSpec::uniform(double a, double b) {
    DistSpec s;
    s.kind = Kind::uniform;
    s.a = a;
    s.b = b;
    return s;
}

DistSpec DistSpec::triangle(double a, double b, double c) {
    DistSpec s;
    s.kind = Kind::triangle;
    s.a = a;
    s.b = b;
    s.c = c;
    return s;
}

DistSpec DistSpec::two_point(double p1, double a1, double p2, double a2) {
    DistSpec s;
    s.kind = Kind::two_point;
    s.p1 = p1;
    s.a1 = a1;
    s.p2 = p2;
    s.a2 = a2;
    return s;
}

DistSpec DistSpec::scaled_beta(double k, double alpha, double beta) {
    DistSpec s;
    s.kind = Kind::scaled_beta;
    s.k = k;
    s.alpha = alpha;
    s.beta = beta;
    return s;
}

namespace {
bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9; }
}  // namespace

void DistSpec::validate() const {
    switch (kind) {
        case Kind::impulse:
            if (!std::isfinite(a)) throw InvalidSpec("impulse: value must be finite");
            return;
        case Kind::uniform:
            if (!(a < b)) throw InvalidSpec("uniform: requires a < b");
            return;
        case Kind::triangle:
            if (!(a < b)) throw InvalidSpec("triangle: requires a < b");
            if (!(a <= c && c <= b)) throw InvalidSpec("triangle: requires a <= c <= b");
            return;
        case Kind::two_point:
            if (p1 < 0.0 || p2 < 0.0) throw InvalidSpec("two_point: probabilities must be >= 0");
            if (std::abs(p1 + p2 - 1.0) > 1e-9) throw InvalidSpec("two_point: p1 + p2 must equal 1");
            return;
        case Kind::scaled_beta:
            if (!(k > 0.0)) throw InvalidSpec("scaled_beta: requires k > 0");
            if (!(alpha > 0.0) || !(beta > 0.0))
                throw InvalidSpec("scaled_beta: requires alpha, beta > 0");
            if (!near_integer(alpha) || !near_integer(beta))
                throw InvalidSpec("scaled_beta: integer shapes required by the exponential-sum sampler");
            return;
    }
    throw InvalidSpec("unknown distribution kind");
}

double DistSpec::mean() const {
    switch (kind) {
        case Kind::impulse: return a;
        case Kind::uniform: return 0.5 * (a + b);
        case Kind::triangle: return (a + b + c) / 3.0;
        case Kind::two_point: return p1 * a1 + p2 * a2;
        case Kind::scaled_beta: return k * alpha / (alpha + beta);
    }
    return 0.0;
}

double DistSpec::variance() const {
    switch (kind) {
        case Kind::impulse: return 0.0;
        case Kind::uniform: return (b - a) * (b - a) / 12.0;
        case Kind::triangle:
            return (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0;
        case Kind::two_point: {
            const double m = mean();
            return p1 * a1 * a1 + p2 * a2 * a2 - m * m;
        }
        case Kind::scaled_beta: {
            const double s = alpha + beta;
            return k * k * alpha * beta / (s * s * (s + 1.0));
        }
    }
    return 0.0;
}

double DistSpec::support_min() const {
    switch (kind) {
        case Kind::impulse: return a;
        case Kind::uniform: return a;
        case Kind::triangle: return a;
        case Kind::two_point: return a1 < a2 ? a1 : a2;
        case Kind::scaled_beta: return 0.0;
    }
    return 0.0;
}

double DistSpec::support_max() const {
    switch (kind) {
        case Kind::impulse: return a;
        case Kind::uniform: return b;
        case Kind::triangle: return b;
        case Kind::two_point: return a1 > a2 ? a1 : a2;
        case Kind::scaled_beta: return k;
    }
    return 0.0;
}

std::string DistSpec::describe() const {
    switch (kind) {
        case Kind::impulse: return "impulse(" + std::to_string(a) + ")";
        case Kind::uniform: return "uniform(" + std::to_string(a) + "," + std::to_string(b) + ")";
        case Kind::triangle:
            return "triangle(" + std::to_string(a) + "," + std::to_string(b) + "," +
                   std::to_string(c) + ")";
        case Kind::two_point:
            return "two_point(" + std::to_string(p1) + ":" + std::to_string(a1) + "," +
                   std::to_string(p2) + ":" + std::to_string(a2) + ")";
        case Kind::scaled_beta:
            return "scaled_beta(" + std::to_string(k) + ",B(" + std::to_string(alpha) + "," +
                   std::to_string(beta) + "))";
    }
    return "?";
}

namespace {

// Gamma with integer shape as a sum of exponentials: -ln prod(1 - u_i).
double gamma_int(int shape, RngStream& rng) {
    double acc = 0.0;
    for (int i = 0; i < shape; ++i) acc += -std::log1p(-rng.uniform());
    return acc;
}

double triangle_inv_cdf(const DistSpec& s, double u) {
    const double span = s.b - s.a;
    const double fc = (s.c - s.a) / span;  // CDF at the mode
    if (u < fc) return s.a + std::sqrt(u * span * (s.c - s.a));
    return s.b - std::sqrt((1.0 - u) * span * (s.b - s.c));
}

}  // namespace

double sample(const DistSpec& spec, RngStream& rng) {
    spec.validate();
    switch (spec.kind) {
        case DistSpec::Kind::impulse:
            return spec.a;
        case DistSpec::Kind::uniform:
            return rng.uniform(spec.a, spec.b);
        case DistSpec::Kind::triangle:
            return triangle_inv_cdf(spec, rng.uniform());
        case DistSpec::Kind::two_point:
            return rng.uniform() < spec.p1 ? spec.a1 : spec.a2;
        case DistSpec::Kind::scaled_beta: {
            const double g1 = gamma_int(static_cast<int>(std::round(spec.alpha)), rng);
            const double g2 = gamma_int(static_cast<int>(std::round(spec.beta)), rng);
            const double total = g1 + g2;
            if (total == 0.0) return spec.mean();  // measure-zero guard
            return spec.k * (g1 / total);
        }
    }
    throw InvalidSpec("unknown distribution kind");
}

}  // namespace aoisim::stochastic
