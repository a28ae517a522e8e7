#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aoisim::stochastic {

struct InvalidSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Purpose : std::uint64_t {
    arrivals = 1,
    contexts = 2,
    noise = 3,
    coupling = 4,
    policy = 5,
};

// Counter-style stream: every draw is a pure function of
// (master_seed, round, purpose, subkey, slot, intra-slot index), so any
// slot can be replayed without consuming the draws before it and rounds
// can run on any thread schedule. Core mixing is the SplitMix64 finalizer.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t round, Purpose purpose,
              std::uint64_t subkey = 0);

    // Rewind to (slot t, draw 0).
    void begin_slot(std::uint64_t t);

    std::uint64_t next_u64();
    double uniform();                    // [0, 1)
    double uniform(double a, double b);  // [a, b)
    double normal();                     // Box-Muller, consumes two uniforms

  private:
    std::uint64_t key_;
    std::uint64_t state_;
};

// One draw per slot shared by the policy, benchmark, and shadow runs of a
// round; channel n succeeds in slot t iff U(t) <= mu_n(t).
double coupling_uniform(std::uint64_t t, RngStream& coupling);

// 1 with probability p; rejects p outside [0, 1].
int bernoulli(double p, RngStream& rng);

struct DistSpec {
    enum class Kind { impulse, uniform, triangle, two_point, scaled_beta };

    Kind kind = Kind::impulse;
    double a = 0.0, b = 0.0, c = 0.0;            // impulse: a; uniform: [a,b); triangle: a,b, mode c
    double p1 = 0.0, a1 = 0.0, p2 = 0.0, a2 = 0.0;
    double k = 0.0, alpha = 0.0, beta = 0.0;     // k * Beta(alpha, beta), integer shapes

    static DistSpec impulse(double a);
    static DistSpec uniform(double a, double b);
    static DistSpec triangle(double a, double b, double c);
    static DistSpec two_point(double p1, double a1, double p2, double a2);
    static DistSpec scaled_beta(double k, double alpha, double beta);

    void validate() const;  // throws InvalidSpec naming the constraint

    double mean() const;
    double variance() const;
    double support_min() const;
    double support_max() const;
    std::string describe() const;
};

double sample(const DistSpec& spec, RngStream& rng);

}  // namespace aoisim::stochastic
