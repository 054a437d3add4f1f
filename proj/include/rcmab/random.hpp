#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace rcmab {

// All randomness in the library flows through mt19937_64 plus the samplers
// below. Distribution algorithms are implemented here rather than taken from
// <random> because the standard leaves their output sequences
// implementation-defined, and traces must reproduce bit-identically.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic sub-stream seed from (root, a, b), e.g. (root_seed, round, agent).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = root;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return splitmix64(s);
}

inline Rng make_stream(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(derive_seed(root, a, b));
}

// Uniform double in [0, 1), 53-bit resolution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1); safe to pass to log().
inline double uniform_open01(Rng& rng) {
    return (static_cast<double>(rng() >> 12) + 0.5) * 0x1.0p-52;
}

// Unbiased integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

double normal_sample(Rng& rng);
double gamma_sample(Rng& rng, double shape);
double beta_sample(Rng& rng, double alpha, double beta);

// Draw from a discrete distribution by CDF inversion. `probs` must be a
// (possibly unnormalized within fp noise) probability vector.
std::size_t categorical_sample(Rng& rng, std::span<const double> probs);

}  // namespace rcmab
