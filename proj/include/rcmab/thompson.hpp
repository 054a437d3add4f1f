#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rcmab/matrix.hpp"
#include "rcmab/random.hpp"

namespace rcmab {

// Beta(alpha, beta) posterior per (state, action) pair. This is an exact
// sufficient statistic for the Bernoulli reward history, so it is the only
// state the decision-maker carries between rounds.
//
// Read-shared within a round; written only at round boundaries via update().
struct PosteriorBank {
    Matrix alpha;  // strictly positive
    Matrix beta;   // strictly positive
    std::uint64_t round = 0;

    std::size_t num_states() const { return alpha.rows(); }
    std::size_t num_actions() const { return alpha.cols(); }
};

// Explicit conditional distribution pi(a|s); each row lives on the K-simplex.
struct PolicyMatrix {
    Matrix probs;

    std::size_t num_states() const { return probs.rows(); }
    std::size_t num_actions() const { return probs.cols(); }

    // Throws std::invalid_argument if a row is negative or off the simplex
    // by more than 1e-9.
    void validate() const;

    friend bool operator==(const PolicyMatrix&, const PolicyMatrix&) = default;
};

PolicyMatrix uniform_policy(std::size_t num_states, std::size_t num_actions);

struct Observation {
    std::size_t state;
    std::size_t action;
    int reward;  // 0 or 1
};

enum class PolicyMethod { quadrature, monte_carlo };

// Fresh bank: Beta(1, 1) everywhere, round 0.
PosteriorBank init_posteriors(std::size_t num_states, std::size_t num_actions);

// One Thompson draw: sample mu_hat(s, a) ~ Beta(alpha, beta) for every arm and
// return the argmax, exact ties going to the lowest action index.
std::size_t sample_action(const PosteriorBank& bank, std::size_t s, Rng& stream);

// Argmax with lowest-index tie-break, the rule shared by sample_action and the
// Monte Carlo policy estimate.
std::size_t argmax_lowest(std::span<const double> values);

// Batch conjugate update: alpha += r, beta += 1 - r per observation, then
// round += 1. An empty batch still advances the round.
void update(PosteriorBank& bank, std::span<const Observation> observations);

// The action distribution pi(a|s) induced by Thompson sampling: the
// probability that arm a produces the largest posterior draw.
//
// quadrature: integrate density(a) * prod_{j != a} cdf(j) on a fixed grid of
// `precision` midpoint nodes (512 is the library default) and normalize.
// monte_carlo: frequency of argmax over `precision` joint posterior draws
// from `stream`; quadrature ignores the stream.
std::vector<double> action_distribution(const PosteriorBank& bank, std::size_t s,
                                        PolicyMethod method, std::uint64_t precision,
                                        Rng& stream);

constexpr std::uint64_t kDefaultQuadratureNodes = 512;

// Row-wise action_distribution over all states.
PolicyMatrix full_policy(const PosteriorBank& bank, PolicyMethod method, std::uint64_t precision,
                         Rng& stream);

void save_posteriors(const PosteriorBank& bank, const std::filesystem::path& path);
PosteriorBank load_posteriors(const std::filesystem::path& path);

}  // namespace rcmab
