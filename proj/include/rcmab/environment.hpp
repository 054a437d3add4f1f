#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rcmab/matrix.hpp"
#include "rcmab/random.hpp"

namespace rcmab {

// A finite contextual bandit instance with Bernoulli rewards: the environment
// draws a state from state_dist each interaction, and pulling arm a in state s
// pays 1 with probability mean_rewards(s, a).
//
// Immutable after construction; safe to share across concurrent workers.
struct EnvironmentSpec {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> state_dist;           // P_S, sums to 1
    Matrix mean_rewards;                      // entries in [0, 1]
    std::vector<std::size_t> optimal_action;  // unique argmax per state
    std::uint64_t seed = 0;                   // generator seed of this instance
};

// Validates invariants and derives optimal_action (argmax per state, which
// must be strict). Throws std::invalid_argument on violations.
EnvironmentSpec make_environment(std::vector<double> state_dist, Matrix mean_rewards,
                                 std::uint64_t seed);

// Grouped Bernoulli scenario: uniform states, states partitioned into
// contiguous blocks of size num_states / num_groups, block g has its unique
// best arm a_g with mean 0.8, every other mean drawn i.i.d. Uniform[0, 0.75].
// num_states = num_actions = 16 with 16/8/2 groups gives the three reference
// scenarios.
EnvironmentSpec make_grouped_env(std::size_t num_states, std::size_t num_actions,
                                 std::size_t num_groups, std::uint64_t seed);

std::size_t sample_state(const EnvironmentSpec& env, Rng& stream);

// Bernoulli(mean_rewards(s, a)) draw in {0, 1}.
int sample_reward(const EnvironmentSpec& env, std::size_t s, std::size_t a, Rng& stream);

// Entropy in bits of the optimal-arm marginal pi*(a) = sum_s P_S(s) 1[a = a*(s)].
double optimal_arm_entropy(const EnvironmentSpec& env);

// min over states of mu(s, a*(s)) - max_{a != a*(s)} mu(s, a). For a
// single-action environment there is no suboptimal arm and the gap is 0.
double min_optimality_gap(const EnvironmentSpec& env);

void save_environment(const EnvironmentSpec& env, const std::filesystem::path& path);
EnvironmentSpec load_environment(const std::filesystem::path& path);

}  // namespace rcmab
