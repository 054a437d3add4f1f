#include "rcmab/environment.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace rcmab {

namespace {

void validate_dims(std::size_t num_states, std::size_t num_actions) {
    if (num_states == 0 || num_actions == 0) {
        throw std::invalid_argument("environment: num_states and num_actions must be positive");
    }
}

}  // namespace

EnvironmentSpec make_environment(std::vector<double> state_dist, Matrix mean_rewards,
                                 std::uint64_t seed) {
    const std::size_t num_states = mean_rewards.rows();
    const std::size_t num_actions = mean_rewards.cols();
    validate_dims(num_states, num_actions);
    if (state_dist.size() != num_states) {
        throw std::invalid_argument("environment: state_dist size does not match num_states");
    }
    double mass = 0.0;
    for (double p : state_dist) {
        if (p < 0.0) throw std::invalid_argument("environment: negative state probability");
        mass += p;
    }
    if (std::abs(mass - 1.0) > 1e-12) {
        throw std::invalid_argument("environment: state_dist must sum to 1 (got " +
                                    std::to_string(mass) + ")");
    }
    for (double mu : mean_rewards.flat()) {
        if (!(mu >= 0.0 && mu <= 1.0)) {
            throw std::invalid_argument("environment: mean reward outside [0, 1]");
        }
    }

    std::vector<std::size_t> optimal(num_states);
    for (std::size_t s = 0; s < num_states; ++s) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < num_actions; ++a) {
            if (mean_rewards(s, a) > mean_rewards(s, best)) best = a;
        }
        for (std::size_t a = 0; a < num_actions; ++a) {
            if (a != best && mean_rewards(s, a) == mean_rewards(s, best)) {
                throw std::invalid_argument("environment: optimal action not unique in state " +
                                            std::to_string(s));
            }
        }
        optimal[s] = best;
    }

    EnvironmentSpec env;
    env.num_states = num_states;
    env.num_actions = num_actions;
    env.state_dist = std::move(state_dist);
    env.mean_rewards = std::move(mean_rewards);
    env.optimal_action = std::move(optimal);
    env.seed = seed;
    return env;
}

EnvironmentSpec make_grouped_env(std::size_t num_states, std::size_t num_actions,
                                 std::size_t num_groups, std::uint64_t seed) {
    validate_dims(num_states, num_actions);
    if (num_groups == 0 || num_states % num_groups != 0) {
        throw std::invalid_argument("make_grouped_env: num_groups must divide num_states");
    }
    if (num_groups > num_actions) {
        throw std::invalid_argument("make_grouped_env: num_groups exceeds num_actions");
    }

    const std::size_t block = num_states / num_groups;
    Rng rng = make_stream(seed, 0x656e76);  // dedicated instance-generation stream
    Matrix mu(num_states, num_actions);
    for (std::size_t s = 0; s < num_states; ++s) {
        const std::size_t best = s / block;
        for (std::size_t a = 0; a < num_actions; ++a) {
            mu(s, a) = (a == best) ? 0.8 : 0.75 * uniform01(rng);
        }
    }
    std::vector<double> uniform_states(num_states, 1.0 / static_cast<double>(num_states));
    return make_environment(std::move(uniform_states), std::move(mu), seed);
}

std::size_t sample_state(const EnvironmentSpec& env, Rng& stream) {
    return categorical_sample(stream, env.state_dist);
}

int sample_reward(const EnvironmentSpec& env, std::size_t s, std::size_t a, Rng& stream) {
    if (s >= env.num_states || a >= env.num_actions) {
        throw std::out_of_range("sample_reward: state or action index out of range");
    }
    return bernoulli(stream, env.mean_rewards(s, a)) ? 1 : 0;
}

double optimal_arm_entropy(const EnvironmentSpec& env) {
    std::vector<double> marginal(env.num_actions, 0.0);
    for (std::size_t s = 0; s < env.num_states; ++s) {
        marginal[env.optimal_action[s]] += env.state_dist[s];
    }
    double h = 0.0;
    for (double p : marginal) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

double min_optimality_gap(const EnvironmentSpec& env) {
    if (env.num_actions < 2) return 0.0;
    double gap = 1.0;
    for (std::size_t s = 0; s < env.num_states; ++s) {
        const std::size_t best = env.optimal_action[s];
        double runner_up = 0.0;
        for (std::size_t a = 0; a < env.num_actions; ++a) {
            if (a != best) runner_up = std::max(runner_up, env.mean_rewards(s, a));
        }
        gap = std::min(gap, env.mean_rewards(s, best) - runner_up);
    }
    return gap;
}

void save_environment(const EnvironmentSpec& env, const std::filesystem::path& path) {
    nlohmann::json j;
    j["num_states"] = env.num_states;
    j["num_actions"] = env.num_actions;
    j["state_dist"] = env.state_dist;
    std::vector<std::vector<double>> rows(env.num_states);
    for (std::size_t s = 0; s < env.num_states; ++s) {
        rows[s].assign(env.mean_rewards.row(s).begin(), env.mean_rewards.row(s).end());
    }
    j["mean_rewards"] = rows;
    j["optimal_action"] = env.optimal_action;
    j["seed"] = env.seed;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_environment: cannot open " + path.string());
    out << j.dump(2) << '\n';
}

EnvironmentSpec load_environment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_environment: cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);

    const auto num_states = j.at("num_states").get<std::size_t>();
    const auto num_actions = j.at("num_actions").get<std::size_t>();
    auto state_dist = j.at("state_dist").get<std::vector<double>>();
    const auto rows = j.at("mean_rewards").get<std::vector<std::vector<double>>>();
    if (rows.size() != num_states) {
        throw std::runtime_error("load_environment: mean_rewards row count mismatch");
    }
    Matrix mu(num_states, num_actions);
    for (std::size_t s = 0; s < num_states; ++s) {
        if (rows[s].size() != num_actions) {
            throw std::runtime_error("load_environment: mean_rewards column count mismatch");
        }
        for (std::size_t a = 0; a < num_actions; ++a) mu(s, a) = rows[s][a];
    }
    auto env = make_environment(std::move(state_dist), std::move(mu),
                                j.at("seed").get<std::uint64_t>());
    // optimal_action is derived; if the file carries it, make sure it agrees.
    if (j.contains("optimal_action")) {
        const auto stored = j.at("optimal_action").get<std::vector<std::size_t>>();
        if (stored != env.optimal_action) {
            throw std::runtime_error("load_environment: stored optimal_action is inconsistent");
        }
    }
    return env;
}

}  // namespace rcmab
