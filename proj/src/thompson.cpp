#include "rcmab/thompson.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace rcmab {

void PolicyMatrix::validate() const {
    for (std::size_t s = 0; s < num_states(); ++s) {
        double sum = 0.0;
        for (double p : probs.row(s)) {
            if (p < 0.0) throw std::invalid_argument("PolicyMatrix: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("PolicyMatrix: row " + std::to_string(s) +
                                        " sums to " + std::to_string(sum));
        }
    }
}

PolicyMatrix uniform_policy(std::size_t num_states, std::size_t num_actions) {
    if (num_states == 0 || num_actions == 0) {
        throw std::invalid_argument("uniform_policy: dimensions must be positive");
    }
    return PolicyMatrix{Matrix(num_states, num_actions, 1.0 / static_cast<double>(num_actions))};
}

PosteriorBank init_posteriors(std::size_t num_states, std::size_t num_actions) {
    if (num_states == 0 || num_actions == 0) {
        throw std::invalid_argument("init_posteriors: dimensions must be positive");
    }
    PosteriorBank bank;
    bank.alpha = Matrix(num_states, num_actions, 1.0);
    bank.beta = Matrix(num_states, num_actions, 1.0);
    bank.round = 0;
    return bank;
}

std::size_t argmax_lowest(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("argmax_lowest: empty input");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::size_t sample_action(const PosteriorBank& bank, std::size_t s, Rng& stream) {
    if (s >= bank.num_states()) throw std::out_of_range("sample_action: state out of range");
    const std::size_t k = bank.num_actions();
    std::size_t best = 0;
    double best_draw = -1.0;
    for (std::size_t a = 0; a < k; ++a) {
        const double draw = beta_sample(stream, bank.alpha(s, a), bank.beta(s, a));
        if (draw > best_draw) {
            best_draw = draw;
            best = a;
        }
    }
    return best;
}

void update(PosteriorBank& bank, std::span<const Observation> observations) {
    for (const auto& obs : observations) {
        if (obs.state >= bank.num_states() || obs.action >= bank.num_actions()) {
            throw std::out_of_range("update: observation index out of range");
        }
        if (obs.reward != 0 && obs.reward != 1) {
            throw std::invalid_argument("update: reward must be 0 or 1");
        }
    }
    for (const auto& obs : observations) {
        bank.alpha(obs.state, obs.action) += obs.reward;
        bank.beta(obs.state, obs.action) += 1 - obs.reward;
    }
    bank.round += 1;
}

namespace {

// P(arm a yields the largest posterior draw) on a fixed midpoint grid:
// integrate pdf_a(x) * prod_{j != a} cdf_j(x) over [0, 1] and normalize.
// Midpoint nodes avoid the interval endpoints, and with the Beta(1,1) prior
// every parameter is >= 1, so the integrand is bounded.
std::vector<double> quadrature_row(const PosteriorBank& bank, std::size_t s, std::size_t nodes) {
    const std::size_t k = bank.num_actions();
    const double w = 1.0 / static_cast<double>(nodes);

    std::vector<double> log_x(nodes), log_1mx(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double x = (static_cast<double>(i) + 0.5) * w;
        log_x[i] = std::log(x);
        log_1mx[i] = std::log1p(-x);
    }

    // pdf and running cdf per arm on the grid.
    Matrix pdf(k, nodes);
    Matrix cdf(k, nodes);
    for (std::size_t a = 0; a < k; ++a) {
        const double alpha = bank.alpha(s, a);
        const double beta = bank.beta(s, a);
        const double log_norm =
            std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double p =
                std::exp(log_norm + (alpha - 1.0) * log_x[i] + (beta - 1.0) * log_1mx[i]);
            pdf(a, i) = p;
            // integral up to the node: full cells before it plus half a cell
            cdf(a, i) = std::min(1.0, acc + 0.5 * w * p);
            acc += w * p;
        }
    }

    // prod_{j != a} cdf_j per node via prefix/suffix products.
    std::vector<double> pi(k, 0.0);
    std::vector<double> prefix(k + 1), suffix(k + 1);
    for (std::size_t i = 0; i < nodes; ++i) {
        prefix[0] = 1.0;
        for (std::size_t a = 0; a < k; ++a) prefix[a + 1] = prefix[a] * cdf(a, i);
        suffix[k] = 1.0;
        for (std::size_t a = k; a-- > 0;) suffix[a] = suffix[a + 1] * cdf(a, i);
        for (std::size_t a = 0; a < k; ++a) {
            pi[a] += w * pdf(a, i) * prefix[a] * suffix[a + 1];
        }
    }

    double total = 0.0;
    for (double p : pi) total += p;
    for (double& p : pi) p /= total;
    return pi;
}

std::vector<double> monte_carlo_row(const PosteriorBank& bank, std::size_t s,
                                    std::uint64_t draws, Rng& stream) {
    const std::size_t k = bank.num_actions();
    std::vector<std::uint64_t> counts(k, 0);
    for (std::uint64_t d = 0; d < draws; ++d) {
        counts[sample_action(bank, s, stream)] += 1;
    }
    std::vector<double> pi(k);
    for (std::size_t a = 0; a < k; ++a) {
        pi[a] = static_cast<double>(counts[a]) / static_cast<double>(draws);
    }
    return pi;
}

}  // namespace

std::vector<double> action_distribution(const PosteriorBank& bank, std::size_t s,
                                        PolicyMethod method, std::uint64_t precision,
                                        Rng& stream) {
    if (s >= bank.num_states()) {
        throw std::out_of_range("action_distribution: state out of range");
    }
    if (precision == 0) {
        throw std::invalid_argument("action_distribution: precision must be positive");
    }
    switch (method) {
        case PolicyMethod::quadrature:
            return quadrature_row(bank, s, static_cast<std::size_t>(precision));
        case PolicyMethod::monte_carlo:
            return monte_carlo_row(bank, s, precision, stream);
    }
    throw std::invalid_argument("action_distribution: unknown method");
}

PolicyMatrix full_policy(const PosteriorBank& bank, PolicyMethod method, std::uint64_t precision,
                         Rng& stream) {
    PolicyMatrix policy{Matrix(bank.num_states(), bank.num_actions())};
    for (std::size_t s = 0; s < bank.num_states(); ++s) {
        const auto row = action_distribution(bank, s, method, precision, stream);
        for (std::size_t a = 0; a < bank.num_actions(); ++a) policy.probs(s, a) = row[a];
    }
    return policy;
}

void save_posteriors(const PosteriorBank& bank, const std::filesystem::path& path) {
    nlohmann::json j;
    j["num_states"] = bank.num_states();
    j["num_actions"] = bank.num_actions();
    j["round"] = bank.round;
    std::vector<std::vector<double>> a(bank.num_states()), b(bank.num_states());
    for (std::size_t s = 0; s < bank.num_states(); ++s) {
        a[s].assign(bank.alpha.row(s).begin(), bank.alpha.row(s).end());
        b[s].assign(bank.beta.row(s).begin(), bank.beta.row(s).end());
    }
    j["alpha"] = a;
    j["beta"] = b;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_posteriors: cannot open " + path.string());
    out << j.dump(2) << '\n';
}

PosteriorBank load_posteriors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_posteriors: cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);

    const auto num_states = j.at("num_states").get<std::size_t>();
    const auto num_actions = j.at("num_actions").get<std::size_t>();
    PosteriorBank bank;
    bank.alpha = Matrix(num_states, num_actions);
    bank.beta = Matrix(num_states, num_actions);
    bank.round = j.at("round").get<std::uint64_t>();
    const auto a = j.at("alpha").get<std::vector<std::vector<double>>>();
    const auto b = j.at("beta").get<std::vector<std::vector<double>>>();
    if (a.size() != num_states || b.size() != num_states) {
        throw std::runtime_error("load_posteriors: row count mismatch");
    }
    for (std::size_t s = 0; s < num_states; ++s) {
        if (a[s].size() != num_actions || b[s].size() != num_actions) {
            throw std::runtime_error("load_posteriors: column count mismatch");
        }
        for (std::size_t c = 0; c < num_actions; ++c) {
            if (!(a[s][c] > 0.0) || !(b[s][c] > 0.0)) {
                throw std::runtime_error("load_posteriors: parameters must be positive");
            }
            bank.alpha(s, c) = a[s][c];
            bank.beta(s, c) = b[s][c];
        }
    }
    return bank;
}

}  // namespace rcmab
