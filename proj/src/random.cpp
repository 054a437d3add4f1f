#include "rcmab/random.hpp"

#include <cmath>

namespace rcmab {

double normal_sample(Rng& rng) {
    // Box-Muller, cosine branch only, so one call consumes exactly two words.
    const double u1 = uniform_open01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

namespace {

// Marsaglia-Tsang squeeze method, valid for shape >= 1.
double gamma_sample_ge1(Rng& rng, double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal_sample(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace

double gamma_sample(Rng& rng, double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma_sample: shape must be positive");
    if (shape < 1.0) {
        // Boost trick: Gamma(a) = Gamma(a+1) * U^{1/a}.
        const double g = gamma_sample_ge1(rng, shape + 1.0);
        return g * std::pow(uniform_open01(rng), 1.0 / shape);
    }
    return gamma_sample_ge1(rng, shape);
}

double beta_sample(Rng& rng, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("beta_sample: parameters must be positive");
    }
    const double x = gamma_sample(rng, alpha);
    const double y = gamma_sample(rng, beta);
    return x / (x + y);
}

std::size_t categorical_sample(Rng& rng, std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("categorical_sample: empty distribution");
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    // u landed in fp slack past the accumulated mass; return the last
    // positive-probability outcome.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return probs.size() - 1;
}

}  // namespace rcmab
