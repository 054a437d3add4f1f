#include "rcmab/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rcmab {

namespace {

constexpr double kLog2 = 0.6931471805599453094172321;

// Lagrange multipliers are capped here (nats per unit of total variation).
// The dual path reaches distortion ~e^{-lambda/2}, so 100 already covers any
// distortion target down to ~1e-22 while keeping exp(lambda/2) comfortably
// inside double range for the breakpoint arithmetic below.
constexpr double kLambdaCap = 100.0;

// Arms whose output marginal is this small are dropped from the per-state
// subproblem: at the capped multiplier the KL cost of moving mass onto them
// always exceeds any distortion credit.
constexpr double kNegligibleMarginal = 1e-60;

constexpr double kFeasibilitySlack = 1e-9;

void validate_state_dist(std::span<const double> p) {
    double mass = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::invalid_argument("state distribution has a negative entry");
        mass += v;
    }
    if (std::abs(mass - 1.0) > 1e-9) {
        throw std::invalid_argument("state distribution mass is " + std::to_string(mass));
    }
}

}  // namespace

void JointDistribution::validate() const {
    double mass = 0.0;
    for (double v : probs.flat()) {
        if (v < 0.0) throw std::invalid_argument("JointDistribution: negative entry");
        mass += v;
    }
    if (std::abs(mass - 1.0) > 1e-9) {
        throw std::invalid_argument("JointDistribution: total mass is " + std::to_string(mass));
    }
}

double entropy(std::span<const double> p) {
    validate_state_dist(p);
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

double mutual_information(std::span<const double> state_dist, const PolicyMatrix& policy) {
    if (state_dist.size() != policy.num_states()) {
        throw std::invalid_argument("mutual_information: dimension mismatch");
    }
    validate_state_dist(state_dist);

    const std::size_t k = policy.num_actions();
    std::vector<double> marginal(k, 0.0);
    for (std::size_t s = 0; s < policy.num_states(); ++s) {
        if (state_dist[s] == 0.0) continue;
        for (std::size_t a = 0; a < k; ++a) {
            marginal[a] += state_dist[s] * policy.probs(s, a);
        }
    }
    double info = 0.0;
    for (std::size_t s = 0; s < policy.num_states(); ++s) {
        if (state_dist[s] == 0.0) continue;
        for (std::size_t a = 0; a < k; ++a) {
            const double q = policy.probs(s, a);
            if (q > 0.0 && marginal[a] > 0.0) {
                info += state_dist[s] * q * std::log2(q / marginal[a]);
            }
        }
    }
    return std::max(info, 0.0);
}

JointDistribution joint_from_policy(std::span<const double> state_dist,
                                    const PolicyMatrix& policy) {
    if (state_dist.size() != policy.num_states()) {
        throw std::invalid_argument("joint_from_policy: dimension mismatch");
    }
    Matrix joint(policy.num_states(), policy.num_actions());
    for (std::size_t s = 0; s < policy.num_states(); ++s) {
        for (std::size_t a = 0; a < policy.num_actions(); ++a) {
            joint(s, a) = state_dist[s] * policy.probs(s, a);
        }
    }
    return JointDistribution{std::move(joint)};
}

double total_variation(const JointDistribution& p, const JointDistribution& q) {
    if (!p.probs.same_shape(q.probs)) {
        throw std::invalid_argument("total_variation: shape mismatch");
    }
    double sum = 0.0;
    const auto pf = p.probs.flat();
    const auto qf = q.probs.flat();
    for (std::size_t i = 0; i < pf.size(); ++i) sum += std::abs(pf[i] - qf[i]);
    return 0.5 * sum;
}

JointDistribution empirical_joint_type(std::span<const std::size_t> states,
                                       std::span<const std::size_t> actions,
                                       std::size_t num_states, std::size_t num_actions) {
    if (states.size() != actions.size()) {
        throw std::invalid_argument("empirical_joint_type: sequence length mismatch");
    }
    if (states.empty()) throw std::invalid_argument("empirical_joint_type: empty input");
    Matrix counts(num_states, num_actions, 0.0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] >= num_states || actions[i] >= num_actions) {
            throw std::out_of_range("empirical_joint_type: index out of range");
        }
        counts(states[i], actions[i]) += 1.0;
    }
    const double n = static_cast<double>(states.size());
    for (double& v : counts.flat()) v /= n;
    return JointDistribution{std::move(counts)};
}

// ---------------------------------------------------------------------------
// Constrained R(D) solver.
//
// For a fixed multiplier lambda the Lagrangian
//     F(Q, r) = sum_s P_s [ KL(Q_s || r) + (lambda/2) ||Q_s - pi_s||_1 ]
// is jointly convex and is minimized by alternating two exact steps:
// r <- the output marginal of Q, and Q_s <- the per-state subproblem below.
// ---------------------------------------------------------------------------

namespace {

// minimize  sum_a q_a ln(q_a / r_a) + c sum_a |q_a - pi_a|  over the simplex.
//
// Stationarity gives q_a(t) = min(max(pi_a, t r_a e^{-c}), t r_a e^{+c}) for a
// normalization scalar t > 0; the total mass is piecewise linear and
// nondecreasing in t, so t is located exactly by a breakpoint scan.
void per_state_solve(std::span<const double> r, std::span<const double> pi, double c,
                     std::span<double> q_out) {
    const std::size_t k = r.size();
    const double em = std::exp(-c);
    const double ep = std::exp(c);

    std::vector<double> breaks;
    breaks.reserve(2 * k + 1);
    breaks.push_back(0.0);
    for (std::size_t a = 0; a < k; ++a) {
        if (r[a] <= kNegligibleMarginal) continue;
        if (pi[a] > 0.0) {
            breaks.push_back(pi[a] * em / r[a]);  // below: q_a = t r_a e^{+c}
            breaks.push_back(pi[a] * ep / r[a]);  // above: q_a = t r_a e^{-c}
        }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    const auto mass_at = [&](double t) {
        double sum = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            if (r[a] <= kNegligibleMarginal) continue;
            sum += std::min(std::max(pi[a], t * r[a] * em), t * r[a] * ep);
        }
        return sum;
    };

    double t_star = -1.0;
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        const double lo = breaks[i];
        const double hi = (i + 1 < breaks.size()) ? breaks[i + 1]
                                                  : std::max(1.0, 4.0 * breaks.back()) * 1e6;
        const double rep = (i + 1 < breaks.size()) ? 0.5 * (lo + hi) : hi;

        // classify arms on this segment and solve the linear equation
        double pinned = 0.0, slope = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            if (r[a] <= kNegligibleMarginal) continue;
            const double low_branch = rep * r[a] * ep;
            const double high_branch = rep * r[a] * em;
            if (high_branch >= pi[a]) {
                slope += r[a] * em;
            } else if (low_branch <= pi[a]) {
                slope += r[a] * ep;
            } else {
                pinned += pi[a];
            }
        }
        if (slope <= 0.0) {
            if (pinned >= 1.0 - 1e-12) {
                t_star = rep;
                break;
            }
            continue;
        }
        double t = (1.0 - pinned) / slope;
        if (t <= hi * (1.0 + 1e-12)) {
            t_star = std::clamp(t, lo, hi);
            break;
        }
    }
    if (t_star < 0.0) {
        // numerical fallback: bisect on the monotone mass function
        double lo = 0.0, hi = std::max(1.0, breaks.back()) * 2.0;
        while (mass_at(hi) < 1.0) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mass_at(mid) < 1.0 ? lo : hi) = mid;
        }
        t_star = 0.5 * (lo + hi);
    }

    double total = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        if (r[a] <= kNegligibleMarginal) {
            q_out[a] = 0.0;
        } else {
            q_out[a] = std::min(std::max(pi[a], t_star * r[a] * em), t_star * r[a] * ep);
        }
        total += q_out[a];
    }
    for (std::size_t a = 0; a < k; ++a) q_out[a] /= total;
}

struct LagrangianOutcome {
    Matrix q;
    double rate_bits = 0.0;
    double tv = 0.0;
    int iterations = 0;
};

double policy_rate_bits(std::span<const double> ps, const Matrix& q) {
    PolicyMatrix wrapped{q};
    return mutual_information(ps, wrapped);
}

double policy_tv(std::span<const double> ps, const Matrix& q, const Matrix& pi) {
    double sum = 0.0;
    for (std::size_t s = 0; s < q.rows(); ++s) {
        if (ps[s] == 0.0) continue;
        double row = 0.0;
        for (std::size_t a = 0; a < q.cols(); ++a) row += std::abs(q(s, a) - pi(s, a));
        sum += ps[s] * row;
    }
    return 0.5 * sum;
}

LagrangianOutcome minimize_lagrangian(std::span<const double> ps, const Matrix& pi,
                                      double lambda, Matrix q_init, int max_iterations,
                                      std::ostream* trace) {
    const std::size_t num_states = pi.rows();
    const std::size_t k = pi.cols();
    const double c = 0.5 * lambda;

    Matrix q = std::move(q_init);
    std::vector<double> marginal(k);
    std::vector<double> row(k);
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        std::fill(marginal.begin(), marginal.end(), 0.0);
        for (std::size_t s = 0; s < num_states; ++s) {
            if (ps[s] == 0.0) continue;
            for (std::size_t a = 0; a < k; ++a) marginal[a] += ps[s] * q(s, a);
        }

        double delta = 0.0;
        for (std::size_t s = 0; s < num_states; ++s) {
            if (ps[s] == 0.0) {
                for (std::size_t a = 0; a < k; ++a) q(s, a) = 1.0 / static_cast<double>(k);
                continue;
            }
            per_state_solve(marginal, pi.row(s), c, row);
            for (std::size_t a = 0; a < k; ++a) {
                delta = std::max(delta, std::abs(row[a] - q(s, a)));
                q(s, a) = row[a];
            }
        }
        if (trace) {
            *trace << lambda << ',' << iter << ',' << policy_rate_bits(ps, q) << ','
                   << policy_tv(ps, q, pi) << '\n';
        }
        if (delta < 1e-12) {
            ++iter;
            break;
        }
    }

    LagrangianOutcome out;
    out.rate_bits = policy_rate_bits(ps, q);
    out.tv = policy_tv(ps, q, pi);
    out.q = std::move(q);
    out.iterations = iter;
    return out;
}

struct Candidate {
    bool valid = false;
    double rate_bits = 0.0;
    double tv = 0.0;
    Matrix q;
};

void consider(Candidate& best, double rate_bits, double tv, const Matrix& q, bool minimize_rate,
              double limit) {
    // minimize_rate: keep min rate among tv <= limit.
    // otherwise:     keep min tv among rate <= limit.
    const double key = minimize_rate ? rate_bits : tv;
    const double gate = minimize_rate ? tv : rate_bits;
    if (gate > limit) return;
    if (!best.valid || key < (minimize_rate ? best.rate_bits : best.tv)) {
        best.valid = true;
        best.rate_bits = rate_bits;
        best.tv = tv;
        best.q = q;
    }
}

Matrix blend(const Matrix& a, const Matrix& b, double theta) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = (1.0 - theta) * a(i, j) + theta * b(i, j);
        }
    }
    return out;
}

void validate_problem(std::span<const double> ps, const PolicyMatrix& target) {
    validate_state_dist(ps);
    if (ps.size() != target.num_states()) {
        throw std::invalid_argument("rate-distortion: dimension mismatch");
    }
    target.validate();
}

}  // namespace

RdResult rd_policy_compression(std::span<const double> state_dist, const PolicyMatrix& target,
                               double distortion_bound, RdOptions options, RdWarmStart* warm) {
    validate_problem(state_dist, target);
    if (distortion_bound < 0.0) {
        throw std::invalid_argument("rd_policy_compression: negative distortion bound");
    }

    RdResult result;
    result.policy = target;
    if (distortion_bound == 0.0) {
        // feasible set is {pi} up to null states
        result.rate_bits = mutual_information(state_dist, target);
        result.distortion = 0.0;
        return result;
    }

    const double feasible_tv = distortion_bound + kFeasibilitySlack;
    int budget = options.max_iterations;
    Candidate best;
    // pi itself is always feasible; seed the candidate set with it.
    consider(best, mutual_information(state_dist, target), 0.0, target.probs, true, feasible_tv);

    Matrix carry = (warm && warm->valid && warm->q.same_shape(target.probs)) ? warm->q
                                                                             : target.probs;
    const auto evaluate = [&](double lambda) {
        auto out = minimize_lagrangian(state_dist, target.probs, lambda, carry,
                                       std::min(budget, 2000), options.trace);
        budget -= out.iterations;
        carry = out.q;
        consider(best, out.rate_bits, out.tv, out.q, true, feasible_tv);
        return out;
    };

    auto low = evaluate(0.0);
    double final_lambda = 0.0;
    bool bracketed = true;
    if (low.tv > distortion_bound) {
        double lam_lo = 0.0;
        double lam_hi = (warm && warm->valid) ? std::max(warm->lambda * 0.25, 0.0625) : 1.0;
        auto high = evaluate(lam_hi);
        while (high.tv > distortion_bound && lam_hi < kLambdaCap && budget > 0) {
            lam_lo = lam_hi;
            low = high;
            lam_hi = std::min(lam_hi * 4.0, kLambdaCap);
            high = evaluate(lam_hi);
        }
        bracketed = high.tv <= distortion_bound;
        for (int it = 0; it < 50 && budget > 0; ++it) {
            const double mid = 0.5 * (lam_lo + lam_hi);
            auto out = evaluate(mid);
            if (out.tv <= distortion_bound) {
                lam_hi = mid;
                high = std::move(out);
            } else {
                lam_lo = mid;
                low = std::move(out);
            }
        }
        final_lambda = lam_hi;
        // Linear segments of R(D) live between the bracketing iterates; mix
        // toward the infeasible side for the exact constraint-active point.
        if (bracketed && low.tv > distortion_bound && best.valid) {
            double th_lo = 0.0, th_hi = 1.0;  // blend(best.q -> low.q)
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (th_lo + th_hi);
                const Matrix mix = blend(best.q, low.q, mid);
                (policy_tv(state_dist, mix, target.probs) <= distortion_bound ? th_lo : th_hi) =
                    mid;
            }
            const Matrix mix = blend(best.q, low.q, th_lo);
            consider(best, policy_rate_bits(state_dist, mix),
                     policy_tv(state_dist, mix, target.probs), mix, true, feasible_tv);
        }
    }

    result.rate_bits = best.rate_bits;
    result.distortion = best.tv;
    result.policy = PolicyMatrix{best.q};
    result.converged = bracketed && budget > 0;
    result.iterations = options.max_iterations - budget;
    if (warm) {
        warm->valid = true;
        warm->lambda = final_lambda;
        warm->q = result.policy.probs;
    }
    return result;
}

RdResult rate_to_distortion(std::span<const double> state_dist, const PolicyMatrix& target,
                            double rate_bits, RdOptions options, RdWarmStart* warm) {
    validate_problem(state_dist, target);
    if (rate_bits < 0.0) throw std::invalid_argument("rate_to_distortion: negative rate");

    RdResult result;
    const double target_rate = mutual_information(state_dist, target);
    if (rate_bits >= target_rate - 1e-12) {
        result.rate_bits = target_rate;
        result.policy = target;
        result.distortion = 0.0;
        return result;
    }

    const double feasible_rate = rate_bits + kFeasibilitySlack;
    int budget = options.max_iterations;
    Candidate best;

    Matrix carry = (warm && warm->valid && warm->q.same_shape(target.probs)) ? warm->q
                                                                             : target.probs;
    const auto evaluate = [&](double lambda) {
        auto out = minimize_lagrangian(state_dist, target.probs, lambda, carry,
                                       std::min(budget, 2000), options.trace);
        budget -= out.iterations;
        carry = out.q;
        consider(best, out.rate_bits, out.tv, out.q, false, feasible_rate);
        return out;
    };

    // lambda = 0 collapses every row onto the output marginal: rate exactly 0.
    auto low = evaluate(0.0);
    double lam_lo = 0.0, lam_hi = (warm && warm->valid) ? std::max(warm->lambda * 0.25, 0.0625)
                                                        : 1.0;
    double final_lambda = 0.0;
    bool bracketed = true;
    auto high = evaluate(lam_hi);
    while (high.rate_bits <= feasible_rate && lam_hi < kLambdaCap && budget > 0) {
        lam_lo = lam_hi;
        low = high;
        lam_hi = std::min(lam_hi * 4.0, kLambdaCap);
        high = evaluate(lam_hi);
    }
    if (high.rate_bits <= feasible_rate) {
        // even the capped multiplier stays under the rate budget
        final_lambda = lam_hi;
    } else {
        for (int it = 0; it < 50 && budget > 0; ++it) {
            const double mid = 0.5 * (lam_lo + lam_hi);
            auto out = evaluate(mid);
            if (out.rate_bits <= feasible_rate) {
                lam_lo = mid;
                low = std::move(out);
            } else {
                lam_hi = mid;
                high = std::move(out);
            }
        }
        final_lambda = lam_lo;
        // mixture refinement across the rate constraint
        if (best.valid) {
            double th_lo = 0.0, th_hi = 1.0;  // blend(best.q -> high.q)
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (th_lo + th_hi);
                const Matrix mix = blend(best.q, high.q, mid);
                (policy_rate_bits(state_dist, mix) <= feasible_rate ? th_lo : th_hi) = mid;
            }
            const Matrix mix = blend(best.q, high.q, th_lo);
            consider(best, policy_rate_bits(state_dist, mix),
                     policy_tv(state_dist, mix, target.probs), mix, false, feasible_rate);
        }
    }

    // At rate budgets below solver resolution the answer must be exactly
    // state-independent; collapsing rows onto their mixture enforces that.
    if (rate_bits < options.tol_bits && best.valid) {
        const std::size_t k = target.num_actions();
        std::vector<double> mixture(k, 0.0);
        for (std::size_t s = 0; s < best.q.rows(); ++s) {
            for (std::size_t a = 0; a < k; ++a) mixture[a] += state_dist[s] * best.q(s, a);
        }
        Matrix flat(best.q.rows(), k);
        for (std::size_t s = 0; s < flat.rows(); ++s) {
            for (std::size_t a = 0; a < k; ++a) flat(s, a) = mixture[a];
        }
        const double flat_tv = policy_tv(state_dist, flat, target.probs);
        if (flat_tv <= best.tv + 1e-6) {
            best.q = std::move(flat);
            best.tv = flat_tv;
            best.rate_bits = 0.0;
        }
    }

    result.rate_bits = best.rate_bits;
    result.distortion = best.tv;
    result.policy = PolicyMatrix{best.q};
    result.converged = bracketed && budget > 0 && best.valid;
    result.iterations = options.max_iterations - budget;
    if (warm) {
        warm->valid = true;
        warm->lambda = final_lambda;
        warm->q = result.policy.probs;
    }
    return result;
}

}  // namespace rcmab
