#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rcmab/matrix.hpp"
#include "rcmab/thompson.hpp"

namespace rcmab {

// Joint distribution over (state, action), stored as an |S| x K matrix of
// probabilities with total mass 1.
struct JointDistribution {
    Matrix probs;

    std::size_t num_states() const { return probs.rows(); }
    std::size_t num_actions() const { return probs.cols(); }

    void validate() const;

    friend bool operator==(const JointDistribution&, const JointDistribution&) = default;
};

// Shannon entropy in bits, with 0 log 0 = 0. Rejects negative entries and
// vectors whose mass deviates from 1 by more than 1e-9.
double entropy(std::span<const double> p);

// I(S;A) in bits of the joint P_S(s) * policy(a|s).
double mutual_information(std::span<const double> state_dist, const PolicyMatrix& policy);

JointDistribution joint_from_policy(std::span<const double> state_dist,
                                    const PolicyMatrix& policy);

// (1/2) sum |P - Q| over the full grid. Shapes must match.
double total_variation(const JointDistribution& p, const JointDistribution& q);

// Empirical joint type of paired sequences: type(s, a) = count(s, a) / N.
JointDistribution empirical_joint_type(std::span<const std::size_t> states,
                                       std::span<const std::size_t> actions,
                                       std::size_t num_states, std::size_t num_actions);

struct RdOptions {
    double tol_bits = 1e-4;        // target accuracy of the returned rate
    int max_iterations = 100000;   // total inner-iteration budget per call
    std::ostream* trace = nullptr; // optional CSV iteration trace
};

struct RdResult {
    double rate_bits = 0.0;
    PolicyMatrix policy;      // the minimizing conditional Q_{A|S}
    double distortion = 0.0;  // achieved TV(P_S Q, P_S pi)
    bool converged = true;
    int iterations = 0;
};

// Warm-start handle for repeated solves against a slowly moving target policy
// (one solve per simulation round). Opaque to callers; pass the same object
// across calls.
struct RdWarmStart {
    bool valid = false;
    double lambda = 0.0;
    Matrix q;
};

// Constrained rate-distortion program for policy compression:
//
//     R(D) = min { I(S;A) : TV(P_S Q_{A|S}, P_S pi) <= D }
//
// over the product of per-state simplices. Solved by alternating minimization
// of the Lagrangian I + lambda*TV (exact per-state subproblem, closed-form
// output marginal) with an outer bisection on lambda to meet the constraint,
// plus a mixture-refinement step that handles linear segments of R(D).
//
// D < 0 is rejected. Exhausting the iteration budget reports
// converged = false and returns the best feasible iterate found.
RdResult rd_policy_compression(std::span<const double> state_dist, const PolicyMatrix& target,
                               double distortion_bound, RdOptions options = {},
                               RdWarmStart* warm = nullptr);

// Inverse use of the same program: the least distortion achievable at rate R,
//
//     D(R) = min { TV(P_S Q, P_S pi) : I(S;A) <= R },
//
// together with the policy attaining it.
RdResult rate_to_distortion(std::span<const double> state_dist, const PolicyMatrix& target,
                            double rate_bits, RdOptions options = {},
                            RdWarmStart* warm = nullptr);

}  // namespace rcmab
