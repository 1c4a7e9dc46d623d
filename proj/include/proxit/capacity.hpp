#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "proxit/channel.hpp"
#include "proxit/prob.hpp"

namespace proxit {

enum class Algorithm {
    Classic,           // Blahut-Arimoto, beta = 1
    Matz,              // fixed beta < 1 (accelerated exponent)
    AdaptiveProximal,  // per-iteration beta line search
};

struct BetaSearch {
    double beta_min = 1e-3;
    double beta_max = 1.0;
    double search_tol = 1e-6;
};

struct SolverConfig {
    Algorithm algorithm = Algorithm::AdaptiveProximal;
    double tol = 1e-11;
    int max_iter = 10000;
    BetaSearch beta_search;
    std::optional<double> fixed_beta;  // Matz only; 0.5 when unset
    // Full-support starting distribution. Empty selects the default ramp
    // p_j proportional to j+1, which keeps iteration-count benchmarks
    // meaningful on input-symmetric channels (a uniform start is already
    // optimal there and converges immediately).
    ProbVector initial_input;
};

enum class StopReason { BoundGap, Delta, MaxIter };

struct IterationRecord {
    int k = 0;
    double mutual_info_nats = 0.0;
    double upper_bound_nats = 0.0;
    double beta_used = 0.0;
    double delta = 0.0;  // |I_k - I_{k-1}|
};

struct CapacityResult {
    double capacity_nats = 0.0;
    ProbVector optimal_input;
    int iterations = 0;
    bool converged = false;
    StopReason stop_reason = StopReason::MaxIter;
    std::vector<IterationRecord> trace;

    double capacity_bits() const;
};

// One generalized Blahut-Arimoto update,
//   p'(x) = p(x) exp(D_x / beta) / Z,
// with D_x the conditional divergence at p. beta = 1 is the classic step.
// Exponents are normalized in the log domain.
ProbVector ba_step(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p, double beta);

// KL(p_new || p_old) - KL(q_new || q_old); non-negative by Jensen's
// inequality, zero iff the update did not move.
double penalty_term(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p_new,
                    const Eigen::Ref<const Eigen::VectorXd>& p_old);

struct BetaChoice {
    double beta = 1.0;
    ProbVector next;
};

// Golden-section line search for the beta giving the largest mutual-
// information gain along the ba_step family, safeguarded so the result is
// never worse than the beta = 1 step.
BetaChoice select_beta(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p,
                       const SolverConfig& cfg);

// lower = I(p), upper = max_x D_x; capacity lies in [lower, upper].
std::pair<double, double> capacity_bounds(const Channel& ch,
                                          const Eigen::Ref<const Eigen::VectorXd>& p);

// Iterates the configured variant until the bound gap upper - lower <= tol,
// or |I_k - I_{k-1}| <= tol with the iterate itself stalled (movement at
// most sqrt(tol), so that cycles with constant mutual information are not
// mistaken for convergence), or max_iter. The full trace is returned.
CapacityResult solve_capacity(const Channel& ch, const SolverConfig& cfg = {});

// CSV: iter,mutual_info_nats,upper_bound_nats,beta,delta with 17
// significant digits per value.
void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);

}  // namespace proxit
