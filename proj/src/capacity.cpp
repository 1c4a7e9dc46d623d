#include "proxit/capacity.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "detail/format17.hpp"

namespace proxit {

namespace {

// BA keeps interior points interior; the floor only guards fp underflow.
constexpr double kProbFloor = 1e-300;

Eigen::VectorXd divergences_at(const Channel& ch, const ProbVector& q) {
    Eigen::VectorXd d(ch.input_size());
    for (Eigen::Index j = 0; j < ch.input_size(); ++j) {
        d[j] = kl_divergence(ch.matrix().col(j), q);
    }
    return d;
}

ProbVector ba_step_given_divergences(const Eigen::Ref<const Eigen::VectorXd>& p,
                                     const Eigen::VectorXd& d, double beta) {
    Eigen::VectorXd t(p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        t[j] = std::log(std::max(p[j], kProbFloor)) + d[j] / beta;
    }
    const double shift = t.maxCoeff();
    Eigen::VectorXd e = (t.array() - shift).exp();
    return e / e.sum();
}

// Deterministic full-support start. A ramp rather than the uniform vector:
// on symmetric channels the uniform input is already capacity-achieving, so
// it hides the iteration behaviour entirely.
ProbVector ramp_init(Eigen::Index m) {
    Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(m, 1.0, static_cast<double>(m));
    return p / p.sum();
}

struct BoundsAt {
    Eigen::VectorXd d;
    double lower = 0.0;
    double upper = 0.0;
};

BoundsAt bounds_at(const Channel& ch, const ProbVector& p) {
    BoundsAt b;
    b.d = divergences_at(ch, ch.matrix() * p);
    b.lower = p.dot(b.d);
    b.upper = b.d.maxCoeff();
    return b;
}

BetaChoice select_beta_given(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p,
                             const Eigen::VectorXd& d, const BetaSearch& search) {
    constexpr double kInvPhi = 0.6180339887498949;

    double best_gain = -std::numeric_limits<double>::infinity();
    BetaChoice best;
    auto consider = [&](double beta, const ProbVector& pb) {
        const double gain = mutual_information(ch, pb);
        if (gain > best_gain) {
            best_gain = gain;
            best = {beta, pb};
        }
    };

    double a = search.beta_min;
    double b = search.beta_max;
    if (b - a > search.search_tol) {
        double c = b - kInvPhi * (b - a);
        double e = a + kInvPhi * (b - a);
        ProbVector pc = ba_step_given_divergences(p, d, c);
        ProbVector pe = ba_step_given_divergences(p, d, e);
        double gc = mutual_information(ch, pc);
        double ge = mutual_information(ch, pe);
        consider(c, pc);
        consider(e, pe);
        while (b - a > search.search_tol) {
            if (gc < ge) {
                a = c;
                c = e;
                gc = ge;
                e = a + kInvPhi * (b - a);
                pe = ba_step_given_divergences(p, d, e);
                ge = mutual_information(ch, pe);
                consider(e, pe);
            } else {
                b = e;
                e = c;
                ge = gc;
                c = b - kInvPhi * (b - a);
                pc = ba_step_given_divergences(p, d, c);
                gc = mutual_information(ch, pc);
                consider(c, pc);
            }
        }
    }
    const double mid = 0.5 * (a + b);
    consider(mid, ba_step_given_divergences(p, d, mid));

    // Never worse than the classic step.
    ProbVector p1 = ba_step_given_divergences(p, d, 1.0);
    if (mutual_information(ch, p1) > best_gain) {
        return {1.0, std::move(p1)};
    }
    return best;
}

}  // namespace

double CapacityResult::capacity_bits() const {
    return capacity_nats / std::numbers::ln2;
}

ProbVector ba_step(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p, double beta) {
    if (p.size() != ch.input_size()) {
        throw DimensionMismatch("ba_step: input distribution length mismatch");
    }
    if (!(beta > 0.0)) {
        throw InvalidParams("ba_step: beta must be positive");
    }
    return ba_step_given_divergences(p, divergences_at(ch, ch.matrix() * p), beta);
}

double penalty_term(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p_new,
                    const Eigen::Ref<const Eigen::VectorXd>& p_old) {
    if (p_new.size() != ch.input_size() || p_old.size() != ch.input_size()) {
        throw DimensionMismatch("penalty_term: input distribution length mismatch");
    }
    const double dp = kl_divergence(p_new, p_old);
    const double dq = kl_divergence(ch.matrix() * p_new, ch.matrix() * p_old);
    return dp - dq;
}

BetaChoice select_beta(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p,
                       const SolverConfig& cfg) {
    if (p.size() != ch.input_size()) {
        throw DimensionMismatch("select_beta: input distribution length mismatch");
    }
    const BetaSearch& s = cfg.beta_search;
    if (!(s.beta_min > 0.0) || !(s.beta_min <= s.beta_max)) {
        throw InvalidParams("select_beta: need 0 < beta_min <= beta_max");
    }
    return select_beta_given(ch, p, divergences_at(ch, ch.matrix() * p), s);
}

std::pair<double, double> capacity_bounds(const Channel& ch,
                                          const Eigen::Ref<const Eigen::VectorXd>& p) {
    if (p.size() != ch.input_size()) {
        throw DimensionMismatch("capacity_bounds: input distribution length mismatch");
    }
    const BoundsAt b = bounds_at(ch, p);
    return {b.lower, b.upper};
}

CapacityResult solve_capacity(const Channel& ch, const SolverConfig& cfg) {
    if (!(cfg.tol > 0.0)) {
        throw InvalidParams("solve_capacity: tol must be positive");
    }
    if (cfg.max_iter < 1) {
        throw InvalidParams("solve_capacity: max_iter must be positive");
    }
    const double fixed_beta = cfg.fixed_beta.value_or(0.5);
    if (cfg.algorithm == Algorithm::Matz && !(fixed_beta > 0.0)) {
        throw InvalidParams("solve_capacity: fixed_beta must be positive");
    }

    ProbVector p;
    if (cfg.initial_input.size() == 0) {
        p = ramp_init(ch.input_size());
    } else {
        if (cfg.initial_input.size() != ch.input_size()) {
            throw DimensionMismatch("solve_capacity: initial input length mismatch");
        }
        validate_prob_vector(cfg.initial_input);
        if (cfg.initial_input.minCoeff() <= 0.0) {
            throw InvalidParams("solve_capacity: initial input must have full support");
        }
        p = cfg.initial_input;
    }
    double prev_info = mutual_information(ch, p);
    const double stall_tol = std::sqrt(cfg.tol);

    CapacityResult result;
    result.trace.reserve(64);
    for (int k = 1; k <= cfg.max_iter; ++k) {
        const Eigen::VectorXd d = divergences_at(ch, ch.matrix() * p);
        const ProbVector prev = p;
        double beta_used = 1.0;
        switch (cfg.algorithm) {
            case Algorithm::Classic:
                p = ba_step_given_divergences(p, d, 1.0);
                break;
            case Algorithm::Matz:
                beta_used = fixed_beta;
                p = ba_step_given_divergences(p, d, fixed_beta);
                break;
            case Algorithm::AdaptiveProximal: {
                BetaChoice choice = select_beta_given(ch, p, d, cfg.beta_search);
                beta_used = choice.beta;
                p = std::move(choice.next);
                break;
            }
        }

        const BoundsAt b = bounds_at(ch, p);
        const double delta = std::abs(b.lower - prev_info);
        result.trace.push_back({k, b.lower, b.upper, beta_used, delta});
        result.capacity_nats = b.lower;
        result.iterations = k;

        if (b.upper - b.lower <= cfg.tol) {
            result.converged = true;
            result.stop_reason = StopReason::BoundGap;
            break;
        }
        // the movement guard rejects cycles whose phases share one mutual
        // information value (an overshooting fixed beta can mirror forever)
        if (delta <= cfg.tol && (p - prev).cwiseAbs().maxCoeff() <= stall_tol) {
            result.converged = true;
            result.stop_reason = StopReason::Delta;
            break;
        }
        prev_info = b.lower;
    }
    result.optimal_input = std::move(p);
    return result;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
    out << "iter,mutual_info_nats,upper_bound_nats,beta,delta\n";
    for (const IterationRecord& r : trace) {
        out << r.k << ',' << detail::format17(r.mutual_info_nats) << ','
            << detail::format17(r.upper_bound_nats) << ',' << detail::format17(r.beta_used) << ','
            << detail::format17(r.delta) << '\n';
    }
}

}  // namespace proxit
