#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "proxit/errors.hpp"

namespace proxit {

// A distribution on a finite alphabet: non-negative entries summing to 1.
using ProbVector = Eigen::VectorXd;

// Per-bit probabilities P(x_i = 1), entries in [0,1].
using BitProbVector = Eigen::VectorXd;

// Second divergence arguments are clamped into [kEpsClamp, 1 - kEpsClamp]
// so that code-indicator zeros never produce log(0).
inline constexpr double kEpsClamp = 1e-12;

// Simplex membership tolerance for ProbVector validation.
inline constexpr double kSimplexTol = 1e-12;

inline double clamp_unit(double s) {
    return std::min(std::max(s, kEpsClamp), 1.0 - kEpsClamp);
}

// log(P(bit=1)/P(bit=0)); argument clamped into the open unit interval.
// Antisymmetric about 0.5 exactly: the complement 1-p is computed where it
// is representable without cancellation.
inline double logit(double p) {
    if (p > 0.5) {
        return -logit(1.0 - p);
    }
    const double c = std::max(p, kEpsClamp);
    return std::log(c) - std::log1p(-c);
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(sum_i exp(x[i])), shifted by the max entry. -inf entries contribute 0.
template <typename Derived>
double log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
    const double m = x.maxCoeff();
    if (!std::isfinite(m)) {
        return m;
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        acc += std::exp(x[i] - m);
    }
    return m + std::log(acc);
}

template <typename Derived>
bool is_prob_vector(const Eigen::MatrixBase<Derived>& v, double tol = kSimplexTol) {
    if (v.size() == 0 || v.minCoeff() < 0.0) {
        return false;
    }
    return std::abs(v.sum() - 1.0) <= tol;
}

template <typename Derived>
void validate_prob_vector(const Eigen::MatrixBase<Derived>& v) {
    if (v.size() == 0) {
        throw DimensionMismatch("empty probability vector");
    }
    if (v.minCoeff() < 0.0) {
        throw NegativeEntry("probability vector has a negative entry");
    }
    if (std::abs(v.sum() - 1.0) > kSimplexTol) {
        throw NotStochastic("probability vector does not sum to 1");
    }
}

// Kullback-Leibler divergence sum_i p_i ln(p_i/q_i) in nats.
// Zeros in p contribute nothing (0 ln 0 = 0, including 0 ln(0/0));
// p_i > 0 with q_i = 0 is a support violation.
template <typename DP, typename DQ>
double kl_divergence(const Eigen::MatrixBase<DP>& p, const Eigen::MatrixBase<DQ>& q) {
    if (p.size() != q.size()) {
        throw DimensionMismatch("kl_divergence: length mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double pi = p[i];
        if (pi > 0.0) {
            const double qi = q[i];
            if (qi <= 0.0) {
                throw SupportViolation("kl_divergence: p has mass where q is zero");
            }
            acc += pi * std::log(pi / qi);
        }
    }
    return acc;
}

// Bitwise KL divergence over two-outcome events:
//   sum_i r_i ln(r_i/s_i) + (1-r_i) ln((1-r_i)/(1-s_i)).
// s entries are clamped into [kEpsClamp, 1-kEpsClamp]; exact 0/1 in r follow
// the 0 ln 0 = 0 convention.
template <typename DR, typename DS>
double fermi_dirac_divergence(const Eigen::MatrixBase<DR>& r, const Eigen::MatrixBase<DS>& s) {
    if (r.size() != s.size()) {
        throw DimensionMismatch("fermi_dirac_divergence: length mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double ri = r[i];
        // clamp s_i and its complement separately: forming 1 - s in doubles
        // first would cancel catastrophically next to the clamp boundary
        if (ri > 0.0) {
            acc += ri * std::log(ri / std::max(s[i], kEpsClamp));
        }
        if (ri < 1.0) {
            acc += (1.0 - ri) * std::log((1.0 - ri) / std::max(1.0 - s[i], kEpsClamp));
        }
    }
    return acc;
}

// D_FD(a,b) + D_FD(b,a); symmetric in its arguments.
template <typename DA, typename DB>
double symmetric_fd_distance(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    return fermi_dirac_divergence(a, b) + fermi_dirac_divergence(b, a);
}

}  // namespace proxit
