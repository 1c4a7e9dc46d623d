// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "proxit/bicm.hpp"
#include "proxit/capacity.hpp"
#include "proxit/channel.hpp"

using namespace proxit;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

Channel paper_channel() {
    Eigen::MatrixXd m(2, 3);
    m << 0.7, 0.2, 0.1,
         0.1, 0.2, 0.7;
    return Channel::from_matrix(m);
}

Channel bsc(double eps) {
    Eigen::MatrixXd m(2, 2);
    m << 1.0 - eps, eps,
         eps, 1.0 - eps;
    return Channel::from_matrix(m);
}

Channel random_channel(std::mt19937_64& eng, int inputs, int outputs) {
    std::uniform_real_distribution<double> u(1e-3, 1.0);
    Eigen::MatrixXd m(outputs, inputs);
    for (int i = 0; i < outputs; ++i) {
        for (int j = 0; j < inputs; ++j) {
            m(i, j) = u(eng);
        }
    }
    for (int j = 0; j < inputs; ++j) {
        m.col(j) /= m.col(j).sum();
    }
    return Channel::from_matrix(m);
}

Eigen::VectorXd random_simplex(std::mt19937_64& eng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = u(eng);
    }
    return v / v.sum();
}

SolverConfig config(Algorithm algo, double tol = 1e-11) {
    SolverConfig cfg;
    cfg.algorithm = algo;
    cfg.tol = tol;
    return cfg;
}

// ---- toy-instance plumbing shared by criteria 6 and 7 ---------------------

int gf2_rank_ref(Eigen::MatrixXi a) {
    int rank = 0;
    for (int c = 0; c < a.cols() && rank < a.rows(); ++c) {
        int pivot = -1;
        for (int r = rank; r < a.rows(); ++r) {
            if (a(r, c)) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) {
            continue;
        }
        a.row(pivot).swap(a.row(rank));
        for (int r = 0; r < a.rows(); ++r) {
            if (r != rank && a(r, c)) {
                for (int cc = 0; cc < a.cols(); ++cc) {
                    a(r, cc) ^= a(rank, cc);
                }
            }
        }
        ++rank;
    }
    return rank;
}

ToyBicmInstance random_instance(std::mt19937_64& eng, int n_bits, double noise_std) {
    const int k = n_bits / 2;
    Eigen::MatrixXi g(k, n_bits);
    do {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < n_bits; ++j) {
                g(i, j) = static_cast<int>(eng() & 1);
            }
        }
    } while (gf2_rank_ref(g) != k);
    std::vector<int> pi(static_cast<std::size_t>(n_bits));
    for (int i = 0; i < n_bits; ++i) {
        pi[static_cast<std::size_t>(i)] = i;
    }
    for (int i = n_bits - 1; i > 0; --i) {
        const int j = static_cast<int>(eng() % static_cast<std::uint64_t>(i + 1));
        std::swap(pi[static_cast<std::size_t>(i)], pi[static_cast<std::size_t>(j)]);
    }
    std::vector<int> message(static_cast<std::size_t>(k));
    for (auto& m : message) {
        m = static_cast<int>(eng() & 1);
    }
    return build_toy_instance(g, pi, gray_4pam(), noise_std, message, eng());
}

struct InstancePair {
    ToyBicmInstance instance;
    DecodeResult classic;
    DecodeResult proximal;
};

// 50 seeded instances cycling N x noise_std; instances where the classic
// decoder limit-cycles (a real BICM-ID failure mode the proximal variant
// avoids) are resampled, since the equivalence claim presupposes that both
// decoders converge.
std::vector<InstancePair> seeded_instances(int count, int& resampled) {
    std::mt19937_64 eng(20260810);
    const int n_bits[] = {4, 6, 8};
    const double noise[] = {0.3, 0.6, 1.0};
    std::vector<InstancePair> out;
    int idx = 0;
    resampled = 0;
    while (static_cast<int>(out.size()) < count) {
        const int n = n_bits[idx % 3];
        const double s = noise[(idx / 3) % 3];
        ++idx;
        ToyBicmInstance inst = random_instance(eng, n, s);
        DecodeResult classic = decode(inst, DecodeMode::Classic, 5000, 1e-10);
        if (!classic.converged) {
            ++resampled;
            continue;
        }
        DecodeResult prox = decode(inst, DecodeMode::Proximal, 60000, 1e-10);
        out.push_back({std::move(inst), std::move(classic), std::move(prox)});
    }
    return out;
}

const std::vector<InstancePair>& instances_50(int& resampled) {
    static int cached_resampled = -1;
    static std::vector<InstancePair> cache = seeded_instances(50, cached_resampled);
    resampled = cached_resampled;
    return cache;
}

// ----------------------------------------------------------------------------

bool run_criterion(int number, const std::string& label, double time_limit_s,
                   const std::function<void(Check&)>& body) {
    Check c;
    const auto start = Clock::now();
    body(c);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (time_limit_s > 0.0 && secs > time_limit_s) {
        c.require(false, "runtime " + std::to_string(secs) + "s exceeds " +
                             std::to_string(time_limit_s) + "s");
    }
    std::printf("%s  criterion %d: %s (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", number,
                label.c_str(), secs, c.ok ? "" : " -- ", c.detail.c_str());
    return c.ok;
}

}  // namespace

int main() {
    bool all_ok = true;

    all_ok &= run_criterion(
        1, "reference-channel iteration counts (classic 20+-2, adaptive <= 7 and <= best Matz)",
        1.0, [](Check& c) {
            Channel ch = paper_channel();
            CapacityResult classic = solve_capacity(ch, config(Algorithm::Classic));
            CapacityResult adaptive = solve_capacity(ch, config(Algorithm::AdaptiveProximal));
            c.require(classic.converged && adaptive.converged, "a run did not converge");
            c.require(classic.iterations >= 18 && classic.iterations <= 22,
                      "classic iterations = " + std::to_string(classic.iterations));
            c.require(adaptive.iterations <= 7,
                      "adaptive iterations = " + std::to_string(adaptive.iterations));
            double cap_min = std::min(classic.capacity_nats, adaptive.capacity_nats);
            double cap_max = std::max(classic.capacity_nats, adaptive.capacity_nats);
            int best_matz = classic.iterations;
            for (double beta : {0.3, 0.5, 0.7}) {
                SolverConfig cfg = config(Algorithm::Matz);
                cfg.fixed_beta = beta;
                CapacityResult matz = solve_capacity(ch, cfg);
                c.require(matz.converged, "matz did not converge");
                best_matz = std::min(best_matz, matz.iterations);
                cap_min = std::min(cap_min, matz.capacity_nats);
                cap_max = std::max(cap_max, matz.capacity_nats);
            }
            c.require(adaptive.iterations <= best_matz,
                      "adaptive slower than best matz (" + std::to_string(best_matz) + ")");
            c.require(cap_max - cap_min <= 1e-9, "capacity spread above 1e-9 nats");
        });

    all_ok &= run_criterion(
        2, "BSC capacity matches 1 - H2(eps) within 1e-9 bits, uniform input within 1e-6 TV", 1.0,
        [](Check& c) {
            for (double eps : {0.01, 0.1, 0.25, 0.45}) {
                CapacityResult r = solve_capacity(bsc(eps));
                const double closed_bits =
                    1.0 + (eps * std::log(eps) + (1.0 - eps) * std::log(1.0 - eps)) /
                              std::numbers::ln2;
                c.require(r.converged, "solver did not converge");
                c.require(std::abs(r.capacity_bits() - closed_bits) <= 1e-9,
                          "capacity error at eps " + std::to_string(eps));
                const double tv = 0.5 * (r.optimal_input.array() - 0.5).abs().sum();
                c.require(tv <= 1e-6, "input TV " + std::to_string(tv));
            }
        });

    all_ok &= run_criterion(
        3, "Bernoulli-Gaussian 10x40 channel: 1e-9 agreement, adaptive strictly faster", 5.0,
        [](Check& c) {
            Channel ch = discretize_bernoulli_gaussian({0.3, 0.01, 1.0, 10, 40});
            CapacityResult classic = solve_capacity(ch, config(Algorithm::Classic));
            CapacityResult matz = solve_capacity(ch, config(Algorithm::Matz));
            CapacityResult adaptive = solve_capacity(ch, config(Algorithm::AdaptiveProximal));
            c.require(classic.converged && matz.converged && adaptive.converged,
                      "a run did not converge");
            const double lo =
                std::min({classic.capacity_nats, matz.capacity_nats, adaptive.capacity_nats});
            const double hi =
                std::max({classic.capacity_nats, matz.capacity_nats, adaptive.capacity_nats});
            c.require(hi - lo <= 1e-9, "capacity spread " + std::to_string(hi - lo));
            c.require(adaptive.iterations < classic.iterations,
                      "adaptive " + std::to_string(adaptive.iterations) + " vs classic " +
                          std::to_string(classic.iterations));
        });

    all_ok &= run_criterion(
        4, "monotone mutual-information ascent and bound sandwich on 100 random channels", 0.0,
        [](Check& c) {
            std::mt19937_64 eng(4040);
            for (int t = 0; t < 100; ++t) {
                const int inputs = 2 + static_cast<int>(eng() % 15);
                const int outputs = 2 + static_cast<int>(eng() % 15);
                Channel ch = random_channel(eng, inputs, outputs);
                for (Algorithm a :
                     {Algorithm::Classic, Algorithm::Matz, Algorithm::AdaptiveProximal}) {
                    CapacityResult r = solve_capacity(ch, config(a));
                    for (std::size_t i = 0; i < r.trace.size(); ++i) {
                        if (i > 0) {
                            c.require(r.trace[i].mutual_info_nats >=
                                          r.trace[i - 1].mutual_info_nats - 1e-12,
                                      "descent at trial " + std::to_string(t));
                        }
                        c.require(r.trace[i].mutual_info_nats <= r.capacity_nats + 1e-12 &&
                                      r.capacity_nats <= r.trace[i].upper_bound_nats + 1e-12,
                                  "bound sandwich broken at trial " + std::to_string(t));
                    }
                }
            }
        });

    all_ok &= run_criterion(
        5, "Jensen penalty positivity on 1000 random triples", 0.0, [](Check& c) {
            std::mt19937_64 eng(5050);
            for (int t = 0; t < 1000; ++t) {
                const int inputs = 2 + static_cast<int>(eng() % 7);
                const int outputs = 2 + static_cast<int>(eng() % 7);
                Channel ch = random_channel(eng, inputs, outputs);
                Eigen::VectorXd p_new = random_simplex(eng, inputs);
                Eigen::VectorXd p_old = random_simplex(eng, inputs);
                c.require(penalty_term(ch, p_new, p_old) >= -1e-12,
                          "negative penalty at trial " + std::to_string(t));
                c.require(penalty_term(ch, p_new, p_new) == 0.0,
                          "nonzero penalty at rest, trial " + std::to_string(t));
            }
        });

    all_ok &= run_criterion(
        6,
        "classic/proximal fixed-point equivalence on 50 seeded instances "
        "(decisions, marginals, well-conditioned LLRs)",
        0.0, [](Check& c) {
            int resampled = 0;
            const auto& pairs = instances_50(resampled);
            const double safe_llr = logit(1.0 - 1e-6);
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const auto& pr = pairs[i];
                c.require(pr.proximal.converged, "proximal did not converge, instance " +
                                                     std::to_string(i));
                c.require(pr.classic.decisions == pr.proximal.decisions,
                          "decision mismatch, instance " + std::to_string(i));
                const Eigen::VectorXd sum_c = pr.classic.lambda1() + pr.classic.lambda2();
                const Eigen::VectorXd sum_p = pr.proximal.lambda1() + pr.proximal.lambda2();
                for (Eigen::Index j = 0; j < sum_c.size(); ++j) {
                    c.require(std::abs(sigmoid(sum_c[j]) - sigmoid(sum_p[j])) <= 1e-6,
                              "posterior marginal gap, instance " + std::to_string(i));
                    // per-block LLRs compare only away from clamp saturation,
                    // where the fixed-point split is well defined
                    if (std::abs(sum_c[j]) <= safe_llr && std::abs(sum_p[j]) <= safe_llr) {
                        c.require(
                            std::abs(pr.classic.lambda1()[j] - pr.proximal.lambda1()[j]) <= 1e-6 &&
                                std::abs(pr.classic.lambda2()[j] - pr.proximal.lambda2()[j]) <=
                                    1e-6,
                            "lambda gap, instance " + std::to_string(i));
                    }
                }
                // mu pinned to zero replays the classic trace bitwise
                DecodeResult zero = decode(pr.instance, DecodeMode::Proximal,
                                           pr.classic.iterations + 10, 1e-10, 0.0);
                c.require(zero.trace.size() == pr.classic.trace.size(),
                          "override-0 trace length, instance " + std::to_string(i));
                for (std::size_t k = 0;
                     k < std::min(zero.trace.size(), pr.classic.trace.size()); ++k) {
                    c.require(zero.trace[k].j_theta_m == pr.classic.trace[k].j_theta_m &&
                                  zero.trace[k].j_theta_c == pr.classic.trace[k].j_theta_c &&
                                  zero.trace[k].max_llr_delta ==
                                      pr.classic.trace[k].max_llr_delta,
                              "override-0 trace mismatch, instance " + std::to_string(i));
                }
            }
            if (resampled > 0) {
                std::printf("      (note: %d instance(s) resampled where classic limit-cycled)\n",
                            resampled);
            }
        });

    all_ok &= run_criterion(
        7, "interleaved cost decrease at mu = 0.99 x bound on the same 50 instances", 0.0,
        [](Check& c) {
            int resampled = 0;
            const auto& pairs = instances_50(resampled);
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const auto& pr = pairs[i];
                const BinaryMatrix B = build_binary_matrix(pr.instance.n_bits);
                double prev_jc = pr.proximal.initial_j_theta_c;
                for (std::size_t k = 0; k < pr.proximal.trace.size(); ++k) {
                    const DecoderTraceRow& row = pr.proximal.trace[k];
                    // J_m(l1^k, l2^{k+1}) <= J_c(l1^k, l2^k)
                    c.require(row.j_theta_m <= prev_jc + 1e-10,
                              "demapper cost rose, instance " + std::to_string(i) + " iter " +
                                  std::to_string(row.k));
                    // J_c(l1^{k+1}, l2^{k+1}) <= J_m(l1^{k+1}, l2^{k+1})
                    const Eigen::VectorXd& l1_old = pr.proximal.lambda1_history[k];
                    const Eigen::VectorXd& l2_old = pr.proximal.lambda2_history[k];
                    const Eigen::VectorXd& l1_new = pr.proximal.lambda1_history[k + 1];
                    const Eigen::VectorXd& l2_new = pr.proximal.lambda2_history[k + 1];
                    const double j_m_at_new = cost_J(pr.instance.theta_m, l1_new, l2_new,
                                                     l1_old + l2_old, row.mu_m, B);
                    c.require(row.j_theta_c <= j_m_at_new + 1e-10,
                              "decoder cost rose, instance " + std::to_string(i) + " iter " +
                                  std::to_string(row.k));
                    prev_jc = row.j_theta_c;
                }
            }
        });

    all_ok &= run_criterion(
        8, "divergence property suite over 1000 random cases", 0.0, [](Check& c) {
            std::mt19937_64 eng(8080);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (int t = 0; t < 1000; ++t) {
                const int n = 2 + static_cast<int>(eng() % 63);
                Eigen::VectorXd p = random_simplex(eng, n);
                Eigen::VectorXd q = random_simplex(eng, n);
                const double kl = kl_divergence(p, q);
                c.require(kl >= 0.0, "negative KL");
                if ((p - q).cwiseAbs().maxCoeff() < 1e-12) {
                    c.require(kl < 1e-12, "KL identity violated");
                } else {
                    c.require(kl > 0.0, "KL zero for distinct inputs");
                }
                c.require(kl_divergence(p, p) == 0.0, "KL(p,p) != 0");

                Eigen::VectorXd r(4), s(4);
                for (int j = 0; j < 4; ++j) {
                    r[j] = unit(eng);
                    s[j] = unit(eng);
                }
                c.require(fermi_dirac_divergence(r, s) >= 0.0, "negative FD");
                c.require(fermi_dirac_divergence(r, r) <= 1e-12, "FD identity violated");

                const double rb = 1e-6 + (1.0 - 2e-6) * unit(eng);
                const double sb = 1e-6 + (1.0 - 2e-6) * unit(eng);
                Eigen::VectorXd r1(1), s1(1), r2(2), s2(2);
                r1 << rb;
                s1 << sb;
                r2 << rb, 1.0 - rb;
                s2 << sb, 1.0 - sb;
                c.require(std::abs(fermi_dirac_divergence(r1, s1) - kl_divergence(r2, s2)) <=
                              1e-12,
                          "single-bit FD/KL mismatch");
            }
            // asymmetry witness
            Eigen::VectorXd a(2), b(2);
            a << 0.5, 0.5;
            b << 0.25, 0.75;
            c.require(kl_divergence(a, b) != kl_divergence(b, a), "no asymmetry witness");
        });

    return all_ok ? 0 : 1;
}
