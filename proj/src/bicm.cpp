#include "proxit/bicm.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "detail/format17.hpp"

namespace proxit {

namespace {

constexpr int kMaxEnumerationBits = 20;
constexpr int kMaxToyBits = 16;

// Standard normal via Box-Muller over mt19937_64. std::normal_distribution
// is implementation-defined, so seeded runs would not be reproducible
// across standard libraries.
class SeededGaussian {
  public:
    explicit SeededGaussian(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;          // [0,1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::mt19937_64 eng_;
};

int gf2_rank(Eigen::MatrixXi a) {
    const Eigen::Index k = a.rows();
    const Eigen::Index n = a.cols();
    Eigen::Index rank = 0;
    for (Eigen::Index c = 0; c < n && rank < k; ++c) {
        Eigen::Index pivot = -1;
        for (Eigen::Index r = rank; r < k; ++r) {
            if (a(r, c)) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) {
            continue;
        }
        a.row(pivot).swap(a.row(rank));
        for (Eigen::Index r = 0; r < k; ++r) {
            if (r != rank && a(r, c)) {
                for (Eigen::Index cc = 0; cc < n; ++cc) {
                    a(r, cc) ^= a(rank, cc);
                }
            }
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

void check_generator(const Eigen::MatrixXi& g) {
    if (g.rows() < 1 || g.cols() < 1 || g.rows() > g.cols()) {
        throw InvalidCode("generator must be k x N with 1 <= k <= N");
    }
    if (((g.array() != 0) && (g.array() != 1)).any()) {
        throw InvalidCode("generator entries must be bits");
    }
    if (gf2_rank(g) != g.rows()) {
        throw InvalidCode("generator is not full rank over GF(2)");
    }
}

BitProbVector separable_marginals_enumerated(const Eigen::Ref<const Eigen::VectorXd>& lambda_sum,
                                             const BinaryMatrix& B) {
    const LogCoords zero = LogCoords::zeros(B.n_words());
    return bit_marginals(dist_from_coords(zero, lambda_sum, B), B);
}

double bound_from(double num, double dsym) {
    if (dsym > num) {
        return std::min(num / (dsym - num), kMuCap);
    }
    return kMuCap;
}

}  // namespace

BinaryMatrix build_binary_matrix(int n_bits) {
    if (n_bits < 1) {
        throw InvalidParams("build_binary_matrix: need at least 1 bit");
    }
    if (n_bits > kMaxEnumerationBits) {
        throw TooLarge("build_binary_matrix: exact enumeration is limited to 20 bits");
    }
    BinaryMatrix b;
    b.n_bits = n_bits;
    const Eigen::Index words = Eigen::Index{1} << n_bits;
    b.rows.resize(words, n_bits);
    for (Eigen::Index i = 0; i < words; ++i) {
        for (int j = 0; j < n_bits; ++j) {
            b.rows(i, j) = static_cast<double>((i >> j) & 1);
        }
    }
    return b;
}

LogCoords LogCoords::zeros(Eigen::Index n_words) {
    LogCoords c;
    c.theta = Eigen::VectorXd::Zero(n_words);
    c.finite = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n_words, true);
    return c;
}

LogCoords LogCoords::separable(const BinaryMatrix& B, const Eigen::Ref<const Eigen::VectorXd>& t) {
    if (t.size() != B.n_bits) {
        throw DimensionMismatch("LogCoords::separable: LLR length mismatch");
    }
    LogCoords c;
    c.theta = B.rows * t;
    c.finite = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(B.n_words(), true);
    return c;
}

LogCoords LogCoords::indicator(const std::vector<std::uint8_t>& valid) {
    LogCoords c;
    const Eigen::Index n = static_cast<Eigen::Index>(valid.size());
    c.theta = Eigen::VectorXd::Zero(n);
    c.finite.resize(n);
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        c.finite[i] = valid[static_cast<std::size_t>(i)] != 0;
        any = any || c.finite[i];
    }
    if (!any) {
        throw AllZero("LogCoords::indicator: no valid word");
    }
    return c;
}

ProbVector dist_from_coords(const LogCoords& coords, const Eigen::Ref<const Eigen::VectorXd>& lambda,
                            const BinaryMatrix& B) {
    if (coords.theta.size() != B.n_words() || coords.finite.size() != B.n_words()) {
        throw DimensionMismatch("dist_from_coords: coordinate length mismatch");
    }
    if (lambda.size() != B.n_bits) {
        throw DimensionMismatch("dist_from_coords: LLR length mismatch");
    }
    Eigen::VectorXd x = coords.theta + B.rows * lambda;

    double shift = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (coords.finite[i] && x[i] > shift) {
            shift = x[i];
        }
    }
    if (!std::isfinite(shift)) {
        throw AllZero("dist_from_coords: every word is excluded");
    }

    ProbVector p = ProbVector::Zero(x.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (coords.finite[i]) {
            p[i] = std::exp(x[i] - shift);
            total += p[i];
        }
    }
    p /= total;
    return p;
}

BitProbVector bit_marginals(const Eigen::Ref<const Eigen::VectorXd>& p, const BinaryMatrix& B) {
    if (p.size() != B.n_words()) {
        throw DimensionMismatch("bit_marginals: distribution length mismatch");
    }
    return B.rows.transpose() * p;
}

BitLlrVector classic_demapper_update(const ProxDecoderState& state, const BinaryMatrix& B) {
    const BitProbVector r = bit_marginals(dist_from_coords(state.theta_m, state.lambda1, B), B);
    BitLlrVector out(r.size());
    for (Eigen::Index j = 0; j < r.size(); ++j) {
        out[j] = logit(r[j]) - state.lambda1[j];
    }
    return out;
}

BitLlrVector classic_decoder_update(const ProxDecoderState& state, const BinaryMatrix& B) {
    const BitProbVector r = bit_marginals(dist_from_coords(state.theta_c, state.lambda2, B), B);
    BitLlrVector out(r.size());
    for (Eigen::Index j = 0; j < r.size(); ++j) {
        out[j] = logit(r[j]) - state.lambda2[j];
    }
    return out;
}

BitLlrVector prox_demapper_update(const ProxDecoderState& state, const BinaryMatrix& B) {
    const BitProbVector r_post = bit_marginals(dist_from_coords(state.theta_m, state.lambda1, B), B);
    const BitProbVector r_prev = separable_marginals_enumerated(state.lambda1 + state.lambda2, B);
    BitLlrVector out(r_post.size());
    for (Eigen::Index j = 0; j < r_post.size(); ++j) {
        const double target = (r_post[j] + state.mu_m * r_prev[j]) / (1.0 + state.mu_m);
        out[j] = logit(target) - state.lambda1[j];
    }
    return out;
}

BitLlrVector prox_decoder_update(const ProxDecoderState& state, const BinaryMatrix& B) {
    const BitProbVector r_post = bit_marginals(dist_from_coords(state.theta_c, state.lambda2, B), B);
    const BitProbVector r_prev = separable_marginals_enumerated(state.lambda1 + state.lambda2, B);
    BitLlrVector out(r_post.size());
    for (Eigen::Index j = 0; j < r_post.size(); ++j) {
        const double target = (r_post[j] + state.mu_c * r_prev[j]) / (1.0 + state.mu_c);
        out[j] = logit(target) - state.lambda2[j];
    }
    return out;
}

double cost_J(const LogCoords& theta, const Eigen::Ref<const Eigen::VectorXd>& lambda_fixed,
              const Eigen::Ref<const Eigen::VectorXd>& lambda_var,
              const Eigen::Ref<const Eigen::VectorXd>& lambda_anchor_sum, double mu,
              const BinaryMatrix& B) {
    const BitProbVector r_post = bit_marginals(dist_from_coords(theta, lambda_fixed, B), B);
    const BitProbVector m = separable_marginals_enumerated(lambda_fixed + lambda_var, B);
    double j = fermi_dirac_divergence(r_post, m);
    const BitProbVector r_anchor = separable_marginals_enumerated(lambda_anchor_sum, B);
    j += mu * fermi_dirac_divergence(r_anchor, m);
    return j;
}

double mu_m_bound(const ProxDecoderState& state, const BinaryMatrix& B) {
    const BitProbVector m = separable_marginals_enumerated(state.lambda1 + state.lambda2, B);
    const BitProbVector r_c = bit_marginals(dist_from_coords(state.theta_c, state.lambda2, B), B);
    const BitProbVector r_m = bit_marginals(dist_from_coords(state.theta_m, state.lambda1, B), B);
    const double num = fermi_dirac_divergence(r_c, m);
    const double dsym = symmetric_fd_distance(r_m, m);
    return bound_from(num, dsym);
}

double mu_c_bound(const ProxDecoderState& state, const BinaryMatrix& B) {
    const BitProbVector m = separable_marginals_enumerated(state.lambda1 + state.lambda2, B);
    const BitProbVector r_m = bit_marginals(dist_from_coords(state.theta_m, state.lambda1, B), B);
    const BitProbVector r_c = bit_marginals(dist_from_coords(state.theta_c, state.lambda2, B), B);
    const double num = fermi_dirac_divergence(r_m, m);
    const double dsym = symmetric_fd_distance(r_c, m);
    return bound_from(num, dsym);
}

Eigen::VectorXd gray_4pam() {
    Eigen::VectorXd amp(4);
    // label = b0 + 2 b1; adjacent amplitudes differ in exactly one bit
    amp << -3.0, -1.0, 3.0, 1.0;
    return amp / std::sqrt(5.0);
}

Eigen::MatrixXi default_generator(int n_bits) {
    if (n_bits < 2 || n_bits % 2 != 0) {
        throw InvalidParams("default_generator: n_bits must be even and >= 2");
    }
    const int k = n_bits / 2;
    Eigen::MatrixXi g = Eigen::MatrixXi::Zero(k, n_bits);
    for (int i = 0; i < k; ++i) {
        g(i, i) = 1;
        for (int j = 0; j < k; ++j) {
            g(i, k + j) = (i + j < k) ? 1 : 0;
        }
    }
    return g;
}

std::vector<int> identity_interleaver(int n_bits) {
    std::vector<int> pi(static_cast<std::size_t>(n_bits));
    for (int i = 0; i < n_bits; ++i) {
        pi[static_cast<std::size_t>(i)] = i;
    }
    return pi;
}

ToyBicmInstance build_toy_instance(const Eigen::MatrixXi& generator,
                                   const std::vector<int>& interleaver,
                                   const Eigen::Ref<const Eigen::VectorXd>& constellation,
                                   double noise_std, const std::vector<int>& message,
                                   std::uint64_t seed) {
    check_generator(generator);
    const int k = static_cast<int>(generator.rows());
    const int n = static_cast<int>(generator.cols());
    if (n > kMaxToyBits) {
        throw TooLarge("build_toy_instance: word length limited to 16 bits");
    }

    const Eigen::Index points = constellation.size();
    int bps = 0;
    while ((Eigen::Index{1} << (bps + 1)) <= points) {
        ++bps;
    }
    if (points < 2 || (Eigen::Index{1} << bps) != points) {
        throw InvalidParams("constellation size must be a power of two >= 2");
    }
    if (n % bps != 0) {
        throw SizeMismatch("word length must be a multiple of bits per symbol");
    }
    if (static_cast<int>(interleaver.size()) != n) {
        throw SizeMismatch("interleaver length must equal the word length");
    }
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
    for (int v : interleaver) {
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) {
            throw InvalidCode("interleaver is not a permutation");
        }
        seen[static_cast<std::size_t>(v)] = 1;
    }
    if (static_cast<int>(message.size()) != k) {
        throw SizeMismatch("message length must equal the generator rank");
    }
    if (!(noise_std > 0.0)) {
        throw InvalidParams("noise_std must be positive");
    }

    ToyBicmInstance inst;
    inst.n_bits = n;
    inst.bits_per_symbol = bps;
    inst.generator = generator;
    inst.interleaver = interleaver;
    inst.constellation = constellation;
    inst.noise_std = noise_std;

    // encode, interleave (d_j = c_{pi(j)})
    std::vector<int> code(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
        int acc = 0;
        for (int i = 0; i < k; ++i) {
            acc ^= (message[static_cast<std::size_t>(i)] & 1) & generator(i, j);
        }
        code[static_cast<std::size_t>(j)] = acc;
    }
    inst.transmitted.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        inst.transmitted[static_cast<std::size_t>(j)] =
            static_cast<std::uint8_t>(code[static_cast<std::size_t>(interleaver[static_cast<std::size_t>(j)])]);
    }

    // map and add seeded noise
    const int n_sym = n / bps;
    auto label_of = [&](Eigen::Index word, int t) {
        int label = 0;
        for (int u = 0; u < bps; ++u) {
            label |= static_cast<int>((word >> (t * bps + u)) & 1) << u;
        }
        return label;
    };
    Eigen::Index sent_word = 0;
    for (int j = 0; j < n; ++j) {
        sent_word |= static_cast<Eigen::Index>(inst.transmitted[static_cast<std::size_t>(j)]) << j;
    }
    SeededGaussian noise(seed);
    inst.received.resize(n_sym);
    for (int t = 0; t < n_sym; ++t) {
        inst.received[t] = constellation[label_of(sent_word, t)] + noise_std * noise();
    }

    // theta_m: per-symbol log-likelihood table, referenced to word 0
    const Eigen::Index words = Eigen::Index{1} << n;
    Eigen::MatrixXd sym_llr(n_sym, points);
    const double inv_two_var = 1.0 / (2.0 * noise_std * noise_std);
    for (int t = 0; t < n_sym; ++t) {
        const double ref = inst.received[t] - constellation[0];
        for (Eigen::Index l = 0; l < points; ++l) {
            const double d = inst.received[t] - constellation[l];
            sym_llr(t, l) = (ref * ref - d * d) * inv_two_var;
        }
    }
    inst.theta_m = LogCoords::zeros(words);
    for (Eigen::Index i = 0; i < words; ++i) {
        double acc = 0.0;
        for (int t = 0; t < n_sym; ++t) {
            acc += sym_llr(t, label_of(i, t));
        }
        inst.theta_m.theta[i] = acc;
    }

    // theta_c: indicator of interleaved codewords
    inst.valid_word.assign(static_cast<std::size_t>(words), 0);
    for (Eigen::Index msg = 0; msg < (Eigen::Index{1} << k); ++msg) {
        Eigen::Index word = 0;
        for (int j = 0; j < n; ++j) {
            int acc = 0;
            for (int i = 0; i < k; ++i) {
                acc ^= static_cast<int>((msg >> i) & 1) & generator(i, interleaver[static_cast<std::size_t>(j)]);
            }
            word |= static_cast<Eigen::Index>(acc) << j;
        }
        inst.valid_word[static_cast<std::size_t>(word)] = 1;
    }
    inst.theta_c = LogCoords::indicator(inst.valid_word);
    return inst;
}

DecodeResult decode(const ToyBicmInstance& instance, DecodeMode mode, int max_iter,
                    double conv_tol, std::optional<double> mu_override) {
    if (max_iter < 1) {
        throw InvalidParams("decode: max_iter must be positive");
    }
    const BinaryMatrix B = build_binary_matrix(instance.n_bits);

    ProxDecoderState state;
    state.lambda1 = BitLlrVector::Zero(instance.n_bits);
    state.lambda2 = BitLlrVector::Zero(instance.n_bits);
    state.theta_m = instance.theta_m;
    state.theta_c = instance.theta_c;

    DecodeResult result;
    result.lambda1_history.push_back(state.lambda1);
    result.lambda2_history.push_back(state.lambda2);
    result.initial_j_theta_m =
        cost_J(state.theta_m, state.lambda1, state.lambda2, state.lambda1 + state.lambda2, 0.0, B);
    result.initial_j_theta_c =
        cost_J(state.theta_c, state.lambda2, state.lambda1, state.lambda1 + state.lambda2, 0.0, B);

    const bool proximal = mode == DecodeMode::Proximal;
    for (int k = 1; k <= max_iter; ++k) {
        const BitLlrVector sum_old = state.lambda1 + state.lambda2;

        if (!proximal) {
            state.mu_m = 0.0;
        } else if (mu_override) {
            state.mu_m = *mu_override;
        } else {
            state.mu_m = kMuSafety * mu_m_bound(state, B);
        }
        const BitLlrVector lambda2_next = prox_demapper_update(state, B);
        const double j_m =
            cost_J(state.theta_m, state.lambda1, lambda2_next, sum_old, state.mu_m, B);
        state.lambda2 = lambda2_next;

        if (!proximal) {
            state.mu_c = 0.0;
        } else if (mu_override) {
            state.mu_c = *mu_override;
        } else {
            state.mu_c = kMuSafety * mu_c_bound(state, B);
        }
        const BitLlrVector lambda1_next = prox_decoder_update(state, B);
        const double j_c = cost_J(state.theta_c, state.lambda2, lambda1_next,
                                  state.lambda1 + state.lambda2, state.mu_c, B);
        state.lambda1 = lambda1_next;

        const double delta = (state.lambda1 + state.lambda2 - sum_old).cwiseAbs().maxCoeff();
        state.cost_trace.emplace_back(j_m, j_c);
        result.trace.push_back({k, j_m, j_c, state.mu_m, state.mu_c, delta});
        result.lambda1_history.push_back(state.lambda1);
        result.lambda2_history.push_back(state.lambda2);
        result.iterations = k;
        if (delta <= conv_tol) {
            result.converged = true;
            break;
        }
    }

    const BitLlrVector posterior = state.lambda1 + state.lambda2;
    result.decisions.resize(static_cast<std::size_t>(instance.n_bits));
    for (int j = 0; j < instance.n_bits; ++j) {
        result.decisions[static_cast<std::size_t>(j)] = posterior[j] > 0.0 ? 1 : 0;
    }
    return result;
}

void write_decoder_trace_csv(std::ostream& out, const std::vector<DecoderTraceRow>& trace) {
    out << "iter,J_theta_m,J_theta_c,mu_m,mu_c,max_llr_delta\n";
    for (const DecoderTraceRow& r : trace) {
        out << r.k << ',' << detail::format17(r.j_theta_m) << ',' << detail::format17(r.j_theta_c)
            << ',' << detail::format17(r.mu_m) << ',' << detail::format17(r.mu_c) << ','
            << detail::format17(r.max_llr_delta) << '\n';
    }
}

InstanceSpec read_instance_spec(std::istream& in) {
    InstanceSpec spec;
    std::vector<std::string> gen_rows;
    std::vector<int> perm;
    bool have_perm = false;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "generator") {
            std::string row;
            while (ls >> row) {
                gen_rows.push_back(row);
            }
            if (gen_rows.empty()) {
                throw ParseError(line_no, "generator needs at least one bit-string row");
            }
        } else if (key == "permutation") {
            int v = 0;
            while (ls >> v) {
                perm.push_back(v);
            }
            have_perm = true;
        } else if (key == "noise_std") {
            if (!(ls >> spec.noise_std)) {
                throw ParseError(line_no, "noise_std needs a float");
            }
        } else if (key == "seed") {
            if (!(ls >> spec.seed)) {
                throw ParseError(line_no, "seed needs an integer");
            }
        } else {
            throw ParseError(line_no, "unknown directive '" + key + "'");
        }
    }
    if (gen_rows.empty()) {
        throw ParseError(line_no + 1, "missing generator directive");
    }
    const std::size_t n = gen_rows.front().size();
    spec.generator.resize(static_cast<Eigen::Index>(gen_rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < gen_rows.size(); ++r) {
        if (gen_rows[r].size() != n) {
            throw ParseError(line_no, "generator rows must share one length");
        }
        for (std::size_t c = 0; c < n; ++c) {
            const char ch = gen_rows[r][c];
            if (ch != '0' && ch != '1') {
                throw ParseError(line_no, "generator rows must be bit strings");
            }
            spec.generator(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ch - '0';
        }
    }
    spec.interleaver = have_perm ? perm : identity_interleaver(static_cast<int>(n));
    return spec;
}

InstanceSpec load_instance_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open instance file: " + path);
    }
    return read_instance_spec(in);
}

}  // namespace proxit
