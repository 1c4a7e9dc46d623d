#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proxit/prob.hpp"

namespace proxit {

// Per-bit log ratios lambda_j = ln(P(bit_j = 1) / P(bit_j = 0)).
using BitLlrVector = Eigen::VectorXd;

// All 2^N bit words of length N, LSB first: row i, bit j = (i >> j) & 1.
struct BinaryMatrix {
    int n_bits = 0;
    Eigen::MatrixXd rows;  // 2^N x N, entries 0/1

    Eigen::Index n_words() const { return rows.rows(); }
};

// 1 <= n_bits <= 20 (exact enumeration bound); throws TooLarge beyond.
BinaryMatrix build_binary_matrix(int n_bits);

// Logarithmic coordinates of a 2^N-word distribution relative to word 0:
// theta_i = ln P(word i) - ln P(word 0). Entries may be -inf (excluded
// words); those are kept as an explicit mask, never as large negative
// floats. theta[0] = 0 whenever word 0 is included.
struct LogCoords {
    Eigen::VectorXd theta;                        // finite values; ignored where !finite
    Eigen::Array<bool, Eigen::Dynamic, 1> finite;

    static LogCoords zeros(Eigen::Index n_words);
    // theta = B t: the coordinates of the separable distribution with
    // per-bit LLRs t.
    static LogCoords separable(const BinaryMatrix& B, const Eigen::Ref<const Eigen::VectorXd>& t);
    // Uniform over the marked words, -inf elsewhere (code indicator).
    static LogCoords indicator(const std::vector<std::uint8_t>& valid);
};

// p_i proportional to exp(theta_i + B_i . lambda); masked-out words get
// probability 0. Throws AllZero when no word is included.
ProbVector dist_from_coords(const LogCoords& coords, const Eigen::Ref<const Eigen::VectorXd>& lambda,
                            const BinaryMatrix& B);

// Marginal P(bit_j = 1) = sum over words with bit j set; equals B^T p.
BitProbVector bit_marginals(const Eigen::Ref<const Eigen::VectorXd>& p, const BinaryMatrix& B);

// State carried across the demapper/decoder alternation.
struct ProxDecoderState {
    BitLlrVector lambda1;  // decoder -> demapper prior
    BitLlrVector lambda2;  // demapper -> decoder prior
    LogCoords theta_m;     // channel/mapping evidence
    LogCoords theta_c;     // code indicator
    double mu_m = 0.0;
    double mu_c = 0.0;
    std::vector<std::pair<double, double>> cost_trace;  // (J_theta_m, J_theta_c)
};

// Extrinsic fixed-point updates: the returned LLRs make the separable
// distribution's bit marginals match the block posterior's exactly.
BitLlrVector classic_demapper_update(const ProxDecoderState& state, const BinaryMatrix& B);
BitLlrVector classic_decoder_update(const ProxDecoderState& state, const BinaryMatrix& B);

// Proximal updates: the target marginals blend the block posterior with
// the previous separable iterate, (r_post + mu r_prev) / (1 + mu).
// mu = 0 reduces to the classic updates bit for bit.
BitLlrVector prox_demapper_update(const ProxDecoderState& state, const BinaryMatrix& B);
BitLlrVector prox_decoder_update(const ProxDecoderState& state, const BinaryMatrix& B);

// J(lambda_var) = D_FD(marg p_{B lambda_fixed + theta}, marg p_{B(lambda_fixed+lambda_var)})
//              + mu D_FD(marg p_{B lambda_anchor_sum}, marg p_{B(lambda_fixed+lambda_var)})
// where lambda_anchor_sum is the summed LLR pair of the previous iterate.
double cost_J(const LogCoords& theta, const Eigen::Ref<const Eigen::VectorXd>& lambda_fixed,
              const Eigen::Ref<const Eigen::VectorXd>& lambda_var,
              const Eigen::Ref<const Eigen::VectorXd>& lambda_anchor_sum, double mu,
              const BinaryMatrix& B);

// Vacuous-denominator cap for the mu bounds and the safety factor applied
// by decode (mu = kMuSafety * bound keeps the inequalities strict).
inline constexpr double kMuCap = 100.0;
inline constexpr double kMuSafety = 0.99;

// Largest mu_m preserving J_{theta_m}(l1, l2') <= J_{theta_c}(l1, l2):
// num / (D - num) with num the decoder-posterior mismatch and D the
// symmetric demapper mismatch; kMuCap when D <= num (any mu works).
double mu_m_bound(const ProxDecoderState& state, const BinaryMatrix& B);

// Mirrored bound for the decoder update, roles of the blocks swapped.
double mu_c_bound(const ProxDecoderState& state, const BinaryMatrix& B);

// ---- desk-scale toy BICM system ------------------------------------------

// Gray-labelled 4-PAM at unit average energy, indexed by label b0 + 2 b1.
Eigen::VectorXd gray_4pam();

// Systematic [I_k | P] generator with P(i,j) = 1 iff i + j < k; for
// n_bits = 4 this is rows (1,0,1,1), (0,1,1,0).
Eigen::MatrixXi default_generator(int n_bits);

std::vector<int> identity_interleaver(int n_bits);

struct ToyBicmInstance {
    int n_bits = 0;
    int bits_per_symbol = 2;
    Eigen::MatrixXi generator;            // k x N over GF(2)
    std::vector<int> interleaver;         // d_j = c_{pi(j)}
    Eigen::VectorXd constellation;        // amplitude by label
    Eigen::VectorXd received;             // one observation per symbol
    double noise_std = 1.0;
    std::vector<std::uint8_t> valid_word; // 2^N mask, code after interleaving
    std::vector<std::uint8_t> transmitted; // interleaved bits on the wire
    LogCoords theta_m;
    LogCoords theta_c;
};

// Encodes message with the generator, interleaves, maps to symbols, adds
// seeded Gaussian noise, and precomputes theta_m (channel likelihoods) and
// theta_c (code indicator). N = generator cols = symbols * bits_per_symbol,
// N <= 16.
ToyBicmInstance build_toy_instance(const Eigen::MatrixXi& generator,
                                   const std::vector<int>& interleaver,
                                   const Eigen::Ref<const Eigen::VectorXd>& constellation,
                                   double noise_std, const std::vector<int>& message,
                                   std::uint64_t seed);

enum class DecodeMode { Classic, Proximal };

struct DecoderTraceRow {
    int k = 0;
    double j_theta_m = 0.0;
    double j_theta_c = 0.0;
    double mu_m = 0.0;
    double mu_c = 0.0;
    double max_llr_delta = 0.0;
};

struct DecodeResult {
    std::vector<std::uint8_t> decisions;  // hard bit decisions, interleaved order
    int iterations = 0;
    bool converged = false;
    std::vector<DecoderTraceRow> trace;
    // Costs of the all-zero initial state (mu = 0 data-fit terms).
    double initial_j_theta_m = 0.0;
    double initial_j_theta_c = 0.0;
    // lambda after each iteration; index 0 is the initial all-zero state.
    std::vector<BitLlrVector> lambda1_history;
    std::vector<BitLlrVector> lambda2_history;

    const BitLlrVector& lambda1() const { return lambda1_history.back(); }
    const BitLlrVector& lambda2() const { return lambda2_history.back(); }
};

// Alternates demapper/decoder updates from lambda = 0. Proximal mode takes
// mu = kMuSafety * bound each half-step unless mu_override pins both.
// Stops when max_j |Delta(lambda1 + lambda2)_j| <= conv_tol.
DecodeResult decode(const ToyBicmInstance& instance, DecodeMode mode, int max_iter = 200,
                    double conv_tol = 1e-9, std::optional<double> mu_override = std::nullopt);

// CSV: iter,J_theta_m,J_theta_c,mu_m,mu_c,max_llr_delta (17 significant digits).
void write_decoder_trace_csv(std::ostream& out, const std::vector<DecoderTraceRow>& trace);

// Instance description file: '#' comments plus directives
//   generator <row bit strings...>, permutation <ints...>,
//   noise_std <float>, seed <int>.
struct InstanceSpec {
    Eigen::MatrixXi generator;
    std::vector<int> interleaver;
    double noise_std = 1.0;
    std::uint64_t seed = 0;
};
InstanceSpec read_instance_spec(std::istream& in);
InstanceSpec load_instance_spec(const std::string& path);

}  // namespace proxit
