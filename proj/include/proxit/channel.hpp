#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

#include "proxit/prob.hpp"

namespace proxit {

// Discrete memoryless channel. Stored column-stochastic: entry (i,j) is
// Pr(Y = y_i | X = x_j), so every column is the output distribution of one
// input letter.
class Channel {
  public:
    // Accepts either orientation. If every column of m sums to 1 (within
    // kStochasticTol) the matrix is taken as stored, columns = inputs.
    // Otherwise, if every row sums to 1, rows are taken as the per-input
    // distributions and the transpose is stored. Anything else throws
    // NotStochastic; negative entries throw NegativeEntry.
    static Channel from_matrix(const Eigen::MatrixXd& m);

    // Rows are the per-input output distributions (the text-file layout).
    static Channel from_input_rows(const Eigen::MatrixXd& rows);

    Eigen::Index input_size() const { return q_.cols(); }
    Eigen::Index output_size() const { return q_.rows(); }
    const Eigen::MatrixXd& matrix() const { return q_; }

    static constexpr double kStochasticTol = 1e-9;

  private:
    explicit Channel(Eigen::MatrixXd q) : q_(std::move(q)) {}
    Eigen::MatrixXd q_;
};

// Bernoulli-Gaussian impulsive-noise channel: y = x + n with
// n ~ (1-p) N(0, sigma_b^2) + p N(0, sigma_b^2 + sigma_g^2).
struct BernoulliGaussianParams {
    double p_impulse = 0.3;
    double sigma_b = 0.01;
    double sigma_g = 1.0;
    int input_levels = 10;
    int output_bins = 40;
};

// q = Q p, the output distribution induced by input distribution p.
ProbVector output_marginal(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p);

// D_x = KL(column j of Q || q), the divergence of input j's output law
// from the marginal q.
double conditional_divergence(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& q,
                              Eigen::Index j);

// I(p, Q) = sum_j p_j KL(Q_j || Qp) in nats.
double mutual_information(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p);

// Quantizes the Bernoulli-Gaussian channel: input amplitudes uniformly
// spaced on [-1, 1]; output bins split [x_min - 4*sigma_max, x_max + 4*sigma_max]
// evenly with the outer bins extended to +-inf, so columns sum to 1 by CDF
// telescoping.
Channel discretize_bernoulli_gaussian(const BernoulliGaussianParams& params);

// Text format: '#' comment lines; one header line "inputs outputs"; then
// `inputs` lines of `outputs` floats, line j = Pr(Y=. | X=x_j), each
// summing to 1 within 1e-9. Throws ParseError with a 1-based line number.
Channel read_channel(std::istream& in);
Channel load_channel(const std::string& path);
void write_channel(std::ostream& out, const Channel& ch);
void save_channel(const std::string& path, const Channel& ch);

}  // namespace proxit
