#include "proxit/channel.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "detail/format17.hpp"

namespace proxit {

namespace {

// Idempotent on already-normalized columns so that serialized channels
// round-trip bit for bit.
constexpr double kNormalizeSkipTol = 1e-13;

void normalize_columns(Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double s = m.col(j).sum();
        if (std::abs(s - 1.0) > kNormalizeSkipTol) {
            m.col(j) /= s;
        }
    }
}

bool columns_stochastic(const Eigen::MatrixXd& m, double tol) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (std::abs(m.col(j).sum() - 1.0) > tol) {
            return false;
        }
    }
    return true;
}

double normal_cdf(double t, double sigma) {
    return 0.5 * std::erfc(-t / (sigma * std::numbers::sqrt2));
}

}  // namespace

Channel Channel::from_matrix(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) {
        throw DimensionMismatch("channel matrix is empty");
    }
    if (m.minCoeff() < 0.0) {
        throw NegativeEntry("channel matrix has a negative entry");
    }
    Eigen::MatrixXd q;
    if (columns_stochastic(m, kStochasticTol)) {
        q = m;
    } else if (columns_stochastic(m.transpose(), kStochasticTol)) {
        q = m.transpose();
    } else {
        Eigen::Index worst = 0;
        double worst_dev = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double dev = std::abs(m.col(j).sum() - 1.0);
            if (dev > worst_dev) {
                worst_dev = dev;
                worst = j;
            }
        }
        std::ostringstream msg;
        msg << "matrix is stochastic in neither orientation (column " << worst << " sums to "
            << m.col(worst).sum() << ")";
        throw NotStochastic(msg.str());
    }
    normalize_columns(q);
    return Channel(std::move(q));
}

Channel Channel::from_input_rows(const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0 || rows.cols() == 0) {
        throw DimensionMismatch("channel matrix is empty");
    }
    if (rows.minCoeff() < 0.0) {
        throw NegativeEntry("channel matrix has a negative entry");
    }
    Eigen::MatrixXd q = rows.transpose();
    if (!columns_stochastic(q, kStochasticTol)) {
        throw NotStochastic("an input row does not sum to 1");
    }
    normalize_columns(q);
    return Channel(std::move(q));
}

ProbVector output_marginal(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p) {
    if (p.size() != ch.input_size()) {
        throw DimensionMismatch("output_marginal: input distribution length mismatch");
    }
    return ch.matrix() * p;
}

double conditional_divergence(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& q,
                              Eigen::Index j) {
    if (j < 0 || j >= ch.input_size()) {
        throw DimensionMismatch("conditional_divergence: input index out of range");
    }
    if (q.size() != ch.output_size()) {
        throw DimensionMismatch("conditional_divergence: marginal length mismatch");
    }
    return kl_divergence(ch.matrix().col(j), q);
}

double mutual_information(const Channel& ch, const Eigen::Ref<const Eigen::VectorXd>& p) {
    if (p.size() != ch.input_size()) {
        throw DimensionMismatch("mutual_information: input distribution length mismatch");
    }
    const ProbVector q = ch.matrix() * p;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (p[j] > 0.0) {
            acc += p[j] * kl_divergence(ch.matrix().col(j), q);
        }
    }
    return acc;
}

Channel discretize_bernoulli_gaussian(const BernoulliGaussianParams& params) {
    if (!(params.p_impulse >= 0.0 && params.p_impulse <= 1.0)) {
        throw InvalidParams("p_impulse must lie in [0, 1]");
    }
    if (!(params.sigma_b > 0.0) || !(params.sigma_g > 0.0)) {
        throw InvalidParams("noise standard deviations must be positive");
    }
    if (!(params.sigma_b < params.sigma_g)) {
        throw InvalidParams("sigma_b must be smaller than sigma_g");
    }
    if (params.input_levels < 2 || params.output_bins < 2) {
        throw InvalidParams("need at least 2 input levels and 2 output bins");
    }

    const int m = params.input_levels;
    const int n = params.output_bins;
    const double sigma_mix =
        std::sqrt(params.sigma_b * params.sigma_b + params.sigma_g * params.sigma_g);

    Eigen::VectorXd inputs = Eigen::VectorXd::LinSpaced(m, -1.0, 1.0);
    const double lo = inputs[0] - 4.0 * sigma_mix;
    const double hi = inputs[m - 1] + 4.0 * sigma_mix;
    Eigen::VectorXd edges = Eigen::VectorXd::LinSpaced(n + 1, lo, hi);

    // Mixture CDF of the additive noise; outer bins run to +-inf so each
    // column telescopes to exactly the total mass 1.
    auto mix_cdf = [&](double t) {
        return (1.0 - params.p_impulse) * normal_cdf(t, params.sigma_b) +
               params.p_impulse * normal_cdf(t, sigma_mix);
    };

    Eigen::MatrixXd q(n, m);
    for (int j = 0; j < m; ++j) {
        const double x = inputs[j];
        for (int i = 0; i < n; ++i) {
            const double upper = (i == n - 1) ? 1.0 : mix_cdf(edges[i + 1] - x);
            const double lower = (i == 0) ? 0.0 : mix_cdf(edges[i] - x);
            q(i, j) = upper - lower;
        }
    }
    normalize_columns(q);
    return Channel::from_matrix(q);
}

Channel read_channel(std::istream& in) {
    std::string line;
    int line_no = 0;
    auto next_data_line = [&](std::string& out) {
        while (std::getline(in, line)) {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') {
                continue;
            }
            out = line;
            return true;
        }
        return false;
    };

    std::string header;
    if (!next_data_line(header)) {
        throw ParseError(line_no + 1, "missing 'inputs outputs' header");
    }
    long inputs = 0;
    long outputs = 0;
    {
        std::istringstream hs(header);
        if (!(hs >> inputs >> outputs) || inputs < 1 || outputs < 1) {
            throw ParseError(line_no, "header must be two positive integers 'inputs outputs'");
        }
        std::string rest;
        if (hs >> rest) {
            throw ParseError(line_no, "unexpected trailing content after header");
        }
    }

    Eigen::MatrixXd rows(inputs, outputs);
    for (long j = 0; j < inputs; ++j) {
        std::string data;
        if (!next_data_line(data)) {
            throw ParseError(line_no + 1, "unexpected end of file: expected " +
                                              std::to_string(inputs) + " matrix rows");
        }
        std::istringstream rs(data);
        double v = 0.0;
        for (long i = 0; i < outputs; ++i) {
            if (!(rs >> v)) {
                throw ParseError(line_no,
                                 "expected " + std::to_string(outputs) + " probabilities");
            }
            if (v < 0.0) {
                throw ParseError(line_no, "negative probability");
            }
            rows(j, i) = v;
        }
        std::string rest;
        if (rs >> rest) {
            throw ParseError(line_no, "unexpected trailing content after row");
        }
        const double s = rows.row(j).sum();
        if (std::abs(s - 1.0) > Channel::kStochasticTol) {
            std::ostringstream msg;
            msg << "row sums to " << s << ", expected 1 within 1e-9";
            throw ParseError(line_no, msg.str());
        }
    }
    return Channel::from_input_rows(rows);
}

Channel load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open channel file: " + path);
    }
    return read_channel(in);
}

void write_channel(std::ostream& out, const Channel& ch) {
    out << ch.input_size() << ' ' << ch.output_size() << '\n';
    for (Eigen::Index j = 0; j < ch.input_size(); ++j) {
        for (Eigen::Index i = 0; i < ch.output_size(); ++i) {
            if (i) {
                out << ' ';
            }
            out << detail::format17(ch.matrix()(i, j));
        }
        out << '\n';
    }
}

void save_channel(const std::string& path, const Channel& ch) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open output file: " + path);
    }
    write_channel(out, ch);
}

}  // namespace proxit
