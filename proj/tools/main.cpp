#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "proxit/bicm.hpp"
#include "proxit/capacity.hpp"
#include "proxit/channel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

const char* stop_reason_name(proxit::StopReason r) {
    switch (r) {
        case proxit::StopReason::BoundGap:
            return "bound_gap";
        case proxit::StopReason::Delta:
            return "delta";
        case proxit::StopReason::MaxIter:
            return "max_iter";
    }
    return "unknown";
}

int run_capacity(const std::string& channel_path, const std::string& algorithm, double tol,
                 int max_iter, double fixed_beta, const std::string& trace_path, bool bits) {
    proxit::SolverConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.fixed_beta = fixed_beta;
    if (algorithm == "classic") {
        cfg.algorithm = proxit::Algorithm::Classic;
    } else if (algorithm == "matz") {
        cfg.algorithm = proxit::Algorithm::Matz;
    } else {
        cfg.algorithm = proxit::Algorithm::AdaptiveProximal;
    }

    proxit::Channel ch = proxit::load_channel(channel_path);
    proxit::CapacityResult result = proxit::solve_capacity(ch, cfg);

    if (bits) {
        std::cout << "capacity " << result.capacity_bits() << " bits (" << result.capacity_nats
                  << " nats)\n";
    } else {
        std::cout << "capacity " << result.capacity_nats << " nats (" << result.capacity_bits()
                  << " bits)\n";
    }
    std::cout << "iterations " << result.iterations << "\n"
              << "stopped " << stop_reason_name(result.stop_reason) << "\n";
    std::cout << "optimal_input";
    for (Eigen::Index j = 0; j < result.optimal_input.size(); ++j) {
        std::cout << ' ' << result.optimal_input[j];
    }
    std::cout << "\n";

    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) {
            throw proxit::Error("cannot open trace file: " + trace_path);
        }
        proxit::write_trace_csv(out, result.trace);
    }
    return result.converged ? kExitOk : kExitNotConverged;
}

int run_channel_gen(const proxit::BernoulliGaussianParams& params, const std::string& out_path) {
    proxit::Channel ch = proxit::discretize_bernoulli_gaussian(params);
    proxit::save_channel(out_path, ch);
    std::cout << "wrote " << ch.input_size() << "x" << ch.output_size() << " channel to "
              << out_path << "\n";
    return kExitOk;
}

struct BicmOptions {
    int n_bits = 4;
    double noise_std = 0.5;
    std::uint64_t seed = 1;
    std::string mode = "both";
    std::optional<double> mu_override;
    std::string trace_path;
    std::string instance_path;
    int max_iter = 20000;
    double conv_tol = 1e-10;
};

void print_decode(const std::string& label, const proxit::DecodeResult& r) {
    std::cout << label << " decisions ";
    for (auto b : r.decisions) {
        std::cout << int(b);
    }
    std::cout << "\n"
              << label << " iterations " << r.iterations << (r.converged ? "" : " (max_iter)")
              << "\n";
}

int run_bicm_demo(const BicmOptions& opt) {
    Eigen::MatrixXi generator;
    std::vector<int> interleaver;
    double noise_std = opt.noise_std;
    std::uint64_t seed = opt.seed;
    if (!opt.instance_path.empty()) {
        proxit::InstanceSpec spec = proxit::load_instance_spec(opt.instance_path);
        generator = spec.generator;
        interleaver = spec.interleaver;
        noise_std = spec.noise_std;
        seed = spec.seed;
    } else {
        generator = proxit::default_generator(opt.n_bits);
        interleaver = proxit::identity_interleaver(opt.n_bits);
    }

    // message bits and the noise seed both derive from the run seed
    std::mt19937_64 eng(seed);
    std::vector<int> message(static_cast<std::size_t>(generator.rows()));
    for (auto& m : message) {
        m = static_cast<int>((eng() >> 32) & 1);
    }
    const std::uint64_t noise_seed = eng();

    proxit::ToyBicmInstance inst = proxit::build_toy_instance(
        generator, interleaver, proxit::gray_4pam(), noise_std, message, noise_seed);

    std::optional<proxit::DecodeResult> classic;
    std::optional<proxit::DecodeResult> proximal;
    if (opt.mode == "classic" || opt.mode == "both") {
        classic = proxit::decode(inst, proxit::DecodeMode::Classic, opt.max_iter, opt.conv_tol,
                                 opt.mu_override);
        print_decode("classic", *classic);
    }
    if (opt.mode == "proximal" || opt.mode == "both") {
        proximal = proxit::decode(inst, proxit::DecodeMode::Proximal, opt.max_iter, opt.conv_tol,
                                  opt.mu_override);
        print_decode("proximal", *proximal);
    }
    if (classic && proximal) {
        const bool same = classic->decisions == proximal->decisions;
        const double sum_gap =
            (classic->lambda1() + classic->lambda2() - proximal->lambda1() - proximal->lambda2())
                .cwiseAbs()
                .maxCoeff();
        std::cout << "fixed_points " << (same ? "agree" : "differ") << " (max posterior LLR gap "
                  << sum_gap << ")\n";
    }

    if (!opt.trace_path.empty()) {
        const proxit::DecodeResult& traced = proximal ? *proximal : *classic;
        std::ofstream out(opt.trace_path);
        if (!out) {
            throw proxit::Error("cannot open trace file: " + opt.trace_path);
        }
        proxit::write_decoder_trace_csv(out, traced.trace);
    }

    const bool all_converged =
        (!classic || classic->converged) && (!proximal || proximal->converged);
    return all_converged ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Channel capacity via proximal-point Blahut-Arimoto iterations and a "
                 "desk-scale proximal BICM-ID decoder"};
    app.require_subcommand(1);

    // capacity
    auto* cap = app.add_subcommand("capacity", "Compute DMC capacity from a channel file");
    std::string channel_path;
    std::string algorithm = "proximal";
    double tol = 1e-11;
    int max_iter = 10000;
    double fixed_beta = 0.5;
    std::string trace_path;
    bool bits = false;
    cap->add_option("--channel", channel_path, "channel file (rows = inputs)")->required();
    cap->add_option("--algorithm", algorithm, "classic|matz|proximal")
        ->check(CLI::IsMember({"classic", "matz", "proximal"}));
    cap->add_option("--tol", tol, "convergence precision");
    cap->add_option("--max-iter", max_iter, "iteration cap");
    cap->add_option("--fixed-beta", fixed_beta, "beta for the matz variant");
    cap->add_option("--trace", trace_path, "write per-iteration CSV here");
    cap->add_flag("--bits", bits, "report capacity in bits first");

    // channel-gen
    auto* gen = app.add_subcommand("channel-gen", "Discretize a Bernoulli-Gaussian channel");
    proxit::BernoulliGaussianParams params;
    std::string out_path;
    gen->add_option("--p", params.p_impulse, "impulse probability")->required();
    gen->add_option("--sigma-b", params.sigma_b, "background noise std")->required();
    gen->add_option("--sigma-g", params.sigma_g, "impulse noise std")->required();
    gen->add_option("--inputs", params.input_levels, "input amplitude count")->required();
    gen->add_option("--outputs", params.output_bins, "output bin count")->required();
    gen->add_option("--out", out_path, "output channel file")->required();

    // bicm-demo
    auto* demo = app.add_subcommand("bicm-demo", "Run the toy BICM-ID decoders");
    BicmOptions opt;
    double mu_override_value = 0.0;
    demo->add_option("--n-bits", opt.n_bits, "codeword length (even)");
    demo->add_option("--noise-std", opt.noise_std, "channel noise std");
    demo->add_option("--seed", opt.seed, "instance seed");
    demo->add_option("--mode", opt.mode, "classic|proximal|both")
        ->check(CLI::IsMember({"classic", "proximal", "both"}));
    auto* mu_opt = demo->add_option("--mu-override", mu_override_value,
                                    "pin both proximal penalty weights");
    demo->add_option("--trace", opt.trace_path, "write decoder trace CSV here");
    demo->add_option("--instance", opt.instance_path, "instance description file");
    demo->add_option("--max-iter", opt.max_iter, "iteration cap");
    demo->add_option("--conv-tol", opt.conv_tol, "LLR convergence threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cap->parsed()) {
            return run_capacity(channel_path, algorithm, tol, max_iter, fixed_beta, trace_path,
                                bits);
        }
        if (gen->parsed()) {
            return run_channel_gen(params, out_path);
        }
        if (mu_opt->count() > 0) {
            opt.mu_override = mu_override_value;
        }
        return run_bicm_demo(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}
