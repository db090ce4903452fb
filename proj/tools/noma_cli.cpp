#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noma/config.hpp"
#include "noma/errors.hpp"
#include "noma/eval.hpp"
#include "noma/format.hpp"
#include "noma/fused_inference.hpp"
#include "noma/io.hpp"
#include "noma/iq_transform.hpp"

namespace {

using namespace noma;

// Exit codes beyond CLI11's own parse errors.
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;
constexpr int kExitFormat = 5;
constexpr int kExitDimension = 6;

std::string resolve_out(const std::string& path) {
    const char* dir = std::getenv("NOMA_OUT_DIR");
    if (!dir || *dir == '\0' || std::filesystem::path(path).is_absolute())
        return path;
    return (std::filesystem::path(dir) / path).string();
}

void write_meta(const std::string& artifact_path, const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "{\"config_digest\":\"" << cfg.digest()
       << "\",\"seed\":" << cfg.scenario.seed
       << ",\"shuffle_seed\":" << cfg.train.shuffle_seed << "}\n";
    write_text_file(artifact_path + ".meta.json", os.str());
}

std::vector<double> parse_snr_spec(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, hi, step;
        char c1, c2;
        std::istringstream ss(spec);
        if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
            step <= 0)
            throw config_error("bad --snr range, expected lo:hi:step");
        for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "inf" || tok == "infinite")
            out.push_back(std::numeric_limits<double>::infinity());
        else
            out.push_back(std::stod(tok));
    }
    if (out.empty()) throw config_error("empty --snr list");
    return out;
}

std::vector<int> parse_dims(const std::string& spec) {
    std::vector<int> dims;
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) dims.push_back(std::stoi(tok));
    if (dims.size() < 1) throw config_error("bad --dims");
    return dims;
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& out) {
    TransmissionRecord rec = synthesize(cfg.scenario);
    const std::string path = resolve_out(out);
    write_dataset(rec, path);
    write_meta(path, cfg);
    std::cout << "wrote dataset " << path << " (K=" << cfg.scenario.num_users
              << " M=" << cfg.scenario.num_antennas << ")\n";
    return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& data_path, int user,
              const std::string& params_out, const std::string& trace_out) {
    TransmissionRecord rec = read_dataset(data_path);
    const int num_users = static_cast<int>(rec.channel.cols());
    if (user < 1 || user > num_users)
        throw dimension_error("--user out of range for this dataset");

    WidenedDataset train_set =
        widen_dataset(rec.train_rx, CVec(rec.train_symbols.col(user - 1)), user);
    LlsWeights w0 = lls::fit(train_set);

    Rng init_rng(substream_seed(cfg.scenario.seed, 0x1000u + static_cast<unsigned>(user)));
    std::vector<int> dims{static_cast<int>(train_set.design.cols())};
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    HybridNetParams net = hybrid_nn::init_params(dims, w0, init_rng);

    TrainConfig tc = cfg.train;
    tc.shuffle_seed = substream_seed(cfg.train.shuffle_seed, static_cast<unsigned>(user));
    std::vector<double> trace = hybrid_nn::train(net, train_set, tc);

    const std::string ppath = resolve_out(params_out);
    write_params(net, user, cfg.digest(), ppath);
    if (!trace_out.empty()) {
        std::ostringstream os;
        os << "epoch,loss,config_digest\n";
        for (std::size_t e = 0; e < trace.size(); ++e)
            os << (e + 1) << ',' << format_double(trace[e]) << ',' << cfg.digest()
               << '\n';
        write_text_file(resolve_out(trace_out), os.str());
    }
    std::cout << "trained user " << user << ", final loss "
              << (trace.empty() ? 0.0 : trace.back()) << ", wrote " << ppath << "\n";
    return 0;
}

int cmd_detect(const std::string& data_path, const std::string& params_path,
               const std::string& out, std::string ber_out) {
    TransmissionRecord rec = read_dataset(data_path);
    LoadedParams lp = read_params(params_path);
    const int two_m = 2 * static_cast<int>(rec.data_rx.cols());
    if (lp.params.dims.empty() || lp.params.dims[0] != two_m)
        throw dimension_error("params trained for input width " +
                              std::to_string(lp.params.dims.empty() ? 0
                                                                    : lp.params.dims[0]) +
                              " but dataset widens to " + std::to_string(two_m));

    Mat widened = widen_design(rec.data_rx);
    CVec pred = hybrid_nn::detect(lp.params, widened);
    BitMat bits = hard_decision_qpsk(pred);

    std::ostringstream os;
    os << "symbol,re,im,bit0,bit1\n";
    for (Eigen::Index t = 0; t < pred.size(); ++t)
        os << t << ',' << format_double(pred[t].real()) << ','
           << format_double(pred[t].imag()) << ',' << int(bits(t, 0)) << ','
           << int(bits(t, 1)) << '\n';
    const std::string opath = resolve_out(out);
    write_text_file(opath, os.str());

    const int user = lp.user_index;
    if (user < 1 || user > rec.data_symbols.cols())
        throw dimension_error("params carry an out-of-range user index");
    BitMat truth = hard_decision_qpsk(rec.data_symbols.col(user - 1));
    const double ber = bit_error_rate(bits, truth);

    if (ber_out.empty()) ber_out = out + ".ber.csv";
    std::ostringstream bs;
    bs << "user,detector,total_bits,ber,config_digest\n";
    bs << user << ",HybridNN," << truth.size() << ',' << format_double(ber) << ','
       << lp.config_digest << '\n';
    write_text_file(resolve_out(ber_out), bs.str());

    std::cout << "user " << user << " BER " << ber << ", wrote " << opath << "\n";
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& out) {
    BerReport report = run_noise_sweep(cfg.sweep_options());
    report.config_digest = cfg.digest();
    const std::string path = resolve_out(out);
    write_text_file(path, report.to_csv());
    write_meta(path, cfg);
    std::cout << "wrote " << report.cells.size() << " BER cells to " << path << "\n";
    return 0;
}

int cmd_bench(const std::vector<int>& dims, int batch, int repeats,
              const std::string& out) {
    Rng rng(1);
    LlsWeights w0;
    w0.w = Vec::Zero(dims[0]);
    for (Eigen::Index i = 0; i < w0.w.size(); ++i) w0.w[i] = rng.gaussian();
    HybridNetParams params = hybrid_nn::init_params(dims, w0, rng);
    // Nonzero final layer so the benchmark exercises the whole network.
    for (Eigen::Index i = 0; i < params.final_weights.size(); ++i)
        params.final_weights[i] = rng.gaussian() * 0.1;

    FusedPlan plan = fused::build_plan(params);
    BenchReport rep = fused::bench_compare(plan, batch, repeats);
    write_text_file(resolve_out(out), rep.to_csv(true));
    std::cout << (plan.fused ? "fused" : "fallback") << " path: "
              << rep.fused_ns_per_sample << " ns/sample, naive "
              << rep.naive_ns_per_sample << " ns/sample, speedup "
              << rep.speedup_vs_naive << " (" << rep.machine << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-user NOMA uplink detection toolkit"};
    app.require_subcommand(1);

    if (const char* threads = std::getenv("NOMA_THREADS"))
        Eigen::setNbThreads(std::max(1, std::atoi(threads)));

    std::string config_path = "default";
    std::string data_path, params_path, out_path, trace_out, ber_out, snr_spec;
    std::string dims_spec = "8,64,64,64";
    int user = 4;
    int batch = 3840, repeats = 9, trials = -1;
    std::uint64_t seed_override = 0;
    bool have_seed = false;

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic transmission dataset");
    sim->add_option("--config", config_path, "Config JSON path or 'default'");
    sim->add_option("--seed", seed_override, "Override the config seed")
        ->each([&](const std::string&) { have_seed = true; });
    sim->add_option("--out", out_path, "Output dataset path")->required();

    auto* trn = app.add_subcommand("train", "Fit LLS and train the hybrid detector for one user");
    trn->add_option("--config", config_path, "Config JSON path or 'default'");
    trn->add_option("--data", data_path, "Input dataset")->required();
    trn->add_option("--user", user, "1-based user index");
    trn->add_option("--seed", seed_override, "Override the config seed")
        ->each([&](const std::string&) { have_seed = true; });
    trn->add_option("--params-out", params_path, "Output detector params (JSON)")->required();
    trn->add_option("--trace-out", trace_out, "Per-epoch loss CSV");

    auto* det = app.add_subcommand("detect", "Run a trained detector over a dataset");
    det->add_option("--data", data_path, "Input dataset")->required();
    det->add_option("--params", params_path, "Trained detector params")->required();
    det->add_option("--out", out_path, "Symbol decision CSV")->required();
    det->add_option("--ber-out", ber_out, "BER summary CSV (default <out>.ber.csv)");

    auto* swp = app.add_subcommand("sweep", "Noise sweep / symmetry ablation BER experiment");
    swp->add_option("--config", config_path, "Config JSON path or 'default'");
    swp->add_option("--snr", snr_spec, "SNR grid, lo:hi:step or comma list (dB)");
    swp->add_option("--trials", trials, "Trials per SNR point");
    swp->add_option("--seed", seed_override, "Override the config seed")
        ->each([&](const std::string&) { have_seed = true; });
    swp->add_option("--out", out_path, "BER report CSV")->required();

    auto* ben = app.add_subcommand("bench", "Fused-inference benchmark");
    ben->add_option("--dims", dims_spec, "Network dims, e.g. 8,64,64,64");
    ben->add_option("--batch", batch, "Batch size");
    ben->add_option("--repeats", repeats, "Timing repeats (median reported)");
    ben->add_option("--out", out_path, "Benchmark CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = ExperimentConfig::load(config_path);
        if (have_seed) cfg.scenario.seed = seed_override;
        if (!snr_spec.empty()) cfg.sweep_snr_list = parse_snr_spec(snr_spec);
        if (trials > 0) cfg.sweep_trials = trials;

        if (sim->parsed()) return cmd_simulate(cfg, out_path);
        if (trn->parsed()) return cmd_train(cfg, data_path, user, params_path, trace_out);
        if (det->parsed()) return cmd_detect(data_path, params_path, out_path, ber_out);
        if (swp->parsed()) return cmd_sweep(cfg, out_path);
        if (ben->parsed()) return cmd_bench(parse_dims(dims_spec), batch, repeats, out_path);
    } catch (const dimension_error& e) {
        std::cerr << "dimension conflict: " << e.what() << "\n";
        return kExitDimension;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const format_error& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
