#include "noma/eval.hpp"

#include <cmath>
#include <sstream>

#include "noma/errors.hpp"
#include "noma/format.hpp"
#include "noma/iq_transform.hpp"

namespace noma {

std::string to_string(DetectorId id) {
    return id == DetectorId::Lls ? "LLS" : "HybridNN";
}

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::SymmetryOn: return "symmetry_on";
        case Ablation::SymmetryOff: return "symmetry_off";
        case Ablation::SymmetryOnHalfData: return "symmetry_on_half_data";
    }
    return "?";
}

DetectorId detector_from_string(const std::string& s) {
    if (s == "LLS") return DetectorId::Lls;
    if (s == "HybridNN") return DetectorId::HybridNn;
    throw config_error("unknown detector id: " + s);
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "symmetry_on") return Ablation::SymmetryOn;
    if (s == "symmetry_off") return Ablation::SymmetryOff;
    if (s == "symmetry_on_half_data") return Ablation::SymmetryOnHalfData;
    throw config_error("unknown ablation: " + s);
}

BitMat hard_decision_qpsk(const CVec& symbols) {
    BitMat bits(symbols.size(), 2);
    for (Eigen::Index t = 0; t < symbols.size(); ++t) {
        bits(t, 0) = symbols[t].real() < 0.0 ? 1 : 0;
        bits(t, 1) = symbols[t].imag() < 0.0 ? 1 : 0;
    }
    return bits;
}

CVec map_qpsk_bits(const BitMat& bits) {
    if (bits.cols() != 2) throw dimension_error("map_qpsk_bits: expected N x 2");
    const double a = 1.0 / std::sqrt(2.0);
    CVec out(bits.rows());
    for (Eigen::Index t = 0; t < bits.rows(); ++t)
        out[t] = cplx((1 - 2 * bits(t, 0)) * a, (1 - 2 * bits(t, 1)) * a);
    return out;
}

double bit_error_rate(const BitMat& predicted, const BitMat& truth) {
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
        throw dimension_error("bit_error_rate: shape mismatch");
    if (predicted.size() == 0) throw dimension_error("bit_error_rate: empty input");
    long long errors = 0;
    for (Eigen::Index r = 0; r < predicted.rows(); ++r)
        for (Eigen::Index c = 0; c < predicted.cols(); ++c)
            if (predicted(r, c) != truth(r, c)) ++errors;
    return static_cast<double>(errors) / static_cast<double>(predicted.size());
}

namespace {

// Non-widened real representation: one row [Re r; Im r] per symbol.
Mat real_design(const CMat& x) {
    Mat out(x.rows(), 2 * x.cols());
    out.leftCols(x.cols()) = x.real();
    out.rightCols(x.cols()) = x.imag();
    return out;
}

std::uint64_t mix_tag(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                      std::uint64_t d = 0) {
    std::uint64_t s = a * 0x9E3779B97F4A7C15ULL + 1;
    s ^= splitmix64(s) + b;
    s ^= splitmix64(s) + c;
    s ^= splitmix64(s) + d;
    return splitmix64(s);
}

std::vector<int> full_dims(int input_width, const std::vector<int>& hidden) {
    std::vector<int> dims{input_width};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    return dims;
}

struct TrialContext {
    const TransmissionRecord& rec;
    const Mat& widened_train;  // 2N_T x 2M
    const Mat& widened_detect; // 2N_D x 2M
    const Mat& real_train;     // N_T x 2M
    const Mat& real_detect;    // N_D x 2M
};

CVec detect_user(const SweepOptions& opts, const TrialContext& ctx, int user,
                 DetectorId det, Ablation abl, std::uint64_t trial_tag) {
    const CVec train_targets = ctx.rec.train_symbols.col(user - 1);

    Mat design;
    Vec targets;
    switch (abl) {
        case Ablation::SymmetryOn:
            design = ctx.widened_train;
            targets = widen_targets(train_targets);
            break;
        case Ablation::SymmetryOnHalfData: {
            const Eigen::Index half = ctx.rec.train_rx.rows() / 2;
            design = widen_design(ctx.rec.train_rx.topRows(half));
            targets = widen_targets(train_targets.head(half));
            break;
        }
        case Ablation::SymmetryOff:
            break; // handled below, two target slots
    }

    if (abl != Ablation::SymmetryOff) {
        LlsWeights w = lls::fit(design, targets, user);
        if (det == DetectorId::Lls) return lls::predict(w, ctx.widened_detect);

        Rng init_rng(substream_seed(opts.master_seed, mix_tag(trial_tag, 11)));
        HybridNetParams net = hybrid_nn::init_params(
            full_dims(static_cast<int>(design.cols()), opts.hidden_dims), w, init_rng);
        TrainConfig tc = opts.train;
        tc.shuffle_seed = substream_seed(opts.master_seed, mix_tag(trial_tag, 12));
        WidenedDataset ds{std::move(design), std::move(targets), user};
        hybrid_nn::train(net, ds, tc);
        return hybrid_nn::detect(net, ctx.widened_detect);
    }

    // symmetry_off: Re and Im each get an independently fitted/trained slot
    // on the non-widened representation.
    const Vec y_re = train_targets.real();
    const Vec y_im = train_targets.imag();
    LlsWeights w_re = lls::fit(ctx.real_train, y_re, user);
    LlsWeights w_im = lls::fit(ctx.real_train, y_im, user);

    Vec pred_re, pred_im;
    if (det == DetectorId::Lls) {
        pred_re = ctx.real_detect * w_re.w;
        pred_im = ctx.real_detect * w_im.w;
    } else {
        const auto dims = full_dims(static_cast<int>(ctx.real_train.cols()),
                                    opts.hidden_dims);
        auto train_slot = [&](const LlsWeights& w, const Vec& y, std::uint64_t slot) {
            Rng init_rng(substream_seed(opts.master_seed, mix_tag(trial_tag, 11, slot)));
            HybridNetParams net = hybrid_nn::init_params(dims, w, init_rng);
            TrainConfig tc = opts.train;
            tc.shuffle_seed =
                substream_seed(opts.master_seed, mix_tag(trial_tag, 12, slot));
            WidenedDataset ds{ctx.real_train, y, user};
            hybrid_nn::train(net, ds, tc);
            return hybrid_nn::forward(net, ctx.real_detect);
        };
        pred_re = train_slot(w_re, y_re, 1);
        pred_im = train_slot(w_im, y_im, 2);
    }
    CVec out(pred_re.size());
    out.real() = pred_re;
    out.imag() = pred_im;
    return out;
}

} // namespace

BerReport run_noise_sweep(const SweepOptions& opts) {
    if (opts.snr_list.empty()) throw config_error("run_noise_sweep: empty SNR list");
    if (opts.trials < 1) throw config_error("run_noise_sweep: trials must be >= 1");
    if (opts.detectors.empty()) throw config_error("run_noise_sweep: no detectors");
    opts.scenario.validate();

    std::vector<int> users = opts.users;
    if (users.empty())
        for (int u = 1; u <= opts.scenario.num_users; ++u) users.push_back(u);
    for (int u : users)
        if (u < 1 || u > opts.scenario.num_users)
            throw config_error("run_noise_sweep: user index out of range");

    BerReport report;
    report.master_seed = opts.master_seed;
    report.trials = opts.trials;

    // Deterministic cell order: snr -> detector -> ablation -> user.
    struct Key { std::size_t si, di, ai, ui; };
    std::vector<Key> keys;
    for (std::size_t si = 0; si < opts.snr_list.size(); ++si)
        for (std::size_t di = 0; di < opts.detectors.size(); ++di)
            for (std::size_t ai = 0; ai < opts.ablations.size(); ++ai)
                for (std::size_t ui = 0; ui < users.size(); ++ui)
                    keys.push_back({si, di, ai, ui});

    const long long bits_per_trial = 2LL * opts.scenario.data_symbols;
    for (const Key& k : keys) {
        BerCell cell;
        cell.snr_db = opts.snr_list[k.si];
        cell.user = users[k.ui];
        cell.detector = opts.detectors[k.di];
        cell.ablation = opts.ablations[k.ai];
        cell.trials = opts.trials;
        cell.total_bits = bits_per_trial * opts.trials;
        report.cells.push_back(std::move(cell));
    }

    for (std::size_t si = 0; si < opts.snr_list.size(); ++si) {
        ScenarioConfig cfg = opts.scenario;
        cfg.snr_db = opts.snr_list[si];
        for (int trial = 0; trial < opts.trials; ++trial) {
            SeedBundle seeds;
            seeds.symbols = substream_seed(opts.master_seed, 1);
            seeds.channel = opts.fresh_channel_per_trial
                                ? substream_seed(opts.master_seed,
                                                 mix_tag(2, static_cast<std::uint64_t>(trial)))
                                : substream_seed(opts.master_seed, 2);
            seeds.noise = substream_seed(
                opts.master_seed, mix_tag(3, si, static_cast<std::uint64_t>(trial)));
            const TransmissionRecord rec = synthesize(cfg, seeds);

            const Mat widened_train = widen_design(rec.train_rx);
            const Mat widened_detect = widen_design(rec.data_rx);
            const Mat rtrain = real_design(rec.train_rx);
            const Mat rdetect = real_design(rec.data_rx);
            TrialContext ctx{rec, widened_train, widened_detect, rtrain, rdetect};

            for (const Key& k : keys) {
                if (k.si != si) continue;
                BerCell& cell = report.cells[&k - keys.data()];
                const std::uint64_t trial_tag =
                    mix_tag(si, static_cast<std::uint64_t>(trial),
                            static_cast<std::uint64_t>(cell.user),
                            (k.di << 8) | k.ai);
                CVec pred = detect_user(opts, ctx, cell.user, cell.detector,
                                        cell.ablation, trial_tag);
                const double ber =
                    bit_error_rate(hard_decision_qpsk(pred),
                                   hard_decision_qpsk(rec.data_symbols.col(cell.user - 1)));
                cell.per_trial_ber.push_back(ber);
            }
        }
    }

    for (BerCell& cell : report.cells) {
        double sum = 0.0;
        for (double b : cell.per_trial_ber) sum += b;
        cell.mean_ber = sum / cell.per_trial_ber.size();
        double var = 0.0;
        for (double b : cell.per_trial_ber) var += (b - cell.mean_ber) * (b - cell.mean_ber);
        cell.sd_ber = std::sqrt(var / cell.per_trial_ber.size());
    }
    return report;
}

std::string BerReport::to_csv() const {
    std::ostringstream os;
    os << "snr_db,user,detector,ablation,trials,mean_ber,sd_ber,total_bits\n";
    for (const BerCell& c : cells) {
        os << format_double(c.snr_db) << ',' << c.user << ',' << to_string(c.detector)
           << ',' << to_string(c.ablation) << ',' << c.trials << ','
           << format_double(c.mean_ber) << ',' << format_double(c.sd_ber) << ','
           << c.total_bits << '\n';
    }
    return os.str();
}

} // namespace noma
