#include "noma/channel_sim.hpp"

#include <cmath>

#include "noma/errors.hpp"

namespace noma {

void ScenarioConfig::validate() const {
    if (num_users < 1) throw config_error("num_users must be >= 1");
    if (num_antennas < 1) throw config_error("num_antennas must be >= 1");
    if (train_symbols < 1 || data_symbols < 1)
        throw config_error("symbol counts must be >= 1");
    if (train_symbols < 2 * num_antennas)
        throw config_error("train_symbols must be >= 2*num_antennas for an "
                           "over-determined widened system");
    if (power_step_db < 0.0) throw config_error("power_step_db must be >= 0");
    if (rx_nonlinearity_gain < 0.0)
        throw config_error("rx_nonlinearity_gain must be >= 0");
    if (std::isnan(snr_db)) throw config_error("snr_db must not be NaN");
}

Vec power_profile(int num_users, double step_db) {
    Vec p(num_users);
    for (int k = 0; k < num_users; ++k)
        p[k] = std::pow(10.0, -k * step_db / 10.0);
    return p;
}

CMat gen_symbols(int num_users, int num_symbols, Modulation mod, Rng& rng) {
    if (num_users < 1 || num_symbols < 1)
        throw dimension_error("gen_symbols: dimensions must be >= 1");
    (void)mod; // QPSK is the only constellation
    const double a = 1.0 / std::sqrt(2.0);
    CMat out(num_symbols, num_users);
    // Row-major draw order so that prepending users does not reshuffle
    // earlier users' streams within a row.
    for (int t = 0; t < num_symbols; ++t) {
        for (int k = 0; k < num_users; ++k) {
            std::uint64_t bits = rng.below(4);
            double re = (bits & 1) ? -a : a;
            double im = (bits & 2) ? -a : a;
            out(t, k) = cplx(re, im);
        }
    }
    return out;
}

CMat gen_channel(int num_users, int num_antennas, Rng& rng) {
    if (num_users < 1 || num_antennas < 1)
        throw dimension_error("gen_channel: dimensions must be >= 1");
    const double s = 1.0 / std::sqrt(2.0); // variance 1 per complex entry
    CMat h(num_antennas, num_users);
    for (int k = 0; k < num_users; ++k)
        for (int m = 0; m < num_antennas; ++m)
            h(m, k) = cplx(rng.gaussian() * s, rng.gaussian() * s);
    return h;
}

namespace {

void apply_cubic_distortion(CMat& x, double gain) {
    if (gain <= 0.0) return;
    x = x.unaryExpr([gain](cplx u) { return u + gain * u * std::norm(u); });
}

void add_noise(CMat& x, double sigma2, Rng& rng) {
    const double s = std::sqrt(sigma2 / 2.0);
    for (Eigen::Index t = 0; t < x.rows(); ++t)
        for (Eigen::Index m = 0; m < x.cols(); ++m)
            x(t, m) += cplx(rng.gaussian() * s, rng.gaussian() * s);
}

} // namespace

TransmissionRecord synthesize(const ScenarioConfig& cfg) {
    return synthesize(cfg, SeedBundle::from_master(cfg.seed));
}

TransmissionRecord synthesize(const ScenarioConfig& cfg, const SeedBundle& seeds) {
    cfg.validate();
    const int K = cfg.num_users;
    const int M = cfg.num_antennas;

    Rng sym_rng(seeds.symbols);
    Rng chan_rng(seeds.channel);
    Rng noise_rng(seeds.noise);

    TransmissionRecord rec;
    rec.powers = power_profile(K, cfg.power_step_db);
    rec.channel = gen_channel(K, M, chan_rng);
    rec.train_symbols = gen_symbols(K, cfg.train_symbols, cfg.modulation, sym_rng);
    rec.data_symbols = gen_symbols(K, cfg.data_symbols, cfg.modulation, sym_rng);

    // r(t) = sum_k sqrt(p_k) b_k(t) h_k, i.e. X = B diag(sqrt p) H^T
    CMat scaled = rec.channel * rec.powers.cwiseSqrt().asDiagonal(); // M x K
    rec.train_rx = rec.train_symbols * scaled.transpose();
    rec.data_rx = rec.data_symbols * scaled.transpose();

    apply_cubic_distortion(rec.train_rx, cfg.rx_nonlinearity_gain);
    apply_cubic_distortion(rec.data_rx, cfg.rx_nonlinearity_gain);

    if (std::isinf(cfg.snr_db)) {
        rec.noise_power = 0.0;
    } else {
        // Expected undistorted signal power per receive row, computed
        // analytically: E||r||^2 = sum_k p_k ||h_k||^2 for unit-energy
        // symbols. Noise row power is M * sigma^2.
        double sig_power = 0.0;
        for (int k = 0; k < K; ++k)
            sig_power += rec.powers[k] * rec.channel.col(k).squaredNorm();
        rec.noise_power = sig_power / (M * std::pow(10.0, cfg.snr_db / 10.0));
        add_noise(rec.train_rx, rec.noise_power, noise_rng);
        add_noise(rec.data_rx, rec.noise_power, noise_rng);
    }
    return rec;
}

} // namespace noma
