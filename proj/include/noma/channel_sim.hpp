#pragma once

#include <cstdint>
#include <limits>

#include "noma/rng.hpp"
#include "noma/types.hpp"

namespace noma {

enum class Modulation { Qpsk };

/// Configuration for one synthetic multi-user uplink transmission.
struct ScenarioConfig {
    int num_users = 6;
    int num_antennas = 4;
    int train_symbols = 685;
    int data_symbols = 3840;
    double power_step_db = 3.0;
    /// Total received signal power over added noise power, in dB.
    /// +infinity disables noise.
    double snr_db = std::numeric_limits<double>::infinity();
    /// Memoryless cubic receiver distortion gain; 0 disables.
    double rx_nonlinearity_gain = 0.0;
    Modulation modulation = Modulation::Qpsk;
    std::uint64_t seed = 0;

    void validate() const; // throws config_error
};

/// One substream per independent randomness source, so any of them can be
/// regenerated (or replaced per trial) without disturbing the others.
struct SeedBundle {
    std::uint64_t symbols;
    std::uint64_t channel;
    std::uint64_t noise;

    static SeedBundle from_master(std::uint64_t master) {
        return {substream_seed(master, 1), substream_seed(master, 2),
                substream_seed(master, 3)};
    }
};

/// One simulated transmission: channel, powers, receive matrices and
/// ground-truth symbols for both phases.
struct TransmissionRecord {
    CMat channel;       // M x K, column k = h_k
    Vec powers;         // length K, p_1 = 1
    CMat train_rx;      // N_T x M
    CMat train_symbols; // N_T x K
    CMat data_rx;       // N_D x M
    CMat data_symbols;  // N_D x K
    double noise_power = 0.0; // per-complex-sample variance
};

/// p_k = 10^(-(k-1) * step_db / 10), strongest user normalized to 1.
Vec power_profile(int num_users, double step_db);

/// N x K matrix of unit-energy constellation symbols, i.i.d. uniform.
CMat gen_symbols(int num_users, int num_symbols, Modulation mod, Rng& rng);

/// M x K channel with i.i.d. CN(0,1) entries.
CMat gen_channel(int num_users, int num_antennas, Rng& rng);

TransmissionRecord synthesize(const ScenarioConfig& cfg);
TransmissionRecord synthesize(const ScenarioConfig& cfg, const SeedBundle& seeds);

} // namespace noma
