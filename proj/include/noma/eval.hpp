#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noma/channel_sim.hpp"
#include "noma/hybrid_nn.hpp"
#include "noma/types.hpp"

namespace noma {

enum class DetectorId { Lls, HybridNn };

/// Training-data regimes for the symmetry ablation: widened (default),
/// non-widened with two independently trained target slots, and widened
/// from only the first half of the training symbols.
enum class Ablation { SymmetryOn, SymmetryOff, SymmetryOnHalfData };

std::string to_string(DetectorId id);
std::string to_string(Ablation a);
DetectorId detector_from_string(const std::string& s);
Ablation ablation_from_string(const std::string& s);

/// Gray-mapped hard decision: bit0 = (Re < 0), bit1 = (Im < 0); exact zero
/// decides to bit 0. Output is N x 2.
BitMat hard_decision_qpsk(const CVec& symbols);

/// Inverse Gray map: (b0, b1) -> ((1-2 b0) + i (1-2 b1)) / sqrt(2).
CVec map_qpsk_bits(const BitMat& bits);

/// Fraction of differing bits.
double bit_error_rate(const BitMat& predicted, const BitMat& truth);

struct SweepOptions {
    ScenarioConfig scenario;              // template; snr_db overridden per point
    std::vector<double> snr_list;         // dB, +inf allowed
    int trials = 20;
    std::vector<DetectorId> detectors{DetectorId::Lls, DetectorId::HybridNn};
    std::vector<Ablation> ablations{Ablation::SymmetryOn};
    std::vector<int> users;               // 1-based; empty = all users
    std::vector<int> hidden_dims{64, 64, 64};
    TrainConfig train;
    bool fresh_channel_per_trial = true;
    std::uint64_t master_seed = 0;
};

struct BerCell {
    double snr_db = 0.0;
    int user = 0;          // 1-based
    DetectorId detector = DetectorId::Lls;
    Ablation ablation = Ablation::SymmetryOn;
    int trials = 0;
    double mean_ber = 0.0;
    double sd_ber = 0.0;   // population SD over trials
    long long total_bits = 0;
    std::vector<double> per_trial_ber; // kept for median/variance inspection
};

struct BerReport {
    std::vector<BerCell> cells;
    std::uint64_t master_seed = 0;
    int trials = 0;
    std::string config_digest;
    std::string note;

    /// CSV: snr_db,user,detector,ablation,trials,mean_ber,sd_ber,total_bits
    std::string to_csv() const;
};

/// Runs trials x SNR points; per trial the symbol streams are fixed by the
/// master seed while channel (optionally) and noise get fresh substreams.
BerReport run_noise_sweep(const SweepOptions& opts);

} // namespace noma
