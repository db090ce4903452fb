#pragma once

#include <string>
#include <vector>

#include "noma/channel_sim.hpp"
#include "noma/eval.hpp"
#include "noma/hybrid_nn.hpp"

namespace noma {

/// Full experiment configuration: scenario, training, network and sweep
/// parameters. Parses from JSON with unknown-key rejection; reference-profile
/// values throughout.
struct ExperimentConfig {
    ScenarioConfig scenario;
    TrainConfig train;
    std::vector<int> hidden_dims{64, 64, 64};

    std::vector<double> sweep_snr_list{0, 5, 10, 15, 20, 25, 30, 35, 40};
    int sweep_trials = 20;
    std::vector<DetectorId> sweep_detectors{DetectorId::Lls, DetectorId::HybridNn};
    std::vector<Ablation> sweep_ablations{Ablation::SymmetryOn};
    std::vector<int> sweep_users; // empty = all
    bool fresh_channel_per_trial = true;

    static ExperimentConfig defaults() { return {}; }
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig load(const std::string& path); // "default" => defaults()

    std::string to_json_text() const;
    /// FNV-1a hash of the canonical JSON form, hex-encoded.
    std::string digest() const;

    SweepOptions sweep_options() const;
};

} // namespace noma
