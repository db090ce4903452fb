#pragma once

#include <string>

#include "noma/channel_sim.hpp"
#include "noma/hybrid_nn.hpp"

namespace noma {

/// Binary transmission dataset, little-endian:
///   magic "NOMA1" (5 bytes), version u16,
///   K, M, N_T, N_D (u32 each),
///   powers (K f64), channel (M x K complex f64, row-major),
///   X_T, Y_T, X_D, Y_D (row-major, interleaved re/im f64).
inline constexpr char kDatasetMagic[5] = {'N', 'O', 'M', 'A', '1'};
inline constexpr std::uint16_t kDatasetVersion = 1;

void write_dataset(const TransmissionRecord& rec, const std::string& path);
TransmissionRecord read_dataset(const std::string& path);

/// Detector parameters as JSON (numbers survive round trips exactly via
/// shortest-form serialization).
void write_params(const HybridNetParams& params, int user_index,
                  const std::string& config_digest, const std::string& path);

struct LoadedParams {
    HybridNetParams params;
    int user_index = 0;
    std::string config_digest;
};
LoadedParams read_params(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

} // namespace noma
