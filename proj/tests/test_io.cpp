#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "noma/config.hpp"
#include "noma/errors.hpp"
#include "noma/io.hpp"

using namespace noma;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

TransmissionRecord sample_record(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.num_users = 3;
    cfg.num_antennas = 2;
    cfg.train_symbols = 16;
    cfg.data_symbols = 8;
    cfg.snr_db = 12.0;
    cfg.seed = seed;
    return synthesize(cfg);
}

} // namespace

TEST_CASE("dataset round trip is bit-exact") {
    TransmissionRecord rec = sample_record(7);
    TempFile f("noma_io_roundtrip.bin");
    write_dataset(rec, f.path);
    TransmissionRecord back = read_dataset(f.path);
    CHECK(back.powers == rec.powers);
    CHECK(back.channel == rec.channel);
    CHECK(back.train_rx == rec.train_rx);
    CHECK(back.train_symbols == rec.train_symbols);
    CHECK(back.data_rx == rec.data_rx);
    CHECK(back.data_symbols == rec.data_symbols);
    CHECK(back.noise_power == rec.noise_power);
}

TEST_CASE("corrupted magic yields a format error, not a crash") {
    TransmissionRecord rec = sample_record(8);
    TempFile f("noma_io_badmagic.bin");
    write_dataset(rec, f.path);
    {
        std::fstream io(f.path, std::ios::in | std::ios::out | std::ios::binary);
        io.seekp(0);
        io.put('X');
    }
    CHECK_THROWS_AS(read_dataset(f.path), format_error);
}

TEST_CASE("truncated file yields a truncation error") {
    TransmissionRecord rec = sample_record(9);
    TempFile f("noma_io_trunc.bin");
    write_dataset(rec, f.path);
    const auto full = std::filesystem::file_size(f.path);
    std::filesystem::resize_file(f.path, full - 17);
    CHECK_THROWS_AS(read_dataset(f.path), truncation_error);
}

TEST_CASE("missing file yields an io error") {
    CHECK_THROWS_AS(read_dataset("/nonexistent/nope.bin"), io_error);
}

TEST_CASE("params round trip preserves every value") {
    Rng rng(4);
    LlsWeights w0;
    w0.w = Vec(8);
    for (int i = 0; i < 8; ++i) w0.w[i] = rng.gaussian();
    HybridNetParams p = hybrid_nn::init_params({8, 16, 16}, w0, rng);
    for (Eigen::Index i = 0; i < p.final_weights.size(); ++i)
        p.final_weights[i] = rng.gaussian();

    TempFile f("noma_io_params.json");
    write_params(p, 4, "deadbeef00000000", f.path);
    LoadedParams lp = read_params(f.path);
    CHECK(lp.user_index == 4);
    CHECK(lp.config_digest == "deadbeef00000000");
    CHECK(lp.params.dims == p.dims);
    CHECK(lp.params.w0 == p.w0);
    CHECK(lp.params.final_weights == p.final_weights);
    for (std::size_t n = 0; n < p.weights.size(); ++n) {
        CHECK(lp.params.weights[n] == p.weights[n]);
        CHECK(lp.params.biases[n] == p.biases[n]);
    }
}

TEST_CASE("config defaults carry the reference experiment profile") {
    ExperimentConfig cfg = ExperimentConfig::defaults();
    CHECK(cfg.scenario.num_users == 6);
    CHECK(cfg.scenario.num_antennas == 4);
    CHECK(cfg.scenario.train_symbols == 685);
    CHECK(cfg.scenario.data_symbols == 3840);
    CHECK(cfg.scenario.power_step_db == 3.0);
    CHECK(cfg.train.epochs == 50);
    CHECK(cfg.train.batch_size == 128);
    CHECK(cfg.train.lr == 0.005);
    CHECK(cfg.hidden_dims == std::vector<int>{64, 64, 64});
}

TEST_CASE("config JSON round trip and digest stability") {
    ExperimentConfig cfg = ExperimentConfig::defaults();
    cfg.scenario.seed = 42;
    cfg.sweep_trials = 7;
    ExperimentConfig back = ExperimentConfig::from_json_text(cfg.to_json_text());
    CHECK(back.to_json_text() == cfg.to_json_text());
    CHECK(back.digest() == cfg.digest());
    cfg.scenario.seed = 43;
    CHECK(back.digest() != cfg.digest());
}

TEST_CASE("unknown config keys are rejected") {
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"scenaroi":{}})"),
                    config_error);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text(R"({"scenario":{"users":6}})"),
        config_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"), config_error);
}

TEST_CASE("infinite SNR survives the JSON round trip") {
    ExperimentConfig cfg = ExperimentConfig::defaults();
    CHECK(std::isinf(cfg.scenario.snr_db));
    ExperimentConfig back = ExperimentConfig::from_json_text(cfg.to_json_text());
    CHECK(std::isinf(back.scenario.snr_db));
}
