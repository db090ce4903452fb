#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = NOMA_CLI_PATH;

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / ("noma_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_config(const TempDir& td, const std::string& name,
                         const std::string& body) {
    const std::string path = td / name;
    std::ofstream(path) << body;
    return path;
}

const char* kSmallConfig = R"({
  "scenario": {"num_users": 2, "num_antennas": 4, "train_symbols": 64,
                "data_symbols": 128, "snr_db": 25.0, "seed": 11},
  "train": {"epochs": 5, "batch_size": 32},
  "network": {"hidden_dims": [16, 16]}
})";

} // namespace

TEST_CASE("simulate -> train -> detect pipeline produces a parsable BER summary") {
    TempDir td;
    const std::string cfg = write_config(td, "cfg.json", kSmallConfig);
    const std::string data = td / "data.bin";
    const std::string params = td / "net.json";
    const std::string trace = td / "loss.csv";
    const std::string dec = td / "decisions.csv";

    CHECK(run("simulate --config " + cfg + " --out " + data) == 0);
    CHECK(fs::exists(data));
    CHECK(fs::exists(data + ".meta.json"));

    CHECK(run("train --config " + cfg + " --data " + data + " --user 1 --params-out " +
              params + " --trace-out " + trace) == 0);
    CHECK(fs::exists(params));
    const std::string trace_text = slurp(trace);
    CHECK(trace_text.rfind("epoch,loss,config_digest\n", 0) == 0);

    CHECK(run("detect --data " + data + " --params " + params + " --out " + dec) == 0);
    const std::string ber = slurp(dec + ".ber.csv");
    CHECK(ber.rfind("user,detector,total_bits,ber,config_digest\n", 0) == 0);
    CHECK(std::count(ber.begin(), ber.end(), '\n') == 2);
}

TEST_CASE("sweep over an SNR grid emits one row per (snr, user, detector, ablation)") {
    TempDir td;
    const std::string cfg = write_config(td, "cfg.json", R"({
      "scenario": {"num_users": 2, "num_antennas": 4, "train_symbols": 64,
                    "data_symbols": 64, "seed": 3},
      "sweep": {"trials": 1, "detectors": ["LLS"], "users": [1, 2]}
    })");
    const std::string out = td / "ber.csv";
    CHECK(run("sweep --config " + cfg + " --snr 0:40:5 --out " + out) == 0);
    const std::string csv = slurp(out);
    // header + 9 SNR points x 2 users x 1 detector x 1 ablation
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 9 * 2);
}

TEST_CASE("detect with mismatched antenna count exits with the dimension code") {
    TempDir td;
    const std::string cfg4 = write_config(td, "cfg4.json", kSmallConfig);
    const std::string cfg8 = write_config(td, "cfg8.json", R"({
      "scenario": {"num_users": 2, "num_antennas": 8, "train_symbols": 64,
                    "data_symbols": 64, "snr_db": 25.0, "seed": 12},
      "train": {"epochs": 1, "batch_size": 32},
      "network": {"hidden_dims": [8]}
    })");
    const std::string d4 = td / "d4.bin";
    const std::string d8 = td / "d8.bin";
    const std::string params = td / "net.json";
    REQUIRE(run("simulate --config " + cfg4 + " --out " + d4) == 0);
    REQUIRE(run("simulate --config " + cfg8 + " --out " + d8) == 0);
    REQUIRE(run("train --config " + cfg4 + " --data " + d4 +
                " --user 1 --params-out " + params) == 0);
    CHECK(run("detect --data " + d8 + " --params " + params + " --out " +
              (td / "x.csv")) == 6);
}

TEST_CASE("error exits are distinct: missing file, bad config, bad format") {
    TempDir td;
    CHECK(run("simulate --config " + (td / "missing.json") + " --out " + (td / "o.bin")) == 4);
    const std::string bad = write_config(td, "bad.json", R"({"scenario":{"num_users":0}})");
    CHECK(run("simulate --config " + bad + " --out " + (td / "o.bin")) == 3);
    const std::string notds = write_config(td, "not_a_dataset.bin", "garbage");
    CHECK(run("train --data " + notds + " --user 1 --params-out " + (td / "p.json")) != 0);
    CHECK(run("") != 0);            // missing subcommand
    CHECK(run("--help") == 0);
}

TEST_CASE("--seed overrides the config seed") {
    TempDir td;
    const std::string cfg = write_config(td, "cfg.json", kSmallConfig);
    const std::string a = td / "a.bin";
    const std::string b = td / "b.bin";
    const std::string c = td / "c.bin";
    REQUIRE(run("simulate --config " + cfg + " --seed 99 --out " + a) == 0);
    REQUIRE(run("simulate --config " + cfg + " --seed 99 --out " + b) == 0);
    REQUIRE(run("simulate --config " + cfg + " --seed 100 --out " + c) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
}

TEST_CASE("bench writes a CSV with the three paths") {
    TempDir td;
    const std::string out = td / "bench.csv";
    CHECK(run("bench --dims 8,32,32 --batch 64 --repeats 1 --out " + out) == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("path,dims,batch,ns_per_sample,speedup_vs_naive\n", 0) == 0);
    CHECK(csv.find("fused,8x32x32,64,") != std::string::npos);
    CHECK(csv.find("naive,") != std::string::npos);
    CHECK(csv.find("fallback,") != std::string::npos);
}

TEST_CASE("NOMA_OUT_DIR redirects relative outputs") {
    TempDir td;
    const std::string cfg = write_config(td, "cfg.json", kSmallConfig);
    const std::string cmd = "NOMA_OUT_DIR=" + td.dir.string() + " " + kCli +
                            " simulate --config " + cfg +
                            " --out env_redirect.bin >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(td / "env_redirect.bin"));
}
