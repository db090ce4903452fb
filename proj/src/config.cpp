#include "noma/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "noma/errors.hpp"

namespace noma {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw config_error("unknown key '" + it.key() + "' in " + where);
}

double snr_from_json(const json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "infinite")
            return std::numeric_limits<double>::infinity();
        throw config_error("snr_db: expected number or \"infinite\"");
    }
    return v.get<double>();
}

json snr_to_json(double snr) {
    if (std::isinf(snr)) return "infinite";
    return snr;
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    reject_unknown(doc, {"scenario", "train", "network", "sweep"}, "config root");

    ExperimentConfig cfg;
    try {
        if (doc.contains("scenario")) {
            const json& s = doc["scenario"];
            reject_unknown(s,
                           {"num_users", "num_antennas", "train_symbols",
                            "data_symbols", "power_step_db", "snr_db",
                            "rx_nonlinearity_gain", "modulation", "seed"},
                           "scenario");
            if (s.contains("num_users")) cfg.scenario.num_users = s["num_users"];
            if (s.contains("num_antennas")) cfg.scenario.num_antennas = s["num_antennas"];
            if (s.contains("train_symbols")) cfg.scenario.train_symbols = s["train_symbols"];
            if (s.contains("data_symbols")) cfg.scenario.data_symbols = s["data_symbols"];
            if (s.contains("power_step_db")) cfg.scenario.power_step_db = s["power_step_db"];
            if (s.contains("snr_db")) cfg.scenario.snr_db = snr_from_json(s["snr_db"]);
            if (s.contains("rx_nonlinearity_gain"))
                cfg.scenario.rx_nonlinearity_gain = s["rx_nonlinearity_gain"];
            if (s.contains("modulation")) {
                if (s["modulation"].get<std::string>() != "QPSK")
                    throw config_error("modulation: only QPSK is supported");
            }
            if (s.contains("seed")) cfg.scenario.seed = s["seed"].get<std::uint64_t>();
        }
        if (doc.contains("train")) {
            const json& t = doc["train"];
            reject_unknown(t, {"epochs", "batch_size", "lr", "shuffle_seed"}, "train");
            if (t.contains("epochs")) cfg.train.epochs = t["epochs"];
            if (t.contains("batch_size")) cfg.train.batch_size = t["batch_size"];
            if (t.contains("lr")) cfg.train.lr = t["lr"];
            if (t.contains("shuffle_seed"))
                cfg.train.shuffle_seed = t["shuffle_seed"].get<std::uint64_t>();
        }
        if (doc.contains("network")) {
            const json& n = doc["network"];
            reject_unknown(n, {"hidden_dims"}, "network");
            if (n.contains("hidden_dims"))
                cfg.hidden_dims = n["hidden_dims"].get<std::vector<int>>();
        }
        if (doc.contains("sweep")) {
            const json& w = doc["sweep"];
            reject_unknown(w,
                           {"snr_list", "trials", "detectors", "ablations",
                            "users", "fresh_channel_per_trial"},
                           "sweep");
            if (w.contains("snr_list")) {
                cfg.sweep_snr_list.clear();
                for (const json& v : w["snr_list"])
                    cfg.sweep_snr_list.push_back(snr_from_json(v));
            }
            if (w.contains("trials")) cfg.sweep_trials = w["trials"];
            if (w.contains("detectors")) {
                cfg.sweep_detectors.clear();
                for (const json& v : w["detectors"])
                    cfg.sweep_detectors.push_back(detector_from_string(v));
            }
            if (w.contains("ablations")) {
                cfg.sweep_ablations.clear();
                for (const json& v : w["ablations"])
                    cfg.sweep_ablations.push_back(ablation_from_string(v));
            }
            if (w.contains("users")) cfg.sweep_users = w["users"].get<std::vector<int>>();
            if (w.contains("fresh_channel_per_trial"))
                cfg.fresh_channel_per_trial = w["fresh_channel_per_trial"];
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("config value error: ") + e.what());
    }

    cfg.scenario.validate();
    if (cfg.train.epochs < 0 || cfg.train.batch_size < 1 || cfg.train.lr <= 0.0)
        throw config_error("invalid training parameters");
    for (int d : cfg.hidden_dims)
        if (d < 1) throw config_error("hidden_dims entries must be >= 1");
    if (cfg.sweep_trials < 1) throw config_error("sweep.trials must be >= 1");
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    if (path == "default") return defaults();
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
    json doc;
    doc["scenario"] = {{"num_users", scenario.num_users},
                       {"num_antennas", scenario.num_antennas},
                       {"train_symbols", scenario.train_symbols},
                       {"data_symbols", scenario.data_symbols},
                       {"power_step_db", scenario.power_step_db},
                       {"snr_db", snr_to_json(scenario.snr_db)},
                       {"rx_nonlinearity_gain", scenario.rx_nonlinearity_gain},
                       {"modulation", "QPSK"},
                       {"seed", scenario.seed}};
    doc["train"] = {{"epochs", train.epochs},
                    {"batch_size", train.batch_size},
                    {"lr", train.lr},
                    {"shuffle_seed", train.shuffle_seed}};
    doc["network"] = {{"hidden_dims", hidden_dims}};
    json sweep;
    json snrs = json::array();
    for (double s : sweep_snr_list) snrs.push_back(snr_to_json(s));
    sweep["snr_list"] = snrs;
    sweep["trials"] = sweep_trials;
    json dets = json::array();
    for (DetectorId d : sweep_detectors) dets.push_back(to_string(d));
    sweep["detectors"] = dets;
    json abls = json::array();
    for (Ablation a : sweep_ablations) abls.push_back(to_string(a));
    sweep["ablations"] = abls;
    sweep["users"] = sweep_users;
    sweep["fresh_channel_per_trial"] = fresh_channel_per_trial;
    doc["sweep"] = sweep;
    return doc.dump(2);
}

std::string ExperimentConfig::digest() const {
    const std::string canon = to_json_text();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SweepOptions ExperimentConfig::sweep_options() const {
    SweepOptions opts;
    opts.scenario = scenario;
    opts.snr_list = sweep_snr_list;
    opts.trials = sweep_trials;
    opts.detectors = sweep_detectors;
    opts.ablations = sweep_ablations;
    opts.users = sweep_users;
    opts.hidden_dims = hidden_dims;
    opts.train = train;
    opts.fresh_channel_per_trial = fresh_channel_per_trial;
    opts.master_seed = scenario.seed;
    return opts;
}

} // namespace noma
