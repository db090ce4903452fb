#include "noma/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "noma/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset writer assumes a little-endian host");

namespace noma {

namespace {

using nlohmann::json;

struct Writer {
    std::ofstream out;
    explicit Writer(const std::string& path)
        : out(path, std::ios::binary | std::ios::trunc) {
        if (!out) throw io_error("cannot open for writing: " + path);
    }
    void bytes(const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out) throw io_error("write failure");
    }
    template <typename T>
    void pod(T v) { bytes(&v, sizeof(T)); }
    void complex_matrix(const CMat& m) { // row-major, interleaved re/im
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                pod(m(r, c).real());
                pod(m(r, c).imag());
            }
    }
};

struct Reader {
    std::vector<char> data;
    std::size_t pos = 0;
    explicit Reader(const std::string& path) {
        std::ifstream in(path, std::ios::binary | std::ios::ate);
        if (!in) throw io_error("cannot open for reading: " + path);
        const std::streamsize size = in.tellg();
        in.seekg(0);
        data.resize(static_cast<std::size_t>(size));
        in.read(data.data(), size);
        if (!in) throw io_error("read failure: " + path);
    }
    void bytes(void* p, std::size_t n) {
        if (pos + n > data.size())
            throw truncation_error("file shorter than its header promises");
        std::memcpy(p, data.data() + pos, n);
        pos += n;
    }
    template <typename T>
    T pod() {
        T v;
        bytes(&v, sizeof(T));
        return v;
    }
    CMat complex_matrix(Eigen::Index rows, Eigen::Index cols) {
        CMat m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) {
                double re = pod<double>();
                double im = pod<double>();
                m(r, c) = cplx(re, im);
            }
        return m;
    }
};

} // namespace

void write_dataset(const TransmissionRecord& rec, const std::string& path) {
    Writer w(path);
    w.bytes(kDatasetMagic, sizeof(kDatasetMagic));
    w.pod(kDatasetVersion);
    const auto k = static_cast<std::uint32_t>(rec.channel.cols());
    const auto m = static_cast<std::uint32_t>(rec.channel.rows());
    w.pod(k);
    w.pod(m);
    w.pod(static_cast<std::uint32_t>(rec.train_rx.rows()));
    w.pod(static_cast<std::uint32_t>(rec.data_rx.rows()));
    for (Eigen::Index i = 0; i < rec.powers.size(); ++i) w.pod(rec.powers[i]);
    w.complex_matrix(rec.channel);
    w.complex_matrix(rec.train_rx);
    w.complex_matrix(rec.train_symbols);
    w.complex_matrix(rec.data_rx);
    w.complex_matrix(rec.data_symbols);
    w.pod(rec.noise_power);
}

TransmissionRecord read_dataset(const std::string& path) {
    Reader r(path);
    char magic[5];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0)
        throw format_error("bad magic; not a NOMA1 dataset: " + path);
    const auto version = r.pod<std::uint16_t>();
    if (version != kDatasetVersion)
        throw format_error("unsupported dataset version");
    const auto k = r.pod<std::uint32_t>();
    const auto m = r.pod<std::uint32_t>();
    const auto nt = r.pod<std::uint32_t>();
    const auto nd = r.pod<std::uint32_t>();
    if (k == 0 || m == 0 || nt == 0 || nd == 0)
        throw format_error("zero dimension in dataset header");

    const std::size_t expected = sizeof(kDatasetMagic) + 2 + 4 * 4 +
                                 8ULL * k +
                                 16ULL * (static_cast<std::size_t>(m) * k +
                                          static_cast<std::size_t>(nt) * m +
                                          static_cast<std::size_t>(nt) * k +
                                          static_cast<std::size_t>(nd) * m +
                                          static_cast<std::size_t>(nd) * k) +
                                 8;
    if (r.data.size() != expected)
        throw truncation_error("dataset length inconsistent with header dims");

    TransmissionRecord rec;
    rec.powers.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) rec.powers[i] = r.pod<double>();
    rec.channel = r.complex_matrix(m, k);
    rec.train_rx = r.complex_matrix(nt, m);
    rec.train_symbols = r.complex_matrix(nt, k);
    rec.data_rx = r.complex_matrix(nd, m);
    rec.data_symbols = r.complex_matrix(nd, k);
    rec.noise_power = r.pod<double>();
    return rec;
}

void write_params(const HybridNetParams& params, int user_index,
                  const std::string& config_digest, const std::string& path) {
    json doc;
    doc["format"] = "noma-net";
    doc["version"] = 1;
    doc["user_index"] = user_index;
    doc["config_digest"] = config_digest;
    doc["dims"] = params.dims;
    doc["w0"] = std::vector<double>(params.w0.data(), params.w0.data() + params.w0.size());
    json layers = json::array();
    for (std::size_t n = 0; n < params.weights.size(); ++n) {
        json layer;
        json rows = json::array();
        for (Eigen::Index r = 0; r < params.weights[n].rows(); ++r) {
            std::vector<double> row(params.weights[n].cols());
            for (Eigen::Index c = 0; c < params.weights[n].cols(); ++c)
                row[c] = params.weights[n](r, c);
            rows.push_back(row);
        }
        layer["weights"] = rows;
        layer["bias"] = std::vector<double>(params.biases[n].data(),
                                            params.biases[n].data() +
                                                params.biases[n].size());
        layers.push_back(layer);
    }
    doc["layers"] = layers;
    doc["final_weights"] = std::vector<double>(
        params.final_weights.data(),
        params.final_weights.data() + params.final_weights.size());
    write_text_file(path, doc.dump());
}

LoadedParams read_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open params file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw format_error(std::string("bad params file: ") + e.what());
    }
    if (!doc.contains("format") || doc["format"] != "noma-net")
        throw format_error("not a noma-net params file: " + path);
    LoadedParams lp;
    try {
        lp.user_index = doc["user_index"];
        lp.config_digest = doc.value("config_digest", "");
        HybridNetParams& p = lp.params;
        p.dims = doc["dims"].get<std::vector<int>>();
        auto w0 = doc["w0"].get<std::vector<double>>();
        p.w0 = Eigen::Map<const Vec>(w0.data(), static_cast<Eigen::Index>(w0.size()));
        for (const json& layer : doc["layers"]) {
            const auto& rows = layer["weights"];
            Mat w(rows.size(), rows.empty() ? 0 : rows[0].size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                auto row = rows[r].get<std::vector<double>>();
                if (static_cast<Eigen::Index>(row.size()) != w.cols())
                    throw format_error("ragged weight matrix in params file");
                for (std::size_t c = 0; c < row.size(); ++c)
                    w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
            }
            p.weights.push_back(std::move(w));
            auto b = layer["bias"].get<std::vector<double>>();
            p.biases.push_back(
                Eigen::Map<const Vec>(b.data(), static_cast<Eigen::Index>(b.size())));
        }
        auto fw = doc["final_weights"].get<std::vector<double>>();
        p.final_weights =
            Eigen::Map<const Vec>(fw.data(), static_cast<Eigen::Index>(fw.size()));
    } catch (const json::exception& e) {
        throw format_error(std::string("bad params file: ") + e.what());
    }
    return lp;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw io_error("write failure: " + path);
}

} // namespace noma
