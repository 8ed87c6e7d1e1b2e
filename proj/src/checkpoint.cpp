#include "checkpoint.hpp"

#include "errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace gridfdd {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian; add byte swapping for this target");

struct Header {
    std::string model;
    std::map<std::string, std::string> fields;
    std::size_t data_count = 0;
    std::streampos payload_start;
};

Header read_header(std::ifstream& f, const std::string& path) {
    Header h;
    std::string line;
    if (!std::getline(f, line) || line != "gridfdd-checkpoint v1")
        throw IoError("not a gridfdd checkpoint: " + path);
    while (std::getline(f, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "data") {
            ls >> h.data_count;
            h.payload_start = f.tellg();
            return h;
        }
        if (key == "model") {
            ls >> h.model;
        } else {
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
            h.fields[key] = rest;
        }
    }
    throw IoError("checkpoint missing data section: " + path);
}

void write_payload(std::ofstream& f, const double* data, std::size_t count) {
    f.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

std::vector<double> read_payload(std::ifstream& f, std::size_t count, const std::string& path) {
    std::vector<double> data(count);
    f.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(f.gcount()) != count * sizeof(double))
        throw IoError("checkpoint payload truncated: " + path);
    return data;
}

long field_int(const Header& h, const std::string& key, const std::string& path) {
    auto it = h.fields.find(key);
    if (it == h.fields.end()) throw IoError("checkpoint missing field '" + key + "': " + path);
    return std::stol(it->second);
}

std::uint64_t field_u64(const Header& h, const std::string& key, const std::string& path) {
    auto it = h.fields.find(key);
    if (it == h.fields.end()) throw IoError("checkpoint missing field '" + key + "': " + path);
    return std::stoull(it->second);
}

} // namespace

void save_lstm(const std::string& path, const LstmModel& m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    const auto& d = m.dims();
    const auto& off = m.offsets();
    f << "gridfdd-checkpoint v1\n"
      << "model lstm\n"
      << "seed " << m.seed << "\n"
      << "epochs " << m.trained_epochs << "\n"
      << "input " << d.input << "\nhidden1 " << d.hidden1 << "\nhidden2 " << d.hidden2
      << "\noutput " << d.output << "\nlookback " << d.lookback << "\n"
      << "tensors w1:" << off.u1 - off.w1 << " u1:" << off.b1 - off.u1 << " b1:"
      << off.w2 - off.b1 << " w2:" << off.u2 - off.w2 << " u2:" << off.b2 - off.u2
      << " b2:" << off.wh - off.b2 << " wh:" << off.bh - off.wh << " bh:"
      << off.total - off.bh << "\n"
      << "data " << m.param_count() << "\n";
    write_payload(f, m.params().data(), static_cast<std::size_t>(m.param_count()));
    if (!f) throw IoError("short write: " + path);
}

LstmModel load_lstm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    Header h = read_header(f, path);
    if (h.model != "lstm") throw IoError("expected an lstm checkpoint: " + path);

    LstmModel::Dims dims;
    dims.input = static_cast<int>(field_int(h, "input", path));
    dims.hidden1 = static_cast<int>(field_int(h, "hidden1", path));
    dims.hidden2 = static_cast<int>(field_int(h, "hidden2", path));
    dims.output = static_cast<int>(field_int(h, "output", path));
    dims.lookback = static_cast<int>(field_int(h, "lookback", path));

    LstmModel m(dims);
    if (h.data_count != static_cast<std::size_t>(m.param_count()))
        throw IoError("checkpoint size does not match declared shape: " + path);
    const auto data = read_payload(f, h.data_count, path);
    std::memcpy(m.params().data(), data.data(), data.size() * sizeof(double));
    m.seed = field_u64(h, "seed", path);
    m.trained_epochs = static_cast<int>(field_int(h, "epochs", path));
    return m;
}

void save_mlp(const std::string& path, const MlpModel& m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    const auto& d = m.dims();
    const auto& off = m.offsets();
    f << "gridfdd-checkpoint v1\n"
      << "model mlp\n"
      << "seed " << m.seed << "\n"
      << "epochs " << m.trained_epochs << "\n"
      << "input " << d.input << "\nhidden1 " << d.hidden1 << "\nhidden2 " << d.hidden2
      << "\noutput " << d.output << "\n"
      << "tensors w1:" << off.b1 - off.w1 << " b1:" << off.w2 - off.b1 << " w2:"
      << off.b2 - off.w2 << " b2:" << off.w3 - off.b2 << " w3:" << off.b3 - off.w3
      << " b3:" << off.total - off.b3 << "\n"
      << "data " << m.param_count() << "\n";
    write_payload(f, m.params().data(), static_cast<std::size_t>(m.param_count()));
    if (!f) throw IoError("short write: " + path);
}

MlpModel load_mlp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    Header h = read_header(f, path);
    if (h.model != "mlp") throw IoError("expected an mlp checkpoint: " + path);

    MlpModel::Dims dims;
    dims.input = static_cast<int>(field_int(h, "input", path));
    dims.hidden1 = static_cast<int>(field_int(h, "hidden1", path));
    dims.hidden2 = static_cast<int>(field_int(h, "hidden2", path));
    dims.output = static_cast<int>(field_int(h, "output", path));

    MlpModel m(dims);
    if (h.data_count != static_cast<std::size_t>(m.param_count()))
        throw IoError("checkpoint size does not match declared shape: " + path);
    const auto data = read_payload(f, h.data_count, path);
    std::memcpy(m.params().data(), data.data(), data.size() * sizeof(double));
    m.seed = field_u64(h, "seed", path);
    m.trained_epochs = static_cast<int>(field_int(h, "epochs", path));
    return m;
}

void save_knn(const std::string& path, const KnnModel& m) {
    m.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    const std::size_t n = m.count();
    // Payload: exemplar matrix row-major, then one class index per exemplar.
    f << "gridfdd-checkpoint v1\n"
      << "model knn\n"
      << "seed " << m.seed << "\n"
      << "k " << m.k << "\n"
      << "feature_window " << m.feature_window << "\n"
      << "exemplars " << n << "\n"
      << "data " << m.exemplars.size() + n << "\n";
    write_payload(f, m.exemplars.data(), m.exemplars.size());
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<double>(m.labels[i]);
    write_payload(f, labels.data(), n);
    if (!f) throw IoError("short write: " + path);
}

KnnModel load_knn(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    Header h = read_header(f, path);
    if (h.model != "knn") throw IoError("expected a knn checkpoint: " + path);

    KnnModel m;
    m.k = static_cast<int>(field_int(h, "k", path));
    m.feature_window = static_cast<int>(field_int(h, "feature_window", path));
    m.seed = field_u64(h, "seed", path);
    const auto n = static_cast<std::size_t>(field_int(h, "exemplars", path));
    const std::size_t want = n * static_cast<std::size_t>(m.dim()) + n;
    if (h.data_count != want)
        throw IoError("checkpoint size does not match declared shape: " + path);

    auto data = read_payload(f, h.data_count, path);
    m.exemplars.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n * m.dim()));
    m.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<int>(data[n * m.dim() + i]);
        if (v < 0 || v >= kNumFaultClasses)
            throw IoError("checkpoint contains a bad class index: " + path);
        m.labels[i] = static_cast<FaultClass>(v);
    }
    m.validate();
    return m;
}

std::string checkpoint_kind(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    return read_header(f, path).model;
}

} // namespace gridfdd
