#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bliss/model.hpp"

namespace bliss {

namespace {

constexpr char kMagic[] = "BLISS-CKPT v1";

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);  // round-trips exactly
    return buf;
}

void put_u64_le(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("checkpoint: truncated length prefix");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_doubles_le(std::ostream& os, const std::vector<double>& vals) {
    // doubles are written byte-for-byte; this assumes a little-endian host,
    // which covers every platform this toolkit targets
    put_u64_le(os, static_cast<uint64_t>(vals.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(vals.data()),
             static_cast<std::streamsize>(vals.size() * sizeof(double)));
}

std::vector<double> get_doubles_le(std::istream& is, size_t expected) {
    const uint64_t nbytes = get_u64_le(is);
    if (nbytes != expected * sizeof(double))
        throw std::runtime_error("checkpoint: payload size mismatch (" + std::to_string(nbytes) +
                                 " bytes for " + std::to_string(expected) + " values)");
    std::vector<double> vals(expected);
    is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(nbytes));
    if (!is) throw std::runtime_error("checkpoint: truncated tensor payload");
    return vals;
}

std::string read_line(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(std::string("checkpoint: missing ") + what);
    return line;
}

std::map<std::string, std::string> config_map(const Model& m) {
    const ModelConfig& c = m.cfg;
    return {
        {"model.d_model", std::to_string(c.d_model)},
        {"model.layers", std::to_string(c.n_layers)},
        {"model.heads", std::to_string(c.n_heads)},
        {"model.d_ffn", std::to_string(c.d_ffn)},
        {"model.vocab_size", std::to_string(c.vocab_size)},
        {"model.max_pos", std::to_string(c.max_pos)},
        {"model.dropout", fmt_double(c.dropout)},
        {"model.smoothing", fmt_double(c.smoothing)},
        {"model.lambda_token", fmt_double(c.lambda_token)},
        {"model.lambda_pos", fmt_double(c.lambda_pos)},
    };
}

void write_tensor(std::ostream& os, const std::string& name, const Shape& shape,
                  const std::vector<double>& vals) {
    os << name << '\n' << shape.size();
    for (int d : shape) os << ' ' << d;
    os << '\n';
    put_doubles_le(os, vals);
    os << '\n';
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& m,
                     const std::map<std::string, std::string>& extras,
                     const std::vector<std::pair<std::string, Tensor>>& extra_tensors) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path);
    f << kMagic << '\n';
    auto cfg = config_map(m);
    for (const auto& [k, v] : extras) cfg[k] = v;
    f << "config " << cfg.size() << '\n';
    for (const auto& [k, v] : cfg) f << k << " = " << v << '\n';
    const auto params = m.parameters();
    f << "tensors " << params.size() + extra_tensors.size() << '\n';
    for (const auto& [name, t] : params) write_tensor(f, name, t.shape(), t.values());
    for (const auto& [name, t] : extra_tensors) write_tensor(f, name, t.shape(), t.values());
    if (!f) throw std::runtime_error("write failed on " + path);
}

Model load_model(const std::string& path, Checkpoint* meta) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path);
    if (read_line(f, "header") != kMagic)
        throw std::runtime_error(path + ": not a " + std::string(kMagic) + " file");

    size_t n_config = 0;
    {
        const std::string line = read_line(f, "config count");
        if (std::sscanf(line.c_str(), "config %zu", &n_config) != 1)
            throw std::runtime_error(path + ": malformed config count line '" + line + "'");
    }
    std::map<std::string, std::string> kv;
    for (size_t i = 0; i < n_config; ++i) {
        const std::string line = read_line(f, "config line");
        const auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw std::runtime_error(path + ": malformed config line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    auto want = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::runtime_error(path + ": checkpoint config is missing " + key);
        return it->second;
    };
    ModelConfig cfg;
    cfg.d_model = std::stoi(want("model.d_model"));
    cfg.n_layers = std::stoi(want("model.layers"));
    cfg.n_heads = std::stoi(want("model.heads"));
    cfg.d_ffn = std::stoi(want("model.d_ffn"));
    cfg.vocab_size = std::stoi(want("model.vocab_size"));
    cfg.max_pos = std::stoi(want("model.max_pos"));
    cfg.dropout = std::stod(want("model.dropout"));
    cfg.smoothing = std::stod(want("model.smoothing"));
    cfg.lambda_token = std::stod(want("model.lambda_token"));
    cfg.lambda_pos = std::stod(want("model.lambda_pos"));

    Model m(cfg, /*init_seed=*/0);  // values are overwritten below

    size_t n_tensors = 0;
    {
        const std::string line = read_line(f, "tensor count");
        if (std::sscanf(line.c_str(), "tensors %zu", &n_tensors) != 1)
            throw std::runtime_error(path + ": malformed tensor count line '" + line + "'");
    }
    std::map<std::string, Tensor> by_name;
    for (auto& [name, t] : m.parameters()) by_name.emplace(name, t);

    size_t loaded = 0;
    if (meta) {
        meta->config = cfg;
        meta->extras = kv;
        meta->extra_tensors.clear();
    }
    for (size_t i = 0; i < n_tensors; ++i) {
        const std::string name = read_line(f, "tensor name");
        const std::string dims_line = read_line(f, "tensor dims");
        std::istringstream ds(dims_line);
        size_t rank = 0;
        if (!(ds >> rank)) throw std::runtime_error(path + ": malformed dims for tensor " + name);
        Shape shape(rank);
        int64_t count = 1;
        for (size_t d = 0; d < rank; ++d) {
            if (!(ds >> shape[d]) || shape[d] < 1)
                throw std::runtime_error(path + ": malformed dims for tensor " + name);
            count *= shape[d];
        }
        std::vector<double> vals = get_doubles_le(f, static_cast<size_t>(count));
        read_line(f, "tensor terminator");
        auto it = by_name.find(name);
        if (it != by_name.end()) {
            if (it->second.shape() != shape)
                throw std::runtime_error(path + ": tensor " + name + " has shape " +
                                         shape_str(shape) + ", expected " +
                                         shape_str(it->second.shape()));
            it->second.values() = std::move(vals);
            ++loaded;
        } else if (meta) {
            meta->extra_tensors.emplace(name, std::move(vals));
        }
    }
    if (loaded != by_name.size())
        throw std::runtime_error(path + ": checkpoint is missing " +
                                 std::to_string(by_name.size() - loaded) + " model tensors");
    return m;
}

}  // namespace bliss
