#include "bliss/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bliss {

namespace {
// room for bos/eos against the default position-head range
constexpr int kDefaultMaxPos = 400;
}

TaskKind task_from_string(const std::string& s) {
    if (s == "copy") return TaskKind::copy;
    if (s == "reverse") return TaskKind::reverse;
    if (s == "toy-translation") return TaskKind::toy_translation;
    throw std::invalid_argument("unknown task '" + s + "' (expected copy, reverse, or toy-translation)");
}

std::string task_to_string(TaskKind t) {
    switch (t) {
        case TaskKind::copy: return "copy";
        case TaskKind::reverse: return "reverse";
        case TaskKind::toy_translation: return "toy-translation";
    }
    throw std::logic_error("unreachable task kind");
}

void CorpusSpec::validate() const {
    if (vocab_size < Vocabulary::n_specials + 1)
        throw std::invalid_argument("corpus spec: vocab_size must be at least 6");
    if (len_min < 1) throw std::invalid_argument("corpus spec: len_min must be >= 1");
    if (len_max < len_min) throw std::invalid_argument("corpus spec: len_max < len_min");
    if (len_max > kDefaultMaxPos - 2)
        throw std::invalid_argument("corpus spec: len_max must leave room for bos/eos (<= " +
                                    std::to_string(kDefaultMaxPos - 2) + ")");
    if (samples < 1) throw std::invalid_argument("corpus spec: samples must be >= 1");
}

ZipfSampler::ZipfSampler(int n, double s) {
    if (n < 1) throw std::invalid_argument("zipf: need at least one rank");
    cum_.resize(static_cast<size_t>(n));
    // fixed-point weights so the sampling path is integer-only
    const double scale = 0x1.0p40;
    uint64_t acc = 0;
    for (int r = 0; r < n; ++r) {
        uint64_t w = static_cast<uint64_t>(std::llround(std::pow(static_cast<double>(r + 1), -s) * scale));
        if (w == 0) w = 1;
        acc += w;
        cum_[static_cast<size_t>(r)] = acc;
    }
}

int ZipfSampler::draw(Rng& rng) const {
    const uint64_t u = rng.uniform_u64(cum_.back());
    // first rank whose cumulative weight exceeds u
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return static_cast<int>(it - cum_.begin());
}

std::vector<int> toy_translate(const std::vector<int>& source, const std::vector<int>& bijection) {
    std::vector<int> tgt(source.size());
    for (size_t i = 0; i < source.size(); ++i) {
        const int id = source[i];
        if (id < 0 || id >= static_cast<int>(bijection.size()))
            throw std::out_of_range("toy_translate: id " + std::to_string(id) +
                                    " outside bijection table");
        tgt[i] = bijection[static_cast<size_t>(id)];
    }
    for (size_t i = 0; i + 1 < tgt.size(); i += 2) std::swap(tgt[i], tgt[i + 1]);
    return tgt;
}

std::vector<int> make_content_bijection(int vocab_size, uint64_t seed) {
    std::vector<int> bij(static_cast<size_t>(vocab_size));
    std::iota(bij.begin(), bij.end(), 0);
    Rng rng(seed);
    // Fisher-Yates over the content range only
    for (int i = vocab_size - 1; i > Vocabulary::n_specials; --i) {
        const int j = Vocabulary::n_specials +
                      static_cast<int>(rng.uniform_u64(static_cast<uint64_t>(i - Vocabulary::n_specials + 1)));
        std::swap(bij[static_cast<size_t>(i)], bij[static_cast<size_t>(j)]);
    }
    return bij;
}

std::vector<Sample> gen_synthetic(const CorpusSpec& spec) {
    spec.validate();
    const int n_content = spec.vocab_size - Vocabulary::n_specials;
    ZipfSampler zipf(n_content, 1.2);
    std::vector<int> bij;
    if (spec.task == TaskKind::toy_translation)
        bij = make_content_bijection(spec.vocab_size, derive_seed(spec.seed, "bijection"));

    std::vector<Sample> out;
    out.reserve(static_cast<size_t>(spec.samples));
    for (int64_t i = 0; i < spec.samples; ++i) {
        Rng rng(derive_seed(spec.seed, "gen", static_cast<uint64_t>(i)));
        const int L = spec.len_min + static_cast<int>(rng.uniform_u64(
                                         static_cast<uint64_t>(spec.len_max - spec.len_min + 1)));
        Sample s;
        s.source.resize(static_cast<size_t>(L));
        for (int j = 0; j < L; ++j)
            s.source[static_cast<size_t>(j)] = Vocabulary::n_specials + zipf.draw(rng);
        switch (spec.task) {
            case TaskKind::copy: s.target = s.source; break;
            case TaskKind::reverse:
                s.target.assign(s.source.rbegin(), s.source.rend());
                break;
            case TaskKind::toy_translation: s.target = toy_translate(s.source, bij); break;
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

void write_ids(std::ostream& os, const std::vector<int>& ids) {
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) os << ' ';
        os << ids[i];
    }
}

std::vector<int> parse_ids(const std::string& field, const std::string& path, int lineno) {
    std::vector<int> ids;
    std::istringstream is(field);
    std::string tok;
    while (is >> tok) {
        size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size() || v < 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": non-integer token field '" + tok + "'");
        ids.push_back(v);
    }
    return ids;
}

}  // namespace

void save_corpus(const std::string& path, const std::vector<Sample>& samples) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write corpus file " + path);
    for (const auto& s : samples) {
        write_ids(f, s.source);
        f << '\t';
        write_ids(f, s.target);
        f << '\n';
    }
    if (!f) throw std::runtime_error("write failed on " + path);
}

std::vector<Sample> load_corpus(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open corpus file " + path);
    std::vector<Sample> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected exactly one tab separating source and target");
        Sample s;
        s.source = parse_ids(line.substr(0, tab), path, lineno);
        s.target = parse_ids(line.substr(tab + 1), path, lineno);
        if (s.source.empty() || s.target.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": empty source or target side");
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace bliss
