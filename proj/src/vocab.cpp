#include "bliss/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bliss {

namespace {
const char* kSpecials[Vocabulary::n_specials] = {"<pad>", "<bos>", "<eos>", "<unk>", "<blank>"};
}

Vocabulary::Vocabulary() {
    for (const char* s : kSpecials) add_token(s);
}

Vocabulary Vocabulary::for_size(int v) {
    if (v < n_specials + 1)
        throw std::invalid_argument("vocabulary size must be at least " +
                                    std::to_string(n_specials + 1) + ", got " + std::to_string(v));
    Vocabulary voc;
    for (int id = n_specials; id < v; ++id) voc.add_token("w" + std::to_string(id));
    return voc;
}

int Vocabulary::add_token(const std::string& token) {
    if (token.empty()) throw std::invalid_argument("cannot add empty token");
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
    index_.emplace(token, id);
    return id;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size())
        throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of " +
                                std::to_string(size()));
    return tokens_[static_cast<size_t>(id)];
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? unk_id : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return index_.count(token) != 0; }

std::vector<int> Vocabulary::encode_line(const std::string& line) const {
    std::vector<int> ids;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) ids.push_back(id_of(tok));
    return ids;
}

std::string Vocabulary::decode_ids(const std::vector<int>& ids) const {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ' ';
        out += token(ids[i]);
    }
    return out;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write vocabulary file " + path);
    for (const auto& t : tokens_) f << t << '\n';
    if (!f) throw std::runtime_error("write failed on " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open vocabulary file " + path);
    Vocabulary voc;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno <= n_specials) {
            if (line != kSpecials[lineno - 1])
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected special token " +
                                         std::string(kSpecials[lineno - 1]) + ", got '" + line + "'");
            continue;
        }
        if (line.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty token line");
        if (voc.contains(line))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate token '" +
                                     line + "'");
        voc.add_token(line);
    }
    if (lineno < n_specials)
        throw std::runtime_error(path + ": vocabulary file is missing the special tokens");
    return voc;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& paths, int64_t* skipped_lines) {
    std::map<std::string, int64_t> counts;  // ordered map: lexicographic tie-break for free
    int64_t skipped = 0;
    for (const auto& path : paths) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open token file " + path);
        std::string line;
        while (std::getline(f, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::istringstream is(line);
            std::string tok;
            bool any = false;
            while (is >> tok) {
                ++counts[tok];
                any = true;
            }
            if (!any) ++skipped;
        }
    }
    if (skipped_lines) *skipped_lines = skipped;
    std::vector<std::pair<std::string, int64_t>> by_freq(counts.begin(), counts.end());
    std::stable_sort(by_freq.begin(), by_freq.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary voc;
    for (const auto& [tok, n] : by_freq) {
        (void)n;
        if (!voc.contains(tok)) voc.add_token(tok);
    }
    return voc;
}

}  // namespace bliss
