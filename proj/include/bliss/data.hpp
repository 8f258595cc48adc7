#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bliss/rng.hpp"
#include "bliss/vocab.hpp"

namespace bliss {

// One synthetic task instance. Sequences hold content ids only; bos/eos are
// added at model time.
struct Sample {
    std::vector<int> source;
    std::vector<int> target;
    bool operator==(const Sample&) const = default;
};

enum class TaskKind { copy, reverse, toy_translation };

TaskKind task_from_string(const std::string& s);
std::string task_to_string(TaskKind t);

struct CorpusSpec {
    TaskKind task = TaskKind::toy_translation;
    int vocab_size = 200;  // total, including the 5 specials
    int len_min = 8;
    int len_max = 16;
    int64_t samples = 1000;
    uint64_t seed = 1;
    void validate() const;  // throws std::invalid_argument
};

// Integer-table Zipf(s) sampler over ranks 0..n-1; draws are integer-only so
// equal seeds give identical streams everywhere.
class ZipfSampler {
  public:
    ZipfSampler(int n, double s);
    int draw(Rng& rng) const;  // 0-based rank
    int size() const { return static_cast<int>(cum_.size()); }

  private:
    std::vector<uint64_t> cum_;  // inclusive cumulative weights
};

// the toy-translation target rule: map through the bijection, then swap every
// adjacent pair starting at even indices
std::vector<int> toy_translate(const std::vector<int>& source, const std::vector<int>& bijection);

// seeded random bijection over content ids; identity on specials.
// bijection[id] is the translated id.
std::vector<int> make_content_bijection(int vocab_size, uint64_t seed);

std::vector<Sample> gen_synthetic(const CorpusSpec& spec);

// Corpus file: one sample per line, "src ids<TAB>tgt ids", space-separated.
void save_corpus(const std::string& path, const std::vector<Sample>& samples);
std::vector<Sample> load_corpus(const std::string& path);  // parse errors name the line

}  // namespace bliss
