#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bliss/bleu.hpp"
#include "bliss/data.hpp"
#include "bliss/decode.hpp"
#include "bliss/model.hpp"

namespace bliss {

enum class NoiseKind { shuffle_span, replace };

NoiseKind noise_kind_from_string(const std::string& s);
std::string noise_kind_to_string(NoiseKind k);

struct NoiseSpec {
    NoiseKind kind = NoiseKind::replace;
    double ratio = 0.0;  // fraction of tokens touched
    void validate() const;
};

// shuffle-span: uniformly placed span of round(ratio*L) >= 2 tokens gets a
// uniformly random non-identity permutation; replace: round(ratio*L) distinct
// positions get uniform content ids != incumbent
std::vector<int> inject_noise(const std::vector<int>& source, const NoiseSpec& spec, int vocab_size,
                              Rng& rng);

struct NoiseEvalRow {
    std::string model;
    std::string task;
    std::string noise_kind;
    double ratio = 0.0;
    double score = 0.0;
    double scaled_score = 0.0;
};

// decode each model on shared noised copies of the test set; score is BLEU
// for toy-translation and exact-match % for copy/reverse; scaled = ratio of
// the noised score to the same model's clean score
std::vector<NoiseEvalRow> noise_eval(const std::vector<std::pair<std::string, const Model*>>& models,
                                     const std::vector<Sample>& test, TaskKind task,
                                     const std::vector<NoiseKind>& kinds,
                                     const std::vector<double>& ratios, uint64_t seed,
                                     const BeamConfig& bc);

void write_noise_csv(const std::string& path, const std::vector<NoiseEvalRow>& rows);

// one mean-pooled encoder vector per sentence (pooled over the content rows;
// the bos/eos frames stay out of the summary)
std::vector<std::vector<double>> extract_representations(const Model& m,
                                                         const std::vector<std::vector<int>>& sources);

struct ProbeSpec {
    int hidden = 256;
    double lr = 0.001;
    int epochs = 10;
    int batch = 32;
    double train_frac = 0.8;
    uint64_t seed = 0;
};

// MLP probe on frozen representations; returns validation accuracy
double probe(const std::vector<std::vector<double>>& reps, const std::vector<int>& labels,
             const ProbeSpec& spec);

// equal-frequency length buckets (at most n_buckets); returns labels and the
// number of buckets actually formed
std::pair<std::vector<int>, int> selen_labels(const std::vector<std::vector<int>>& sources,
                                              int n_buckets = 6);

struct ProbeData {
    std::vector<std::vector<int>> sources;
    std::vector<int> labels;
};

// BShif-analog corpus: canonical sentences are sorted ascending; label 1 means
// one adjacent differing pair was swapped
ProbeData make_bshif_probe(const CorpusSpec& spec, size_t n, uint64_t seed);

}  // namespace bliss
