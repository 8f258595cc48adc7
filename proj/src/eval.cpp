#include "bliss/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "bliss/inference.hpp"
#include "bliss/trainer.hpp"
#include "bliss/vocab.hpp"

namespace bliss {

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "shuffle-span") return NoiseKind::shuffle_span;
    if (s == "replace") return NoiseKind::replace;
    throw std::invalid_argument("unknown noise kind: " + s);
}

std::string noise_kind_to_string(NoiseKind k) {
    return k == NoiseKind::shuffle_span ? "shuffle-span" : "replace";
}

void NoiseSpec::validate() const {
    if (ratio < 0.0 || ratio > 1.0)
        throw std::invalid_argument("noise ratio must be within [0,1]");
}

std::vector<int> inject_noise(const std::vector<int>& source, const NoiseSpec& spec, int vocab_size,
                              Rng& rng) {
    spec.validate();
    std::vector<int> out = source;
    int L = static_cast<int>(out.size());
    if (L == 0 || spec.ratio == 0.0) return out;
    int m = static_cast<int>(std::lround(spec.ratio * L));

    if (spec.kind == NoiseKind::shuffle_span) {
        if (m < 2) return out;  // too short to shuffle meaningfully
        m = std::min(m, L);
        int start = static_cast<int>(rng.uniform_u64(static_cast<uint64_t>(L - m + 1)));
        std::vector<int> perm(m);
        for (;;) {  // uniformly random non-identity permutation
            std::iota(perm.begin(), perm.end(), 0);
            for (int i = m; i > 1; --i)
                std::swap(perm[i - 1], perm[rng.uniform_u64(static_cast<uint64_t>(i))]);
            bool identity = true;
            for (int i = 0; i < m; ++i)
                if (perm[i] != i) { identity = false; break; }
            if (!identity) break;
        }
        std::vector<int> span(out.begin() + start, out.begin() + start + m);
        for (int i = 0; i < m; ++i) out[start + i] = span[perm[i]];
        return out;
    }

    // replace kind
    if (m < 1) return out;
    m = std::min(m, L);
    int n_content = vocab_size - Vocabulary::n_specials;
    if (n_content < 2) throw std::invalid_argument("inject_noise: vocabulary too small to replace");
    std::vector<int> positions(L);
    std::iota(positions.begin(), positions.end(), 0);
    for (int i = 0; i < m; ++i) {  // partial Fisher-Yates: m distinct positions
        int j = i + static_cast<int>(rng.uniform_u64(static_cast<uint64_t>(L - i)));
        std::swap(positions[i], positions[j]);
    }
    for (int i = 0; i < m; ++i) {
        int pos = positions[i];
        int old = out[pos];
        int old_rel = old - Vocabulary::n_specials;
        if (old_rel < 0 || old_rel >= n_content) {
            out[pos] = Vocabulary::n_specials +
                       static_cast<int>(rng.uniform_u64(static_cast<uint64_t>(n_content)));
        } else {
            int draw = static_cast<int>(rng.uniform_u64(static_cast<uint64_t>(n_content - 1)));
            if (draw >= old_rel) draw += 1;
            out[pos] = Vocabulary::n_specials + draw;
        }
    }
    return out;
}

namespace {

double exact_match_pct(const std::vector<std::vector<int>>& hyps,
                       const std::vector<std::vector<int>>& refs) {
    size_t hits = 0;
    for (size_t i = 0; i < hyps.size(); ++i)
        if (hyps[i] == refs[i]) ++hits;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(hyps.size());
}

double score_decode(const InferenceModel& im, const std::vector<std::vector<int>>& sources,
                    const std::vector<std::vector<int>>& refs, TaskKind task,
                    const BeamConfig& bc) {
    std::vector<std::vector<int>> hyps;
    hyps.reserve(sources.size());
    for (const auto& src : sources) hyps.push_back(decode_sentence(im, src, bc));
    return task == TaskKind::toy_translation ? corpus_bleu(hyps, refs) : exact_match_pct(hyps, refs);
}

}  // namespace

std::vector<NoiseEvalRow> noise_eval(const std::vector<std::pair<std::string, const Model*>>& models,
                                     const std::vector<Sample>& test, TaskKind task,
                                     const std::vector<NoiseKind>& kinds,
                                     const std::vector<double>& ratios, uint64_t seed,
                                     const BeamConfig& bc) {
    if (models.empty()) throw std::invalid_argument("noise_eval: no models");
    if (test.empty()) throw std::invalid_argument("noise_eval: empty test corpus");
    bc.validate();

    std::vector<std::vector<int>> clean_sources, refs;
    clean_sources.reserve(test.size());
    refs.reserve(test.size());
    for (const Sample& s : test) {
        clean_sources.push_back(s.source);
        refs.push_back(s.target);
    }

    std::vector<InferenceModel> ims;
    ims.reserve(models.size());
    for (auto& [name, m] : models) ims.emplace_back(*m);

    std::vector<double> clean_scores(models.size());
    for (size_t mi = 0; mi < models.size(); ++mi)
        clean_scores[mi] = score_decode(ims[mi], clean_sources, refs, task, bc);

    std::vector<NoiseEvalRow> rows;
    std::string task_name = task_to_string(task);
    for (size_t ki = 0; ki < kinds.size(); ++ki) {
        for (size_t ri = 0; ri < ratios.size(); ++ri) {
            NoiseSpec spec{kinds[ki], ratios[ri]};
            // one shared noised corpus per (kind, ratio) cell
            uint64_t cell_seed =
                derive_seed(derive_seed(seed, noise_kind_to_string(kinds[ki]), ki), ri);
            std::vector<std::vector<int>> noised;
            noised.reserve(test.size());
            int vsz = models[0].second->cfg.vocab_size;
            for (size_t i = 0; i < clean_sources.size(); ++i) {
                Rng rng(derive_seed(cell_seed, static_cast<uint64_t>(i)));
                noised.push_back(inject_noise(clean_sources[i], spec, vsz, rng));
            }
            for (size_t mi = 0; mi < models.size(); ++mi) {
                double score = spec.ratio == 0.0 ? clean_scores[mi]
                                                 : score_decode(ims[mi], noised, refs, task, bc);
                double clean = clean_scores[mi];
                double scaled = clean != 0.0 ? score / clean : (score == clean ? 1.0 : 0.0);
                rows.push_back({models[mi].first, task_name, noise_kind_to_string(kinds[ki]),
                                spec.ratio, score, scaled});
            }
        }
    }
    return rows;
}

void write_noise_csv(const std::string& path, const std::vector<NoiseEvalRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "model,task,noise_kind,ratio,score,scaled_score\n";
    char buf[160];
    for (const NoiseEvalRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%g,%.6f,%.6f", r.model.c_str(), r.task.c_str(),
                      r.noise_kind.c_str(), r.ratio, r.score, r.scaled_score);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::vector<double>> extract_representations(const Model& m,
                                                         const std::vector<std::vector<int>>& sources) {
    InferenceModel im(m);
    int e = m.cfg.d_model;
    std::vector<std::vector<double>> reps;
    reps.reserve(sources.size());
    for (const auto& src : sources) {
        if (src.empty())
            throw std::invalid_argument("extract_representations: empty source sentence");
        std::vector<int> framed;
        framed.reserve(src.size() + 2);
        framed.push_back(Vocabulary::bos_id);
        framed.insert(framed.end(), src.begin(), src.end());
        framed.push_back(Vocabulary::eos_id);
        RowMat h = im.encode(framed);
        // mean-pool the content rows only; bos/eos frames stay out of the summary
        std::vector<double> mean(e, 0.0);
        const auto n = static_cast<Eigen::Index>(src.size());
        for (Eigen::Index r = 1; r <= n; ++r)
            for (int c = 0; c < e; ++c) mean[c] += h(r, c);
        for (int c = 0; c < e; ++c) mean[c] /= static_cast<double>(n);
        reps.push_back(std::move(mean));
    }
    return reps;
}

double probe(const std::vector<std::vector<double>>& reps, const std::vector<int>& labels,
             const ProbeSpec& spec) {
    if (reps.size() != labels.size() || reps.empty())
        throw std::invalid_argument("probe: representation/label size mismatch");
    int n_classes = 0;
    for (int l : labels) {
        if (l < 0) throw std::invalid_argument("probe: negative label");
        n_classes = std::max(n_classes, l + 1);
    }
    {
        int first = labels[0];
        bool single = true;
        for (int l : labels)
            if (l != first) { single = false; break; }
        if (single) throw std::invalid_argument("probe: degenerate single-class label set");
    }
    int e = static_cast<int>(reps[0].size());
    size_t n = reps.size();

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    {
        Rng rng(derive_seed(spec.seed, "probe-split"));
        for (size_t i = n; i > 1; --i)
            std::swap(perm[i - 1], perm[rng.uniform_u64(i)]);
    }
    size_t n_train = std::max<size_t>(1, std::min(n - 1, static_cast<size_t>(spec.train_frac * n)));
    std::vector<int> train_idx(perm.begin(), perm.begin() + n_train);
    std::vector<int> valid_idx(perm.begin() + n_train, perm.end());

    Rng init_rng(derive_seed(spec.seed, "probe-init"));
    auto xavier = [&](int rows, int cols) {
        double sd = std::sqrt(2.0 / (rows + cols));
        std::vector<double> v(static_cast<size_t>(rows) * cols);
        for (double& x : v) x = sd * init_rng.normal();
        return Tensor::from_values({rows, cols}, std::move(v), true);
    };
    Tensor w1 = xavier(e, spec.hidden);
    Tensor b1 = Tensor::zeros({spec.hidden}, true);
    Tensor w2 = xavier(spec.hidden, n_classes);
    Tensor b2 = Tensor::zeros({n_classes}, true);
    std::vector<std::pair<std::string, Tensor>> params = {
        {"w1", w1}, {"b1", b1}, {"w2", w2}, {"b2", b2}};
    AdamState opt;

    auto forward = [&](const std::vector<int>& idx, size_t beg, size_t cnt) {
        std::vector<double> xv(cnt * e);
        for (size_t r = 0; r < cnt; ++r)
            std::copy(reps[idx[beg + r]].begin(), reps[idx[beg + r]].end(), xv.begin() + r * e);
        Tensor x = Tensor::from_values({static_cast<int>(cnt), e}, std::move(xv));
        Tensor hidden = relu(add_bias(matmul(x, w1), b1));
        return add_bias(matmul(hidden, w2), b2);
    };

    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        std::vector<int> order = train_idx;
        Rng rng(derive_seed(spec.seed, "probe-order", static_cast<uint64_t>(epoch)));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_u64(i)]);
        for (size_t beg = 0; beg < order.size(); beg += spec.batch) {
            size_t cnt = std::min<size_t>(spec.batch, order.size() - beg);
            Tensor logits = forward(order, beg, cnt);
            std::vector<int> lab(cnt);
            for (size_t r = 0; r < cnt; ++r) lab[r] = labels[order[beg + r]];
            std::vector<uint8_t> mask(cnt, 1);
            Tensor loss = masked_cross_entropy(logits, lab, mask, 0.0);
            backward(loss);
            adam_step(params, opt, spec.lr, 0.0, 0.9, 0.999, 1e-8);
            for (auto& [name, t] : params) t.grad().clear();
        }
    }

    size_t hits = 0;
    for (size_t beg = 0; beg < valid_idx.size(); beg += spec.batch) {
        size_t cnt = std::min<size_t>(spec.batch, valid_idx.size() - beg);
        Tensor logits = forward(valid_idx, beg, cnt);
        const auto& lv = logits.values();
        for (size_t r = 0; r < cnt; ++r) {
            int best = 0;
            for (int c = 1; c < n_classes; ++c)
                if (lv[r * n_classes + c] > lv[r * n_classes + best]) best = c;
            if (best == labels[valid_idx[beg + r]]) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(valid_idx.size());
}

std::pair<std::vector<int>, int> selen_labels(const std::vector<std::vector<int>>& sources,
                                              int n_buckets) {
    if (sources.empty()) throw std::invalid_argument("selen_labels: empty corpus");
    if (n_buckets < 2) throw std::invalid_argument("selen_labels: need at least 2 buckets");
    std::map<int, size_t> counts;
    for (const auto& s : sources) counts[static_cast<int>(s.size())] += 1;

    // greedy equal-frequency binning over distinct lengths
    size_t total = sources.size();
    size_t per = (total + n_buckets - 1) / n_buckets;
    std::map<int, int> bucket_of;
    int bucket = 0;
    size_t acc = 0;
    size_t seen = 0;
    size_t remaining_vals = counts.size();
    for (auto& [len, c] : counts) {
        bucket_of[len] = bucket;
        acc += c;
        seen += c;
        --remaining_vals;
        // close the bucket once it has its share, unless the tail would run
        // out of distinct lengths for the remaining buckets
        if (acc >= per && bucket + 1 < n_buckets && remaining_vals >= 1) {
            ++bucket;
            acc = 0;
            per = (total - seen + (n_buckets - bucket) - 1) / (n_buckets - bucket);
        }
    }
    std::vector<int> labels(sources.size());
    for (size_t i = 0; i < sources.size(); ++i)
        labels[i] = bucket_of[static_cast<int>(sources[i].size())];
    return {labels, bucket + 1};
}

ProbeData make_bshif_probe(const CorpusSpec& spec, size_t n, uint64_t seed) {
    spec.validate();
    if (spec.len_min < 2)
        throw std::invalid_argument("bshif probe needs len_min >= 2: a one-token sentence has no "
                                    "adjacent pair to swap");
    ProbeData out;
    out.sources.reserve(n);
    out.labels.reserve(n);
    ZipfSampler zipf(spec.vocab_size - Vocabulary::n_specials, 1.2);
    for (size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, "bshif", i));
        int L = spec.len_min +
                static_cast<int>(rng.uniform_u64(
                    static_cast<uint64_t>(spec.len_max - spec.len_min + 1)));
        std::vector<int> s(L);
        for (;;) {  // need two distinct tokens so a differing swap exists
            for (int j = 0; j < L; ++j)
                s[j] = Vocabulary::n_specials + zipf.draw(rng);
            bool distinct = false;
            for (int j = 1; j < L; ++j)
                if (s[j] != s[0]) { distinct = true; break; }
            if (distinct) break;
        }
        std::sort(s.begin(), s.end());
        int label = static_cast<int>(i % 2);
        if (label == 1) {
            std::vector<int> eligible;
            for (int j = 0; j + 1 < L; ++j)
                if (s[j] != s[j + 1]) eligible.push_back(j);
            int j = eligible[rng.uniform_u64(eligible.size())];
            std::swap(s[j], s[j + 1]);
        }
        out.sources.push_back(std::move(s));
        out.labels.push_back(label);
    }
    return out;
}

}  // namespace bliss
