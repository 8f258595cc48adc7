#include "bliss/augment.hpp"

#include <cmath>
#include <stdexcept>

#include "bliss/vocab.hpp"

namespace bliss {

AugmentMode augment_mode_from_string(const std::string& s) {
    if (s == "none") return AugmentMode::none;
    if (s == "bliss") return AugmentMode::bliss;
    if (s == "dropout") return AugmentMode::dropout;
    if (s == "blank") return AugmentMode::blank;
    if (s == "shuffle-baseline") return AugmentMode::shuffle_baseline;
    throw std::invalid_argument("unknown augment mode '" + s +
                                "' (none, bliss, dropout, blank, shuffle-baseline)");
}

std::string augment_mode_to_string(AugmentMode m) {
    switch (m) {
        case AugmentMode::none: return "none";
        case AugmentMode::bliss: return "bliss";
        case AugmentMode::dropout: return "dropout";
        case AugmentMode::blank: return "blank";
        case AugmentMode::shuffle_baseline: return "shuffle-baseline";
    }
    throw std::logic_error("unreachable augment mode");
}

void AugmentConfig::validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("augment: gamma must be in [0,1]");
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("augment: p must be in (0,1)");
    if (alpha_shu < 0.0 || alpha_shu > 1.0 || alpha_rep < 0.0 || alpha_rep > 1.0)
        throw std::invalid_argument("augment: alpha caps must be in [0,1]");
    if (window < 2) throw std::invalid_argument("augment: window K must be >= 2");
    if (drop_ratio < 0.0 || drop_ratio >= 1.0)
        throw std::invalid_argument("augment: drop_ratio must be in [0,1)");
    if (blank_ratio < 0.0 || blank_ratio > 1.0)
        throw std::invalid_argument("augment: blank_ratio must be in [0,1]");
}

std::vector<double> perturb_count_pmf(double p, int cap) {
    if (cap < 1) return {};
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("perturb_count_pmf: p must be in (0,1)");
    std::vector<double> pmf(static_cast<size_t>(cap));
    double z = 0.0;
    for (int l = 1; l <= cap; ++l) {
        const double w = p * std::pow(1.0 - p, static_cast<double>(l - 1));
        pmf[static_cast<size_t>(l - 1)] = w;
        z += w;
    }
    for (double& v : pmf) v /= z;
    return pmf;
}

int sample_perturb_count(double alpha, int L, double p, Rng& rng, bool no_smooth) {
    const int cap = static_cast<int>(std::floor(alpha * static_cast<double>(L)));
    if (cap < 1) return 0;
    if (no_smooth) return cap;
    // inverse-cdf draw against the renormalized truncated geometric
    const auto pmf = perturb_count_pmf(p, cap);
    const double u = rng.uniform_real();
    double acc = 0.0;
    for (int l = 1; l <= cap; ++l) {
        acc += pmf[static_cast<size_t>(l - 1)];
        if (u < acc) return l;
    }
    return cap;
}

bool gate_sentence(double gamma, Rng& rng) {
    if (gamma <= 0.0) return false;
    if (gamma >= 1.0) return true;
    return rng.uniform_real() < gamma;
}

void shuffle_perturb(std::vector<int>& seq, int l_shu, int K, Rng& rng,
                     std::vector<PerturbRecord>& records, std::vector<uint8_t>& touched) {
    const int L = static_cast<int>(seq.size());
    if (l_shu <= 0 || L < 2) return;
    touched.resize(static_cast<size_t>(L), 0);
    const int n_swaps = (l_shu + 1) / 2;
    for (int s = 0; s < n_swaps; ++s) {
        bool done = false;
        for (int attempt = 0; attempt < 10 && !done; ++attempt) {
            const int i = static_cast<int>(rng.uniform_u64(static_cast<uint64_t>(L)));
            if (touched[static_cast<size_t>(i)]) continue;
            // untouched partners within the window, excluding i itself
            std::vector<int> eligible;
            for (int j = std::max(0, i - K + 1); j <= std::min(L - 1, i + K - 1); ++j)
                if (j != i && !touched[static_cast<size_t>(j)]) eligible.push_back(j);
            if (eligible.empty()) continue;
            const int j = eligible[rng.uniform_u64(eligible.size())];
            const int ti = seq[static_cast<size_t>(i)], tj = seq[static_cast<size_t>(j)];
            seq[static_cast<size_t>(i)] = tj;
            seq[static_cast<size_t>(j)] = ti;
            touched[static_cast<size_t>(i)] = 1;
            touched[static_cast<size_t>(j)] = 1;
            if (ti != tj) {  // equal tokens: the sequence did not change, nothing to supervise
                records.push_back({i, PerturbKind::shuffled, ti, j});
                records.push_back({j, PerturbKind::shuffled, tj, i});
            }
            done = true;
        }
        // 10 misses: sentence too short or saturated, give this swap up
    }
}

void replace_perturb(std::vector<int>& seq, int l_rep, int vocab_size, Rng& rng,
                     const std::vector<uint8_t>& excluded, std::vector<PerturbRecord>& records) {
    const int L = static_cast<int>(seq.size());
    const int n_content = vocab_size - Vocabulary::n_specials;
    if (l_rep <= 0 || n_content < 2) return;
    std::vector<int> eligible;
    for (int j = 0; j < L; ++j)
        if (excluded.empty() || !excluded[static_cast<size_t>(j)]) eligible.push_back(j);
    const int n = std::min<int>(l_rep, static_cast<int>(eligible.size()));  // clamp, never fail
    for (int t = 0; t < n; ++t) {
        // partial Fisher-Yates draw of a fresh position
        const int pick = t + static_cast<int>(rng.uniform_u64(eligible.size() - static_cast<size_t>(t)));
        std::swap(eligible[static_cast<size_t>(t)], eligible[static_cast<size_t>(pick)]);
        const int j = eligible[static_cast<size_t>(t)];
        const int old = seq[static_cast<size_t>(j)];
        // uniform content id, skipping the incumbent when it is a content id
        int id;
        if (old >= Vocabulary::n_specials) {
            const uint64_t r = rng.uniform_u64(static_cast<uint64_t>(n_content - 1));
            id = Vocabulary::n_specials + static_cast<int>(r);
            if (id >= old) ++id;
        } else {
            id = Vocabulary::n_specials + static_cast<int>(rng.uniform_u64(static_cast<uint64_t>(n_content)));
        }
        seq[static_cast<size_t>(j)] = id;
        records.push_back({j, PerturbKind::replaced, old, j});
    }
}

PerturbationOutcome augment_sentence(const std::vector<int>& source, const AugmentConfig& cfg,
                                     Rng& rng, int vocab_size) {
    cfg.validate();
    PerturbationOutcome out;
    out.perturbed = source;
    const int L = static_cast<int>(source.size());

    switch (cfg.mode) {
        case AugmentMode::none:
            return out;
        case AugmentMode::bliss: {
            std::vector<uint8_t> touched;
            if (gate_sentence(cfg.gamma, rng)) {
                const int l_shu = sample_perturb_count(cfg.alpha_shu, L, cfg.p, rng, cfg.no_smooth);
                shuffle_perturb(out.perturbed, l_shu, cfg.window, rng, out.records, touched);
            }
            if (gate_sentence(cfg.gamma, rng)) {
                const int l_rep = sample_perturb_count(cfg.alpha_rep, L, cfg.p, rng, cfg.no_smooth);
                replace_perturb(out.perturbed, l_rep, vocab_size, rng, touched, out.records);
            }
            return out;
        }
        case AugmentMode::dropout: {
            std::vector<int> kept;
            for (int tok : out.perturbed)
                if (rng.uniform_real() >= cfg.drop_ratio) kept.push_back(tok);
            if (!kept.empty()) out.perturbed = std::move(kept);  // never empty a sentence
            return out;
        }
        case AugmentMode::blank: {
            for (int& tok : out.perturbed)
                if (rng.uniform_real() < cfg.blank_ratio) tok = Vocabulary::blank_id;
            return out;
        }
        case AugmentMode::shuffle_baseline: {
            // windowed swaps over the whole sentence, no supervision records
            std::vector<uint8_t> touched;
            std::vector<PerturbRecord> scratch;
            shuffle_perturb(out.perturbed, L, cfg.window, rng, scratch, touched);
            return out;
        }
    }
    throw std::logic_error("unreachable augment mode");
}

Supervision build_supervision(const PerturbationOutcome& outcome, int L, int max_pos,
                              bool token_replaced_only) {
    if (static_cast<int>(outcome.perturbed.size()) != L)
        throw std::invalid_argument("build_supervision: outcome length does not match L");
    Supervision sup;
    sup.token_labels.assign(static_cast<size_t>(L), 0);
    sup.token_mask.assign(static_cast<size_t>(L), 0);
    sup.pos_labels.assign(static_cast<size_t>(L), 0);
    sup.pos_mask.assign(static_cast<size_t>(L), 0);
    for (const auto& r : outcome.records) {
        if (r.position < 0 || r.position >= L)
            throw std::out_of_range("build_supervision: record position outside sentence");
        if (r.kind == PerturbKind::shuffled) {
            if (r.origin_position >= max_pos)
                throw std::out_of_range("build_supervision: origin position " +
                                        std::to_string(r.origin_position) +
                                        " exceeds position-head range " + std::to_string(max_pos));
            sup.pos_labels[static_cast<size_t>(r.position)] = r.origin_position;
            sup.pos_mask[static_cast<size_t>(r.position)] = 1;
            if (!token_replaced_only) {
                sup.token_labels[static_cast<size_t>(r.position)] = r.original_token;
                sup.token_mask[static_cast<size_t>(r.position)] = 1;
            }
        } else {
            sup.token_labels[static_cast<size_t>(r.position)] = r.original_token;
            sup.token_mask[static_cast<size_t>(r.position)] = 1;
        }
    }
    return sup;
}

}  // namespace bliss
