#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bliss/rng.hpp"

namespace bliss {

enum class AugmentMode { none, bliss, dropout, blank, shuffle_baseline };

AugmentMode augment_mode_from_string(const std::string& s);
std::string augment_mode_to_string(AugmentMode m);

struct AugmentConfig {
    AugmentMode mode = AugmentMode::bliss;
    double gamma = 0.3;      // per-function gating probability
    double alpha_shu = 0.1;  // max shuffled fraction
    double alpha_rep = 0.1;  // max replaced fraction
    double p = 0.2;          // geometric parameter
    int window = 3;          // shuffle window K
    bool no_smooth = false;  // ablation: perturbation count pinned at the cap
    // Scope of the token loss: when set, only replaced positions carry token
    // labels (shuffled ones keep position labels only).
    bool token_replaced_only = false;
    double drop_ratio = 0.1;   // dropout baseline
    double blank_ratio = 0.1;  // blank baseline
    void validate() const;
};

enum class PerturbKind { shuffled, replaced };

struct PerturbRecord {
    int position;        // slot in the perturbed sequence
    PerturbKind kind;
    int original_token;  // token that used to sit at `position`
    int origin_position; // where the token now at `position` came from
    bool operator==(const PerturbRecord&) const = default;
};

struct PerturbationOutcome {
    std::vector<int> perturbed;
    std::vector<PerturbRecord> records;
    bool operator==(const PerturbationOutcome&) const = default;
};

// normalized truncated-geometric pmf over counts 1..cap
std::vector<double> perturb_count_pmf(double p, int cap);

// perturbation count for one sentence/function; 0 when floor(alpha*L) < 1
int sample_perturb_count(double alpha, int L, double p, Rng& rng, bool no_smooth = false);

bool gate_sentence(double gamma, Rng& rng);

// ceil(l_shu/2) window-bounded swaps over untouched positions; `touched`
// tracks every position that took part in a swap (even a no-op equal-token
// one) and is shared with replace_perturb's exclusion set
void shuffle_perturb(std::vector<int>& seq, int l_shu, int K, Rng& rng,
                     std::vector<PerturbRecord>& records, std::vector<uint8_t>& touched);

// replaces up to l_rep eligible positions with content ids != incumbent
void replace_perturb(std::vector<int>& seq, int l_rep, int vocab_size, Rng& rng,
                     const std::vector<uint8_t>& excluded, std::vector<PerturbRecord>& records);

PerturbationOutcome augment_sentence(const std::vector<int>& source, const AugmentConfig& cfg,
                                     Rng& rng, int vocab_size);

struct Supervision {
    std::vector<int> token_labels;
    std::vector<uint8_t> token_mask;
    std::vector<int> pos_labels;
    std::vector<uint8_t> pos_mask;
    bool operator==(const Supervision&) const = default;
};

// Per-position label/mask arrays for the two heads. Positions are 0-based
// source indices; max_pos bounds what the position head can express.
Supervision build_supervision(const PerturbationOutcome& outcome, int L, int max_pos,
                              bool token_replaced_only = false);

}  // namespace bliss
