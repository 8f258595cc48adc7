#pragma once

#include <vector>

namespace bliss {

// corpus-level BLEU with n-gram precisions up to 4, no smoothing
struct bleu_stats {
    double score = 0.0;          // 0..100
    double precisions[4] = {0, 0, 0, 0};
    double brevity_penalty = 1.0;
    long long hyp_len = 0;
    long long ref_len = 0;
};

bleu_stats corpus_bleu_stats(const std::vector<std::vector<int>>& hyps,
                             const std::vector<std::vector<int>>& refs);

double corpus_bleu(const std::vector<std::vector<int>>& hyps,
                   const std::vector<std::vector<int>>& refs);

}  // namespace bliss
