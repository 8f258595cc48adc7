#include "bliss/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bliss {

namespace {

using ngram_counts = std::map<std::vector<int>, long long>;

ngram_counts count_ngrams(const std::vector<int>& toks, int n) {
    ngram_counts out;
    if (static_cast<int>(toks.size()) < n) return out;
    for (size_t i = 0; i + n <= toks.size(); ++i)
        out[std::vector<int>(toks.begin() + i, toks.begin() + i + n)] += 1;
    return out;
}

}  // namespace

bleu_stats corpus_bleu_stats(const std::vector<std::vector<int>>& hyps,
                             const std::vector<std::vector<int>>& refs) {
    if (hyps.size() != refs.size())
        throw std::invalid_argument("corpus_bleu: hypothesis/reference count mismatch");
    if (hyps.empty()) throw std::invalid_argument("corpus_bleu: empty corpus");

    long long matched[4] = {0, 0, 0, 0};
    long long total[4] = {0, 0, 0, 0};
    long long hyp_len = 0, ref_len = 0;

    for (size_t s = 0; s < hyps.size(); ++s) {
        const auto& hyp = hyps[s];
        const auto& ref = refs[s];
        hyp_len += static_cast<long long>(hyp.size());
        ref_len += static_cast<long long>(ref.size());
        for (int n = 1; n <= 4; ++n) {
            ngram_counts hc = count_ngrams(hyp, n);
            ngram_counts rc = count_ngrams(ref, n);
            for (const auto& [gram, c] : hc) {
                total[n - 1] += c;
                auto it = rc.find(gram);
                if (it != rc.end()) matched[n - 1] += std::min(c, it->second);
            }
        }
    }

    bleu_stats st;
    st.hyp_len = hyp_len;
    st.ref_len = ref_len;

    double log_prec_sum = 0.0;
    bool any_zero = false;
    for (int n = 0; n < 4; ++n) {
        st.precisions[n] = total[n] > 0
                               ? static_cast<double>(matched[n]) / static_cast<double>(total[n])
                               : 0.0;
        if (matched[n] == 0 || total[n] == 0)
            any_zero = true;
        else
            log_prec_sum += std::log(st.precisions[n]);
    }

    st.brevity_penalty =
        (hyp_len >= ref_len || hyp_len == 0)
            ? 1.0
            : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    if (hyp_len == 0) st.brevity_penalty = 0.0;

    st.score = any_zero ? 0.0 : 100.0 * st.brevity_penalty * std::exp(log_prec_sum / 4.0);
    return st;
}

double corpus_bleu(const std::vector<std::vector<int>>& hyps,
                   const std::vector<std::vector<int>>& refs) {
    return corpus_bleu_stats(hyps, refs).score;
}

}  // namespace bliss
