#include "bliss/decode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bliss/vocab.hpp"

namespace bliss {

void BeamConfig::validate() const {
    if (beam < 1) throw std::invalid_argument("decode: beam size must be >= 1");
    if (max_len < 1) throw std::invalid_argument("decode: max_len must be >= 1");
    if (lp < 0.0) throw std::invalid_argument("decode: length penalty must be >= 0");
}

namespace {

double normalized_score(double logprob, size_t gen_len, double lp) {
    const double len = static_cast<double>(std::max<size_t>(gen_len, 1));
    return logprob / std::pow(len, lp);
}

}  // namespace

DecodeResult greedy_decode(Stepper& stepper, int max_len) {
    DecodeResult res;
    int state = stepper.start();
    for (int t = 0; t < max_len; ++t) {
        const auto& lp = stepper.logprobs(state);
        int best = 0;
        for (int c = 1; c < static_cast<int>(lp.size()); ++c)
            if (lp[static_cast<size_t>(c)] > lp[static_cast<size_t>(best)]) best = c;
        res.logprob += lp[static_cast<size_t>(best)];
        if (best == Vocabulary::eos_id) {
            res.finished = true;
            res.normalized = normalized_score(res.logprob, res.tokens.size() + 1, 0.0);
            return res;
        }
        res.tokens.push_back(best);
        state = stepper.advance(state, best);
    }
    res.normalized = normalized_score(res.logprob, res.tokens.size(), 0.0);
    return res;  // unfinished
}

namespace {

// result ordering: normalized score first, a finished hypothesis beats an
// unfinished one on exact ties, and lexicographically smaller tokens settle
// the rest, so selection is a total order and fully deterministic
bool better_result(const DecodeResult& a, const DecodeResult& b) {
    if (a.normalized != b.normalized) return a.normalized > b.normalized;
    if (a.finished != b.finished) return a.finished;
    return a.tokens < b.tokens;
}

// one standard width-w pass: keep the w best continuations by cumulative
// log-prob, finalize eos only out of the top-w candidate slots, and rank
// everything that survives to the end by normalized score
DecodeResult beam_pass(Stepper& stepper, int beam, double lp_exp, int max_len) {
    struct Hyp {
        std::vector<int> tokens;
        double logprob = 0.0;
        int state = -1;
    };

    std::vector<Hyp> active{{{}, 0.0, stepper.start()}};
    DecodeResult best;
    bool have = false;
    auto offer = [&](DecodeResult cand) {
        if (!have || better_result(cand, best)) {
            best = std::move(cand);
            have = true;
        }
    };

    for (int t = 0; t < max_len && !active.empty(); ++t) {
        // all continuations of all active hypotheses
        struct Cand {
            double cum;
            int hyp;
            int token;
        };
        std::vector<Cand> cands;
        cands.reserve(active.size() * static_cast<size_t>(stepper.vocab()));
        for (size_t a = 0; a < active.size(); ++a) {
            const auto& lp = stepper.logprobs(active[a].state);
            for (int c = 0; c < static_cast<int>(lp.size()); ++c)
                cands.push_back({active[a].logprob + lp[static_cast<size_t>(c)],
                                 static_cast<int>(a), c});
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
            if (x.cum != y.cum) return x.cum > y.cum;
            if (x.hyp != y.hyp) return x.hyp < y.hyp;
            return x.token < y.token;
        });

        std::vector<Hyp> next;
        int slot = 0;  // rank within this step's sorted candidates
        for (const Cand& c : cands) {
            if (static_cast<int>(next.size()) >= beam && slot >= beam) break;
            const Hyp& src = active[static_cast<size_t>(c.hyp)];
            if (c.token == Vocabulary::eos_id) {
                // eos finalizes a hypothesis only from the top-w slots; a
                // low-ranked eos must not end the search early, and w=1 then
                // degenerates to exact greedy
                if (slot < beam) {
                    DecodeResult d;
                    d.tokens = src.tokens;
                    d.logprob = c.cum;
                    d.finished = true;
                    d.normalized = normalized_score(c.cum, d.tokens.size() + 1, lp_exp);
                    offer(std::move(d));
                }
            } else if (static_cast<int>(next.size()) < beam) {
                Hyp h;
                h.tokens = src.tokens;
                h.tokens.push_back(c.token);
                h.logprob = c.cum;
                h.state = stepper.advance(src.state, c.token);
                next.push_back(std::move(h));
            }
            ++slot;
        }
        active = std::move(next);
        if (have && best.finished && !active.empty()) {
            // admissible stop: log-probs only fall along a path and the
            // normalizer can rise to at most max_len^lp, so nothing grown
            // from the best active hypothesis (next was filled in sorted
            // order) can ever score above cum / max_len^lp; once even that
            // cannot beat the best finished hypothesis the search is over
            const double reach =
                active[0].logprob / std::pow(static_cast<double>(max_len), lp_exp);
            if (reach <= best.normalized) break;
        }
    }

    // whatever is still active competes as an unfinished hypothesis under the
    // same normalized score (after an admissible stop none of it can win)
    for (const Hyp& h : active) {
        DecodeResult d;
        d.tokens = h.tokens;
        d.logprob = h.logprob;
        d.finished = false;
        d.normalized = normalized_score(h.logprob, std::max<size_t>(h.tokens.size(), 1), lp_exp);
        offer(std::move(d));
    }
    if (!have) throw std::logic_error("beam_decode: no hypotheses at all");
    return best;
}

}  // namespace

DecodeResult beam_decode(Stepper& stepper, const BeamConfig& cfg) {
    cfg.validate();
    // A single fixed-width pass is not monotone in its width: a wider beam
    // can prune the exact path a narrower one rode to a better hypothesis.
    // Laddering the width from 1 to B and keeping the best result makes the
    // candidate pool grow with the budget, so a bigger B never does worse.
    DecodeResult best;
    bool have = false;
    for (int w = 1; w <= cfg.beam; ++w) {
        DecodeResult r = beam_pass(stepper, w, cfg.lp, cfg.max_len);
        if (!have || better_result(r, best)) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

ModelStepper::ModelStepper(const InferenceModel& im, const std::vector<int>& source) : im_(im) {
    std::vector<int> framed;
    framed.reserve(source.size() + 2);
    framed.push_back(Vocabulary::bos_id);
    framed.insert(framed.end(), source.begin(), source.end());
    framed.push_back(Vocabulary::eos_id);
    ctx_ = im_.make_source_ctx(framed);
}

int ModelStepper::vocab() const { return im_.vocab_size(); }

int ModelStepper::push(InferenceModel::DecState st, int token) {
    Entry e;
    e.st = std::move(st);
    const Eigen::VectorXd lp = im_.step(ctx_, e.st, token);
    e.lp.assign(lp.data(), lp.data() + lp.size());
    arena_.push_back(std::move(e));
    return static_cast<int>(arena_.size()) - 1;
}

int ModelStepper::start() { return push(im_.start_state(), Vocabulary::bos_id); }

int ModelStepper::advance(int state, int token) {
    return push(arena_[static_cast<size_t>(state)].st, token);  // copies the caches
}

const std::vector<double>& ModelStepper::logprobs(int state) const {
    return arena_[static_cast<size_t>(state)].lp;
}

std::vector<int> decode_sentence(const InferenceModel& im, const std::vector<int>& source,
                                 const BeamConfig& cfg) {
    BeamConfig eff = cfg;
    // the decoder consumes bos plus every generated token, so the length
    // budget must leave room in the position table
    eff.max_len = std::min(cfg.max_len, im.max_pos() - 1);
    ModelStepper stepper(im, source);
    const DecodeResult res = (eff.beam == 1 && eff.lp == 0.0) ? greedy_decode(stepper, eff.max_len)
                                                              : beam_decode(stepper, eff);
    return res.tokens;
}

}  // namespace bliss
