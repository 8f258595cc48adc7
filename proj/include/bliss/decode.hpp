#pragma once

#include <memory>
#include <vector>

#include "bliss/inference.hpp"

namespace bliss {

struct BeamConfig {
    int beam = 1;
    double lp = 0.0;   // length-penalty exponent: rank by logprob / len^lp
    int max_len = 64;  // generated tokens, eos included
    void validate() const;
};

// Incremental next-token distribution behind the decoders, so beam search can
// be exercised on hand-built toy distributions as well as real models.
// States are handles; advancing never invalidates earlier handles.
class Stepper {
  public:
    virtual ~Stepper() = default;
    virtual int vocab() const = 0;
    // state after consuming bos; log-probs for the first output token are ready
    virtual int start() = 0;
    virtual int advance(int state, int token) = 0;
    virtual const std::vector<double>& logprobs(int state) const = 0;
};

struct DecodeResult {
    std::vector<int> tokens;  // generated output, eos stripped
    double logprob = 0.0;     // cumulative, eos included when finished
    bool finished = false;    // eos produced within max_len
    double normalized = 0.0;  // logprob / len^lp
};

DecodeResult greedy_decode(Stepper& stepper, int max_len);
DecodeResult beam_decode(Stepper& stepper, const BeamConfig& cfg);

// Stepper over a trained model and one source sentence (content ids; bos/eos
// framing is added here).
class ModelStepper : public Stepper {
  public:
    ModelStepper(const InferenceModel& im, const std::vector<int>& source);
    int vocab() const override;
    int start() override;
    int advance(int state, int token) override;
    const std::vector<double>& logprobs(int state) const override;

  private:
    const InferenceModel& im_;
    InferenceModel::SourceCtx ctx_;
    struct Entry {
        InferenceModel::DecState st;
        std::vector<double> lp;
    };
    std::vector<Entry> arena_;
    int push(InferenceModel::DecState st, int token);
};

// convenience: full pipeline for one sentence
std::vector<int> decode_sentence(const InferenceModel& im, const std::vector<int>& source,
                                 const BeamConfig& cfg);

}  // namespace bliss
