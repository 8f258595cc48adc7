#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bliss/augment.hpp"
#include "bliss/tensor.hpp"

namespace bliss {

struct ModelConfig {
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 2;
    int d_ffn = 128;
    int vocab_size = 0;   // required
    int max_pos = 400;    // position-head classes; also bounds sequence length
    double dropout = 0.1;
    double smoothing = 0.1;       // target label smoothing
    double lambda_token = 0.005;
    double lambda_pos = 0.005;
    void validate() const;
};

struct AttentionParams { Tensor wq, bq, wk, bk, wv, bv, wo, bo; };
struct LayerNormParams { Tensor g, b; };
struct FfnParams { Tensor w1, b1, w2, b2; };

struct EncoderLayer {
    AttentionParams attn;
    LayerNormParams ln1;
    FfnParams ffn;
    LayerNormParams ln2;
};

struct DecoderLayer {
    AttentionParams self_attn;
    LayerNormParams ln1;
    AttentionParams cross_attn;
    LayerNormParams ln2;
    FfnParams ffn;
    LayerNormParams ln3;
};

// Transformer encoder-decoder with tied input/output embeddings plus the two
// self-supervision heads.
class Model {
  public:
    Model(const ModelConfig& cfg, uint64_t init_seed);

    ModelConfig cfg;
    Tensor embed;                    // v x e, shared source/target and output projection
    std::vector<EncoderLayer> enc;
    std::vector<DecoderLayer> dec;
    Tensor w_token;                  // e x v
    Tensor w_pos;                    // e x max_pos

    // stable name -> tensor listing (initialization, optimizer, checkpoint order)
    std::vector<std::pair<std::string, Tensor>> parameters() const;

    // sinusoidal position encoding rows 0..max_pos-1, computed once
    const std::vector<double>& pos_encoding() const { return pe_; }

  private:
    std::vector<double> pe_;
};

// several sequences packed back to back into one row block
struct PackedSeqs {
    std::vector<int> ids;      // concatenated tokens
    std::vector<int> offsets;  // start row per sequence
    std::vector<int> lens;
    int total = 0;
};
PackedSeqs pack_sequences(const std::vector<std::vector<int>>& seqs);

// Batched encoder/decoder forwards over packed sequences (attention is
// restricted to each sequence's own block). drng=nullptr disables dropout.
Tensor encode_packed(Model& m, const PackedSeqs& src, Rng* drng);
Tensor decode_packed(Model& m, const Tensor& h, const PackedSeqs& src, const PackedSeqs& tgt_in,
                     Rng* drng);

// Single-sentence views of the same forwards. `ids` may carry a pad suffix:
// rows past n_real are excluded from attention everywhere.
Tensor encode(Model& m, const std::vector<int>& ids, int n_real, Rng* drng = nullptr);
Tensor decode_teacher_forced(Model& m, const Tensor& h, const std::vector<int>& tgt_in,
                             Rng* drng = nullptr);

// one training sentence: perturbed source, target, and supervision labels
struct BatchItem {
    std::vector<int> src;  // perturbed source, content ids only
    std::vector<int> tgt;
    Supervision sup;       // sized to src length
};

struct LossBreakdown {
    Tensor total;
    double nll = 0.0, token = 0.0, pos = 0.0;
    double token_acc = 0.0, pos_acc = 0.0;
    int token_count = 0, pos_count = 0;
};

// the combined objective: scalar L_total plus per-component readouts
double combine_losses(double nll, double l_token, double l_pos, double lambda_token,
                      double lambda_pos);
// L_token / L_pos for one sentence; label position j addresses h row
// j + row_offset (row_offset = 1 when h was encoded with a leading bos)
std::pair<Tensor, Tensor> self_supervision_losses(Model& m, const Tensor& h,
                                                  const Supervision& sup, int row_offset = 1);
LossBreakdown bliss_loss(Model& m, const std::vector<BatchItem>& batch, Rng* drng);

// ---- checkpointing ----

struct Checkpoint {
    ModelConfig config;
    std::map<std::string, std::string> extras;                 // e.g. opt.step, seed
    std::map<std::string, std::vector<double>> extra_tensors;  // e.g. opt.m.*, opt.v.*
};

void save_checkpoint(const std::string& path, const Model& m,
                     const std::map<std::string, std::string>& extras = {},
                     const std::vector<std::pair<std::string, Tensor>>& extra_tensors = {});
// rebuilds the model from the stored config and parameter payloads
Model load_model(const std::string& path, Checkpoint* meta = nullptr);

}  // namespace bliss
