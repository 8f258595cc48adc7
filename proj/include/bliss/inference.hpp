#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bliss/model.hpp"

namespace bliss {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tape-free forward pass for decoding: same arithmetic as the training path
// (dropout off), with incremental per-layer KV caches on the decoder side.
class InferenceModel {
  public:
    explicit InferenceModel(const Model& m);

    // encoder output for [bos x eos]-framed ids, no padding
    RowMat encode(const std::vector<int>& ids) const;

    struct SourceCtx {
        RowMat h;
        std::vector<RowMat> cross_k, cross_v;  // per decoder layer
    };
    SourceCtx make_source_ctx(const std::vector<int>& ids) const;

    struct DecState {
        std::vector<RowMat> self_k, self_v;  // per layer, one row per consumed token
        int t = 0;                           // tokens consumed so far
    };
    DecState start_state() const;

    // feeds one token, returns log-probabilities over the vocabulary for the
    // next position
    Eigen::VectorXd step(const SourceCtx& src, DecState& st, int token) const;

    int vocab_size() const { return model_.cfg.vocab_size; }
    int max_pos() const { return model_.cfg.max_pos; }

  private:
    const Model& model_;
    Eigen::RowVectorXd attend_row(const AttentionParams& ap, const Eigen::RowVectorXd& q_in,
                                  const RowMat& k, const RowMat& v) const;
};

}  // namespace bliss
