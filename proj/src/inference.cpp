#define EIGEN_DONT_PARALLELIZE
#include "bliss/inference.hpp"

#include <cmath>
#include <stdexcept>

namespace bliss {

namespace {

using RowVec = Eigen::RowVectorXd;

Eigen::Map<const RowMat> mat_of(const Tensor& t) {
    return {t.values().data(), t.dim(0), t.dim(1)};
}

Eigen::Map<const RowVec> vec_of(const Tensor& t) {
    return {t.values().data(), t.dim(0)};
}

void layer_norm_rows(RowMat& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5) {
    const auto g = vec_of(gain);
    const auto b = vec_of(bias);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        const double rstd = 1.0 / std::sqrt(var + eps);
        x.row(r) = (((x.row(r).array() - mean) * rstd) * g.array() + b.array()).matrix();
    }
}

void softmax_row(RowVec& v) {
    const double mx = v.maxCoeff();
    v = (v.array() - mx).exp().matrix();
    v /= v.sum();
}

}  // namespace

InferenceModel::InferenceModel(const Model& m) : model_(m) {}

RowMat InferenceModel::encode(const std::vector<int>& ids) const {
    const Model& m = model_;
    const int e = m.cfg.d_model, nh = m.cfg.n_heads, dh = e / nh;
    const int L = static_cast<int>(ids.size());
    if (L > m.cfg.max_pos)
        throw std::invalid_argument("inference: sequence exceeds max position");
    const auto emb = mat_of(m.embed);
    const double sc = std::sqrt(static_cast<double>(e));

    RowMat x(L, e);
    for (int i = 0; i < L; ++i) {
        if (ids[static_cast<size_t>(i)] < 0 || ids[static_cast<size_t>(i)] >= m.cfg.vocab_size)
            throw std::out_of_range("inference: token id outside vocabulary");
        x.row(i) = emb.row(ids[static_cast<size_t>(i)]) * sc;
        x.row(i) += Eigen::Map<const RowVec>(m.pos_encoding().data() + static_cast<size_t>(i) * e, e);
    }

    for (const auto& layer : m.enc) {
        const auto& ap = layer.attn;
        RowMat q = (x * mat_of(ap.wq)).rowwise() + vec_of(ap.bq);
        RowMat k = (x * mat_of(ap.wk)).rowwise() + vec_of(ap.bk);
        RowMat v = (x * mat_of(ap.wv)).rowwise() + vec_of(ap.bv);
        RowMat o(L, e);
        const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
        for (int h = 0; h < nh; ++h) {
            const auto qh = q.middleCols(h * dh, dh);
            const auto kh = k.middleCols(h * dh, dh);
            const auto vh = v.middleCols(h * dh, dh);
            RowMat scores = qh * kh.transpose() * inv;
            for (Eigen::Index r = 0; r < scores.rows(); ++r) {
                RowVec row = scores.row(r);
                softmax_row(row);
                scores.row(r) = row;
            }
            o.middleCols(h * dh, dh) = scores * vh;
        }
        x += (o * mat_of(ap.wo)).rowwise() + vec_of(ap.bo);
        layer_norm_rows(x, layer.ln1.g, layer.ln1.b);
        RowMat f = ((x * mat_of(layer.ffn.w1)).rowwise() + vec_of(layer.ffn.b1)).cwiseMax(0.0);
        x += (f * mat_of(layer.ffn.w2)).rowwise() + vec_of(layer.ffn.b2);
        layer_norm_rows(x, layer.ln2.g, layer.ln2.b);
    }
    return x;
}

InferenceModel::SourceCtx InferenceModel::make_source_ctx(const std::vector<int>& ids) const {
    SourceCtx ctx;
    ctx.h = encode(ids);
    for (const auto& layer : model_.dec) {
        const auto& ap = layer.cross_attn;
        ctx.cross_k.push_back((ctx.h * mat_of(ap.wk)).rowwise() + vec_of(ap.bk));
        ctx.cross_v.push_back((ctx.h * mat_of(ap.wv)).rowwise() + vec_of(ap.bv));
    }
    return ctx;
}

InferenceModel::DecState InferenceModel::start_state() const {
    DecState st;
    const int e = model_.cfg.d_model;
    for (size_t l = 0; l < model_.dec.size(); ++l) {
        st.self_k.emplace_back(0, e);
        st.self_v.emplace_back(0, e);
    }
    return st;
}

Eigen::RowVectorXd InferenceModel::attend_row(const AttentionParams& ap, const RowVec& q_in,
                                              const RowMat& k, const RowMat& v) const {
    const int e = model_.cfg.d_model, nh = model_.cfg.n_heads, dh = e / nh;
    const RowVec q = q_in * mat_of(ap.wq) + vec_of(ap.bq);
    RowVec o(e);
    const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int h = 0; h < nh; ++h) {
        RowVec scores = q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose() * inv;
        softmax_row(scores);
        o.middleCols(h * dh, dh) = scores * v.middleCols(h * dh, dh);
    }
    return o * mat_of(ap.wo) + vec_of(ap.bo);
}

Eigen::VectorXd InferenceModel::step(const SourceCtx& src, DecState& st, int token) const {
    const Model& m = model_;
    const int e = m.cfg.d_model;
    if (token < 0 || token >= m.cfg.vocab_size)
        throw std::out_of_range("inference: token id outside vocabulary");
    if (st.t >= m.cfg.max_pos) throw std::runtime_error("inference: decoder ran past max position");

    RowVec x = mat_of(m.embed).row(token) * std::sqrt(static_cast<double>(e));
    x += Eigen::Map<const RowVec>(m.pos_encoding().data() + static_cast<size_t>(st.t) * e, e);

    for (size_t l = 0; l < m.dec.size(); ++l) {
        const auto& layer = m.dec[l];
        // grow this layer's cache with the current position's k/v
        const auto& sp = layer.self_attn;
        const RowVec k_new = x * mat_of(sp.wk) + vec_of(sp.bk);
        const RowVec v_new = x * mat_of(sp.wv) + vec_of(sp.bv);
        st.self_k[l].conservativeResize(st.t + 1, e);
        st.self_v[l].conservativeResize(st.t + 1, e);
        st.self_k[l].row(st.t) = k_new;
        st.self_v[l].row(st.t) = v_new;

        x += attend_row(sp, x, st.self_k[l], st.self_v[l]);
        RowMat xm = x;  // layer-norm helper works on matrices
        layer_norm_rows(xm, layer.ln1.g, layer.ln1.b);
        x = xm.row(0);

        x += attend_row(layer.cross_attn, x, src.cross_k[l], src.cross_v[l]);
        xm = x;
        layer_norm_rows(xm, layer.ln2.g, layer.ln2.b);
        x = xm.row(0);

        const RowVec f =
            ((x * mat_of(layer.ffn.w1) + vec_of(layer.ffn.b1)).cwiseMax(0.0) * mat_of(layer.ffn.w2)) +
            vec_of(layer.ffn.b2);
        x += f;
        xm = x;
        layer_norm_rows(xm, layer.ln3.g, layer.ln3.b);
        x = xm.row(0);
    }
    ++st.t;

    Eigen::VectorXd logits = (x * mat_of(m.embed).transpose()).transpose();
    // log-softmax with max subtraction
    const double mx = logits.maxCoeff();
    const double lz = mx + std::log((logits.array() - mx).exp().sum());
    return logits.array() - lz;
}

}  // namespace bliss
