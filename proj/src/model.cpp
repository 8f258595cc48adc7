#include "bliss/model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "bliss/vocab.hpp"

namespace bliss {

void ModelConfig::validate() const {
    if (d_model < 1 || n_layers < 1 || n_heads < 1 || d_ffn < 1)
        throw std::invalid_argument("model: dimensions must be positive");
    if (d_model % n_heads != 0)
        throw std::invalid_argument("model: d_model must be divisible by n_heads");
    if (vocab_size < Vocabulary::n_specials + 1)
        throw std::invalid_argument("model: vocab_size must be at least 6");
    if (max_pos < 3) throw std::invalid_argument("model: max_pos too small");
    if (dropout < 0.0 || dropout >= 1.0)
        throw std::invalid_argument("model: dropout must be in [0,1)");
    if (smoothing < 0.0 || smoothing >= 1.0)
        throw std::invalid_argument("model: smoothing must be in [0,1)");
    if (lambda_token < 0.0 || lambda_pos < 0.0)
        throw std::invalid_argument("model: lambda weights must be >= 0");
}

namespace {

Tensor xavier(int rows, int cols, Rng& rng) {
    const double std = std::sqrt(2.0 / static_cast<double>(rows + cols));
    std::vector<double> v(static_cast<size_t>(rows) * cols);
    for (double& x : v) x = rng.normal() * std;
    return Tensor::from_values({rows, cols}, std::move(v), /*requires_grad=*/true);
}

Tensor zeros_vec(int n) { return Tensor::zeros({n}, /*requires_grad=*/true); }
Tensor ones_vec(int n) { return Tensor::full({n}, 1.0, /*requires_grad=*/true); }

AttentionParams init_attention(int e, Rng& rng) {
    return {xavier(e, e, rng), zeros_vec(e), xavier(e, e, rng), zeros_vec(e),
            xavier(e, e, rng), zeros_vec(e), xavier(e, e, rng), zeros_vec(e)};
}

FfnParams init_ffn(int e, int f, Rng& rng) {
    return {xavier(e, f, rng), zeros_vec(f), xavier(f, e, rng), zeros_vec(e)};
}

LayerNormParams init_ln(int e) { return {ones_vec(e), zeros_vec(e)}; }

void push_attention(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
                    const AttentionParams& a) {
    out.emplace_back(prefix + ".wq", a.wq);
    out.emplace_back(prefix + ".bq", a.bq);
    out.emplace_back(prefix + ".wk", a.wk);
    out.emplace_back(prefix + ".bk", a.bk);
    out.emplace_back(prefix + ".wv", a.wv);
    out.emplace_back(prefix + ".bv", a.bv);
    out.emplace_back(prefix + ".wo", a.wo);
    out.emplace_back(prefix + ".bo", a.bo);
}

void push_ln(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
             const LayerNormParams& l) {
    out.emplace_back(prefix + ".g", l.g);
    out.emplace_back(prefix + ".b", l.b);
}

void push_ffn(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
              const FfnParams& f) {
    out.emplace_back(prefix + ".w1", f.w1);
    out.emplace_back(prefix + ".b1", f.b1);
    out.emplace_back(prefix + ".w2", f.w2);
    out.emplace_back(prefix + ".b2", f.b2);
}

}  // namespace

Model::Model(const ModelConfig& config, uint64_t init_seed) : cfg(config) {
    cfg.validate();
    Rng rng(init_seed);
    const int e = cfg.d_model, v = cfg.vocab_size, f = cfg.d_ffn;

    {
        const double std = 1.0 / std::sqrt(static_cast<double>(e));
        std::vector<double> vals(static_cast<size_t>(v) * e);
        for (double& x : vals) x = rng.normal() * std;
        embed = Tensor::from_values({v, e}, std::move(vals), /*requires_grad=*/true);
    }
    for (int l = 0; l < cfg.n_layers; ++l) {
        EncoderLayer layer;
        layer.attn = init_attention(e, rng);
        layer.ln1 = init_ln(e);
        layer.ffn = init_ffn(e, f, rng);
        layer.ln2 = init_ln(e);
        enc.push_back(std::move(layer));
    }
    for (int l = 0; l < cfg.n_layers; ++l) {
        DecoderLayer layer;
        layer.self_attn = init_attention(e, rng);
        layer.ln1 = init_ln(e);
        layer.cross_attn = init_attention(e, rng);
        layer.ln2 = init_ln(e);
        layer.ffn = init_ffn(e, f, rng);
        layer.ln3 = init_ln(e);
        dec.push_back(std::move(layer));
    }
    w_token = xavier(e, v, rng);
    w_pos = xavier(e, cfg.max_pos, rng);

    // sinusoidal position table, PE[pos, 2i] = sin(pos / 10000^{2i/e})
    pe_.resize(static_cast<size_t>(cfg.max_pos) * e);
    for (int pos = 0; pos < cfg.max_pos; ++pos)
        for (int d = 0; d < e; ++d) {
            const double freq = std::pow(10000.0, -static_cast<double>(d - d % 2) / e);
            const double x = static_cast<double>(pos) * freq;
            pe_[static_cast<size_t>(pos) * e + d] = (d % 2 == 0) ? std::sin(x) : std::cos(x);
        }
}

std::vector<std::pair<std::string, Tensor>> Model::parameters() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("embed", embed);
    for (size_t l = 0; l < enc.size(); ++l) {
        const std::string p = "enc." + std::to_string(l);
        push_attention(out, p + ".attn", enc[l].attn);
        push_ln(out, p + ".ln1", enc[l].ln1);
        push_ffn(out, p + ".ffn", enc[l].ffn);
        push_ln(out, p + ".ln2", enc[l].ln2);
    }
    for (size_t l = 0; l < dec.size(); ++l) {
        const std::string p = "dec." + std::to_string(l);
        push_attention(out, p + ".self", dec[l].self_attn);
        push_ln(out, p + ".ln1", dec[l].ln1);
        push_attention(out, p + ".cross", dec[l].cross_attn);
        push_ln(out, p + ".ln2", dec[l].ln2);
        push_ffn(out, p + ".ffn", dec[l].ffn);
        push_ln(out, p + ".ln3", dec[l].ln3);
    }
    out.emplace_back("head.token", w_token);
    out.emplace_back("head.pos", w_pos);
    return out;
}

PackedSeqs pack_sequences(const std::vector<std::vector<int>>& seqs) {
    PackedSeqs p;
    for (const auto& s : seqs) {
        p.offsets.push_back(p.total);
        p.lens.push_back(static_cast<int>(s.size()));
        p.ids.insert(p.ids.end(), s.begin(), s.end());
        p.total += static_cast<int>(s.size());
    }
    return p;
}

namespace {

constexpr double kMaskOff = -1e9;

// attention mask over packed blocks; query row qi may see key row kj iff both
// sit in the same sequence, kj is a real (non-pad) position, and — when
// `causal` — kj does not lie in qi's future
Tensor block_mask(const PackedSeqs& q, const PackedSeqs& k, bool causal,
                  const std::vector<int>* k_real_lens) {
    std::vector<double> m(static_cast<size_t>(q.total) * k.total, kMaskOff);
    for (size_t s = 0; s < q.offsets.size(); ++s) {
        const int qo = q.offsets[s], ko = k.offsets[s];
        const int ql = q.lens[s], kl = k.lens[s];
        const int kreal = k_real_lens ? (*k_real_lens)[s] : kl;
        for (int a = 0; a < ql; ++a)
            for (int b = 0; b < kreal; ++b) {
                if (causal && b > a) continue;
                m[static_cast<size_t>(qo + a) * k.total + (ko + b)] = 0.0;
            }
    }
    return Tensor::from_values({q.total, k.total}, std::move(m));
}

// constant [rows x e] tensor of position-encoding rows, restarting per sequence
Tensor pe_rows(const Model& m, const PackedSeqs& p) {
    const int e = m.cfg.d_model;
    std::vector<double> v(static_cast<size_t>(p.total) * e);
    for (size_t s = 0; s < p.offsets.size(); ++s) {
        if (p.lens[s] > m.cfg.max_pos)
            throw std::invalid_argument("sequence length " + std::to_string(p.lens[s]) +
                                        " exceeds max position " + std::to_string(m.cfg.max_pos));
        for (int a = 0; a < p.lens[s]; ++a)
            std::copy_n(m.pos_encoding().data() + static_cast<size_t>(a) * e, e,
                        v.data() + static_cast<size_t>(p.offsets[s] + a) * e);
    }
    return Tensor::from_values({p.total, e}, std::move(v));
}

Tensor maybe_dropout(const Tensor& t, double rate, Rng* drng) {
    if (!drng || rate == 0.0) return t;
    return dropout(t, rate, *drng);
}

Tensor multi_head_attention(const Model& m, const AttentionParams& ap, const Tensor& q_in,
                            const Tensor& kv_in, const Tensor& mask, Rng* drng) {
    const int e = m.cfg.d_model, nh = m.cfg.n_heads, dh = e / nh;
    const Tensor q = add_bias(matmul(q_in, ap.wq), ap.bq);
    const Tensor k = add_bias(matmul(kv_in, ap.wk), ap.bk);
    const Tensor v = add_bias(matmul(kv_in, ap.wv), ap.bv);
    std::vector<Tensor> heads;
    heads.reserve(static_cast<size_t>(nh));
    for (int h = 0; h < nh; ++h) {
        const Tensor qh = slice_cols(q, h * dh, dh);
        const Tensor kh = slice_cols(k, h * dh, dh);
        const Tensor vh = slice_cols(v, h * dh, dh);
        Tensor scores = scale(matmul(qh, transpose2d(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
        scores = add(scores, mask);
        Tensor attn = softmax(scores);
        attn = maybe_dropout(attn, m.cfg.dropout, drng);
        heads.push_back(matmul(attn, vh));
    }
    return add_bias(matmul(concat_cols(heads), ap.wo), ap.bo);
}

Tensor ffn_forward(const FfnParams& f, const Tensor& x) {
    return add_bias(matmul(relu(add_bias(matmul(x, f.w1), f.b1)), f.w2), f.b2);
}

Tensor embed_with_positions(Model& m, const PackedSeqs& p) {
    const Tensor tok = gather_rows(m.embed, p.ids);
    return add(scale(tok, std::sqrt(static_cast<double>(m.cfg.d_model))), pe_rows(m, p));
}

Tensor encode_masked(Model& m, const PackedSeqs& src, const std::vector<int>* real_lens, Rng* drng) {
    Tensor x = embed_with_positions(m, src);
    const Tensor mask = block_mask(src, src, /*causal=*/false, real_lens);
    for (auto& layer : m.enc) {
        const Tensor a = multi_head_attention(m, layer.attn, x, x, mask, drng);
        x = layer_norm(add(x, maybe_dropout(a, m.cfg.dropout, drng)), layer.ln1.g, layer.ln1.b);
        const Tensor f = ffn_forward(layer.ffn, x);
        x = layer_norm(add(x, maybe_dropout(f, m.cfg.dropout, drng)), layer.ln2.g, layer.ln2.b);
    }
    return x;
}

}  // namespace

Tensor encode_packed(Model& m, const PackedSeqs& src, Rng* drng) {
    return encode_masked(m, src, nullptr, drng);
}

Tensor decode_packed(Model& m, const Tensor& h, const PackedSeqs& src, const PackedSeqs& tgt_in,
                     Rng* drng) {
    Tensor x = embed_with_positions(m, tgt_in);
    const Tensor self_mask = block_mask(tgt_in, tgt_in, /*causal=*/true, nullptr);
    const Tensor cross_mask = block_mask(tgt_in, src, /*causal=*/false, nullptr);
    for (auto& layer : m.dec) {
        const Tensor a = multi_head_attention(m, layer.self_attn, x, x, self_mask, drng);
        x = layer_norm(add(x, maybe_dropout(a, m.cfg.dropout, drng)), layer.ln1.g, layer.ln1.b);
        const Tensor c = multi_head_attention(m, layer.cross_attn, x, h, cross_mask, drng);
        x = layer_norm(add(x, maybe_dropout(c, m.cfg.dropout, drng)), layer.ln2.g, layer.ln2.b);
        const Tensor f = ffn_forward(layer.ffn, x);
        x = layer_norm(add(x, maybe_dropout(f, m.cfg.dropout, drng)), layer.ln3.g, layer.ln3.b);
    }
    return matmul(x, transpose2d(m.embed));  // tied output projection
}

Tensor encode(Model& m, const std::vector<int>& ids, int n_real, Rng* drng) {
    if (n_real < 1 || n_real > static_cast<int>(ids.size()))
        throw std::invalid_argument("encode: n_real must be in [1, len(ids)]");
    PackedSeqs p = pack_sequences({ids});
    std::vector<int> real{n_real};
    return encode_masked(m, p, &real, drng);
}

Tensor decode_teacher_forced(Model& m, const Tensor& h, const std::vector<int>& tgt_in, Rng* drng) {
    PackedSeqs src;  // single block covering every encoder row
    src.offsets = {0};
    src.lens = {h.dim(0)};
    src.total = h.dim(0);
    return decode_packed(m, h, src, pack_sequences({tgt_in}), drng);
}

double combine_losses(double nll, double l_token, double l_pos, double lambda_token,
                      double lambda_pos) {
    return nll + lambda_token * l_token + lambda_pos * l_pos;
}

std::pair<Tensor, Tensor> self_supervision_losses(Model& m, const Tensor& h,
                                                  const Supervision& sup, int row_offset) {
    std::vector<int> token_rows, token_labels, pos_rows, pos_labels;
    for (size_t j = 0; j < sup.token_mask.size(); ++j) {
        if (sup.token_mask[j]) {
            token_rows.push_back(static_cast<int>(j) + row_offset);
            token_labels.push_back(sup.token_labels[j]);
        }
        if (sup.pos_mask[j]) {
            pos_rows.push_back(static_cast<int>(j) + row_offset);
            pos_labels.push_back(sup.pos_labels[j]);
        }
    }
    Tensor l_token = Tensor::scalar(0.0);
    Tensor l_pos = Tensor::scalar(0.0);
    if (!token_rows.empty()) {
        const Tensor logits = matmul(gather_rows(h, token_rows), m.w_token);
        l_token = masked_cross_entropy(logits, token_labels,
                                       std::vector<uint8_t>(token_labels.size(), 1), 0.0);
    }
    if (!pos_rows.empty()) {
        const Tensor logits = matmul(gather_rows(h, pos_rows), m.w_pos);
        l_pos = masked_cross_entropy(logits, pos_labels,
                                     std::vector<uint8_t>(pos_labels.size(), 1), 0.0);
    }
    return {l_token, l_pos};
}

namespace {

// fraction of rows whose argmax logit hits the label
double argmax_accuracy(const Tensor& logits, const std::vector<int>& labels) {
    if (labels.empty()) return 0.0;
    const int C = logits.dim(1);
    int hits = 0;
    for (size_t r = 0; r < labels.size(); ++r) {
        const double* row = logits.values().data() + r * static_cast<size_t>(C);
        int best = 0;
        for (int c = 1; c < C; ++c)
            if (row[c] > row[best]) best = c;
        if (best == labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace

LossBreakdown bliss_loss(Model& m, const std::vector<BatchItem>& batch, Rng* drng) {
    if (batch.empty()) throw std::invalid_argument("bliss_loss: empty batch");
    std::vector<std::vector<int>> srcs, tgt_ins;
    std::vector<int> labels_flat;
    srcs.reserve(batch.size());
    tgt_ins.reserve(batch.size());
    for (const auto& item : batch) {
        if (item.src.empty() || item.tgt.empty())
            throw std::invalid_argument("bliss_loss: empty source or target");
        std::vector<int> s;
        s.reserve(item.src.size() + 2);
        s.push_back(Vocabulary::bos_id);
        s.insert(s.end(), item.src.begin(), item.src.end());
        s.push_back(Vocabulary::eos_id);
        srcs.push_back(std::move(s));
        std::vector<int> t;
        t.reserve(item.tgt.size() + 1);
        t.push_back(Vocabulary::bos_id);
        t.insert(t.end(), item.tgt.begin(), item.tgt.end());
        tgt_ins.push_back(std::move(t));
        labels_flat.insert(labels_flat.end(), item.tgt.begin(), item.tgt.end());
        labels_flat.push_back(Vocabulary::eos_id);
    }
    const PackedSeqs src = pack_sequences(srcs);
    const PackedSeqs tgt = pack_sequences(tgt_ins);

    const Tensor h = encode_packed(m, src, drng);
    const Tensor logits = decode_packed(m, h, src, tgt, drng);
    const Tensor l_nll = masked_cross_entropy(logits, labels_flat,
                                              std::vector<uint8_t>(labels_flat.size(), 1),
                                              m.cfg.smoothing);

    // supervision rows address h with a +1 shift for the leading bos
    std::vector<int> token_rows, token_labels, pos_rows, pos_labels;
    for (size_t k = 0; k < batch.size(); ++k) {
        const auto& sup = batch[k].sup;
        const int L = static_cast<int>(batch[k].src.size());
        if (!sup.token_mask.empty() && static_cast<int>(sup.token_mask.size()) != L)
            throw std::invalid_argument("bliss_loss: supervision size does not match source");
        for (int j = 0; j < L && !sup.token_mask.empty(); ++j) {
            if (sup.token_mask[static_cast<size_t>(j)]) {
                token_rows.push_back(src.offsets[k] + 1 + j);
                token_labels.push_back(sup.token_labels[static_cast<size_t>(j)]);
            }
            if (sup.pos_mask[static_cast<size_t>(j)]) {
                pos_rows.push_back(src.offsets[k] + 1 + j);
                pos_labels.push_back(sup.pos_labels[static_cast<size_t>(j)]);
            }
        }
    }

    LossBreakdown out;
    out.nll = l_nll.item();
    out.token_count = static_cast<int>(token_labels.size());
    out.pos_count = static_cast<int>(pos_labels.size());

    Tensor total = l_nll;
    if (m.cfg.lambda_token > 0.0 && !token_rows.empty()) {
        const Tensor tok_logits = matmul(gather_rows(h, token_rows), m.w_token);
        const Tensor l_token = masked_cross_entropy(
            tok_logits, token_labels, std::vector<uint8_t>(token_labels.size(), 1), 0.0);
        out.token = l_token.item();
        out.token_acc = argmax_accuracy(tok_logits, token_labels);
        total = add(total, scale(l_token, m.cfg.lambda_token));
    }
    if (m.cfg.lambda_pos > 0.0 && !pos_rows.empty()) {
        const Tensor pos_logits = matmul(gather_rows(h, pos_rows), m.w_pos);
        const Tensor l_pos = masked_cross_entropy(
            pos_logits, pos_labels, std::vector<uint8_t>(pos_labels.size(), 1), 0.0);
        out.pos = l_pos.item();
        out.pos_acc = argmax_accuracy(pos_logits, pos_labels);
        total = add(total, scale(l_pos, m.cfg.lambda_pos));
    }
    out.total = total;
    if (!std::isfinite(out.total.item()))
        throw std::runtime_error("bliss_loss: non-finite loss (nll=" + std::to_string(out.nll) +
                                 " token=" + std::to_string(out.token) +
                                 " pos=" + std::to_string(out.pos) + ")");
    return out;
}

}  // namespace bliss
