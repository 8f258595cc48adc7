#include "bliss/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bliss {

void TrainConfig::validate() const {
    augment.validate();
    model.validate();
    if (max_steps < 1) throw std::invalid_argument("train: max_steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (warmup < 1) throw std::invalid_argument("train: warmup must be >= 1");
    if (lr_factor <= 0.0) throw std::invalid_argument("train: lr_factor must be > 0");
    if (metrics_every < 1) throw std::invalid_argument("train: metrics_every must be >= 1");
    if (ckpt_every < 0) throw std::invalid_argument("train: ckpt_every must be >= 0");
}

double lr_at(long long step, int d_model, int warmup, double factor) {
    if (step < 1) throw std::invalid_argument("lr_at: step counts from 1");
    if (warmup < 1) throw std::invalid_argument("lr_at: warmup must be >= 1");
    double s = static_cast<double>(step);
    double w = static_cast<double>(warmup);
    return factor * std::pow(static_cast<double>(d_model), -0.5) *
           std::min(1.0 / std::sqrt(s), s / (w * std::sqrt(w)));
}

void adam_step(std::vector<std::pair<std::string, Tensor>>& params, AdamState& st, double lr,
               double clip, double beta1, double beta2, double eps) {
    size_t n = params.size();
    if (st.m.empty()) {
        st.m.resize(n);
        st.v.resize(n);
        for (size_t i = 0; i < n; ++i) {
            st.m[i].assign(params[i].second.size(), 0.0);
            st.v[i].assign(params[i].second.size(), 0.0);
        }
    }
    if (st.m.size() != n || st.v.size() != n)
        throw std::invalid_argument("adam_step: optimizer state / parameter count mismatch");

    double sq = 0.0;
    for (auto& [name, t] : params) {
        const auto& g = t.grad();
        if (g.empty()) continue;  // parameter untouched by this graph: zero gradient
        for (double x : g) {
            if (!std::isfinite(x)) throw std::runtime_error("adam_step: non-finite gradient in " + name);
            sq += x * x;
        }
    }
    double scale = 1.0;
    double norm = std::sqrt(sq);
    if (clip > 0.0 && norm > clip) scale = clip / norm;

    st.step += 1;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.step));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.step));

    for (size_t i = 0; i < n; ++i) {
        auto& w = params[i].second.values();
        const auto& g = params[i].second.grad();
        auto& m = st.m[i];
        auto& v = st.v[i];
        if (m.size() != w.size() || v.size() != w.size())
            throw std::invalid_argument("adam_step: moment shape mismatch for " + params[i].first);
        for (size_t k = 0; k < w.size(); ++k) {
            double gk = g.empty() ? 0.0 : g[k] * scale;
            m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
            v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
            double mhat = m[k] / bc1;
            double vhat = v[k] / bc2;
            w[k] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

namespace {

std::vector<int> epoch_permutation(uint64_t seed, long long epoch, size_t n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, "order", static_cast<uint64_t>(epoch)));
    for (size_t i = n; i > 1; --i) {
        uint64_t j = rng.uniform_u64(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

Supervision empty_supervision(size_t L) {
    Supervision sup;
    sup.token_labels.assign(L, 0);
    sup.token_mask.assign(L, 0);
    sup.pos_labels.assign(L, 0);
    sup.pos_mask.assign(L, 0);
    return sup;
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<Sample>& corpus) {
    cfg.validate();
    if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
    if (cfg.ckpt_path.empty()) throw std::invalid_argument("train: checkpoint path required");
    if (cfg.metrics_path.empty()) throw std::invalid_argument("train: metrics path required");

    ModelConfig mc = cfg.model;
    if (cfg.no_token) mc.lambda_token = 0.0;
    if (cfg.no_pos) mc.lambda_pos = 0.0;
    if (cfg.no_aug) mc.lambda_token = mc.lambda_pos = 0.0;
    AugmentConfig ac = cfg.augment;
    if (cfg.no_smooth) ac.no_smooth = true;
    bool augment_on = !cfg.no_aug && ac.mode != AugmentMode::none;

    AdamState opt;
    Model model = [&]() -> Model {
        if (cfg.resume_path.empty()) return Model(mc, derive_seed(cfg.seed, "init"));
        Checkpoint meta;
        Model m = load_model(cfg.resume_path, &meta);
        auto it = meta.extras.find("opt.step");
        if (it == meta.extras.end())
            throw std::runtime_error("train: resume checkpoint lacks optimizer state");
        opt.step = std::stoll(it->second);
        auto params = m.parameters();
        opt.m.resize(params.size());
        opt.v.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            auto mi = meta.extra_tensors.find("opt.m." + params[i].first);
            auto vi = meta.extra_tensors.find("opt.v." + params[i].first);
            if (mi == meta.extra_tensors.end() || vi == meta.extra_tensors.end())
                throw std::runtime_error("train: resume checkpoint missing moments for " +
                                         params[i].first);
            opt.m[i] = mi->second;
            opt.v[i] = vi->second;
        }
        return m;
    }();

    size_t n_sent = corpus.size();
    int batch = std::min<long long>(cfg.batch_size, static_cast<long long>(n_sent));
    long long bpe = static_cast<long long>(n_sent) / batch;  // batches per epoch

    std::ofstream metrics(cfg.metrics_path,
                          opt.step == 0 ? std::ios::trunc : (std::ios::app | std::ios::ate));
    if (!metrics) throw std::runtime_error("train: cannot open metrics file " + cfg.metrics_path);
    if (opt.step == 0)
        metrics << "step,lr,loss_total,loss_nll,loss_token,loss_pos,token_head_acc,pos_head_acc\n";

    auto write_checkpoint = [&](long long step) {
        auto params = model.parameters();
        std::map<std::string, std::string> extras;
        extras["opt.step"] = std::to_string(step);
        extras["train.seed"] = std::to_string(cfg.seed);
        std::vector<std::pair<std::string, Tensor>> extra_tensors;
        for (size_t i = 0; i < params.size(); ++i) {
            int n = static_cast<int>(opt.m[i].size());
            extra_tensors.emplace_back("opt.m." + params[i].first,
                                       Tensor::from_values({n}, opt.m[i]));
            extra_tensors.emplace_back("opt.v." + params[i].first,
                                       Tensor::from_values({n}, opt.v[i]));
        }
        save_checkpoint(cfg.ckpt_path, model, extras, extra_tensors);
    };

    long long epoch_cached = -1;
    std::vector<int> perm;
    TrainResult res;
    res.ckpt_path = cfg.ckpt_path;
    res.metrics_path = cfg.metrics_path;

    for (long long step = opt.step + 1; step <= cfg.max_steps; ++step) {
        long long epoch = (step - 1) / bpe;
        long long bidx = (step - 1) % bpe;
        if (epoch != epoch_cached) {
            perm = epoch_permutation(cfg.seed, epoch, n_sent);
            epoch_cached = epoch;
        }

        std::vector<BatchItem> items;
        items.reserve(batch);
        uint64_t aug_epoch_seed = derive_seed(cfg.seed, "aug", static_cast<uint64_t>(epoch));
        for (int k = 0; k < batch; ++k) {
            int idx = perm[bidx * batch + k];
            const Sample& s = corpus[idx];
            if (!augment_on) {
                items.push_back({s.source, s.target, empty_supervision(s.source.size())});
            } else {
                Rng arng(derive_seed(aug_epoch_seed, static_cast<uint64_t>(idx)));
                PerturbationOutcome out = augment_sentence(s.source, ac, arng, mc.vocab_size);
                Supervision sup = build_supervision(out, static_cast<int>(s.source.size()),
                                                    mc.max_pos, ac.token_replaced_only);
                items.push_back({std::move(out.perturbed), s.target, std::move(sup)});
            }
        }

        Rng drng(derive_seed(cfg.seed, "dropout", static_cast<uint64_t>(step)));
        LossBreakdown lb = bliss_loss(model, items, &drng);  // throws on non-finite loss
        backward(lb.total);

        auto params = model.parameters();
        double lr = lr_at(step, mc.d_model, cfg.warmup, cfg.lr_factor);
        adam_step(params, opt, lr, cfg.clip_norm, cfg.beta1, cfg.beta2, cfg.adam_eps);
        for (auto& [name, t] : params) t.grad().clear();

        res.steps_run = step;
        res.final_loss = lb.total.item();

        if (step % cfg.metrics_every == 0 || step == cfg.max_steps) {
            metrics << step << ',' << fmt_double(lr) << ',' << fmt_double(lb.total.item()) << ','
                    << fmt_double(lb.nll) << ',' << fmt_double(lb.token) << ','
                    << fmt_double(lb.pos) << ',' << fmt_double(lb.token_acc) << ','
                    << fmt_double(lb.pos_acc) << '\n';
            metrics.flush();
        }
        if (cfg.ckpt_every > 0 && step % cfg.ckpt_every == 0 && step < cfg.max_steps)
            write_checkpoint(step);
    }

    write_checkpoint(opt.step);  // opt.step tracks the last completed training step
    if (!metrics) throw std::runtime_error("train: metrics write failed");
    return res;
}

}  // namespace bliss
