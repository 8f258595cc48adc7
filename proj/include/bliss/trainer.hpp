#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bliss/augment.hpp"
#include "bliss/data.hpp"
#include "bliss/model.hpp"

namespace bliss {

struct TrainConfig {
    AugmentConfig augment;
    ModelConfig model;
    int max_steps = 5000;
    int batch_size = 16;   // sentences
    int warmup = 400;
    double lr_factor = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double adam_eps = 1e-9;
    double clip_norm = 1.0;
    uint64_t seed = 1;
    std::string ckpt_path;
    std::string metrics_path;
    int ckpt_every = 0;      // 0 = only at the end
    int metrics_every = 50;
    std::string resume_path;  // empty = fresh start
    // ablations
    bool no_aug = false;
    bool no_smooth = false;
    bool no_token = false;
    bool no_pos = false;
    void validate() const;
};

// inverse-square-root warmup schedule; step counts from 1
double lr_at(long long step, int d_model, int warmup, double factor);

struct AdamState {
    std::vector<std::vector<double>> m;  // aligned with the parameter list
    std::vector<std::vector<double>> v;
    long long step = 0;
};

// global-norm clip to `clip` (skipped when clip <= 0), then bias-corrected Adam
void adam_step(std::vector<std::pair<std::string, Tensor>>& params, AdamState& st, double lr,
               double clip, double beta1 = 0.9, double beta2 = 0.98, double eps = 1e-9);

struct TrainResult {
    long long steps_run = 0;
    double final_loss = 0.0;
    std::string ckpt_path;
    std::string metrics_path;
};

TrainResult train(const TrainConfig& cfg, const std::vector<Sample>& corpus);

}  // namespace bliss
