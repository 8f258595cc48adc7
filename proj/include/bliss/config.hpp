#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bliss {

// Every tunable in one flat bag of dotted keys. Config files and CLI flags
// both write into this; each subcommand picks what it needs.
struct Options {
    uint64_t seed = 1;
    int threads = 1;

    std::string data_task = "copy";
    int data_vocab_size = 200;
    int data_len_min = 8;
    int data_len_max = 16;
    int data_samples = 1000;
    int data_test_samples = 200;

    std::string augment_mode = "bliss";
    double augment_gamma = 0.3;
    double augment_alpha_shu = 0.1;
    double augment_alpha_rep = 0.1;
    double augment_p = 0.2;
    int augment_window = 3;
    bool augment_token_replaced_only = false;
    double augment_drop_ratio = 0.1;
    double augment_blank_ratio = 0.1;

    int model_d_model = 64;
    int model_n_layers = 2;
    int model_n_heads = 2;
    int model_d_ffn = 128;
    int model_max_pos = 400;
    double model_dropout = 0.1;
    double model_smoothing = 0.1;
    double model_lambda_token = 0.005;
    double model_lambda_pos = 0.005;

    int train_max_steps = 5000;
    int train_batch_size = 16;
    int train_warmup = 400;
    double train_lr_factor = 1.0;
    double train_beta1 = 0.9;
    double train_beta2 = 0.98;
    double train_adam_eps = 1e-9;
    double train_clip_norm = 1.0;
    int train_ckpt_every = 0;
    int train_metrics_every = 50;
    bool train_no_aug = false;
    bool train_no_smooth = false;
    bool train_no_token = false;
    bool train_no_pos = false;

    int decode_beam = 1;
    double decode_lp = 0.0;
    int decode_max_len = 64;

    std::string noise_kinds = "replace,shuffle-span";
    std::string noise_ratios = "0,0.02,0.04,0.08,0.16";

    std::string probe_task = "bshif";
    int probe_hidden = 256;
    double probe_lr = 0.001;
    int probe_epochs = 10;
    int probe_batch = 32;
    double probe_train_frac = 0.8;
    int probe_samples = 2000;
};

enum class OptKind { integer, real, boolean, text, seed64 };

struct OptionEntry {
    std::string key;  // dotted name, e.g. "augment.gamma"
    OptKind kind;
    void* ptr;
};

// stable listing of every option with its dotted key
std::vector<OptionEntry> option_table(Options& o);

// assign one option from text; unknown key or malformed value -> error
void set_option(Options& o, const std::string& key, const std::string& value);

// "key = value" lines, sorted by key, values round-trip exactly
std::string dump_options(const Options& o);

// loads `key = value` lines; '#' starts a comment; blank lines skipped
void load_config_file(Options& o, const std::string& path);

// comma-separated parsing helpers for list-valued options
std::vector<double> parse_ratio_list(const std::string& s);
std::vector<std::string> split_commas(const std::string& s);

}  // namespace bliss
