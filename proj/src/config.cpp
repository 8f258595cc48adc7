#include "bliss/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bliss {

std::vector<OptionEntry> option_table(Options& o) {
    return {
        {"seed", OptKind::seed64, &o.seed},
        {"threads", OptKind::integer, &o.threads},

        {"data.task", OptKind::text, &o.data_task},
        {"data.vocab_size", OptKind::integer, &o.data_vocab_size},
        {"data.len_min", OptKind::integer, &o.data_len_min},
        {"data.len_max", OptKind::integer, &o.data_len_max},
        {"data.samples", OptKind::integer, &o.data_samples},
        {"data.test_samples", OptKind::integer, &o.data_test_samples},

        {"augment.mode", OptKind::text, &o.augment_mode},
        {"augment.gamma", OptKind::real, &o.augment_gamma},
        {"augment.alpha_shu", OptKind::real, &o.augment_alpha_shu},
        {"augment.alpha_rep", OptKind::real, &o.augment_alpha_rep},
        {"augment.p", OptKind::real, &o.augment_p},
        {"augment.window", OptKind::integer, &o.augment_window},
        {"augment.token_replaced_only", OptKind::boolean, &o.augment_token_replaced_only},
        {"augment.drop_ratio", OptKind::real, &o.augment_drop_ratio},
        {"augment.blank_ratio", OptKind::real, &o.augment_blank_ratio},

        {"model.d_model", OptKind::integer, &o.model_d_model},
        {"model.n_layers", OptKind::integer, &o.model_n_layers},
        {"model.n_heads", OptKind::integer, &o.model_n_heads},
        {"model.d_ffn", OptKind::integer, &o.model_d_ffn},
        {"model.max_pos", OptKind::integer, &o.model_max_pos},
        {"model.dropout", OptKind::real, &o.model_dropout},
        {"model.smoothing", OptKind::real, &o.model_smoothing},
        {"model.lambda_token", OptKind::real, &o.model_lambda_token},
        {"model.lambda_pos", OptKind::real, &o.model_lambda_pos},

        {"train.max_steps", OptKind::integer, &o.train_max_steps},
        {"train.batch_size", OptKind::integer, &o.train_batch_size},
        {"train.warmup", OptKind::integer, &o.train_warmup},
        {"train.lr_factor", OptKind::real, &o.train_lr_factor},
        {"train.beta1", OptKind::real, &o.train_beta1},
        {"train.beta2", OptKind::real, &o.train_beta2},
        {"train.adam_eps", OptKind::real, &o.train_adam_eps},
        {"train.clip_norm", OptKind::real, &o.train_clip_norm},
        {"train.ckpt_every", OptKind::integer, &o.train_ckpt_every},
        {"train.metrics_every", OptKind::integer, &o.train_metrics_every},
        {"train.no_aug", OptKind::boolean, &o.train_no_aug},
        {"train.no_smooth", OptKind::boolean, &o.train_no_smooth},
        {"train.no_token", OptKind::boolean, &o.train_no_token},
        {"train.no_pos", OptKind::boolean, &o.train_no_pos},

        {"decode.beam", OptKind::integer, &o.decode_beam},
        {"decode.lp", OptKind::real, &o.decode_lp},
        {"decode.max_len", OptKind::integer, &o.decode_max_len},

        {"noise.kinds", OptKind::text, &o.noise_kinds},
        {"noise.ratios", OptKind::text, &o.noise_ratios},

        {"probe.task", OptKind::text, &o.probe_task},
        {"probe.hidden", OptKind::integer, &o.probe_hidden},
        {"probe.lr", OptKind::real, &o.probe_lr},
        {"probe.epochs", OptKind::integer, &o.probe_epochs},
        {"probe.batch", OptKind::integer, &o.probe_batch},
        {"probe.train_frac", OptKind::real, &o.probe_train_frac},
        {"probe.samples", OptKind::integer, &o.probe_samples},
    };
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw std::invalid_argument("option " + key + ": expected integer, got '" + v + "'");
    return out;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw std::invalid_argument("option " + key + ": expected unsigned integer, got '" + v + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("option " + key + ": expected number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("option " + key + ": expected boolean, got '" + v + "'");
}

std::string real_to_string(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);  // shortest exact form
    (void)ec;
    return std::string(buf, p);
}

}  // namespace

void set_option(Options& o, const std::string& key, const std::string& value) {
    for (auto& e : option_table(o)) {
        if (e.key != key) continue;
        switch (e.kind) {
            case OptKind::integer: {
                long long v = parse_int(key, value);
                *static_cast<int*>(e.ptr) = static_cast<int>(v);
                return;
            }
            case OptKind::real:
                *static_cast<double*>(e.ptr) = parse_real(key, value);
                return;
            case OptKind::boolean:
                *static_cast<bool*>(e.ptr) = parse_bool(key, value);
                return;
            case OptKind::text:
                *static_cast<std::string*>(e.ptr) = value;
                return;
            case OptKind::seed64:
                *static_cast<uint64_t*>(e.ptr) = parse_u64(key, value);
                return;
        }
    }
    throw std::invalid_argument("unknown option key: " + key);
}

std::string dump_options(const Options& o) {
    auto table = option_table(const_cast<Options&>(o));
    std::vector<std::pair<std::string, std::string>> lines;
    for (auto& e : table) {
        std::string v;
        switch (e.kind) {
            case OptKind::integer: v = std::to_string(*static_cast<int*>(e.ptr)); break;
            case OptKind::real: v = real_to_string(*static_cast<double*>(e.ptr)); break;
            case OptKind::boolean: v = *static_cast<bool*>(e.ptr) ? "true" : "false"; break;
            case OptKind::text: v = *static_cast<std::string*>(e.ptr); break;
            case OptKind::seed64: v = std::to_string(*static_cast<uint64_t*>(e.ptr)); break;
        }
        lines.emplace_back(e.key, v);
    }
    std::sort(lines.begin(), lines.end());
    std::ostringstream out;
    for (auto& [k, v] : lines) out << k << " = " << v << '\n';
    return out.str();
}

void load_config_file(Options& o, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
        set_option(o, key, value);
    }
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::vector<double> parse_ratio_list(const std::string& s) {
    std::vector<double> out;
    for (const std::string& item : split_commas(s)) out.push_back(parse_real("ratio list", item));
    return out;
}

}  // namespace bliss
