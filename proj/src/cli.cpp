#include "bliss/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bliss/augment.hpp"
#include "bliss/config.hpp"
#include "bliss/data.hpp"
#include "bliss/decode.hpp"
#include "bliss/eval.hpp"
#include "bliss/inference.hpp"
#include "bliss/model.hpp"
#include "bliss/trainer.hpp"
#include "bliss/vocab.hpp"

namespace bliss {

namespace {

// one bag of option state per subcommand: dotted keys + path flags
struct SubState {
    Options opts;
    std::string config_path;
    std::vector<std::pair<std::string, std::shared_ptr<std::string>>> raw;

    std::string out, corpus, vocab, in_path, hyp, ref, test, metrics, resume, outdir;
    std::vector<std::string> ckpts, inputs;

    void attach_options(CLI::App* sub) {
        sub->add_option("--config", config_path, "config file with `key = value` lines");
        for (auto& e : option_table(opts)) {
            auto slot = std::make_shared<std::string>();
            raw.emplace_back(e.key, slot);
            sub->add_option("--" + e.key, *slot, "");
        }
    }

    // precedence: defaults, then config file, then explicit flags
    void resolve(CLI::App* sub) {
        if (sub->count("--config") > 0) load_config_file(opts, config_path);
        for (auto& [key, slot] : raw)
            if (sub->count("--" + key) > 0) set_option(opts, key, *slot);
        if (opts.threads < 1) throw std::invalid_argument("--threads must be >= 1");
    }

    void print_config(const std::string& name,
                      const std::vector<std::pair<std::string, std::string>>& paths) const {
        std::cout << "# resolved config: " << name << "\n" << dump_options(opts);
        for (auto& [k, v] : paths)
            if (!v.empty()) std::cout << k << " = " << v << "\n";
        std::cout << "# end config\n";
    }
};

std::vector<int> parse_id_field(const std::string& field, const std::string& where) {
    std::vector<int> ids;
    std::istringstream in(field);
    std::string tok;
    while (in >> tok) {
        try {
            size_t pos = 0;
            int v = std::stoi(tok, &pos);
            if (pos != tok.size() || v < 0) throw std::invalid_argument("");
            ids.push_back(v);
        } catch (const std::exception&) {
            throw std::runtime_error(where + ": non-integer token '" + tok + "'");
        }
    }
    return ids;
}

// id lines; lines with tabs contribute the `field`-th tab-separated column
std::vector<std::vector<int>> read_id_lines(const std::string& path, int field) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<int>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string chosen = line;
        if (line.find('\t') != std::string::npos) {
            std::vector<std::string> fields;
            std::string cur;
            std::istringstream ls(line);
            while (std::getline(ls, cur, '\t')) fields.push_back(cur);
            if (field >= static_cast<int>(fields.size()))
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": missing tab field " + std::to_string(field));
            chosen = fields[field];
        }
        out.push_back(parse_id_field(chosen, path + ":" + std::to_string(lineno)));
    }
    return out;
}

std::string join_ids(const std::vector<int>& ids) {
    std::string s;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(ids[i]);
    }
    return s;
}

std::string ckpt_stem(const std::string& path) {
    std::filesystem::path p(path);
    return p.stem().string();
}

AugmentConfig make_augment_config(const Options& o) {
    AugmentConfig a;
    a.mode = augment_mode_from_string(o.augment_mode);
    a.gamma = o.augment_gamma;
    a.alpha_shu = o.augment_alpha_shu;
    a.alpha_rep = o.augment_alpha_rep;
    a.p = o.augment_p;
    a.window = o.augment_window;
    a.token_replaced_only = o.augment_token_replaced_only;
    a.drop_ratio = o.augment_drop_ratio;
    a.blank_ratio = o.augment_blank_ratio;
    return a;
}

ModelConfig make_model_config(const Options& o, int vocab_size) {
    ModelConfig m;
    m.d_model = o.model_d_model;
    m.n_layers = o.model_n_layers;
    m.n_heads = o.model_n_heads;
    m.d_ffn = o.model_d_ffn;
    m.vocab_size = vocab_size;
    m.max_pos = o.model_max_pos;
    m.dropout = o.model_dropout;
    m.smoothing = o.model_smoothing;
    m.lambda_token = o.model_lambda_token;
    m.lambda_pos = o.model_lambda_pos;
    return m;
}

BeamConfig make_beam_config(const Options& o) {
    BeamConfig b;
    b.beam = o.decode_beam;
    b.lp = o.decode_lp;
    b.max_len = o.decode_max_len;
    return b;
}

int resolve_vocab_size(const SubState& st) {
    if (!st.vocab.empty()) return Vocabulary::load(st.vocab).size();
    return st.opts.data_vocab_size;
}

void check_corpus(const std::vector<Sample>& corpus, int vocab_size, int max_pos,
                  const std::string& path) {
    for (const Sample& s : corpus) {
        for (int id : s.source)
            if (id >= vocab_size)
                throw std::runtime_error(path + ": token id " + std::to_string(id) +
                                         " outside vocabulary of size " + std::to_string(vocab_size));
        for (int id : s.target)
            if (id >= vocab_size)
                throw std::runtime_error(path + ": token id " + std::to_string(id) +
                                         " outside vocabulary of size " + std::to_string(vocab_size));
        if (static_cast<int>(s.source.size()) > max_pos - 2 ||
            static_cast<int>(s.target.size()) > max_pos - 2)
            throw std::runtime_error(path + ": sentence longer than max_pos - 2");
    }
}

CorpusSpec make_corpus_spec(const Options& o, int64_t samples, uint64_t seed) {
    CorpusSpec spec;
    spec.task = task_from_string(o.data_task);
    spec.vocab_size = o.data_vocab_size;
    spec.len_min = o.data_len_min;
    spec.len_max = o.data_len_max;
    spec.samples = samples;
    spec.seed = seed;
    return spec;
}

// ---- subcommand bodies ----

int run_gen_synth(SubState& st) {
    if (st.out.empty()) throw std::invalid_argument("gen-synth: --out prefix required");
    const Options& o = st.opts;
    int64_t total = static_cast<int64_t>(o.data_samples) + o.data_test_samples;
    CorpusSpec spec = make_corpus_spec(o, total, o.seed);
    std::vector<Sample> all = gen_synthetic(spec);
    std::vector<Sample> train(all.begin(), all.begin() + o.data_samples);
    std::vector<Sample> test(all.begin() + o.data_samples, all.end());
    save_corpus(st.out + ".train.tsv", train);
    save_corpus(st.out + ".test.tsv", test);
    Vocabulary::for_size(o.data_vocab_size).save(st.out + ".vocab");
    std::cout << "wrote " << st.out << ".train.tsv (" << train.size() << " samples), " << st.out
              << ".test.tsv (" << test.size() << " samples), " << st.out << ".vocab ("
              << o.data_vocab_size << " tokens)\n";
    return 0;
}

int run_build_vocab(SubState& st) {
    if (st.inputs.empty()) throw std::invalid_argument("build-vocab: at least one --in file");
    if (st.out.empty()) throw std::invalid_argument("build-vocab: --out required");
    int64_t skipped = 0;
    Vocabulary v = Vocabulary::build(st.inputs, &skipped);
    v.save(st.out);
    std::cout << "wrote " << st.out << " (" << v.size() << " tokens, " << skipped
              << " empty lines skipped)\n";
    return 0;
}

int run_perturb(SubState& st) {
    if (st.corpus.empty()) throw std::invalid_argument("perturb: --corpus required");
    if (st.out.empty()) throw std::invalid_argument("perturb: --out required");
    const Options& o = st.opts;
    int vsz = resolve_vocab_size(st);
    std::vector<Sample> corpus = load_corpus(st.corpus);
    check_corpus(corpus, vsz, o.model_max_pos, st.corpus);
    AugmentConfig a = make_augment_config(o);
    a.validate();

    std::ofstream out(st.out, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + st.out);
    uint64_t base = derive_seed(o.seed, "aug", 0);
    for (size_t i = 0; i < corpus.size(); ++i) {
        Rng rng(derive_seed(base, static_cast<uint64_t>(i)));
        PerturbationOutcome outc = augment_sentence(corpus[i].source, a, rng, vsz);
        out << join_ids(outc.perturbed) << '\t' << join_ids(corpus[i].target) << '\t';
        for (size_t r = 0; r < outc.records.size(); ++r) {
            const PerturbRecord& rec = outc.records[r];
            if (r) out << ',';
            out << rec.position << ':'
                << (rec.kind == PerturbKind::shuffled ? "shuffled" : "replaced") << ':'
                << rec.original_token << ':' << rec.origin_position;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + st.out);
    std::cout << "wrote " << st.out << " (" << corpus.size() << " records)\n";
    return 0;
}

TrainConfig make_train_config(SubState& st, int vsz) {
    const Options& o = st.opts;
    TrainConfig tc;
    tc.augment = make_augment_config(o);
    tc.model = make_model_config(o, vsz);
    tc.max_steps = o.train_max_steps;
    tc.batch_size = o.train_batch_size;
    tc.warmup = o.train_warmup;
    tc.lr_factor = o.train_lr_factor;
    tc.beta1 = o.train_beta1;
    tc.beta2 = o.train_beta2;
    tc.adam_eps = o.train_adam_eps;
    tc.clip_norm = o.train_clip_norm;
    tc.seed = o.seed;
    tc.ckpt_every = o.train_ckpt_every;
    tc.metrics_every = o.train_metrics_every;
    tc.no_aug = o.train_no_aug;
    tc.no_smooth = o.train_no_smooth;
    tc.no_token = o.train_no_token;
    tc.no_pos = o.train_no_pos;
    return tc;
}

int run_train(SubState& st) {
    if (st.corpus.empty()) throw std::invalid_argument("train: --corpus required");
    if (st.ckpts.size() != 1) throw std::invalid_argument("train: exactly one --ckpt required");
    if (st.metrics.empty()) throw std::invalid_argument("train: --metrics required");
    int vsz = resolve_vocab_size(st);
    std::vector<Sample> corpus = load_corpus(st.corpus);
    if (corpus.empty()) throw std::runtime_error("train: empty corpus " + st.corpus);
    check_corpus(corpus, vsz, st.opts.model_max_pos, st.corpus);

    TrainConfig tc = make_train_config(st, vsz);
    tc.ckpt_path = st.ckpts[0];
    tc.metrics_path = st.metrics;
    tc.resume_path = st.resume;
    TrainResult res = train(tc, corpus);
    std::cout << "trained " << res.steps_run << " steps, final loss "
              << res.final_loss << "\nwrote " << res.ckpt_path << ", " << res.metrics_path << "\n";
    return 0;
}

int run_decode(SubState& st) {
    if (st.ckpts.size() != 1) throw std::invalid_argument("decode: exactly one --ckpt required");
    if (st.in_path.empty()) throw std::invalid_argument("decode: --in required");
    if (st.out.empty()) throw std::invalid_argument("decode: --out required");
    Model m = load_model(st.ckpts[0]);
    InferenceModel im(m);
    BeamConfig bc = make_beam_config(st.opts);
    bc.validate();
    std::vector<std::vector<int>> sources = read_id_lines(st.in_path, 0);
    std::ofstream out(st.out, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + st.out);
    for (const auto& src : sources) {
        for (int id : src)
            if (id >= m.cfg.vocab_size)
                throw std::runtime_error("decode: token id outside checkpoint vocabulary");
        out << join_ids(decode_sentence(im, src, bc)) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + st.out);
    std::cout << "wrote " << st.out << " (" << sources.size() << " lines)\n";
    return 0;
}

int run_score_bleu(SubState& st) {
    if (st.hyp.empty() || st.ref.empty())
        throw std::invalid_argument("score-bleu: --hyp and --ref required");
    std::vector<std::vector<int>> hyps = read_id_lines(st.hyp, 0);
    std::vector<std::vector<int>> refs = read_id_lines(st.ref, 1);  // tgt side of TSV lines
    if (hyps.size() != refs.size())
        throw std::runtime_error("score-bleu: line count mismatch (" + std::to_string(hyps.size()) +
                                 " vs " + std::to_string(refs.size()) + ")");
    bleu_stats s = corpus_bleu_stats(hyps, refs);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "BLEU = %.6f (p1=%.6f p2=%.6f p3=%.6f p4=%.6f bp=%.6f hyp_len=%lld ref_len=%lld)",
                  s.score, s.precisions[0], s.precisions[1], s.precisions[2], s.precisions[3],
                  s.brevity_penalty, s.hyp_len, s.ref_len);
    std::cout << buf << "\n";
    if (!st.out.empty()) {
        std::ofstream out(st.out, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + st.out);
        out << buf << "\n";
        if (!out) throw std::runtime_error("write failed: " + st.out);
    }
    return 0;
}

std::vector<NoiseKind> parse_noise_kinds(const std::string& s) {
    std::vector<NoiseKind> kinds;
    for (const std::string& item : split_commas(s)) kinds.push_back(noise_kind_from_string(item));
    if (kinds.empty()) throw std::invalid_argument("no noise kinds given");
    return kinds;
}

int run_noise_eval(SubState& st) {
    if (st.ckpts.empty()) throw std::invalid_argument("noise-eval: at least one --ckpt");
    if (st.test.empty()) throw std::invalid_argument("noise-eval: --test required");
    if (st.out.empty()) throw std::invalid_argument("noise-eval: --out required");
    const Options& o = st.opts;
    std::vector<Sample> test = load_corpus(st.test);

    std::vector<Model> models;
    models.reserve(st.ckpts.size());
    std::vector<std::pair<std::string, const Model*>> named;
    for (const std::string& path : st.ckpts) models.push_back(load_model(path));
    for (size_t i = 0; i < models.size(); ++i) {
        check_corpus(test, models[i].cfg.vocab_size, models[i].cfg.max_pos, st.test);
        named.emplace_back(ckpt_stem(st.ckpts[i]), &models[i]);
    }

    std::vector<NoiseEvalRow> rows =
        noise_eval(named, test, task_from_string(o.data_task), parse_noise_kinds(o.noise_kinds),
                   parse_ratio_list(o.noise_ratios), o.seed, make_beam_config(o));
    write_noise_csv(st.out, rows);
    for (const NoiseEvalRow& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-12s %-16s %-12s %5.2f  score=%9.4f  scaled=%.4f",
                      r.model.c_str(), r.task.c_str(), r.noise_kind.c_str(), r.ratio, r.score,
                      r.scaled_score);
        std::cout << buf << "\n";
    }
    std::cout << "wrote " << st.out << "\n";
    return 0;
}

int run_probe(SubState& st) {
    if (st.ckpts.empty()) throw std::invalid_argument("probe: at least one --ckpt");
    const Options& o = st.opts;

    std::vector<std::vector<int>> sources;
    std::vector<int> labels;
    if (o.probe_task == "bshif") {
        CorpusSpec spec = make_corpus_spec(o, o.probe_samples, 0);
        ProbeData pd = make_bshif_probe(spec, o.probe_samples, derive_seed(o.seed, "probe-data"));
        sources = std::move(pd.sources);
        labels = std::move(pd.labels);
    } else if (o.probe_task == "selen") {
        CorpusSpec spec = make_corpus_spec(o, o.probe_samples, derive_seed(o.seed, "probe-data"));
        std::vector<Sample> corpus = gen_synthetic(spec);
        for (Sample& s : corpus) sources.push_back(std::move(s.source));
        labels = selen_labels(sources).first;
    } else {
        throw std::invalid_argument("probe: unknown probe.task '" + o.probe_task +
                                    "' (expected bshif or selen)");
    }

    std::vector<long long> counts;
    for (int l : labels) {
        if (l >= static_cast<int>(counts.size())) counts.resize(l + 1, 0);
        counts[l] += 1;
    }
    long long majority = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    double chance = static_cast<double>(majority) / static_cast<double>(labels.size());

    ProbeSpec ps;
    ps.hidden = o.probe_hidden;
    ps.lr = o.probe_lr;
    ps.epochs = o.probe_epochs;
    ps.batch = o.probe_batch;
    ps.train_frac = o.probe_train_frac;
    ps.seed = derive_seed(o.seed, "probe");

    std::ofstream csv;
    if (!st.out.empty()) {
        csv.open(st.out, std::ios::trunc);
        if (!csv) throw std::runtime_error("cannot open " + st.out);
        csv << "model,task,accuracy,chance\n";
    }
    for (const std::string& path : st.ckpts) {
        Model m = load_model(path);
        for (const auto& src : sources)
            if (static_cast<int>(src.size()) + 2 > m.cfg.max_pos)
                throw std::runtime_error("probe: sentence longer than checkpoint max_pos");
        std::vector<std::vector<double>> reps = extract_representations(m, sources);
        double acc = probe(reps, labels, ps);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-12s %-6s accuracy=%.4f chance=%.4f",
                      ckpt_stem(path).c_str(), o.probe_task.c_str(), acc, chance);
        std::cout << buf << "\n";
        if (csv.is_open())
            csv << ckpt_stem(path) << ',' << o.probe_task << ',' << acc << ',' << chance << '\n';
    }
    if (csv.is_open() && !csv) throw std::runtime_error("write failed: " + st.out);
    return 0;
}

int run_ablate(SubState& st) {
    if (st.corpus.empty()) throw std::invalid_argument("ablate: --corpus required");
    if (st.test.empty()) throw std::invalid_argument("ablate: --test required");
    const Options& o = st.opts;
    std::string outdir = st.outdir.empty() ? "." : st.outdir;
    std::filesystem::create_directories(outdir);
    std::string table_path = st.out.empty() ? outdir + "/ablation.csv" : st.out;

    int vsz = resolve_vocab_size(st);
    std::vector<Sample> corpus = load_corpus(st.corpus);
    std::vector<Sample> test = load_corpus(st.test);
    check_corpus(corpus, vsz, o.model_max_pos, st.corpus);
    check_corpus(test, vsz, o.model_max_pos, st.test);

    struct Variant {
        const char* label;
        const char* stem;
        bool no_aug, no_smooth, no_token, no_pos;
    };
    const Variant grid[] = {
        {"full", "full", false, false, false, false},
        {"-aug-smooth", "no-aug-smooth", true, false, false, false},
        {"-smooth", "no-smooth", false, true, false, false},
        {"-token", "no-token", false, false, true, false},
        {"-pos", "no-pos", false, false, false, true},
    };

    std::vector<Model> models;
    std::vector<std::string> labels;
    models.reserve(std::size(grid));
    for (const Variant& v : grid) {
        TrainConfig tc = make_train_config(st, vsz);
        tc.no_aug = v.no_aug;
        tc.no_smooth = v.no_smooth;
        tc.no_token = v.no_token;
        tc.no_pos = v.no_pos;
        tc.ckpt_path = outdir + "/" + v.stem + ".ckpt";
        tc.metrics_path = outdir + "/" + v.stem + ".metrics.csv";
        std::cout << "training variant " << v.label << " -> " << tc.ckpt_path << "\n";
        train(tc, corpus);
        models.push_back(load_model(tc.ckpt_path));
        labels.push_back(v.label);
    }

    std::vector<std::pair<std::string, const Model*>> named;
    for (size_t i = 0; i < models.size(); ++i) named.emplace_back(labels[i], &models[i]);
    std::vector<NoiseEvalRow> rows =
        noise_eval(named, test, task_from_string(o.data_task), parse_noise_kinds(o.noise_kinds),
                   parse_ratio_list(o.noise_ratios), o.seed, make_beam_config(o));
    write_noise_csv(table_path, rows);
    for (const NoiseEvalRow& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-12s %-16s %-12s %5.2f  score=%9.4f  scaled=%.4f",
                      r.model.c_str(), r.task.c_str(), r.noise_kind.c_str(), r.ratio, r.score,
                      r.scaled_score);
        std::cout << buf << "\n";
    }
    std::cout << "wrote " << table_path << "\n";
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"robust seq2seq training with self-supervised input reconstruction"};
    app.require_subcommand(1);
    int exit_code = 0;

    auto make_sub = [&](const char* name, const char* desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        auto st = std::make_shared<SubState>();
        st->attach_options(sub);
        return std::make_pair(sub, st);
    };

    {
        auto [sub, st] = make_sub("gen-synth", "generate a synthetic task corpus + vocab");
        sub->add_option("--out", st->out, "output prefix (.train.tsv/.test.tsv/.vocab)");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            st->print_config("gen-synth", {{"out", st->out}});
            exit_code = run_gen_synth(*st);
        });
    }
    {
        auto [sub, st] = make_sub("build-vocab", "build a frequency-sorted vocabulary from text");
        sub->add_option("--in", st->inputs, "input text files");
        sub->add_option("--out", st->out, "vocabulary file");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            std::string ins;
            for (auto& p : st->inputs) ins += (ins.empty() ? "" : " ") + p;
            st->print_config("build-vocab", {{"in", ins}, {"out", st->out}});
            exit_code = run_build_vocab(*st);
        });
    }
    {
        auto [sub, st] = make_sub("perturb", "write a perturbed copy of a corpus with records");
        sub->add_option("--corpus", st->corpus, "input corpus TSV");
        sub->add_option("--vocab", st->vocab, "vocabulary file (else data.vocab_size)");
        sub->add_option("--out", st->out, "perturbed-dataset file");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            st->print_config("perturb",
                             {{"corpus", st->corpus}, {"vocab", st->vocab}, {"out", st->out}});
            exit_code = run_perturb(*st);
        });
    }
    {
        auto [sub, st] = make_sub("train", "train a model");
        sub->add_option("--corpus", st->corpus, "training corpus TSV");
        sub->add_option("--vocab", st->vocab, "vocabulary file (else data.vocab_size)");
        sub->add_option("--ckpt", st->ckpts, "checkpoint output path");
        sub->add_option("--metrics", st->metrics, "metrics CSV path");
        sub->add_option("--resume", st->resume, "checkpoint to resume from");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            st->print_config("train", {{"corpus", st->corpus},
                                       {"vocab", st->vocab},
                                       {"ckpt", st->ckpts.empty() ? "" : st->ckpts[0]},
                                       {"metrics", st->metrics},
                                       {"resume", st->resume}});
            exit_code = run_train(*st);
        });
    }
    {
        auto [sub, st] = make_sub("decode", "decode a file of sources with a checkpoint");
        sub->add_option("--ckpt", st->ckpts, "checkpoint path");
        sub->add_option("--in", st->in_path, "input file (id lines or corpus TSV)");
        sub->add_option("--out", st->out, "output hypothesis file");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            st->print_config("decode", {{"ckpt", st->ckpts.empty() ? "" : st->ckpts[0]},
                                        {"in", st->in_path},
                                        {"out", st->out}});
            exit_code = run_decode(*st);
        });
    }
    {
        auto [sub, st] = make_sub("score-bleu", "corpus BLEU of hypothesis vs reference files");
        sub->add_option("--hyp", st->hyp, "hypothesis file (id lines)");
        sub->add_option("--ref", st->ref, "reference file (id lines or corpus TSV)");
        sub->add_option("--out", st->out, "optional file for the score line");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            st->print_config("score-bleu",
                             {{"hyp", st->hyp}, {"ref", st->ref}, {"out", st->out}});
            exit_code = run_score_bleu(*st);
        });
    }
    {
        auto [sub, st] = make_sub("noise-eval", "robustness table under injected noise");
        sub->add_option("--ckpt", st->ckpts, "checkpoint path (repeatable)");
        sub->add_option("--test", st->test, "test corpus TSV");
        sub->add_option("--out", st->out, "report CSV path");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            std::string cks;
            for (auto& p : st->ckpts) cks += (cks.empty() ? "" : " ") + p;
            st->print_config("noise-eval",
                             {{"ckpt", cks}, {"test", st->test}, {"out", st->out}});
            exit_code = run_noise_eval(*st);
        });
    }
    {
        auto [sub, st] = make_sub("probe", "train an MLP probe on frozen encoder representations");
        sub->add_option("--ckpt", st->ckpts, "checkpoint path (repeatable)");
        sub->add_option("--out", st->out, "optional report CSV path");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            std::string cks;
            for (auto& p : st->ckpts) cks += (cks.empty() ? "" : " ") + p;
            st->print_config("probe", {{"ckpt", cks}, {"out", st->out}});
            exit_code = run_probe(*st);
        });
    }
    {
        auto [sub, st] = make_sub("ablate", "train the ablation grid and compare under noise");
        sub->add_option("--corpus", st->corpus, "training corpus TSV");
        sub->add_option("--vocab", st->vocab, "vocabulary file (else data.vocab_size)");
        sub->add_option("--test", st->test, "test corpus TSV");
        sub->add_option("--outdir", st->outdir, "directory for checkpoints/metrics");
        sub->add_option("--out", st->out, "comparison CSV (default <outdir>/ablation.csv)");
        sub->callback([sub = sub, st = st, &exit_code] {
            st->resolve(sub);
            st->print_config("ablate", {{"corpus", st->corpus},
                                        {"vocab", st->vocab},
                                        {"test", st->test},
                                        {"outdir", st->outdir},
                                        {"out", st->out}});
            exit_code = run_ablate(*st);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return exit_code;
}

}  // namespace bliss
