#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bliss/augment.hpp"
#include "bliss/bleu.hpp"
#include "bliss/data.hpp"
#include "bliss/eval.hpp"
#include "bliss/rng.hpp"
#include "bliss/trainer.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
    m.doc() = "core operations: synthetic data, perturbation, BLEU, schedules";

    m.def("perturb_count_pmf", &bliss::perturb_count_pmf, py::arg("p"), py::arg("cap"),
          "normalized truncated-geometric pmf over counts 1..cap");

    m.def(
        "sample_perturb_count",
        [](double alpha, int length, double p, uint64_t seed, bool no_smooth) {
            bliss::Rng rng(seed);
            return bliss::sample_perturb_count(alpha, length, p, rng, no_smooth);
        },
        py::arg("alpha"), py::arg("length"), py::arg("p"), py::arg("seed"),
        py::arg("no_smooth") = false);

    m.def(
        "augment_sentence",
        [](const std::vector<int>& source, uint64_t seed, int vocab_size, const std::string& mode,
           double gamma, double alpha_shu, double alpha_rep, double p, int window) {
            bliss::AugmentConfig cfg;
            cfg.mode = bliss::augment_mode_from_string(mode);
            cfg.gamma = gamma;
            cfg.alpha_shu = alpha_shu;
            cfg.alpha_rep = alpha_rep;
            cfg.p = p;
            cfg.window = window;
            cfg.validate();
            bliss::Rng rng(seed);
            bliss::PerturbationOutcome out = bliss::augment_sentence(source, cfg, rng, vocab_size);
            py::list records;
            for (const auto& r : out.records)
                records.append(py::make_tuple(
                    r.position, r.kind == bliss::PerturbKind::shuffled ? "shuffled" : "replaced",
                    r.original_token, r.origin_position));
            return py::make_tuple(out.perturbed, records);
        },
        py::arg("source"), py::arg("seed"), py::arg("vocab_size"), py::arg("mode") = "bliss",
        py::arg("gamma") = 0.3, py::arg("alpha_shu") = 0.1, py::arg("alpha_rep") = 0.1,
        py::arg("p") = 0.2, py::arg("window") = 3,
        "returns (perturbed_ids, records); records are (pos, kind, orig_token, orig_pos)");

    m.def(
        "gen_synthetic",
        [](const std::string& task, int vocab_size, int len_min, int len_max, int64_t samples,
           uint64_t seed) {
            bliss::CorpusSpec spec;
            spec.task = bliss::task_from_string(task);
            spec.vocab_size = vocab_size;
            spec.len_min = len_min;
            spec.len_max = len_max;
            spec.samples = samples;
            spec.seed = seed;
            std::vector<bliss::Sample> data = bliss::gen_synthetic(spec);
            py::list out;
            for (const auto& s : data) out.append(py::make_tuple(s.source, s.target));
            return out;
        },
        py::arg("task"), py::arg("vocab_size"), py::arg("len_min"), py::arg("len_max"),
        py::arg("samples"), py::arg("seed"));

    m.def(
        "inject_noise",
        [](const std::vector<int>& source, const std::string& kind, double ratio, uint64_t seed,
           int vocab_size) {
            bliss::NoiseSpec spec{bliss::noise_kind_from_string(kind), ratio};
            bliss::Rng rng(seed);
            return bliss::inject_noise(source, spec, vocab_size, rng);
        },
        py::arg("source"), py::arg("kind"), py::arg("ratio"), py::arg("seed"),
        py::arg("vocab_size"));

    m.def("corpus_bleu", &bliss::corpus_bleu, py::arg("hypotheses"), py::arg("references"));

    m.def(
        "corpus_bleu_stats",
        [](const std::vector<std::vector<int>>& hyps, const std::vector<std::vector<int>>& refs) {
            bliss::bleu_stats st = bliss::corpus_bleu_stats(hyps, refs);
            py::dict d;
            d["score"] = st.score;
            d["precisions"] = py::make_tuple(st.precisions[0], st.precisions[1], st.precisions[2],
                                             st.precisions[3]);
            d["brevity_penalty"] = st.brevity_penalty;
            d["hyp_len"] = st.hyp_len;
            d["ref_len"] = st.ref_len;
            return d;
        },
        py::arg("hypotheses"), py::arg("references"));

    m.def("lr_at", &bliss::lr_at, py::arg("step"), py::arg("d_model"), py::arg("warmup"),
          py::arg("factor"));

    m.def(
        "derive_seed",
        [](uint64_t seed, const std::string& purpose) { return bliss::derive_seed(seed, purpose); },
        py::arg("seed"), py::arg("purpose"));
}
