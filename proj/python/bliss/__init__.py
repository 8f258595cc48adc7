"""Python surface of the bliss toolkit: seeded synthetic corpora, the
perturbation sampler/augmentor, noise injection, BLEU, and the lr schedule."""

from bliss._core import (
    augment_sentence,
    corpus_bleu,
    corpus_bleu_stats,
    derive_seed,
    gen_synthetic,
    inject_noise,
    lr_at,
    perturb_count_pmf,
    sample_perturb_count,
)

__all__ = [
    "augment_sentence",
    "corpus_bleu",
    "corpus_bleu_stats",
    "derive_seed",
    "gen_synthetic",
    "inject_noise",
    "lr_at",
    "perturb_count_pmf",
    "sample_perturb_count",
]
