import math

import pytest

import bliss


def test_pmf_normalized_and_oracle():
    pmf = bliss.perturb_count_pmf(0.2, 3)
    assert len(pmf) == 3
    assert math.isclose(sum(pmf), 1.0, rel_tol=0, abs_tol=1e-12)
    # direct evaluation of the truncated renormalized geometric
    assert abs(pmf[0] - 0.40984) < 5e-6
    assert abs(pmf[1] - 0.32787) < 5e-6
    assert abs(pmf[2] - 0.26230) < 5e-6


def test_sample_perturb_count_deterministic_and_bounded():
    draws = [bliss.sample_perturb_count(0.3, 10, 0.2, seed) for seed in range(200)]
    assert draws == [bliss.sample_perturb_count(0.3, 10, 0.2, seed) for seed in range(200)]
    assert all(1 <= d <= 3 for d in draws)  # cap = floor(0.3 * 10)
    assert bliss.sample_perturb_count(0.05, 10, 0.2, 1) == 0  # cap < 1
    assert bliss.sample_perturb_count(0.3, 10, 0.2, 1, no_smooth=True) == 3


def test_augment_sentence_records():
    src = list(range(5, 25))
    perturbed, records = bliss.augment_sentence(src, seed=7, vocab_size=200, gamma=1.0)
    assert len(perturbed) == len(src)
    again, records_again = bliss.augment_sentence(src, seed=7, vocab_size=200, gamma=1.0)
    assert perturbed == again and records == records_again
    for pos, kind, orig_token, orig_pos in records:
        assert 0 <= pos < len(src)
        assert kind in ("shuffled", "replaced")
        if kind == "replaced":
            assert perturbed[pos] != orig_token
            assert orig_pos == pos


def test_gen_synthetic_shapes_and_determinism():
    data = bliss.gen_synthetic("copy", 50, 4, 8, 25, seed=3)
    assert len(data) == 25
    for src, tgt in data:
        assert src == tgt  # copy task
        assert 4 <= len(src) <= 8
        assert all(5 <= t < 50 for t in src)
    assert data == bliss.gen_synthetic("copy", 50, 4, 8, 25, seed=3)


def test_inject_noise():
    src = list(range(5, 17))
    assert bliss.inject_noise(src, "replace", 0.0, 1, 100) == src
    noised = bliss.inject_noise(src, "replace", 0.25, 1, 100)
    assert sum(a != b for a, b in zip(src, noised)) == 3  # round(0.25 * 12)
    shuffled = bliss.inject_noise(src, "shuffle-span", 0.5, 1, 100)
    assert sorted(shuffled) == sorted(src) and shuffled != src


def test_corpus_bleu():
    refs = [[5, 6, 7, 8], [9, 10, 11]]
    assert bliss.corpus_bleu(refs, refs) == pytest.approx(100.0)
    stats = bliss.corpus_bleu_stats([[5, 6, 7, 8]], [[5, 6, 7, 9]])
    assert stats["precisions"][0] == pytest.approx(3 / 4)
    assert stats["hyp_len"] == 4 and stats["ref_len"] == 4


def test_lr_at():
    assert bliss.lr_at(1, 64, 400, 1.0) == pytest.approx(1.5625e-5, rel=1e-12)
    peak = bliss.lr_at(400, 64, 400, 1.0)
    assert bliss.lr_at(1600, 64, 400, 1.0) == pytest.approx(peak / 2, rel=1e-12)
    with pytest.raises(Exception):
        bliss.lr_at(0, 64, 400, 1.0)
