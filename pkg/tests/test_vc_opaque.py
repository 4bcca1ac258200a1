import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spivc.imaging import generate_patterns, measure, measure_combined
from spivc.qr import qr_decode
from spivc.qr.symbol import codeword_map, interleave_order
from spivc.scenes import text_bitmap
from spivc.vc_opaque import (encode_shares, extract_secret_from_overlay, fit_secret, modification_budget,
                             overlay, rescale_overlay)

QR_TEXT = "Nanophotonics Research Center"

# superposed intensity of two overlapped opaque dots, indexed by (key1, key2)
OVERLAP_LEVELS = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}


def bit_pairs(max_side=12):
    shape = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shape.flatmap(lambda s: st.tuples(arrays(np.uint8, s, elements=st.integers(0, 1)),
                                             arrays(np.uint8, s, elements=st.integers(0, 1))))


def test_overlap_levels():
    for (a, b), want in OVERLAP_LEVELS.items():
        assert overlay([[a]], [[b]]).tolist() == [[want]]


def test_identical_keys_never_grey(rng):
    k = rng.integers(0, 2, (9, 9))
    ov = overlay(k, k)
    assert np.array_equal(ov, 2 * k) and not np.any(ov == 1)


@given(bit_pairs(), st.integers(0, 2**64 - 1), st.sampled_from(["random", "balanced"]))
@settings(max_examples=80, deadline=None)
def test_share_invariants(pair, seed, assignment):
    base, secret = pair
    sp = encode_shares(base, secret, seed, assignment)
    fg = secret == 1
    assert np.array_equal(sp.key1[~fg], base[~fg]) and np.array_equal(sp.key2[~fg], base[~fg])
    assert np.all(sp.key1[fg] + sp.key2[fg] == 1)
    # exactly one key differs from base at each foreground dot
    changed = (sp.key1 != base).astype(int) + (sp.key2 != base)
    assert np.all(changed[fg] == 1)
    ov = overlay(sp.key1, sp.key2)
    assert np.array_equal(ov == 1, fg)
    assert np.array_equal(extract_secret_from_overlay(ov), secret)


def test_exhaustive_2x2():
    for bits in itertools.product([0, 1], repeat=8):
        base = np.array(bits[:4]).reshape(2, 2)
        secret = np.array(bits[4:]).reshape(2, 2)
        sp = encode_shares(base, secret, 3)
        assert np.array_equal(overlay(sp.key1, sp.key2) == 1, secret == 1)


def test_empty_and_full_secret(rng):
    base = rng.integers(0, 2, (10, 10))
    sp = encode_shares(base, np.zeros((10, 10)), 1)
    assert np.array_equal(sp.key1, base) and np.array_equal(sp.key2, base)
    sp = encode_shares(base, np.ones((10, 10)), 1)
    assert np.all(overlay(sp.key1, sp.key2) == 1)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        encode_shares(np.ones((3, 3)), np.ones((3, 4)), 0)
    with pytest.raises(ValueError):
        overlay(np.ones((3, 3)), np.ones((4, 3)))


def test_unknown_assignment():
    with pytest.raises(ValueError):
        encode_shares(np.ones((2, 2)), np.ones((2, 2)), 0, "alternate")


def test_deterministic_in_seed(rng):
    base, secret = rng.integers(0, 2, (2, 12, 12))
    a, b = encode_shares(base, secret, 9), encode_shares(base, secret, 9)
    assert np.array_equal(a.key1, b.key1)
    assert not np.array_equal(a.key1, encode_shares(base, secret, 10).key1)


def test_random_assignment_fairness(rng):
    base = rng.integers(0, 2, (64, 64))
    secret = np.ones((64, 64), dtype=np.uint8)
    k1 = encode_shares(base, secret, 2024).key1
    assert 0.4 <= k1.mean() <= 0.6
    gap = k1[base == 1].mean() - k1[base == 0].mean()
    assert abs(gap) <= 0.15


@given(bit_pairs(16), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_balanced_split(pair, seed):
    base, secret = pair
    sp = encode_shares(base, secret, seed, "balanced")
    m1 = int(np.sum(sp.key1 != base))
    m2 = int(np.sum(sp.key2 != base))
    assert m1 + m2 == int(secret.sum()) and abs(m1 - m2) <= 1


def test_spi_equivalence(rng):
    seq = generate_patterns(8, 8, 50, 4)
    for _ in range(20):
        base, secret = rng.integers(0, 2, (2, 8, 8))
        sp = encode_shares(base, secret, int(rng.integers(1 << 30)))
        comb = measure_combined([sp.key1, sp.key2], [seq, seq]).values
        assert np.array_equal(comb, measure(overlay(sp.key1, sp.key2), seq).values)


class TestExtract:
    def test_zero_overlay(self):
        assert not extract_secret_from_overlay(np.zeros((4, 4))).any()

    def test_tolerance(self):
        ov = np.array([[0.2, 1.2, 1.9, 0.8]])
        assert extract_secret_from_overlay(ov).tolist() == [[0, 1, 0, 1]]

    @pytest.mark.parametrize("bad", [-0.3, 2.3, np.nan])
    def test_out_of_range(self, bad):
        with pytest.raises(ValueError):
            extract_secret_from_overlay(np.array([[1.0, bad]]))


class TestRescale:
    def test_affine_recovers_levels(self, rng):
        levels = rng.integers(0, 3, (20, 20)).astype(float)
        recon = 7.5 * levels - 3.0
        assert np.allclose(rescale_overlay(recon), levels)

    def test_noisy_levels(self, rng):
        levels = rng.integers(0, 3, (30, 30)).astype(float)
        recon = 0.8 * levels + 0.1 + 0.05 * rng.standard_normal(levels.shape)
        assert np.array_equal(extract_secret_from_overlay(rescale_overlay(recon)), (levels == 1).astype(np.uint8))

    def test_constant(self):
        assert np.all(rescale_overlay(np.full((3, 3), 5.0)) == 0)


class TestBudget:
    def test_empty_secret(self, v4h_symbol):
        b = modification_budget(np.zeros((33, 33)), v4h_symbol)
        assert b.ok and b.per_key_expected == 0 and b.per_block_worst == [0, 0, 0, 0]
        assert b.format_hits == (0, 0)

    def test_full_block_fails(self, v4h_symbol):
        cmap = codeword_map(4)
        order = interleave_order(v4h_symbol.layout)
        block0 = [k for k, (b, _) in enumerate(order) if b == 0]
        secret = np.isin(cmap, block0).astype(np.uint8)
        b = modification_budget(secret, v4h_symbol)
        assert not b.ok and b.per_block_worst[0] == len(block0)

    def test_worst_case_counts_distinct_codewords(self, v4h_symbol):
        # eight modules of one codeword are one symbol error
        cmap = codeword_map(4)
        secret = (cmap == 5).astype(np.uint8)
        assert secret.sum() == 8
        b = modification_budget(secret, v4h_symbol)
        assert sum(b.per_block_worst) == 1 and b.per_key_expected == 4.0

    def test_ok_secret(self, v4h_symbol, ok_secret_33):
        b = modification_budget(ok_secret_33, v4h_symbol)
        assert b.ok
        assert all(w <= c for w, c in zip(b.per_block_worst, b.capacity))

    def test_budget_predicts_decodability(self, v4h_symbol, ok_secret_33):
        for seed in range(10):
            sp = encode_shares(v4h_symbol.matrix, ok_secret_33, seed)
            for key in (sp.key1, sp.key2):
                assert qr_decode(key).text == QR_TEXT

    def test_worst_case_single_key_still_decodes(self, v4h_symbol, ok_secret_33):
        # push every change into key1: the budget's worst case
        key = np.where(ok_secret_33 == 1, 1 - v4h_symbol.matrix, v4h_symbol.matrix).astype(np.uint8)
        assert qr_decode(key).text == QR_TEXT


def test_fit_secret_places_ok_glyph(v4h_symbol, ok_secret_33):
    bmp = text_bitmap("OK", 2)
    assert ok_secret_33.sum() == bmp.sum()
    assert ok_secret_33.shape == (33, 33)


def test_fit_secret_rejects_oversized(v4h_symbol):
    with pytest.raises(ValueError):
        fit_secret(v4h_symbol, np.ones((34, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        fit_secret(v4h_symbol, np.ones((30, 30), dtype=np.uint8))
