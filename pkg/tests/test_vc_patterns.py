import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spivc.imaging import generate_patterns, measure, measure_combined
from spivc.reconstruct import f1_score, reconstruct_lsq
from spivc.scenes import house_object, pepper_object, secret_image
from spivc.vc_patterns import (encode_pattern_shares, reveal_secret_from_patterns,
                               reveal_secret_from_reconstruction, superpose_sequences)


def lag1_autocorr(x):
    x = x - x.mean(axis=0)
    num = (x[1:] * x[:-1]).sum(axis=0)
    return num / np.maximum((x * x).sum(axis=0), 1e-12)


@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 30), st.integers(0, 2**64 - 1),
       st.integers(0, 2**64 - 1), st.data())
@settings(max_examples=60, deadline=None)
def test_pair_invariants(w, h, n, s1, s2, data):
    secret = np.array(data.draw(st.lists(st.integers(0, 1), min_size=w * h, max_size=w * h))).reshape(h, w)
    pair = encode_pattern_shares(w, h, n, secret, s1, s2)
    a, b = pair.seq_a.patterns, pair.seq_b.patterns
    fg = np.broadcast_to(secret == 1, a.shape)
    assert np.array_equal(a[~fg], b[~fg])
    assert np.all(a[fg] + b[fg] == 1)
    sup = superpose_sequences(pair)
    assert np.array_equal(sup == 1, fg)
    base = generate_patterns(w, h, n, s1).patterns
    assert np.array_equal(sup[~fg], 2 * base[~fg])
    assert np.array_equal(reveal_secret_from_patterns(pair), secret)


def test_zero_secret_gives_base_sequence():
    pair = encode_pattern_shares(5, 4, 20, np.zeros((4, 5)), 3, 4)
    base = generate_patterns(5, 4, 20, 3).patterns
    assert np.array_equal(pair.seq_a.patterns, base) and np.array_equal(pair.seq_b.patterns, base)


def test_full_secret_reveal():
    pair = encode_pattern_shares(3, 3, 5, np.ones((3, 3)), 1, 2)
    assert reveal_secret_from_patterns(pair).all()


def test_2x2_enumeration():
    # N=1: hand-computed sums for every secret against the base pattern
    base = generate_patterns(2, 2, 1, 11).patterns[0]
    for bits in itertools.product([0, 1], repeat=4):
        secret = np.array(bits).reshape(2, 2)
        sup = superpose_sequences(encode_pattern_shares(2, 2, 1, secret, 11, 12))[0]
        want = np.where(secret == 1, 1, 2 * base)
        assert np.array_equal(sup, want)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        encode_pattern_shares(5, 5, 3, np.zeros((5, 4)), 0, 0)


def test_measurement_equivalence(rng):
    secret = secret_image("OK", (12, 12))
    pair = encode_pattern_shares(12, 12, 60, secret, 5, 6)
    obj = rng.random((12, 12))
    comb = measure_combined([obj, obj], [pair.seq_a, pair.seq_b]).values
    assert np.array_equal(comb, measure(obj, superpose_sequences(pair).astype(np.float64)).values)


def test_manifest_fields():
    pair = encode_pattern_shares(6, 3, 4, np.eye(3, 6, dtype=np.uint8), 7, 8)
    m = pair.manifest()
    assert (m["width"], m["height"], m["count"], m["base_seed"], m["orient_seed"]) == (6, 3, 4, 7, 8)
    assert m["secret_rows"][0] == "100000"
    assert pair.manifest("s.pbm")["secret"] == "s.pbm"


class TestSecrecy:
    @pytest.fixture(scope="class")
    @staticmethod
    def pair():
        return encode_pattern_shares(37, 37, 2738, secret_image("OK", (37, 37)), 5, 6)

    def test_per_pixel_mean(self, pair):
        for seq in (pair.seq_a, pair.seq_b):
            means = seq.patterns.mean(axis=0)
            assert np.max(np.abs(means - 0.5)) <= 0.05

    def test_foreground_statistics_match_background(self, pair):
        fg = pair.secret == 1
        for seq in (pair.seq_a, pair.seq_b):
            x = seq.patterns.astype(np.float64)
            means = x.mean(axis=0)
            ac = lag1_autocorr(x)
            n = x.shape[0]
            # difference of group averages against its sampling spread under H0
            for stat, sd in ((means, 0.5 / np.sqrt(n)), (ac, 1 / np.sqrt(n))):
                se = sd * np.sqrt(1 / fg.sum() + 1 / (~fg).sum())
                assert abs(stat[fg].mean() - stat[~fg].mean()) < 4 * se
                assert np.all(np.abs(ac) < 5 / np.sqrt(n))


class TestRevealFromReconstruction:
    @pytest.fixture(scope="class")
    @staticmethod
    def recon():
        secret = secret_image("OK", (20, 20))
        pair = encode_pattern_shares(20, 20, 800, secret, 1, 2)
        out = {}
        for name, obj in (("pepper", pepper_object(20)), ("house", house_object(20))):
            single = reconstruct_lsq(measure(obj, pair.seq_a), pair.seq_a)
            comb = reconstruct_lsq(measure_combined([obj, obj], [pair.seq_a, pair.seq_b]), pair.seq_b)
            out[name] = (np.maximum(comb, 0), np.maximum(single, 0))
        return secret, out

    @pytest.mark.parametrize("name", ["pepper", "house"])
    def test_with_reference(self, recon, name):
        secret, out = recon
        assert f1_score(reveal_secret_from_reconstruction(*out[name]), secret) >= 0.95

    @pytest.mark.parametrize("name", ["pepper", "house"])
    def test_without_reference_keeps_whole_secret(self, recon, name):
        # the suppressed region sits at ~0, so it always lands in the darker class
        secret, out = recon
        mask = reveal_secret_from_reconstruction(out[name][0])
        assert np.all(mask[secret == 1] == 1)

    def test_null_case(self):
        obj = pepper_object(20)
        single = obj + 0.0
        assert reveal_secret_from_reconstruction(2.0 * single + 0.3, single).mean() < 0.02

    def test_constant_reference(self):
        with pytest.raises(ValueError):
            reveal_secret_from_reconstruction(np.ones((4, 4)), np.full((4, 4), 2.0))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            reveal_secret_from_reconstruction(np.ones((4, 4)), np.eye(5))
