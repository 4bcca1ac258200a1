import json
import math

import numpy as np
import pytest

from spivc.imaging import MeasurementSeries, generate_patterns, measure
from spivc.reconstruct import (SolverConfig, SpiSystem, default_lambda, dot_accuracy, f1_score, pearson, psnr,
                               reconstruct, reconstruct_correlation, reconstruct_lsq, solve_lsq, solve_tv,
                               tv_exact, tv_prox, tv_smooth)
from spivc.scenes import pepper_object


def rel_err(a, b):
    return float(np.linalg.norm(np.ravel(a) - np.ravel(b)) / np.linalg.norm(np.ravel(b)))


def central_diff(f, x, idx, h):
    e = np.zeros_like(x)
    e.flat[idx] = h
    return (f(x + e) - f(x - e)) / (2 * h)


class TestCorrelation:
    def test_constant_series_is_zero(self):
        seq = generate_patterns(4, 4, 30, 1)
        assert np.all(reconstruct_correlation(MeasurementSeries(np.full(30, 7.0)), seq) == 0)

    def test_delta_object(self):
        hits = 0
        for seed in range(5):
            obj = np.zeros((6, 6))
            obj[2, 4] = 1.0
            seq = generate_patterns(6, 6, 50 * 36, seed)
            x = reconstruct_correlation(measure(obj, seq), seq)
            hits += np.unravel_index(np.argmax(x), x.shape) == (2, 4)
        assert hits == 5

    def test_baseline_quality_on_key(self, v4h_symbol):
        obj = v4h_symbol.matrix.astype(float)
        seq = generate_patterns(33, 33, 2178, 7)
        assert pearson(reconstruct_correlation(measure(obj, seq), seq), obj) >= 0.5

    def test_needs_two_measurements(self):
        seq = generate_patterns(2, 2, 1, 0)
        with pytest.raises(ValueError):
            reconstruct_correlation(measure(np.ones((2, 2)), seq), seq)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            reconstruct_correlation(MeasurementSeries(np.ones(5)), generate_patterns(2, 2, 6, 0))


class TestLeastSquares:
    def test_full_rank_recovery(self, rng):
        obj = rng.random((10, 10))
        seq = generate_patterns(10, 10, 200, 3)
        assert rel_err(reconstruct_lsq(measure(obj, seq), seq), obj) <= 1e-6

    def test_single_measurement_is_consistent(self, rng):
        obj = rng.random((5, 5))
        seq = generate_patterns(5, 5, 1, 3)
        y = measure(obj, seq).values
        x, d = solve_lsq(y, seq)
        assert math.isclose(float((seq.patterns[0] * x).sum() + d), y[0], rel_tol=1e-12)

    def test_superposition_oracle(self, rng):
        o1, o2 = rng.random((2, 9, 9))
        seq = generate_patterns(9, 9, 180, 8)
        y = measure(o1, seq).values + measure(o2, seq).values
        assert rel_err(reconstruct_lsq(y, seq), o1 + o2) <= 1e-6

    def test_affine_equivariance(self, rng):
        obj = rng.random((6, 6))
        seq = generate_patterns(6, 6, 20, 2)
        y = measure(obj, seq).values + 3.0
        x1, d1 = solve_lsq(y, seq)
        x2, d2 = solve_lsq(4.5 * y, seq)
        assert rel_err(x2, 4.5 * x1) <= 1e-9
        assert math.isclose(d2, 4.5 * d1, rel_tol=1e-9)

    def test_offset_is_absorbed(self, rng):
        obj = rng.random((6, 6))
        seq = generate_patterns(6, 6, 80, 2)
        x, d = solve_lsq(measure(obj, seq).values + 12.5, seq)
        assert rel_err(x, obj) <= 1e-6 and math.isclose(d, 12.5, rel_tol=1e-6)


class TestTV:
    def test_prox_zero_weight(self):
        v = np.array([[1.0, -2.0], [3.0, 4.0]])
        assert np.array_equal(tv_prox(v, 0.0, True)[0], np.maximum(v, 0))

    def test_prox_flattens_with_large_weight(self, rng):
        v = rng.random((6, 6))
        x, _ = tv_prox(v, 100.0, False, iters=500)
        assert np.allclose(x, v.mean(), atol=1e-3)

    def test_prox_optimality(self, rng):
        # the prox output must beat small perturbations of itself
        v = rng.random((5, 5))
        w = 0.1
        x, _ = tv_prox(v, w, False, iters=2000)
        f = lambda z: 0.5 * np.sum((z - v) ** 2) + w * tv_exact(z)
        for _ in range(50):
            assert f(x) <= f(x + 1e-3 * rng.standard_normal(x.shape)) + 1e-9

    def test_smooth_tv_approaches_exact(self, rng):
        x = rng.random((7, 7))
        assert abs(tv_smooth(x, 1e-9) - tv_exact(x)) < 1e-6

    def test_lambda_zero_matches_lsq(self, rng):
        obj = rng.random((8, 8))
        seq = generate_patterns(8, 8, 160, 5)
        y = measure(obj, seq)
        res = solve_tv(y, seq, SolverConfig(lam=0.0, max_iters=5000, tol=1e-15, nonneg=False))
        assert rel_err(res.image, reconstruct_lsq(y, seq)) <= 1e-4

    def test_objective_non_increasing(self, rng):
        obj = pepper_object(16)
        seq = generate_patterns(16, 16, 300, 9)
        res = solve_tv(measure(obj, seq), seq, SolverConfig(max_iters=300))
        assert np.all(np.diff(res.objective) <= 0)
        assert psnr(res.image, obj) > 25

    def test_fixed_step_policy(self, rng):
        obj = rng.random((6, 6))
        seq = generate_patterns(6, 6, 72, 1)
        sys_ = SpiSystem(measure(obj, seq), seq)
        res = solve_tv(measure(obj, seq), seq,
                       SolverConfig(step_policy="fixed", step=1.0 / sys_.lipschitz(), max_iters=50))
        assert np.all(np.diff(res.objective) <= 0)

    def test_oversized_fixed_step_is_rejected_not_followed(self, rng):
        obj = rng.random((6, 6))
        seq = generate_patterns(6, 6, 72, 1)
        res = solve_tv(measure(obj, seq), seq, SolverConfig(step_policy="fixed", step=1e6, max_iters=50))
        assert np.all(np.diff(res.objective) <= 0) and np.all(np.isfinite(res.image))

    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    def test_non_finite_objective_raises(self):
        seq = generate_patterns(4, 4, 20, 1)
        y = np.where(np.arange(20) % 2, 1e300, -1e300)
        with pytest.raises(FloatingPointError):
            solve_tv(y, seq, SolverConfig(max_iters=5))

    def test_log_lines(self, rng):
        seq = generate_patterns(5, 5, 30, 1)
        res = solve_tv(measure(rng.random((5, 5)), seq), seq, SolverConfig(max_iters=5))
        rows = [json.loads(line) for line in res.log_lines()]
        assert rows[0]["iter"] == 0 and set(rows[0]) == {"iter", "objective", "step"}
        assert len(rows) == res.iterations + 1

    def test_default_lambda(self):
        assert default_lambda(np.array([-2.0, 4.0]), 10) == pytest.approx(0.05 * 3.0 / 10)

    def test_dispatch(self, rng):
        obj = rng.random((5, 5))
        seq = generate_patterns(5, 5, 60, 1)
        y = measure(obj, seq)
        assert np.array_equal(reconstruct(y, seq, SolverConfig(method="least-squares")), reconstruct_lsq(y, seq))
        assert np.array_equal(reconstruct(y, seq, SolverConfig(method="correlation")),
                              reconstruct_correlation(y, seq))


class TestGradient:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_fidelity_gradient(self, seed):
        g = np.random.default_rng(seed)
        seq = generate_patterns(6, 6, 40, seed)
        sys_ = SpiSystem(measure(g.random((6, 6)), seq), seq)
        x = g.random((6, 6))
        grad = sys_.fidelity_grad(x)
        for idx in g.choice(36, 10, replace=False):
            fd = central_diff(sys_.fidelity, x, idx, 1e-4)
            assert abs(fd - grad.flat[idx]) <= 1e-5 * max(1.0, abs(grad.flat[idx]))

    def test_full_fidelity_gradient(self, rng):
        seq = generate_patterns(6, 6, 40, 3)
        sys_ = SpiSystem(measure(rng.random((6, 6)), seq), seq)
        x, d = rng.random((6, 6)), 0.7
        gx, gd = sys_.full_fidelity_grad(x, d)
        for idx in range(0, 36, 4):
            fd = central_diff(lambda z: sys_.full_fidelity(z, d), x, idx, 1e-4)
            assert abs(fd - gx.flat[idx]) <= 1e-5 * max(1.0, abs(gx.flat[idx]))
        fd = (sys_.full_fidelity(x, d + 1e-4) - sys_.full_fidelity(x, d - 1e-4)) / 2e-4
        assert abs(fd - gd) <= 1e-5 * max(1.0, abs(gd))

    def test_centering_eliminates_offset_exactly(self, rng):
        seq = generate_patterns(5, 5, 30, 4)
        sys_ = SpiSystem(measure(rng.random((5, 5)), seq), seq)
        x = rng.random((5, 5))
        assert math.isclose(sys_.fidelity(x), sys_.full_fidelity(x, sys_.offset(x)), rel_tol=1e-10)


class TestConfig:
    def test_roundtrip(self):
        cfg = SolverConfig(method="tv", lam=0.5, max_iters=9)
        d = cfg.to_dict()
        assert d["lambda"] == 0.5 and SolverConfig.from_dict(d) == cfg

    @pytest.mark.parametrize("kw", [dict(method="admm"), dict(lam=-1.0), dict(max_iters=0), dict(tol=0.0),
                                    dict(step_policy="fixed")])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)


class TestMetrics:
    def test_identical(self):
        a = np.array([[0, 1], [1, 0]])
        assert dot_accuracy(a, a) == 1.0 and psnr(a, a) == math.inf

    def test_complement(self):
        a = np.array([[0, 1], [1, 0]])
        assert dot_accuracy(a, 1 - a) == 0.0

    def test_psnr_closed_form(self):
        assert psnr(np.zeros((2, 2)), np.ones((2, 2))) == 0.0

    def test_f1(self):
        assert f1_score(np.zeros((2, 2)), np.zeros((2, 2))) == 1.0
        assert f1_score([[1, 1, 0, 0]], [[1, 0, 0, 0]]) == pytest.approx(2 / 3)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.ones((2, 2)), np.ones((2, 3)))
        with pytest.raises(ValueError):
            dot_accuracy(np.ones((2, 2)), np.ones((3, 2)))
