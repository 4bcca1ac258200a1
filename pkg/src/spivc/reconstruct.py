"""Image reconstruction from bucket-detector measurements, plus quality metrics.

All solvers carry an explicit DC offset ``d`` in the model ``y ~ A x + d``.
For the least-squares and TV solvers the offset is eliminated exactly: with
``Ac = A - 1 * colmean(A)`` and ``b = y - mean(y)``,

    min_d ||A x + d - y||^2 = ||Ac x - b||^2,   d* = mean(y) - colmean(A) . x

which also removes the large mean component of {0, 1} patterns and leaves a
well-conditioned system.

The TV solver minimizes ``||Ac x - b||^2 + lam * TV_eps(x)`` (optionally with
``x >= 0``) where ``TV_eps`` is the anisotropic total variation with
replicate boundary, each ``|t|`` smoothed to ``sqrt(t^2 + eps^2)``.  It is a
monotone FISTA: the proximal step solves the (exact, unsmoothed) TV
denoising subproblem by fast gradient projection on the dual, and a
candidate is only accepted if it does not increase the objective, so the
logged objective never goes up.  Matrix products use numpy's BLAS in a
fixed order for a given problem shape.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .imaging import MeasurementSeries, PatternSequence, as_bits


@dataclass
class SolverConfig:
    method: str = "tv"
    lam: float | None = None          # None -> default_lambda()
    max_iters: int = 500
    step_policy: str = "backtracking"  # or "fixed"
    step: float | None = None          # only for step_policy="fixed"
    nonneg: bool = True
    tol: float = 1e-10
    inner_iters: int = 25

    def __post_init__(self):
        if self.method not in ("correlation", "least-squares", "tv"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.lam is not None and not self.lam >= 0:
            raise ValueError("lambda must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.step_policy not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step policy {self.step_policy!r}")
        if self.step_policy == "fixed" and not (self.step and self.step > 0):
            raise ValueError("fixed step policy needs a positive step")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverConfig":
        d = dict(d or {})
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


def _stack(patterns) -> np.ndarray:
    return patterns.patterns if isinstance(patterns, PatternSequence) else np.asarray(patterns)


def _values(series) -> np.ndarray:
    return np.asarray(series.values if isinstance(series, MeasurementSeries) else series, dtype=np.float64)


class SpiSystem:
    """Centered measurement operator for one pattern stack and one series."""

    def __init__(self, series, patterns):
        stack = _stack(patterns)
        y = _values(series)
        if stack.ndim != 3:
            raise ValueError("patterns must be an (N, h, w) stack")
        if stack.shape[0] != len(y):
            raise ValueError(f"{len(y)} measurements for {stack.shape[0]} patterns")
        self.shape = stack.shape[1:]
        self.A = stack.reshape(stack.shape[0], -1).astype(np.float64)
        self.y = y
        self.col_mean = self.A.mean(axis=0)
        self.Ac = self.A - self.col_mean
        self.y_mean = float(y.mean())
        self.b = y - self.y_mean

    @property
    def n_pixels(self) -> int:
        return self.A.shape[1]

    def fidelity(self, x: np.ndarray) -> float:
        r = self.Ac @ x.ravel() - self.b
        return float(r @ r)

    def fidelity_grad(self, x: np.ndarray) -> np.ndarray:
        return (2.0 * (self.Ac.T @ (self.Ac @ x.ravel() - self.b))).reshape(x.shape)

    def offset(self, x: np.ndarray) -> float:
        return self.y_mean - float(self.col_mean @ x.ravel())

    def full_fidelity(self, x: np.ndarray, d: float) -> float:
        """``||A x + d - y||^2`` in the original (uncentered) variables."""
        r = self.A @ x.ravel() + d - self.y
        return float(r @ r)

    def full_fidelity_grad(self, x: np.ndarray, d: float) -> tuple[np.ndarray, float]:
        r = self.A @ x.ravel() + d - self.y
        return (2.0 * (self.A.T @ r)).reshape(x.shape), float(2.0 * r.sum())

    def lipschitz(self, iters: int = 50) -> float:
        """Upper-ish estimate of the fidelity gradient's Lipschitz constant, 2 * sigma_max^2."""
        v = np.ones(self.n_pixels) / math.sqrt(self.n_pixels)
        v += np.linspace(0, 1e-3, self.n_pixels)  # break symmetry deterministically
        s = 0.0
        for _ in range(iters):
            w = self.Ac.T @ (self.Ac @ v)
            s = float(np.linalg.norm(w))
            if s == 0:
                return 1.0
            v = w / s
        return 2.0 * s * 1.01


def reconstruct_correlation(series, patterns) -> np.ndarray:
    """Differential correlation estimate, shifted to be non-negative."""
    sys_ = SpiSystem(series, patterns)
    if len(sys_.y) < 2:
        raise ValueError("correlation reconstruction needs at least 2 measurements")
    x = (sys_.Ac.T @ sys_.b) / len(sys_.y)
    m = x.min()
    if m < 0:
        x = x - m
    return x.reshape(sys_.shape)


def solve_lsq(series, patterns) -> tuple[np.ndarray, float]:
    """Minimum-norm least squares over (x, d); returns (image, offset)."""
    stack = _stack(patterns)
    y = _values(series)
    if stack.shape[0] != len(y):
        raise ValueError(f"{len(y)} measurements for {stack.shape[0]} patterns")
    A = stack.reshape(stack.shape[0], -1).astype(np.float64)
    A1 = np.hstack([A, np.ones((A.shape[0], 1))])
    sol, *_ = np.linalg.lstsq(A1, y, rcond=None)
    return sol[:-1].reshape(stack.shape[1:]), float(sol[-1])


def reconstruct_lsq(series, patterns) -> np.ndarray:
    return solve_lsq(series, patterns)[0]


def default_lambda(series, n_pixels: int) -> float:
    return 0.05 * float(np.mean(np.abs(_values(series)))) / n_pixels


# --- total variation -----------------------------------------------------

def tv_smooth(x: np.ndarray, eps: float) -> float:
    dv = np.diff(x, axis=0)
    dh = np.diff(x, axis=1)
    return float(np.sqrt(dv * dv + eps * eps).sum() + np.sqrt(dh * dh + eps * eps).sum())


def tv_exact(x: np.ndarray) -> float:
    return float(np.abs(np.diff(x, axis=0)).sum() + np.abs(np.diff(x, axis=1)).sum())


def _div(p: np.ndarray, q: np.ndarray, shape) -> np.ndarray:
    """Adjoint of the forward-difference operator applied to duals (p vertical, q horizontal)."""
    out = np.zeros(shape)
    out[:-1, :] += p
    out[1:, :] -= p
    out[:, :-1] += q
    out[:, 1:] -= q
    return out


def tv_prox(v: np.ndarray, weight: float, nonneg: bool, iters: int = 25, dual=None):
    """argmin_x 0.5 ||x - v||^2 + weight * TV(x)  (s.t. x >= 0 if nonneg).

    Fast gradient projection on the dual.  Returns (x, dual) so callers can
    warm-start the next call.
    """
    project = (lambda z: np.maximum(z, 0.0)) if nonneg else (lambda z: z)
    if weight <= 0:
        return project(v), dual
    m, n = v.shape
    if dual is None:
        p, q = np.zeros((m - 1, n)), np.zeros((m, n - 1))
    else:
        p, q = dual
    r, s, t = p, q, 1.0
    step = 1.0 / (8.0 * weight)
    for _ in range(iters):
        x = project(v - weight * _div(r, s, v.shape))
        p_new = np.clip(r + step * (x[:-1, :] - x[1:, :]), -1.0, 1.0)
        q_new = np.clip(s + step * (x[:, :-1] - x[:, 1:]), -1.0, 1.0)
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        r = p_new + ((t - 1.0) / t_new) * (p_new - p)
        s = q_new + ((t - 1.0) / t_new) * (q_new - q)
        p, q, t = p_new, q_new, t_new
    return project(v - weight * _div(p, q, v.shape)), (p, q)


@dataclass
class TVResult:
    image: np.ndarray
    offset: float
    objective: list[float] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    lam: float = 0.0

    def log_lines(self) -> list[str]:
        return [json.dumps({"iter": i, "objective": f, "step": s})
                for i, (f, s) in enumerate(zip(self.objective, self.steps))]


def solve_tv(series, patterns, cfg: SolverConfig | None = None, x0=None) -> TVResult:
    cfg = cfg or SolverConfig()
    sys_ = SpiSystem(series, patterns)
    lam = default_lambda(sys_.y, sys_.n_pixels) if cfg.lam is None else float(cfg.lam)

    # eps is 1e-6 of the expected image dynamic range (~2x the mean pixel value)
    p_mean = float(sys_.col_mean.mean()) or 1.0
    scale = 2.0 * abs(sys_.y_mean) / (p_mean * sys_.n_pixels)
    eps = 1e-6 * (scale if scale > 0 else 1.0)

    def objective(x):
        f = sys_.fidelity(x) + (lam * tv_smooth(x, eps) if lam > 0 else 0.0)
        if not math.isfinite(f):
            raise FloatingPointError("non-finite objective; step size diverged")
        return f

    if cfg.step_policy == "fixed":
        L = 1.0 / cfg.step
    else:
        L = sys_.lipschitz()

    x = np.zeros(sys_.shape) if x0 is None else np.array(x0, dtype=np.float64).reshape(sys_.shape)
    if cfg.nonneg:
        x = np.maximum(x, 0.0)
    f_x = objective(x)
    res = TVResult(x, 0.0, [f_x], [0.0], lam=lam)
    yk, t, dual = x.copy(), 1.0, None
    small = 0
    for k in range(1, cfg.max_iters + 1):
        fy = sys_.fidelity(yk)
        g = sys_.fidelity_grad(yk)
        while True:
            z, new_dual = tv_prox(yk - g / L, lam / L, cfg.nonneg, cfg.inner_iters, dual)
            if cfg.step_policy == "fixed":
                break
            dz = z - yk
            if sys_.fidelity(z) <= fy + float((g * dz).sum()) + 0.5 * L * float((dz * dz).sum()) * (1 + 1e-12) + 1e-12 * abs(fy):
                break
            L *= 2.0
        dual = new_dual
        f_z = objective(z)
        x_prev = x
        if f_z <= f_x:
            x, f_new = z, f_z
        else:
            f_new = f_x
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        yk = x + (t / t_new) * (z - x) + ((t - 1.0) / t_new) * (x - x_prev)
        if f_z > f_x:
            # restart momentum after a rejected step
            t_new, yk = 1.0, x.copy()
        t = t_new
        rel = (f_x - f_new) / max(abs(f_x), 1e-300)
        f_x = f_new
        res.objective.append(f_x)
        res.steps.append(1.0 / L)
        res.iterations = k
        if f_z <= f_x and rel <= cfg.tol:
            small += 1
            if small >= 3:
                res.converged = True
                break
        else:
            small = 0

    res.image = x
    res.offset = sys_.offset(x)
    return res


def reconstruct_tv(series, patterns, cfg: SolverConfig | None = None) -> np.ndarray:
    return solve_tv(series, patterns, cfg).image


def reconstruct(series, patterns, cfg: SolverConfig | None = None) -> np.ndarray:
    cfg = cfg or SolverConfig()
    if cfg.method == "correlation":
        return reconstruct_correlation(series, patterns)
    if cfg.method == "least-squares":
        return reconstruct_lsq(series, patterns)
    return reconstruct_tv(series, patterns, cfg)


# --- metrics -------------------------------------------------------------

def _same_shape(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


def psnr(a, b) -> float:
    """PSNR of ``a`` against reference ``b`` with peak ``max(b)``; inf if identical."""
    a, b = _same_shape(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    peak = float(b.max())
    return 10.0 * math.log10(peak * peak / mse)


def dot_accuracy(a, b) -> float:
    a, b = as_bits(a), as_bits(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean(a == b))


def f1_score(pred, truth) -> float:
    pred, truth = as_bits(pred).astype(bool), as_bits(truth).astype(bool)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {truth.shape}")
    tp = int(np.sum(pred & truth))
    denom = int(pred.sum() + truth.sum())
    return 1.0 if denom == 0 else 2.0 * tp / denom


def pearson(a, b) -> float:
    a, b = _same_shape(a, b)
    return float(np.corrcoef(a.ravel(), b.ravel())[0, 1])
