"""Numerical diagnostics: finite differences, divergences, bounds, benchmarks.

Everything here exists to check claims rather than to sample: agreement of
analytic derivatives with finite differences, the rank-1 curvature proxy's
error against the exact Hessian and its a-priori bound, closed-form and
histogram chi-square divergences, KS and sliced-Wasserstein sample metrics,
exponential decay-rate fits, and the per-step arithmetic overhead of the
guided sampler over the plain exponential-integrator update.

Finite-difference helpers require the callable to accept row batches
``(k, d)``; every function in :mod:`.oracle` does.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import DampedGeometryConfig, GeometryState, lm_guided_eps, low_rank_hessian
from .oracle import GaussianMixtureOracle

__all__ = [
    "finite_diff_gradient",
    "finite_diff_jacobian",
    "finite_diff_hessian",
    "hs_norm",
    "hs_error",
    "rank1_approx_error",
    "ErrorBoundInputs",
    "curvature_error_bound",
    "residual_norm",
    "BoundCheckResult",
    "bound_check",
    "chi2_gaussians",
    "chi2_histogram",
    "equal_mass_edges",
    "ks_statistic",
    "sliced_wasserstein",
    "DecayFit",
    "decay_fit",
    "OverheadResult",
    "overhead_benchmark",
    "DiagnosticsReport",
]


# ---------------------------------------------------------------------------
# finite differences


def finite_diff_gradient(f: Callable, x, h: float = 1e-6):
    """Central-difference gradient of a scalar function, O(h^2) accurate."""
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    pts = np.repeat(x[None, :], 2 * d, axis=0)
    idx = np.arange(d)
    pts[2 * idx, idx] += h
    pts[2 * idx + 1, idx] -= h
    vals = np.asarray(f(pts), dtype=np.float64)
    return (vals[2 * idx] - vals[2 * idx + 1]) / (2.0 * h)


def finite_diff_jacobian(f: Callable, x, h: float = 1e-6):
    """Central-difference Jacobian J[a, i] = d f_a / d x_i of a vector function."""
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    pts = np.repeat(x[None, :], 2 * d, axis=0)
    idx = np.arange(d)
    pts[2 * idx, idx] += h
    pts[2 * idx + 1, idx] -= h
    vals = np.asarray(f(pts), dtype=np.float64)
    return ((vals[2 * idx] - vals[2 * idx + 1]) / (2.0 * h)).T


def finite_diff_hessian(f: Callable, x, h: float = 1e-4):
    """Second-derivative matrix of a scalar function via central stencils.

    Diagonal entries use the 3-point stencil, off-diagonals the 4-point mixed
    stencil; one batched call to f evaluates every stencil point.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    pts = [x[None, :]]
    eye = np.eye(d) * h
    pts.append(x[None, :] + eye)
    pts.append(x[None, :] - eye)
    for i, j in pairs:
        pts.append(np.array([x + eye[i] + eye[j], x + eye[i] - eye[j], x - eye[i] + eye[j], x - eye[i] - eye[j]]))
    vals = np.asarray(f(np.concatenate(pts, axis=0)), dtype=np.float64)
    f0 = vals[0]
    fp = vals[1 : 1 + d]
    fm = vals[1 + d : 1 + 2 * d]
    out = np.zeros((d, d))
    out[np.arange(d), np.arange(d)] = (fp - 2.0 * f0 + fm) / (h * h)
    cursor = 1 + 2 * d
    for i, j in pairs:
        quad = vals[cursor : cursor + 4]
        cursor += 4
        out[i, j] = out[j, i] = (quad[0] - quad[1] - quad[2] + quad[3]) / (4.0 * h * h)
    return out


# ---------------------------------------------------------------------------
# curvature-approximation error


def hs_norm(a) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64)))


def hs_error(a, b) -> float:
    """Hilbert-Schmidt norm of a - b."""
    return hs_norm(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))


def rank1_approx_error(oracle: GaussianMixtureOracle, x, t) -> float:
    """HS distance between -grad^2 log p_t and the rank-1 proxy at (x, t).

    At points where the noise prediction vanishes (symmetry centers) the
    proxy is undefined; the full HS norm of the exact negated Hessian is
    returned so the degenerate case is visible rather than masked.
    """
    exact = -oracle.hessian(x, t)
    eps = oracle.eps(x, t)
    if float(eps @ eps) == 0.0:
        return hs_norm(exact)
    _, sigma = oracle.schedule.alpha_sigma(t)
    return hs_error(exact, low_rank_hessian(eps, float(sigma)).dense())


@dataclass(frozen=True)
class ErrorBoundInputs:
    """Constants entering the a-priori curvature-error bound.

    delta1 bounds ||x|| over the evaluation set, delta2 the prediction error
    of the score provider (zero for an exact oracle), delta3 the HS norm of
    the second derivative of the posterior residual r(x), and diameter the
    support diameter of the clean data.
    """

    delta1: float
    delta2: float
    delta3: float
    diameter: float
    alpha_t: float
    sigma_t: float

    def __post_init__(self):
        vals = [self.delta1, self.delta2, self.delta3, self.diameter, self.alpha_t, self.sigma_t]
        if not all(np.isfinite(v) and v >= 0.0 for v in vals):
            raise ValueError("all bound inputs must be finite and >= 0")
        if self.sigma_t <= 0.0:
            raise ValueError("sigma_t must be > 0")


def curvature_error_bound(inp: ErrorBoundInputs) -> float:
    """(delta1 + a*delta2 + a*D) * (2 + delta3 + 2 (a^2/s^2) D^2)."""
    a, s, dia = inp.alpha_t, inp.sigma_t, inp.diameter
    return (inp.delta1 + a * inp.delta2 + a * dia) * (2.0 + inp.delta3 + 2.0 * (a * a) / (s * s) * dia * dia)


def residual_norm(oracle: GaussianMixtureOracle, x, t):
    """r(x) = ||x - alpha_t ybar(x, t)|| with the posterior mean re-evaluated at x."""
    x = np.asarray(x, dtype=np.float64)
    alpha, _ = oracle.schedule.alpha_sigma(t)
    ybar = oracle.posterior_mean(x, t)
    return np.linalg.norm(x - float(alpha) * ybar, axis=-1)


@dataclass
class BoundCheckResult:
    """Per-point empirical curvature products against the assembled bound."""

    empirical: np.ndarray
    bound: float
    inputs: ErrorBoundInputs
    violations: int


def bound_check(
    oracle: GaussianMixtureOracle,
    t: float,
    xs,
    fd_step: float = 1e-4,
    delta2: float = 0.0,
) -> BoundCheckResult:
    """Check ||r(x) * d^2 r/dx^2||_HS <= bound at every supplied point.

    delta1 and delta3 are taken as maxima over the supplied set, so the bound
    is a single number per (oracle, t, set); the empirical left side uses the
    same finite-difference second derivative that defines delta3.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    alpha, sigma = oracle.schedule.alpha_sigma(t)

    def r_fn(z):
        return residual_norm(oracle, z, t)

    curv = np.array([hs_norm(finite_diff_hessian(r_fn, x, fd_step)) for x in xs])
    rvals = r_fn(xs)
    empirical = rvals * curv
    inputs = ErrorBoundInputs(
        delta1=float(np.linalg.norm(xs, axis=-1).max()),
        delta2=delta2,
        delta3=float(curv.max()),
        diameter=oracle.diameter,
        alpha_t=float(alpha),
        sigma_t=float(sigma),
    )
    bound = curvature_error_bound(inputs)
    return BoundCheckResult(
        empirical=empirical,
        bound=bound,
        inputs=inputs,
        violations=int(np.sum(empirical > bound)),
    )


# ---------------------------------------------------------------------------
# divergences and sample metrics


def chi2_gaussians(mean1: float, std1: float, mean2: float, std2: float) -> float:
    """Closed-form chi-square divergence of N(mean1, std1^2) from N(mean2, std2^2).

    Finite only when 2*std2^2 > std1^2; otherwise the integral diverges and
    inf is returned as the documented signal.
    """
    if std1 <= 0.0 or std2 <= 0.0:
        raise ValueError("standard deviations must be > 0")
    a = 1.0 / (std1 * std1) - 0.5 / (std2 * std2)
    if a <= 0.0:
        return float("inf")
    b = 2.0 * mean1 / (std1 * std1) - mean2 / (std2 * std2)
    c = -mean1 * mean1 / (std1 * std1) + 0.5 * mean2 * mean2 / (std2 * std2)
    val = std2 / (std1 * std1 * np.sqrt(2.0 * a)) * np.exp(b * b / (4.0 * a) + c)
    return float(val - 1.0)


def equal_mass_edges(quantile_fn: Callable, bins: int = 64) -> np.ndarray:
    """Interior bin edges at the 1/bins, 2/bins, ... quantiles of the reference."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    return np.asarray(quantile_fn(np.arange(1, bins) / bins), dtype=np.float64)


def chi2_histogram(samples, edges) -> float:
    """Pearson chi-square of a 1-d sample against equal-mass reference bins.

    A biased plug-in estimate; used for decay *trends* on targets without a
    Gaussian closed form, never as an absolute divergence value.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    edges = np.asarray(edges, dtype=np.float64)
    bins = edges.size + 1
    counts = np.bincount(np.searchsorted(edges, samples), minlength=bins)
    p_hat = counts / samples.size
    q = 1.0 / bins
    return float(np.sum((p_hat - q) ** 2 / q))


def ks_statistic(samples, cdf: Callable) -> float:
    """Kolmogorov-Smirnov sup-distance between a sample and an analytic CDF."""
    xs = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = xs.size
    f = np.asarray(cdf(xs), dtype=np.float64)
    grid = np.arange(n, dtype=np.float64)
    return float(max(np.max(f - grid / n), np.max((grid + 1.0) / n - f)))


def sliced_wasserstein(a, b, n_projections: int = 64, rng: Optional[np.random.Generator] = None) -> float:
    """Sliced 2-Wasserstein distance via exact 1-d transport on random directions.

    Requires equal sample counts so the sorted pairing is the exact coupling.
    With a shared ``rng`` (hence shared directions) this is a true metric, so
    triangle-inequality checks hold to float precision.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError("sliced_wasserstein needs equally sized samples of equal dimension")
    if rng is None:
        rng = np.random.default_rng(0)
    dirs = rng.standard_normal((n_projections, a.shape[1]))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pa = np.sort(a @ dirs.T, axis=0)
    pb = np.sort(b @ dirs.T, axis=0)
    return float(np.sqrt(np.mean((pa - pb) ** 2)))


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log(values) = intercept + rate * t."""

    rate: float
    intercept: float
    r_squared: float


def decay_fit(times, values) -> DecayFit:
    """Fit an exponential decay rate to positive series values."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if times.shape != values.shape or times.size < 3:
        raise ValueError("need matching series with at least 3 points")
    if np.any(values <= 0.0):
        raise ValueError("decay fit requires positive values")
    logv = np.log(values)
    rate, intercept = np.polyfit(times, logv, 1)
    resid = logv - (intercept + rate * times)
    total = logv - logv.mean()
    denom = float(total @ total)
    r2 = 1.0 if denom == 0.0 else 1.0 - float(resid @ resid) / denom
    return DecayFit(rate=float(rate), intercept=float(intercept), r_squared=r2)


# ---------------------------------------------------------------------------
# overhead benchmark


@dataclass(frozen=True)
class OverheadResult:
    baseline_ns: float
    lml_ns: float
    ratio: float
    d: int
    reps: int


def overhead_benchmark(d: int = 16384, reps: int = 200, seed: int = 0) -> OverheadResult:
    """Median per-step cost of the guided update over the bare solver update.

    Times only sampler arithmetic on preallocated vectors: the baseline is
    one exponential-integrator update x' = c1*x - c2*eps; the guided variant
    additionally runs the production EMA + damped-deflection + renormalize
    pipeline.  Score-provider cost is excluded on both sides by construction.
    """
    if d < 1 or reps < 1:
        raise ValueError("d and reps must be >= 1")
    gen = np.random.default_rng(seed)
    x = gen.standard_normal(d)
    eps = gen.standard_normal(d)
    state = GeometryState(prev_eps=gen.standard_normal(d))
    cfg = DampedGeometryConfig(lam=1e-3, kappa=1e-8)
    c1, c2 = 0.97, 0.12  # representative step scalars; values do not affect timing

    def baseline_op():
        return c1 * x - c2 * eps

    def guided_op():
        used, _ = lm_guided_eps(eps, state, cfg)
        return c1 * x - c2 * used

    def median_ns(op) -> float:
        inner = 8
        for _ in range(5 * inner):
            op()
        out = np.empty(reps)
        for r in range(reps):
            tic = time.perf_counter_ns()
            for _ in range(inner):
                op()
            out[r] = (time.perf_counter_ns() - tic) / inner
        return float(np.median(out))

    base = median_ns(baseline_op)
    guided = median_ns(guided_op)
    return OverheadResult(baseline_ns=base, lml_ns=guided, ratio=guided / base, d=d, reps=reps)


# ---------------------------------------------------------------------------
# reports


@dataclass
class DiagnosticsReport:
    """Uniform result container written by the command layer.

    Provenance (config hash and seed) is mandatory; metric values must be
    finite unless explicitly flagged, so NaN never leaks into output files
    silently.
    """

    command: str
    config_hash: str
    seed: int
    metrics: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    allow_infinite: tuple = ()

    def __post_init__(self):
        if not self.config_hash:
            raise ValueError("config_hash is mandatory")
        for key, val in self.metrics.items():
            ok = np.isfinite(val) or (key in self.allow_infinite and not np.isnan(val))
            if not ok:
                raise ValueError(f"metric {key!r} is not finite: {val!r}")

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "metrics": dict(self.metrics),
            "series": {k: {kk: list(map(float, vv)) for kk, vv in v.items()} for k, v in self.series.items()},
            **({"extra": self.extra} if self.extra else {}),
        }
