"""Expectation engine and small numerical helpers.

Every expectation over ``p(x) p(y|x)`` in this package goes through a
:class:`SampleSet`: a frozen list of ``(x, h, y)`` triples with weights.  The
Monte Carlo backend draws them from a seeded generator, the Gauss-Hermite
backend places them on a tensor grid over the two real noise axes (AWGN only)
with an exact uniform sum over the symbols.  Reusing the same set across all
parameter values gives common random numbers for paired comparisons.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .channel import ChannelModel, Observation, sample
from .constellation import Constellation

__all__ = [
    "UnsupportedError",
    "EngineConfig",
    "Estimate",
    "SampleSet",
    "frozen_samples",
    "expect",
    "log_sum_exp",
    "ScalarMax",
    "golden_section_max",
    "maximize_scalar",
    "refine_max",
]

BACKENDS = ("monte_carlo", "gauss_hermite")
DEFAULT_SAMPLES = 200_000
DEFAULT_NODES = 32


class UnsupportedError(ValueError):
    """Raised for a valid request this package deliberately does not handle."""


@dataclass(frozen=True)
class EngineConfig:
    backend: str = "monte_carlo"
    samples: int = DEFAULT_SAMPLES
    nodes_per_axis: int = DEFAULT_NODES
    seed: int = 0

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.samples < 1000:
            raise ValueError("at least 1000 Monte Carlo samples are required")
        if self.nodes_per_axis < 8:
            raise ValueError("at least 8 Gauss-Hermite nodes per axis are required")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def rng(self, *stream: int) -> np.random.Generator:
        """Generator for a named sub-stream, independent of every other one."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, *stream]))


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_effective: int


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Frozen expectation nodes.

    Attributes:
        x: transmitted point indices, shape ``(n,)``.
        obs: observations paired with ``x``.
        weights: probability weights summing to one.
        quadrature: True for deterministic nodes (zero standard error).
    """

    x: np.ndarray
    obs: Observation
    weights: np.ndarray
    quadrature: bool

    def __len__(self) -> int:
        return self.x.size

    def mean(self, values) -> Estimate:
        v = np.asarray(values, dtype=float)
        mu = float(np.dot(self.weights, v))
        n = v.size
        se = 0.0 if self.quadrature else float(np.std(v, ddof=1) / math.sqrt(n))
        return Estimate(mu, se, n)

    def log_mean_exp(self, log_values) -> Estimate:
        """``log E[exp(v)]`` with first-order standard error ``SE(e^v)/E[e^v]``."""
        lv = np.asarray(log_values, dtype=float)
        shift = float(np.max(lv))
        if not np.isfinite(shift):
            shift = 0.0
        e = np.exp(lv - shift)
        est = self.mean(e)
        return Estimate(math.log(est.mean) + shift, est.std_error / est.mean, est.n_effective)


_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 16


def _mc_samples(engine, ch, c, count, stream) -> SampleSet:
    rng = engine.rng(0, stream)
    x = rng.integers(0, c.M, size=count)
    obs = sample(ch, c.points[x], rng)
    return SampleSet(x, obs, np.full(count, 1.0 / count), False)


def _gh_samples(engine, ch, c) -> SampleSet:
    if ch.kind != "awgn":
        raise UnsupportedError("Gauss-Hermite backend is only available for AWGN")
    t, w = np.polynomial.hermite.hermgauss(engine.nodes_per_axis)
    # weight exp(-t^2)/sqrt(pi) is the N(0, 1/2) density of each noise axis
    zr, zi = np.meshgrid(t, t, indexing="ij")
    wz = (np.outer(w, w) / np.pi).ravel()
    z = (zr + 1j * zi).ravel()
    x = np.repeat(np.arange(c.M), z.size)
    y = ch.amplitude * c.points[x] + np.tile(z, c.M)
    weights = np.tile(wz, c.M) / c.M
    return SampleSet(x, Observation(y, np.ones_like(y)), weights, True)


def frozen_samples(
    engine: EngineConfig,
    ch: ChannelModel,
    c: Constellation,
    count: int | None = None,
    stream: int = 0,
) -> SampleSet:
    """Deterministic sample set for ``(engine, channel, constellation, count, stream)``.

    Symbols are uniform over the constellation.  Distinct ``stream`` values
    give statistically independent sets under the same seed.
    """
    if engine.backend == "gauss_hermite":
        key = (engine.backend, engine.nodes_per_axis, ch, c.points.tobytes())
    else:
        count = engine.samples if count is None else int(count)
        key = (engine.backend, engine.seed, count, stream, ch, c.points.tobytes())
    hit = _CACHE.get(key)
    if hit is not None:
        _CACHE.move_to_end(key)
        return hit
    if engine.backend == "gauss_hermite":
        s = _gh_samples(engine, ch, c)
    else:
        s = _mc_samples(engine, ch, c, count, stream)
    _CACHE[key] = s
    while len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return s


def expect(
    engine: EngineConfig,
    integrand: Callable[[np.ndarray, Observation], np.ndarray],
    ch: ChannelModel,
    c: Constellation,
) -> Estimate:
    """``E[f(X, Y)]`` under uniform inputs; ``f`` receives complex symbols."""
    s = frozen_samples(engine, ch, c)
    return s.mean(integrand(c.points[s.x], s.obs))


def log_sum_exp(values, axis=None):
    """``log(sum(exp(values)))`` with a max shift.

    Rows that are entirely ``-inf`` give ``-inf`` without warnings.
    """
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    mx = np.max(a, axis=axis, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - mx), axis=axis, keepdims=True)) + mx
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


@dataclass(frozen=True)
class ScalarMax:
    x: float
    value: float
    converged: bool
    at_boundary: bool
    evaluations: int


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo: float, hi: float, tol: float, max_iter: int = 200) -> ScalarMax:
    """Maximize a unimodal ``f`` on ``[lo, hi]`` down to a bracket of width ``tol``.

    The best point seen (including both ends) is returned.
    """
    seen = {}

    def F(t):
        if t not in seen:
            seen[t] = f(t)
        return seen[t]

    a, b = float(lo), float(hi)
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = F(x1), F(x2)
    it = 0
    while b - a > tol and it < max_iter:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = F(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = F(x2)
        it += 1
    F(float(lo))
    F(float(hi))
    best = max(seen, key=lambda t: (seen[t], -abs(t - 0.5 * (a + b))))
    converged = b - a <= tol and bool(np.isfinite(seen[best]))
    at_boundary = best in (float(lo), float(hi))
    return ScalarMax(best, float(seen[best]), converged, at_boundary, len(seen))


def refine_max(f, lo: float, hi: float, tol: float) -> ScalarMax:
    """Bounded Brent search (golden section with parabolic steps) for a maximum.

    The end points are also evaluated so that a boundary maximum is reported
    exactly at the boundary.
    """
    seen = {}

    def F(t):
        t = float(t)
        if t not in seen:
            seen[t] = f(t)
        return seen[t]

    res = minimize_scalar(lambda t: -F(t), bounds=(lo, hi), method="bounded", options={"xatol": tol / 2})
    F(lo)
    F(hi)
    best = max(seen, key=seen.get)
    at_boundary = best in (float(lo), float(hi))
    return ScalarMax(best, float(seen[best]), bool(res.success), at_boundary, len(seen))


def maximize_scalar(f, lo: float, hi: float, tol: float, grid: int = 11, method: str = "brent") -> ScalarMax:
    """Grid scan followed by bracketed refinement around the best node.

    The scan guards the refinement against a poorly scaled bracket; the
    objectives used here are concave so the refinement bracket holds the
    maximizer.  ``method`` selects the refinement: ``"brent"`` or
    ``"golden"``.
    """
    if method not in ("brent", "golden"):
        raise ValueError(f"unknown method {method!r}")
    nodes = np.linspace(lo, hi, grid)
    vals = np.array([f(float(t)) for t in nodes])
    k = int(np.nanargmax(vals))
    a = float(nodes[max(k - 1, 0)])
    b = float(nodes[min(k + 1, grid - 1)])
    inner = (refine_max if method == "brent" else golden_section_max)(f, a, b, tol)
    if vals[k] > inner.value:
        x, value = float(nodes[k]), float(vals[k])
    else:
        x, value = inner.x, inner.value
    at_boundary = x in (float(lo), float(hi))
    return ScalarMax(x, value, inner.converged, at_boundary, grid + inner.evaluations)
