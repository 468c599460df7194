"""Mutual-information type rates: CM and BICM capacities and the GMI.

All accumulation is in nats; values are reported in bits.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel
from .constellation import Constellation, Labeling
from .metrics import (
    ConfigurationError,
    DecodingMetric,
    ExtrinsicModel,
    bit_log_metrics,
    draw_extrinsic,
    log_densities,
    symbol_log_metrics,
)
from .numerics import (
    EngineConfig,
    Estimate,
    SampleSet,
    UnsupportedError,
    frozen_samples,
    log_sum_exp,
    maximize_scalar,
    refine_max,
)

__all__ = [
    "MeasureResult",
    "LogRatios",
    "log_ratios",
    "cm_capacity",
    "bicm_capacity",
    "gmi_at_s",
    "gmi",
    "gmi_per_bit",
    "pseudo_gmi_extrinsic_tx",
    "S_BOUNDS",
    "S_TOL",
]

LN2 = math.log(2.0)
S_BOUNDS = (1e-3, 1e3)
# tolerance on log(s)
S_TOL = 1e-3
_S_GRID = 13


@dataclass(frozen=True)
class MeasureResult:
    """A rate estimate in bits per channel use."""

    value: float
    std_error: float
    s_opt: float | None = None
    per_bit: tuple | None = None
    pseudo: bool = False
    converged: bool = True


@dataclass(frozen=True, eq=False)
class LogRatios:
    """Frozen per-sample metric ratios on a sample set.

    Everything downstream (GMI, Gallager functions) is a function of
    ``L_i(s) = log sum_x' p(x') (q(x', y_i) / q(x_i, y_i))^s`` evaluated on
    these frozen values, so curves in ``s`` and ``rho`` share their random
    numbers.

    Attributes:
        D: ``log q(x', y_i) - log q(x_i, y_i)``, shape ``(n, M)``; generic
            symbol metrics only.
        delta: ``log q_j(not b_j(x_i), y_i) - log q_j(b_j(x_i), y_i)``, stored
            transposed with shape ``(m, n)``; product bit metrics only.  The
            sum over ``x'`` then factorizes into one binary term per label
            position.
    """

    samples: SampleSet
    log_prior: float
    D: np.ndarray | None = None
    delta: np.ndarray | None = None

    def inner(self, s: float) -> np.ndarray:
        if self.delta is not None:
            return _softplus(s * self.delta).sum(axis=0) - LN2 * self.delta.shape[0]
        return log_sum_exp(self.log_prior + s * self.D, axis=1)

    def gmi(self, s: float) -> Estimate:
        """``I_gmi(s)`` in nats."""
        return self.samples.mean(-self.inner(s))

    def e0(self, rho: float, s: float) -> Estimate:
        """Generalized Gallager function in nats."""
        if rho == 0:
            return Estimate(0.0, 0.0, len(self.samples))
        lme = self.samples.log_mean_exp(rho * self.inner(s))
        return Estimate(-lme.mean, lme.std_error, lme.n_effective)


def _softplus(y: np.ndarray) -> np.ndarray:
    """``log(1 + exp(y))``, overwriting ``y``."""
    a = np.abs(y)
    np.negative(a, out=a)
    np.exp(a, out=a)
    np.log1p(a, out=a)
    np.maximum(y, 0.0, out=y)
    y += a
    return y


_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 6


def _metric_key(metric: DecodingMetric):
    ext = metric.extrinsic
    return (
        metric.kind,
        metric.constellation.points.tobytes(),
        metric.labeling.labels.tobytes(),
        None if ext is None else (ext.kind, ext.sigma),
    )


def draw_sample_extrinsic(metric, engine, samples, stream):
    """Extrinsic realization per sample, or ``None`` for plain metrics."""
    if metric.extrinsic is None:
        return None
    if metric.extrinsic.is_random and samples.quadrature:
        raise UnsupportedError("random extrinsic models need the Monte Carlo backend")
    return draw_extrinsic(metric.extrinsic, metric.m, engine.rng(1, stream), size=len(samples))


def log_ratios(metric: DecodingMetric, ch: ChannelModel, engine: EngineConfig, stream: int = 0) -> LogRatios:
    """Frozen metric ratios for ``metric`` on the engine's sample set."""
    key = (_metric_key(metric), ch, engine, stream)
    hit = _CACHE.get(key)
    if hit is not None:
        _CACHE.move_to_end(key)
        return hit
    c = metric.constellation
    samples = frozen_samples(engine, ch, c, stream=stream)
    ext = draw_sample_extrinsic(metric, engine, samples, stream)
    logp = log_densities(ch, c, samples.obs)
    if metric.is_product:
        bitm = bit_log_metrics(metric, ch, samples.obs, samples.x, ext, logp=logp)
        own = metric.labeling.bits[samples.x].astype(np.intp)
        a_own = np.take_along_axis(bitm, own[:, :, None], axis=2)[..., 0]
        a_other = np.take_along_axis(bitm, 1 - own[:, :, None], axis=2)[..., 0]
        out = LogRatios(samples, -c.m * LN2, delta=np.ascontiguousarray((a_other - a_own).T))
    else:
        lq = symbol_log_metrics(metric, ch, samples.obs, samples.x, ext, logp=logp)
        D = lq - lq[np.arange(len(samples)), samples.x][:, None]
        out = LogRatios(samples, -c.m * LN2, D=D)
    _CACHE[key] = out
    while len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return out


def _bits(est: Estimate) -> tuple[float, float]:
    return est.mean / LN2, est.std_error / LN2


def _check_s(s):
    if not s > 0:
        raise ValueError(f"s must be positive, got {s!r}")


def cm_capacity(ch: ChannelModel, c: Constellation, engine: EngineConfig = EngineConfig()) -> MeasureResult:
    """Coded modulation capacity with uniform inputs."""
    metric = DecodingMetric("matched", c, _any_labeling(c))
    value, se = _bits(log_ratios(metric, ch, engine).gmi(1.0))
    return MeasureResult(value, se)


def _any_labeling(c):
    return Labeling(np.arange(c.M), name="natural")


def _per_bit_terms(bitm: np.ndarray, bits: np.ndarray, s: float) -> np.ndarray:
    # s log q_j(B_j, Y) - log(1/2 sum_b q_j(b, Y)^s), shape (n, m)
    n, m, _ = bitm.shape
    own = np.take_along_axis(bitm, bits[:, :, None], axis=2)[..., 0]
    return s * own - (np.logaddexp(s * bitm[..., 0], s * bitm[..., 1]) - LN2)


def _bit_metric_table(metric, ch, engine, stream=0):
    c = metric.constellation
    samples = frozen_samples(engine, ch, c, stream=stream)
    ext = draw_sample_extrinsic(metric, engine, samples, stream)
    bitm = bit_log_metrics(metric, ch, samples.obs, samples.x, ext)
    bits = metric.labeling.bits[samples.x].astype(np.intp)
    return samples, bitm, bits


def _decomposed(metric, ch, engine, s, pseudo=False, s_opt=None, converged=True):
    samples, bitm, bits = _bit_metric_table(metric, ch, engine)
    terms = _per_bit_terms(bitm, bits, s)
    total = samples.mean(terms.sum(axis=1))
    per_bit = tuple(samples.mean(terms[:, j]).mean / LN2 for j in range(terms.shape[1]))
    value, se = _bits(total)
    return MeasureResult(value, se, s_opt, per_bit, pseudo, converged)


def bicm_capacity(ch: ChannelModel, c: Constellation, l: Labeling, engine: EngineConfig = EngineConfig()) -> MeasureResult:
    """Sum over label positions of ``I(B_j; Y)``; ``per_bit`` holds the summands."""
    return _decomposed(DecodingMetric("bicm_sum", c, l), ch, engine, 1.0)


def gmi_at_s(metric: DecodingMetric, ch: ChannelModel, s: float, engine: EngineConfig = EngineConfig()) -> MeasureResult:
    _check_s(s)
    value, se = _bits(log_ratios(metric, ch, engine).gmi(s))
    return MeasureResult(value, se, s_opt=float(s))


def optimize_s(objective, hint: float | None = None):
    """Maximize ``objective(s)`` over ``s`` on a log scale.

    With a ``hint`` the search starts in a window around it and falls back to
    the whole domain when the optimum lands on the window edge.  Returns
    ``(s_opt, value, converged)``; ending on the edge of the ``s`` domain
    counts as non-convergence.
    """
    lo, hi = math.log(S_BOUNDS[0]), math.log(S_BOUNDS[1])
    f = lambda t: objective(math.exp(t))
    if hint is not None and np.isfinite(hint):
        t0 = math.log(hint)
        a, b = max(lo, t0 - 0.5), min(hi, t0 + 0.5)
        res = refine_max(f, a, b, S_TOL)
        on_edge = (res.x - a < 2 * S_TOL and a > lo) or (b - res.x < 2 * S_TOL and b < hi)
        if not on_edge:
            return math.exp(res.x), res.value, res.converged and not res.at_boundary
    res = maximize_scalar(f, lo, hi, S_TOL, grid=_S_GRID)
    return math.exp(res.x), res.value, res.converged and not res.at_boundary


def gmi(metric: DecodingMetric, ch: ChannelModel, engine: EngineConfig = EngineConfig()) -> MeasureResult:
    """GMI: ``sup_s I_gmi(s)``, found by scalar search in ``log s``."""
    ratios = log_ratios(metric, ch, engine)
    s_opt, _, converged = optimize_s(lambda s: ratios.gmi(s).mean)
    value, se = _bits(ratios.gmi(s_opt))
    return MeasureResult(value, se, s_opt=s_opt, converged=converged)


def gmi_per_bit(
    metric: DecodingMetric,
    ch: ChannelModel,
    engine: EngineConfig = EngineConfig(),
    s: float | None = None,
) -> MeasureResult:
    """Per-label-position decomposition of ``I_gmi(s)`` for product metrics.

    With ``s=None`` the decomposition is taken at the GMI-optimal ``s``.
    """
    if metric.kind == "extrinsic_hyp":
        raise UnsupportedError("extrinsic_hyp depends on the hypothesized symbol; no per-bit decomposition")
    if not metric.is_product:
        raise ConfigurationError(f"{metric.kind} is not a product of bit metrics")
    converged = True
    if s is None:
        opt = gmi(metric, ch, engine)
        s, converged = opt.s_opt, opt.converged
    _check_s(s)
    return _decomposed(metric, ch, engine, s, s_opt=float(s), converged=converged)


def pseudo_gmi_extrinsic_tx(
    model: ExtrinsicModel,
    ch: ChannelModel,
    c: Constellation,
    l: Labeling,
    engine: EngineConfig = EngineConfig(),
) -> MeasureResult:
    """GMI-shaped rate at ``s = 1`` for the transmitted-symbol extrinsic metric.

    This is not an achievable rate (the metric peeks at the transmitted
    symbol) and the result is flagged ``pseudo``.
    """
    metric = DecodingMetric("extrinsic_tx", c, l, model)
    return _decomposed(metric, ch, engine, 1.0, pseudo=True, s_opt=1.0)
