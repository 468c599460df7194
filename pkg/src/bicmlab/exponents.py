"""Gallager functions, random-coding exponents and cutoff rates.

Gallager functions and exponents are in nats; rates are taken in bits at the
interface and converted with ``ln 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel
from .constellation import Constellation, Labeling
from .measures import LN2, LogRatios, draw_sample_extrinsic, log_ratios, optimize_s
from .metrics import DecodingMetric, ExtrinsicModel, bit_log_metrics
from .numerics import EngineConfig, Estimate, frozen_samples, log_sum_exp, maximize_scalar

__all__ = [
    "GallagerFamily",
    "GallagerFunction",
    "ExponentPoint",
    "CutoffRates",
    "e0_cm",
    "e0_q",
    "e0_ind",
    "e0_extrinsic",
    "random_coding_exponent",
    "exponent_curve",
    "cutoff_rates",
    "RHO_TOL",
]

RHO_TOL = 1e-4
_RHO_GRID = 11
FAMILY_KINDS = ("cm", "bicm", "ind", "extrinsic")
S_MODES = ("optimize", "fixed", "coupled")


def _check_rho(rho):
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho!r}")


def _check_s(s):
    if not s > 0:
        raise ValueError(f"s must be positive, got {s!r}")


@dataclass(frozen=True)
class GallagerFamily:
    """Which Gallager function to use.

    Attributes:
        kind: ``cm``, ``bicm`` (mismatched bit metric), ``ind`` (parallel
            independent binary channels) or ``extrinsic``.
        metric: ``bicm_sum``/``bicm_maxlog`` for ``bicm``;
            ``extrinsic_tx``/``extrinsic_hyp`` for ``extrinsic``.
        s_mode: ``optimize`` over ``s``, ``fixed`` at ``s``, or ``coupled``
            with ``s = 1/(1+rho)``.  Ignored for ``cm`` and ``ind``.
    """

    kind: str
    metric: str | None = None
    s_mode: str = "optimize"
    s: float | None = None
    extrinsic: ExtrinsicModel | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"family kind must be one of {FAMILY_KINDS}")
        if self.s_mode not in S_MODES:
            raise ValueError(f"s_mode must be one of {S_MODES}")
        if self.kind in ("cm", "ind"):
            if self.metric is not None:
                raise ValueError(f"{self.kind} family takes no metric")
            object.__setattr__(self, "s_mode", "coupled")
        elif self.kind == "bicm" and self.metric not in ("bicm_sum", "bicm_maxlog"):
            raise ValueError("bicm family needs metric bicm_sum or bicm_maxlog")
        elif self.kind == "extrinsic":
            if self.metric not in ("extrinsic_tx", "extrinsic_hyp"):
                raise ValueError("extrinsic family needs metric extrinsic_tx or extrinsic_hyp")
            if self.extrinsic is None:
                raise ValueError("extrinsic family needs an extrinsic model")
        if self.s_mode == "fixed":
            _check_s(self.s if self.s is not None else -1)
        if not self.name:
            object.__setattr__(self, "name", self._default_name())

    def _default_name(self) -> str:
        if self.kind in ("cm", "ind"):
            return self.kind
        base = self.metric.removeprefix("bicm_").replace("extrinsic_", "ext-")
        if self.s_mode == "coupled":
            base += "-coupled"
        elif self.s_mode == "fixed":
            base += f"-s{self.s:g}"
        if self.extrinsic is not None:
            base += f"[{self.extrinsic.label()}]"
        return base

    def decoding_metric(self, c: Constellation, l: Labeling) -> DecodingMetric:
        if self.kind == "cm":
            return DecodingMetric("matched", c, l)
        if self.kind == "ind":
            return DecodingMetric("bicm_sum", c, l)
        return DecodingMetric(self.metric, c, l, self.extrinsic)


@dataclass(frozen=True)
class ExponentPoint:
    R_bits: float
    Er: float
    rho_opt: float
    s_opt: float
    std_error: float
    converged: bool


class _Subchannels:
    """Binary-input subchannels of the parallel-channel model.

    Label position ``j`` gets its own independent sample stream; its bit
    metric is the sum metric, which is matched to ``p_j(y|b)``.
    """

    def __init__(self, ch, c, l, engine):
        metric = DecodingMetric("bicm_sum", c, l)
        self.D = []
        self.samples = []
        for j in range(c.m):
            samples = frozen_samples(engine, ch, c, stream=j)
            bitm = bit_log_metrics(metric, ch, samples.obs)
            own = l.bits[samples.x, j].astype(np.intp)
            lq = bitm[:, j, :]
            self.D.append(lq - np.take_along_axis(lq, own[:, None], axis=1))
            self.samples.append(samples)

    def e0(self, rho: float) -> Estimate:
        if rho == 0:
            return Estimate(0.0, 0.0, len(self.samples[0]))
        s = 1.0 / (1.0 + rho)
        total, var = 0.0, 0.0
        for D, samples in zip(self.D, self.samples):
            lme = samples.log_mean_exp(rho * log_sum_exp(-LN2 + s * D, axis=1))
            total -= lme.mean
            var += lme.std_error**2
        return Estimate(total, math.sqrt(var), len(self.samples[0]))

    def sqrt_ratio_means(self) -> list[Estimate]:
        # E_j[ sqrt(q_j(not B) / q_j(B)) ]; D holds 0 at the own bit
        return [s.mean(np.exp(0.5 * D.sum(axis=1))) for D, s in zip(self.D, self.samples)]


class GallagerFunction:
    """A Gallager function frozen on one sample set.

    ``best(rho)`` applies the family's ``s`` rule (optimizing when asked) and
    is memoized, so sweeping many rates reuses earlier evaluations.
    """

    def __init__(self, family: GallagerFamily, ch: ChannelModel, c: Constellation, l: Labeling, engine: EngineConfig):
        self.family = family
        self.ch, self.c, self.l, self.engine = ch, c, l, engine
        if family.kind == "ind":
            self._sub = _Subchannels(ch, c, l, engine)
            self._ratios = None
        else:
            self._sub = None
            self._ratios: LogRatios = log_ratios(family.decoding_metric(c, l), ch, engine)
        self._memo: dict[float, tuple[Estimate, float, bool]] = {}

    def e0(self, rho: float, s: float | None = None) -> Estimate:
        """Gallager function at ``(rho, s)``; ``s`` defaults to ``1/(1+rho)``."""
        _check_rho(rho)
        if self._sub is not None:
            return self._sub.e0(rho)
        if s is None:
            s = 1.0 / (1.0 + rho)
        _check_s(s)
        return self._ratios.e0(rho, s)

    def _nearest_s(self, rho):
        known = [(abs(r - rho), v[1]) for r, v in self._memo.items() if r > 0 and np.isfinite(v[1])]
        return min(known)[1] if known else None

    def best(self, rho: float) -> tuple[Estimate, float, bool]:
        """``(E0, s_used, converged)`` under the family's ``s`` rule."""
        rho = float(rho)
        hit = self._memo.get(rho)
        if hit is not None:
            return hit
        fam = self.family
        if rho == 0:
            out = (self.e0(0.0), math.nan if fam.s_mode == "optimize" else self._s_for(0.0), True)
        elif fam.s_mode == "optimize":
            s_opt, _, ok = optimize_s(lambda s: self._ratios.e0(rho, s).mean, hint=self._nearest_s(rho))
            out = (self._ratios.e0(rho, s_opt), s_opt, ok)
        else:
            s = self._s_for(rho)
            out = (self.e0(rho, s), s, True)
        self._memo[rho] = out
        return out

    def _s_for(self, rho):
        return self.family.s if self.family.s_mode == "fixed" else 1.0 / (1.0 + rho)

    def exponent(self, R_bits: float) -> ExponentPoint:
        """``E_r(R) = max_rho max_s E0(rho, s) - rho R`` for ``R`` in bits."""
        if not R_bits >= 0:
            raise ValueError("rate must be non-negative")
        R = R_bits * LN2
        res = maximize_scalar(lambda r: self.best(r)[0].mean - r * R, 0.0, 1.0, RHO_TOL, grid=_RHO_GRID)
        est, s, ok = self.best(res.x)
        return ExponentPoint(float(R_bits), res.value, res.x, s, est.std_error, ok and res.converged)

    def gmi(self) -> Estimate:
        """Achievable rate of the family in nats: the slope of ``E0`` at zero."""
        if self._sub is not None:
            parts = [s.mean(-log_sum_exp(-LN2 + D, axis=1)) for D, s in zip(self._sub.D, self._sub.samples)]
            return Estimate(sum(p.mean for p in parts), math.sqrt(sum(p.std_error**2 for p in parts)), parts[0].n_effective)
        fam = self.family
        if fam.s_mode == "optimize":
            s, _, _ = optimize_s(lambda s: self._ratios.gmi(s).mean)
        else:
            s = self._s_for(0.0)
        return self._ratios.gmi(s)


def e0_cm(ch: ChannelModel, c: Constellation, rho: float, engine: EngineConfig = EngineConfig()) -> Estimate:
    """Coded modulation Gallager function (uniform inputs, ``s = 1/(1+rho)``)."""
    _check_rho(rho)
    metric = DecodingMetric("matched", c, Labeling(np.arange(c.M)))
    return log_ratios(metric, ch, engine).e0(rho, 1.0 / (1.0 + rho))


def e0_q(metric: DecodingMetric, ch: ChannelModel, rho: float, s: float, engine: EngineConfig = EngineConfig()) -> Estimate:
    """Generalized Gallager function of an arbitrary symbol metric."""
    _check_rho(rho)
    _check_s(s)
    return log_ratios(metric, ch, engine).e0(rho, s)


def e0_ind(ch: ChannelModel, c: Constellation, l: Labeling, rho: float, engine: EngineConfig = EngineConfig()) -> Estimate:
    """Gallager function of the independent parallel-channel model."""
    _check_rho(rho)
    return _Subchannels(ch, c, l, engine).e0(rho)


def e0_extrinsic(
    kind: str,
    model: ExtrinsicModel,
    ch: ChannelModel,
    c: Constellation,
    l: Labeling,
    rho: float,
    s: float,
    engine: EngineConfig = EngineConfig(),
) -> Estimate:
    """Gallager function with extrinsic side information drawn per sample."""
    if kind not in ("extrinsic_tx", "extrinsic_hyp"):
        raise ValueError(f"unknown extrinsic metric {kind!r}")
    return e0_q(DecodingMetric(kind, c, l, model), ch, rho, s, engine)


def random_coding_exponent(
    family: GallagerFamily,
    R_bits: float,
    ch: ChannelModel,
    c: Constellation,
    l: Labeling,
    engine: EngineConfig = EngineConfig(),
) -> ExponentPoint:
    return GallagerFunction(family, ch, c, l, engine).exponent(R_bits)


def exponent_curve(family, rates, ch, c, l, engine: EngineConfig = EngineConfig()) -> list[ExponentPoint]:
    """Random-coding exponent on a rate grid (bits), sharing one sample set."""
    g = GallagerFunction(family, ch, c, l, engine)
    return [g.exponent(float(R)) for R in rates]


@dataclass(frozen=True)
class CutoffRates:
    """Cutoff rates in nats.  ``R0_q`` and ``s_opt`` are keyed by metric kind."""

    R0_cm: Estimate
    R0_q: dict
    R0_ind: Estimate
    R0_av: Estimate
    s_opt: dict


def cutoff_rates(
    ch: ChannelModel,
    c: Constellation,
    l: Labeling,
    engine: EngineConfig = EngineConfig(),
    metrics=("bicm_sum", "bicm_maxlog"),
) -> CutoffRates:
    r0_cm = e0_cm(ch, c, 1.0, engine)
    r0_q, s_opt = {}, {}
    for kind in metrics:
        ratios = log_ratios(DecodingMetric(kind, c, l), ch, engine)
        s, _, _ = optimize_s(lambda s: ratios.e0(1.0, s).mean, hint=0.5)
        r0_q[kind] = ratios.e0(1.0, s)
        s_opt[kind] = s
    sub = _Subchannels(ch, c, l, engine)
    means = sub.sqrt_ratio_means()
    m = c.m
    # per-subchannel E0(1) = log 2 - log(1 + E_j[sqrt ratio])
    r0_ind = Estimate(
        sum(LN2 - math.log1p(e.mean) for e in means),
        math.sqrt(sum((e.std_error / (1.0 + e.mean)) ** 2 for e in means)),
        means[0].n_effective,
    )
    avg = sum(e.mean for e in means) / m
    avg_se = math.sqrt(sum(e.std_error**2 for e in means)) / m
    r0_av = Estimate(m * (LN2 - math.log1p(avg)), m * avg_se / (1.0 + avg), means[0].n_effective)
    return CutoffRates(r0_cm, r0_q, r0_ind, r0_av, s_opt)
