"""Random-coding experiment with an exhaustive mismatched decoder.

Each trial draws a fresh i.i.d. uniform codebook, sends a uniformly chosen
message through the channel and decodes by maximizing the additive log
metric over all codewords.  No interleaver appears anywhere: the random
symbol-level codebook plays the role of the code ensemble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel, sample
from .exponents import GallagerFamily, GallagerFunction
from .metrics import DecodingMetric, draw_extrinsic, symbol_log_metrics
from .numerics import EngineConfig

__all__ = ["RandomCodeExperiment", "SimulationResult", "run", "wilson_halfwidth", "family_for"]

MAX_LABEL_BITS = 24
MAX_OPS_PER_TRIAL = 10**8
# (trials, N, M, |codebook|) elements per batch
_BATCH_ELEMENTS = 1 << 21
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class RandomCodeExperiment:
    """Block length ``N`` symbols at rate ``R`` bits per channel use."""

    N: int
    R: float
    trials: int
    metric: DecodingMetric
    seed: int = 0

    def __post_init__(self):
        if self.N < 1 or self.trials < 1:
            raise ValueError("N and trials must be positive")
        if self.R < 0:
            raise ValueError("rate must be non-negative")
        m = self.metric.m
        if self.N * m > MAX_LABEL_BITS:
            raise ValueError(f"N*m = {self.N * m} exceeds the {MAX_LABEL_BITS}-bit guard")
        if self.codewords * self.N * (1 << m) > MAX_OPS_PER_TRIAL:
            raise ValueError("codebook too large for exhaustive decoding")

    @property
    def codewords(self) -> int:
        return max(1, round(2.0 ** (self.N * self.R)))


@dataclass(frozen=True)
class SimulationResult:
    pe_hat: float
    ci_halfwidth: float
    bound: float
    rho_opt: float
    s_opt: float
    errors: int
    trials: int


def wilson_halfwidth(errors: int, trials: int, z: float = _Z95) -> float:
    """Half width of the Wilson score interval."""
    p = errors / trials
    denom = 1.0 + z * z / trials
    return z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom


def family_for(metric: DecodingMetric) -> GallagerFamily:
    """Gallager family whose bound applies to decoding with ``metric``."""
    if metric.kind == "matched":
        return GallagerFamily("cm")
    if metric.kind in ("bicm_sum", "bicm_maxlog"):
        return GallagerFamily("bicm", metric.kind)
    return GallagerFamily("extrinsic", metric.kind, extrinsic=metric.extrinsic)


def _decode_errors(exp, ch, rng, batch):
    c = exp.metric.constellation
    n_cw = exp.codewords
    codebooks = rng.integers(0, c.M, size=(batch, n_cw, exp.N))
    msg = rng.integers(0, n_cw, size=batch)
    tx = codebooks[np.arange(batch), msg]  # (batch, N)
    obs = sample(ch, c.points[tx].ravel(), rng)
    ext = None
    if exp.metric.extrinsic is not None:
        ext = draw_extrinsic(exp.metric.extrinsic, c.m, rng, size=batch * exp.N)
    lq = symbol_log_metrics(exp.metric, ch, obs, tx.ravel(), ext).reshape(batch, exp.N, c.M)
    # scores[t, w] = sum_k log q(x_w,k, y_k)
    scores = np.take_along_axis(lq, codebooks.transpose(0, 2, 1), axis=2).sum(axis=1)
    own = scores[np.arange(batch), msg]
    rivals = scores >= own[:, None]
    rivals[np.arange(batch), msg] = False
    # ties count as errors
    return int(np.count_nonzero(rivals.any(axis=1)))


def run(exp: RandomCodeExperiment, ch: ChannelModel, engine: EngineConfig = EngineConfig()) -> SimulationResult:
    """Empirical ensemble error rate and the random-coding bound.

    The bound is ``exp(-N E_r(R))`` with ``E_r`` from the Gallager family of
    the decoding metric, estimated with ``engine``.
    """
    rng = np.random.default_rng(np.random.SeedSequence([exp.seed, 2]))
    errors = 0
    if exp.codewords > 1:
        per_trial = exp.N * exp.metric.constellation.M * exp.codewords
        step = max(1, _BATCH_ELEMENTS // per_trial)
        done = 0
        while done < exp.trials:
            batch = min(step, exp.trials - done)
            errors += _decode_errors(exp, ch, rng, batch)
            done += batch
    c, l = exp.metric.constellation, exp.metric.labeling
    point = GallagerFunction(family_for(exp.metric), ch, c, l, engine).exponent(exp.R)
    bound = min(1.0, math.exp(-exp.N * point.Er))
    return SimulationResult(
        pe_hat=errors / exp.trials,
        ci_halfwidth=wilson_halfwidth(errors, exp.trials),
        bound=bound,
        rho_opt=point.rho_opt,
        s_opt=point.s_opt,
        errors=errors,
        trials=exp.trials,
    )
