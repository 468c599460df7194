"""Decoding metrics in the log domain.

Five symbol-metric families are supported:

``matched``
    ``log q(x, y) = log p(y|x)``.
``bicm_sum`` / ``bicm_maxlog``
    product of bit metrics; each bit metric sums (or maximizes) the
    likelihood over the points carrying the hypothesized bit value.
``extrinsic_tx`` / ``extrinsic_hyp``
    sum bit metrics weighted by extrinsic bit probabilities of the other
    label positions, referenced to the transmitted symbol or to the
    hypothesized symbol respectively.

Extrinsic values are stored as log-likelihood ratios *relative to a
reference symbol*: ``llr[j] = log ext_j(agree) / ext_j(disagree)``.  A zero
LLR means no side information, ``+inf`` means perfect side information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from .channel import ChannelModel, Observation, log_transition_density
from .constellation import Constellation, Labeling
from .numerics import log_sum_exp

__all__ = [
    "METRIC_KINDS",
    "ConfigurationError",
    "ExtrinsicModel",
    "ExtrinsicRealization",
    "DecodingMetric",
    "draw_extrinsic",
    "log_densities",
    "bit_log_metrics",
    "symbol_log_metrics",
    "log_bit_metric_sum",
    "log_bit_metric_maxlog",
    "log_symbol_metric",
    "llr",
]

METRIC_KINDS = ("matched", "bicm_sum", "bicm_maxlog", "extrinsic_tx", "extrinsic_hyp")
PRODUCT_KINDS = ("bicm_sum", "bicm_maxlog", "extrinsic_tx")
EXTRINSIC_KINDS = ("extrinsic_tx", "extrinsic_hyp")
EXTRINSIC_MODELS = ("none", "perfect", "gaussian_llr")

# elements per chunk for the (n, M, M, m) hypothesized-reference tensor
_HYP_CHUNK_ELEMENTS = 1 << 22


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ExtrinsicModel:
    """Distribution of the per-bit extrinsic information.

    ``gaussian_llr`` draws a consistent Gaussian LLR ``L ~ N(sigma^2/2,
    sigma^2)`` on the reference side for each label position; ``sigma`` is a
    scalar or one value per position.
    """

    kind: str = "none"
    sigma: float | tuple = 0.0

    def __post_init__(self):
        if self.kind not in EXTRINSIC_MODELS:
            raise ValueError(f"extrinsic model must be one of {EXTRINSIC_MODELS}")
        sig = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        if np.any(sig < 0) or not np.all(np.isfinite(sig)):
            raise ValueError("sigma must be finite and non-negative")
        if isinstance(self.sigma, (list, np.ndarray)):
            object.__setattr__(self, "sigma", tuple(float(s) for s in sig))

    @property
    def is_random(self) -> bool:
        return self.kind == "gaussian_llr"

    def label(self) -> str:
        if self.kind == "gaussian_llr":
            s = self.sigma if np.isscalar(self.sigma) else "/".join(map(str, self.sigma))
            return f"gaussian:{s}"
        return self.kind


@dataclass(frozen=True, eq=False)
class ExtrinsicRealization:
    """One draw of extrinsic information, shape ``(..., m)``.

    ``reference_bits`` (same trailing shape) fixes which absolute bit value
    the reference side is; ``None`` means the all-zero reference.
    """

    llr: np.ndarray
    reference_bits: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "llr", np.asarray(self.llr, dtype=float))
        if self.reference_bits is not None:
            object.__setattr__(self, "reference_bits", np.asarray(self.reference_bits))

    @property
    def agree(self) -> np.ndarray:
        """Probability that each bit equals the reference bit."""
        return expit(self.llr)

    @property
    def ext0(self) -> np.ndarray:
        """``ext_j(0)`` in absolute bit terms."""
        p = self.agree
        if self.reference_bits is None:
            return p
        return np.where(self.reference_bits == 0, p, 1.0 - p)

    @property
    def ext1(self) -> np.ndarray:
        return 1.0 - self.ext0

    def log_agree(self) -> np.ndarray:
        return log_expit(self.llr)

    def log_disagree(self) -> np.ndarray:
        return log_expit(-self.llr)


def draw_extrinsic(
    model: ExtrinsicModel,
    m: int,
    rng: np.random.Generator | None = None,
    size=(),
    reference_bits=None,
) -> ExtrinsicRealization:
    """Independent per-position extrinsic draws of shape ``size + (m,)``."""
    shape = (() if size == () else tuple(int(k) for k in np.atleast_1d(size))) + (m,)
    if model.kind == "none":
        llr = np.zeros(shape)
    elif model.kind == "perfect":
        llr = np.full(shape, np.inf)
    else:
        if rng is None:
            raise ValueError("a generator is required for gaussian_llr draws")
        sigma = np.broadcast_to(np.asarray(model.sigma, dtype=float), (m,))
        llr = 0.5 * sigma**2 + sigma * rng.standard_normal(shape)
    return ExtrinsicRealization(llr, reference_bits)


@dataclass(frozen=True, eq=False)
class DecodingMetric:
    kind: str
    constellation: Constellation
    labeling: Labeling
    extrinsic: ExtrinsicModel | None = None

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"metric kind must be one of {METRIC_KINDS}, got {self.kind!r}")
        if self.labeling.m != self.constellation.m:
            raise ValueError("labeling and constellation sizes differ")
        if self.kind in EXTRINSIC_KINDS:
            if self.extrinsic is None:
                raise ConfigurationError(f"{self.kind} needs an extrinsic model")
        elif self.extrinsic is not None:
            raise ConfigurationError(f"{self.kind} takes no extrinsic model")

    @property
    def m(self) -> int:
        return self.constellation.m

    @property
    def needs_transmitted(self) -> bool:
        return self.kind == "extrinsic_tx"

    @property
    def is_product(self) -> bool:
        return self.kind in PRODUCT_KINDS

    def __repr__(self) -> str:
        ext = f", extrinsic={self.extrinsic.label()}" if self.extrinsic else ""
        return f"DecodingMetric({self.kind!r}, {self.constellation.name}{ext})"


def log_densities(ch: ChannelModel, c: Constellation, obs: Observation) -> np.ndarray:
    """``log p(y_i | x)`` for every observation ``i`` and point ``x``: shape ``(n, M)``."""
    y = np.atleast_1d(obs.y)[:, None]
    h = np.atleast_1d(obs.h)[:, None]
    return log_transition_density(ch, Observation(y, h), c.points[None, :])


def _subsets(l: Labeling) -> np.ndarray:
    # (m, 2, M/2) point indices of X_b^j
    return np.stack([[np.flatnonzero(l.bits[:, j] == b) for b in (0, 1)] for j in range(l.m)])


def _reduce(values: np.ndarray, maxlog: bool) -> np.ndarray:
    return values.max(axis=-1) if maxlog else log_sum_exp(values, axis=-1)


def _plain_bit_metrics(logp, l, maxlog):
    return _reduce(logp[:, _subsets(l)], maxlog)


def _extrinsic_tx_bit_metrics(logp, l, tx, ext):
    bits = l.bits.astype(bool)
    agree = bits[None, :, :] == bits[tx][:, None, :]  # (n, M, m)
    la = ext.log_agree()[:, None, :]
    ld = ext.log_disagree()[:, None, :]
    terms = np.where(agree, la, ld)
    idx = _subsets(l)
    out = np.empty((logp.shape[0], l.m, 2))
    for j in range(l.m):
        others = [k for k in range(l.m) if k != j]
        weighted = logp + terms[..., others].sum(axis=-1)
        out[:, j, :] = log_sum_exp(weighted[:, idx[j]], axis=-1)
    return out


def _extrinsic_hyp_symbol_metrics(logp, l, ext):
    M, m = l.bits.shape
    bits = l.bits.astype(bool)
    agree = bits[:, None, :] == bits[None, :, :]  # (x', x'', j)
    la_all = ext.log_agree()
    ld_all = ext.log_disagree()
    n = logp.shape[0]
    out = np.empty((n, M))
    step = max(1, _HYP_CHUNK_ELEMENTS // (M * M * m))
    for start in range(0, n, step):
        sl = slice(start, min(start + step, n))
        la = la_all[sl][:, None, None, :]
        ld = ld_all[sl][:, None, None, :]
        # full[i, x', x''] = sum_j' log ext_j'(b_j'(x'') xor b_j'(x'))
        full = np.where(agree[None], la, ld).sum(axis=-1)
        vals = logp[sl][:, None, :] + full
        acc = np.zeros((vals.shape[0], M))
        for j in range(m):
            masked = np.where(agree[None, :, :, j], vals, -np.inf)
            # the x'' kept here agree with x' at j, so drop that factor
            acc += log_sum_exp(masked, axis=-1) - la_all[sl][:, j : j + 1]
        out[sl] = acc
    return out


def _as_realization(ext, n, m):
    if ext is None:
        return None
    llr = np.broadcast_to(ext.llr, (n, m))
    return ExtrinsicRealization(llr)


def bit_log_metrics(
    metric: DecodingMetric,
    ch: ChannelModel,
    obs: Observation,
    transmitted=None,
    extrinsic: ExtrinsicRealization | None = None,
    logp: np.ndarray | None = None,
) -> np.ndarray:
    """``log q_j(b, y_i)`` for a product metric, shape ``(n, m, 2)``.

    ``transmitted`` (point indices) and ``extrinsic`` are required for
    ``extrinsic_tx`` only.
    """
    if not metric.is_product:
        raise ConfigurationError(f"{metric.kind} is not a product of bit metrics")
    if logp is None:
        logp = log_densities(ch, metric.constellation, obs)
    l = metric.labeling
    if metric.kind == "extrinsic_tx":
        if extrinsic is None or transmitted is None:
            raise ConfigurationError("extrinsic_tx needs the transmitted symbol and an extrinsic realization")
        tx = np.broadcast_to(np.asarray(transmitted), (logp.shape[0],))
        return _extrinsic_tx_bit_metrics(logp, l, tx, _as_realization(extrinsic, logp.shape[0], l.m))
    return _plain_bit_metrics(logp, l, metric.kind == "bicm_maxlog")


def _product(bitm: np.ndarray, l: Labeling) -> np.ndarray:
    m = l.m
    return bitm[:, np.arange(m)[None, :], l.bits.astype(np.intp)].sum(axis=-1)


def symbol_log_metrics(
    metric: DecodingMetric,
    ch: ChannelModel,
    obs: Observation,
    transmitted=None,
    extrinsic: ExtrinsicRealization | None = None,
    logp: np.ndarray | None = None,
) -> np.ndarray:
    """``log q(x', y_i)`` for every hypothesized point ``x'``, shape ``(n, M)``."""
    if logp is None:
        logp = log_densities(ch, metric.constellation, obs)
    l = metric.labeling
    if metric.kind == "matched":
        return logp
    if metric.kind == "extrinsic_hyp":
        if extrinsic is None:
            raise ConfigurationError("extrinsic_hyp needs an extrinsic realization")
        return _extrinsic_hyp_symbol_metrics(logp, l, _as_realization(extrinsic, logp.shape[0], l.m))
    bitm = bit_log_metrics(metric, ch, obs, transmitted, extrinsic, logp=logp)
    return _product(bitm, l)


def _bit_metric(ch, c, l, j, b, obs, maxlog):
    if not 1 <= j <= c.m:
        raise ValueError(f"bit position must be in 1..{c.m}, got {j}")
    idx = np.flatnonzero(l.bits[:, j - 1] == b)
    lp = log_transition_density(ch, Observation(np.asarray(obs.y)[..., None], np.asarray(obs.h)[..., None]), c.points[idx])
    return _reduce(lp, maxlog)


def log_bit_metric_sum(ch, c, l, j, b, obs):
    """``log sum_{x in X_b^j} p(y|x)``; broadcasts over the observation."""
    return _bit_metric(ch, c, l, j, b, obs, maxlog=False)


def log_bit_metric_maxlog(ch, c, l, j, b, obs):
    """``log max_{x in X_b^j} p(y|x)``."""
    return _bit_metric(ch, c, l, j, b, obs, maxlog=True)


def log_symbol_metric(
    metric: DecodingMetric,
    ch: ChannelModel,
    x,
    obs: Observation,
    transmitted=None,
    extrinsic: ExtrinsicRealization | None = None,
):
    """``log q(x, y)`` for point index (or indices) ``x``.

    For ``extrinsic_tx`` the transmitted point index must be passed
    separately; for ``extrinsic_hyp`` the reference is ``x`` itself.
    """
    if metric.kind in EXTRINSIC_KINDS and extrinsic is None:
        raise ConfigurationError(f"{metric.kind} needs an extrinsic realization")
    y, h = np.broadcast_arrays(np.atleast_1d(obs.y), np.atleast_1d(obs.h))
    o = Observation(y.ravel(), h.ravel())
    n = y.size
    ext = None
    if extrinsic is not None:
        ext = ExtrinsicRealization(np.broadcast_to(extrinsic.llr, (n, metric.m)))
    tx = None if transmitted is None else np.broadcast_to(np.asarray(transmitted).ravel(), (n,))
    table = symbol_log_metrics(metric, ch, o, tx, ext)
    xi = np.broadcast_to(np.asarray(x).ravel(), (n,))
    out = table[np.arange(n), xi].reshape(y.shape)
    return out if np.ndim(obs.y) or np.ndim(x) else float(out.reshape(()))


def llr(ch, c, l, j, obs, kind: str = "sum"):
    """Bit log-metric ratio ``log q_j(1, y) / q_j(0, y)``."""
    if kind not in ("sum", "maxlog"):
        raise ValueError("kind must be 'sum' or 'maxlog'")
    f = log_bit_metric_sum if kind == "sum" else log_bit_metric_maxlog
    return f(ch, c, l, j, 1, obs) - f(ch, c, l, j, 0, obs)
