"""Memoryless AWGN and fully interleaved Rayleigh channels.

``y = h * sqrt(snr) * x + z`` with ``z`` circularly symmetric complex
Gaussian of unit total variance.  For Rayleigh fading ``h`` is unit-power
complex Gaussian and is known at the receiver; for AWGN ``h = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelModel",
    "Observation",
    "db_to_linear",
    "linear_to_db",
    "transition_density",
    "log_transition_density",
    "sample",
]

LOG_PI = float(np.log(np.pi))
KINDS = ("awgn", "rayleigh")


def db_to_linear(snr_db):
    return 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)


def linear_to_db(snr):
    return 10.0 * np.log10(np.asarray(snr, dtype=float))


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    snr: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"channel kind must be one of {KINDS}, got {self.kind!r}")
        if not np.isfinite(self.snr) or self.snr <= 0:
            raise ValueError(f"snr must be positive and finite, got {self.snr!r}")
        object.__setattr__(self, "snr", float(self.snr))

    @classmethod
    def from_db(cls, kind: str, snr_db: float) -> "ChannelModel":
        return cls(kind, float(db_to_linear(snr_db)))

    @property
    def snr_db(self) -> float:
        return float(linear_to_db(self.snr))

    @property
    def amplitude(self) -> float:
        return float(np.sqrt(self.snr))


@dataclass(frozen=True, eq=False)
class Observation:
    """Channel output(s) together with the fading coefficient(s).

    Both fields broadcast; scalars and arrays are accepted.
    """

    y: np.ndarray
    h: np.ndarray = 1.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=complex))
        object.__setattr__(self, "h", np.asarray(self.h, dtype=complex))

    def __len__(self) -> int:
        return int(np.broadcast(self.y, self.h).size)

    def __getitem__(self, key) -> "Observation":
        y, h = np.broadcast_arrays(self.y, self.h)
        return Observation(y[key], h[key])


def log_transition_density(ch: ChannelModel, obs: Observation, x) -> np.ndarray:
    """``log p(y | x, h) = -log(pi) - |y - h sqrt(snr) x|^2``.

    ``x`` broadcasts against the observation arrays.
    """
    residual = obs.y - obs.h * ch.amplitude * np.asarray(x, dtype=complex)
    return -LOG_PI - (residual.real**2 + residual.imag**2)


def transition_density(ch: ChannelModel, obs: Observation, x) -> np.ndarray:
    return np.exp(log_transition_density(ch, obs, x))


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Unit-variance circularly symmetric complex Gaussian draws."""
    g = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
    return (g[0] + 1j * g[1]) * np.sqrt(0.5)


def sample(ch: ChannelModel, x, rng: np.random.Generator) -> Observation:
    """Transmit symbol(s) ``x`` once through the channel.

    Draw order is fixed (fading first, then noise) so a seeded generator
    reproduces the stream exactly.
    """
    x = np.asarray(x, dtype=complex)
    shape = x.shape
    if ch.kind == "rayleigh":
        h = complex_normal(rng, shape).reshape(shape)
    else:
        h = np.ones(shape, dtype=complex)
    z = complex_normal(rng, shape).reshape(shape)
    return Observation(h * ch.amplitude * x + z, h)
