"""Signal sets, binary labelings and label-subset queries.

Points are stored in a fixed geometric order (ring order for PSK, row-major
``(i_axis, q_axis)`` order for square QAM) and a :class:`Labeling` attaches an
``m``-bit label to every point index.  Bit positions are 1-based in every
public function, bit 1 being the most significant bit of the label.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Constellation",
    "Labeling",
    "build_psk",
    "build_qam",
    "brgc",
    "gray_labeling",
    "subset",
    "by_name",
    "load_constellation",
    "save_constellation",
]

_ENERGY_TOL = 1e-12


def _log2_exact(M: int) -> int:
    if isinstance(M, bool) or int(M) != M or M < 2:
        raise ValueError(f"constellation size must be a power of two >= 2, got {M!r}")
    M = int(M)
    m = M.bit_length() - 1
    if 1 << m != M:
        raise ValueError(f"constellation size must be a power of two, got {M}")
    return m


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Constellation:
    """A normalized complex signal set.

    Attributes:
        points: complex amplitudes, unit average energy.
        name: identifier used in CSV output.
        kind: ``"psk"``, ``"qam"`` or ``"custom"``; selects the Gray geometry.
    """

    points: np.ndarray
    name: str
    kind: str = "custom"
    m: int = field(init=False)

    def __post_init__(self):
        pts = _frozen(np.asarray(self.points, dtype=complex).ravel())
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "m", _log2_exact(pts.size))
        if np.unique(pts).size != pts.size:
            raise ValueError("constellation points must be distinct")
        energy = np.mean(np.abs(pts) ** 2)
        if abs(energy - 1.0) > _ENERGY_TOL:
            raise ValueError(f"average energy must be 1, got {energy!r}")

    @property
    def M(self) -> int:
        return self.points.size

    def __len__(self) -> int:
        return self.points.size

    def __repr__(self) -> str:
        return f"Constellation(name={self.name!r}, M={self.M})"


@dataclass(frozen=True, eq=False)
class Labeling:
    """Bijection between ``m``-bit labels and point indices.

    ``labels[i]`` is the integer label of point ``i``; ``bits[i, j-1]`` is
    its bit at position ``j``.
    """

    labels: np.ndarray
    name: str = "custom"
    m: int = field(init=False)
    bits: np.ndarray = field(init=False, repr=False)
    point_of_label: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        m = _log2_exact(labels.size)
        if sorted(labels.tolist()) != list(range(labels.size)):
            raise ValueError("labeling must be a bijection onto {0, ..., 2^m - 1}")
        shifts = np.arange(m - 1, -1, -1)
        bits = (labels[:, None] >> shifts[None, :]) & 1
        inverse = np.empty_like(labels)
        inverse[labels] = np.arange(labels.size)
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "bits", _frozen(bits.astype(np.int8)))
        object.__setattr__(self, "point_of_label", _frozen(inverse))

    def bitstring(self, index: int) -> str:
        return format(int(self.labels[index]), f"0{self.m}b")

    def __repr__(self) -> str:
        return f"Labeling(name={self.name!r}, m={self.m})"


def _gray(n: int) -> np.ndarray:
    k = np.arange(1 << n, dtype=np.int64)
    return k ^ (k >> 1)


def _clean(z: np.ndarray) -> np.ndarray:
    # sin/cos leave ~1e-16 residue on the axes
    re = np.where(np.abs(z.real) < 1e-15, 0.0, z.real)
    im = np.where(np.abs(z.imag) < 1e-15, 0.0, z.imag)
    return re + 1j * im


def build_psk(M: int) -> Constellation:
    """``M``-PSK on the unit circle, point ``k`` at angle ``2*pi*k/M``."""
    _log2_exact(M)
    k = np.arange(M)
    pts = _clean(np.exp(2j * np.pi * k / M))
    name = {2: "bpsk"}.get(M, f"psk{M}")
    return Constellation(pts, name=name, kind="psk")


def build_qam(M: int) -> Constellation:
    """Square ``M``-QAM with odd-integer grid scaled to unit energy.

    Point ``k = i * L + q`` sits at ``(2i - L + 1) + 1j * (2q - L + 1)`` before
    scaling, with ``L = sqrt(M)``.
    """
    m = _log2_exact(M)
    if m % 2:
        raise ValueError(f"square QAM needs an even number of bits, got M={M}")
    L = 1 << (m // 2)
    axis = 2.0 * np.arange(L) - (L - 1)
    i, q = np.meshgrid(axis, axis, indexing="ij")
    pts = (i + 1j * q).ravel()
    # mean energy per axis is (L^2 - 1) / 3
    pts = pts / np.sqrt(2.0 * (L * L - 1) / 3.0)
    name = "qpsk" if M == 4 else f"qam{M}"
    return Constellation(pts, name=name, kind="qam")


def brgc(m: int, geometry: str = "ring") -> Labeling:
    """Binary reflected Gray code labeling.

    Args:
        m: bits per symbol.
        geometry: ``"ring"`` labels point ``k`` with ``gray(k)`` (PSK, and
            any one-dimensional ordering); ``"grid"`` uses the per-axis
            product ``gray(i) || gray(q)`` for square QAM, I bits first.
    """
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    if geometry == "ring":
        return Labeling(_gray(m), name="brgc")
    if geometry == "grid":
        if m % 2:
            raise ValueError("grid Gray labeling needs an even m")
        h = m // 2
        g = _gray(h)
        labels = (g[:, None] << h) | g[None, :]
        return Labeling(labels.ravel(), name="brgc")
    raise ValueError(f"unknown geometry {geometry!r}")


def gray_labeling(c: Constellation) -> Labeling:
    """The binary reflected Gray labeling matching ``c``'s geometry."""
    if c.kind == "qam":
        return brgc(c.m, "grid")
    if c.kind == "psk":
        return brgc(c.m, "ring")
    raise ValueError("Gray labeling is only defined for built-in PSK/QAM sets")


def subset(c: Constellation, l: Labeling, j: int, b: int) -> np.ndarray:
    """Indices of the points whose label has bit ``b`` at position ``j``."""
    if l.m != c.m:
        raise ValueError("labeling and constellation sizes differ")
    if not 1 <= j <= c.m:
        raise ValueError(f"bit position must be in 1..{c.m}, got {j}")
    if b not in (0, 1):
        raise ValueError(f"bit value must be 0 or 1, got {b!r}")
    return np.flatnonzero(l.bits[:, j - 1] == b)


_NAME_RE = re.compile(r"^(psk|qam)(\d+)$")


def by_name(name: str) -> tuple[Constellation, Labeling]:
    """Built-in constellation with its Gray labeling, e.g. ``"qam16"``."""
    key = name.strip().lower()
    aliases = {"bpsk": "psk2", "qpsk": "qam4"}
    key = aliases.get(key, key)
    match = _NAME_RE.match(key)
    if not match:
        raise ValueError(f"unknown constellation {name!r}")
    family, M = match.group(1), int(match.group(2))
    c = build_psk(M) if family == "psk" else build_qam(M)
    return c, gray_labeling(c)


def load_constellation(path, name: str | None = None):
    """Read ``<bitstring> <re> <im>`` lines.

    Blank lines and ``#`` comments are skipped.  Points are rescaled to unit
    average energy.

    Returns:
        ``(constellation, labeling, scale)`` where ``scale`` is the factor that
        was applied to the raw points.
    """
    path = Path(path)
    labels, pts = [], []
    width = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or set(parts[0]) - {"0", "1"}:
            raise ValueError(f"{path}:{lineno}: expected '<bits> <re> <im>', got {raw!r}")
        if width is None:
            width = len(parts[0])
        elif len(parts[0]) != width:
            raise ValueError(f"{path}:{lineno}: label width {len(parts[0])} != {width}")
        try:
            pts.append(complex(float(parts[1]), float(parts[2])))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad coordinate in {raw!r}") from None
        labels.append(int(parts[0], 2))
    if not pts:
        raise ValueError(f"{path}: no points")
    if len(pts) != 1 << width:
        raise ValueError(f"{path}: {len(pts)} points for {width}-bit labels")
    pts = np.asarray(pts)
    scale = 1.0 / np.sqrt(np.mean(np.abs(pts) ** 2))
    c = Constellation(pts * scale, name=name or path.stem)
    return c, Labeling(labels, name=path.stem), float(scale)


def save_constellation(path, c: Constellation, l: Labeling) -> None:
    lines = [f"{l.bitstring(i)} {float(p.real)!r} {float(p.imag)!r}" for i, p in enumerate(c.points)]
    Path(path).write_text("\n".join(lines) + "\n")
