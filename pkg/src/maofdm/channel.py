"""Multi-tap field-response channel between a Tx and an Rx movable antenna.

Positions are expressed in wavelengths, so the free-space phase of a path
at position ``p`` with wave vector ``k`` is simply ``2*pi * p @ k``.  The
carrier wavelength in meters is carried by :class:`WidebandChannel` for
unit conversion only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi

Position = np.ndarray
"Length-3 float array ``[x, y, z]`` in wavelength units."


def as_position(pos) -> Position:
    p = np.asarray(pos, dtype=float).reshape(3)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"position must be finite, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class Region:
    """Axis-aligned cuboid ``[lo, hi]`` for one antenna (wavelength units).

    Zero-width axes are allowed (planar or linear movement).
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_position(self.lo)
        hi = as_position(self.hi)
        if np.any(lo > hi):
            raise ValueError(f"region min {lo} exceeds max {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, half_width: float) -> "Region":
        """Cube ``[-half_width, half_width]^3`` centred on the reference point."""
        h = float(half_width)
        return cls(np.full(3, -h), np.full(3, h))

    @classmethod
    def point(cls, pos=(0.0, 0.0, 0.0)) -> "Region":
        p = as_position(pos)
        return cls(p, p)

    @property
    def size(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def degenerate_axes(self) -> np.ndarray:
        return self.hi == self.lo

    def contains(self, pos, atol: float = 0.0) -> bool:
        p = np.asarray(pos, dtype=float)
        return bool(np.all(p >= self.lo - atol) and np.all(p <= self.hi + atol))


def clamp_to_region(pos, region: Region) -> Position:
    """Componentwise clamp of ``pos`` into ``region``."""
    return np.clip(np.asarray(pos, dtype=float), region.lo, region.hi)


def wave_vector(elevation: float, azimuth: float) -> np.ndarray:
    """Virtual angles ``[cos(el)cos(az), cos(el)sin(az), sin(el)]``."""
    ce = np.cos(elevation)
    return np.array([ce * np.cos(azimuth), ce * np.sin(azimuth), np.sin(elevation)])


@dataclass(frozen=True)
class PathGeometry:
    """Departure and arrival directions of one propagation path (radians)."""

    elev_aod: float
    azim_aod: float
    elev_aoa: float
    azim_aoa: float
    k_tx: np.ndarray = field(init=False, repr=False, compare=False)
    k_rx: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("elev_aod", "elev_aoa"):
            el = getattr(self, name)
            if not -np.pi / 2 <= el <= np.pi / 2:
                raise ValueError(f"{name}={el} outside [-pi/2, pi/2]")
        object.__setattr__(self, "k_tx", wave_vector(self.elev_aod, self.azim_aod))
        object.__setattr__(self, "k_rx", wave_vector(self.elev_aoa, self.azim_aoa))


@dataclass(frozen=True, eq=False)
class TapCluster:
    """Paths falling into one delay tap and their complex path coefficients."""

    paths: tuple[PathGeometry, ...]
    coeffs: np.ndarray

    def __post_init__(self):
        paths = tuple(self.paths)
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(paths) == 0:
            raise ValueError("a tap needs at least one path")
        if len(paths) != coeffs.size:
            raise ValueError(f"{len(paths)} paths but {coeffs.size} coefficients")
        object.__setattr__(self, "paths", paths)
        object.__setattr__(self, "coeffs", coeffs)

    @cached_property
    def k_tx(self) -> np.ndarray:
        return np.array([p.k_tx for p in self.paths])

    @cached_property
    def k_rx(self) -> np.ndarray:
        return np.array([p.k_rx for p in self.paths])

    @property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))


@dataclass(frozen=True, eq=False)
class WidebandChannel:
    """Ground-truth channel of one realization: ``T`` tap clusters.

    The flattened per-path arrays (``k_tx``, ``k_rx``, ``coeffs``,
    ``tap_index``) are built once and reused by the vectorised evaluators.
    """

    taps: tuple[TapCluster, ...]
    wavelength: float = 0.125

    def __post_init__(self):
        taps = tuple(self.taps)
        if len(taps) == 0:
            raise ValueError("channel needs at least one tap")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        object.__setattr__(self, "taps", taps)

    @property
    def n_taps(self) -> int:
        return len(self.taps)

    @cached_property
    def k_tx(self) -> np.ndarray:
        return np.concatenate([tap.k_tx for tap in self.taps])

    @cached_property
    def k_rx(self) -> np.ndarray:
        return np.concatenate([tap.k_rx for tap in self.taps])

    @cached_property
    def coeffs(self) -> np.ndarray:
        return np.concatenate([tap.coeffs for tap in self.taps])

    @cached_property
    def tap_index(self) -> np.ndarray:
        return np.concatenate(
            [np.full(len(tap.paths), i) for i, tap in enumerate(self.taps)]
        )

    @cached_property
    def selector(self) -> np.ndarray:
        """(N, T) 0/1 matrix summing path terms into their taps."""
        sel = np.zeros((self.coeffs.size, self.n_taps))
        sel[np.arange(self.coeffs.size), self.tap_index] = 1.0
        return sel

    def to_meters(self, pos) -> np.ndarray:
        return np.asarray(pos, dtype=float) * self.wavelength


def frv(tap: TapCluster, pos, side: str = "tx") -> np.ndarray:
    """Field-response vector of ``tap`` at ``pos``: ``exp(j 2pi pos . k_l)``."""
    p = as_position(pos)
    if side == "tx":
        k = tap.k_tx
    elif side == "rx":
        k = tap.k_rx
    else:
        raise ValueError(f"side must be 'tx' or 'rx', got {side!r}")
    return np.exp(1j * TWO_PI * (k @ p))


def cir_tap(tap: TapCluster, t, r) -> complex:
    """Tap response ``f(r)^H diag(b) g(t)``."""
    return complex(np.conj(frv(tap, r, "rx")) @ (tap.coeffs * frv(tap, t, "tx")))


def path_terms(channel: WidebandChannel, t: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Per-path contributions ``b_n exp(j 2pi (t.k_tx - r.k_rx))``.

    ``t`` and ``r`` have shape ``(..., 3)``; the result has shape ``(..., N)``.
    """
    phase = TWO_PI * (t @ channel.k_tx.T - r @ channel.k_rx.T)
    return channel.coeffs * np.exp(1j * phase)


def cir_batch(channel: WidebandChannel, t, r) -> np.ndarray:
    """CIR for many position pairs at once, shape ``(..., T)``."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    return path_terms(channel, t, r) @ channel.selector


def cir(channel: WidebandChannel, t, r) -> np.ndarray:
    """Length-``T`` channel impulse response (not zero padded)."""
    return cir_batch(channel, as_position(t), as_position(r))


def cfr(h, M: int) -> np.ndarray:
    """Unnormalised DFT of the zero-padded CIR over ``M`` subcarriers.

    ``c_m = sum_tau h_tau exp(-j 2pi m tau / M)``, applied along the last axis.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] > M:
        raise ValueError(f"M={M} subcarriers cannot carry {h.shape[-1]} taps")
    return np.fft.fft(h, n=M, axis=-1)
