"""Numerical demonstrations of the analytical results.

* :func:`synthesize_phases` moves the Tx antenna along the x axis by an
  integer number of wavelengths until every path phase falls into a small
  box, which drives each tap to full amplitude ``||b_tau||_1`` with a
  prescribed phase.
* :func:`rational_dependence_scan` looks for small integer relations among
  virtual angles (the obstruction to that construction).
* :func:`equal_gain_dominance` checks that flat subcarrier gains maximise
  the water-filled rate for a fixed total gain at high SNR.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .channel import TWO_PI, PathGeometry, TapCluster, WidebandChannel, cir_tap
from .rate import LinkBudget, achievable_rate, rate_waterfilled_batch


@dataclass(frozen=True)
class PhaseTarget:
    """Target tap phases ``nu`` (cycles) and amplitude tolerance ``delta``."""

    nu: np.ndarray
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float).reshape(-1))
        if not self.delta > 0:
            raise ValueError("delta must be positive")


@dataclass
class PhaseSynthesis:
    k: int | None
    residuals: np.ndarray | None
    box_width: float
    box_volume: float
    trials: int

    @property
    def found(self) -> bool:
        return self.k is not None

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "residuals": None if self.residuals is None else self.residuals.tolist(),
            "box_width": self.box_width,
            "box_volume": self.box_volume,
            "trials": self.trials,
        }


def phase_box(channel: WidebandChannel, target: PhaseTarget):
    """Anchors ``a_n = (nu_tau - angle(b_n)/2pi) mod 1`` and the common box width.

    The width ``delta / (2 pi sum_tau ||b_tau||_1)`` keeps every tap residual
    within ``delta`` because ``|1 - exp(j 2pi x)| <= 2 pi x``.
    """
    if target.nu.size != channel.n_taps:
        raise ValueError(f"need {channel.n_taps} target phases, got {target.nu.size}")
    b = channel.coeffs
    anchors = np.mod(target.nu[channel.tap_index] - np.angle(b) / TWO_PI, 1.0)
    total_l1 = sum(tap.l1_norm for tap in channel.taps)
    width = target.delta / (TWO_PI * total_l1)
    return anchors, width


def synthesize_phases(
    channel: WidebandChannel,
    target: PhaseTarget,
    k_limit: int,
    chunk: int = 1 << 16,
) -> PhaseSynthesis:
    """Smallest integer ``k <= k_limit`` placing all phases of ``t = [k, 0, 0]`` in the box.

    With ``r = 0`` the phase of path ``n`` is ``2 pi k u_n`` where ``u_n`` is
    its x-axis virtual AoD.  Box membership is half-open with wraparound.
    On success the residuals ``| ||b_tau||_1 e^{j 2pi nu_tau} - h_tau |`` are
    evaluated directly from the channel.
    """
    if k_limit < 1:
        raise ValueError("k_limit must be >= 1")
    anchors, width = phase_box(channel, target)
    u = channel.k_tx[:, 0]
    n = u.size
    volume = float(width**n)
    for start in range(1, k_limit + 1, chunk):
        k = np.arange(start, min(start + chunk, k_limit + 1), dtype=float)
        frac = np.mod(np.outer(k, u) - anchors, 1.0)
        hit = np.flatnonzero(np.all(frac < width, axis=1))
        if hit.size:
            k_found = int(k[hit[0]])
            t = np.array([k_found, 0.0, 0.0])
            r = np.zeros(3)
            residuals = np.array(
                [
                    abs(tap.l1_norm * np.exp(1j * TWO_PI * nu) - cir_tap(tap, t, r))
                    for tap, nu in zip(channel.taps, target.nu)
                ]
            )
            return PhaseSynthesis(k_found, residuals, width, volume, k_found)
    return PhaseSynthesis(None, None, width, volume, k_limit)


def rational_dependence_scan(
    angles,
    denominator_limit: int,
    max_support: int = 2,
    tol: float = 1e-12,
) -> np.ndarray | None:
    """Integer vector ``a`` with ``|a . angles| <= tol`` or ``None``.

    Coefficients lie in ``[-denominator_limit, denominator_limit]`` and at most
    ``max_support`` of them are nonzero.  Smaller supports and smaller
    coefficients are tried first.  A hit falsifies rational independence; a
    miss proves nothing.

    The support cap matters: with 30 real numbers, integer relations of
    dense support with coefficients of a few units already beat any
    floating-point tolerance by pigeonhole.
    """
    x = np.asarray(angles, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("need at least one angle")
    lim = int(denominator_limit)
    if lim < 1:
        return None
    values = np.arange(1, lim + 1)
    for size in range(1, min(max_support, x.size) + 1):
        # leading coefficient positive removes the overall sign symmetry
        lead = values
        rest = np.concatenate([-values[::-1], values])
        grids = np.meshgrid(lead, *([rest] * (size - 1)), indexing="ij")
        coeffs = np.stack([g.ravel() for g in grids], axis=1)
        order = np.lexsort((np.abs(coeffs).sum(axis=1), np.abs(coeffs).max(axis=1)))
        coeffs = coeffs[order]
        for idx in itertools.combinations(range(x.size), size):
            s = coeffs @ x[list(idx)]
            hit = np.flatnonzero(np.abs(s) <= tol)
            if hit.size:
                out = np.zeros(x.size, dtype=int)
                out[list(idx)] = coeffs[hit[0]]
                return out
    return None


def periodic_channel(multiples, base: float, coeffs=None, wavelength: float = 0.125):
    """Single-path-per-tap channel whose x-axis virtual AoDs are ``m_n * base``.

    The CIR is then periodic in ``x_t`` with period ``1 / base`` wavelengths.
    """
    multiples = np.asarray(multiples, dtype=float)
    if coeffs is None:
        coeffs = np.ones(multiples.size)
    taps = []
    for m, b in zip(multiples, coeffs):
        u = m * base
        if abs(u) > 1:
            raise ValueError(f"virtual angle {u} outside [-1, 1]")
        path = PathGeometry(0.0, float(np.arccos(u)), 0.3, 1.1)
        taps.append(TapCluster([path], [b]))
    return WidebandChannel(tuple(taps), wavelength=wavelength)


def equal_gain_dominance(
    M: int,
    G: float,
    lb: LinkBudget,
    trials: int,
    seed: int = 0,
    slack: float = 1e-12,
    eps_p: float = 1e-6,
) -> dict:
    """Compare flat gains ``v_m = G`` against random gains with ``sum v = M G``.

    Random gain vectors are uniform on the scaled simplex.  Requires the
    high-SNR regime ``G P / (M sigma2) >= 1e3``.
    """
    if lb.M != M:
        raise ValueError(f"link budget has M={lb.M}, expected {M}")
    snr = G * lb.P / (M * lb.sigma2)
    if snr < 1e3:
        raise ValueError(f"needs G P / (M sigma2) >= 1e3, got {snr:g}")
    rng = np.random.default_rng(seed)
    v = rng.dirichlet(np.ones(M), size=trials) * (M * G)
    rates = rate_waterfilled_batch(np.sqrt(v), lb, eps_p)
    flat = float(achievable_rate(np.full(M, np.sqrt(G)), np.full(M, lb.P / M), lb))
    excess = rates - flat
    violations = int(np.sum(excess > slack))
    return {
        "M": M,
        "G": G,
        "snr": snr,
        "trials": trials,
        "equal_gain_rate": flat,
        "best_random_rate": float(rates.max()),
        "max_violation": float(max(excess.max(), 0.0)),
        "violations": violations,
        "passed": violations == 0,
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
