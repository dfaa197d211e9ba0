"""OFDM achievable rate, water-filling power allocation and rate bounds.

Rates are in bps/Hz.  All batch functions operate on the last axis, so a
``(Q, M)`` array of channel gains yields ``Q`` allocations in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import WidebandChannel

LN2 = np.log(2.0)


@dataclass(frozen=True)
class LinkBudget:
    """OFDM numerology and power budget.

    Parameters
    ----------
    M : int
        Number of subcarriers.
    M_cp : int
        Cyclic prefix length in samples.
    P : float
        Total transmit power (W).
    sigma2 : float
        Noise power per subcarrier (W).
    """

    M: int = 64
    M_cp: int = 6
    P: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.M < 1 or self.M_cp < 0:
            raise ValueError(f"invalid OFDM numerology M={self.M}, M_cp={self.M_cp}")
        if not (self.P > 0 and self.sigma2 > 0):
            raise ValueError("P and sigma2 must be positive")

    @property
    def prefix_loss(self) -> float:
        return self.M / (self.M + self.M_cp)


@dataclass(frozen=True)
class PowerAllocation:
    p: np.ndarray
    water_level: float

    @property
    def total(self) -> float:
        return float(np.sum(self.p))


class ZeroChannelError(ValueError):
    pass


def achievable_rate(c, p, lb: LinkBudget) -> float | np.ndarray:
    """Rate ``1/(M+M_cp) * sum_m log2(1 + |c_m|^2 p_m / sigma2)``."""
    c = np.asarray(c)
    p = np.asarray(p, dtype=float)
    if c.shape[-1] != lb.M or p.shape[-1] != lb.M:
        raise ValueError(
            f"expected {lb.M} subcarriers, got c:{c.shape[-1]} p:{p.shape[-1]}"
        )
    snr = np.abs(c) ** 2 * p / lb.sigma2
    return np.sum(np.log1p(snr), axis=-1) / (LN2 * (lb.M + lb.M_cp))


def water_fill_batch(
    gains, P: float, sigma2: float, eps_p: float = 1e-6, max_iter: int = 200
) -> tuple[np.ndarray, np.ndarray]:
    """Water-filling over the last axis of ``gains``.

    The water level is bracketed by ``[min_m sigma2/g_m, min_m sigma2/g_m + P]``
    and bisected until every row meets ``|sum p - P| <= eps_p``.  The active
    set found by bisection is then used to solve the water level exactly.

    Returns
    -------
    p : ndarray, same shape as ``gains``
    mu : ndarray, shape ``gains.shape[:-1]``
    """
    g = np.asarray(gains, dtype=float)
    positive = g > 0
    if np.any(~positive.any(axis=-1)):
        raise ZeroChannelError("channel identically zero")
    with np.errstate(divide="ignore", over="ignore"):
        floor = np.where(positive, sigma2 / np.where(positive, g, 1.0), np.inf)

    lo = floor.min(axis=-1)
    hi = lo + P
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        total = np.maximum(mid[..., None] - floor, 0.0).sum(axis=-1)
        over = total > P
        hi = np.where(over, mid, hi)
        lo = np.where(over, lo, mid)
        if np.all(np.abs(total - P) <= eps_p):
            break
    mu = mid

    # exact level for the identified active set; kept only if self-consistent
    active = floor < mu[..., None]
    n_active = active.sum(axis=-1)
    exact = (P + np.where(active, floor, 0.0).sum(axis=-1)) / np.maximum(n_active, 1)
    consistent = (n_active > 0) & np.all(
        np.where(active, floor < exact[..., None], floor >= exact[..., None]), axis=-1
    )
    mu = np.where(consistent, exact, mu)
    p = np.maximum(mu[..., None] - floor, 0.0)
    return p, mu


def water_fill(gains, lb: LinkBudget, eps_p: float = 1e-6) -> PowerAllocation:
    """Optimal power ``p_m = max(mu - sigma2/g_m, 0)`` for one gain vector."""
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1 or g.size != lb.M:
        raise ValueError(f"expected {lb.M} gains, got shape {g.shape}")
    if np.any(g < 0):
        raise ValueError("gains must be nonnegative")
    p, mu = water_fill_batch(g, lb.P, lb.sigma2, eps_p)
    return PowerAllocation(p=p, water_level=float(mu))


def rate_waterfilled_batch(c, lb: LinkBudget, eps_p: float = 1e-6) -> np.ndarray:
    g = np.abs(np.asarray(c)) ** 2
    p, _ = water_fill_batch(g, lb.P, lb.sigma2, eps_p)
    return np.sum(np.log1p(g * p / lb.sigma2), axis=-1) / (LN2 * (lb.M + lb.M_cp))


def rate_waterfilled(c, lb: LinkBudget, eps_p: float = 1e-6) -> float:
    """Achievable rate under the water-filling allocation for CFR ``c``."""
    c = np.asarray(c)
    if c.shape != (lb.M,):
        raise ValueError(f"expected CFR of length {lb.M}, got shape {c.shape}")
    return float(rate_waterfilled_batch(c, lb, eps_p))


def cir_power(h) -> float | np.ndarray:
    """Total CIR power ``sum_tau |h_tau|^2`` (last axis)."""
    h = np.asarray(h)
    return np.sum(h.real**2 + h.imag**2, axis=-1)


def rate_upper_bound(G: float, lb: LinkBudget) -> float:
    """High-SNR rate bound ``M/(M+M_cp) log2(1 + G P / (M sigma2))``."""
    if G < 0:
        raise ValueError("G must be nonnegative")
    return float(lb.prefix_loss * np.log1p(G * lb.P / (lb.M * lb.sigma2)) / LN2)


def channel_power_bound(channel: WidebandChannel) -> float:
    """``G = sum_tau ||b_tau||_1^2``, the largest CIR power any position reaches."""
    return float(sum(tap.l1_norm**2 for tap in channel.taps))
