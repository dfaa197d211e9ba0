"""Fixed-position (FPA) and antenna-selection (AS) reference schemes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import WidebandChannel, cfr, cir_batch
from .rate import LinkBudget, rate_waterfilled_batch

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class AsGrid:
    """Linear arrays of fixed antennas centred on each region's reference point."""

    n_tx: int = 3
    n_rx: int = 3
    spacing: float = 0.5
    axis: str = "x"

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("antenna counts must be >= 1")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of x, y, z; got {self.axis!r}")

    def positions(self, n: int) -> np.ndarray:
        pos = np.zeros((n, 3))
        pos[:, _AXES[self.axis]] = (np.arange(n) - (n - 1) / 2) * self.spacing
        return pos


def fpa_rate(channel: WidebandChannel, lb: LinkBudget, eps_p: float = 1e-6) -> float:
    """Water-filled rate with both antennas at their reference points."""
    c = cfr(cir_batch(channel, np.zeros((1, 3)), np.zeros((1, 3))), lb.M)
    return float(rate_waterfilled_batch(c, lb, eps_p)[0])


def as_select(channel: WidebandChannel, grid: AsGrid, lb: LinkBudget, eps_p: float = 1e-6):
    """Exhaustive search over all Tx/Rx antenna pairs.

    Returns ``(rate, t, r)`` of the best pair; ties go to the first pair in
    Tx-major order.
    """
    tx = grid.positions(grid.n_tx)
    rx = grid.positions(grid.n_rx)
    ts = np.repeat(tx, grid.n_rx, axis=0)
    rs = np.tile(rx, (grid.n_tx, 1))
    rates = rate_waterfilled_batch(cfr(cir_batch(channel, ts, rs), lb.M), lb, eps_p)
    k = int(np.argmax(rates))
    return float(rates[k]), ts[k], rs[k]


def as_rate(channel: WidebandChannel, grid: AsGrid, lb: LinkBudget, eps_p: float = 1e-6) -> float:
    return as_select(channel, grid, lb, eps_p)[0]
