"""Parallel greedy ascent over joint Tx/Rx antenna positions.

Each iteration follows the gradient of the objective from every shortlisted
candidate, samples the resulting line segment with step ``zeta`` up to the
region boundary, and collects every discrete local maximum found along the
way.  The best ``k_max`` of those become the next candidates; the incumbent
is the best point ever shortlisted.

Two objectives are supported:

``"rate"``
    water-filled OFDM rate, gradient by the chain rule through the CFR with
    the power allocation held fixed;
``"cir_power"``
    total CIR power, closed-form gradient from pairwise path phase
    differences; water-filling runs only once at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import TWO_PI, Region, WidebandChannel, cfr, cir_batch, path_terms
from .rate import (
    LN2,
    LinkBudget,
    PowerAllocation,
    cir_power,
    rate_waterfilled,
    rate_waterfilled_batch,
    water_fill,
    water_fill_batch,
)

ZERO_GRADIENT = 1e-12
MODES = ("rate", "cir_power")


@dataclass(frozen=True)
class PgaConfig:
    k_max: int = 10
    zeta: float = 0.04
    i_max: int = 100
    eps_p: float = 1e-6
    dedup_tol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.k_max < 1 or self.i_max < 1:
            raise ValueError("k_max and i_max must be >= 1")
        if not (self.zeta > 0 and self.eps_p > 0 and self.dedup_tol >= 0):
            raise ValueError("zeta, eps_p must be positive and dedup_tol nonnegative")


@dataclass(frozen=True)
class CandidatePoint:
    t: np.ndarray
    r: np.ndarray
    objective: float


@dataclass
class PgaTrace:
    """Outcome of one optimizer run.

    ``best_objective[i]`` is the incumbent objective after iteration ``i``
    (index 0 is the initial candidate set) and ``candidate_counts[i]`` the
    number of shortlisted candidates ``K^(i)``.
    """

    mode: str
    best_objective: list[float]
    candidate_counts: list[int]
    t: np.ndarray
    r: np.ndarray
    power: PowerAllocation
    rate: float
    cir_power: float
    termination: str
    evaluations: int
    last_improvement: int = 0
    history: list[list[CandidatePoint]] = field(default_factory=list, repr=False)

    @property
    def iterations(self) -> int:
        return len(self.best_objective) - 1


def _grad_rate_batch(channel, ts, rs, lb, eps_p):
    """Rate gradients at ``Q`` position pairs, each shaped ``(Q, 3)``."""
    terms = path_terms(channel, ts, rs)
    c = cfr(terms @ channel.selector, lb.M)
    g = np.abs(c) ** 2
    p, _ = water_fill_batch(g, lb.P, lb.sigma2, eps_p)
    w = p / (lb.sigma2 + g * p)
    # a_tau = sum_m w_m conj(c_m) exp(-j 2pi m tau / M)
    a = np.fft.fft(w * np.conj(c), axis=-1)[..., : channel.n_taps]
    weight = a[..., channel.tap_index] * terms * (1j * TWO_PI)
    scale = 2.0 / ((lb.M + lb.M_cp) * LN2)
    grad_t = scale * np.real(weight @ channel.k_tx)
    grad_r = -scale * np.real(weight @ channel.k_rx)
    return grad_t, grad_r


def grad_rate(channel: WidebandChannel, t, r, lb: LinkBudget, eps_p: float = 1e-6):
    """Gradient of the water-filled rate w.r.t. ``t`` and ``r``.

    The allocation is held at its optimum for ``(t, r)``; by the envelope
    theorem this is the exact gradient wherever the active set is locally
    constant.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    return _grad_rate_batch(channel, t, r, lb, eps_p)


def _grad_cir_power_batch(channel, ts, rs):
    b = channel.coeffs
    psi = TWO_PI * (ts @ channel.k_tx.T - rs @ channel.k_rx.T) + np.angle(b)
    same_tap = channel.tap_index[:, None] == channel.tap_index[None, :]
    amp = np.abs(b)
    weight = np.where(same_tap, np.outer(amp, amp), 0.0)
    s = weight * np.sin(psi[..., :, None] - psi[..., None, :])
    dk_t = channel.k_tx[:, None, :] - channel.k_tx[None, :, :]
    dk_r = channel.k_rx[:, None, :] - channel.k_rx[None, :, :]
    grad_t = -TWO_PI * np.einsum("...ij,ijk->...k", s, dk_t)
    grad_r = TWO_PI * np.einsum("...ij,ijk->...k", s, dk_r)
    return grad_t, grad_r


def grad_cir_power(channel: WidebandChannel, t, r):
    """Closed-form gradient of ``||h(t, r)||^2``.

    Sums ``-2pi |b_n||b_n'| (k_n - k_n') sin(psi_n - psi_n')`` over ordered
    pairs of paths in the same tap, where ``psi_n`` is the total phase of
    path ``n`` at ``(t, r)``.
    """
    return _grad_cir_power_batch(channel, np.asarray(t, float), np.asarray(r, float))


def eta_max(t, r, dir_t, dir_r, regions: tuple[Region, Region]) -> float:
    """Largest ``eta >= 0`` keeping ``t + eta dir_t`` and ``r + eta dir_r`` feasible.

    Returns ``inf`` when both directions vanish.
    """
    x = np.concatenate([np.asarray(t, float), np.asarray(r, float)])
    d = np.concatenate([np.asarray(dir_t, float), np.asarray(dir_r, float)])
    lo = np.concatenate([regions[0].lo, regions[1].lo])
    hi = np.concatenate([regions[0].hi, regions[1].hi])
    with np.errstate(divide="ignore", invalid="ignore"):
        limit = np.where(d > 0, (hi - x) / d, np.where(d < 0, (lo - x) / d, np.inf))
    return float(max(limit.min(), 0.0))


def line_grid(zeta: float, eta_hi: float) -> np.ndarray:
    """Sample points ``zeta, 2 zeta, ...`` below ``eta_hi``, plus ``eta_hi`` itself."""
    if not np.isfinite(eta_hi) or eta_hi <= 0:
        return np.empty(0)
    n = int(np.floor(eta_hi / zeta * (1 + 1e-12)))
    grid = zeta * np.arange(1, n + 1)
    if n == 0 or eta_hi - grid[-1] > 1e-9 * zeta:
        grid = np.append(grid, eta_hi)
    else:
        grid[-1] = eta_hi
    return grid


def discrete_maxima(start_value: float, values: np.ndarray) -> np.ndarray:
    """Indices ``q`` into ``values`` that are discrete local maxima.

    ``values[q]`` must strictly exceed its predecessor (``start_value`` for
    ``q = 0``) and be no smaller than its successor; the last sample only
    needs the strict rise.
    """
    if values.size == 0:
        return np.empty(0, dtype=int)
    prev = np.concatenate([[start_value], values[:-1]])
    nxt = np.concatenate([values[1:], [-np.inf]])
    return np.flatnonzero((values > prev) & (values >= nxt))


def line_maxima(objective: Callable, t, r, dir_t, dir_r, zeta: float, eta_hi: float):
    """Discrete local maxima of ``objective`` along ``(t, r) + eta (dir_t, dir_r)``.

    ``objective`` is vectorised: it receives ``(Q, 3)`` arrays of Tx and Rx
    positions and returns ``Q`` values.
    """
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    grid = line_grid(zeta, eta_hi)
    if grid.size == 0:
        return []
    ts = t + grid[:, None] * np.asarray(dir_t, float)
    rs = r + grid[:, None] * np.asarray(dir_r, float)
    start = float(np.asarray(objective(t[None, :], r[None, :])).reshape(-1)[0])
    values = np.asarray(objective(ts, rs), dtype=float)
    return [CandidatePoint(ts[q], rs[q], float(values[q])) for q in discrete_maxima(start, values)]


def init_candidates(regions: tuple[Region, Region], k_max: int, seed: int):
    """Reference points first, then ``k_max - 1`` uniform draws over both regions.

    Draws are generated row by row, so a smaller ``k_max`` with the same seed
    yields a prefix of a larger one.
    """
    reg_t, reg_r = regions
    origin_t = np.clip(np.zeros(3), reg_t.lo, reg_t.hi)
    origin_r = np.clip(np.zeros(3), reg_r.lo, reg_r.hi)
    out = [(origin_t, origin_r)]
    rng = np.random.default_rng(seed)
    lo = np.concatenate([reg_t.lo, reg_r.lo])
    hi = np.concatenate([reg_t.hi, reg_r.hi])
    for _ in range(k_max - 1):
        x = lo + (hi - lo) * rng.random(6)
        out.append((x[:3], x[3:]))
    return out


def _dedup(points: list[CandidatePoint], tol: float) -> list[CandidatePoint]:
    # points arrive sorted by objective, best first
    kept: list[CandidatePoint] = []
    kept_x: list[np.ndarray] = []
    for pt in points:
        x = np.concatenate([pt.t, pt.r])
        if tol > 0 and kept_x:
            if np.min(np.linalg.norm(np.array(kept_x) - x, axis=1)) < tol:
                continue
        kept.append(pt)
        kept_x.append(x)
    return kept


def _objective_pair(channel, lb, eps_p, mode):
    if mode == "rate":

        def objective(ts, rs):
            return rate_waterfilled_batch(cfr(cir_batch(channel, ts, rs), lb.M), lb, eps_p)

        def gradient(ts, rs):
            return _grad_rate_batch(channel, ts, rs, lb, eps_p)

    elif mode == "cir_power":

        def objective(ts, rs):
            return cir_power(cir_batch(channel, ts, rs))

        def gradient(ts, rs):
            return _grad_cir_power_batch(channel, ts, rs)

    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return objective, gradient


def pga(
    channel: WidebandChannel,
    regions: tuple[Region, Region],
    lb: LinkBudget,
    cfg: PgaConfig = PgaConfig(),
    mode: str = "rate",
    keep_history: bool = False,
) -> PgaTrace:
    """Run parallel greedy ascent and return the incumbent with its trace.

    Search directions are the joint gradient scaled to unit max-norm, with
    components along zero-width region axes removed, so ``eta`` measures the
    largest per-coordinate displacement and one segment never holds more
    than ``A / zeta + 1`` samples.
    """
    objective, gradient = _objective_pair(channel, lb, cfg.eps_p, mode)
    reg_t, reg_r = regions
    free = ~np.concatenate([reg_t.degenerate_axes, reg_r.degenerate_axes])

    init = init_candidates(regions, cfg.k_max, cfg.seed)
    ts0 = np.array([c[0] for c in init])
    rs0 = np.array([c[1] for c in init])
    vals0 = np.asarray(objective(ts0, rs0), dtype=float)
    evaluations = len(init)

    current = [CandidatePoint(ts0[k], rs0[k], float(vals0[k])) for k in range(len(init))]
    best = current[int(np.argmax(vals0))]
    best_hist = [best.objective]
    counts = [len(current)]
    history = [current] if keep_history else []
    last_improvement = 0
    termination = "iteration_cap"

    for i in range(1, cfg.i_max + 1):
        seg_t, seg_r, seg_owner = [], [], []
        grads_t, grads_r = gradient(
            np.array([c.t for c in current]), np.array([c.r for c in current])
        )
        for k, cand in enumerate(current):
            d = np.where(free, np.concatenate([grads_t[k], grads_r[k]]), 0.0)
            scale = np.max(np.abs(d))
            if not np.linalg.norm(d) > ZERO_GRADIENT:
                continue
            d = d / scale
            grid = line_grid(cfg.zeta, eta_max(cand.t, cand.r, d[:3], d[3:], regions))
            if grid.size == 0:
                continue
            pts_t = np.clip(cand.t + grid[:, None] * d[:3], reg_t.lo, reg_t.hi)
            pts_r = np.clip(cand.r + grid[:, None] * d[3:], reg_r.lo, reg_r.hi)
            seg_t.append(pts_t)
            seg_r.append(pts_r)
            seg_owner.append(k)

        found: list[CandidatePoint] = []
        if seg_t:
            all_t = np.concatenate(seg_t)
            all_r = np.concatenate(seg_r)
            values = np.asarray(objective(all_t, all_r), dtype=float)
            evaluations += values.size
            offset = 0
            for pts_t, pts_r, k in zip(seg_t, seg_r, seg_owner):
                n = len(pts_t)
                v = values[offset : offset + n]
                for q in discrete_maxima(current[k].objective, v):
                    found.append(CandidatePoint(pts_t[q], pts_r[q], float(v[q])))
                offset += n

        if not found:
            termination = "empty_set"
            break

        order = sorted(range(len(found)), key=lambda j: -found[j].objective)
        ranked = _dedup([found[j] for j in order], cfg.dedup_tol)
        current = ranked[: min(len(ranked), cfg.k_max)]
        if current[0].objective > best.objective:
            best = current[0]
            last_improvement = i
        best_hist.append(best.objective)
        counts.append(len(current))
        if keep_history:
            history.append(current)

    h = cir_batch(channel, best.t, best.r)
    c = cfr(h, lb.M)
    power = water_fill(np.abs(c) ** 2, lb, cfg.eps_p)
    return PgaTrace(
        mode=mode,
        best_objective=best_hist,
        candidate_counts=counts,
        t=best.t,
        r=best.r,
        power=power,
        rate=rate_waterfilled(c, lb, cfg.eps_p),
        cir_power=float(cir_power(h)),
        termination=termination,
        evaluations=evaluations,
        last_improvement=last_improvement,
        history=history,
    )
