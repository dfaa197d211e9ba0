"""Statistical channel model used in the Monte-Carlo experiments.

Each realization draws ``T*L`` paths with independent AoDs/AoAs whose
elevation has density proportional to ``cos(theta)``, and i.i.d. complex
Gaussian coefficients scaled by an exponential power delay profile.
Noise power is normalised to one and the large-scale gain ``g0`` is solved
from the target receive SNR ``g0 P / (M sigma2)``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .channel import PathGeometry, Region, TapCluster, WidebandChannel
from .rate import LinkBudget

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and statistical parameters of one experiment point."""

    M: int = 64
    M_cp: int = 6
    T: int = 6
    L: int = 5
    alpha: float = 2.0
    snr_db: float = 25.0
    P: float = 1.0
    tx_half_width: float = 2.0
    rx_half_width: float = 2.0
    carrier_freq: float = 2.4e9
    bandwidth: float = 40e6
    noise_psd_dbm_hz: float = -174.0
    seed: int = 0

    def __post_init__(self):
        if self.T < 1 or self.L < 1:
            raise ValueError("need T >= 1 taps and L >= 1 paths per tap")
        if self.M < self.T:
            raise ValueError(f"M={self.M} must be at least T={self.T}")
        if self.M_cp < self.T:
            raise ValueError(f"cyclic prefix M_cp={self.M_cp} shorter than T={self.T}")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.tx_half_width < 0 or self.rx_half_width < 0:
            raise ValueError("region half widths must be nonnegative")

    @property
    def sigma2(self) -> float:
        return 1.0

    @property
    def g0(self) -> float:
        """Large-scale channel gain realising ``snr_db``."""
        return self.M * self.sigma2 * 10 ** (self.snr_db / 10) / self.P

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def link_budget(self) -> LinkBudget:
        return LinkBudget(M=self.M, M_cp=self.M_cp, P=self.P, sigma2=self.sigma2)

    @property
    def regions(self) -> tuple[Region, Region]:
        return Region.cube(self.tx_half_width), Region.cube(self.rx_half_width)

    def with_region_half_width(self, half_width: float) -> "ScenarioConfig":
        return replace(self, tx_half_width=half_width, rx_half_width=half_width)


@dataclass(frozen=True)
class Pdp:
    q: np.ndarray = field(repr=True)


def pdp(T: int, alpha: float) -> Pdp:
    """Normalised exponential profile ``q_tau = exp(-alpha (tau-1)) / xi``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    w = np.exp(-alpha * np.arange(T))
    return Pdp(q=w / w.sum())


def elevation_from_uniform(u):
    """Map ``u ~ U[0,1]`` to an elevation with density ``cos(theta)/2``."""
    return np.arcsin(2.0 * np.asarray(u) - 1.0)


def sample_angles(rng: np.random.Generator, size=None):
    """Draw ``(elevation, azimuth)`` with joint density ``cos(theta) / (2 pi)``.

    Azimuth is uniform on ``(-pi, pi]`` and ``sin(elevation)`` uniform on
    ``[-1, 1]``.
    """
    elev = elevation_from_uniform(rng.random(size))
    azim = np.pi - 2.0 * np.pi * rng.random(size)
    return elev, azim


def realization_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, index)``; order of use is irrelevant."""
    return np.random.default_rng(np.random.SeedSequence([seed, index, stream]))


def sample_channel(cfg: ScenarioConfig, realization_index: int) -> WidebandChannel:
    rng = realization_rng(cfg.seed, realization_index)
    T, L = cfg.T, cfg.L
    el_t, az_t = sample_angles(rng, (T, L))
    el_r, az_r = sample_angles(rng, (T, L))
    var = cfg.g0 * pdp(T, cfg.alpha).q / L
    scale = np.sqrt(var / 2.0)[:, None]
    b = scale * (rng.standard_normal((T, L)) + 1j * rng.standard_normal((T, L)))
    taps = []
    for tau in range(T):
        paths = [
            PathGeometry(el_t[tau, l], az_t[tau, l], el_r[tau, l], az_r[tau, l])
            for l in range(L)
        ]
        taps.append(TapCluster(paths, b[tau]))
    return WidebandChannel(tuple(taps), wavelength=cfg.wavelength)


def channel_to_dict(channel: WidebandChannel) -> dict:
    """JSON-ready form: ``{"wavelength", "taps": [{"paths": [...]}, ...]}``.

    Every path carries ``elev_aod, azim_aod, elev_aoa, azim_aoa, re, im``.
    """
    return {
        "wavelength": channel.wavelength,
        "taps": [
            {
                "paths": [
                    {
                        "elev_aod": float(p.elev_aod),
                        "azim_aod": float(p.azim_aod),
                        "elev_aoa": float(p.elev_aoa),
                        "azim_aoa": float(p.azim_aoa),
                        "re": float(b.real),
                        "im": float(b.imag),
                    }
                    for p, b in zip(tap.paths, tap.coeffs)
                ]
            }
            for tap in channel.taps
        ],
    }


def channel_from_dict(data: dict) -> WidebandChannel:
    taps = []
    for tap in data["taps"]:
        paths = [
            PathGeometry(p["elev_aod"], p["azim_aod"], p["elev_aoa"], p["azim_aoa"])
            for p in tap["paths"]
        ]
        coeffs = [complex(p["re"], p["im"]) for p in tap["paths"]]
        taps.append(TapCluster(paths, coeffs))
    return WidebandChannel(tuple(taps), wavelength=float(data["wavelength"]))


def channel_to_json(channel: WidebandChannel, **kwargs) -> str:
    return json.dumps(channel_to_dict(channel), **kwargs)


def channel_from_json(text: str) -> WidebandChannel:
    return channel_from_dict(json.loads(text))


def config_fields() -> list[str]:
    return [f.name for f in fields(ScenarioConfig)]


def config_dict(cfg: ScenarioConfig) -> dict:
    return asdict(cfg)
