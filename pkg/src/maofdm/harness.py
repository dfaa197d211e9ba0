"""Monte-Carlo experiment orchestration, statistics and persistence.

Every realization is generated from ``(seed, index)`` alone, so results do
not depend on execution order or the number of worker processes.  Records
are sorted by ``(sweep_value, scheme, realization)`` before they are
returned, which keeps emitted files byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .baselines import AsGrid, as_select, fpa_rate
from .channel import cfr, cir, cir_batch
from .pga import PgaConfig, pga
from .rate import channel_power_bound, cir_power, rate_upper_bound, rate_waterfilled_batch
from .scenario import ScenarioConfig, sample_channel

log = logging.getLogger(__name__)

SCHEMES = ("pga_rate", "pga_cir", "fpa", "as", "upper_bound")
SWEEP_PARAMS = ("region_half_width", "L", "T", "snr_db", "M")
CSV_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "scheme",
    "realization",
    "rate_bps_hz",
    "cir_power_norm",
    "iterations",
    "wall_time_s",
)
FULL_SCALE_REALIZATIONS = 10_000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: ScenarioConfig = ScenarioConfig()
    pga: PgaConfig = PgaConfig()
    as_grid: AsGrid = AsGrid()
    schemes: tuple[str, ...] = SCHEMES
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()
    n_realizations: int = 300
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ConfigError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if self.sweep_param is not None:
            if self.sweep_param not in SWEEP_PARAMS:
                raise ConfigError(
                    f"cannot sweep {self.sweep_param!r}; choose from {SWEEP_PARAMS}"
                )
            if not self.sweep_values:
                raise ConfigError("sweep_values is empty")
            for v in self.sweep_values:
                scenario_at(self.scenario, self.sweep_param, v)

    def points(self) -> list[tuple[float | None, ScenarioConfig]]:
        if self.sweep_param is None:
            return [(None, self.scenario)]
        return [(v, scenario_at(self.scenario, self.sweep_param, v)) for v in self.sweep_values]


@dataclass(frozen=True)
class ResultRecord:
    sweep_param: str | None
    sweep_value: float | None
    scheme: str
    realization_index: int
    rate_bps_hz: float
    cir_power_normalized: float
    iterations_used: int
    wall_time_s: float = field(default=0.0, compare=False)

    def sort_key(self):
        sv = -math.inf if self.sweep_value is None else self.sweep_value
        return (sv, self.scheme, self.realization_index)


def scenario_at(cfg: ScenarioConfig, param: str, value) -> ScenarioConfig:
    """``cfg`` with one swept parameter replaced; invalid values raise ConfigError."""
    try:
        if param == "region_half_width":
            return cfg.with_region_half_width(float(value))
        if param in ("L", "T", "M"):
            if float(value) != int(value):
                raise ConfigError(f"{param} must be an integer, got {value}")
            return replace(cfg, **{param: int(value)})
        if param == "snr_db":
            return replace(cfg, snr_db=float(value))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {param}={value}: {exc}") from exc
    raise ConfigError(f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}")


def pga_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence([master_seed, index, 1])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def evaluate_realization(spec: ExperimentSpec, sweep_value, cfg: ScenarioConfig, index: int):
    """All requested schemes on realization ``index`` of scenario ``cfg``."""
    channel = sample_channel(cfg, index)
    lb = cfg.link_budget
    regions = cfg.regions
    g0 = cfg.g0
    pga_cfg = replace(spec.pga, seed=pga_seed(cfg.seed, index))
    eps_p = spec.pga.eps_p
    origin = np.zeros(3)
    out = []
    for scheme in spec.schemes:
        start = time.perf_counter()
        iterations = 0
        if scheme == "pga_rate" or scheme == "pga_cir":
            mode = "rate" if scheme == "pga_rate" else "cir_power"
            trace = pga(channel, regions, lb, pga_cfg, mode)
            rate, power, iterations = trace.rate, trace.cir_power, trace.iterations
        elif scheme == "fpa":
            rate = fpa_rate(channel, lb, eps_p)
            power = float(cir_power(cir(channel, origin, origin)))
        elif scheme == "as":
            rate, t, r = as_select(channel, spec.as_grid, lb, eps_p)
            power = float(cir_power(cir(channel, t, r)))
        else:
            power = channel_power_bound(channel)
            rate = rate_upper_bound(power, lb)
        out.append(
            ResultRecord(
                sweep_param=spec.sweep_param,
                sweep_value=sweep_value,
                scheme=scheme,
                realization_index=index,
                rate_bps_hz=float(rate),
                cir_power_normalized=float(power / g0),
                iterations_used=int(iterations),
                wall_time_s=time.perf_counter() - start,
            )
        )
    return out


def _run_chunk(args):
    spec, sweep_value, cfg, indices = args
    out = []
    for i in indices:
        out.extend(evaluate_realization(spec, sweep_value, cfg, i))
    return out


def run_experiment(spec: ExperimentSpec, workers: int = 1, progress: bool = False):
    """Evaluate every (sweep value, realization, scheme) triple.

    With ``workers > 1`` realizations are spread over a process pool.  If the
    run is interrupted and ``spec.output_path`` is set, the records finished
    so far are written there before the exception propagates.
    """
    tasks = []
    chunk = max(1, min(25, spec.n_realizations // max(1, 4 * workers)))
    for sweep_value, cfg in spec.points():
        for lo in range(0, spec.n_realizations, chunk):
            idx = list(range(lo, min(lo + chunk, spec.n_realizations)))
            tasks.append((spec, sweep_value, cfg, idx))

    records: list[ResultRecord] = []
    try:
        if workers <= 1:
            for n, task in enumerate(tasks, 1):
                records.extend(_run_chunk(task))
                if progress:
                    log.info("chunk %d/%d done", n, len(tasks))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for n, part in enumerate(pool.map(_run_chunk, tasks), 1):
                    records.extend(part)
                    if progress:
                        log.info("chunk %d/%d done", n, len(tasks))
    except BaseException:
        if spec.output_path and records:
            records.sort(key=ResultRecord.sort_key)
            emit(records, spec.output_path, _format_for(spec.output_path))
            log.error("run aborted; %d partial records written to %s", len(records), spec.output_path)
        raise
    records.sort(key=ResultRecord.sort_key)
    return records


def empirical_cdf(rates, thresholds) -> np.ndarray:
    """Fraction of ``rates`` at or below each threshold."""
    x = np.sort(np.asarray(rates, dtype=float).reshape(-1))
    if x.size == 0:
        raise ValueError("empirical_cdf needs at least one rate")
    th = np.asarray(thresholds, dtype=float)
    return np.searchsorted(x, th, side="right") / x.size


def mean_rates(records, scheme: str) -> dict:
    """Mean rate of ``scheme`` per sweep value."""
    acc: dict = {}
    for rec in records:
        if rec.scheme == scheme:
            acc.setdefault(rec.sweep_value, []).append(rec.rate_bps_hz)
    return {k: float(np.mean(v)) for k, v in acc.items()}


def rates_of(records, scheme: str, sweep_value=None) -> np.ndarray:
    return np.array(
        [r.rate_bps_hz for r in records if r.scheme == scheme and r.sweep_value == sweep_value]
    )


# ---------------------------------------------------------------- persistence


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _row(rec: ResultRecord) -> list:
    return [
        rec.sweep_param,
        rec.sweep_value,
        rec.scheme,
        rec.realization_index,
        rec.rate_bps_hz,
        rec.cir_power_normalized,
        rec.iterations_used,
        rec.wall_time_s,
    ]


def _format_for(path) -> str:
    return "json" if str(path).endswith(".json") else "csv"


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_fmt(x) for x in _row(rec)])
    return buf.getvalue()


def records_to_json(records) -> str:
    rows = [dict(zip(CSV_COLUMNS, _row(rec))) for rec in records]
    return json.dumps(rows, indent=1) + "\n"


def emit(records, path, format: str = "csv") -> Path:
    """Write records as CSV (fixed column order, LF endings) or a JSON array."""
    if format == "csv":
        text = records_to_csv(records)
    elif format == "json":
        text = records_to_json(records)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _parse_record(row: dict) -> ResultRecord:
    def opt_float(v):
        return None if v in ("", None) else float(v)

    return ResultRecord(
        sweep_param=row["sweep_param"] or None,
        sweep_value=opt_float(row["sweep_value"]),
        scheme=row["scheme"],
        realization_index=int(row["realization"]),
        rate_bps_hz=float(row["rate_bps_hz"]),
        cir_power_normalized=float(row["cir_power_norm"]),
        iterations_used=int(row["iterations"]),
        wall_time_s=float(row["wall_time_s"]),
    )


def load_records(path) -> list[ResultRecord]:
    """Inverse of :func:`emit` for either format."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if _format_for(path) == "json":
        rows = json.loads(text)
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
        if rows and list(rows[0].keys()) != list(CSV_COLUMNS):
            raise ValueError(f"unexpected CSV columns {list(rows[0].keys())}")
    return [_parse_record(r) for r in rows]


# ------------------------------------------------------------------ config

_SCENARIO_KEYS = {f.name for f in fields(ScenarioConfig)}
_PGA_KEYS = {f.name for f in fields(PgaConfig)} - {"seed"}
_AS_KEYS = {"as_" + f.name: f.name for f in fields(AsGrid)}
_SPEC_KEYS = {"schemes", "sweep_param", "sweep_values", "n_realizations", "output_path"}
_RUN_KEYS = {"workers", "format", "region_half_width"}
CONFIG_KEYS = _SCENARIO_KEYS | _PGA_KEYS | set(_AS_KEYS) | _SPEC_KEYS | _RUN_KEYS


def _coerce(template, value):
    if isinstance(template, bool):
        return bool(value)
    if isinstance(template, int) and not isinstance(value, bool):
        if float(value) != int(value):
            raise ConfigError(f"expected an integer, got {value!r}")
        return int(value)
    if isinstance(template, float):
        return float(value)
    return value


def spec_from_mapping(conf: dict) -> tuple[ExperimentSpec, dict]:
    """Build an :class:`ExperimentSpec` from flat keys.

    Returns the spec and the run options (``workers``, ``format``).  Unknown
    keys raise :class:`ConfigError`.
    """
    unknown = set(conf) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base_s, base_p, base_a = ScenarioConfig(), PgaConfig(), AsGrid()
    try:
        s_kw = {k: _coerce(getattr(base_s, k), conf[k]) for k in _SCENARIO_KEYS if k in conf}
        if "region_half_width" in conf:
            hw = float(conf["region_half_width"])
            s_kw.setdefault("tx_half_width", hw)
            s_kw.setdefault("rx_half_width", hw)
        p_kw = {k: _coerce(getattr(base_p, k), conf[k]) for k in _PGA_KEYS if k in conf}
        a_kw = {
            name: _coerce(getattr(base_a, name), conf[key])
            for key, name in _AS_KEYS.items()
            if key in conf
        }
        schemes = conf.get("schemes", SCHEMES)
        if isinstance(schemes, str):
            schemes = [s.strip() for s in schemes.split(",") if s.strip()]
        sweep_values = conf.get("sweep_values", ())
        if isinstance(sweep_values, str):
            sweep_values = [float(v) for v in sweep_values.split(",") if v.strip()]
        spec = ExperimentSpec(
            scenario=ScenarioConfig(**s_kw),
            pga=PgaConfig(**p_kw),
            as_grid=AsGrid(**a_kw),
            schemes=tuple(schemes),
            sweep_param=conf.get("sweep_param") or None,
            sweep_values=tuple(float(v) for v in sweep_values),
            n_realizations=int(conf.get("n_realizations", 300)),
            output_path=conf.get("output_path"),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    options = {"workers": int(conf.get("workers", 1)), "format": conf.get("format")}
    return spec, options


def load_config(path) -> dict:
    """Read a flat TOML file; nested tables are rejected."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        conf = tomllib.load(fh)
    nested = [k for k, v in conf.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config must be flat; found tables {nested}")
    return conf


def rate_map(cfg: ScenarioConfig, realization_index: int, resolution: int = 81, eps_p: float = 1e-6):
    """Rate and normalised CIR power over the ``z = 0`` slice of the Rx region.

    The Tx antenna stays at its reference point.  Returns a list of
    ``(x, y, rate, cir_power_norm)`` rows.
    """
    channel = sample_channel(cfg, realization_index)
    lb = cfg.link_budget
    _, reg_r = cfg.regions
    xs = np.linspace(reg_r.lo[0], reg_r.hi[0], resolution)
    ys = np.linspace(reg_r.lo[1], reg_r.hi[1], resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    rs = np.stack([X.ravel(), Y.ravel(), np.zeros(X.size)], axis=1)
    ts = np.zeros_like(rs)
    h = cir_batch(channel, ts, rs)
    rates = rate_waterfilled_batch(cfr(h, lb.M), lb, eps_p)
    powers = cir_power(h) / cfg.g0
    return [
        (float(x), float(y), float(rt), float(pw))
        for x, y, rt, pw in zip(rs[:, 0], rs[:, 1], rates, powers)
    ]
