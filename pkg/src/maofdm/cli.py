"""Command line entry point: ``maofdm {run,sweep,cdf,map,check}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from . import harness
from .harness import ConfigError, FULL_SCALE_REALIZATIONS
from .rate import LinkBudget
from .scenario import ScenarioConfig, sample_channel
from .theory import (
    PhaseTarget,
    equal_gain_dominance,
    rational_dependence_scan,
    synthesize_phases,
)


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return {"true": True, "false": False}.get(text.lower(), text)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="master PRNG seed")
    p.add_argument("--realizations", type=int, help="number of channel realizations")
    p.add_argument("--full-scale", action="store_true",
                   help=f"use {FULL_SCALE_REALIZATIONS} realizations per point")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")


def _load(args) -> dict:
    conf = harness.load_config(args.config) if getattr(args, "config", None) else {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        conf[key.strip()] = _parse_value(value.strip())
    if args.seed is not None:
        conf["seed"] = args.seed
    if args.realizations is not None:
        conf["n_realizations"] = args.realizations
    if args.full_scale:
        conf["n_realizations"] = FULL_SCALE_REALIZATIONS
    if args.workers is not None:
        conf["workers"] = args.workers
    if args.out is not None:
        conf["output_path"] = args.out
    if args.format is not None:
        conf["format"] = args.format
    return conf


def _write(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args, require_sweep=False) -> int:
    conf = _load(args)
    spec, opts = harness.spec_from_mapping(conf)
    if require_sweep and spec.sweep_param is None:
        raise ConfigError("sweep needs sweep_param and sweep_values")
    if not require_sweep and spec.sweep_param is not None:
        raise ConfigError("config defines a sweep; use the 'sweep' subcommand")
    fmt = opts["format"] or (harness._format_for(spec.output_path) if spec.output_path else "csv")
    records = harness.run_experiment(spec, workers=opts["workers"], progress=True)
    if fmt == "csv":
        text = harness.records_to_csv(records)
    else:
        text = harness.records_to_json(records)
    _write(text, spec.output_path)
    return 0


def cmd_cdf(args) -> int:
    records = harness.load_records(args.csv)
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.sweep_value, rec.scheme), []).append(rec.rate_bps_hz)
    rows = []
    for (sv, scheme), rates in sorted(groups.items(), key=lambda kv: (kv[0][0] is not None, kv[0][0] or 0, kv[0][1])):
        for th, value in zip(args.threshold, harness.empirical_cdf(rates, args.threshold)):
            rows.append({"sweep_value": sv, "scheme": scheme, "threshold": th,
                         "cdf": float(value), "n": len(rates)})
    if args.format == "json":
        _write(json.dumps(rows, indent=1) + "\n", args.out)
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["sweep_value", "scheme", "threshold", "cdf", "n"],
                           lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: "" if v is None else v for k, v in row.items()})
        _write(buf.getvalue(), args.out)
    return 0


def cmd_map(args) -> int:
    conf = _load(args)
    spec, opts = harness.spec_from_mapping(conf)
    rows = harness.rate_map(spec.scenario, args.realization, args.resolution, spec.pga.eps_p)
    fmt = opts["format"] or "csv"
    if fmt == "json":
        text = json.dumps([dict(zip(("x", "y", "rate_bps_hz", "cir_power_norm"), r)) for r in rows]) + "\n"
    else:
        lines = ["x,y,rate_bps_hz,cir_power_norm"]
        lines += [",".join(repr(v) for v in r) for r in rows]
        text = "\n".join(lines) + "\n"
    _write(text, spec.output_path)
    return 0


def run_checks(seed: int = 0, trials: int = 10_000) -> dict:
    """Theory checks on small instances; returns a JSON-ready report."""
    report: dict = {}
    rng = np.random.default_rng(seed)

    synth = []
    cfg = ScenarioConfig(T=2, L=1, M_cp=6, seed=seed)
    for i in range(10):
        ch = sample_channel(cfg, i)
        total = sum(tap.l1_norm for tap in ch.taps)
        # box width 1e-2 per path, volume 1e-4 over two paths
        delta = 2 * np.pi * total * 1e-2
        res = synthesize_phases(ch, PhaseTarget(rng.random(2), delta), 1_000_000)
        entry = res.to_dict()
        entry["delta"] = delta
        entry["within_delta"] = bool(res.found and np.all(res.residuals <= delta))
        synth.append(entry)
    report["phase_synthesis"] = synth

    angles = sample_channel(ScenarioConfig(seed=seed), 0).k_tx[:, 0]
    dep = rational_dependence_scan(angles, 20)
    report["rational_dependence"] = {
        "n_angles": int(angles.size),
        "limit": 20,
        "relation": None if dep is None else dep.tolist(),
    }

    dominance = []
    for M in (2, 4, 8):
        lb = LinkBudget(M=M, M_cp=0, P=1.0, sigma2=1.0)
        G = 1e3 * M
        dominance.append(equal_gain_dominance(M, G, lb, trials, seed=seed))
    report["equal_gain_dominance"] = dominance
    report["passed"] = all(e["within_delta"] for e in synth) and all(d["passed"] for d in dominance)
    return report


def cmd_check(args) -> int:
    report = run_checks(seed=args.seed or 0)
    _write(json.dumps(report, indent=2) + "\n", args.out)
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maofdm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment point")
    p.add_argument("config", nargs="?")
    _common(p)
    p.set_defaults(func=lambda a: cmd_run(a, require_sweep=False))

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("config", nargs="?")
    _common(p)
    p.set_defaults(func=lambda a: cmd_run(a, require_sweep=True))

    p = sub.add_parser("cdf", help="empirical CDF of rates in a results file")
    p.add_argument("csv")
    p.add_argument("--threshold", type=float, action="append", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("map", help="rate / CIR power over the Rx plane z=0")
    p.add_argument("config", nargs="?")
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--resolution", type=int, default=81)
    _common(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("check", help="run the theory checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.exit(2, f"maofdm: config error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
