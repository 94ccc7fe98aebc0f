"""Command-line experiment front end: scenario configuration, sweep
orchestration, CSV persistence."""

from __future__ import annotations

import argparse
import ast
import csv
import sys
from dataclasses import dataclass, fields

import numpy as np

from .engine import SCHEMES, SimConfig, run_simulation

RUN_COLUMNS = [
    "scheme",
    "n_clients",
    "arrival_fps",
    "delta_db",
    "sic_db",
    "seed",
    "tput_total_mbps",
    "tput_down_mbps",
    "tput_up_mbps",
    "collision_prob",
    "fd_time_frac",
    "hd_time_frac",
    "mean_contention_us",
]
CLIENT_COLUMNS = [
    "scheme",
    "n_clients",
    "arrival_fps",
    "delta_db",
    "sic_db",
    "seed",
    "client",
    "uplink_tx_count",
    "uplink_share",
]
PAIR_COLUMNS = [
    "scheme",
    "n_clients",
    "arrival_fps",
    "delta_db",
    "sic_db",
    "seed",
    "down",
    "up",
    "p_assigned",
    "freq_realized",
]

SWEEP_AXES = ("clients", "arrival_fps", "delta", "sic", "scheme")


@dataclass
class Scenario:
    axis: str | None
    values: list
    seeds: list
    base: dict  # SimConfig field overrides
    arrival_spec: str


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.8g}"
    return str(x)


def parse_arrival_spec(spec: str):
    """'backlogged' | scalar | 'lo:hi' heterogeneous per-client range."""
    if spec == "backlogged":
        return ("scalar", 2000.0)
    if ":" in spec:
        lo, hi = spec.split(":", 1)
        lo, hi = float(lo), float(hi)
        if hi < lo:
            raise ValueError("arrival range must be lo:hi with hi >= lo")
        return ("range", (lo, hi))
    return ("scalar", float(spec))


def resolve_arrivals(arrival_spec: str, n_clients: int, seed: int):
    """Per-point arrival rates and the CSV token describing them."""
    kind, val = parse_arrival_spec(arrival_spec)
    if kind == "scalar":
        return val, val, _fmt(val)
    lo, hi = val
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xA221)))
    lam = rng.uniform(lo, hi, n_clients)
    token = f"{_fmt(lo)}-{_fmt(hi)}"
    return tuple(lam), tuple(lam), token


def read_config_file(path: str) -> dict:
    """key = value lines; values parsed as Python literals when possible."""
    valid = {f.name for f in fields(SimConfig)}
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in valid and key != "arrival_fps":
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                out[key] = ast.literal_eval(value)
            except (ValueError, SyntaxError):
                out[key] = value
    return out


def print_config(base: dict, arrival_spec: str, seeds: list):
    cfg = SimConfig(**base)
    for f in fields(SimConfig):
        print(f"{f.name} = {getattr(cfg, f.name)!r}")
    print(f"arrival_fps = {arrival_spec!r}")
    print(f"seeds = {seeds!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fdmac",
        description="Simulate a three-node full-duplex WLAN MAC and write CSV results.",
    )
    p.add_argument("--scheme", default=None, choices=SCHEMES)
    p.add_argument("--clients", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--epoch-ms", type=float, default=None)
    p.add_argument(
        "--arrival-fps",
        default=None,
        help="frames/s per client per direction: scalar, lo:hi range, or 'backlogged'",
    )
    p.add_argument("--delta-db", type=float, default=None)
    p.add_argument("--sic-db", type=float, default=None)
    p.add_argument("--seed", type=int, default=None, help="single seed")
    p.add_argument("--seeds", default="1,2,3,4,5", help="comma-separated seed list")
    p.add_argument("--out", default=None, help="runs CSV path")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument(
        "--sweep",
        default=None,
        metavar="AXIS=V1,V2,...",
        help=f"sweep one axis, AXIS in {SWEEP_AXES}",
    )
    p.add_argument("--per-client-out", default=None, help="per-client uplink share CSV")
    p.add_argument("--per-pair-out", default=None, help="assigned vs realized pair CSV")
    p.add_argument("--print-config", action="store_true")
    p.add_argument("--dump-access", default=None, help="per-epoch access table dump path")
    p.add_argument("--quiet", action="store_true")
    return p


def parse_sweep(spec: str):
    if "=" not in spec:
        raise ValueError("--sweep expects AXIS=V1,V2,...")
    axis, vals = spec.split("=", 1)
    axis = axis.strip()
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}")
    raw = [v.strip() for v in vals.split(",") if v.strip()]
    if not raw:
        raise ValueError("--sweep needs at least one value")
    if axis == "scheme":
        for v in raw:
            if v not in SCHEMES:
                raise ValueError(f"unknown scheme {v!r} in sweep")
        return axis, raw
    if axis == "clients":
        return axis, [int(v) for v in raw]
    if axis == "arrival_fps":
        return axis, raw  # tokens, may include 'backlogged'
    return axis, [float(v) for v in raw]


def scenario_points(scenario: Scenario):
    """Yield (scheme, axis_value, seed, overrides, arrival_spec) per run."""
    values = scenario.values if scenario.axis else [None]
    for value in values:
        for seed in scenario.seeds:
            over = dict(scenario.base)
            arrival = scenario.arrival_spec
            scheme = over.get("scheme", "proposed")
            if scenario.axis == "clients":
                over["n_clients"] = value
            elif scenario.axis == "arrival_fps":
                arrival = str(value)
            elif scenario.axis == "delta":
                over["delta_db"] = value
            elif scenario.axis == "sic":
                over["sic_db"] = value
            elif scenario.axis == "scheme":
                scheme = value
            yield scheme, value, seed, over, arrival


def run_scenario(scenario: Scenario, quiet: bool = True):
    """Run every scenario point; returns (run_rows, client_rows, pair_rows)."""
    run_rows, client_rows, pair_rows = [], [], []
    for scheme, _value, seed, over, arrival in scenario_points(scenario):
        over = dict(over)
        over["scheme"] = scheme
        over["seed"] = seed
        n_clients = over.get("n_clients", SimConfig.n_clients)
        lam_d, lam_u, token = resolve_arrivals(arrival, n_clients, seed)
        over["lambda_d_fps"] = lam_d
        over["lambda_u_fps"] = lam_u
        cfg = SimConfig(**over)
        report = run_simulation(cfg)
        ctx = [scheme, cfg.n_clients, token, _fmt(cfg.delta_db), _fmt(cfg.sic_db), seed]
        run_rows.append(
            ctx
            + [
                _fmt(report.tput_total_mbps),
                _fmt(report.tput_down_mbps),
                _fmt(report.tput_up_mbps),
                _fmt(report.collision_prob),
                _fmt(report.fd_time_frac),
                _fmt(report.hd_time_frac),
                _fmt(report.mean_contention_us),
            ]
        )
        shares = report.uplink_shares()
        for c in range(1, cfg.n_clients + 1):
            client_rows.append(
                ctx + [c, int(report.uplink_tx_counts[c]), _fmt(float(shares[c - 1]))]
            )
        assigned = report.assigned_mean()
        realized = report.realized_freq()
        for key in sorted(set(assigned) | set(realized)):
            pair_rows.append(
                ctx
                + [
                    key.down,
                    key.up,
                    _fmt(assigned.get(key, 0.0)),
                    _fmt(realized.get(key, 0.0)),
                ]
            )
        if not quiet:
            print(
                f"[fdmac] {scheme} value={_value} seed={seed}: "
                f"total={report.tput_total_mbps:.2f} Mb/s "
                f"coll={report.collision_prob:.3f} fd={report.fd_time_frac:.2f}",
                file=sys.stderr,
            )
    return run_rows, client_rows, pair_rows


def write_csv(path: str, header: list, rows: list):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise SystemExit(f"fdmac: cannot write {path}: {exc}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    base = {}
    arrival_spec = None
    if args.config:
        try:
            file_cfg = read_config_file(args.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        arrival_spec = file_cfg.pop("arrival_fps", None)
        base.update(file_cfg)

    # flags override file values; built-in defaults fill the rest
    overrides = {
        "scheme": args.scheme,
        "n_clients": args.clients,
        "epochs": args.epochs,
        "epoch_ms": args.epoch_ms,
        "delta_db": args.delta_db,
        "sic_db": args.sic_db,
    }
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    if args.dump_access:
        base["dump_access_path"] = args.dump_access
    if args.arrival_fps is not None:
        arrival_spec = args.arrival_fps
    if arrival_spec is None:
        arrival_spec = "backlogged"
    arrival_spec = str(arrival_spec)
    try:
        parse_arrival_spec(arrival_spec)
    except ValueError as exc:
        parser.error(str(exc))

    if args.seed is not None:
        seeds = [args.seed]
    else:
        try:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError:
            parser.error("--seeds expects comma-separated integers")
        if not seeds:
            parser.error("--seeds needs at least one seed")

    axis, values = None, []
    if args.sweep:
        try:
            axis, values = parse_sweep(args.sweep)
        except ValueError as exc:
            parser.error(str(exc))

    if args.print_config:
        print_config(base, arrival_spec, seeds)
        return 0

    scenario = Scenario(
        axis=axis, values=values, seeds=seeds, base=base, arrival_spec=arrival_spec
    )
    run_rows, client_rows, pair_rows = run_scenario(scenario, quiet=args.quiet)

    if args.out:
        write_csv(args.out, RUN_COLUMNS, run_rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        w.writerows(run_rows)
    if args.per_client_out:
        write_csv(args.per_client_out, CLIENT_COLUMNS, client_rows)
    if args.per_pair_out:
        write_csv(args.per_pair_out, PAIR_COLUMNS, pair_rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
