"""Command-line interface.

Subcommands: capacity (closed-form / ODE-limit / discrete-limit routes),
simulate (Monte Carlo of the feedback scheme), spectrum (non-feedback
sweeps).  Exit codes: 0 success, 2 invalid flags or parameters, 3 a
computation failed to converge, 4 filter divergence.  Text output is
human-oriented and unstable; CSV and JSON are the compatibility surface.
When --out is given, data files are written together with a
`<out>.manifest.json` recording parameters, version, seed, and timestamp.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import report
from .abel import abel_for_channel, integrate_abel, sk_rate_from_ode
from .capacity import (
    DEFAULT_SWEEP_DELTAS,
    discrete_limit_capacity,
    feedback_capacity_closed_form,
)
from .channel import ChannelParams
from .errors import FilterDivergence, NotConverged, OucapError
from .simulate import SimConfig, run_sk_scheme
from .spectrum import flat_input_limit_sweep, waterfill_bandlimited

ODE_HORIZON_DEFAULT = 50.0
SIM_HORIZON_DEFAULT = 10.0

FLAT_N_DEFAULT = (16.0, 64.0, 256.0, 1024.0)
FLAT_K_DEFAULT = (32.0, 128.0, 512.0, 4096.0)


def _channel_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--lambda", dest="lam", type=float, required=True,
                     help="coloring weight of the OU noise component")
    sub.add_argument("--kappa", type=float, required=True,
                     help="OU mean-reversion rate (must be > 0)")
    sub.add_argument("--power", type=float, required=True,
                     help="average power budget (must be >= 0)")


def _output_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("text", "csv", "json"), default="text")
    sub.add_argument("--out", type=Path, default=None,
                     help="base path for output files (data + .manifest.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oucap",
        description="Feedback capacity of the OU-colored additive Gaussian "
        "noise channel: closed form, ODE and discrete limits, Monte Carlo, "
        "and non-feedback spectra.  OUCAP_THREADS caps parallelism; "
        "OUCAP_BACKEND forces the simulation backend.",
    )
    parser.add_argument("--version", action="version", version=report.__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    cap = subs.add_parser("capacity", help="feedback capacity by one or all routes")
    _channel_args(cap)
    cap.add_argument("--route", choices=("closed", "ode", "discrete", "all"),
                     default="closed")
    cap.add_argument("--horizon", type=float, default=ODE_HORIZON_DEFAULT,
                     help=f"ODE-route horizon (default {ODE_HORIZON_DEFAULT:g})")
    _output_args(cap)

    sim = subs.add_parser("simulate", help="Monte Carlo of the feedback scheme")
    _channel_args(sim)
    sim.add_argument("--horizon", type=float, default=SIM_HORIZON_DEFAULT,
                     help=f"time horizon (default {SIM_HORIZON_DEFAULT:g})")
    sim.add_argument("--steps", type=int, default=10000,
                     help="time steps (default 10000)")
    sim.add_argument("--trials", type=int, default=1000,
                     help="Monte Carlo trials (default 1000)")
    sim.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    _output_args(sim)

    spec = subs.add_parser("spectrum", help="non-feedback rate sweeps")
    _channel_args(spec)
    spec.add_argument("--sweep", choices=("flat", "waterfill"), default="flat")
    spec.add_argument("--band", type=float, default=1000.0,
                      help="water-filling half-bandwidth W (default 1000)")
    _output_args(spec)
    return parser


def _emit(args, text_payload: str, csv_payload: str, json_payload: dict,
          manifest: dict, summary: str | None = None) -> None:
    if args.format == "text":
        data = text_payload
    elif args.format == "csv":
        data = csv_payload
    else:
        data = report.dump_json(json_payload)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        suffix = {"text": ".txt", "csv": ".csv", "json": ".json"}[args.format]
        target = args.out if args.out.suffix else args.out.with_suffix(suffix)
        target.write_text(data, encoding="utf-8")
        manifest_path = Path(str(target) + ".manifest.json")
        manifest_path.write_text(report.dump_json(manifest), encoding="utf-8")
        if summary:
            print(summary)
        print(f"wrote {target} and {manifest_path}")
    else:
        if summary:
            print(summary)
        sys.stdout.write(data)


def cmd_capacity(args) -> int:
    params = ChannelParams(lam=args.lam, kappa=args.kappa, power=args.power)
    results = []
    if args.route in ("closed", "all"):
        results.append(feedback_capacity_closed_form(params))
    if args.route in ("ode", "all"):
        coeffs = abel_for_channel(params)
        traj = integrate_abel(coeffs, horizon=args.horizon, step=args.horizon / 1000.0)
        results.append(sk_rate_from_ode(traj))
    if args.route in ("discrete", "all"):
        results.append(discrete_limit_capacity(params, DEFAULT_SWEEP_DELTAS))
    max_disc = None
    if len(results) > 1:
        values = [r.value for r in results]
        max_disc = max(abs(a - b) for i, a in enumerate(values) for b in values[i + 1:])
    manifest = report.build_manifest(
        "capacity",
        {
            "lambda": args.lam,
            "kappa": args.kappa,
            "power": args.power,
            "route": args.route,
            "horizon": args.horizon,
        },
        master_seed=None,
    )
    _emit(
        args,
        report.capacity_text(params, results, max_disc),
        report.capacity_csv(results),
        report.capacity_payload(params, results, max_disc),
        manifest,
    )
    return 0


def cmd_simulate(args) -> int:
    params = ChannelParams(lam=args.lam, kappa=args.kappa, power=args.power)
    if params.power <= 0:
        raise ValueError("power must be positive for the simulation")
    cfg = SimConfig(horizon=args.horizon, steps=args.steps, trials=args.trials,
                    master_seed=args.seed)
    coeffs = abel_for_channel(params)
    traj = integrate_abel(coeffs, horizon=cfg.horizon, step=cfg.horizon / max(cfg.steps, 200))
    rep = run_sk_scheme(params, cfg, traj)
    manifest = report.build_manifest(
        "simulate",
        {
            "lambda": args.lam,
            "kappa": args.kappa,
            "power": args.power,
            "horizon": args.horizon,
            "steps": args.steps,
            "trials": args.trials,
        },
        master_seed=args.seed,
    )
    summary = f"max MMSE z-score {report.max_mmse_z(rep):.3f} (empirical vs analytic)"
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        base = args.out.with_suffix("") if args.out.suffix else args.out
        csv_path = base.with_suffix(".csv")
        json_path = base.with_suffix(".json")
        manifest_path = Path(str(base) + ".manifest.json")
        csv_path.write_text(report.simulate_csv(rep), encoding="utf-8")
        json_path.write_text(
            report.dump_json(report.simulate_payload(params, cfg, rep)),
            encoding="utf-8",
        )
        manifest_path.write_text(report.dump_json(manifest), encoding="utf-8")
        print(summary)
        print(f"wrote {csv_path}, {json_path} and {manifest_path}")
    else:
        print(summary)
        if args.format == "csv":
            sys.stdout.write(report.simulate_csv(rep))
        elif args.format == "json":
            sys.stdout.write(report.dump_json(report.simulate_payload(params, cfg, rep)))
        else:
            sys.stdout.write(report.simulate_text(params, cfg, rep))
    return 0


def cmd_spectrum(args) -> int:
    params = ChannelParams(lam=args.lam, kappa=args.kappa, power=args.power)
    if args.sweep == "flat":
        rows = flat_input_limit_sweep(params, FLAT_N_DEFAULT, FLAT_K_DEFAULT)
        header = ["n", "k", "rate", "analytic_limit"]
    else:
        if not args.band > 0:
            raise ValueError("band must be positive")
        bands = np.geomspace(args.band / 100.0, args.band, 9)
        rows = []
        for w in bands:
            level, rate = waterfill_bandlimited(params, float(w), params.power)
            flat_noise = (w / (2.0 * np.pi)) * np.log1p(np.pi * params.power / w)
            rows.append((float(w), level, rate, float(flat_noise)))
        header = ["band", "level", "rate", "analytic_limit"]
    manifest = report.build_manifest(
        "spectrum",
        {
            "lambda": args.lam,
            "kappa": args.kappa,
            "power": args.power,
            "sweep": args.sweep,
            "band": args.band,
        },
        master_seed=None,
    )
    _emit(
        args,
        report.spectrum_text(args.sweep, header, rows),
        report.spectrum_csv(header, rows),
        report.spectrum_payload(params, args.sweep, header, rows),
        manifest,
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "capacity":
            return cmd_capacity(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_spectrum(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FilterDivergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OucapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
