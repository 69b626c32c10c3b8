"""Command-line interface for the experiment harness."""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments
from .experiments import ExperimentConfig

_RUNNERS = {
    "fit": experiments.run_fit,
    "sweep-duration": experiments.run_duration_sweep,
    "poly-family": experiments.run_poly_family,
    "sweep-width": experiments.run_width_sweep,
    "compare-gate-pulse": experiments.run_gate_vs_pulse,
}

_KINDS = {
    "fit": "fit",
    "sweep-duration": "duration_sweep",
    "poly-family": "poly_family",
    "sweep-width": "width_sweep",
    "compare-gate-pulse": "gate_vs_pulse",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulseqnn",
        description="Pulse-based QNN experiments: fitting, sweeps, and controllability checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file (fields of ExperimentConfig)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--full-scale", action="store_true", help="paper-size run")

    p = sub.add_parser("controllability", help="Lie-closure controllability check")
    p.add_argument("--model", default="single_qubit", help="model spec (preset, circular:n, or JSON path)")
    p.add_argument("--dcut", type=int, default=4, help="polynomial degree cutoff")
    p.add_argument("--out", help="write the JSON report here (also printed)")
    return parser


def _load_config(args, command: str) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = {"kind": _KINDS[command]}
    if args.out:
        overrides["out_dir"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.full_scale:
        overrides["full_scale"] = True
    if command == "compare-gate-pulse" and not args.config:
        overrides["physical_units"] = True
    return cfg.updated(**overrides)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "controllability":
        payload, code = experiments.run_controllability(
            args.model, degree_cutoff=args.dcut, out_path=args.out
        )
        print(json.dumps(payload, indent=2))
        return code
    cfg = _load_config(args, args.command)
    payload = _RUNNERS[args.command](cfg)
    summary = {k: payload[k] for k in ("experiment", "wall_time_s", "backend") if k in payload}
    if "final_loss" in payload:
        summary["final_loss"] = payload["final_loss"]
    print(json.dumps(summary, indent=2, default=str))
    print(f"artifacts written to {cfg.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
