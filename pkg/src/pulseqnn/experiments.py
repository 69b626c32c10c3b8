"""Experiment harness: the five paper-style studies plus controllability runs.

Every experiment is driven by an :class:`ExperimentConfig`, writes CSV/JSON
artifacts into its output directory, and is bit-for-bit reproducible from
(config, seed): seeds fan out through a tag-based scheme so adding a new
experiment never perturbs the streams of existing ones.
"""

from __future__ import annotations

import json
import time
import zlib
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ._kernels import BACKEND
from .controllability import check_model
from .data import Dataset, function_arity, normalize_targets, sample_grid
from .model import PulseSchedule, parse_pauli_sum, resolve_model
from .qcore import Observable
from .simulator import predict_batch
from .trainer import TrainConfig, gate_time_lower_bound, train_gate, train_pulse

__all__ = [
    "ExperimentConfig",
    "SCHEMA_VERSION",
    "resolve_observable",
    "run_controllability",
    "run_duration_sweep",
    "run_fit",
    "run_gate_vs_pulse",
    "run_poly_family",
    "run_width_sweep",
    "subseed",
]

SCHEMA_VERSION = 1
MAX_PARAMETERS = 10**6


def subseed(master: int, *tags) -> int:
    """Derive a child seed from the master seed and a stable tag path."""
    entropy = [int(master) & 0xFFFFFFFF]
    for tag in tags:
        if isinstance(tag, (int, np.integer)):
            entropy.append(int(tag) & 0xFFFFFFFF)
        else:
            entropy.append(zlib.crc32(str(tag).encode()))
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun an experiment deterministically."""

    kind: str = "fit"
    model: object = "single_qubit"
    observable: str = "Z1"
    function: str = "sigmoid10"
    counts: object = 200
    radius: float = 1.0
    duration: float = 10.0
    n_segments: int = 1000
    t_list: tuple = ()
    dt_list: tuple = ()
    n_list: tuple = ()
    blocks_list: tuple = (5, 10, 15)
    family_count: int = 20
    n_seeds: int = 3
    train: TrainConfig = field(default_factory=TrainConfig)
    gate_iterations: int = 4000
    gate_learning_rate: float = 0.02
    out_dir: str = "out"
    seed: int = 0
    full_scale: bool = False
    physical_units: bool = False
    theta_max: float = 2 * np.pi * 0.05

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        if "train" in raw and isinstance(raw["train"], dict):
            raw["train"] = TrainConfig(**raw["train"])
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        for key in ("t_list", "dt_list", "n_list", "blocks_list"):
            if key in raw and raw[key] is not None:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["model"] = self.model if isinstance(self.model, (str, dict)) else "<object>"
        return out

    def updated(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)


def resolve_observable(spec: str, n_qubits: int) -> Observable:
    return Observable.from_operator(parse_pauli_sum(spec, n_qubits))


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: Path, header: list, rows: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_result(out_dir: Path, payload: dict, cfg: ExperimentConfig, started: float):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "backend": BACKEND,
        "seed": cfg.seed,
        "wall_time_s": time.perf_counter() - started,
        **payload,
        "config": cfg.to_dict(),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "result.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=str)
    return payload


def _guard_size(n_segments: int, n_controls: int):
    if n_segments * n_controls > MAX_PARAMETERS:
        raise ValueError(
            f"{n_segments} segments x {n_controls} channels exceeds the "
            f"{MAX_PARAMETERS} parameter guard"
        )


def _training_dataset(cfg: ExperimentConfig, obs: Observable, function: str = None) -> Dataset:
    ds = sample_grid(function or cfg.function, cfg.counts, cfg.radius)
    return normalize_targets(ds, obs.lambda_min, obs.lambda_max)


def run_fit(cfg: ExperimentConfig) -> dict:
    """Single fit: train, then emit loss curve, fit table, and pulse table."""
    started = time.perf_counter()
    out = Path(cfg.out_dir)
    model = resolve_model(cfg.model)
    obs = resolve_observable(cfg.observable, model.n_qubits)
    _guard_size(cfg.n_segments, model.n_controls)
    ds = _training_dataset(cfg, obs)
    tcfg = replace(cfg.train, seed=subseed(cfg.seed, "fit"))
    result = train_pulse(model, ds, cfg.duration, cfg.n_segments, obs, tcfg)

    _write_csv(
        out / "loss_curve.csv",
        ["iter", "mse"],
        [(i, loss) for i, loss in enumerate(result.loss_history)],
    )
    preds = predict_batch(model, result.final_params, ds.inputs, obs)
    x_cols = [f"x{j + 1}" for j in range(ds.n_inputs)]
    _write_csv(
        out / "fit.csv",
        x_cols + ["y_true_normalized", "y_pred"],
        [
            (*ds.inputs[i], ds.normalized_targets[i], preds[i].value)
            for i in range(len(ds))
        ],
    )
    sched = result.final_params
    _write_csv(
        out / "pulses.csv",
        ["segment", "t_start"] + [f"theta_{k + 1}" for k in range(sched.n_channels)],
        [(j, j * sched.dt, *sched.values[j]) for j in range(sched.n_segments)],
    )
    return _write_result(
        out,
        {
            "experiment": "fit",
            "final_loss": float(result.loss_history[-1]),
            "initial_loss": float(result.loss_history[0]),
            "train_wall_time_s": result.wall_time,
            "norm_map": list(ds.norm_map),
        },
        cfg,
        started,
    )


def run_duration_sweep(cfg: ExperimentConfig) -> dict:
    """Loss versus pulse duration at several sampling periods."""
    started = time.perf_counter()
    out = Path(cfg.out_dir)
    model = resolve_model(cfg.model)
    obs = resolve_observable(cfg.observable, model.n_qubits)
    t_list = cfg.t_list or (2.0, 4.0, 6.0, 8.0, 10.0)
    dt_list = cfg.dt_list or (0.1, 0.01)
    ds = _training_dataset(cfg, obs)

    rows = []
    for t_total in t_list:
        for dt in dt_list:
            k = max(1, round(t_total / dt))
            _guard_size(k, model.n_controls)
            for i in range(cfg.n_seeds):
                seed = subseed(cfg.seed, "duration", _fmt(t_total), _fmt(dt), i)
                tcfg = replace(cfg.train, seed=seed)
                result = train_pulse(model, ds, t_total, k, obs, tcfg)
                rows.append((t_total, dt, k, float(result.loss_history[-1]), seed))
    _write_csv(out / "sweep.csv", ["T", "dt", "K", "final_loss", "seed"], rows)
    return _write_result(
        out,
        {"experiment": "duration_sweep", "losses": [r[3] for r in rows]},
        cfg,
        started,
    )


def run_poly_family(cfg: ExperimentConfig) -> dict:
    """Loss statistics over random degree-8 polynomial targets."""
    started = time.perf_counter()
    out = Path(cfg.out_dir)
    model = resolve_model(cfg.model)
    obs = resolve_observable(cfg.observable, model.n_qubits)
    t_list = cfg.t_list or (2.0, 6.0, 10.0)
    count = cfg.family_count if not cfg.full_scale else max(cfg.family_count, 100)
    dt = cfg.dt_list[0] if cfg.dt_list else 0.01

    rows = []
    summary = []
    for t_total in t_list:
        k = max(1, round(t_total / dt))
        _guard_size(k, model.n_controls)
        losses = []
        for i in range(count):
            fn_seed = subseed(cfg.seed, "polyfn", i)
            ds = _training_dataset(cfg, obs, function=f"poly8_random:{fn_seed}")
            tcfg = replace(cfg.train, seed=subseed(cfg.seed, "polyfit", _fmt(t_total), i))
            result = train_pulse(model, ds, t_total, k, obs, tcfg)
            loss = float(result.loss_history[-1])
            losses.append(loss)
            rows.append((t_total, fn_seed, loss))
        q25, q50, q75 = np.percentile(losses, [25, 50, 75])
        summary.append((t_total, q50, q25, q75, float(np.mean(losses))))
    _write_csv(out / "stats.csv", ["T", "seed", "final_loss"], rows)
    _write_csv(out / "stats_summary.csv", ["T", "median", "q25", "q75", "mean"], summary)
    return _write_result(
        out,
        {
            "experiment": "poly_family",
            "losses": [r[2] for r in rows],
            "summary": [list(map(float, s)) for s in summary],
        },
        cfg,
        started,
    )


def run_width_sweep(cfg: ExperimentConfig) -> dict:
    """Loss versus duration for circular models of growing width."""
    started = time.perf_counter()
    out = Path(cfg.out_dir)
    n_list = cfg.n_list or ((1, 2, 3, 4) if cfg.full_scale else (1, 2, 3))
    t_list = cfg.t_list or (0.6, 1.2, 2.0)
    dt = cfg.dt_list[0] if cfg.dt_list else 0.01

    rows = []
    for n in n_list:
        if n > 4:
            raise ValueError("width sweep capped at 4 qubits (d <= 16)")
        model = resolve_model(f"circular:{n}")
        obs = resolve_observable(cfg.observable, model.n_qubits)
        ds = _training_dataset(cfg, obs)
        for t_total in t_list:
            k = max(1, round(t_total / dt))
            _guard_size(k, model.n_controls)
            tcfg = replace(cfg.train, seed=subseed(cfg.seed, "width", n, _fmt(t_total)))
            result = train_pulse(model, ds, t_total, k, obs, tcfg)
            rows.append((n, t_total, float(result.loss_history[-1])))
    _write_csv(out / "width.csv", ["n", "T", "final_loss"], rows)
    return _write_result(
        out,
        {"experiment": "width_sweep", "losses": [r[2] for r in rows]},
        cfg,
        started,
    )


# physical-units comparison grids: segment lengths tried for matched-K pulses
# (ns), amplitude bounds as multiples of theta_max, restarts per cell
_MATCHED_DT_GRID = (0.4, 0.6, 0.8, 1.2)
_CAP_MULTIPLIERS = (1.5, 2.0)
_MATCHED_RESTARTS = 2
_UNCONSTRAINED_DT = 0.25
_UNCONSTRAINED_T_GRID = (3.0, 4.0, 5.0, 6.0, 8.0)
_UNCONSTRAINED_CAPS = (1.0, 2.0)
# reference training losses the gate baselines are trained down to; the
# comparison is made at these published operating points rather than at the
# floor of our (different) optimizer
GATE_BASELINE_LOSSES = {5: 1.6e-2, 10: 1.1e-3, 15: 2.9e-4}


def run_gate_vs_pulse(cfg: ExperimentConfig) -> dict:
    """Operation-time comparison between gate circuits and drive-limited pulses.

    For each block count the gate baseline is trained down to its reference
    loss and its lower-bound operation time ``T_G`` computed from the wrapped
    rotation angles at the drive cap.  Pulse models with the same parameter
    count (``K = blocks``) are then trained over a grid of segment lengths
    and amplitude bounds; a trained pulse whose peak amplitude exceeds
    ``theta_max`` is slowed down by the invariant amplitude-time rescaling,
    so its drive-limited duration is ``K * dt * max(1, peak / theta_max)``.
    ``T_P`` is the smallest such duration that matches the gate loss.  The
    unconstrained variant repeats this with a fine segment grid (parameter
    count free); the matched result is one of its candidates, so it can
    never be slower.
    """
    if not cfg.physical_units:
        raise ValueError("gate-vs-pulse comparison requires physical_units mode")
    started = time.perf_counter()
    out = Path(cfg.out_dir)
    model = resolve_model(cfg.model)
    obs = resolve_observable(cfg.observable, model.n_qubits)
    ds = _training_dataset(cfg, obs)
    theta_max = cfg.theta_max

    def drive_limited_run(duration, k, cap_mult, seed_tags):
        """Train one pulse; returns (loss, effective duration, peak)."""
        tcfg = replace(
            cfg.train,
            seed=subseed(cfg.seed, *seed_tags),
            amplitude_cap=None if cap_mult is None else theta_max * cap_mult,
        )
        result = train_pulse(model, ds, duration, k, obs, tcfg)
        peak = float(np.max(np.abs(result.final_params.values)))
        effective = duration * max(1.0, peak / theta_max)
        return float(result.loss_history[-1]), effective, peak

    rows = []
    gate_report = []
    for blocks in cfg.blocks_list:
        gate_cfg = TrainConfig(
            iterations=cfg.gate_iterations,
            learning_rate=cfg.gate_learning_rate,
            seed=subseed(cfg.seed, "gate", blocks),
            init_scale=1.0,
        )
        gate = train_gate(
            blocks, ds, gate_cfg, target_loss=GATE_BASELINE_LOSSES.get(blocks)
        )
        gate_loss = float(gate.loss_history[-1])
        t_gate = gate_time_lower_bound(gate.final_params, theta_max)
        gate_report.append({"blocks": blocks, "loss": gate_loss, "T_G": t_gate})

        matched = None  # (effective_duration, k, loss, peak)
        for dt in _MATCHED_DT_GRID:
            for im, mult in enumerate(_CAP_MULTIPLIERS):
                for rs in range(_MATCHED_RESTARTS):
                    loss, eff, peak = drive_limited_run(
                        blocks * dt, blocks, mult, ("pulse", blocks, _fmt(dt), im, rs)
                    )
                    if loss <= gate_loss and (matched is None or eff < matched[0]):
                        matched = (eff, blocks, loss, peak)
        matched_tp = matched[0] if matched else float("nan")
        rows.append(
            (blocks, gate_loss, t_gate, blocks, matched_tp, matched_tp / t_gate, "matched_K")
        )

        # the matched run is a feasible unconstrained candidate, so the
        # unconstrained duration can never exceed it
        unc = matched
        for t_total in _UNCONSTRAINED_T_GRID:
            k = max(1, round(t_total / _UNCONSTRAINED_DT))
            for im, mult in enumerate(_UNCONSTRAINED_CAPS):
                loss, eff, peak = drive_limited_run(
                    t_total, k, mult, ("pulse_unc", blocks, _fmt(t_total), im)
                )
                if loss <= gate_loss and (unc is None or eff < unc[0]):
                    unc = (eff, k, loss, peak)
        unc_tp = unc[0] if unc else float("nan")
        unc_k = unc[1] if unc else 0
        rows.append(
            (blocks, gate_loss, t_gate, unc_k, unc_tp, unc_tp / t_gate, "unconstrained_K")
        )
    _write_csv(
        out / "compare.csv",
        ["blocks", "gate_loss", "T_G", "K_pulse", "T_P", "T_P_over_T_G", "variant"],
        rows,
    )
    return _write_result(
        out,
        {
            "experiment": "gate_vs_pulse",
            "gate": gate_report,
            "rows": [list(r) for r in rows],
            "losses": [r[1] for r in rows],
        },
        cfg,
        started,
    )


def run_controllability(model_spec, degree_cutoff: int = 4, out_path: str = None):
    """Controllability check; returns (report dict, exit code 0 or 2)."""
    model = resolve_model(model_spec)
    report = check_model(model, degree_cutoff=degree_cutoff)
    payload = {"schema_version": SCHEMA_VERSION, "model": str(model_spec), **report.to_dict()}
    if out_path:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    return payload, (0 if report.ensemble.is_full else 2)
