"""Render figures from pulseqnn experiment CSVs.

Input schemas (written by the pulseqnn experiment runners):

    fit.csv           x1[,x2], y_true_normalized, y_pred
    loss_curve.csv    iter, mse
    sweep.csv         T, dt, K, final_loss, seed
    stats_summary.csv T, median, q25, q75, mean
    width.csv         n, T, final_loss
    compare.csv       blocks, gate_loss, T_G, K_pulse, T_P, T_P_over_T_G, variant

Rendering is read-only and deterministic: given identical inputs and tool
versions the output bytes are identical (SVG metadata that varies per run
is stripped).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "pulseqnn-figures"

FIGURE_KINDS = ("fit1d", "fit2d", "duration", "family", "width", "compare")


class SchemaError(ValueError):
    """Input CSV does not match the expected schema."""


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    extra: dict = field(default_factory=dict)


def read_table(path, required: tuple) -> dict:
    """Read a CSV with a header row into a dict of float columns.

    Non-numeric columns (e.g. the compare table's ``variant``) are kept as
    string arrays.  Raises :class:`SchemaError` on missing columns or an
    empty table.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    missing = set(required) - set(header)
    if missing:
        raise SchemaError(f"{path}: missing columns {sorted(missing)} (have {header})")
    columns = {}
    for i, name in enumerate(header):
        values = [row[i] for row in rows]
        try:
            columns[name] = np.array([float(v) for v in values])
        except ValueError:
            columns[name] = np.array(values)
    return columns


def _save(fig, output):
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, metadata={"Date": None} if str(output).endswith(".svg") else None)
    plt.close(fig)


def _with_loss_panel(spec: FigureSpec, draw_main):
    """Two-panel layout: the fitted data on the left, training curve right."""
    has_curve = len(spec.inputs) > 1
    fig, axes = plt.subplots(
        1, 2 if has_curve else 1, figsize=(9 if has_curve else 5.2, 3.6)
    )
    axes = np.atleast_1d(axes)
    draw_main(fig, axes[0])
    if has_curve:
        curve = read_table(spec.inputs[1], ("iter", "mse"))
        axes[1].semilogy(curve["iter"], curve["mse"], color="tab:purple")
        axes[1].set_xlabel("iteration")
        axes[1].set_ylabel("MSE")
        axes[1].set_title("training curve")
    fig.suptitle(spec.title or None)
    fig.tight_layout()
    _save(fig, spec.output)


def _render_fit1d(spec: FigureSpec):
    data = read_table(spec.inputs[0], ("x1", "y_true_normalized", "y_pred"))

    def draw(fig, ax):
        order = np.argsort(data["x1"])
        ax.plot(data["x1"][order], data["y_true_normalized"][order], "-", label="target")
        ax.plot(data["x1"][order], data["y_pred"][order], "--", label="model")
        ax.set_xlabel(spec.xlabel or "x")
        ax.set_ylabel(spec.ylabel or "f(x)")
        ax.legend()

    _with_loss_panel(spec, draw)


def _render_fit2d(spec: FigureSpec):
    data = read_table(spec.inputs[0], ("x1", "x2", "y_true_normalized", "y_pred"))
    x1 = np.unique(data["x1"])
    x2 = np.unique(data["x2"])
    if x1.size * x2.size != data["x1"].size:
        raise SchemaError(f"{spec.inputs[0]}: points do not form a rectangular grid")

    def grid(col):
        idx = np.lexsort((data["x2"], data["x1"]))
        return data[col][idx].reshape(x1.size, x2.size)

    def draw(fig, ax):
        true_g = grid("y_true_normalized")
        pred_g = grid("y_pred")
        ax.contourf(x1, x2, true_g.T, levels=20, cmap="viridis")
        contour = ax.contour(x1, x2, pred_g.T, levels=10, colors="white", linewidths=0.7)
        ax.clabel(contour, inline=True, fontsize=6)
        ax.set_xlabel(spec.xlabel or "x1")
        ax.set_ylabel(spec.ylabel or "x2")
        ax.set_title("target (fill) vs model (lines)")

    _with_loss_panel(spec, draw)


def _render_duration(spec: FigureSpec):
    data = read_table(spec.inputs[0], ("T", "dt", "K", "final_loss", "seed"))
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for dt in np.unique(data["dt"]):
        sel = data["dt"] == dt
        ts = np.unique(data["T"][sel])
        med = [np.median(data["final_loss"][sel & (data["T"] == t)]) for t in ts]
        ax.semilogy(ts, med, "o-", label=f"dt = {dt:g}")
    ax.set_xlabel(spec.xlabel or "pulse duration T")
    ax.set_ylabel(spec.ylabel or "final training loss (median)")
    ax.set_title(spec.title or None)
    ax.legend()
    fig.tight_layout()
    _save(fig, spec.output)


def _render_family(spec: FigureSpec):
    data = read_table(spec.inputs[0], ("T", "median", "q25", "q75"))
    order = np.argsort(data["T"])
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ts = data["T"][order]
    ax.semilogy(ts, data["median"][order], "o-", color="tab:blue", label="median")
    ax.fill_between(
        ts, data["q25"][order], data["q75"][order], alpha=0.3, color="tab:blue",
        label="interquartile range",
    )
    if "mean" in data:
        ax.semilogy(ts, data["mean"][order], "s--", color="tab:orange", label="mean")
    ax.set_xlabel(spec.xlabel or "pulse duration T")
    ax.set_ylabel(spec.ylabel or "final training loss")
    ax.set_title(spec.title or None)
    ax.legend()
    fig.tight_layout()
    _save(fig, spec.output)


def _render_width(spec: FigureSpec):
    data = read_table(spec.inputs[0], ("n", "T", "final_loss"))
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for n in np.unique(data["n"]):
        sel = data["n"] == n
        order = np.argsort(data["T"][sel])
        ax.semilogy(
            data["T"][sel][order], data["final_loss"][sel][order], "o-", label=f"n = {int(n)}"
        )
    ax.set_xlabel(spec.xlabel or "pulse duration T")
    ax.set_ylabel(spec.ylabel or "final training loss")
    ax.set_title(spec.title or None)
    ax.legend()
    fig.tight_layout()
    _save(fig, spec.output)


def _render_compare(spec: FigureSpec):
    data = read_table(
        spec.inputs[0],
        ("blocks", "gate_loss", "T_G", "K_pulse", "T_P", "T_P_over_T_G", "variant"),
    )
    blocks = np.unique(data["blocks"])
    width = 0.27
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    centers = np.arange(blocks.size)

    def series(variant):
        out = []
        for b in blocks:
            sel = (data["blocks"] == b) & (data["variant"] == variant)
            out.append(float(data["T_P"][sel][0]) if np.any(sel) else np.nan)
        return np.array(out)

    gate = np.array([float(data["T_G"][data["blocks"] == b][0]) for b in blocks])
    ax.bar(centers - width, gate, width, label="gate lower bound $T_G$", color="tab:gray")
    ax.bar(centers, series("matched_K"), width, label="pulse, matched K", color="tab:blue")
    ax.bar(
        centers + width,
        series("unconstrained_K"),
        width,
        label="pulse, unconstrained K",
        color="tab:cyan",
    )
    ax.set_xticks(centers)
    ax.set_xticklabels([f"{int(b)} blocks" for b in blocks])
    ax.set_ylabel(spec.ylabel or "operation time (ns)")
    ax.set_title(spec.title or None)
    ax.legend()
    fig.tight_layout()
    _save(fig, spec.output)


_RENDERERS = {
    "fit1d": _render_fit1d,
    "fit2d": _render_fit2d,
    "duration": _render_duration,
    "family": _render_family,
    "width": _render_width,
    "compare": _render_compare,
}


def render(spec: FigureSpec) -> str:
    """Render the figure described by ``spec``; returns the output path."""
    if spec.kind not in _RENDERERS:
        raise SchemaError(f"unknown figure kind {spec.kind!r}; choose from {FIGURE_KINDS}")
    if not spec.inputs:
        raise SchemaError("no input files given")
    for path in spec.inputs:
        if not Path(path).exists():
            raise SchemaError(f"input file not found: {path}")
    _RENDERERS[spec.kind](spec)
    return spec.output
