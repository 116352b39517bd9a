"""Figure rendering over driftbench CSV outputs.

Two figure kinds: ``traces`` overlays the truth, the noisy observations, and
each algorithm's run-0 predictions for a one-dimensional stream;
``cum-error`` overlays per-algorithm mean cumulative-error curves with the
reference bound line.  The CSV schema is the only contract with the
experiment harness; rendering never writes back to its inputs, and output
files carry no timestamps so re-rendering reproduces identical bytes.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("traces", "cum-error")

SUMMARY_COLUMNS = ("algorithm", "t", "mean_cum_err", "std_cum_err", "bound")
RESULTS_COLUMNS = ("algorithm", "run", "t", "y_hat")
STREAM_COLUMNS = ("t", "y", "y_true")


class SchemaError(ValueError):
    """An input CSV is missing a required column."""


@dataclass
class FigureSpec:
    """What to draw: figure kind, input CSVs, labels, output, axis scales."""

    kind: str
    inputs: List[str]
    output: str
    labels: Optional[List[str]] = None
    log_x: bool = False
    log_y: bool = False

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("figure spec needs at least one input CSV")


def read_csv_columns(path: str, required: Sequence[str]) -> Dict[str, list]:
    """Load a CSV as string columns, failing loudly on missing columns."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        idx = {col: header.index(col) for col in header}
        columns: Dict[str, list] = {col: [] for col in header}
        for row in reader:
            for col, i in idx.items():
                columns[col].append(row[i])
    return columns


def _group_by_algorithm(cols: Dict[str, list], fields: Sequence[str]):
    """Yields (algorithm, {field: float array}) in first-seen order."""
    order: List[str] = []
    grouped: Dict[str, Dict[str, list]] = {}
    for i, algo in enumerate(cols["algorithm"]):
        if algo not in grouped:
            order.append(algo)
            grouped[algo] = {f: [] for f in fields}
        for f in fields:
            grouped[algo][f].append(float(cols[f][i]))
    for algo in order:
        yield algo, {f: np.asarray(v) for f, v in grouped[algo].items()}


def _check_shared_length(lengths: Dict[str, int]) -> None:
    if len(set(lengths.values())) > 1:
        detail = ", ".join(f"{k}: {v}" for k, v in lengths.items())
        raise SchemaError(f"inputs must share the same number of rounds ({detail})")


def _render_cum_error(spec: FigureSpec, ax) -> None:
    lengths: Dict[str, int] = {}
    bound_drawn = False
    label_iter = iter(spec.labels or [])
    for path in spec.inputs:
        cols = read_csv_columns(path, SUMMARY_COLUMNS)
        for algo, series in _group_by_algorithm(
            cols, ("t", "mean_cum_err", "std_cum_err", "bound")
        ):
            label = next(label_iter, algo)
            lengths[f"{os.path.basename(path)}:{algo}"] = series["t"].shape[0]
            ax.plot(series["t"], series["mean_cum_err"], label=label)
            ax.fill_between(
                series["t"],
                series["mean_cum_err"] - series["std_cum_err"],
                series["mean_cum_err"] + series["std_cum_err"],
                alpha=0.15,
            )
            if not bound_drawn:
                ax.plot(
                    series["t"], series["bound"],
                    linestyle="--", color="black", label="rate bound",
                )
                bound_drawn = True
    _check_shared_length(lengths)
    ax.set_xlabel("round")
    ax.set_ylabel("cumulative true error")
    if ax.get_legend_handles_labels()[0]:
        ax.legend()


def _render_traces(spec: FigureSpec, ax) -> None:
    """First input: stream CSV; remaining inputs: results CSVs (run 0)."""
    stream_path, result_paths = spec.inputs[0], spec.inputs[1:]
    stream = read_csv_columns(stream_path, STREAM_COLUMNS)
    t = np.asarray([float(v) for v in stream["t"]])
    lengths = {os.path.basename(stream_path): t.shape[0]}
    ax.scatter(
        t, [float(v) for v in stream["y"]],
        s=4, alpha=0.3, color="gray", label="observations",
    )
    ax.plot(
        t, [float(v) for v in stream["y_true"]],
        color="black", linewidth=1.2, label="truth",
    )
    label_iter = iter(spec.labels or [])
    for path in result_paths:
        cols = read_csv_columns(path, RESULTS_COLUMNS)
        runs = [int(v) for v in cols["run"]]
        first_run = min(runs) if runs else 0
        keep = [i for i, r in enumerate(runs) if r == first_run]
        picked = {
            "algorithm": [cols["algorithm"][i] for i in keep],
            "t": [cols["t"][i] for i in keep],
            "y_hat": [cols["y_hat"][i] for i in keep],
        }
        for algo, series in _group_by_algorithm(picked, ("t", "y_hat")):
            label = next(label_iter, algo)
            lengths[f"{os.path.basename(path)}:{algo}"] = series["t"].shape[0]
            ax.plot(series["t"], series["y_hat"], linewidth=1.0, label=label)
    _check_shared_length(lengths)
    ax.set_xlabel("round")
    ax.set_ylabel("output")
    if ax.get_legend_handles_labels()[0]:
        ax.legend()


def render(spec: FigureSpec) -> str:
    """Draw the figure described by ``spec`` and write it to ``spec.output``."""
    for path in spec.inputs:
        if not os.path.exists(path):
            raise FileNotFoundError(f"figure input does not exist: {path}")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if spec.kind == "cum-error":
            _render_cum_error(spec, ax)
        else:
            _render_traces(spec, ax)
        if spec.log_x:
            ax.set_xscale("log")
        if spec.log_y:
            ax.set_yscale("log")
        out_dir = os.path.dirname(spec.output)
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
        # metadata pinned so repeated renders are byte-identical
        fig.savefig(spec.output, dpi=120, metadata={"Software": "driftbench-plots"})
    finally:
        plt.close(fig)
    return spec.output


def spec_from_dict(raw: dict) -> FigureSpec:
    try:
        return FigureSpec(
            kind=raw["kind"],
            inputs=list(raw["inputs"]),
            output=raw["output"],
            labels=list(raw["labels"]) if raw.get("labels") else None,
            log_x=bool(raw.get("log_x", False)),
            log_y=bool(raw.get("log_y", False)),
        )
    except KeyError as exc:
        raise SchemaError(f"figure spec missing field {exc.args[0]!r}") from exc
