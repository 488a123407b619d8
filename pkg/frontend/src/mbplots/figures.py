"""Publication-style figures from batch aggregate CSV logs.

Renders two images from the tracking driver's ``aggregate.csv``: mean
clutter-rate estimates per step and mean cardinality estimates per
step, each with a +/-1 standard-deviation band per mode and a
horizontal ground-truth line.  Statistics are plotted verbatim; nothing
is recomputed here.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

REQUIRED_COLUMNS = [
    "mode", "step", "n_est_mean", "n_est_std", "lambda_est_mean",
    "lambda_est_std", "n_true", "lambda_true",
]


class SchemaError(ValueError):
    """The input CSV does not match the frozen aggregate schema."""


@dataclass
class FigureSpec:
    aggregate_csv: str
    out_dir: str
    mode_labels: dict = field(default_factory=lambda: {
        "robust": "unknown clutter and detection",
        "baseline": "fixed clutter and detection",
    })
    clutter_truth: float = 10.0
    cardinality_truth: float = 5.0
    dpi: int = 150


def read_aggregate(path):
    """Parse the aggregate CSV into {mode: dict of per-step arrays}."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input CSV not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing required column(s): {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for row in rows:
        mode = row["mode"]
        try:
            parsed = {c: float(row[c]) for c in REQUIRED_COLUMNS[1:]}
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: non-numeric value in row {row}") \
                from exc
        out.setdefault(mode, []).append(parsed)
    for mode, entries in out.items():
        entries.sort(key=lambda e: e["step"])
        out[mode] = {c: np.array([e[c] for e in entries])
                     for c in REQUIRED_COLUMNS[1:]}
    return out


def _plot_metric(data, spec, mean_col, std_col, truth, ylabel, title, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for mode in sorted(data):
        d = data[mode]
        label = spec.mode_labels.get(mode, mode)
        line, = ax.plot(d["step"], d[mean_col], label=label)
        ax.fill_between(d["step"], d[mean_col] - d[std_col],
                        d[mean_col] + d[std_col],
                        color=line.get_color(), alpha=0.2, linewidth=0)
    ax.axhline(truth, color="black", linestyle="--", linewidth=1,
               label="ground truth")
    ax.set_xlabel("time step")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=spec.dpi, metadata={"Software": "mbplots"})
    plt.close(fig)


def render_figures(spec):
    """Write both figures; returns {name: output path}.

    Deterministic: identical inputs produce byte-identical images.
    """
    data = read_aggregate(spec.aggregate_csv)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "clutter": out / "clutter_intensity.png",
        "cardinality": out / "cardinality.png",
    }
    _plot_metric(data, spec, "lambda_est_mean", "lambda_est_std",
                 spec.clutter_truth, "estimated clutter rate",
                 "Clutter intensity estimates", paths["clutter"])
    _plot_metric(data, spec, "n_est_mean", "n_est_std",
                 spec.cardinality_truth, "estimated number of targets",
                 "Cardinality estimates", paths["cardinality"])
    return {k: str(v) for k, v in paths.items()}
