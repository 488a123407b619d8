"""
Batches, CSV outputs, and the optional figure package
=====================================================

A study is a batch of independent trials: same configuration, seeds
base_seed, base_seed+1, ...  `run_batch` farms trials out to a process
pool and a single collector writes two CSV files per study -- one row
per (trial, step), plus a per-step aggregate across trials.

The aggregate file is the interface to the optional `mbplots` package
(in frontend/), which knows nothing about this library beyond the CSV
schema.  If it is installed, this script renders its two figures.
"""

import dataclasses
import subprocess
import sys
from pathlib import Path

import numpy as np

import mbcontrol as mb

out = Path("demo_results")

# A deliberately tiny study: 2 trials x 6 steps, both filter modes.
cfg = mb.default_config()
cfg.scenario = dataclasses.replace(
    cfg.scenario,
    horizon=6,
    area=(0.0, 300.0, 0.0, 300.0),
    clutter_rate=3.0,
    r_max=450.0,
    targets=[mb.TargetSchedule(1, 6, np.array([60.0, 240.0, 8.0, -8.0]))],
)
cfg.filter = dataclasses.replace(cfg.filter, l_max=200, m_max=20)
cfg.control = mb.ControlConfig(n_samples=20, kde_basis=50)

logs = mb.run_batch(cfg, n_runs=2, modes=("robust", "baseline"),
                    out_dir=out, base_seed=100)

for name in ("trials_robust.csv", "trials_baseline.csv", "aggregate.csv"):
    lines = (out / name).read_text().splitlines()
    print(f"{name}: {len(lines) - 1} rows, columns = {lines[0]}")

# Everything above is reachable from the command line as well:
#   mbcontrol --config my.yaml --runs 2 --seed 100 --mode both --out demo_results

# Render the figures if the optional plotting package is present.
try:
    import mbplots
except ImportError:
    print("mbplots not installed; skipping figures "
          "(pip install ./frontend to get them)")
    sys.exit(0)

spec = mbplots.FigureSpec(out / "aggregate.csv", out / "figs",
                          clutter_truth=cfg.scenario.clutter_rate,
                          cardinality_truth=1.0)
for name, path in mbplots.render_figures(spec).items():
    print(f"figure {name}: {path}")
