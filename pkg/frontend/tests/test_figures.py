"""Tests for aggregate-CSV parsing and figure rendering."""

import csv

import numpy as np
import pytest

from mbplots import (
    REQUIRED_COLUMNS,
    FigureSpec,
    SchemaError,
    read_aggregate,
    render_figures,
)
from mbplots.figures import _plot_metric


def write_aggregate(path, modes=("robust", "baseline"), steps=10,
                    lam_value=None):
    rng = np.random.default_rng(0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REQUIRED_COLUMNS)
        for mode in modes:
            for k in range(1, steps + 1):
                lam = lam_value if lam_value is not None else \
                    10.0 + rng.normal(0, 0.5)
                w.writerow([mode, k, 4.5 + rng.normal(0, 0.2), 0.8,
                            lam, 1.2, 5, 10.0])
    return path


def test_read_aggregate_round_trip(tmp_path):
    path = write_aggregate(tmp_path / "agg.csv")
    data = read_aggregate(path)
    assert set(data) == {"robust", "baseline"}
    d = data["robust"]
    assert np.array_equal(d["step"], np.arange(1, 11))
    assert d["lambda_est_mean"].shape == (10,)
    assert np.all(d["lambda_true"] == 10.0)


def test_read_aggregate_missing_column(tmp_path):
    path = tmp_path / "agg.csv"
    cols = [c for c in REQUIRED_COLUMNS if c != "lambda_est_std"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        w.writerow(["robust", 1, 4, 10, 5, 10])
    with pytest.raises(SchemaError, match="lambda_est_std"):
        read_aggregate(path)


def test_read_aggregate_missing_file(tmp_path):
    with pytest.raises(SchemaError, match="not found"):
        read_aggregate(tmp_path / "nope.csv")


def test_read_aggregate_empty_and_bad_values(tmp_path):
    path = tmp_path / "agg.csv"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerow(REQUIRED_COLUMNS)
    with pytest.raises(SchemaError, match="no data rows"):
        read_aggregate(path)
    with open(path, "a", newline="") as fh:
        csv.writer(fh).writerow(["robust", 1, "x", 1, 1, 1, 5, 10])
    with pytest.raises(SchemaError, match="non-numeric"):
        read_aggregate(path)


def test_render_figures_outputs(tmp_path):
    path = write_aggregate(tmp_path / "agg.csv")
    spec = FigureSpec(str(path), str(tmp_path / "figs"))
    paths = render_figures(spec)
    assert sorted(paths) == ["cardinality", "clutter"]
    for p in paths.values():
        data = open(p, "rb").read()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 5000


def test_render_figures_deterministic(tmp_path):
    path = write_aggregate(tmp_path / "agg.csv")
    spec = FigureSpec(str(path), str(tmp_path / "figs"))
    first = {k: open(v, "rb").read() for k, v in render_figures(spec).items()}
    second = {k: open(v, "rb").read() for k, v in render_figures(spec).items()}
    assert first == second


def test_truth_lines_present(tmp_path):
    """Both figures carry a horizontal line at the truth constant."""
    import matplotlib.pyplot as plt

    path = write_aggregate(tmp_path / "agg.csv")
    spec = FigureSpec(str(path), str(tmp_path / "figs"))
    data = read_aggregate(path)
    (tmp_path / "figs").mkdir()
    captured = {}
    orig_close = plt.close

    def capture_close(fig):
        captured[len(captured)] = [
            line.get_ydata() for ax in fig.axes for line in ax.lines]
        orig_close(fig)

    plt.close = capture_close
    try:
        _plot_metric(data, spec, "lambda_est_mean", "lambda_est_std",
                     spec.clutter_truth, "y", "t",
                     tmp_path / "figs" / "a.png")
        _plot_metric(data, spec, "n_est_mean", "n_est_std",
                     spec.cardinality_truth, "y", "t",
                     tmp_path / "figs" / "b.png")
    finally:
        plt.close = orig_close
    assert any(np.all(np.asarray(y) == 10.0) for y in captured[0])
    assert any(np.all(np.asarray(y) == 5.0) for y in captured[1])


def test_flat_curve_matches_truth(tmp_path):
    """Constant lambda-hat = 10 input: the curve equals the truth line."""
    path = write_aggregate(tmp_path / "agg.csv", lam_value=10.0)
    data = read_aggregate(path)
    for mode in data:
        assert np.all(data[mode]["lambda_est_mean"] == 10.0)
    spec = FigureSpec(str(path), str(tmp_path / "figs"))
    render_figures(spec)  # renders without error


def test_cli(tmp_path, capsys):
    from mbplots.cli import main

    path = write_aggregate(tmp_path / "agg.csv")
    assert main([str(path), str(tmp_path / "figs")]) == 0
    out = capsys.readouterr().out
    assert "clutter" in out and "cardinality" in out
    assert main([str(tmp_path / "missing.csv"), str(tmp_path / "figs")]) == 2
    err = capsys.readouterr().err
    assert "not found" in err
