"""Figure rendering for run directories.

Turns the delimited outputs of a run into static matplotlib figures saved
next to them: a sample scatter against the exact conditioned samples and the
manifold curve, and the recorded metric traces.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .ensemble import ParticleEnsemble
from .errors import ConfigError
from .experiment import METRICS_FILE, RUN_FILE, SAMPLES_FILE
from .targets import synthetic_ground_truth

FIGURE_SEED = 90210


def render_run_figures(run_dir, out_dir=None) -> list[Path]:
    """Render samples.png and metrics.png for a completed run directory."""
    run_dir = Path(run_dir)
    out_dir = Path(out_dir) if out_dir is not None else run_dir
    samples_path = run_dir / SAMPLES_FILE
    if not samples_path.exists():
        raise ConfigError(f"{run_dir} has no {SAMPLES_FILE}; not a run directory?")
    out_dir.mkdir(parents=True, exist_ok=True)

    metadata = {}
    run_json = run_dir / RUN_FILE
    if run_json.exists():
        metadata = json.loads(run_json.read_text())

    written = [_samples_figure(samples_path, out_dir, metadata)]
    metrics_path = run_dir / METRICS_FILE
    if metrics_path.exists():
        figure = _metrics_figure(metrics_path, out_dir, metadata)
        if figure is not None:
            written.append(figure)
    return written


def _samples_figure(samples_path: Path, out_dir: Path, metadata: dict) -> Path:
    samples = ParticleEnsemble.read_csv(samples_path)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    if samples.d == 2:
        gt_n = int(metadata.get("ground_truth_n", 2000))
        gt = synthetic_ground_truth(gt_n, seed=FIGURE_SEED)
        ax.scatter(gt.points[:, 0], gt.points[:, 1], s=4, alpha=0.25,
                   color="0.6", label="ground truth")
        grid = np.linspace(-2.5, 2.5, 400)
        ax.plot(-(grid**3), grid, color="0.3", lw=1.0, label="manifold")
        ax.scatter(samples.points[:, 0], samples.points[:, 1], s=14,
                   color="tab:red", label=metadata.get("method", "samples"))
        ax.set_xlim(-8, 8)
        ax.set_ylim(-3, 3)
        ax.legend(loc="upper right", fontsize=8)
    else:
        ax.scatter(samples.points[:, 0], samples.points[:, 1 % samples.d], s=14)
    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    ax.set_title("final samples")
    path = out_dir / "samples.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _metrics_figure(metrics_path: Path, out_dir: Path, metadata: dict) -> Path | None:
    rows = metrics_path.read_text().strip().splitlines()[1:]
    series: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        iteration, name, value = row.split(",")
        series.setdefault(name, []).append((int(iteration), float(value)))
    if not series:
        return None
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for name, values in sorted(series.items()):
        iters, vals = zip(*values)
        ax.plot(iters, vals, label=name)
    if all(v > 0 for values in series.values() for _, v in values):
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("value")
    ax.set_title(metadata.get("method", "metrics"))
    ax.legend(fontsize=8)
    path = out_dir / "metrics.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
