"""Experiment orchestration: config loading, initialization, output files.

A run consumes one JSON config document and leaves three artifacts in its
output directory: samples.csv (final particles), metrics.csv (tidy
iteration/metric/value rows) and run.json (full resolved metadata).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .ensemble import FLOAT_FORMAT, ParticleEnsemble
from .errors import ConfigError
from .geometry import PsiParams
from .kernels import KernelSpec
from .samplers import METHODS, RunRecord, SamplerConfig, run_sampler
from .targets import synthetic_constraint, synthetic_ground_truth, synthetic_target

CONFIG_VERSION = 1

DEFAULT_OFF_MANIFOLD_CENTER = (1.5, 1.5)
DEFAULT_OFF_MANIFOLD_SCALE = 0.1

SAMPLES_FILE = "samples.csv"
METRICS_FILE = "metrics.csv"
RUN_FILE = "run.json"


@dataclass(frozen=True)
class InitSpec:
    """on_manifold draws exact conditioned samples; off_manifold a Gaussian cloud."""

    kind: str
    center: tuple = DEFAULT_OFF_MANIFOLD_CENTER
    scale: float = DEFAULT_OFF_MANIFOLD_SCALE

    def __post_init__(self):
        if self.kind not in ("on_manifold", "off_manifold"):
            raise ConfigError(f"init.kind must be on_manifold or off_manifold, got {self.kind!r}")
        if self.kind == "off_manifold" and not self.scale > 0:
            raise ConfigError(f"init.scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class ExperimentConfig:
    target: str
    sampler: SamplerConfig
    init: InitSpec
    ground_truth_n: int
    output_dir: Path

    def __post_init__(self):
        if self.target != "synthetic":
            raise ConfigError(f"target must be 'synthetic', got {self.target!r}")
        if self.ground_truth_n < 100:
            raise ConfigError(f"ground_truth_n must be >= 100, got {self.ground_truth_n}")


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"missing key {key!r} in {where}")
    return doc[key]


def parse_config(doc: dict, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Validate a parsed JSON document against the config schema."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    version = _require(doc, "version", "config")
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version}, expected {CONFIG_VERSION}")

    sampler_doc = _require(doc, "sampler", "config")
    method = _require(sampler_doc, "method", "sampler")
    if method not in METHODS:
        raise ConfigError(f"sampler.method must be one of {METHODS}, got {method!r}")
    try:
        psi = PsiParams(
            alpha=float(sampler_doc.get("alpha", 100.0)),
            beta=float(sampler_doc.get("beta", 0.0)),
        )
        bandwidth = sampler_doc.get("kernel_bandwidth", "median")
        if not isinstance(bandwidth, str):
            bandwidth = float(bandwidth)
        sampler = SamplerConfig(
            method=method,
            eta=float(_require(sampler_doc, "eta", "sampler")),
            psi=psi,
            n_particles=int(sampler_doc.get("n_particles", 50)),
            n_iters=int(_require(sampler_doc, "n_iters", "sampler")),
            seed=int(sampler_doc.get("seed", 0)),
            kernel=KernelSpec(bandwidth=bandwidth),
            second_order_free=bool(sampler_doc.get("second_order_free", False)),
            record_every=int(sampler_doc.get("record_every", 100)),
        )
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(f"invalid sampler settings: {err}") from err

    init_doc = doc.get("init", {"kind": "on_manifold"})
    init = InitSpec(
        kind=_require(init_doc, "kind", "init"),
        center=tuple(init_doc.get("center", DEFAULT_OFF_MANIFOLD_CENTER)),
        scale=float(init_doc.get("scale", DEFAULT_OFF_MANIFOLD_SCALE)),
    )

    out = Path(_require(doc, "output_dir", "config"))
    if base_dir is not None and not out.is_absolute():
        out = base_dir / out
    return ExperimentConfig(
        target=doc.get("target", "synthetic"),
        sampler=sampler,
        init=init,
        ground_truth_n=int(doc.get("ground_truth_n", 2000)),
        output_dir=out,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file {path} is not valid JSON: {err}") from err
    return parse_config(doc, base_dir=path.parent)


def initial_ensemble(cfg: ExperimentConfig) -> ParticleEnsemble:
    """Starting particles; uses a stream derived from seed+1 so the run's own
    noise stream (seeded by the config seed) stays untouched."""
    n = cfg.sampler.n_particles
    init_seed = cfg.sampler.seed + 1
    if cfg.init.kind == "on_manifold":
        return synthetic_ground_truth(n, seed=init_seed)
    rng = np.random.default_rng(init_seed)
    center = np.asarray(cfg.init.center, dtype=float)
    return ParticleEnsemble(points=center + cfg.init.scale * rng.standard_normal((n, center.size)))


def write_metrics_csv(record: RunRecord, path) -> None:
    """Tidy (iteration, metric, value) rows with a header."""
    lines = ["iteration,metric,value"]
    for iteration, values in record.metric_series:
        for name in sorted(values):
            lines.append(f"{iteration},{name},{FLOAT_FORMAT % values[name]}")
    Path(path).write_text("\n".join(lines) + "\n")


def run_experiment(cfg: ExperimentConfig) -> tuple[RunRecord, dict]:
    """Execute the configured run and write samples.csv, metrics.csv, run.json."""
    target = synthetic_target()
    constraint = synthetic_constraint()
    init = initial_ensemble(cfg)

    record = run_sampler(cfg.sampler, target, constraint, init)

    out = cfg.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as err:
        raise ConfigError(f"output_dir {out} is not writable: {err}") from err

    record.final_ensemble.write_csv(out / SAMPLES_FILE)
    write_metrics_csv(record, out / METRICS_FILE)

    metadata = record.to_metadata()
    metadata["target"] = cfg.target
    metadata["init"] = {"kind": cfg.init.kind, "center": list(cfg.init.center), "scale": cfg.init.scale}
    metadata["ground_truth_n"] = cfg.ground_truth_n
    metadata["config_version"] = CONFIG_VERSION
    (out / RUN_FILE).write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")

    paths = {
        "samples": out / SAMPLES_FILE,
        "metrics": out / METRICS_FILE,
        "run": out / RUN_FILE,
    }
    return record, paths
