"""Particle and chain update rules.

Baselines (Langevin, SVGD) move freely in the ambient space; the constrained
variants split every velocity into a component along grad g that drives the
constraint value to zero at rate psi(g), and a projected component that does
the usual score-following in the tangent space. An annealed random-walk
Metropolis sampler over the tempered family serves as a slow reference for
the conditioned measure.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensemble import ParticleEnsemble
from .errors import BadSchedule, DimensionMismatch, SamplerRuntimeError, UnstableStepSize
from .geometry import (
    ConstraintSpec,
    PsiParams,
    batch_geometry,
    correction_field,
    projection_matrices,
    projection_matrix,
    psi,
    psi_batch,
)
from .kernels import KernelSpec, pairwise_grad_y_rbf, rbf_matrix
from .targets import TargetDensity, tempered_target

Array = np.ndarray

METHODS = ("langevin", "o_langevin", "svgd", "o_svgd", "annealed_mh")

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class SamplerConfig:
    method: str
    eta: float
    psi: PsiParams = PsiParams(alpha=100.0, beta=0.0)
    n_particles: int = 50
    n_iters: int = 1000
    seed: int = 0
    kernel: KernelSpec = KernelSpec()
    second_order_free: bool = False
    record_every: int = 100

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.n_particles < 1:
            raise ValueError(f"n_particles must be >= 1, got {self.n_particles}")
        if self.n_iters < 0:
            raise ValueError(f"n_iters must be >= 0, got {self.n_iters}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")

    def stability_warnings(self) -> list[str]:
        """Warnings for the beta=0 noiseless recursion g <- (1 - eta*alpha) g.

        eta*alpha > 2 makes that recursion divergent and is rejected by the
        runner; eta*alpha in (1, 2] oscillates but contracts, so it only
        warns. The practical settings sit exactly at eta*alpha = 1.
        """
        notes = []
        if self.method in ("o_langevin", "o_svgd") and self.psi.beta == 0.0:
            product = self.eta * self.psi.alpha
            if product > 2.0:
                raise UnstableStepSize(
                    f"eta*alpha = {product:.3g} > 2: the beta=0 constraint recursion diverges"
                )
            if product > 1.0:
                notes.append(
                    f"eta*alpha = {product:.3g} > 1: constraint value will oscillate"
                )
        return notes


@dataclass(frozen=True)
class RunRecord:
    """Everything one sampler run produced, immutable once constructed."""

    config: SamplerConfig
    snapshots: tuple  # ((iteration, ParticleEnsemble), ...)
    metric_series: tuple  # ((iteration, {name: value}), ...)
    wall_time: float
    rng_algorithm: str = RNG_ALGORITHM
    warnings: tuple = ()

    @property
    def final_ensemble(self) -> ParticleEnsemble:
        return self.snapshots[-1][1]

    def to_metadata(self) -> dict:
        """JSON-ready metadata document for run.json."""
        cfg = self.config
        return {
            "method": cfg.method,
            "eta": cfg.eta,
            "alpha": cfg.psi.alpha,
            "beta": cfg.psi.beta,
            "n_particles": cfg.n_particles,
            "n_iters": cfg.n_iters,
            "seed": cfg.seed,
            "kernel_bandwidth": cfg.kernel.bandwidth,
            "second_order_free": cfg.second_order_free,
            "record_every": cfg.record_every,
            "rng_algorithm": self.rng_algorithm,
            "wall_time_s": self.wall_time,
            "warnings": list(self.warnings),
            "metric_series": [[it, dict(vals)] for it, vals in self.metric_series],
        }


# --- single-point update rules ---


def langevin_step(x: Array, target: TargetDensity, eta: float, noise: Array) -> Array:
    """x + eta * score(x) + sqrt(2 eta) * noise, with caller-supplied noise."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    x = np.asarray(x, dtype=float)
    return x + eta * np.asarray(target.score(x), dtype=float) + np.sqrt(2.0 * eta) * np.asarray(noise, dtype=float)


def o_langevin_step(
    x: Array,
    target: TargetDensity,
    c: ConstraintSpec,
    cfg: SamplerConfig,
    noise: Array,
) -> Array:
    """One constrained Langevin update.

    x' = x + eta * (v_sharp + D score + r) + sqrt(2 eta) D noise; the injected
    noise is projected, so grad g(x)^T (noise contribution) = 0. With
    ``second_order_free`` the Hessian-dependent r term is dropped.
    """
    x = np.asarray(x, dtype=float)
    noise = np.asarray(noise, dtype=float)
    grad = np.asarray(c.grad_g(x), dtype=float)
    proj = projection_matrix(grad, c.grad_floor)
    g_val = float(c.g(x))
    drift = -psi(g_val, cfg.psi) * grad / float(grad @ grad)
    drift = drift + proj @ np.asarray(target.score(x), dtype=float)
    if not cfg.second_order_free:
        drift = drift + correction_field(x, c)
    return x + cfg.eta * drift + np.sqrt(2.0 * cfg.eta) * (proj @ noise)


# --- ensemble update rules ---


def svgd_velocities(points: Array, target: TargetDensity, h: float) -> Array:
    """Plain SVGD velocity field: (1/n) sum_j [k(x_i,x_j) s(x_j) + grad_{x_j} k(x_i,x_j)]."""
    points = np.asarray(points, dtype=float)
    kmat = rbf_matrix(points, h)
    grads = pairwise_grad_y_rbf(points, h, kmat)
    scores = target.scores(points)
    return (kmat @ scores + grads.sum(axis=1)) / points.shape[0]


def svgd_step(
    ensemble: ParticleEnsemble, target: TargetDensity, eta: float, kernel: KernelSpec
) -> ParticleEnsemble:
    """All particles moved simultaneously from the pre-step ensemble; eta=0 is a no-op."""
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    h = kernel.resolve(ensemble.points)
    vel = svgd_velocities(ensemble.points, target, h)
    return ParticleEnsemble(points=ensemble.points + eta * vel)


def o_svgd_velocities(
    points: Array,
    target: TargetDensity,
    c: ConstraintSpec,
    p: PsiParams,
    h: float,
    second_order_free: bool = False,
) -> Array:
    """Constrained SVGD velocity field.

    v_i = v_sharp(x_i) + (1/n) sum_j [k_perp(x_i,x_j) s(x_j) + div_y k_perp(x_i,x_j)].
    Both projected terms carry D(x_i) on the left, so grad g(x_i)^T v_i equals
    -psi(g(x_i)) up to roundoff. The second-order-free variant swaps the kernel
    divergence for its Hessian-free surrogate, dropping the k(x_i,x_j) r(x_j)
    contribution.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    g_vals, grads, projectors, corrections = batch_geometry(points, c)
    scores = target.scores(points)

    kmat = rbf_matrix(points, h)
    kgrads = pairwise_grad_y_rbf(points, h, kmat)

    # inner[i, j] = D_j (k_ij s_j + grad_y k_ij) (+ k_ij r_j unless surrogate)
    payload = kmat[:, :, None] * scores[None, :, :] + kgrads
    inner = np.einsum("jab,ijb->ija", projectors, payload)
    if not second_order_free:
        inner = inner + kmat[:, :, None] * corrections[None, :, :]
    mean_field = inner.sum(axis=1) / n

    norm_sq = np.einsum("nd,nd->n", grads, grads)
    vsharp = -(psi_batch(g_vals, p) / norm_sq)[:, None] * grads
    return vsharp + np.einsum("iab,ib->ia", projectors, mean_field)


def o_svgd_step(
    ensemble: ParticleEnsemble,
    target: TargetDensity,
    c: ConstraintSpec,
    cfg: SamplerConfig,
) -> ParticleEnsemble:
    """Simultaneous constrained SVGD update of the whole ensemble."""
    h = cfg.kernel.resolve(ensemble.points)
    vel = o_svgd_velocities(
        ensemble.points, target, c, cfg.psi, h, second_order_free=cfg.second_order_free
    )
    return ParticleEnsemble(points=ensemble.points + cfg.eta * vel)


# --- annealed Metropolis reference for the conditioned measure ---


def annealed_mh_reference(
    target: TargetDensity,
    c: ConstraintSpec,
    z: float,
    eta_schedule,
    steps_per_eta: int,
    n_chains: int,
    seed: int,
    c_prop: float = 2.4,
    tangential_scale: float = 0.5,
    init: Optional[ParticleEnsemble] = None,
) -> ParticleEnsemble:
    """Random-walk Metropolis through the tempered ladder, coldest last.

    Each temperature eta targets the tempered density concentrated at
    {g = z}; chains carry their state from one rung to the next. Proposals
    move c_prop * sqrt(eta) along the local grad-g direction (capped at
    c_prop, so near-infinite temperatures degrade to a plain random walk
    instead of an infinite-variance one) and tangential_scale along the
    projected complement, and are accepted with the symmetric-proposal
    ratio min(1, exp(delta log density)). This is an oracle and diagnostic,
    not a performance contender.
    """
    schedule = [float(e) for e in eta_schedule]
    if len(schedule) == 0 or any(e <= 0 for e in schedule):
        raise BadSchedule(f"schedule must be positive, got {schedule}")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise BadSchedule(f"schedule must be strictly decreasing, got {schedule}")
    if steps_per_eta < 1:
        raise ValueError(f"steps_per_eta must be >= 1, got {steps_per_eta}")

    rng = np.random.default_rng(seed)
    if init is None:
        x = 2.0 * rng.standard_normal((n_chains, target.dim))
    else:
        x = init.points.copy()
        if x.shape != (n_chains, target.dim):
            raise DimensionMismatch(
                f"init shape {x.shape} does not match ({n_chains}, {target.dim})"
            )

    for eta in schedule:
        tempered = tempered_target(target, c, eta=eta, z=z)
        log_p = tempered.log_densities(x)
        sigma_g = c_prop * min(np.sqrt(eta), 1.0)
        for _ in range(steps_per_eta):
            grads = c.gradients(x)
            units = grads / np.linalg.norm(grads, axis=1, keepdims=True)
            projectors = projection_matrices(grads, c.grad_floor)
            z_g = rng.standard_normal(x.shape[0])
            xi = rng.standard_normal(x.shape)
            u_accept = rng.random(x.shape[0])
            proposal = (
                x
                + sigma_g * z_g[:, None] * units
                + tangential_scale * np.einsum("nij,nj->ni", projectors, xi)
            )
            log_q = tempered.log_densities(proposal)
            accept = np.log(u_accept) < log_q - log_p
            x[accept] = proposal[accept]
            log_p[accept] = log_q[accept]
    return ParticleEnsemble(points=x)


# --- run orchestration ---


def _mae_of(points: Array, c: ConstraintSpec) -> float:
    return float(np.mean(np.abs(c.values(points))))


def run_sampler(
    cfg: SamplerConfig,
    target: TargetDensity,
    c: Optional[ConstraintSpec],
    init: ParticleEnsemble,
) -> RunRecord:
    """Iterate the configured update, recording snapshots and per-snapshot MAE.

    Deterministic given cfg.seed: one standard-normal d-vector per particle
    per iteration, drawn in particle-index order from a single stream. The
    unconstrained baselines still record MAE against ``c`` when provided.
    Step failures are re-raised with the iteration index attached.

    The ``annealed_mh`` method runs a three-rung factor-10 ladder ending at
    cfg.eta with the iteration budget split evenly across rungs.
    """
    if init.d != target.dim:
        raise DimensionMismatch(f"init dimension {init.d} != target dimension {target.dim}")
    run_warnings = cfg.stability_warnings()
    for note in run_warnings:
        warnings.warn(note, stacklevel=2)

    if cfg.method == "annealed_mh":
        return _run_annealed(cfg, target, c, init, run_warnings)

    rng = np.random.default_rng(cfg.seed)
    x = init.points.copy()
    n = x.shape[0]
    start = time.perf_counter()

    snapshots = [(0, ParticleEnsemble(points=x.copy()))]
    metric_series = [(0, {"mae_g": _mae_of(x, c)} if c is not None else {})]

    sqrt_step = np.sqrt(2.0 * cfg.eta)
    for t in range(1, cfg.n_iters + 1):
        # divergence shows up as overflow before the finiteness check below
        # catches it; the intermediate warnings carry no extra information
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                x = _advance(cfg, target, c, x, rng, sqrt_step)
            if not np.all(np.isfinite(x)):
                raise SamplerRuntimeError("ensemble left the finite range")
        except Exception as err:
            raise SamplerRuntimeError(f"iteration {t}: {err}") from err
        if t % cfg.record_every == 0 or t == cfg.n_iters:
            snapshots.append((t, ParticleEnsemble(points=x.copy())))
            metric_series.append((t, {"mae_g": _mae_of(x, c)} if c is not None else {}))

    return RunRecord(
        config=cfg,
        snapshots=tuple(snapshots),
        metric_series=tuple(metric_series),
        wall_time=time.perf_counter() - start,
        warnings=tuple(run_warnings),
    )


def _advance(cfg, target, c, x, rng, sqrt_step):
    n = x.shape[0]
    if cfg.method == "langevin":
        noise = rng.standard_normal((n, target.dim))
        return x + cfg.eta * target.scores(x) + sqrt_step * noise
    if cfg.method == "o_langevin":
        noise = rng.standard_normal((n, target.dim))
        g_vals, grads, projectors, corrections = batch_geometry(x, c)
        norm_sq = np.einsum("nd,nd->n", grads, grads)
        drift = -(psi_batch(g_vals, cfg.psi) / norm_sq)[:, None] * grads
        drift += np.einsum("nij,nj->ni", projectors, target.scores(x))
        if not cfg.second_order_free:
            drift += corrections
        return x + cfg.eta * drift + sqrt_step * np.einsum("nij,nj->ni", projectors, noise)
    if cfg.method == "svgd":
        h = cfg.kernel.resolve(x)
        return x + cfg.eta * svgd_velocities(x, target, h)
    h = cfg.kernel.resolve(x)
    return x + cfg.eta * o_svgd_velocities(
        x, target, c, cfg.psi, h, second_order_free=cfg.second_order_free
    )


def _run_annealed(cfg, target, c, init, run_warnings) -> RunRecord:
    start = time.perf_counter()
    schedule = [cfg.eta * 100.0, cfg.eta * 10.0, cfg.eta]
    steps = max(1, cfg.n_iters // len(schedule))
    try:
        final = annealed_mh_reference(
            target, c, z=0.0, eta_schedule=schedule, steps_per_eta=steps,
            n_chains=init.n, seed=cfg.seed, init=init,
        )
    except Exception as err:
        raise SamplerRuntimeError(f"iteration 0: {err}") from err
    total = steps * len(schedule)
    snapshots = ((0, init), (total, final))
    metric_series = (
        (0, {"mae_g": _mae_of(init.points, c)}),
        (total, {"mae_g": _mae_of(final.points, c)}),
    )
    return RunRecord(
        config=cfg,
        snapshots=snapshots,
        metric_series=metric_series,
        wall_time=time.perf_counter() - start,
        warnings=tuple(run_warnings),
    )
