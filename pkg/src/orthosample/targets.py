"""Target densities: score/log-density interface, the 2-D benchmark target,
and the penalty-tempered family that concentrates on a level set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ensemble import ParticleEnsemble
from .errors import NonPositiveEta
from .geometry import ConstraintSpec

Array = np.ndarray


@dataclass(frozen=True)
class TargetDensity:
    """Unnormalized log-density and its gradient (the score).

    Log-densities are defined up to an additive constant; only scores and
    differences ever enter the samplers. ``score_batch``/``log_density_batch``
    optionally evaluate (n, d) arrays at once for hot loops.
    """

    log_density: Callable[[Array], float]
    score: Callable[[Array], Array]
    dim: int
    score_batch: Optional[Callable[[Array], Array]] = None
    log_density_batch: Optional[Callable[[Array], Array]] = None

    def scores(self, points: Array) -> Array:
        """Score on an (n, d) array, returning (n, d)."""
        if self.score_batch is not None:
            return np.asarray(self.score_batch(points), dtype=float)
        return np.stack([np.asarray(self.score(x), dtype=float) for x in points])

    def log_densities(self, points: Array) -> Array:
        if self.log_density_batch is not None:
            return np.asarray(self.log_density_batch(points), dtype=float)
        return np.array([self.log_density(x) for x in points], dtype=float)


@dataclass(frozen=True)
class TemperedTarget:
    """Base density multiplied by exp(-(g(x)-z)^2 / (2 eta)).

    Wraps the base callables, so any target gains the tempered family. Its
    score is s(x) = s_base(x) - (g(x)-z)/eta * grad_g(x); as eta -> 0 the
    density concentrates on the level set {g = z}.
    """

    base: TargetDensity
    constraint: ConstraintSpec
    eta: float
    z: float

    def __post_init__(self):
        if not self.eta > 0:
            raise NonPositiveEta(f"eta must be positive, got {self.eta}")

    @property
    def dim(self) -> int:
        return self.base.dim

    def log_density(self, x: Array) -> float:
        g = float(self.constraint.g(x))
        return float(self.base.log_density(x)) - (g - self.z) ** 2 / (2.0 * self.eta)

    def score(self, x: Array) -> Array:
        g = float(self.constraint.g(x))
        grad = np.asarray(self.constraint.grad_g(x), dtype=float)
        return np.asarray(self.base.score(x), dtype=float) - ((g - self.z) / self.eta) * grad

    def scores(self, points: Array) -> Array:
        g = self.constraint.values(points)
        grads = self.constraint.gradients(points)
        return self.base.scores(points) - ((g - self.z) / self.eta)[:, None] * grads

    def log_densities(self, points: Array) -> Array:
        g = self.constraint.values(points)
        return self.base.log_densities(points) - (g - self.z) ** 2 / (2.0 * self.eta)


def tempered_target(base: TargetDensity, c: ConstraintSpec, eta: float, z: float) -> TemperedTarget:
    """Penalty-tempered family around the level set {g = z}."""
    return TemperedTarget(base=base, constraint=c, eta=eta, z=z)


# --- 2-D benchmark: push a standard Gaussian through (y1, y2) = (x1 + x2^3, x2).
# The map has unit Jacobian determinant, so
#   log pi(x) = -((x1 + x2^3)^2 + x2^2)/2 - log(2 pi)
# and the constraint of interest is g(x) = x1 + x2^3 = 0.


def synthetic_target() -> TargetDensity:
    """The transformed-Gaussian benchmark density in d=2 with analytic score."""

    def log_density(x: Array) -> float:
        x = np.asarray(x, dtype=float)
        u = x[0] + x[1] ** 3
        return -0.5 * (u * u + x[1] * x[1]) - np.log(2.0 * np.pi)

    def score(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        u = x[0] + x[1] ** 3
        return np.array([-u, -3.0 * x[1] ** 2 * u - x[1]])

    def log_density_batch(pts: Array) -> Array:
        pts = np.asarray(pts, dtype=float)
        u = pts[:, 0] + pts[:, 1] ** 3
        return -0.5 * (u * u + pts[:, 1] ** 2) - np.log(2.0 * np.pi)

    def score_batch(pts: Array) -> Array:
        pts = np.asarray(pts, dtype=float)
        u = pts[:, 0] + pts[:, 1] ** 3
        return np.stack([-u, -3.0 * pts[:, 1] ** 2 * u - pts[:, 1]], axis=1)

    return TargetDensity(
        log_density=log_density,
        score=score,
        dim=2,
        score_batch=score_batch,
        log_density_batch=log_density_batch,
    )


def synthetic_constraint(grad_floor: float = 1e-10) -> ConstraintSpec:
    """g(x) = x1 + x2^3, the level-set constraint paired with the benchmark target.

    grad g = (1, 3 x2^2) never vanishes, so the projector is defined everywhere.
    """

    def g(x: Array) -> float:
        x = np.asarray(x, dtype=float)
        return float(x[0] + x[1] ** 3)

    def grad_g(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.array([1.0, 3.0 * x[1] ** 2])

    def hess_g(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return np.array([[0.0, 0.0], [0.0, 6.0 * x[1]]])

    def g_batch(pts: Array) -> Array:
        pts = np.asarray(pts, dtype=float)
        return pts[:, 0] + pts[:, 1] ** 3

    def grad_batch(pts: Array) -> Array:
        pts = np.asarray(pts, dtype=float)
        out = np.empty_like(pts)
        out[:, 0] = 1.0
        out[:, 1] = 3.0 * pts[:, 1] ** 2
        return out

    def hess_batch(pts: Array) -> Array:
        pts = np.asarray(pts, dtype=float)
        out = np.zeros((len(pts), 2, 2))
        out[:, 1, 1] = 6.0 * pts[:, 1]
        return out

    return ConstraintSpec(
        g=g, grad_g=grad_g, hess_g=hess_g, grad_floor=grad_floor,
        g_batch=g_batch, grad_batch=grad_batch, hess_batch=hess_batch,
    )


def synthetic_ground_truth(n: int, seed: int) -> ParticleEnsemble:
    """Exact draws from the benchmark target conditioned on g = 0.

    With y ~ N(0, 1), the point (-y^3, y) lies on the manifold by construction
    and follows the conditioned measure exactly.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n)
    return ParticleEnsemble(points=np.stack([-(y**3), y], axis=1))
