"""Pointwise geometry of the orthogonal decomposition near a level set.

Everything here is built from a scalar constraint g and its first two
derivatives: the drift that pulls points toward {g = 0}, the tangent-space
projector, the divergence correction field, and the exact identities that
tie those three together.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import SingularGradient

Array = np.ndarray


@dataclass(frozen=True)
class PsiParams:
    """Parameters of the odd drift function alpha * sign(z) * |z|^(1+beta).

    beta = 0 gives the plain linear drift alpha*z and is the setting used
    in practice; beta in (0, 1] gives polynomial decay of the constraint
    value instead of exponential.
    """

    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class ConstraintSpec:
    """Scalar constraint g with analytic gradient and Hessian.

    The optional ``*_batch`` callables evaluate whole (n, d) point arrays at
    once; when absent, batch helpers fall back to a per-point loop. They must
    agree with the pointwise callables.
    """

    g: Callable[[Array], float]
    grad_g: Callable[[Array], Array]
    hess_g: Callable[[Array], Array]
    grad_floor: float = 1e-10
    g_batch: Optional[Callable[[Array], Array]] = None
    grad_batch: Optional[Callable[[Array], Array]] = None
    hess_batch: Optional[Callable[[Array], Array]] = None

    def values(self, points: Array) -> Array:
        """g evaluated on an (n, d) array, returning shape (n,)."""
        if self.g_batch is not None:
            return np.asarray(self.g_batch(points), dtype=float)
        return np.array([self.g(x) for x in points], dtype=float)

    def gradients(self, points: Array) -> Array:
        """grad g on an (n, d) array, returning shape (n, d)."""
        if self.grad_batch is not None:
            return np.asarray(self.grad_batch(points), dtype=float)
        return np.stack([np.asarray(self.grad_g(x), dtype=float) for x in points])

    def hessians(self, points: Array) -> Array:
        """Hessian of g on an (n, d) array, returning shape (n, d, d)."""
        if self.hess_batch is not None:
            return np.asarray(self.hess_batch(points), dtype=float)
        return np.stack([np.asarray(self.hess_g(x), dtype=float) for x in points])


@dataclass(frozen=True)
class GeometryReport:
    """Projector, correction field and identity residuals at one point.

    Residual magnitudes are reported as computed; nothing is clipped.
    """

    point: Array
    d_matrix: Array
    r_vector: Array
    identity_residuals: dict = field(default_factory=dict)


def psi(z: float, p: PsiParams) -> float:
    """Odd drift alpha * sign(z) * |z|^(1+beta); reduces to alpha*z at beta=0."""
    if p.beta == 0.0:
        return p.alpha * z
    return p.alpha * np.sign(z) * np.abs(z) ** (1.0 + p.beta)


def psi_batch(z: Array, p: PsiParams) -> Array:
    """Vectorized :func:`psi` over an array of constraint values."""
    z = np.asarray(z, dtype=float)
    if p.beta == 0.0:
        return p.alpha * z
    return p.alpha * np.sign(z) * np.abs(z) ** (1.0 + p.beta)


def projection_matrix(grad: Array, grad_floor: float) -> Array:
    """Orthogonal projector I - grad grad^T / ||grad||^2 onto grad's complement.

    Raises SingularGradient when ||grad|| < grad_floor: the projector is
    genuinely undefined at critical points of g.
    """
    grad = np.asarray(grad, dtype=float)
    norm_sq = float(grad @ grad)
    if norm_sq < grad_floor**2:
        raise SingularGradient(
            f"gradient norm {np.sqrt(norm_sq):.3e} below floor {grad_floor:.3e}"
        )
    return np.eye(grad.size) - np.outer(grad, grad) / norm_sq


def projection_matrices(grads: Array, grad_floor: float) -> Array:
    """Projectors for an (n, d) array of gradients, returning (n, d, d)."""
    grads = np.asarray(grads, dtype=float)
    norm_sq = np.einsum("nd,nd->n", grads, grads)
    if np.any(norm_sq < grad_floor**2):
        i = int(np.argmin(norm_sq))
        raise SingularGradient(
            f"gradient norm {np.sqrt(norm_sq[i]):.3e} below floor "
            f"{grad_floor:.3e} at batch index {i}"
        )
    d = grads.shape[1]
    return np.eye(d)[None, :, :] - grads[:, :, None] * grads[:, None, :] / norm_sq[:, None, None]


def v_sharp(x: Array, c: ConstraintSpec, p: PsiParams) -> Array:
    """Velocity component along grad g driving g toward zero.

    Returns -psi(g(x)) * grad(x) / ||grad(x)||^2, so that
    grad(x)^T v_sharp(x) = -psi(g(x)) holds by construction.
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(c.grad_g(x), dtype=float)
    norm_sq = float(grad @ grad)
    if norm_sq < c.grad_floor**2:
        raise SingularGradient(
            f"gradient norm {np.sqrt(norm_sq):.3e} below floor {c.grad_floor:.3e}"
        )
    return -psi(float(c.g(x)), p) * grad / norm_sq


def correction_field(x: Array, c: ConstraintSpec) -> Array:
    """Divergence of the projector field, component i = sum_j d_j D_ij(x).

    Uses the closed form
        r = -(H grad)/||grad||^2 - (tr H/||grad||^2) grad
            + 2 (grad^T H grad / ||grad||^4) grad
    with H the Hessian of g. Equals the column-wise numerical divergence of
    the projector; the finite-difference route lives in ``oracles`` and is
    used only as a test oracle.
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(c.grad_g(x), dtype=float)
    norm_sq = float(grad @ grad)
    if norm_sq < c.grad_floor**2:
        raise SingularGradient(
            f"gradient norm {np.sqrt(norm_sq):.3e} below floor {c.grad_floor:.3e}"
        )
    hess = np.asarray(c.hess_g(x), dtype=float)
    hg = hess @ grad
    return -hg / norm_sq - (np.trace(hess) / norm_sq) * grad + (2.0 * (grad @ hg) / norm_sq**2) * grad


def correction_fields(grads: Array, hessians: Array, grad_floor: float) -> Array:
    """Vectorized closed-form correction field from (n, d) grads and (n, d, d) Hessians."""
    grads = np.asarray(grads, dtype=float)
    hessians = np.asarray(hessians, dtype=float)
    norm_sq = np.einsum("nd,nd->n", grads, grads)
    if np.any(norm_sq < grad_floor**2):
        i = int(np.argmin(norm_sq))
        raise SingularGradient(
            f"gradient norm {np.sqrt(norm_sq[i]):.3e} below floor "
            f"{grad_floor:.3e} at batch index {i}"
        )
    hg = np.einsum("nij,nj->ni", hessians, grads)
    traces = np.einsum("nii->n", hessians)
    ghg = np.einsum("nd,nd->n", grads, hg)
    return (
        -hg / norm_sq[:, None]
        - (traces / norm_sq)[:, None] * grads
        + (2.0 * ghg / norm_sq**2)[:, None] * grads
    )


def check_identities(x: Array, c: ConstraintSpec) -> GeometryReport:
    """Evaluate the three exact identities binding D, r and the Hessian.

    Residuals reported:
      * ``d_annihilates_grad`` - ||D grad||
      * ``d_idempotent``       - ||D^2 - D||_F
      * ``divergence_identity``- |grad^T r + tr(D H D)|
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(c.grad_g(x), dtype=float)
    d_matrix = projection_matrix(grad, c.grad_floor)
    r_vector = correction_field(x, c)
    hess = np.asarray(c.hess_g(x), dtype=float)
    residuals = {
        "d_annihilates_grad": float(np.linalg.norm(d_matrix @ grad)),
        "d_idempotent": float(np.linalg.norm(d_matrix @ d_matrix - d_matrix)),
        "divergence_identity": float(
            abs(grad @ r_vector + np.trace(d_matrix @ hess @ d_matrix))
        ),
    }
    return GeometryReport(point=x, d_matrix=d_matrix, r_vector=r_vector, identity_residuals=residuals)


def batch_geometry(points: Array, c: ConstraintSpec) -> tuple[Array, Array, Array, Array]:
    """(g, grads, projectors, corrections) for an (n, d) point array.

    Shared hot path for the constrained samplers and the sample metrics.
    """
    points = np.asarray(points, dtype=float)
    g_vals = c.values(points)
    grads = c.gradients(points)
    hessians = c.hessians(points)
    projectors = projection_matrices(grads, c.grad_floor)
    corrections = correction_fields(grads, hessians, c.grad_floor)
    return g_vals, grads, projectors, corrections


def affine_constraint(a: Array, b: float = 0.0, grad_floor: float = 1e-10) -> ConstraintSpec:
    """Affine constraint g(x) = a^T x + b: constant gradient, zero Hessian."""
    a = np.asarray(a, dtype=float)
    d = a.size
    return ConstraintSpec(
        g=lambda x: float(a @ np.asarray(x, dtype=float)) + b,
        grad_g=lambda x: a.copy(),
        hess_g=lambda x: np.zeros((d, d)),
        grad_floor=grad_floor,
        g_batch=lambda pts: np.asarray(pts, dtype=float) @ a + b,
        grad_batch=lambda pts: np.broadcast_to(a, (len(pts), d)).copy(),
        hess_batch=lambda pts: np.zeros((len(pts), d, d)),
    )


def sphere_constraint(dim: int, grad_floor: float = 1e-10) -> ConstraintSpec:
    """g(x) = ||x||^2 / 2 - level sets are spheres; origin is a critical point."""
    return ConstraintSpec(
        g=lambda x: 0.5 * float(np.asarray(x, dtype=float) @ np.asarray(x, dtype=float)),
        grad_g=lambda x: np.asarray(x, dtype=float).copy(),
        hess_g=lambda x: np.eye(dim),
        grad_floor=grad_floor,
        g_batch=lambda pts: 0.5 * np.einsum("nd,nd->n", pts, pts),
        grad_batch=lambda pts: np.array(pts, dtype=float, copy=True),
        hess_batch=lambda pts: np.broadcast_to(np.eye(dim), (len(pts), dim, dim)).copy(),
    )
