"""Scalar RBF kernel, bandwidth selection, and the projected matrix kernel.

Convention: k(x, y) = exp(-||x - y||^2 / h), bandwidth h in the denominator
with no factor 2, so fixed-h configurations are unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist

from .ensemble import ParticleEnsemble
from .errors import DegenerateEnsemble, NonPositiveBandwidth
from .geometry import ConstraintSpec, correction_field, projection_matrix

Array = np.ndarray

MEDIAN = "median"


@dataclass(frozen=True)
class KernelSpec:
    """Bandwidth policy: a fixed positive value or the median heuristic.

    The median heuristic h = med^2 / log(n+1) is recomputed from the current
    ensemble every iteration.
    """

    bandwidth: Union[float, str] = MEDIAN

    def __post_init__(self):
        if isinstance(self.bandwidth, str):
            if self.bandwidth != MEDIAN:
                raise ValueError(f"unknown bandwidth policy {self.bandwidth!r}")
        elif not self.bandwidth > 0:
            raise NonPositiveBandwidth(f"fixed bandwidth must be positive, got {self.bandwidth}")

    def resolve(self, points: Array) -> float:
        """Concrete bandwidth for the given (n, d) particle array."""
        if self.bandwidth == MEDIAN:
            return _median_bandwidth(points)
        return float(self.bandwidth)


def rbf(x: Array, y: Array, h: float) -> float:
    """exp(-||x - y||^2 / h); equals 1 iff x = y."""
    if not h > 0:
        raise NonPositiveBandwidth(f"bandwidth must be positive, got {h}")
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(np.exp(-(diff @ diff) / h))


def grad_y_rbf(x: Array, y: Array, h: float) -> Array:
    """Gradient of the RBF in its second argument: (2/h)(x - y) k(x, y)."""
    if not h > 0:
        raise NonPositiveBandwidth(f"bandwidth must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    return (2.0 / h) * diff * np.exp(-(diff @ diff) / h)


def _median_bandwidth(points: Array) -> float:
    points = np.asarray(points, dtype=float)
    if points.shape[0] < 2:
        raise DegenerateEnsemble("median bandwidth needs at least two particles")
    distances = pdist(points)
    med = float(np.median(distances))
    if med == 0.0:
        raise DegenerateEnsemble("all pairwise distances are zero")
    return med**2 / np.log(points.shape[0] + 1.0)


def median_bandwidth(particles: ParticleEnsemble) -> float:
    """h = med^2 / log(n+1), med the median pairwise Euclidean distance."""
    return _median_bandwidth(particles.points)


def k_perp(x: Array, y: Array, c: ConstraintSpec, h: float) -> Array:
    """Matrix-valued projected kernel k(x, y) D(x) D(y).

    Its range lies in the tangent space at x, so grad g(x)^T k_perp(x, y) = 0.
    """
    dx = projection_matrix(np.asarray(c.grad_g(x), dtype=float), c.grad_floor)
    dy = projection_matrix(np.asarray(c.grad_g(y), dtype=float), c.grad_floor)
    return rbf(x, y, h) * dx @ dy


def div_y_k_perp(x: Array, y: Array, c: ConstraintSpec, h: float) -> Array:
    """Divergence of the projected kernel in y: component i = sum_j d_{y_j} k_perp^{ij}.

    Expands analytically to D(x) [D(y) grad_y k(x, y) + k(x, y) r(y)], which
    needs the constraint Hessian at y through the correction field r.
    """
    dx = projection_matrix(np.asarray(c.grad_g(x), dtype=float), c.grad_floor)
    dy = projection_matrix(np.asarray(c.grad_g(y), dtype=float), c.grad_floor)
    ry = correction_field(y, c)
    return dx @ (dy @ grad_y_rbf(x, y, h) + rbf(x, y, h) * ry)


def surrogate_grad_k_perp(x: Array, y: Array, c: ConstraintSpec, h: float) -> Array:
    """Hessian-free stand-in for :func:`div_y_k_perp`: D(x) D(y) grad_y k(x, y).

    Drops the k(x, y) D(x) r(y) term, which is all that separates the two.
    """
    dx = projection_matrix(np.asarray(c.grad_g(x), dtype=float), c.grad_floor)
    dy = projection_matrix(np.asarray(c.grad_g(y), dtype=float), c.grad_floor)
    return dx @ (dy @ grad_y_rbf(x, y, h))


def rbf_matrix(points: Array, h: float) -> Array:
    """Pairwise kernel matrix K[i, j] = k(x_i, x_j) for an (n, d) array."""
    if not h > 0:
        raise NonPositiveBandwidth(f"bandwidth must be positive, got {h}")
    points = np.asarray(points, dtype=float)
    diff = points[:, None, :] - points[None, :, :]
    return np.exp(-np.einsum("ijd,ijd->ij", diff, diff) / h)


def pairwise_grad_y_rbf(points: Array, h: float, kmat: Array = None) -> Array:
    """G[i, j] = grad in the second argument of k(x_i, x_j), shape (n, n, d)."""
    points = np.asarray(points, dtype=float)
    if kmat is None:
        kmat = rbf_matrix(points, h)
    diff = points[:, None, :] - points[None, :, :]
    return (2.0 / h) * diff * kmat[:, :, None]
