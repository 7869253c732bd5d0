"""Independent numerical oracles: central finite differences, RK4, Monte Carlo.

These are deliberately dumb and self-contained so that tests and the verify
command can check the analytic formulas elsewhere in the package against a
route that shares no code with them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteEvaluation

Array = np.ndarray


@dataclass(frozen=True)
class FdConfig:
    """Central-difference settings; per-coordinate step is step_scale*(1+|x_i|)."""

    step_scale: float = 1e-5
    scheme: str = "central"
    relative_tol: float = 1e-4

    def __post_init__(self):
        if not 0.0 < self.step_scale <= 1e-2:
            raise ValueError(f"step_scale must lie in (0, 1e-2], got {self.step_scale}")
        if self.scheme != "central":
            raise ValueError(f"only the central scheme is implemented, got {self.scheme!r}")
        if not self.relative_tol > 0:
            raise ValueError(f"relative_tol must be positive, got {self.relative_tol}")


def _check_finite(value, what: str):
    if not np.all(np.isfinite(value)):
        raise NonFiniteEvaluation(f"{what} returned a non-finite value")
    return value


def fd_gradient(f: Callable[[Array], float], x: Array, cfg: FdConfig = FdConfig()) -> Array:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        h = cfg.step_scale * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fp = _check_finite(float(f(xp)), "f")
        fm = _check_finite(float(f(xm)), "f")
        grad[i] = (fp - fm) / (2.0 * h)
    return grad


def fd_hessian(f: Callable[[Array], float], x: Array, step_scale: float = 1e-4) -> Array:
    """Gradient-of-gradient Hessian with a larger step to tame roundoff."""
    cfg = FdConfig(step_scale=step_scale)
    x = np.asarray(x, dtype=float)
    d = x.size
    hess = np.zeros((d, d))
    for j in range(d):
        h = step_scale * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        hess[:, j] = (fd_gradient(f, xp, cfg) - fd_gradient(f, xm, cfg)) / (2.0 * h)
    return 0.5 * (hess + hess.T)


def fd_divergence_matrix(
    field: Callable[[Array], Array], x: Array, cfg: FdConfig = FdConfig()
) -> Array:
    """Row-wise divergence of a matrix field: component i = sum_j d_j field_ij."""
    x = np.asarray(x, dtype=float)
    d = x.size
    div = np.zeros(d)
    for j in range(d):
        h = cfg.step_scale * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        fp = _check_finite(np.asarray(field(xp), dtype=float), "field")
        fm = _check_finite(np.asarray(field(xm), dtype=float), "field")
        div += (fp[:, j] - fm[:, j]) / (2.0 * h)
    return div


def rk4_integrate(rhs: Callable[[float, float], float], s0: float, t_end: float, n_steps: int) -> float:
    """Classical fourth-order Runge-Kutta for a scalar ODE ds/dt = rhs(t, s)."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    s = float(s0)
    t = 0.0
    dt = t_end / n_steps
    for _ in range(n_steps):
        k1 = rhs(t, s)
        k2 = rhs(t + 0.5 * dt, s + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, s + 0.5 * dt * k2)
        k4 = rhs(t + dt, s + dt * k3)
        s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        if not np.isfinite(s):
            raise NonFiniteEvaluation(f"RK4 state became non-finite at t={t:.6g}")
    return s


def mc_mean(draws: Callable[[np.random.Generator], float], n: int, seed: int) -> tuple[float, float]:
    """Sample mean and standard error of n draws from a seeded generator."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    values = np.fromiter((float(draws(rng)) for _ in range(n)), dtype=float, count=n)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(n))
    return mean, stderr
