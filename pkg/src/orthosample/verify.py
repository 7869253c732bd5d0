"""Exact-identity and finite-difference verification suites.

Backs the ``verify`` CLI command and the corresponding tests: every analytic
formula in the geometry and kernel modules is checked against either an exact
algebraic identity or an independent finite-difference oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SingularGradient
from .geometry import ConstraintSpec, check_identities, correction_field, projection_matrix
from .kernels import div_y_k_perp, k_perp
from .oracles import FdConfig, fd_divergence_matrix, fd_gradient
from .targets import synthetic_constraint

Array = np.ndarray


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    detail: str = ""


def _relative_gap(value: Array, reference: Array) -> float:
    return float(np.linalg.norm(value - reference) / (np.linalg.norm(reference) + 1e-12))


def verify_suite(
    constraint: Optional[ConstraintSpec] = None,
    n_points: int = 1000,
    n_fd_points: int = 200,
    seed: int = 20240,
    box: float = 3.0,
    bandwidth: float = 1.0,
    fault: Optional[str] = None,
    extra_points: Optional[Array] = None,
) -> list[CheckResult]:
    """Run every identity and finite-difference check over random points.

    ``fault`` supports test-harness fault injection ("negate_correction"
    flips the sign of the correction field before the divergence identity).
    ``extra_points`` are appended to the random sweep; points where the
    constraint gradient is singular are reported as failures, not crashes.
    """
    c = constraint if constraint is not None else synthetic_constraint()
    rng = np.random.default_rng(seed)
    d = 2
    points = rng.uniform(-box, box, size=(n_points, d))
    if extra_points is not None:
        points = np.vstack([points, np.asarray(extra_points, dtype=float)])

    res_dg, res_idem, res_div = [], [], []
    singular: list[str] = []
    for x in points:
        try:
            report = check_identities(x, c)
        except SingularGradient as err:
            singular.append(f"x={np.array2string(x, precision=3)}: {err}")
            continue
        r = report.identity_residuals
        grad_norm = float(np.linalg.norm(c.grad_g(x)))
        hess_scale = 1.0 + float(np.linalg.norm(c.hess_g(x)))
        res_dg.append(r["d_annihilates_grad"] / grad_norm)
        res_idem.append(r["d_idempotent"])
        if fault == "negate_correction":
            grad = np.asarray(c.grad_g(x), dtype=float)
            hess = np.asarray(c.hess_g(x), dtype=float)
            flipped = -report.r_vector
            res_div.append(
                abs(grad @ flipped + np.trace(report.d_matrix @ hess @ report.d_matrix))
                / hess_scale
            )
        else:
            res_div.append(r["divergence_identity"] / hess_scale)

    results = [
        CheckResult("projector_annihilates_gradient", max(res_dg, default=np.inf), 1e-10,
                    max(res_dg, default=np.inf) <= 1e-10),
        CheckResult("projector_idempotent", max(res_idem, default=np.inf), 1e-10,
                    max(res_idem, default=np.inf) <= 1e-10),
        CheckResult("divergence_identity", max(res_div, default=np.inf), 1e-8,
                    max(res_div, default=np.inf) <= 1e-8),
    ]

    fd_cfg = FdConfig()
    sub = points[rng.permutation(len(points))[:n_fd_points]]
    rel_r, rel_k = [], []
    fd_singular = 0
    for x in sub:
        try:
            analytic = correction_field(x, c)
            numeric = fd_divergence_matrix(
                lambda p: projection_matrix(np.asarray(c.grad_g(p), dtype=float), c.grad_floor),
                x,
                fd_cfg,
            )
        except SingularGradient:
            fd_singular += 1
            continue
        rel_r.append(_relative_gap(analytic, numeric))
    pairs = rng.uniform(-box, box, size=(n_fd_points, 2, d))
    for x, y in pairs:
        try:
            analytic = div_y_k_perp(x, y, c, bandwidth)
            numeric = fd_divergence_matrix(lambda p: k_perp(x, p, c, bandwidth), y, fd_cfg)
        except SingularGradient:
            fd_singular += 1
            continue
        rel_k.append(_relative_gap(analytic, numeric))
    results.append(
        CheckResult("correction_vs_fd_divergence", max(rel_r, default=np.inf), 1e-4,
                    max(rel_r, default=np.inf) <= 1e-4)
    )
    results.append(
        CheckResult("kernel_divergence_vs_fd", max(rel_k, default=np.inf), 1e-4,
                    max(rel_k, default=np.inf) <= 1e-4)
    )

    if singular or fd_singular:
        detail = "; ".join(singular[:3]) if singular else f"{fd_singular} pair(s) skipped"
        results.append(
            CheckResult("no_singular_gradients", float(len(singular) + fd_singular), 0.0,
                        False, detail=f"SingularGradient at: {detail}")
        )
    return results


def format_table(results: list[CheckResult]) -> str:
    """Fixed-width pass/fail table for terminal output."""
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{r.name:<{width}}  {status}  max_residual={r.max_residual:.3e}  tol={r.tolerance:.1e}"
        if r.detail:
            line += f"  ({r.detail})"
        lines.append(line)
    return "\n".join(lines)
