"""Geometry: drift function, projector, correction field, exact identities."""

import numpy as np
import pytest

from orthosample.errors import SingularGradient
from orthosample.geometry import (
    ConstraintSpec,
    PsiParams,
    affine_constraint,
    batch_geometry,
    check_identities,
    correction_field,
    projection_matrix,
    psi,
    psi_batch,
    sphere_constraint,
    v_sharp,
)
from orthosample.oracles import FdConfig, fd_divergence_matrix, fd_gradient, fd_hessian
from orthosample.targets import synthetic_constraint


class TestPsi:
    def test_zero(self):
        assert psi(0.0, PsiParams(1.0, 0.5)) == 0.0
        assert psi(0.0, PsiParams(100.0, 0.0)) == 0.0

    def test_paper_setting(self):
        # alpha=100, beta=0 reduces to 100*z
        assert psi(0.5, PsiParams(100.0, 0.0)) == 50.0
        assert psi(-0.5, PsiParams(100.0, 0.0)) == -50.0

    def test_fractional_power(self):
        assert psi(4.0, PsiParams(1.0, 0.5)) == pytest.approx(8.0, rel=1e-14)

    def test_odd_and_monotone_on_grid(self):
        p = PsiParams(3.0, 0.7)
        z = np.linspace(-5.0, 5.0, 10_000)
        vals = psi_batch(z, p)
        np.testing.assert_allclose(vals, -psi_batch(-z, p), atol=1e-12)
        assert np.all(np.diff(vals) >= 0)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            PsiParams(alpha=0.0)
        with pytest.raises(ValueError):
            PsiParams(alpha=1.0, beta=1.5)
        with pytest.raises(ValueError):
            PsiParams(alpha=1.0, beta=-0.1)


class TestProjectionMatrix:
    def test_axis_aligned(self):
        d = projection_matrix(np.array([1.0, 0.0]), 1e-10)
        np.testing.assert_allclose(d, np.array([[0.0, 0.0], [0.0, 1.0]]))

    def test_frozen_example(self):
        d = projection_matrix(np.array([1.0, 3.0]), 1e-10)
        expected = np.array([[0.9, -0.3], [-0.3, 0.1]])
        np.testing.assert_allclose(d, expected, atol=1e-14)
        np.testing.assert_allclose(d @ d, d, atol=1e-14)

    def test_singular_guard(self):
        with pytest.raises(SingularGradient):
            projection_matrix(np.array([0.0, 0.0]), 1e-10)

    def test_random_sweep_properties(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            grad = rng.standard_normal(rng.integers(2, 6))
            if np.linalg.norm(grad) < 1e-3:
                continue
            d = projection_matrix(grad, 1e-10)
            np.testing.assert_allclose(d, d.T, atol=1e-12)
            assert np.linalg.norm(d @ grad) <= 1e-10 * np.linalg.norm(grad)
            eigs = np.linalg.eigvalsh(d)
            # exactly one zero mode, the rest ones
            assert np.sum(eigs < 0.5) == 1
            assert np.sum(eigs > 0.5) == grad.size - 1


class TestVSharp:
    def test_zero_on_manifold(self):
        c = synthetic_constraint()
        x = np.array([-1.0, 1.0])  # g = 0
        np.testing.assert_allclose(v_sharp(x, c, PsiParams(100.0, 0.0)), np.zeros(2))

    def test_synthetic_point(self):
        c = synthetic_constraint()
        v = v_sharp(np.array([1.0, 0.0]), c, PsiParams(100.0, 0.0))
        np.testing.assert_allclose(v, np.array([-100.0, 0.0]), atol=1e-12)

    def test_negative_level(self):
        c = ConstraintSpec(
            g=lambda x: -1.0,
            grad_g=lambda x: np.array([0.0, 2.0]),
            hess_g=lambda x: np.zeros((2, 2)),
        )
        v = v_sharp(np.zeros(2), c, PsiParams(1.0, 0.0))
        np.testing.assert_allclose(v, np.array([0.0, 0.5]), atol=1e-14)

    def test_constraint_row_identity(self):
        # grad^T v_sharp = -psi(g) pointwise
        c = synthetic_constraint()
        p = PsiParams(7.0, 0.5)
        rng = np.random.default_rng(1)
        for x in rng.uniform(-3, 3, size=(100, 2)):
            lhs = np.asarray(c.grad_g(x)) @ v_sharp(x, c, p)
            assert abs(lhs + psi(c.g(x), p)) <= 1e-10 * (1.0 + abs(psi(c.g(x), p)))


class TestCorrectionField:
    def test_affine_is_zero(self):
        c = affine_constraint(np.array([2.0, -1.0]), b=0.3)
        rng = np.random.default_rng(2)
        for x in rng.standard_normal((20, 2)):
            np.testing.assert_allclose(correction_field(x, c), np.zeros(2), atol=1e-14)

    def test_sphere_point(self):
        c = sphere_constraint(2)
        np.testing.assert_allclose(
            correction_field(np.array([1.0, 0.0]), c), np.array([-1.0, 0.0]), atol=1e-12
        )

    def test_synthetic_point(self):
        c = synthetic_constraint()
        np.testing.assert_allclose(
            correction_field(np.array([0.0, 1.0]), c), np.array([0.48, -0.36]), atol=1e-12
        )

    def test_matches_fd_divergence_of_projector(self):
        c = synthetic_constraint()
        rng = np.random.default_rng(3)
        cfg = FdConfig()
        for x in rng.uniform(-3, 3, size=(50, 2)):
            analytic = correction_field(x, c)
            numeric = fd_divergence_matrix(
                lambda p: projection_matrix(np.asarray(c.grad_g(p)), c.grad_floor), x, cfg
            )
            np.testing.assert_allclose(
                analytic, numeric, rtol=1e-4, atol=1e-8 * (1 + np.linalg.norm(analytic))
            )

    def test_singular_guard(self):
        with pytest.raises(SingularGradient):
            correction_field(np.zeros(2), sphere_constraint(2))


class TestIdentities:
    def test_synthetic_hand_values(self):
        c = synthetic_constraint()
        report = check_identities(np.array([0.0, 1.0]), c)
        grad = np.array([1.0, 3.0])
        assert grad @ report.r_vector == pytest.approx(-0.6, abs=1e-12)
        hess = np.array([[0.0, 0.0], [0.0, 6.0]])
        tr = np.trace(report.d_matrix @ hess @ report.d_matrix)
        assert tr == pytest.approx(0.6, abs=1e-12)
        assert report.identity_residuals["divergence_identity"] <= 1e-12

    def test_affine_exact_zeros(self):
        c = affine_constraint(np.array([1.0, 2.0]))
        rng = np.random.default_rng(4)
        for x in rng.standard_normal((20, 2)):
            res = check_identities(x, c).identity_residuals
            assert res["d_annihilates_grad"] <= 1e-15
            assert res["d_idempotent"] <= 1e-15
            assert res["divergence_identity"] <= 1e-15

    def test_thousand_point_sweep(self):
        c = synthetic_constraint()
        rng = np.random.default_rng(5)
        for x in rng.uniform(-3, 3, size=(1000, 2)):
            res = check_identities(x, c).identity_residuals
            grad_norm = np.linalg.norm(c.grad_g(x))
            hess_scale = 1.0 + np.linalg.norm(c.hess_g(x))
            assert res["d_annihilates_grad"] <= 1e-10 * grad_norm
            assert res["d_idempotent"] <= 1e-10
            assert res["divergence_identity"] <= 1e-8 * hess_scale


class TestConstraintSpecs:
    @pytest.mark.parametrize("c", [synthetic_constraint(), sphere_constraint(2)])
    def test_derivative_consistency(self, c):
        rng = np.random.default_rng(6)
        for x in rng.uniform(-2, 2, size=(25, 2)):
            hess = np.asarray(c.hess_g(x))
            np.testing.assert_allclose(hess, hess.T, atol=1e-10)
            np.testing.assert_allclose(
                np.asarray(c.grad_g(x)), fd_gradient(c.g, x),
                rtol=1e-4, atol=1e-8,
            )
            np.testing.assert_allclose(
                hess, fd_hessian(c.g, x), rtol=1e-3, atol=1e-5,
            )

    def test_batch_helpers_match_pointwise(self):
        c = synthetic_constraint()
        rng = np.random.default_rng(7)
        pts = rng.uniform(-3, 3, size=(40, 2))
        g, grads, projectors, corrections = batch_geometry(pts, c)
        for i, x in enumerate(pts):
            assert g[i] == pytest.approx(c.g(x), abs=1e-14)
            np.testing.assert_allclose(grads[i], c.grad_g(x), atol=1e-14)
            np.testing.assert_allclose(
                projectors[i], projection_matrix(np.asarray(c.grad_g(x)), c.grad_floor), atol=1e-14
            )
            np.testing.assert_allclose(corrections[i], correction_field(x, c), atol=1e-12)

    def test_loop_fallback_without_batch_callables(self):
        base = synthetic_constraint()
        plain = ConstraintSpec(g=base.g, grad_g=base.grad_g, hess_g=base.hess_g)
        pts = np.array([[0.0, 1.0], [1.0, -1.0]])
        np.testing.assert_allclose(plain.values(pts), base.values(pts))
        np.testing.assert_allclose(plain.gradients(pts), base.gradients(pts))
        np.testing.assert_allclose(plain.hessians(pts), base.hessians(pts))
