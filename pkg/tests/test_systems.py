"""Factory and derivative-consistency tests for the built-in models."""
import numpy as np
import pytest

from ompath import _fd
from ompath.errors import (DerivativeMismatch, DimensionMismatch,
                           InvalidParams, NonpositiveNoise, SingularDiffusion)
from ompath.geometry import (metric, riemannian_divergence, scalar_curvature)
from ompath.systems import (NpzParams, SystemModel, make_custom,
                            make_double_well, make_maier_stein, make_npz)


def fd_jacobian_matches(sys, points, tol=1e-6):
    analytic = sys.drift_jacobian(points)
    fd = _fd.jacobian(sys.drift, points)
    scale = np.maximum(1.0, np.abs(fd))
    return np.max(np.abs(analytic - fd) / scale) < tol


class TestDoubleWell:
    def test_drift_roots(self):
        sys = make_double_well(1.0)
        roots = np.array([[-1.0], [0.0], [1.0]])
        assert np.max(np.abs(sys.drift(roots))) == 0.0

    def test_drift_derivative_signs(self):
        sys = make_double_well(1.0)
        jac = sys.drift_jacobian(np.array([[-1.0], [0.0], [1.0]]))
        assert jac[0, 0, 0] == -2.0
        assert jac[1, 0, 0] == 1.0
        assert jac[2, 0, 0] == -2.0

    def test_geometry_degeneration(self, rng):
        sys = make_double_well(1.0)
        x = rng.uniform(-2, 2, size=(20, 1))
        assert np.allclose(metric(sys, x), 1.0, atol=1e-14)
        div = riemannian_divergence(sys, x)
        assert np.allclose(div, 1.0 - 3.0 * x[..., 0] ** 2, atol=1e-12)
        assert np.array_equal(scalar_curvature(sys, x), np.zeros(20))

    def test_rejects_nonpositive_noise(self):
        with pytest.raises(NonpositiveNoise):
            make_double_well(0.0)
        with pytest.raises(NonpositiveNoise):
            make_double_well(-1.0)


class TestMaierStein:
    def test_equilibria(self):
        for gamma in (1.0, 10.0):
            sys = make_maier_stein(gamma, 0.3)
            pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]])
            assert np.max(np.abs(sys.drift(pts))) == 0.0

    def test_zero_epsilon_is_additive(self, rng):
        sys = make_maier_stein(1.0, 0.0)
        assert sys.constant_diffusion
        z = rng.uniform(-2, 2, size=(10, 2))
        assert np.allclose(metric(sys, z), np.eye(2), atol=1e-14)

    def test_christoffel_plugin(self):
        from ompath.geometry import christoffel
        sys = make_maier_stein(1.0, 0.5)
        gam = christoffel(sys, np.array([1.0, -0.2]))
        assert gam[0, 0, 0] == pytest.approx(-2.0 / 3.0, rel=1e-10)

    def test_rejects_bad_params(self):
        with pytest.raises(InvalidParams):
            make_maier_stein(1.0, -0.1)


class TestNpz:
    def test_uptake_continuous_at_kink(self, rng):
        p = NpzParams()
        sys = make_npz(p)
        pz = rng.uniform(0.1, 3.0, size=(100, 2))
        at_kink = np.concatenate([np.full((100, 1), p.a), pz], axis=1)
        below = at_kink.copy()
        below[:, 0] = np.nextafter(p.a, 0.0)
        jump = sys.drift(at_kink) - sys.drift(below)
        assert np.max(np.abs(jump)) < 1e-12

    def test_high_branch_divergence_matches_geometry(self, rng):
        from test_geometry import npz_divergence
        p = NpzParams()
        sys = make_npz(p)
        x = np.column_stack([rng.uniform(1.5, 6.0, 100),
                             rng.uniform(0.1, 4.0, 100),
                             rng.uniform(0.1, 4.0, 100)])
        want = npz_divergence(x, p, "high")
        got = riemannian_divergence(sys, x)
        assert np.max(np.abs(got - want)) < 1e-10

    def test_low_branch_divergence_matches_geometry(self, rng):
        from test_geometry import npz_divergence
        p = NpzParams()
        sys = make_npz(p)
        x = np.column_stack([rng.uniform(0.05, 0.95, 100),
                             rng.uniform(0.1, 4.0, 100),
                             rng.uniform(0.1, 4.0, 100)])
        want = npz_divergence(x, p, "low")
        got = riemannian_divergence(sys, x)
        assert np.max(np.abs(got - want)) < 1e-10

    def test_default_parameter_values(self):
        p = NpzParams()
        assert (p.D, p.a, p.b, p.alpha, p.c) == (0.1, 1.0, 1.0, 1.0, 5.0)
        assert (p.D1, p.beta, p.d, p.D2, p.N0) == (0.2, 0.5, 0.1, 2.1, 9.96)

    def test_invalid_params(self):
        with pytest.raises(InvalidParams):
            NpzParams(D=-0.1)
        with pytest.raises(InvalidParams):
            NpzParams(sigma=(1.0, -1.0, 1.0))
        with pytest.raises(InvalidParams):
            make_npz("not params")

    def test_deterministic_flow_stays_bounded(self):
        # bistability sanity: RK4 from near the coexisting equilibrium
        from ompath.control import assemble_problem
        from ompath.msa import forward_sweep
        sys = make_npz(NpzParams())
        x0 = np.array([1.0, 0.9, 0.18])
        problem = assemble_problem(sys, x0, x0, 0.0, 500.0)
        n = 20001
        states = forward_sweep(problem, np.zeros((n, 3)))
        assert np.all(np.isfinite(states))
        assert np.max(np.abs(states)) < 100.0


class TestJacobianConsistency:
    def test_builtin_jacobians_match_fd(self, rng):
        cases = [
            (make_double_well(1.0), rng.uniform(-2, 2, (100, 1))),
            (make_maier_stein(1.0, 0.5), rng.uniform(-2, 2, (100, 2))),
            (make_maier_stein(10.0, 0.0), rng.uniform(-2, 2, (100, 2))),
        ]
        # keep NPZ probes away from the uptake kink at N = a
        npz_pts = np.column_stack([
            np.concatenate([rng.uniform(0.05, 0.9, 50), rng.uniform(1.1, 6.0, 50)]),
            rng.uniform(0.1, 4.0, 100), rng.uniform(0.1, 4.0, 100)])
        cases.append((make_npz(NpzParams()), npz_pts))
        for sys, pts in cases:
            assert fd_jacobian_matches(sys, pts), sys.label

    def test_maier_stein_diffusion_partials_match_fd(self, rng):
        sys = make_maier_stein(1.0, 0.7)
        z = rng.uniform(-2, 2, size=(50, 2))
        analytic = sys.diffusion_partials(z)
        flat = lambda x: sys.diffusion(x).reshape(x.shape[:-1] + (4,))
        fd = _fd.jacobian(flat, z).reshape(z.shape[:-1] + (2, 2, 2))
        assert np.max(np.abs(analytic - fd) / np.maximum(1.0, np.abs(fd))) < 1e-6


class TestMakeCustom:
    def test_rebuild_double_well(self, rng):
        ref = make_double_well(1.0)
        sys = make_custom(1, lambda x: x - x ** 3,
                          lambda x: np.ones(x.shape[:-1] + (1, 1)),
                          drift_jacobian=lambda x: (1 - 3 * x ** 2)[..., None],
                          vectorized=True, constant_diffusion=True)
        x = rng.uniform(-2, 2, size=(20, 1))
        assert np.max(np.abs(metric(sys, x) - metric(ref, x))) < 1e-12
        assert np.max(np.abs(riemannian_divergence(sys, x)
                             - riemannian_divergence(ref, x))) < 1e-12

    def test_scalar_callbacks_are_wrapped(self):
        sys = make_custom(2, lambda x: np.array([x[1], -x[0]]),
                          lambda x: np.eye(2))
        pts = np.zeros((4, 3, 2))
        assert sys.drift(pts).shape == (4, 3, 2)
        assert sys.diffusion(pts).shape == (4, 3, 2, 2)

    def test_wrong_jacobian_rejected(self):
        with pytest.raises(DerivativeMismatch):
            make_custom(1, lambda x: x - x ** 3,
                        lambda x: np.ones(x.shape[:-1] + (1, 1)),
                        drift_jacobian=lambda x: (1 + 3 * x ** 2)[..., None],
                        vectorized=True)

    def test_zero_row_diffusion_rejected(self):
        with pytest.raises(SingularDiffusion):
            make_custom(2, lambda x: np.zeros(2),
                        lambda x: np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionMismatch):
            make_custom(2, lambda x: np.zeros(3), lambda x: np.eye(2))

    def test_rectangular_diffusion_rejected(self):
        with pytest.raises(DimensionMismatch):
            SystemModel(2, 3, lambda x: x, lambda x: x)
