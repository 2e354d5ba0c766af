import math

import numpy as np
import pytest

from gronwall_bounds import Grid, LinearSystem, TensorSignal, integrate_system, norm_envelope, operator_norm
from gronwall_bounds.errors import EvaluationError
from gronwall_bounds.linsys import operator_norms
from gronwall_bounds.oracle import generate_linear_systems

ROT = [[0.0, 1.0], [-1.0, 0.0]]


def system(A, g, Y0, grid):
    return LinearSystem(TensorSignal.constant(A), TensorSignal.constant(g), Y0, grid)


class TestOperatorNorm:
    def test_identity(self):
        assert operator_norm(np.eye(2)) == pytest.approx(1.0, rel=1e-12)

    def test_nilpotent(self):
        # M^T M = diag(0, 4)
        assert operator_norm([[0.0, 2.0], [0.0, 0.0]]) == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("theta", [0.0, 0.3, 1.0, 2.5, -4.0])
    def test_rotation(self, theta):
        c, s = math.cos(theta), math.sin(theta)
        assert operator_norm([[c, -s], [s, c]]) == pytest.approx(1.0, rel=1e-12)

    def test_zero(self):
        assert operator_norm(np.zeros((3, 3))) == 0.0

    def test_non_finite(self):
        with pytest.raises(ValueError):
            operator_norm([[np.nan, 0.0], [0.0, 1.0]])

    def test_matches_svd(self):
        rng = np.random.default_rng(3)
        M = rng.normal(size=(200, 4, 4))
        norms, ok = operator_norms(M)
        ref = np.linalg.norm(M, 2, axis=(1, 2))
        np.testing.assert_allclose(norms[ok], ref[ok], rtol=1e-8)
        assert np.all(norms[~ok] >= ref[~ok])

    def test_fallback_flagged(self):
        # two nearly equal singular values: 3 iterations cannot settle
        M = np.diag([1.0, 0.999, 0.2])
        value, converged = operator_norm(M, full_output=True, max_iter=3)
        assert not converged
        assert value == pytest.approx(np.linalg.norm(M), rel=1e-14)


class TestIntegrate:
    def test_frozen(self):
        Y = integrate_system(system(np.zeros((2, 2)), np.zeros(2), [1.0, -2.0], Grid(0, 1, 11)))
        assert np.all(Y == np.array([1.0, -2.0]))

    def test_rotation(self):
        g = Grid(0.0, 2 * np.pi, 6284)
        Y = integrate_system(system(ROT, np.zeros(2), [1.0, 0.0], g))
        exact = np.stack([np.cos(g.nodes), -np.sin(g.nodes)], axis=1)
        np.testing.assert_allclose(Y, exact, rtol=0, atol=1e-6)
        np.testing.assert_allclose(np.linalg.norm(Y, axis=1), 1.0, rtol=0, atol=1e-8)

    def test_pure_forcing(self):
        Y = integrate_system(system(np.zeros((2, 2)), [1.0, 0.0], [0.0, 0.0], Grid(0, 1, 101)))
        np.testing.assert_allclose(Y[-1], [1.0, 0.0], rtol=0, atol=1e-10)

    def test_overflow(self):
        with pytest.raises(EvaluationError):
            integrate_system(system(np.eye(2) * 1e8, np.zeros(2), [1.0, 1.0], Grid(0, 2, 21)))

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            system(np.eye(3), np.zeros(2), [1.0, 0.0], Grid(0, 1, 11))


class TestNormEnvelope:
    def test_rotation_contained(self):
        g = Grid(0.0, 2 * np.pi, 6284)
        rep = norm_envelope(system(ROT, np.zeros(2), [1.0, 0.0], g))
        assert rep.contained
        np.testing.assert_allclose(rep.envelope.upper, np.exp(g.nodes), rtol=1e-12)
        np.testing.assert_allclose(rep.envelope.lower, np.exp(-g.nodes), rtol=1e-12)
        assert rep.verdict() == "contained: true"

    def test_static(self):
        rep = norm_envelope(system(np.zeros((3, 3)), np.zeros(3), [3.0, 4.0, 0.0], Grid(0, 1, 51)))
        assert np.all(rep.envelope.lower == 5.0)
        assert np.all(rep.envelope.upper == 5.0)
        np.testing.assert_allclose(rep.actual_norm, 5.0, rtol=1e-15)

    def test_identity_growth_tight(self):
        rep = norm_envelope(system(np.eye(2), np.zeros(2), [1.0, 0.0], Grid(0, 1, 1001)))
        assert abs(rep.actual_norm[-1] - math.e) <= 1e-4
        assert abs(rep.envelope.upper[-1] - math.e) <= 1e-4
        assert rep.contained

    def test_norm_consistency(self):
        s = generate_linear_systems(11, 1, n=201)[0]
        rep = norm_envelope(s)
        np.testing.assert_array_equal(rep.actual_norm, np.linalg.norm(integrate_system(s), axis=1))

    def test_frobenius_rate_keeps_containment(self):
        from gronwall_bounds import two_sided_envelope, Signal

        for s in generate_linear_systems(5, 10, n=501):
            rep = norm_envelope(s)
            fro = np.linalg.norm(s.A_nodes(), axis=(1, 2))
            assert np.all(fro >= rep.rate * (1 - 1e-12))
            env = two_sided_envelope(
                float(np.linalg.norm(s.Y0)),
                Signal.sampled(fro, s.grid),
                Signal.sampled(rep.forcing, s.grid),
                s.grid,
            )
            assert env.contains(rep.actual_norm, slack=1e-7 * (1 + np.abs(env.upper)))
            # only the upper side is monotone in the rate; the lower side is not
            assert np.all(env.upper >= rep.envelope.upper)
