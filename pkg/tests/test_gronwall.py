import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gronwall_bounds import (
    BoundProblem,
    Envelope,
    Grid,
    Signal,
    ValidationError,
    classic_bound,
    general_bound,
    two_sided_envelope,
)
from gronwall_bounds.oracle import equality_case
from gronwall_bounds.signal import trapezoid_error_bound

E = math.e


def problem(c, v, f, t1=1.0, n=1001):
    wrap = lambda s: s if isinstance(s, Signal) else (
        Signal.from_function(s) if callable(s) else Signal.constant(s)
    )
    return BoundProblem(c, wrap(v), wrap(f), Grid(0.0, t1, n))


class TestClassic:
    def test_zero_rate(self):
        assert np.all(classic_bound(problem(1.0, 0.0, 0.0)) == 1.0)

    def test_constant_rate(self):
        b = classic_bound(problem(2.0, 1.0, 0.0))
        assert abs(b[-1] - 2 * E) <= 1e-5

    def test_linear_rate(self):
        b = classic_bound(problem(1.0, lambda t: t, 0.0, t1=2.0, n=2001))
        assert abs(b[-1] - E**2) <= 1e-4

    def test_negative_rate_rejected(self):
        with pytest.raises(ValidationError, match="node 0") as exc:
            classic_bound(problem(1.0, -1.0, 0.0))
        assert exc.value.hypothesis == "v(t) >= 0"

    def test_negative_c_rejected(self):
        with pytest.raises(ValidationError):
            classic_bound(problem(-0.5, 1.0, 0.0))

    def test_c_zero_allowed(self):
        assert np.all(classic_bound(problem(0.0, 1.0, 0.0)) == 0.0)


class TestGeneral:
    def test_pure_forcing(self):
        b = general_bound(problem(1.0, 0.0, 1.0))
        assert abs(b[-1] - 2.0) <= 1e-12

    def test_rate_and_forcing(self):
        b = general_bound(problem(1.0, 1.0, 1.0))
        assert abs(b[-1] - (2 * E - 1)) <= 1e-4

    def test_reduces_to_classic(self):
        p = problem(1.0, 1.0, 0.0)
        np.testing.assert_allclose(general_bound(p), classic_bound(p), rtol=0, atol=1e-12)

    def test_sign_changing_forcing_allowed(self):
        # int_0^t sin = 1 - cos t >= 0 although sin < 0 on (pi, 2pi)
        p = problem(1.0, 0.5, np.sin, t1=2 * np.pi, n=2001)
        assert np.all(np.isfinite(general_bound(p)))

    def test_negative_forcing_integral_rejected(self):
        with pytest.raises(ValidationError, match="running integral of f"):
            general_bound(problem(1.0, 1.0, lambda t: -np.sin(t)))

    def test_tight_against_equality_case(self):
        # v = 1 + t/2 smooth: quadrature error of the exponent and of the
        # tail is bounded by the policy's 10x trapezoid estimate
        p = problem(1.5, lambda t: 1 + t / 2, lambda t: np.cos(t) ** 2, n=2001)
        u = equality_case(p).values
        b = general_bound(p)
        tol = trapezoid_error_bound(p.grid, 20.0) * np.max(np.abs(u))
        assert np.max(np.abs(b - u)) <= tol
        assert np.max(np.abs(b - u) / u) <= 1e-4

    @settings(max_examples=25, deadline=None)
    @given(
        c=st.floats(0.0, 5.0),
        a=st.floats(0.0, 2.0),
        b=st.floats(0.0, 2.0),
        delta=st.floats(1e-3, 1.0),
    )
    def test_monotone_in_data(self, c, a, b, delta):
        v = lambda t: a * np.abs(np.sin(3 * t))
        f = lambda t: b * np.cos(2 * t) ** 2
        base = general_bound(problem(c, v, f, n=201))
        assert np.all(general_bound(problem(c + delta, v, f, n=201)) >= base)
        assert np.all(general_bound(problem(c, lambda t: v(t) + delta, f, n=201)) >= base)
        assert np.all(general_bound(problem(c, v, lambda t: f(t) + delta, n=201)) >= base)


class TestEnvelope:
    def test_exponential(self):
        env = two_sided_envelope(2.0, Signal.constant(1.0), Signal.constant(0.0), Grid(0, 1, 1001))
        assert abs(env.lower[-1] - 2 / E) <= 1e-4
        assert abs(env.upper[-1] - 2 * E) <= 1e-4

    def test_pure_forcing(self):
        env = two_sided_envelope(1.0, Signal.constant(0.0), Signal.constant(1.0), Grid(0, 1, 1001))
        assert abs(env.lower[-1]) <= 1e-12
        assert abs(env.upper[-1] - 2.0) <= 1e-12

    def test_zero_data(self):
        env = two_sided_envelope(0.0, Signal.constant(1.0), Signal.constant(0.0), Grid(0, 1, 101))
        assert np.all(env.lower == 0.0) and np.all(env.upper == 0.0)

    def test_starts_at_u0(self):
        env = two_sided_envelope(
            3.0, Signal.from_function(lambda t: 1 + t), Signal.constant(0.5), Grid(0, 1, 11)
        )
        assert env.lower[0] == env.upper[0] == 3.0

    def test_lower_not_clamped(self):
        env = two_sided_envelope(0.1, Signal.constant(0.0), Signal.constant(1.0), Grid(0, 1, 11))
        assert env.lower[-1] == pytest.approx(-0.9)

    @pytest.mark.parametrize("v, f", [(-1.0, 0.0), (0.0, -1.0)])
    def test_pointwise_hypotheses(self, v, f):
        with pytest.raises(ValidationError):
            two_sided_envelope(1.0, Signal.constant(v), Signal.constant(f), Grid(0, 1, 11))

    def test_sign_changing_forcing_rejected(self):
        # allowed by the one-sided bound, not by the envelope
        with pytest.raises(ValidationError, match="f must be nonnegative"):
            two_sided_envelope(1.0, Signal.constant(0.5), Signal.from_function(np.sin), Grid(0, 7, 101))

    def test_product_identity_without_forcing(self):
        v = Signal.from_function(lambda t: 1 + np.sin(4 * t) ** 2)
        env = two_sided_envelope(1.7, v, Signal.constant(0.0), Grid(0, 2, 501))
        np.testing.assert_allclose(env.lower * env.upper, 1.7**2, rtol=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(
        u0=st.floats(0.0, 10.0),
        coeffs=st.lists(st.floats(-2, 2), min_size=6, max_size=6),
    )
    def test_ordering(self, u0, coeffs):
        a = np.array(coeffs)
        v = Signal.from_function(lambda t: np.abs(a[0] + a[1] * np.sin(t) + a[2] * np.cos(2 * t)))
        f = Signal.from_function(lambda t: np.abs(a[3] + a[4] * np.cos(t) + a[5] * np.sin(3 * t)))
        env = two_sided_envelope(u0, v, f, Grid(0.0, 1.5, 151))
        assert np.all(env.lower <= env.upper)


@pytest.mark.parametrize(
    "values, slack, rtol, expected",
    [
        ([1.0, 2.0, 3.0], 0.0, 0.0, True),
        ([1.0, 2.0, 3.0 + 1e-9], 0.0, 0.0, False),
        ([1.0, 2.0, 3.0 + 1e-9], 0.0, 1e-7, True),
        ([1.0, 2.0, 3.0 + 1e-6], 0.0, 1e-7, False),
        ([0.5 - 1e-3, 2.0, 3.0], 2e-3, 0.0, True),
    ],
)
def test_envelope_contains_tolerances(values, slack, rtol, expected):
    env = Envelope(Grid(0, 1, 3), np.array([0.5, 1.0, 1.5]), np.array([1.0, 2.0, 3.0]))
    assert env.contains(values, slack=slack, rtol=rtol) is expected
