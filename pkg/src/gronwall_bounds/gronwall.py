"""Gronwall-Bellman bounds: classic, forced, and the two-sided envelope.

All three formulas are evaluated on a :class:`~gronwall_bounds.signal.Grid`
with the rate integral ``V(t) = int_{t0}^t v`` accumulated by the
composite trapezoid rule. The forced term uses the weight
``exp(int_z^t v) = exp(V(t) - V(z))``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .signal import Grid, Signal, cumulative, weighted_tail_curve

__all__ = [
    "BoundProblem",
    "Envelope",
    "classic_bound",
    "general_bound",
    "two_sided_envelope",
]

# relative roundoff allowance when checking int f >= 0 on the grid
_ROUNDOFF = 64 * np.finfo(float).eps


def _as_signal(s):
    if isinstance(s, Signal):
        return s
    if callable(s):
        return Signal.from_function(s)
    return Signal.constant(s)


def _first_negative(values):
    bad = np.flatnonzero(values < 0)
    return int(bad[0]) if bad.size else None


def _require_nonnegative(values, grid, name, hypothesis):
    i = _first_negative(values)
    if i is not None:
        raise ValidationError(
            f"{name} must be nonnegative ({hypothesis}); first violation at "
            f"node {i} (t={grid.nodes[i]!r}): {name}={values[i]!r}",
            hypothesis=hypothesis,
            index=i,
            value=float(values[i]),
        )


@dataclass(frozen=True)
class BoundProblem:
    """Data of the integral inequality ``u <= c + int v u + int f``.

    ``c`` is the constant term, ``v`` the nonnegative rate, ``f`` the
    forcing (sign-indefinite as long as its running integral stays
    nonnegative). Call :meth:`validate` before trusting the bound;
    the bound functions do it for you.
    """

    c: float
    v: Signal
    f: Signal
    grid: Grid

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "v", _as_signal(self.v))
        object.__setattr__(self, "f", _as_signal(self.f))

    def rate_values(self):
        return self.v.on(self.grid)

    def validate(self, check_forcing=True):
        g = self.grid
        if not np.isfinite(self.c) or self.c < 0:
            raise ValidationError(
                f"c must be a finite constant >= 0 (hypothesis c >= 0), got {self.c!r}",
                hypothesis="c >= 0",
                value=self.c,
            )
        V = cumulative(self.v, g)  # raises on non-finite samples
        _require_nonnegative(self.v.on(g), g, "v", "v(t) >= 0")
        if check_forcing:
            F = cumulative(self.f, g)
            scale = _ROUNDOFF * (
                np.cumsum(np.abs(self.f.on(g))) * g.step + np.abs(F.values)
            )
            i = _first_negative(F.values + scale)
            if i is not None:
                raise ValidationError(
                    "the running integral of f must be nonnegative "
                    f"(hypothesis int_t0^t f >= 0); first violation at node {i} "
                    f"(t={g.nodes[i]!r}): F={F.values[i]!r}",
                    hypothesis="int f >= 0",
                    index=i,
                    value=float(F.values[i]),
                )
        return V


@dataclass(frozen=True, eq=False)
class Envelope:
    """Lower and upper curves on a grid."""

    grid: Grid
    lower: np.ndarray
    upper: np.ndarray

    def contains(self, values, slack=0.0, rtol=0.0):
        """True when ``lower - tol <= values <= upper + tol`` at every node,
        with ``tol = slack + rtol * (1 + |side|)`` per side."""
        values = np.asarray(values, dtype=float)
        lo_tol = slack + rtol * (1.0 + np.abs(self.lower))
        up_tol = slack + rtol * (1.0 + np.abs(self.upper))
        return bool(
            np.all(self.lower - lo_tol <= values) and np.all(values <= self.upper + up_tol)
        )


def classic_bound(p):
    """``c * exp(int_{t0}^t v)`` at every node; ``p.f`` is ignored."""
    V = p.validate(check_forcing=False)
    return p.c * np.exp(V.values)


def general_bound(p):
    """Forced bound ``c e^{V(t)} + int_{t0}^t e^{V(t) - V(z)} f(z) dz``.

    With ``f == 0`` the tail vanishes identically and the result equals
    :func:`classic_bound`.
    """
    V = p.validate()
    return p.c * np.exp(V.values) + weighted_tail_curve(V, p.f, p.grid)


def two_sided_envelope(u0, v, f, grid):
    """Lower and upper envelope for a positive ``u`` with ``u(t0) = u0``.

    Requires ``u0 >= 0`` and pointwise ``v >= 0``, ``f >= 0`` at nodes.

    upper = u0 e^{V} + int e^{V(t) - V(z)} f(z) dz
    lower = u0 e^{-V} - int e^{-(V(t) - V(z))} f(z) dz

    The lower curve is reported as is and may go negative.
    """
    v, f = _as_signal(v), _as_signal(f)
    u0 = float(u0)
    if not np.isfinite(u0) or u0 < 0:
        raise ValidationError(
            f"u0 must be finite and >= 0 (hypothesis u(t0) >= 0), got {u0!r}",
            hypothesis="u(t0) >= 0",
            value=u0,
        )
    V = cumulative(v, grid)
    _require_nonnegative(v.on(grid), grid, "v", "v(t) >= 0")
    fv = f.on(grid)
    cumulative(fv, grid)  # finiteness check
    _require_nonnegative(fv, grid, "f", "f(t) >= 0")
    upper = u0 * np.exp(V.values) + weighted_tail_curve(V, fv, grid)
    lower = u0 * np.exp(-V.values) - weighted_tail_curve(-V, fv, grid)
    return Envelope(grid, lower, upper)
