"""Scalar Riccati equations and the comparison construction behind the bound.

Every equation is stored in the canonical form

    y' + f(t) y**2 + g(t) y + h(t) = 0,

so a linear equation is the case ``f == 0`` and ``y' + A y**2 = v y + v F``
becomes the triple ``(A, -v, -v F)``.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._kernels import kernels
from .errors import EvaluationError, ValidationError
from .signal import Grid, Signal, cumulative, weighted_tail_curve

__all__ = [
    "BLOWUP_THRESHOLD",
    "RiccatiCoeffs",
    "Trajectory",
    "ComparisonSetup",
    "HypothesisReport",
    "Construction",
    "ComparisonVerdict",
    "relative_slack",
    "residual_slack",
    "solve_riccati",
    "solve_linear_cauchy",
    "riccati_residual",
    "check_theorem21",
    "build_comparison",
    "verify_comparison",
]

BLOWUP_THRESHOLD = 1e12
RELATIVE_SLACK = 1e-7
SQUARED_DIFFERENCE_MODES = ("as_printed", "linear")


def relative_slack(q):
    """``1e-7 * (1 + |q|)``, elementwise."""
    return RELATIVE_SLACK * (1.0 + np.abs(q))


def _signal(s):
    if isinstance(s, Signal):
        return s
    return Signal.constant(s)


@dataclass(frozen=True)
class RiccatiCoeffs:
    """Coefficients ``(f, g, h)`` of ``y' + f y^2 + g y + h = 0``."""

    f: Signal
    g: Signal
    h: Signal

    def __post_init__(self):
        for name in ("f", "g", "h"):
            object.__setattr__(self, name, _signal(getattr(self, name)))

    def on(self, grid):
        out = []
        for name in ("f", "g", "h"):
            vals = np.ascontiguousarray(getattr(self, name).on(grid), dtype=float)
            bad = np.flatnonzero(~np.isfinite(vals))
            if bad.size:
                i = int(bad[0])
                raise EvaluationError(
                    f"coefficient {name} is not finite at node {i} (t={grid.nodes[i]!r})",
                    index=i,
                    time=float(grid.nodes[i]),
                )
            out.append(vals)
        return tuple(out)

    def at_midpoints(self, grid):
        out = []
        for name in ("f", "g", "h"):
            vals = np.ascontiguousarray(getattr(self, name)(grid.midpoints), dtype=float)
            if not np.all(np.isfinite(vals)):
                i = int(np.flatnonzero(~np.isfinite(vals))[0])
                raise EvaluationError(
                    f"coefficient {name} is not finite at midpoint {i}", index=i
                )
            out.append(vals)
        return tuple(out)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Node values of a solution on ``grid``.

    When ``blowup_index`` is set, nodes from that index on are undefined
    (stored as NaN) and the node just before it reached the blow-up
    threshold or overflowed.
    """

    grid: Grid
    values: np.ndarray
    blowup_index: Optional[int] = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n,):
            raise ValueError(
                f"trajectory has {v.shape} values but its grid has {self.grid.n} nodes"
            )

    @property
    def defined(self):
        """Values up to (excluding) the blow-up index."""
        if self.blowup_index is None:
            return self.values
        return self.values[: self.blowup_index]

    def as_signal(self, label=None):
        if self.blowup_index is not None:
            raise ValueError("a trajectory with blow-up is not a signal on its grid")
        return Signal.sampled(self.values, self.grid, label=label)


def solve_riccati(rc, y0, grid, threshold=BLOWUP_THRESHOLD):
    """Classical RK4 for ``y' = -(f y^2 + g y + h)`` on ``grid``.

    Blow-up (``|y| >= threshold`` or overflow) is recorded on the
    returned trajectory, not raised.
    """
    fn, gn, hn = rc.on(grid)
    fm, gm, hm = rc.at_midpoints(grid)
    values, blowup = kernels.rk4_quadratic(
        fn, fm, gn, gm, hn, hm, float(y0), grid.step, float(threshold)
    )
    return Trajectory(grid, values, None if blowup < 0 else int(blowup))


def solve_linear_cauchy(drift, forcing, x0, grid):
    """Solution of ``x' = drift x + forcing`` by the variation-of-constants formula.

    x(t) = e^{D(t)} [x0 + int_{t0}^t e^{-D(z)} forcing(z) dz],  D = int drift,

    with both integrals done by the trapezoid rule (no time stepping).
    """
    D = cumulative(_signal(drift), grid)
    x = float(x0) * np.exp(D.values) + weighted_tail_curve(D, _signal(forcing), grid)
    if not np.all(np.isfinite(x)):
        i = int(np.flatnonzero(~np.isfinite(x))[0])
        raise EvaluationError(f"Cauchy formula overflowed at node {i}", index=i)
    return Trajectory(grid, x)


def _trajectory_values(traj):
    y = traj.defined
    if traj.blowup_index is not None:
        # the threshold node itself may hold an overflowed value
        y = y[:-1]
    if y.shape[0] < 2:
        raise ValueError("need at least two defined nodes to difference a trajectory")
    return np.asarray(y, dtype=float)


def riccati_residual(rc, traj):
    """``y' + f y^2 + g y + h`` along ``traj``, derivative by differences.

    Central differences inside, second-order one-sided differences at the
    ends. A trajectory satisfies the differential inequality numerically
    when every entry is ``>= -residual_slack(traj)``. For a blown-up
    trajectory only the nodes strictly before the threshold node are used.
    """
    if not isinstance(traj, Trajectory):
        raise TypeError("traj must be a Trajectory")
    y = _trajectory_values(traj)
    m = y.shape[0]
    fn, gn, hn = rc.on(traj.grid)
    d1 = np.gradient(y, traj.grid.step, edge_order=2 if m >= 3 else 1)
    return d1 + fn[:m] * y * y + gn[:m] * y + hn[:m]


def residual_slack(traj, safety=10.0):
    """Per-node tolerance ``safety * step^2 * local_scale`` for residuals.

    ``local_scale`` is ``1 + max(|y|, |y''|, |y'''|)`` over a five-node
    window, with derivatives estimated by repeated differencing. Near a
    kink in a coefficient the third difference grows like ``1/step`` and
    the slack widens accordingly.
    """
    y = _trajectory_values(traj)
    h = traj.grid.step
    m = y.shape[0]
    if m >= 3:
        d1 = np.gradient(y, h, edge_order=2)
        d2 = np.gradient(d1, h, edge_order=2)
        d3 = np.gradient(d2, h, edge_order=2)
        mag = np.abs(y) + np.abs(d2) + np.abs(d3)
    else:
        mag = np.abs(y)
    padded = np.pad(mag, 2, mode="edge")
    local = np.max(np.lib.stride_tricks.sliding_window_view(padded, 5), axis=1)
    return safety * h * h * (1.0 + local)


@dataclass(frozen=True, eq=False)
class ComparisonSetup:
    """Two equations, a solution ``y2`` of the second and two trial
    solutions ``eta1``, ``eta2`` of the matching inequalities."""

    eq1: RiccatiCoeffs
    eq2: RiccatiCoeffs
    y2: Trajectory
    eta1: Trajectory
    eta2: Trajectory
    gamma: float

    def validate(self, grid=None):
        grid = grid or self.y2.grid
        for name in ("y2", "eta1", "eta2"):
            if getattr(self, name).grid != grid:
                raise ValueError(f"{name} lives on a different grid")
        y20 = self.y2.values[0]
        for k, eta in ((1, self.eta1), (2, self.eta2)):
            if not y20 <= eta.values[0]:
                raise ValidationError(
                    f"need y2(t0) <= eta{k}(t0), got {y20!r} > {eta.values[0]!r}",
                    hypothesis=f"y2(t0) <= eta{k}(t0)",
                )
        if not (y20 <= self.gamma <= self.eta1.values[0]):
            raise ValidationError(
                f"gamma={self.gamma!r} outside [y2(t0), eta1(t0)] = "
                f"[{y20!r}, {self.eta1.values[0]!r}]",
                hypothesis="gamma in [y2(t0), eta1(t0)]",
            )


@dataclass(frozen=True, eq=False)
class HypothesisReport:
    f1_nonneg: bool
    integral_curve: np.ndarray
    condition_holds: bool
    first_violation: Optional[tuple]
    slack: float
    eta1_admissible: bool = True
    eta2_admissible: bool = True
    f1_violation: Optional[tuple] = None

    def __str__(self):
        lines = [
            f"f1 >= 0 at all nodes: {self.f1_nonneg}",
            f"min integral condition: {self.integral_curve.min():.17g}",
            f"eta1 admissible: {self.eta1_admissible}",
            f"eta2 admissible: {self.eta2_admissible}",
            f"condition holds: {self.condition_holds}",
        ]
        if self.first_violation is not None:
            i, val = self.first_violation
            lines.append(f"first violation: node {i}, value {val:.17g}")
        if self.f1_violation is not None:
            i, val = self.f1_violation
            lines.append(f"f1 negative first at node {i}: {val:.17g}")
        return "\n".join(lines)


def _admissible(rc, traj):
    if traj.blowup_index is not None and traj.blowup_index < 3:
        return False
    r = riccati_residual(rc, traj)
    return bool(np.all(r >= -residual_slack(traj)))


def check_theorem21(setup, grid=None, squared_difference="as_printed"):
    """Evaluate the hypotheses of the Riccati comparison theorem on ``grid``.

    The integral condition, at every node t, is

        gamma - y2(t0) + int_{t0}^t exp(int_{t0}^tau [f1 (eta1 + eta2) + g1])
                         * [(f2 - f1)^2 y2^2 + (g2 - g1) y2 + (h2 - h1)] dtau

    ``squared_difference="linear"`` replaces ``(f2 - f1)^2`` by
    ``(f2 - f1)``. The condition holds when ``f1 >= 0`` at every node and
    the curve stays above ``-1e-7 (1 + max|curve|)``. The trial solutions
    are checked against their inequalities and reported, but do not enter
    ``condition_holds``.
    """
    if squared_difference not in SQUARED_DIFFERENCE_MODES:
        raise ValueError(
            f"squared_difference must be one of {SQUARED_DIFFERENCE_MODES}, "
            f"got {squared_difference!r}"
        )
    grid = grid or setup.y2.grid
    setup.validate(grid)
    for name in ("y2", "eta1", "eta2"):
        if getattr(setup, name).blowup_index is not None:
            raise ValueError(f"{name} blows up on the grid; shorten the interval")
    f1, g1, h1 = setup.eq1.on(grid)
    f2, g2, h2 = setup.eq2.on(grid)
    y2 = setup.y2.values
    e1, e2 = setup.eta1.values, setup.eta2.values

    df = f2 - f1
    if squared_difference == "as_printed":
        df = df * df
    integrand_core = df * y2 * y2 + (g2 - g1) * y2 + (h2 - h1)
    E = cumulative(f1 * (e1 + e2) + g1, grid)
    inner = cumulative(np.exp(E.values) * integrand_core, grid)
    curve = setup.gamma - y2[0] + inner.values

    neg = np.flatnonzero(f1 < 0)
    f1_nonneg = neg.size == 0
    f1_violation = None if f1_nonneg else (int(neg[0]), float(f1[neg[0]]))

    slack = float(RELATIVE_SLACK * (1.0 + np.max(np.abs(curve))))
    bad = np.flatnonzero(curve < -slack)
    first = (int(bad[0]), float(curve[bad[0]])) if bad.size else None
    holds = f1_nonneg and first is None

    return HypothesisReport(
        f1_nonneg=f1_nonneg,
        integral_curve=curve,
        condition_holds=holds,
        first_violation=first,
        slack=slack,
        eta1_admissible=_admissible(setup.eq1, setup.eta1),
        eta2_admissible=_admissible(setup.eq2, setup.eta2),
        f1_violation=f1_violation,
    )


class Construction(NamedTuple):
    """Objects of the comparison argument for one bound problem."""

    A: Signal
    riccati2: RiccatiCoeffs
    linear1: RiccatiCoeffs
    y: Trajectory
    x: Trajectory


def build_comparison(p, u):
    """Build the Riccati/linear pair whose comparison yields the forced bound.

    With ``Y(t) = c + int v u`` and ``F = int f``:

    * ``A = v (Y - u + F) / Y**2`` must be nonnegative;
    * ``Y`` solves ``y' + A y^2 = v y + v F``, stored as ``(A, -v, -v F)``;
    * ``x`` solves ``x' = v x + v F`` from ``c`` (Cauchy formula),
      stored as ``(0, -v, -v F)``.

    Raises :class:`ValidationError` when ``u`` breaks the integral
    inequality beyond ``1e-7 (1 + |rhs|)`` or ``Y`` is not positive.
    """
    grid = p.grid
    p.validate()
    uu = np.asarray(u.on(grid) if isinstance(u, Signal) else u, dtype=float)
    if uu.shape != (grid.n,):
        raise ValueError("u does not match the problem grid")
    vv = np.asarray(p.v.on(grid), dtype=float)
    F = cumulative(p.f, grid).values
    Y = p.c + cumulative(vv * uu, grid).values

    rhs = Y + F
    slack = relative_slack(rhs)
    bad = np.flatnonzero(uu > rhs + slack)
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            "u violates u <= c + int v u + int f at node "
            f"{i} (t={grid.nodes[i]!r}): u={uu[i]!r}, rhs={rhs[i]!r}",
            hypothesis="u <= c + int v u + int f",
            index=i,
            value=float(uu[i] - rhs[i]),
        )
    bad = np.flatnonzero(~(Y > 0))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"c + int v u is not positive at node {i} (t={grid.nodes[i]!r}): {Y[i]!r}",
            hypothesis="c + int v u > 0",
            index=i,
            value=float(Y[i]),
        )

    A = vv * (Y - uu + F) / (Y * Y)
    floor = -vv * slack / (Y * Y)
    bad = np.flatnonzero(A < floor)
    if bad.size:  # pragma: no cover - implied by the check above
        i = int(bad[0])
        raise ValidationError(
            f"A(t) negative at node {i}: {A[i]!r}", hypothesis="A >= 0", index=i
        )

    A_sig = Signal.sampled(A, grid, label="A")
    minus_v = Signal.sampled(-vv, grid, label="-v")
    minus_vF = Signal.sampled(-vv * F, grid, label="-vF")
    riccati2 = RiccatiCoeffs(A_sig, minus_v, minus_vF)
    linear1 = RiccatiCoeffs(Signal.constant(0.0), minus_v, minus_vF)
    y = Trajectory(grid, Y)
    x = solve_linear_cauchy(Signal.sampled(vv, grid), Signal.sampled(vv * F, grid), p.c, grid)
    return Construction(A_sig, riccati2, linear1, y, x)


@dataclass(frozen=True)
class ComparisonVerdict:
    holds: bool
    first_violation: Optional[tuple]
    max_gap: float

    def __bool__(self):
        return self.holds


def verify_comparison(y, x):
    """Check ``y <= x + 1e-7 (1 + |x|)`` at every node.

    ``max_gap`` is ``max(y - x)`` (positive when ``y`` pokes above ``x``).
    """
    if y.grid != x.grid:
        raise ValueError("trajectories live on different grids")
    if y.blowup_index is not None or x.blowup_index is not None:
        raise ValueError("cannot compare trajectories with blow-up")
    gap = y.values - x.values
    bad = np.flatnonzero(gap > relative_slack(x.values))
    first = (int(bad[0]), float(gap[bad[0]])) if bad.size else None
    return ComparisonVerdict(first is None, first, float(np.max(gap)))
