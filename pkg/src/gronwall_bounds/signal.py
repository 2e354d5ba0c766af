"""Uniform time grids, scalar signals and trapezoid accumulation."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernels import kernels
from .errors import EvaluationError

__all__ = [
    "Grid",
    "Signal",
    "CumulativeIntegral",
    "cumulative",
    "weighted_tail_integral",
    "weighted_tail_curve",
    "trapezoid_error_bound",
]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``[t0, t1]`` into ``n`` nodes."""

    t0: float
    t1: float
    n: int

    def __post_init__(self):
        t0, t1 = float(self.t0), float(self.t1)
        if not (np.isfinite(t0) and np.isfinite(t1)):
            raise ValueError("grid end points must be finite")
        if not t1 > t0:
            raise ValueError(f"grid needs t1 > t0, got t0={t0}, t1={t1}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs an integer n >= 2, got {self.n}")
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "n", int(self.n))

    @property
    def step(self):
        return (self.t1 - self.t0) / (self.n - 1)

    @cached_property
    def nodes(self):
        t = self.t0 + np.arange(self.n) * self.step
        t[-1] = self.t1
        return _frozen(t)

    @cached_property
    def midpoints(self):
        return _frozen(self.nodes[:-1] + 0.5 * self.step)

    def node(self, i):
        if not -self.n <= i < self.n:
            raise IndexError(f"node index {i} outside 0..{self.n - 1}")
        return float(self.nodes[i])

    def refine(self, factor):
        """Grid over the same interval with ``factor`` times as many steps."""
        return Grid(self.t0, self.t1, (self.n - 1) * int(factor) + 1)

    def prefix(self, index):
        """Sub-grid made of nodes ``0..index`` (same node set)."""
        if not 1 <= index < self.n:
            raise IndexError(f"prefix end {index} outside 1..{self.n - 1}")
        return Grid(self.t0, self.t0 + index * self.step, index + 1)


class Signal:
    """A real function of time, closed-form or sampled.

    Closed-form signals wrap a callable that is applied to numpy arrays
    (scalar-returning callables are broadcast). Sampled signals hold node
    values on a :class:`Grid` and interpolate linearly between nodes; at a
    node they return the stored sample exactly.
    """

    __slots__ = ("_func", "_samples", "_grid", "label")

    def __init__(self, func=None, *, samples=None, grid=None, label=None):
        if (func is None) == (samples is None):
            raise ValueError("give exactly one of func or samples")
        if samples is not None:
            if grid is None:
                raise ValueError("sampled signal needs its grid")
            samples = _frozen(samples)
            if samples.shape != (grid.n,):
                raise ValueError(
                    f"expected {grid.n} samples for the grid, got shape {samples.shape}"
                )
        self._func = func
        self._samples = samples
        self._grid = grid
        self.label = label

    @classmethod
    def constant(cls, value):
        value = float(value)
        return cls(lambda t: np.full(np.shape(t), value), label=repr(value))

    @classmethod
    def from_function(cls, func, label=None):
        return cls(func, label=label)

    @classmethod
    def sampled(cls, values, grid, label=None):
        return cls(samples=values, grid=grid, label=label)

    @property
    def is_sampled(self):
        return self._samples is not None

    @property
    def grid(self):
        return self._grid

    @property
    def samples(self):
        return self._samples

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.asarray(t, dtype=float)
        if self._samples is not None:
            out = np.interp(t, self._grid.nodes, self._samples)
        else:
            out = np.broadcast_to(np.asarray(self._func(t), dtype=float), t.shape)
        return float(out) if scalar else np.array(out, dtype=float)

    def on(self, grid):
        """Node values on ``grid``."""
        if self._samples is not None and grid == self._grid:
            return self._samples
        return self(grid.nodes)

    def __repr__(self):
        kind = "sampled" if self.is_sampled else "closed-form"
        return f"Signal({kind}, {self.label or '?'})"


def _check_finite(values, grid, what="signal"):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = int(bad[0])
        raise EvaluationError(
            f"{what} is not finite at node {i} (t={grid.nodes[i]!r}): {values[i]!r}",
            index=i,
            time=float(grid.nodes[i]),
        )


@dataclass(frozen=True, eq=False)
class CumulativeIntegral:
    """Running integral from ``grid.t0`` to each node."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if self.values.shape != (self.grid.n,):
            raise ValueError("cumulative values do not match the grid")

    def __neg__(self):
        return CumulativeIntegral(self.grid, -self.values)


def _node_values(s, grid, what="signal"):
    y = np.asarray(s.on(grid) if isinstance(s, Signal) else s, dtype=float)
    if y.shape != (grid.n,):
        raise ValueError(f"{what} has shape {y.shape}, grid has {grid.n} nodes")
    _check_finite(y, grid, what)
    return np.ascontiguousarray(y)


def cumulative(s, grid):
    """Composite trapezoid running integral of ``s`` over ``grid``.

    ``s`` may be a :class:`Signal` or an array of node values. The sum is
    accumulated node to node, so a nonnegative integrand always yields a
    nondecreasing result.
    """
    y = _node_values(s, grid)
    return CumulativeIntegral(grid, kernels.cumtrapz(y, grid.step))


def weighted_tail_integral(w, s, grid, t_index):
    """Trapezoid value of ``int_{t0}^{t_k} exp(W(t_k) - W(z)) s(z) dz``.

    ``w`` is the running integral ``W`` of the rate; the exponential
    weight is ``exp(int_z^{t_k} rate)``. Evaluated as a direct sum over
    nodes ``0..t_index``.
    """
    if w.grid != grid:
        raise ValueError("weight integral was built on a different grid")
    if isinstance(t_index, (bool, np.bool_)) or int(t_index) != t_index:
        raise TypeError(f"t_index must be an integer, got {t_index!r}")
    k = int(t_index)
    if not 0 <= k < grid.n:
        raise IndexError(f"t_index {k} outside 0..{grid.n - 1}")
    if k == 0:
        return 0.0
    y = _node_values(s, grid)[: k + 1]
    W = w.values[: k + 1]
    terms = np.exp(W[k] - W) * y
    return float(grid.step * (terms[0] / 2 + terms[1:k].sum() + terms[k] / 2))


def weighted_tail_curve(w, s, grid):
    """:func:`weighted_tail_integral` at every node, in O(n).

    Uses the one-step recurrence
    ``I[k+1] = e^{dW} I[k] + h (e^{dW} s[k] + s[k+1]) / 2``.
    """
    if w.grid != grid:
        raise ValueError("weight integral was built on a different grid")
    y = _node_values(s, grid)
    return kernels.weighted_tail(np.ascontiguousarray(w.values), y, grid.step)


def trapezoid_error_bound(grid, second_derivative_bound, safety=10.0):
    """Safety-scaled composite trapezoid error bound on ``grid``.

    ``safety * step**2 * (t1 - t0) * M / 12`` with ``M`` a bound on the
    integrand's second derivative.
    """
    span = grid.t1 - grid.t0
    return safety * grid.step**2 * span * second_derivative_bound / 12.0
