"""Independent references: equality-case trajectories and random instances.

Random instances come from SplitMix64 (Steele, Lea & Flood 2014) with the
usual constants::

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z ^= z >> 31

all modulo 2**64. A uniform double on [0, 1) is ``(z >> 11) * 2**-53``.
Instance ``k`` of a batch seeded with ``seed`` uses its own stream seeded
with ``(seed + k) mod 2**64``, so instances do not depend on each other or
on generation order.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import kernels
from .gronwall import BoundProblem
from .riccati import Trajectory
from .signal import Grid, Signal, cumulative

__all__ = [
    "SplitMix64",
    "TrigPoly",
    "RandomInstanceSpec",
    "equality_case",
    "discrete_equality_case",
    "generate_instances",
    "generate_linear_systems",
    "generate_smooth_pairs",
]

_MASK = (1 << 64) - 1
ORACLE_REFINEMENT = 4


class SplitMix64:
    """Tiny, portable 64-bit generator; see the module docstring."""

    def __init__(self, seed):
        self.state = int(seed) & _MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self):
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.random()

    def choice(self, options):
        return options[self.next_u64() % len(options)]


class TrigPoly:
    """``a0 + sum_k a_k cos(k t) + b_k sin(k t)``, optionally ``|.|`` or squared."""

    def __init__(self, coeffs, post=None):
        self.coeffs = np.array(coeffs, dtype=float)
        if self.coeffs.ndim != 1 or self.coeffs.size % 2 != 1:
            raise ValueError("need 2*degree + 1 coefficients")
        self.post = post

    @property
    def degree(self):
        return (self.coeffs.size - 1) // 2

    @classmethod
    def draw(cls, rng, degree, post=None):
        return cls([rng.uniform(-1.0, 1.0) for _ in range(2 * degree + 1)], post)

    def raw(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.coeffs[0])
        for k in range(1, self.degree + 1):
            out = out + self.coeffs[2 * k - 1] * np.cos(k * t) + self.coeffs[2 * k] * np.sin(k * t)
        return out

    def __call__(self, t):
        p = self.raw(t)
        if self.post == "abs":
            return np.abs(p)
        if self.post == "square":
            return p * p
        return p

    def signal(self, label=None):
        return Signal.from_function(self, label=label or f"trigpoly{self.coeffs.tolist()}")


@dataclass(frozen=True)
class RandomInstanceSpec:
    seed: int
    count: int
    c_range: tuple = (0.1, 10.0)
    coefficient_degree: int = 3
    horizon: float = 1.0
    n: int = 2001

    def __post_init__(self):
        lo, hi = self.c_range
        if not lo <= hi:
            raise ValueError("c_range must be nonempty")
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.coefficient_degree < 0:
            raise ValueError("coefficient_degree must be >= 0")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")


def _rk4_linear_scalar(v, f, c, grid):
    # u' = v u + f  is  u' + 0 u^2 + (-v) u + (-f) = 0
    vn, vm = v(grid.nodes), v(grid.midpoints)
    fn, fm = f(grid.nodes), f(grid.midpoints)
    zn, zm = np.zeros(grid.n), np.zeros(grid.n - 1)
    values, _ = kernels.rk4_quadratic(
        zn, zm, -vn, -vm, -fn, -fm, float(c), grid.step, np.inf
    )
    return values


def equality_case(p, refinement=ORACLE_REFINEMENT):
    """Trajectory of ``u' = v u + f``, ``u(t0) = c``: the case where the
    integral inequality holds with equality.

    Solved by RK4 on a grid with ``refinement`` times as many steps, then
    restricted to the nodes of ``p.grid``.
    """
    fine = p.grid.refine(refinement)
    u = _rk4_linear_scalar(p.v, p.f, p.c, fine)
    return Trajectory(p.grid, u[::refinement])


def discrete_equality_case(p):
    """Grid trajectory with ``u = c + int v u + int f`` holding exactly
    under the trapezoid rule used everywhere else.

    Solves ``u[k+1] = u[k] + h/2 (v[k] u[k] + v[k+1] u[k+1]) + F[k+1] - F[k]``
    node by node. It converges to :func:`equality_case` at second order
    and saturates the discretised inequality to roundoff.
    """
    g = p.grid
    h = g.step
    v = np.asarray(p.v.on(g), dtype=float)
    F = cumulative(p.f, g).values
    u = np.empty(g.n)
    u[0] = p.c
    for k in range(g.n - 1):
        denom = 1.0 - 0.5 * h * v[k + 1]
        if denom <= 0:
            raise ValueError("grid too coarse for the implicit trapezoid step")
        u[k + 1] = (u[k] + 0.5 * h * v[k] * u[k] + F[k + 1] - F[k]) / denom
    return Trajectory(g, u)


def _stream(seed, k):
    return SplitMix64((int(seed) + k) & _MASK)


def generate_instances(spec, post="abs"):
    """Deterministic list of :class:`BoundProblem` for ``spec``.

    ``c`` is uniform on ``spec.c_range``; ``v`` and ``f`` are trigonometric
    polynomials with coefficients uniform on [-1, 1], passed through
    ``post`` (``"abs"`` by default, ``"square"`` for smooth nonnegative
    data).
    """
    grid = Grid(0.0, spec.horizon, spec.n)
    out = []
    for k in range(spec.count):
        rng = _stream(spec.seed, k)
        c = rng.uniform(*spec.c_range)
        v = TrigPoly.draw(rng, spec.coefficient_degree, post)
        f = TrigPoly.draw(rng, spec.coefficient_degree, post)
        out.append(BoundProblem(c, v.signal("v"), f.signal("f"), grid))
    return out


def generate_smooth_pairs(seed, count, degree=3):
    """``(v, f)`` pairs of smooth signals: ``v = p**2 >= 0``, ``f = q``."""
    pairs = []
    for k in range(count):
        rng = _stream(seed, k)
        v = TrigPoly.draw(rng, degree, "square")
        f = TrigPoly.draw(rng, degree)
        pairs.append((v.signal("v"), f.signal("f")))
    return pairs


def generate_linear_systems(seed, count, horizon=1.0, n=2001, dims=(2, 3, 4), degree=3):
    """Random :class:`~gronwall_bounds.linsys.LinearSystem` instances.

    Dimension is drawn from ``dims``; every entry of ``A`` and ``g`` is a
    trigonometric polynomial of ``degree``; ``Y0`` is uniform on [-1, 1].
    """
    from .linsys import LinearSystem, TensorSignal

    grid = Grid(0.0, horizon, n)
    systems = []
    for k in range(count):
        rng = _stream(seed, k)
        d = rng.choice(dims)
        A = [[TrigPoly.draw(rng, degree) for _ in range(d)] for _ in range(d)]
        g = [TrigPoly.draw(rng, degree) for _ in range(d)]
        Y0 = np.array([rng.uniform(-1.0, 1.0) for _ in range(d)])
        systems.append(
            LinearSystem(
                TensorSignal.from_entries(A),
                TensorSignal.from_entries(g),
                Y0,
                grid,
            )
        )
    return systems
