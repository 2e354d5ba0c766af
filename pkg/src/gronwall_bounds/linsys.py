"""Norm envelopes for linear systems ``Y' = A(t) Y + g(t)``.

Substituting ``u = |Y|``, ``v = ||A||`` (spectral norm) and ``f = |g|``
into the two-sided envelope gives lower and upper curves for the
Euclidean norm of any solution.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import kernels
from .errors import EvaluationError, ValidationError
from .gronwall import Envelope, two_sided_envelope
from .riccati import RELATIVE_SLACK
from .signal import Signal

__all__ = [
    "TensorSignal",
    "LinearSystem",
    "NormEnvelopeReport",
    "operator_norm",
    "operator_norms",
    "integrate_system",
    "norm_envelope",
]

POWER_MAX_ITER = 200
POWER_TOL = 1e-10


class TensorSignal:
    """Vector- or matrix-valued signal.

    ``func`` maps an array of times of shape ``(m,)`` to an array of shape
    ``(m,) + shape``. Sampled tensors interpolate linearly entry by entry.
    """

    def __init__(self, func, shape):
        self._func = func
        self.shape = tuple(shape)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.asarray(self._func(t), dtype=float)
        return np.ascontiguousarray(np.broadcast_to(out, t.shape + self.shape))

    @classmethod
    def from_entries(cls, entries):
        """Build from a nested list of scalar signals, callables or numbers."""
        arr = _object_array(entries)
        shape = arr.shape
        flat = [
            e if isinstance(e, Signal) else (Signal.from_function(e) if callable(e) else Signal.constant(e))
            for e in arr.ravel()
        ]

        def evaluate(t):
            cols = [np.broadcast_to(np.asarray(s(t), dtype=float), t.shape) for s in flat]
            return np.stack(cols, axis=-1).reshape(t.shape + shape)

        return cls(evaluate, shape)

    @classmethod
    def constant(cls, value):
        value = np.array(value, dtype=float)
        return cls(lambda t: np.broadcast_to(value, t.shape + value.shape), value.shape)

    @classmethod
    def sampled(cls, samples, grid):
        samples = np.array(samples, dtype=float)
        if samples.shape[0] != grid.n:
            raise ValueError(f"expected {grid.n} samples along the first axis")
        shape = samples.shape[1:]
        flat = samples.reshape(grid.n, -1)
        nodes = grid.nodes

        def evaluate(t):
            cols = [np.interp(t, nodes, flat[:, j]) for j in range(flat.shape[1])]
            return np.stack(cols, axis=-1).reshape(t.shape + shape)

        return cls(evaluate, shape)


def _object_array(entries):
    if isinstance(entries, np.ndarray) and entries.dtype != object:
        return entries.astype(object)
    rows = list(entries)
    if rows and isinstance(rows[0], (list, tuple, np.ndarray)):
        out = np.empty((len(rows), len(rows[0])), dtype=object)
        for i, row in enumerate(rows):
            if len(row) != len(rows[0]):
                raise ValueError("ragged matrix entries")
            for j, e in enumerate(row):
                out[i, j] = e
        return out
    out = np.empty(len(rows), dtype=object)
    for i, e in enumerate(rows):
        out[i] = e
    return out


@dataclass(frozen=True, eq=False)
class LinearSystem:
    A: TensorSignal
    g: TensorSignal
    Y0: np.ndarray
    grid: object

    def __post_init__(self):
        Y0 = np.array(self.Y0, dtype=float).reshape(-1)
        object.__setattr__(self, "Y0", Y0)
        d = Y0.shape[0]
        if d < 1:
            raise ValueError("system dimension must be positive")
        if self.A.shape != (d, d):
            raise ValueError(f"A has shape {self.A.shape}, expected {(d, d)}")
        if self.g.shape != (d,):
            raise ValueError(f"g has shape {self.g.shape}, expected {(d,)}")
        if not np.all(np.isfinite(Y0)):
            raise ValidationError("Y0 must be finite", hypothesis="finite Y0")

    @property
    def dim(self):
        return self.Y0.shape[0]

    def _eval(self, sig, t, name):
        vals = sig(t)
        bad = np.flatnonzero(~np.all(np.isfinite(vals.reshape(vals.shape[0], -1)), axis=1))
        if bad.size:
            i = int(bad[0])
            raise EvaluationError(f"{name} is not finite at t={t[i]!r}", index=i, time=float(t[i]))
        return vals

    def A_nodes(self):
        return self._eval(self.A, self.grid.nodes, "A")

    def g_nodes(self):
        return self._eval(self.g, self.grid.nodes, "g")


def operator_norms(M, max_iter=POWER_MAX_ITER, tol=POWER_TOL):
    """Spectral norms of a stack ``M[k]`` of square matrices.

    Returns ``(norms, converged)``; where power iteration did not settle,
    the Frobenius norm (an upper bound) is used and ``converged`` is False.
    """
    M = np.ascontiguousarray(M, dtype=float)
    if M.ndim != 3 or M.shape[1] != M.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return kernels.power_norms(M, int(max_iter), float(tol))


def operator_norm(M, full_output=False, max_iter=POWER_MAX_ITER, tol=POWER_TOL):
    """Largest singular value of ``M`` by power iteration on ``M.T @ M``.

    Stops when the Rayleigh quotient changes by less than ``tol``
    relative; after ``max_iter`` iterations without that, falls back to
    the Frobenius norm. With ``full_output=True`` returns
    ``(norm, converged)``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    norms, ok = operator_norms(M[None], max_iter, tol)
    if full_output:
        return float(norms[0]), bool(ok[0])
    return float(norms[0])


def integrate_system(sys):
    """RK4 states of ``sys`` at every grid node, shape ``(n, dim)``.

    ``A`` and ``g`` are evaluated at nodes and at step midpoints.
    """
    grid = sys.grid
    A_n = sys.A_nodes()
    A_m = sys._eval(sys.A, grid.midpoints, "A")
    g_n = sys.g_nodes()
    g_m = sys._eval(sys.g, grid.midpoints, "g")
    Y = kernels.rk4_linear(A_n, A_m, g_n, g_m, np.ascontiguousarray(sys.Y0), grid.step)
    bad = np.flatnonzero(~np.all(np.isfinite(Y), axis=1))
    if bad.size:
        i = int(bad[0])
        raise EvaluationError(
            f"state became non-finite at node {i} (t={grid.nodes[i]!r})",
            index=i,
            time=float(grid.nodes[i]),
        )
    return Y


@dataclass(frozen=True, eq=False)
class NormEnvelopeReport:
    envelope: Envelope
    actual_norm: np.ndarray
    contained: bool
    max_upper_gap: float
    max_lower_gap: float
    rate: np.ndarray
    forcing: np.ndarray
    norm_fallback: bool = False

    def verdict(self):
        return f"contained: {'true' if self.contained else 'false'}"


def norm_envelope(sys):
    """Two-sided envelope of ``|Y(t)|`` and a containment check.

    ``max_upper_gap`` is ``max(|Y| - upper)`` and ``max_lower_gap`` is
    ``max(lower - |Y|)``; both are <= 0 when the envelope holds strictly.
    Containment allows ``1e-7 (1 + |side|)`` on each side.
    """
    grid = sys.grid
    rate, ok = operator_norms(sys.A_nodes())
    forcing = np.linalg.norm(sys.g_nodes(), axis=1)
    u0 = float(np.linalg.norm(sys.Y0))
    env = two_sided_envelope(
        u0, Signal.sampled(rate, grid, "|A|"), Signal.sampled(forcing, grid, "|g|"), grid
    )
    Y = integrate_system(sys)
    actual = np.linalg.norm(Y, axis=1)
    up_gap = actual - env.upper
    lo_gap = env.lower - actual
    contained = env.contains(actual, rtol=RELATIVE_SLACK)
    return NormEnvelopeReport(
        envelope=env,
        actual_norm=actual,
        contained=contained,
        max_upper_gap=float(np.max(up_gap)),
        max_lower_gap=float(np.max(lo_gap)),
        rate=rate,
        forcing=forcing,
        norm_fallback=not bool(np.all(ok)),
    )
