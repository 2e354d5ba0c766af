"""Hot numeric loops.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version. The active set is chosen once at import time from the
``GRONWALL_BOUNDS_NUMBA`` environment variable (``0``/``false``/``no``
disables the JIT path). Both sets are importable directly as
:data:`NUMBA_KERNELS` and :data:`NUMPY_KERNELS` so tests and the
benchmark can compare them side by side.
"""

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FALSE = {"0", "false", "no", "off"}

NUMBA_REQUESTED = os.environ.get("GRONWALL_BOUNDS_NUMBA", "1").strip().lower() not in _FALSE
NUMBA_AVAILABLE = numba is not None


# ---------------------------------------------------------------------------
# trapezoid accumulation


def _cumtrapz_py(y, h):
    out = np.empty(y.shape[0])
    out[0] = 0.0
    acc = 0.0
    for i in range(y.shape[0] - 1):
        acc += h * (y[i] + y[i + 1]) / 2.0
        out[i + 1] = acc
    return out


def _cumtrapz_np(y, h):
    out = np.empty(y.shape[0])
    out[0] = 0.0
    # np.cumsum accumulates strictly left to right, same as the loop
    np.cumsum(h * (y[:-1] + y[1:]) / 2.0, out=out[1:])
    return out


# ---------------------------------------------------------------------------
# exponentially weighted running integral
#
#   I[k] = trapezoid over nodes 0..k of exp(W[k] - W[j]) * s[j]
#
# via I[k+1] = e^{dW} I[k] + h/2 (e^{dW} s[k] + s[k+1]), dW = W[k+1] - W[k].


def _weighted_tail_py(W, s, h):
    n = W.shape[0]
    out = np.empty(n)
    out[0] = 0.0
    acc = 0.0
    for k in range(n - 1):
        r = np.exp(W[k + 1] - W[k])
        acc = r * acc + h * (r * s[k] + s[k + 1]) / 2.0
        out[k + 1] = acc
    return out


def _weighted_tail_np(W, s, h):
    if W.shape[0] < 2:
        return np.zeros(W.shape[0])
    if np.max(np.abs(W)) > 600.0:
        # factorised form would overflow
        return _weighted_tail_py(W, s, h)
    scaled = np.exp(-W) * s
    return np.exp(W) * _cumtrapz_np(scaled, h)


# ---------------------------------------------------------------------------
# classical RK4 for the scalar quadratic ODE  y' = -(a y^2 + b y + c)
# with coefficients sampled at nodes and at step midpoints.
# Returns (values, blowup_index); blowup_index == -1 means no blow-up.


def _rk4_quadratic_py(a_n, a_m, b_n, b_m, c_n, c_m, y0, h, threshold):
    n = a_n.shape[0]
    out = np.empty(n)
    out[:] = np.nan
    out[0] = y0
    y = y0
    blowup = -1
    if not np.isfinite(y) or abs(y) >= threshold:
        if not np.isfinite(y):
            out[0] = np.inf
        return out, 1 if n > 1 else -1
    for i in range(n - 1):
        k1 = -(a_n[i] * y * y + b_n[i] * y + c_n[i])
        z = y + 0.5 * h * k1
        k2 = -(a_m[i] * z * z + b_m[i] * z + c_m[i])
        z = y + 0.5 * h * k2
        k3 = -(a_m[i] * z * z + b_m[i] * z + c_m[i])
        z = y + h * k3
        k4 = -(a_n[i + 1] * z * z + b_n[i + 1] * z + c_n[i + 1])
        y_new = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not np.isfinite(y_new):
            out[i + 1] = np.inf if y >= 0.0 else -np.inf
            blowup = i + 2
            break
        out[i + 1] = y_new
        if abs(y_new) >= threshold:
            blowup = i + 2
            break
        y = y_new
    if blowup > n - 1:
        # crossed on the last node: nothing left to mark as absent
        blowup = n
    return out, blowup


# the step loop has no useful vector form; the numpy path runs it in Python
def _quiet(fn):
    # overflow is detected by the callers; match the silent numba path
    def wrapped(*args):
        with np.errstate(over="ignore", invalid="ignore"):
            return fn(*args)

    wrapped.__name__ = fn.__name__
    return wrapped


_rk4_quadratic_np = _quiet(_rk4_quadratic_py)


# ---------------------------------------------------------------------------
# classical RK4 for Y' = A(t) Y + g(t)


def _rk4_linear_py(A_n, A_m, g_n, g_m, y0, h):
    n = A_n.shape[0]
    d = y0.shape[0]
    out = np.empty((n, d))
    out[0] = y0
    y = y0.copy()
    for i in range(n - 1):
        k1 = A_n[i] @ y + g_n[i]
        k2 = A_m[i] @ (y + 0.5 * h * k1) + g_m[i]
        k3 = A_m[i] @ (y + 0.5 * h * k2) + g_m[i]
        k4 = A_n[i + 1] @ (y + h * k3) + g_n[i + 1]
        y = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[i + 1] = y
    return out


def _rk4_linear_nb(A_n, A_m, g_n, g_m, y0, h):
    n = A_n.shape[0]
    d = y0.shape[0]
    out = np.empty((n, d))
    y = y0.copy()
    for j in range(d):
        out[0, j] = y[j]
    k1 = np.empty(d)
    k2 = np.empty(d)
    k3 = np.empty(d)
    k4 = np.empty(d)
    z = np.empty(d)
    for i in range(n - 1):
        for r in range(d):
            acc = g_n[i, r]
            for c in range(d):
                acc += A_n[i, r, c] * y[c]
            k1[r] = acc
        for r in range(d):
            z[r] = y[r] + 0.5 * h * k1[r]
        for r in range(d):
            acc = g_m[i, r]
            for c in range(d):
                acc += A_m[i, r, c] * z[c]
            k2[r] = acc
        for r in range(d):
            z[r] = y[r] + 0.5 * h * k2[r]
        for r in range(d):
            acc = g_m[i, r]
            for c in range(d):
                acc += A_m[i, r, c] * z[c]
            k3[r] = acc
        for r in range(d):
            z[r] = y[r] + h * k3[r]
        for r in range(d):
            acc = g_n[i + 1, r]
            for c in range(d):
                acc += A_n[i + 1, r, c] * z[c]
            k4[r] = acc
        for r in range(d):
            y[r] = y[r] + h * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]) / 6.0
            out[i + 1, r] = y[r]
    return out


_rk4_linear_np = _quiet(_rk4_linear_py)


# ---------------------------------------------------------------------------
# spectral norm of a stack of small dense matrices by power iteration on M^T M


def _start_vector(d):
    # fixed, generic start; orthogonal to a top singular vector only on a null set
    w = np.empty(d)
    for j in range(d):
        w[j] = 1.0 + 0.5 * np.sin(1.0 + 2.399963 * j)
    return w / np.sqrt(np.sum(w * w))


def _power_norms_py(M, max_iter, tol):
    m = M.shape[0]
    d = M.shape[2]
    norms = np.empty(m)
    ok = np.zeros(m, dtype=np.bool_)
    w0 = _start_vector(d)
    for k in range(m):
        B = M[k].T @ M[k]
        x = w0.copy()
        lam = 0.0
        for _ in range(max_iter):
            y = B @ x
            ny = np.sqrt(np.sum(y * y))
            if ny == 0.0:
                lam = 0.0
                ok[k] = True
                break
            lam_new = np.sum(x * y)
            x = y / ny
            if abs(lam_new - lam) <= tol * abs(lam_new):
                lam = lam_new
                ok[k] = True
                break
            lam = lam_new
        if ok[k]:
            norms[k] = np.sqrt(max(lam, 0.0))
        else:
            norms[k] = np.sqrt(np.sum(M[k] * M[k]))
    return norms, ok


def _power_norms_np(M, max_iter, tol):
    m, _, d = M.shape
    B = np.einsum("kij,kil->kjl", M, M)
    x = np.broadcast_to(_start_vector(d), (m, d)).copy()
    lam = np.zeros(m)
    done = np.zeros(m, dtype=bool)
    for _ in range(max_iter):
        active = ~done
        if not active.any():
            break
        xa = x[active]
        y = np.einsum("kij,kj->ki", B[active], xa)
        ny = np.sqrt(np.sum(y * y, axis=1))
        lam_new = np.sum(xa * y, axis=1)
        zero = ny == 0.0
        lam_new[zero] = 0.0
        safe = np.where(zero, 1.0, ny)
        conv = zero | (np.abs(lam_new - lam[active]) <= tol * np.abs(lam_new))
        idx = np.flatnonzero(active)
        x[idx] = np.where(zero[:, None], xa, y / safe[:, None])
        lam[idx] = lam_new
        done[idx[conv]] = True
    norms = np.sqrt(np.maximum(lam, 0.0))
    frob = np.sqrt(np.sum(M * M, axis=(1, 2)))
    norms = np.where(done, norms, frob)
    return norms, done


NUMPY_KERNELS = SimpleNamespace(
    name="numpy",
    cumtrapz=_cumtrapz_np,
    weighted_tail=_weighted_tail_np,
    rk4_quadratic=_rk4_quadratic_np,
    rk4_linear=_rk4_linear_np,
    power_norms=_power_norms_np,
)

if NUMBA_AVAILABLE:
    _njit = numba.njit(cache=True, nogil=True)
    _start_vector_nb = _njit(_start_vector)

    def _power_norms_src(M, max_iter, tol):
        m = M.shape[0]
        d = M.shape[2]
        norms = np.empty(m)
        ok = np.zeros(m, dtype=np.bool_)
        w0 = _start_vector_nb(d)
        B = np.empty((d, d))
        x = np.empty(d)
        y = np.empty(d)
        for k in range(m):
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for r in range(d):
                        acc += M[k, r, i] * M[k, r, j]
                    B[i, j] = acc
            for i in range(d):
                x[i] = w0[i]
            lam = 0.0
            for _ in range(max_iter):
                ny = 0.0
                lam_new = 0.0
                for i in range(d):
                    acc = 0.0
                    for j in range(d):
                        acc += B[i, j] * x[j]
                    y[i] = acc
                    ny += acc * acc
                    lam_new += x[i] * acc
                ny = np.sqrt(ny)
                if ny == 0.0:
                    lam = 0.0
                    ok[k] = True
                    break
                for i in range(d):
                    x[i] = y[i] / ny
                if abs(lam_new - lam) <= tol * abs(lam_new):
                    lam = lam_new
                    ok[k] = True
                    break
                lam = lam_new
            if ok[k]:
                norms[k] = np.sqrt(max(lam, 0.0))
            else:
                fro = 0.0
                for i in range(d):
                    for j in range(d):
                        fro += M[k, i, j] * M[k, i, j]
                norms[k] = np.sqrt(fro)
        return norms, ok

    NUMBA_KERNELS = SimpleNamespace(
        name="numba",
        cumtrapz=_njit(_cumtrapz_py),
        weighted_tail=_njit(_weighted_tail_py),
        rk4_quadratic=_njit(_rk4_quadratic_py),
        rk4_linear=_njit(_rk4_linear_nb),
        power_norms=_njit(_power_norms_src),
    )
else:  # pragma: no cover
    NUMBA_KERNELS = None

USE_NUMBA = NUMBA_REQUESTED and NUMBA_AVAILABLE
kernels = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS
