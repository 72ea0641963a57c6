"""Hot numerical kernels with a numba path and a pure numpy/python fallback.

Set ``TFRW_DISABLE_NUMBA=1`` to force the fallback. The flag is read on every
dispatch, so it can be toggled at runtime (tests rely on this).
"""
import math
import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _mirror_accel(a, K, omega2, a_eq):
    return K / (a * a) - omega2 * (a - a_eq)


def _verlet_loop(a0, v0, t0, dt, steps, K, omega2, a_eq):
    t = np.empty(steps + 1)
    a = np.empty(steps + 1)
    v = np.empty(steps + 1)
    t[0] = t0
    a[0] = a0
    v[0] = v0
    ai = a0
    vi = v0
    acc = K / (ai * ai) - omega2 * (ai - a_eq)
    for i in range(steps):
        vh = vi + 0.5 * dt * acc
        ai = ai + dt * vh
        if not ai > 0.0:
            return t[: i + 1], a[: i + 1], v[: i + 1], i + 1
        acc = K / (ai * ai) - omega2 * (ai - a_eq)
        vi = vh + 0.5 * dt * acc
        t[i + 1] = t0 + (i + 1) * dt
        a[i + 1] = ai
        v[i + 1] = vi
    return t, a, v, -1


def _rk4_loop(a0, v0, t0, dt, steps, K, omega2, a_eq):
    t = np.empty(steps + 1)
    a = np.empty(steps + 1)
    v = np.empty(steps + 1)
    t[0] = t0
    a[0] = a0
    v[0] = v0
    ai = a0
    vi = v0
    for i in range(steps):
        k1a = vi
        k1v = K / (ai * ai) - omega2 * (ai - a_eq)
        a2 = ai + 0.5 * dt * k1a
        if not a2 > 0.0:
            return t[: i + 1], a[: i + 1], v[: i + 1], i + 1
        k2a = vi + 0.5 * dt * k1v
        k2v = K / (a2 * a2) - omega2 * (a2 - a_eq)
        a3 = ai + 0.5 * dt * k2a
        if not a3 > 0.0:
            return t[: i + 1], a[: i + 1], v[: i + 1], i + 1
        k3a = vi + 0.5 * dt * k2v
        k3v = K / (a3 * a3) - omega2 * (a3 - a_eq)
        a4 = ai + dt * k3a
        if not a4 > 0.0:
            return t[: i + 1], a[: i + 1], v[: i + 1], i + 1
        k4a = vi + dt * k3v
        k4v = K / (a4 * a4) - omega2 * (a4 - a_eq)
        ai = ai + dt * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0
        vi = vi + dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
        if not ai > 0.0:
            return t[: i + 1], a[: i + 1], v[: i + 1], i + 1
        t[i + 1] = t0 + (i + 1) * dt
        a[i + 1] = ai
        v[i + 1] = vi
    return t, a, v, -1


def _weighted_matvec_numpy(K, w, h):
    return K @ (w * h)


def _weighted_matvec_blas(K, w, h):
    # numba lowers np.dot to BLAS; a hand-written loop is several times slower
    return np.dot(K, w * h)


def _log_gaussian_kernel_numpy(a, c, log_s, width):
    z = (np.log(a)[:, None] - np.log(c)[None, :] - log_s) / width
    return np.exp(-0.5 * z * z) / (_SQRT_2PI * width * a[:, None])


def _log_gaussian_kernel_loops(a, c, log_s, width):
    n = a.shape[0]
    m = c.shape[0]
    out = np.empty((n, m))
    log_c = np.log(c)
    norm = 1.0 / (_SQRT_2PI * width)
    for i in range(n):
        la = math.log(a[i])
        pre = norm / a[i]
        for j in range(m):
            z = (la - log_c[j] - log_s) / width
            out[i, j] = pre * math.exp(-0.5 * z * z)
    return out


NUMPY = SimpleNamespace(
    name="numpy",
    verlet=_verlet_loop,
    rk4=_rk4_loop,
    weighted_matvec=_weighted_matvec_numpy,
    log_gaussian_kernel=_log_gaussian_kernel_numpy,
)

if numba is not None:
    _jit = numba.njit(cache=True, nogil=True)
    NUMBA = SimpleNamespace(
        name="numba",
        verlet=_jit(_verlet_loop),
        rk4=_jit(_rk4_loop),
        weighted_matvec=_jit(_weighted_matvec_blas),
        log_gaussian_kernel=_jit(_log_gaussian_kernel_loops),
    )
else:  # pragma: no cover
    NUMBA = None


def numba_enabled():
    flag = os.environ.get("TFRW_DISABLE_NUMBA", "").strip().lower()
    return NUMBA is not None and flag not in ("1", "true", "yes", "on")


def active():
    """Kernel namespace selected by the environment."""
    return NUMBA if numba_enabled() else NUMPY


def verlet(a0, v0, t0, dt, steps, K, omega2=0.0, a_eq=0.0):
    return active().verlet(float(a0), float(v0), float(t0), float(dt), int(steps),
                           float(K), float(omega2), float(a_eq))


def rk4(a0, v0, t0, dt, steps, K, omega2=0.0, a_eq=0.0):
    return active().rk4(float(a0), float(v0), float(t0), float(dt), int(steps),
                        float(K), float(omega2), float(a_eq))


def weighted_matvec(K, w, h):
    """``sum_j K[i, j] * w[j] * h[j]`` for complex ``K`` and ``h``."""
    K = np.ascontiguousarray(K, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.complex128)
    return active().weighted_matvec(K, w, h)


def log_gaussian_kernel(a, c, log_s, width):
    """Matrix ``phi((log a_i - log c_j - log_s) / width) / (width * a_i)``."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    return active().log_gaussian_kernel(a, c, float(log_s), float(width))
