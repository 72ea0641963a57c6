"""The measurement back-action kernel ``q`` as a function of ``r = a / c``.

``q(a, c) = (ac)^{-1/2} integral conj(g(w / a)) f(w / c) dw`` depends on the
scale factors only through their ratio, so every backend evaluates ``q(r)``
with ``r = a / c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import InvalidArgumentError, MultimodalError
from .profiles import Lorentzian, SpectralProfile
from .quadrature import integrate_real_line

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def q_numeric(f: SpectralProfile, g: SpectralProfile, r, rtol=1e-10) -> complex:
    """``r^{-1/2} integral conj(g(w / r)) f(w) dw`` by adaptive quadrature."""
    if not r > 0:
        raise InvalidArgumentError(f"scale-factor ratio must be positive, got {r!r}")
    features = list(f.features()) + [(r * c, r * w) for c, w in g.features()]
    support = _intersect(f.support, None if g.support is None else
                         (r * g.support[0], r * g.support[1]))
    val = integrate_real_line(lambda w: np.conj(g(w / r)) * f(w), features, rtol=rtol,
                              support=support)
    return val / math.sqrt(r)


def q_pair_numeric(f, g, a, c, rtol=1e-10) -> complex:
    """Two-argument form ``(ac)^{-1/2} integral conj(g(w / a)) f(w / c) dw``."""
    if not (a > 0 and c > 0):
        raise InvalidArgumentError("scale factors must be positive")
    features = [(c * x, c * w) for x, w in f.features()] + \
               [(a * x, a * w) for x, w in g.features()]
    fs = None if f.support is None else (c * f.support[0], c * f.support[1])
    gs = None if g.support is None else (a * g.support[0], a * g.support[1])
    val = integrate_real_line(lambda w: np.conj(g(w / a)) * f(w / c), features, rtol=rtol,
                              support=_intersect(fs, gs))
    return val / math.sqrt(a * c)


def _intersect(s1, s2):
    if s1 is None:
        return s2
    if s2 is None:
        return s1
    return (max(s1[0], s2[0]), min(s1[1], s2[1]))


def q_lorentzian_closed(gamma0, gamma1, Gamma0, Gamma1, omega0, omega1, r):
    """Closed-form kernel for a Lorentzian emitter/detector pair.

    ``2 pi conj(gamma0) gamma1 sqrt(r) / ((Gamma0/2 + i omega0) + (Gamma1/2 - i omega1) r)``
    """
    if not (Gamma0 > 0 and Gamma1 > 0):
        raise InvalidArgumentError("linewidths must be positive")
    r = np.asarray(r, dtype=float)
    num = 2.0 * np.pi * np.conj(gamma0) * gamma1 * np.sqrt(r)
    out = num / ((0.5 * Gamma0 + 1j * omega0) + (0.5 * Gamma1 - 1j * omega1) * r)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MeasurementKernel:
    power: int = field(default=1, kw_only=True)

    def __post_init__(self):
        if int(self.power) != self.power or self.power < 1:
            raise InvalidArgumentError(f"kernel power must be a positive integer, got {self.power!r}")

    def base(self, r):
        raise NotImplementedError

    def __call__(self, r):
        """``q(r) ** power``; ``r`` may be a scalar or an array."""
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr <= 0):
            raise InvalidArgumentError("scale-factor ratios must be positive")
        val = np.asarray(self.base(r_arr), dtype=complex)
        if self.power != 1:
            val = val ** self.power
        return complex(val) if val.ndim == 0 else val

    def pair(self, a, c):
        return self(np.asarray(a, dtype=float) / np.asarray(c, dtype=float))


@dataclass(frozen=True)
class QuadratureKernel(MeasurementKernel):
    emit: SpectralProfile
    detect: SpectralProfile
    rtol: float = 1e-10

    def base(self, r):
        flat = [q_numeric(self.emit, self.detect, float(x), self.rtol) for x in np.ravel(r)]
        return np.asarray(flat, dtype=complex).reshape(np.shape(r))


@dataclass(frozen=True)
class LorentzianKernel(MeasurementKernel):
    emit: Lorentzian
    detect: Lorentzian

    def base(self, r):
        f, g = self.emit, self.detect
        return q_lorentzian_closed(f.amplitude, g.amplitude, f.linewidth, g.linewidth,
                                   f.center, g.center, r)


@dataclass(frozen=True, eq=False)
class TabulatedKernel(MeasurementKernel):
    """Samples of ``q`` on a ``log r`` grid, interpolated with a cubic spline."""

    log_r: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        super().__post_init__()
        lr = np.array(self.log_r, dtype=float)
        val = np.array(self.values, dtype=complex)
        if lr.ndim != 1 or lr.size < 4 or val.shape != lr.shape or np.any(np.diff(lr) <= 0):
            raise InvalidArgumentError("tabulated kernel needs >= 4 increasing log-r samples")
        object.__setattr__(self, "log_r", lr)
        object.__setattr__(self, "values", val)

    @cached_property
    def _spline(self):
        return CubicSpline(self.log_r, self.values)

    def base(self, r):
        lr = np.log(r)
        tol = 1e-12 * (1.0 + abs(self.log_r).max())
        if np.any(lr < self.log_r[0] - tol) or np.any(lr > self.log_r[-1] + tol):
            raise InvalidArgumentError(
                f"ratio outside tabulated range [{math.exp(self.log_r[0]):.6g}, "
                f"{math.exp(self.log_r[-1]):.6g}]")
        return self._spline(np.clip(lr, self.log_r[0], self.log_r[-1]))


def kernel_for_event(emit: SpectralProfile, detect: SpectralProfile, rtol=1e-10):
    """Closed form when both profiles are Lorentzian-shaped, quadrature otherwise."""
    f, g = emit.as_lorentzian(), detect.as_lorentzian()
    if f is not None and g is not None:
        return LorentzianKernel(f, g)
    return QuadratureKernel(emit, detect, rtol)


def tabulate(kernel: MeasurementKernel, r_min, r_max, n=1025) -> TabulatedKernel:
    if not (0 < r_min < r_max) or n < 4:
        raise InvalidArgumentError("need 0 < r_min < r_max and n >= 4")
    log_r = np.linspace(math.log(r_min), math.log(r_max), int(n))
    return TabulatedKernel(log_r, kernel(np.exp(log_r)))


def kernel_power(kernel: MeasurementKernel, times) -> MeasurementKernel:
    """Kernel evaluating to ``q(r) ** times``."""
    if int(times) != times or times < 1:
        raise InvalidArgumentError(f"times must be a positive integer, got {times!r}")
    if times == 1:
        return kernel
    if isinstance(kernel, TabulatedKernel):
        return TabulatedKernel(kernel.log_r, kernel(np.exp(kernel.log_r)) ** int(times))
    return replace(kernel, power=kernel.power * int(times))


@dataclass(frozen=True)
class Peak:
    r_star: float
    q_abs_max: float


def _local_maxima(y):
    floor = 1e-8 * y.max()
    idx = [i for i in range(1, y.size - 1)
           if y[i] > y[i - 1] and y[i] >= y[i + 1] and y[i] > floor]
    return idx


def peak_ratio(kernel: MeasurementKernel, search_interval=(0.05, 20.0), n_scan=401,
               rtol=1e-10) -> Peak:
    """Ratio maximizing ``|q(r)|``.

    A coarse log-spaced scan isolates the maximum, golden-section search
    narrows it until function values stop resolving it (about ``1e-6``
    relative), and the zero of the symmetric difference quotient of ``|q|``
    then fixes ``r`` to ``rtol``.

    Raises
    ------
    MultimodalError
        When the coarse scan finds more than one local maximum; the
        brackets of every candidate are attached to the exception.
    """
    lo, hi = search_interval
    if not 0 < lo < hi:
        raise InvalidArgumentError("search interval must satisfy 0 < lo < hi")
    r = np.geomspace(lo, hi, n_scan)
    y = np.abs(kernel(r))
    peaks = _local_maxima(y)
    if len(peaks) > 1:
        brackets = [(float(r[i - 1]), float(r[i + 1])) for i in peaks]
        raise MultimodalError(f"|q| has {len(peaks)} local maxima on {search_interval}",
                              brackets)
    if not peaks:
        raise InvalidArgumentError(
            f"|q| has no interior maximum on {search_interval}; widen the interval")
    i = peaks[0]
    a, b = float(r[i - 1]), float(r[i + 1])
    objective = lambda x: abs(kernel(x))  # noqa: E731
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = objective(x1), objective(x2)
    while b - a > max(rtol, 1e-6) * 0.5 * (a + b):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = objective(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = objective(x2)
    r_star = 0.5 * (a + b)
    # value comparisons cannot resolve a flat maximum below sqrt(eps); use the slope sign
    h = 1e-5
    slope = lambda x: objective(x * (1 + h)) - objective(x * (1 - h))  # noqa: E731
    width = 10.0 * (b - a)
    lo_r, hi_r = max(a - width, lo), min(b + width, hi)
    if slope(lo_r) > 0 > slope(hi_r):
        r_star = brentq(slope, lo_r, hi_r, xtol=0.1 * rtol * r_star, rtol=4 * np.finfo(float).eps)
    return Peak(r_star, float(objective(r_star)))


def kernel_table(kernel: MeasurementKernel, r_min=0.2, r_max=5.0, n=200):
    """Columns ``(r, Re q, Im q, |q|)`` on a log-spaced ratio grid."""
    r = np.geomspace(r_min, r_max, int(n))
    q = np.asarray(kernel(r))
    return r, q.real, q.imag, np.abs(q)
