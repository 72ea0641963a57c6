"""Adaptive quadrature of complex integrands over the whole real line.

The real line is mapped onto ``(-pi/2, pi/2)`` with ``w = m + L tan(theta)``,
which turns Lorentzian tails into bounded integrands, and QUADPACK's
Gauss-Kronrod rule (``scipy.integrate.quad``) is run on the finite interval
with break points at every declared feature.
"""
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError

_HALF_PI = 0.5 * np.pi


def _quad(fn, lo, hi, points, epsabs, epsrel, limit):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(fn, lo, hi, points=points or None, epsabs=epsabs,
                             epsrel=epsrel, limit=limit, full_output=1)
    return out[0], out[1]


def _breakpoints(features, lo, hi, to_var):
    pts = set()
    for center, width in features:
        for k in (-3.0, -1.0, 0.0, 1.0, 3.0):
            x = center + k * width
            if lo < x < hi:
                pts.add(float(to_var(x)))
    return sorted(pts)


def integrate_real_line(func, features, rtol=1e-10, support=None, limit=400):
    """Integrate a complex-valued ``func`` over the real line.

    Parameters
    ----------
    func : callable
        Scalar function of a real frequency returning a complex number.
    features : sequence of (center, width)
        Locations and widths of the peaks of ``func``; they place break
        points and fix the scale of the tangent map.
    rtol : float
        Target relative accuracy of the result.
    support : (lo, hi), optional
        Finite support of ``func``; integration is restricted to it.

    Raises
    ------
    QuadratureError
        If the achieved error estimate exceeds the tolerance.
    """
    features = [(float(c), float(w)) for c, w in features if w > 0]
    if support is not None:
        lo, hi = float(support[0]), float(support[1])
        if not hi > lo:
            return 0j
        pts = _breakpoints(features, lo, hi, lambda x: x)

        def part(which):
            return lambda x: getattr(complex(func(x)), which)
        lims = (lo, hi)
    else:
        centers = np.array([c for c, _ in features]) if features else np.zeros(1)
        widths = np.array([w for _, w in features]) if features else np.ones(1)
        m = float(np.mean(centers))
        L = float(max(widths.max(), np.ptp(centers)))
        pts = _breakpoints(features, -np.inf, np.inf, lambda x: np.arctan((x - m) / L))

        def part(which):
            def g(theta):
                c = np.cos(theta)
                return getattr(complex(func(m + L * np.tan(theta))), which) * L / (c * c)
            return g
        lims = (-_HALF_PI, _HALF_PI)

    re_f, im_f = part("real"), part("imag")
    crude = max(abs(_quad(re_f, *lims, pts, 0.0, 1e-4, 100)[0]),
                abs(_quad(im_f, *lims, pts, 0.0, 1e-4, 100)[0]))
    if crude == 0.0:
        return 0j
    epsabs = 0.05 * rtol * crude
    re, re_err = _quad(re_f, *lims, pts, epsabs, rtol, limit)
    im, im_err = _quad(im_f, *lims, pts, epsabs, rtol, limit)
    value = complex(re, im)
    err = re_err + im_err
    allowed = 10.0 * max(rtol * abs(value), epsabs)
    if not np.isfinite(err) or not np.isfinite(value) or err > allowed:
        achieved = err / abs(value) if abs(value) > 0 else np.inf
        raise QuadratureError(
            f"quadrature did not converge: estimated relative error {achieved:.3g} "
            f"(requested {rtol:.3g})", achieved=achieved)
    return value
