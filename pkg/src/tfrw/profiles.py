"""Coordinate-frequency photon wavepackets used for emission and detection.

All profiles are callables ``p(omega)`` accepting scalars or arrays. The
Lorentzian convention is ``i conj(amplitude) / (linewidth/2 - i (omega - center))``
for both emitters and detectors; kernels apply the detector profile conjugated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, QuadratureError
from .quadrature import integrate_real_line


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise InvalidArgumentError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class Lorentzian:
    amplitude: complex = 1.0
    linewidth: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        _positive("linewidth", self.linewidth)
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "_pref", 1j * self.amplitude.conjugate())

    def __call__(self, omega):
        return self._pref / (0.5 * self.linewidth - 1j * (omega - self.center))

    def features(self):
        return [(self.center, 0.5 * self.linewidth)]

    support = None

    def scaled(self, s):
        # sqrt(s) * p(s * omega)
        return Lorentzian(self.amplitude / math.sqrt(s), self.linewidth / s, self.center / s)

    def as_lorentzian(self):
        return self


@dataclass(frozen=True)
class NearDelta:
    """Unit-norm Lorentzian of small linewidth standing in for a delta line."""

    center: float
    linewidth: float

    def __post_init__(self):
        _positive("linewidth", self.linewidth)
        amp = math.sqrt(self.linewidth / (2.0 * math.pi))
        object.__setattr__(self, "_lorentzian", Lorentzian(amp, self.linewidth, self.center))

    def __call__(self, omega):
        return self._lorentzian(omega)

    def features(self):
        return self._lorentzian.features()

    support = None

    def scaled(self, s):
        return NearDelta(self.center / s, self.linewidth / s)

    def as_lorentzian(self):
        return self._lorentzian


@dataclass(frozen=True)
class Gaussian:
    """``amplitude * exp(-(omega - center)^2 / (4 width^2))``; ``|p|^2`` has std ``width``."""

    amplitude: complex = 1.0
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        _positive("width", self.width)
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def __call__(self, omega):
        return self.amplitude * np.exp(-((omega - self.center) ** 2) / (4.0 * self.width ** 2))

    def features(self):
        return [(self.center, self.width)]

    support = None

    def scaled(self, s):
        return Gaussian(self.amplitude * math.sqrt(s), self.width / s, self.center / s)

    def as_lorentzian(self):
        return None


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear profile through ``(omega, value)`` samples, zero outside."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        om = np.array(self.omega, dtype=float)
        val = np.array(self.values, dtype=complex)
        if om.ndim != 1 or om.size < 2 or val.shape != om.shape:
            raise InvalidArgumentError("tabulated profile needs >= 2 matching samples")
        if np.any(np.diff(om) <= 0):
            raise InvalidArgumentError("tabulated frequencies must be strictly increasing")
        om.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "values", val)

    def __call__(self, omega):
        re = np.interp(omega, self.omega, self.values.real, left=0.0, right=0.0)
        im = np.interp(omega, self.omega, self.values.imag, left=0.0, right=0.0)
        out = re + 1j * im
        return complex(out) if np.ndim(out) == 0 else out

    def features(self):
        lo, hi = self.omega[0], self.omega[-1]
        return [(0.5 * (lo + hi), 0.5 * (hi - lo))]

    @property
    def support(self):
        return (float(self.omega[0]), float(self.omega[-1]))

    def scaled(self, s):
        return Tabulated(self.omega / s, self.values * math.sqrt(s))

    def as_lorentzian(self):
        return None


SpectralProfile = Lorentzian | NearDelta | Gaussian | Tabulated


def evaluate(p: SpectralProfile, omega):
    return p(omega)


def l2_norm(p: SpectralProfile, rtol=1e-11) -> float:
    """``sqrt(integral |p(omega)|^2 domega)`` by adaptive quadrature."""
    if isinstance(p, Tabulated) and not np.all(np.isfinite(p.values)):
        raise QuadratureError("tabulated profile contains non-finite values", achieved=np.inf)
    val = integrate_real_line(lambda w: abs(p(w)) ** 2, p.features(), rtol=rtol,
                              support=p.support)
    return math.sqrt(val.real)


def matched_profile(f: SpectralProfile, s) -> SpectralProfile:
    """Detector profile ``g(omega) = sqrt(s) f(s omega)`` matched to a scaling ``s``."""
    _positive("s", s)
    return f.scaled(s)


def _complex(value):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InvalidArgumentError(f"complex values are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def profile_from_dict(d) -> SpectralProfile:
    kind = d.get("kind")
    if kind == "lorentzian":
        return Lorentzian(_complex(d.get("gamma", 1.0)), float(d["Gamma"]), float(d["omega_c"]))
    if kind == "near_delta":
        return NearDelta(float(d["omega_c"]), float(d["epsilon"]))
    if kind == "gaussian":
        return Gaussian(_complex(d.get("amp", 1.0)), float(d["sigma"]), float(d["omega_c"]))
    if kind == "tabulated":
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
        return Tabulated(np.asarray(d["omega"], dtype=float), re + 1j * im)
    raise InvalidArgumentError(f"unknown profile kind {kind!r}")


def profile_to_dict(p: SpectralProfile):
    if isinstance(p, Lorentzian):
        return {"kind": "lorentzian", "gamma": [p.amplitude.real, p.amplitude.imag],
                "Gamma": p.linewidth, "omega_c": p.center}
    if isinstance(p, NearDelta):
        return {"kind": "near_delta", "omega_c": p.center, "epsilon": p.linewidth}
    if isinstance(p, Gaussian):
        return {"kind": "gaussian", "amp": [p.amplitude.real, p.amplitude.imag],
                "sigma": p.width, "omega_c": p.center}
    return {"kind": "tabulated", "omega": p.omega.tolist(), "re": p.values.real.tolist(),
            "im": p.values.imag.tolist()}
