"""Moving-mirror cavity analogue of the quantized scale factor.

Two pictures are covered:

* cavity as space: a single cavity whose movable mirror sits at
  ``x = x0 * a_om``; ``N`` photons push it outward with
  ``a_om'' = K N / a_om^2`` (mean-field photon number);
* cavities as atoms: two cavities sharing the mirror, viewed in a rotating
  frame where ``a_om = Delta / (Delta + G x)`` and a constant Hubble rate
  corresponds to a constant conformal-time mirror velocity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (CollapseError, ConfigurationError, InvalidArgumentError,
                     InvalidRangeError, NoDetectionError, SingularityError)
from .evolution import EvolutionKernel
from .grid import (Moments, ScaleGrid, UniverseWavefunction, density_moments,
                   trapezoid_weights)
from .io import write_csv
from .pipeline import MeasurementEvent, _posterior_series


@dataclass(frozen=True)
class Free:
    pass


@dataclass(frozen=True)
class Harmonic:
    """``V(x) = M omega^2 (x - x_eq)^2 / 2``."""

    omega: float
    x_eq: float = 0.0


@dataclass(frozen=True)
class OptomechParams:
    mass: float = 1.0
    x0: float = 1.0
    mode: int = 1
    photons: float = 1.0
    hbar: float = 1.0
    c_light: float = 1.0
    potential: Free | Harmonic = Free()

    def __post_init__(self):
        if not (self.mass > 0 and self.x0 > 0):
            raise InvalidArgumentError("mirror mass and reference length must be positive")
        if int(self.mode) != self.mode or self.mode < 1:
            raise InvalidArgumentError(f"cavity mode index must be a positive integer, got {self.mode!r}")
        if not self.photons >= 0:
            raise InvalidArgumentError("photon number must be non-negative")

    @property
    def radiation_constant(self):
        """``K`` in ``a_om'' = K / a_om^2``: ``hbar n pi c N / (2 x0^3 M)``."""
        return (self.hbar * self.mode * math.pi * self.c_light * self.photons
                / (2.0 * self.x0 ** 3 * self.mass))

    def _spring(self):
        if isinstance(self.potential, Harmonic):
            return self.potential.omega ** 2, self.potential.x_eq / self.x0
        return 0.0, 0.0


@dataclass(frozen=True)
class OptomechState:
    a_om: float
    a_dot: float
    t: float = 0.0


def free_mirror_accel(s: OptomechState, p: OptomechParams):
    """Mirror acceleration in scale-factor units, ``K / a^2 - V'(x) / (M x0)``."""
    a = np.asarray(s.a_om, dtype=float)
    if np.any(a <= 0):
        raise SingularityError("a_om <= 0: zero-length cavity")
    omega2, a_eq = p._spring()
    out = p.radiation_constant / a ** 2 - omega2 * (a - a_eq)
    return float(out) if out.ndim == 0 else out


def mechanical_energy(s: OptomechState, p: OptomechParams):
    """``M x0^2 a'^2 / 2 + hbar n pi c N / (2 x0 a) + V(x0 a)``; arrays allowed."""
    a = np.asarray(s.a_om, dtype=float)
    v = np.asarray(s.a_dot, dtype=float)
    kinetic = 0.5 * p.mass * p.x0 ** 2 * v ** 2
    cavity = p.hbar * p.mode * math.pi * p.c_light * p.photons / (2.0 * p.x0 * a)
    omega2, a_eq = p._spring()
    spring = 0.5 * p.mass * omega2 * p.x0 ** 2 * (a - a_eq) ** 2
    out = kinetic + cavity + spring
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    a_om: np.ndarray
    a_dot: np.ndarray

    def __len__(self):
        return self.t.size

    def __getitem__(self, i):
        return OptomechState(float(self.a_om[i]), float(self.a_dot[i]), float(self.t[i]))

    def energy(self, p: OptomechParams):
        return mechanical_energy(OptomechState(self.a_om, self.a_dot), p)

    def accel(self, p: OptomechParams):
        return free_mirror_accel(OptomechState(self.a_om, self.a_dot), p)

    def to_csv(self, path, p: OptomechParams):
        write_csv(path, ("t [coordinate time]", "a_om [1]", "a_dot [1/time]", "energy [energy]"),
                  [self.t, self.a_om, self.a_dot, self.energy(p)])


METHODS = {"velocity-verlet": _kernels.verlet, "rk4": _kernels.rk4}


def integrate_trajectory(s0: OptomechState, p: OptomechParams, dt, steps,
                         method="velocity-verlet") -> Trajectory:
    """Integrate the classical mirror motion for ``steps`` steps of size ``dt``.

    Raises
    ------
    CollapseError
        If ``a_om`` reaches zero; ``.step`` is the offending step index.
    """
    if not dt > 0:
        raise InvalidArgumentError("time step must be positive")
    if int(steps) != steps or steps < 0:
        raise InvalidArgumentError("steps must be a non-negative integer")
    if method not in METHODS:
        raise InvalidArgumentError(f"unknown integrator {method!r}; choose from {sorted(METHODS)}")
    if not s0.a_om > 0:
        raise SingularityError("initial a_om <= 0: zero-length cavity")
    omega2, a_eq = p._spring()
    t, a, v, bad = METHODS[method](s0.a_om, s0.a_dot, s0.t, dt, int(steps),
                                   p.radiation_constant, omega2, a_eq)
    if bad >= 0:
        raise CollapseError(f"mirror collapsed onto the fixed mirror at step {bad}", bad)
    return Trajectory(t, a, v)


# --- cavities as atoms ------------------------------------------------------

@dataclass(frozen=True)
class CavityMode:
    """One cavity: resonance at ``x = 0``, frequency pull ``d omega / dx`` and detuning."""

    resonance: float
    pull: float
    detuning: float


@dataclass(frozen=True)
class RotatingFrameConfig:
    cavities: tuple
    x_range: tuple | None = None

    def __post_init__(self):
        cav = tuple(self.cavities)
        if not cav:
            raise InvalidArgumentError("at least one cavity is required")
        object.__setattr__(self, "cavities", cav)
        if cav[0].pull == 0:
            raise ConfigurationError("reference cavity has zero frequency pull")

    @property
    def delta_over_g(self):
        return self.cavities[0].detuning / self.cavities[0].pull

    def problems(self):
        """Human-readable list of violated constraints (empty when valid)."""
        out = []
        ref = self.delta_over_g
        for k, c in enumerate(self.cavities, start=1):
            if c.pull == 0:
                out.append(f"cavity {k}: zero frequency pull")
                continue
            ratio = c.detuning / c.pull
            if abs(ratio - ref) > 1e-12 * max(abs(ref), 1.0):
                out.append(
                    f"cavity {k}: detuning/pull ratio {ratio!r} differs from cavity 1 ratio "
                    f"{ref!r}; all cavities need the same ratio so the rotating-frame "
                    "constant term cancels")
            if not c.detuning < 0:
                out.append(f"cavity {k}: detuning {c.detuning!r} gives a non-positive "
                           "effective atomic frequency")
            if self.x_range is not None:
                lo, hi = self.x_range
                worst = max(c.detuning + c.pull * lo, c.detuning + c.pull * hi)
                if not worst < 0:
                    out.append(f"cavity {k}: detuning + pull * x must stay negative on "
                               f"x in [{lo}, {hi}] (reaches {worst!r})")
        return out


@dataclass(frozen=True, eq=False)
class RotatingFrame:
    nu: np.ndarray
    omega_tilde: np.ndarray


def rotating_frame_frequencies(cfg: RotatingFrameConfig) -> RotatingFrame:
    """Frame frequencies ``nu_k = omega_k(0) + (G_k / G) Delta`` and ``omega~_k = -Delta_k``.

    Raises ``ConfigurationError`` when the detuning/pull ratios differ (the
    residual constant term would not vanish) or an effective frequency is
    not positive.
    """
    ref_d, ref_g = cfg.cavities[0].detuning, cfg.cavities[0].pull
    nu, wt = [], []
    for k, c in enumerate(cfg.cavities, start=1):
        if c.pull == 0:
            raise ConfigurationError(f"cavity {k}: zero frequency pull")
        residual = c.detuning - c.pull / ref_g * ref_d
        if abs(residual) > 1e-12 * max(abs(c.detuning), 1.0):
            raise ConfigurationError(
                f"cavity {k}: detuning/pull = {c.detuning / c.pull!r} but cavity 1 has "
                f"{ref_d / ref_g!r}; the ratios must agree")
        if not c.detuning < 0:
            raise ConfigurationError(
                f"cavity {k}: effective atomic frequency -detuning = {-c.detuning!r} "
                "must be positive")
        nu.append(c.resonance + c.pull / ref_g * ref_d)
        wt.append(-c.detuning)
    return RotatingFrame(np.array(nu, dtype=float), np.array(wt, dtype=float))


def a_om_of_x(x, cfg: RotatingFrameConfig):
    """``a_om = Delta / (Delta + G x)``; equals 1 at ``x = 0``."""
    rho = cfg.delta_over_g
    x = np.asarray(x, dtype=float)
    rel = 1.0 + x / rho
    if np.any(rel <= 0) or not np.all(np.isfinite(rel)):
        raise InvalidRangeError(
            f"displacement crosses the pole at x = {-rho!r} of the scale-factor map")
    out = 1.0 / rel
    return float(out) if out.ndim == 0 else out


def x_of_a_om(a, cfg: RotatingFrameConfig):
    """Inverse map ``x = (Delta / G) (1 / a_om - 1)``."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise InvalidRangeError("scale factor must be positive")
    out = cfg.delta_over_g * (1.0 / a - 1.0)
    return float(out) if out.ndim == 0 else out


def optical_energy_per_photon(x, cfg: RotatingFrameConfig, k, hbar=1.0):
    """Energy of one photon in cavity ``k`` (0-based) two ways.

    Returns ``(hbar omega~_k / a_om(x), -hbar (G_k x + Delta_k))``; the two
    agree whenever the ratio constraint holds.
    """
    frame = rotating_frame_frequencies(cfg)
    c = cfg.cavities[k]
    x = np.asarray(x, dtype=float)
    return (hbar * frame.omega_tilde[k] / a_om_of_x(x, cfg),
            -hbar * (c.pull * x + c.detuning))


def hubble_mirror_velocity(H, cfg: RotatingFrameConfig):
    """Conformal-time mirror velocity ``dx / deta = -(Delta / G) H``."""
    return -cfg.delta_over_g * H


@dataclass(frozen=True, eq=False)
class ConformalTrajectory:
    eta: np.ndarray
    x: np.ndarray
    a_om: np.ndarray

    def to_csv(self, path):
        write_csv(path, ("eta [conformal time]", "x [length]", "a_om [1]"),
                  [self.eta, self.x, self.a_om])


def conformal_trajectory(H, cfg: RotatingFrameConfig, eta, a0=1.0) -> ConformalTrajectory:
    """Scale factor and mirror position for a constant Hubble rate.

    With ``H = a^-2 da/deta`` constant, ``a(eta) = a0 / (1 - a0 H eta)``;
    the mirror position follows from the inverse scale-factor map.
    """
    eta = np.asarray(eta, dtype=float)
    denom = 1.0 - a0 * H * eta
    if np.any(denom <= 0):
        raise SingularityError(
            f"scale factor diverges at eta = {1.0 / (a0 * H)!r} within the requested range")
    a = a0 / denom
    return ConformalTrajectory(eta, x_of_a_om(a, cfg), a)


# --- mirror wavefunction and detection back-action --------------------------

@dataclass(frozen=True, eq=False)
class DisplacementWavefunction:
    """Mirror amplitudes ``psi(x)`` on an increasing displacement grid."""

    x: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        amp = np.array(self.amplitudes, dtype=complex)
        if x.ndim != 1 or x.size < 3 or amp.shape != x.shape or np.any(np.diff(x) <= 0):
            raise InvalidArgumentError("need >= 3 increasing displacements with matching amplitudes")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def weights(self):
        return trapezoid_weights(self.x)

    @property
    def density(self):
        return np.abs(self.amplitudes) ** 2

    def norm(self):
        return float(np.dot(self.weights, self.density))

    def normalized(self):
        n = self.norm()
        if not n > 0:
            raise NoDetectionError("mirror wavefunction has zero norm")
        return DisplacementWavefunction(self.x, self.amplitudes / math.sqrt(n))

    def moments(self) -> Moments:
        m = density_moments(self.x, self.weights, self.density)
        return m

    def to_csv(self, path):
        write_csv(path, ("x [length]", "Re psi [x^-1/2]", "Im psi [x^-1/2]"),
                  [self.x, self.amplitudes.real, self.amplitudes.imag])


def displacement_packet(x, center, sigma) -> DisplacementWavefunction:
    x = np.asarray(x, dtype=float)
    if not sigma > 0:
        raise InvalidArgumentError("sigma must be positive")
    return DisplacementWavefunction(x, np.exp(-((x - center) ** 2) / (4 * sigma ** 2))).normalized()


def to_scale_factor(psi_x: DisplacementWavefunction, cfg: RotatingFrameConfig):
    """Change variables ``x -> a_om`` preserving probability.

    Returns the scale-factor wavefunction (on an explicit grid whose weights
    are the Jacobian-transformed displacement weights), the Jacobian
    ``|da/dx|`` at each displacement and the sort order applied.
    """
    a = np.asarray(a_om_of_x(psi_x.x, cfg))
    rho = cfg.delta_over_g
    jac = abs(rho) / (rho + psi_x.x) ** 2
    order = np.argsort(a)
    grid = ScaleGrid(a[order], "explicit", (psi_x.weights * jac)[order])
    psi_a = UniverseWavefunction(grid, (psi_x.amplitudes / np.sqrt(jac))[order])
    return psi_a, jac, order


@dataclass(frozen=True)
class MirrorUpdate:
    prior: DisplacementWavefunction
    posterior: DisplacementWavefunction
    detect_weight: float


def mirror_posterior_update(psi_x: DisplacementWavefunction, cfg: RotatingFrameConfig,
                            ev: MeasurementEvent, evolution: EvolutionKernel | None = None,
                            support_tol=1e-9) -> MirrorUpdate:
    """Post-select the mirror state on detecting one photon.

    Without ``evolution`` the photon is emitted at the reference position
    (``x = 0``, ``a_om = 1``) and detected at the mirror's current position,
    so the amplitude at ``x`` is weighted by ``q(a_om(x))``. With an
    evolution kernel the full ``integral q(a / c) B(a, c) h(c) dc`` update is
    carried out in scale-factor space.
    """
    psi_a, jac, order = to_scale_factor(psi_x, cfg)
    q = ev.kernel()
    if evolution is None:
        amp_a = np.asarray(q(psi_a.points), dtype=complex) * psi_a.amplitudes
    else:
        _, amp_a = next(_posterior_series(psi_a, evolution, q, [1], support_tol))
    weight = float(np.dot(psi_a.grid.weights, np.abs(amp_a) ** 2))
    if not weight > 0:
        raise NoDetectionError("detection weight is zero: the post-selected branch is empty")
    amp_x = np.empty_like(amp_a)
    amp_x[order] = amp_a
    posterior = DisplacementWavefunction(psi_x.x, amp_x * np.sqrt(jac)).normalized()
    return MirrorUpdate(psi_x, posterior, weight)
