"""Universe wavefunctions sampled on a grid of strictly positive scale factors."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from . import io
from .errors import DegenerateStateError, InvalidArgumentError

CSV_HEADER = ("a [1]", "Re h [a^-1/2]", "Im h [a^-1/2]")


def trapezoid_weights(points):
    points = np.asarray(points, dtype=float)
    w = np.zeros_like(points)
    d = np.diff(points)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ScaleGrid:
    """Strictly increasing, strictly positive scale-factor samples.

    ``weights`` are the quadrature weights used for every integral over the
    grid. They default to the trapezoid rule; an explicit set is used when a
    grid is the image of another grid under a change of variables.
    """

    points: np.ndarray
    spacing: str = "explicit"
    weights: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 3:
            raise InvalidArgumentError("a scale grid needs at least 3 points")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("grid points must be finite")
        if pts[0] <= 0.0:
            raise InvalidArgumentError(
                f"scale factor must be strictly positive (got a_min={pts[0]!r}); "
                "a = 0 is a singularity")
        if np.any(np.diff(pts) <= 0.0):
            raise InvalidArgumentError("grid points must be strictly increasing")
        if self.spacing not in ("log", "uniform", "explicit"):
            raise InvalidArgumentError(f"unknown spacing mode {self.spacing!r}")
        if self.weights is None:
            w = trapezoid_weights(pts)
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != pts.shape or np.any(w < 0) or not np.all(np.isfinite(w)):
                raise InvalidArgumentError("weights must be finite, non-negative and match points")
        object.__setattr__(self, "points", _frozen(pts, float))
        object.__setattr__(self, "weights", _frozen(w, float))

    def __len__(self):
        return self.points.size

    @property
    def a_min(self):
        return float(self.points[0])

    @property
    def a_max(self):
        return float(self.points[-1])

    @property
    def log_points(self):
        return np.log(self.points)

    def same_as(self, other):
        return self is other or (
            len(self) == len(other)
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights))

    def step_at(self, a):
        """Local grid spacing around ``a`` (the larger neighbouring gap)."""
        i = int(np.clip(np.searchsorted(self.points, a), 1, len(self) - 1))
        gaps = np.diff(self.points)
        return float(max(gaps[i - 1], gaps[min(i, gaps.size - 1)]))

    def contains(self, a):
        return self.a_min <= a <= self.a_max

    def to_dict(self):
        d = {"points": self.points.tolist(), "spacing": self.spacing}
        if not np.array_equal(self.weights, trapezoid_weights(self.points)):
            d["weights"] = self.weights.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["points"], dtype=float), d.get("spacing", "explicit"),
                   d.get("weights"))


def make_log_grid(a_min, a_max, n) -> ScaleGrid:
    """``n`` geometrically spaced points from ``a_min`` to ``a_max`` inclusive."""
    _check_bounds(a_min, a_max, n)
    return ScaleGrid(np.geomspace(a_min, a_max, int(n)), "log")


def make_uniform_grid(a_min, a_max, n) -> ScaleGrid:
    _check_bounds(a_min, a_max, n)
    return ScaleGrid(np.linspace(a_min, a_max, int(n)), "uniform")


def _check_bounds(a_min, a_max, n):
    if not (np.isfinite(a_min) and np.isfinite(a_max)) or a_min <= 0 or a_max <= 0:
        raise InvalidArgumentError("grid bounds must be finite and strictly positive")
    if a_min >= a_max:
        raise InvalidArgumentError(f"need a_min < a_max, got {a_min!r} >= {a_max!r}")
    if int(n) != n or n < 3:
        raise InvalidArgumentError(f"need at least 3 grid points, got {n!r}")


@dataclass(frozen=True, eq=False)
class UniverseWavefunction:
    grid: ScaleGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != self.grid.points.shape:
            raise InvalidArgumentError(
                f"{amp.size} amplitudes for a grid of {len(self.grid)} points")
        object.__setattr__(self, "amplitudes", _frozen(amp, complex))

    @property
    def points(self):
        return self.grid.points

    @property
    def density(self):
        return np.abs(self.amplitudes) ** 2

    def norm(self):
        """``integral |h(a)|^2 da`` on the grid."""
        return float(np.dot(self.grid.weights, self.density))

    def with_amplitudes(self, amplitudes):
        return UniverseWavefunction(self.grid, amplitudes)

    def to_dict(self):
        return {"grid": self.grid.to_dict(),
                "re": self.amplitudes.real.tolist(),
                "im": self.amplitudes.imag.tolist()}

    @classmethod
    def from_dict(cls, d):
        grid = ScaleGrid.from_dict(d["grid"])
        return cls(grid, np.asarray(d["re"], float) + 1j * np.asarray(d["im"], float))

    def to_json(self, path=None):
        text = io.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source):
        if isinstance(source, (str, Path)) and Path(source).exists():
            source = Path(source).read_text()
        return cls.from_dict(json.loads(source))

    def to_csv(self, path):
        io.write_csv(path, CSV_HEADER,
                     [self.points, self.amplitudes.real, self.amplitudes.imag])

    @classmethod
    def from_csv(cls, path, spacing="explicit"):
        _, (a, re, im) = io.read_csv(path)
        return cls(ScaleGrid(a, spacing), re + 1j * im)


def gaussian_packet(grid: ScaleGrid, a0, sigma) -> UniverseWavefunction:
    """Normalized real Gaussian ``exp(-(a - a0)^2 / (4 sigma^2))``.

    ``sigma`` is the standard deviation of the density ``|h|^2``.
    """
    if not grid.contains(a0):
        raise InvalidArgumentError(
            f"packet centre a0={a0!r} outside grid [{grid.a_min}, {grid.a_max}]")
    if not sigma > 0:
        raise InvalidArgumentError("sigma must be positive")
    amp = np.exp(-((grid.points - a0) ** 2) / (4.0 * sigma ** 2))
    psi, _ = normalize(UniverseWavefunction(grid, amp))
    return psi


def normalize(psi: UniverseWavefunction):
    """Return ``(unit-norm copy, norm before)``.

    Raises
    ------
    DegenerateStateError
        If the input has zero (or non-finite) norm.
    """
    n = psi.norm()
    if not (n > 0.0 and np.isfinite(n)):
        raise DegenerateStateError(f"cannot normalize a state with norm {n!r}")
    return psi.with_amplitudes(psi.amplitudes / np.sqrt(n)), n


def overlap(psi1: UniverseWavefunction, psi2: UniverseWavefunction) -> complex:
    """``integral conj(h1) h2 da``."""
    _same_grid(psi1, psi2)
    return complex(np.dot(psi1.grid.weights, np.conj(psi1.amplitudes) * psi2.amplitudes))


def l2_distance(psi1, psi2):
    _same_grid(psi1, psi2)
    diff = psi1.amplitudes - psi2.amplitudes
    return float(np.sqrt(np.dot(psi1.grid.weights, np.abs(diff) ** 2)))


def _same_grid(psi1, psi2):
    if not psi1.grid.same_as(psi2.grid):
        raise InvalidArgumentError("wavefunctions live on different grids")


@dataclass(frozen=True)
class Moments:
    mean_a: float
    std_a: float
    fwhm_a: float
    peak_a: float
    multimodal: bool = False

    def to_dict(self):
        return {"mean_a": self.mean_a, "std_a": self.std_a, "fwhm_a": self.fwhm_a,
                "peak_a": self.peak_a, "multimodal": self.multimodal}


def density_moments(points, weights, density) -> Moments:
    total = float(np.dot(weights, density))
    if not total > 0:
        raise DegenerateStateError("density has zero mass")
    mean = float(np.dot(weights, points * density) / total)
    var = float(np.dot(weights, (points - mean) ** 2 * density) / total)
    lo, hi, multimodal = half_max_interval(points, density)
    return Moments(mean, float(np.sqrt(max(var, 0.0))), hi - lo, 0.5 * (lo + hi), multimodal)


def half_max_interval(points, y):
    """Outermost half-maximum crossings, linearly interpolated.

    Returns ``(lo, hi, multimodal)``; ``multimodal`` is set when the curve
    crosses half maximum more than twice. A curve still above half maximum at
    a grid edge is cut at that edge.
    """
    y = np.asarray(y, dtype=float)
    half = 0.5 * y.max()
    above = y >= half
    flips = np.nonzero(above[1:] != above[:-1])[0]

    def cross(i):
        y0, y1 = y[i], y[i + 1]
        return points[i] + (half - y0) * (points[i + 1] - points[i]) / (y1 - y0)

    lo = float(points[0]) if above[0] else float(cross(flips[0]))
    hi = float(points[-1]) if above[-1] else float(cross(flips[-1]))
    n_cross = flips.size
    return lo, hi, n_cross > 2


def moments(psi: UniverseWavefunction) -> Moments:
    """Mean, standard deviation and FWHM of ``|h(a)|^2``."""
    return density_moments(psi.points, psi.grid.weights, psi.density)


def spline(psi: UniverseWavefunction):
    """Cubic spline of the amplitudes in ``log a``."""
    return CubicSpline(psi.grid.log_points, psi.amplitudes)


def resample(psi: UniverseWavefunction, points):
    """Amplitudes interpolated (cubic in ``log a``) at ``points``; zero off-grid."""
    points = np.asarray(points, dtype=float)
    out = np.zeros(points.shape, dtype=complex)
    inside = (points >= psi.grid.a_min) & (points <= psi.grid.a_max)
    if np.any(inside):
        out[inside] = spline(psi)(np.log(points[inside]))
    return out


def interpolation_matrix(grid: ScaleGrid, points):
    """Matrix ``P`` with ``P @ h`` equal to :func:`resample` at ``points``."""
    points = np.asarray(points, dtype=float)
    eye = np.eye(len(grid))
    out = np.zeros((points.size, len(grid)))
    inside = (points >= grid.a_min) & (points <= grid.a_max)
    if np.any(inside):
        out[inside] = CubicSpline(grid.log_points, eye, axis=0)(np.log(points[inside]))
    return out
