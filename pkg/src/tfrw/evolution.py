"""Evolution kernels ``B(a, c)`` acting on universe wavefunctions.

Every kernel maps an amplitude ``h`` to ``integral B(a, c) h(c) dc``. The
result of :func:`apply` is renormalized; no unitary completion of ``B`` is
attempted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import _kernels
from .errors import InvalidArgumentError, SupportTruncationError
from .grid import (ScaleGrid, UniverseWavefunction, interpolation_matrix, normalize,
                   resample)

SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class UniformScaling:
    """``B(a, c) = delta(a - s c)``: every scale factor is multiplied by ``s``."""

    s: float

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise InvalidArgumentError(f"scaling factor must be positive, got {self.s!r}")


@dataclass(frozen=True)
class BroadenedScaling:
    """Log-normal spread of width ``width`` around ``a = s c``.

    ``B(a, c) = phi((log(a / (s c))) / width) / (width a)`` with ``phi`` the
    standard normal density, so that ``integral B(a, c) da = 1`` and the
    ``width -> 0`` limit is :class:`UniformScaling`.
    """

    s: float
    width: float

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise InvalidArgumentError(f"scaling factor must be positive, got {self.s!r}")
        if not (self.width > 0 and math.isfinite(self.width)):
            raise InvalidArgumentError(f"width must be positive, got {self.width!r}")

    def __call__(self, a, c):
        a = np.asarray(a, dtype=float)
        z = np.log(a / (self.s * np.asarray(c, dtype=float))) / self.width
        return np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * self.width * a)


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Tabulated ``B(a_i, c_j)`` on a grid; integrals use the grid weights."""

    grid: ScaleGrid
    entries: np.ndarray

    def __post_init__(self):
        ent = np.array(self.entries, dtype=complex)
        n = len(self.grid)
        if ent.shape != (n, n):
            raise InvalidArgumentError(f"dense kernel must be {n}x{n}, got {ent.shape}")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)


EvolutionKernel = Identity | UniformScaling | BroadenedScaling | DenseMatrix


def _check_grid(kernel, grid):
    if isinstance(kernel, DenseMatrix) and not kernel.grid.same_as(grid):
        raise InvalidArgumentError("dense kernel is defined on a different grid")


def transfer_matrix(kernel: EvolutionKernel, grid: ScaleGrid):
    """Matrix ``T`` with ``(T @ h)_i`` approximating ``integral B(a_i, c) h(c) dc``."""
    _check_grid(kernel, grid)
    a = grid.points
    if isinstance(kernel, Identity):
        return np.eye(len(grid), dtype=complex)
    if isinstance(kernel, UniformScaling):
        return interpolation_matrix(grid, a / kernel.s).astype(complex) / kernel.s
    if isinstance(kernel, BroadenedScaling):
        B = _kernels.log_gaussian_kernel(a, a, math.log(kernel.s), kernel.width)
        return (B * grid.weights[None, :]).astype(complex)
    return kernel.entries * grid.weights[None, :]


def kernel_matrix(kernel: EvolutionKernel, grid: ScaleGrid):
    """Pointwise ``B(a_i, c_j)`` for the kernels that have a density on the grid."""
    _check_grid(kernel, grid)
    if isinstance(kernel, BroadenedScaling):
        a = grid.points
        return _kernels.log_gaussian_kernel(a, a, math.log(kernel.s), kernel.width)
    if isinstance(kernel, DenseMatrix):
        return kernel.entries
    raise InvalidArgumentError(f"{type(kernel).__name__} has no pointwise density on a grid")


def support_loss(kernel: EvolutionKernel, psi: UniverseWavefunction) -> float:
    """Fraction of the probability of ``psi`` carried outside the grid by ``kernel``."""
    grid = psi.grid
    rho = grid.weights * psi.density
    total = rho.sum()
    if not total > 0:
        return 0.0
    c = grid.points
    if isinstance(kernel, UniformScaling):
        image = kernel.s * c
        outside = (image < grid.a_min * (1 - 1e-12)) | (image > grid.a_max * (1 + 1e-12))
        return float(rho[outside].sum() / total)
    if isinstance(kernel, BroadenedScaling):
        shift = np.log(c) + math.log(kernel.s)
        inside = (ndtr((math.log(grid.a_max) - shift) / kernel.width)
                  - ndtr((math.log(grid.a_min) - shift) / kernel.width))
        return float(np.dot(rho, 1.0 - inside) / total)
    return 0.0


def check_support(kernel, psi, tol=SUPPORT_TOL):
    lost = support_loss(kernel, psi)
    if lost > tol:
        raise SupportTruncationError(
            f"{type(kernel).__name__} carries {lost:.3e} of the probability off the grid "
            f"[{psi.grid.a_min}, {psi.grid.a_max}]", lost)


def propagate(kernel: EvolutionKernel, psi: UniverseWavefunction, support_tol=SUPPORT_TOL):
    """Unnormalized amplitudes of ``integral B(a, c) h(c) dc`` on ``psi``'s grid."""
    _check_grid(kernel, psi.grid)
    if isinstance(kernel, Identity):
        return psi.amplitudes.copy()
    check_support(kernel, psi, support_tol)
    if isinstance(kernel, UniformScaling):
        return resample(psi, psi.points / kernel.s) / kernel.s
    return _kernels.weighted_matvec(kernel_matrix(kernel, psi.grid), psi.grid.weights,
                                    psi.amplitudes)


def apply(kernel: EvolutionKernel, psi: UniverseWavefunction,
          support_tol=SUPPORT_TOL) -> UniverseWavefunction:
    """Evolve ``psi`` and renormalize.

    Raises
    ------
    SupportTruncationError
        If more than ``support_tol`` of the probability leaves the grid.
    """
    if isinstance(kernel, Identity):
        return psi
    out, _ = normalize(psi.with_amplitudes(propagate(kernel, psi, support_tol)))
    return out


def as_dense(kernel: EvolutionKernel, grid: ScaleGrid) -> DenseMatrix:
    if isinstance(kernel, DenseMatrix):
        _check_grid(kernel, grid)
        return kernel
    if np.any(grid.weights <= 0):
        raise InvalidArgumentError("grid has zero quadrature weights")
    return DenseMatrix(grid, transfer_matrix(kernel, grid) / grid.weights[None, :])


def compose(outer: EvolutionKernel, inner: EvolutionKernel) -> EvolutionKernel:
    """Kernel equivalent to applying ``inner`` first and then ``outer``."""
    if isinstance(inner, Identity):
        return outer
    if isinstance(outer, Identity):
        return inner
    scalings = (UniformScaling, BroadenedScaling)
    if isinstance(outer, scalings) and isinstance(inner, scalings):
        s = outer.s * inner.s
        w2 = sum(k.width ** 2 for k in (outer, inner) if isinstance(k, BroadenedScaling))
        return UniformScaling(s) if w2 == 0 else BroadenedScaling(s, math.sqrt(w2))
    grid = outer.grid if isinstance(outer, DenseMatrix) else inner.grid
    B1 = as_dense(outer, grid).entries
    B2 = as_dense(inner, grid).entries
    return DenseMatrix(grid, (B1 * grid.weights[None, :]) @ B2)


def kernel_from_dict(d, grid: ScaleGrid | None = None) -> EvolutionKernel:
    kind = d.get("kind")
    if kind == "identity":
        return Identity()
    if kind == "uniform_scaling":
        return UniformScaling(float(d["s"]))
    if kind == "broadened_scaling":
        return BroadenedScaling(float(d["s"]), float(d["width"]))
    if kind == "dense_matrix":
        if grid is None:
            raise InvalidArgumentError("a dense_matrix kernel needs the scenario grid")
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
        return DenseMatrix(grid, re + 1j * im)
    raise InvalidArgumentError(f"unknown evolution kind {kind!r}")


def kernel_to_dict(kernel: EvolutionKernel):
    if isinstance(kernel, Identity):
        return {"kind": "identity"}
    if isinstance(kernel, UniformScaling):
        return {"kind": "uniform_scaling", "s": kernel.s}
    if isinstance(kernel, BroadenedScaling):
        return {"kind": "broadened_scaling", "s": kernel.s, "width": kernel.width}
    return {"kind": "dense_matrix", "re": kernel.entries.real.tolist(),
            "im": kernel.entries.imag.tolist()}
