"""Emission / evolution / detection updates of the universe wavefunction.

A detected photon multiplies the propagated state by the kernel ``q`` of its
emitter/detector pair::

    h1(a) ~ integral q(a / c) B(a, c) h0(c) dc

and the event is post-selected: the posterior is renormalized and the squared
norm of the unnormalized result is reported as a relative detection weight.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError, NoDetectionError
from .evolution import (BroadenedScaling, DenseMatrix, EvolutionKernel, Identity,
                        UniformScaling, check_support, kernel_matrix)
from .grid import UniverseWavefunction, moments, normalize, resample
from .kernel import MeasurementKernel, QuadratureKernel, kernel_for_event, tabulate
from .profiles import SpectralProfile
from .quadrature import integrate_real_line

TABLE_POINTS = 1025


@dataclass(frozen=True)
class MeasurementEvent:
    """One photon: emitted with profile ``emit`` (f), detected with ``detect`` (g)."""

    emit: SpectralProfile
    detect: SpectralProfile

    def kernel(self) -> MeasurementKernel:
        return kernel_for_event(self.emit, self.detect)


@dataclass(frozen=True)
class PipelineResult:
    posterior: UniverseWavefunction
    detect_weight: float
    history: list = field(default_factory=list)

    def summary(self):
        m = moments(self.posterior)
        return {"detect_weight": self.detect_weight, **m.to_dict(), "history": self.history}


def _finish(psi0, amplitudes, k):
    psi = psi0.with_amplitudes(amplitudes)
    weight = psi.norm()
    if not weight > 0:
        raise NoDetectionError(
            f"detection weight is zero after {k} measurement(s): the post-selected branch is empty")
    posterior, _ = normalize(psi)
    return posterior, weight


def _dense_ratio_kernel(q, num, den):
    """``q(num_i / den_j)`` as a matrix, tabulating quadrature kernels first."""
    ratios = num[:, None] / den[None, :]
    if isinstance(q, QuadratureKernel):
        q = tabulate(q, ratios.min(), ratios.max(), TABLE_POINTS)
    return np.asarray(q(ratios), dtype=complex)


def _posterior_series(psi0, B, q, ks, support_tol):
    """Yield ``(k, unnormalized amplitudes)`` for ``q ** k`` with ``k`` in ``ks``."""
    a = psi0.points
    if isinstance(B, Identity):
        q1 = complex(q(1.0))
        for k in ks:
            yield k, q1 ** k * psi0.amplitudes
        return
    if isinstance(B, UniformScaling):
        # a broadened or dense B spreads probability that q then re-weights, so only
        # the deterministic image of a pure scaling has to stay on the grid
        check_support(B, psi0, support_tol)
        qs = complex(q(B.s))
        moved = resample(psi0, a / B.s) / B.s
        for k in ks:
            yield k, qs ** k * moved
        return
    Bm = kernel_matrix(B, psi0.grid)
    Q = _dense_ratio_kernel(q, a, a)
    for k in ks:
        yield k, _kernels.weighted_matvec(Q ** k * Bm, psi0.grid.weights, psi0.amplitudes)


def measure_k(psi0: UniverseWavefunction, B_mid: EvolutionKernel, ev: MeasurementEvent, k=1,
              kernel: MeasurementKernel | None = None, support_tol=1e-9) -> PipelineResult:
    """Posterior after ``k`` identical photons in an otherwise static universe.

    Evaluates ``h_k(a) = N integral q(a / c)^k B_mid(a, c) h0(c) dc``. The
    history holds the detection weight and posterior moments for every
    intermediate photon count ``1..k``.
    """
    if int(k) != k or k < 1:
        raise InvalidArgumentError(f"photon count must be a positive integer, got {k!r}")
    q = kernel if kernel is not None else ev.kernel()
    history = []
    posterior = weight = None
    for kk, amp in _posterior_series(psi0, B_mid, q, range(1, int(k) + 1), support_tol):
        posterior, weight = _finish(psi0, amp, kk)
        history.append({"k": kk, "detect_weight": weight, **moments(posterior).to_dict()})
    return PipelineResult(posterior, weight, history)


def measure_once(psi0: UniverseWavefunction, B: EvolutionKernel, ev: MeasurementEvent,
                 kernel: MeasurementKernel | None = None, support_tol=1e-9) -> PipelineResult:
    """Single emission, evolution by ``B`` and detection."""
    return measure_k(psi0, B, ev, 1, kernel=kernel, support_tol=support_tol)


def simple_example_direct(psi0: UniverseWavefunction, s, f: SpectralProfile,
                          g: SpectralProfile, rtol=1e-10,
                          support_tol=1e-9) -> UniverseWavefunction:
    """Posterior for pure scaling evaluated straight from the frequency integral.

    ``h1(a) ~ (a sqrt(s))^{-1} (integral conj(g(w / a)) f(s w / a) dw) h0(a / s)``,
    with one quadrature per grid point. Independent of the kernel machinery,
    so it serves as a cross-check of :func:`measure_once`.
    """
    check_support(UniformScaling(s), psi0, support_tol)
    a = psi0.points
    h0s = resample(psi0, a / s)
    out = np.zeros_like(h0s)
    for i in np.nonzero(h0s)[0]:
        ai = float(a[i])
        features = [(ai * x, ai * w) for x, w in g.features()] + \
                   [(ai * x / s, ai * w / s) for x, w in f.features()]
        support = _scaled_support(g.support, ai)
        fs = _scaled_support(f.support, ai / s)
        if support is None:
            support = fs
        elif fs is not None:
            support = (max(support[0], fs[0]), min(support[1], fs[1]))
        ov = integrate_real_line(lambda w: np.conj(g(w / ai)) * f(s * w / ai), features,
                                 rtol=rtol, support=support)
        out[i] = ov / (ai * math.sqrt(s)) * h0s[i]
    posterior, _ = _finish(psi0, out, 1)
    return posterior


def _scaled_support(support, factor):
    return None if support is None else (support[0] * factor, support[1] * factor)


def general_chain(psi0: UniverseWavefunction, kernels, events, n_emitted=None,
                  support_tol=1e-9) -> PipelineResult:
    """Posterior after ``N`` emissions followed by ``k`` detections.

    ``kernels`` are the ``N + k - 1`` evolution kernels between consecutive
    events (all emissions first, photon ``j`` detected at event ``N + j``),
    ``events`` the ``k`` detected photons in emission order. The nested
    integral over the intermediate scale factors ``c_0 .. c_{N+k-2}`` is
    contracted exactly: identity and pure-scaling kernels tie neighbouring
    scale factors together (the later one is kept, the earlier one becomes a
    fixed multiple of it), every remaining independent scale factor is
    integrated with the grid weights.
    """
    kernels = list(kernels)
    events = list(events)
    k = len(events)
    N = len(kernels) - k + 1
    if n_emitted is not None and n_emitted != N:
        raise InvalidArgumentError(
            f"{len(kernels)} evolution kernels and {k} detections imply {N} emissions, "
            f"not {n_emitted}")
    if k < 1 or N < k:
        raise InvalidArgumentError(
            f"need 1 <= detections <= emissions, got {k} detections and {N} emissions")
    n_vars = N + k
    grid = psi0.grid
    x = grid.points

    # Walk backwards from a = c_{N+k-1}: root[i] is the free variable c_i is tied to,
    # mult[i] the factor with c_i = mult[i] * root value.
    root = [0] * n_vars
    mult = [1.0] * n_vars
    root[-1] = n_vars - 1
    jacobian = 1.0
    for i in range(n_vars - 2, -1, -1):
        B = kernels[i]
        if isinstance(B, Identity):
            root[i], mult[i] = root[i + 1], mult[i + 1]
        elif isinstance(B, UniformScaling):
            root[i], mult[i] = root[i + 1], mult[i + 1] / B.s
            jacobian /= B.s
        else:
            root[i], mult[i] = i, 1.0
    roots = sorted(set(root))
    if len(roots) > len(string.ascii_letters):
        raise InvalidArgumentError("too many independent scale factors to contract")
    letter = {r: string.ascii_letters[j] for j, r in enumerate(roots)}

    operands, subscripts = [], []
    scalar = complex(jacobian)

    for r in roots:
        if r != n_vars - 1:
            operands.append(grid.weights)
            subscripts.append(letter[r])

    if mult[0] == 1.0:
        h0 = psi0.amplitudes
    else:
        check_support(UniformScaling(1.0 / mult[0]), psi0, support_tol)
        h0 = resample(psi0, mult[0] * x)
    operands.append(h0)
    subscripts.append(letter[root[0]])

    for j, ev in enumerate(events):
        q = ev.kernel()
        det, emi = j + N, j
        if root[det] == root[emi]:
            scalar *= complex(q(mult[det] / mult[emi]))
        else:
            operands.append(_dense_ratio_kernel(q, mult[det] * x, mult[emi] * x))
            subscripts.append(letter[root[det]] + letter[root[emi]])

    for i, B in enumerate(kernels):
        if root[i] == root[i + 1]:
            continue
        if isinstance(B, BroadenedScaling):
            mat = _kernels.log_gaussian_kernel(mult[i + 1] * x, mult[i] * x, math.log(B.s),
                                               B.width)
        elif isinstance(B, DenseMatrix):
            if mult[i] != 1.0 or mult[i + 1] != 1.0:
                raise InvalidArgumentError(
                    "a dense kernel cannot border a pure-scaling interval in a chain")
            if not B.grid.same_as(grid):
                raise InvalidArgumentError("dense kernel is defined on a different grid")
            mat = B.entries
        else:  # pragma: no cover - ties handled above
            raise AssertionError(B)
        operands.append(mat)
        subscripts.append(letter[root[i + 1]] + letter[root[i]])

    spec = ",".join(subscripts) + "->" + letter[n_vars - 1]
    amp = scalar * np.einsum(spec, *operands, optimize="greedy")
    posterior, weight = _finish(psi0, amp, k)
    return PipelineResult(posterior, weight,
                          [{"k": k, "detect_weight": weight, **moments(posterior).to_dict()}])

