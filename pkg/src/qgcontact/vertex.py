"""Vertex couplings on star graphs: bound states, boundary conditions, S-matrices.

A star graph has ``n`` halflines glued at one vertex.  Boundary values ``f_j``
and derivatives ``f'_j`` are taken at the vertex, derivatives pointing outward
along each link.  The incoming-wave convention is ``exp(-ikx) + r exp(ikx)``
on the incident link and ``t exp(ikx)`` on the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionError,
    InvalidInputError,
    InvalidMomentumError,
    NotApplicableError,
    SingularCouplingError,
)

__all__ = [
    "Delta",
    "DeltaPrime",
    "DeltaPrimeS",
    "PermInvariant",
    "VertexCoupling",
    "BoundState",
    "ScatteringData",
    "singular_limits",
    "bound_states",
    "star_smatrix",
    "smatrix_denominator",
    "perm_reflection_asymptotic",
    "bc_matrices",
    "bc_residual",
]


def _finite(name: str, value) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"coupling parameter {name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Delta:
    """Continuous wavefunction, derivative sum equal to ``c * f``."""

    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", _finite("c", self.c))


@dataclass(frozen=True)
class DeltaPrime:
    """Zero derivative sum, ``f_j - f_k + C (f'_j - f'_k) = 0``.

    ``DeltaPrime(0)`` is the free vertex and constructs ``Delta(0.0)`` instead.
    """

    C: float

    def __new__(cls, C=None):
        if C is not None and float(C) == 0.0:
            return Delta(0.0)
        return super().__new__(cls)

    def __post_init__(self):
        object.__setattr__(self, "C", _finite("C", self.C))


@dataclass(frozen=True)
class DeltaPrimeS:
    """Equal derivatives, value sum equal to ``D * f'``."""

    D: float

    def __post_init__(self):
        object.__setattr__(self, "D", _finite("D", self.D))


@dataclass(frozen=True)
class PermInvariant:
    """``f_j = A f'_j + B sum_{k != j} f'_k``; ``A == B`` is stored but degenerate."""

    A: float
    B: float

    def __post_init__(self):
        object.__setattr__(self, "A", _finite("A", self.A))
        object.__setattr__(self, "B", _finite("B", self.B))

    @property
    def degenerate(self) -> bool:
        return self.A == self.B


VertexCoupling = Union[Delta, DeltaPrime, DeltaPrimeS, PermInvariant]


@dataclass(frozen=True)
class BoundState:
    energy: float
    # None where the multiplicity is not reported (permutation-invariant family)
    multiplicity: int | None


@dataclass(frozen=True)
class ScatteringData:
    k: float
    r: complex
    t: complex
    n: int

    @property
    def unitarity_defect(self) -> float:
        return abs(abs(self.r) ** 2 + (self.n - 1) * abs(self.t) ** 2 - 1.0)


def _check_n(n) -> int:
    if int(n) != n or n < 2:
        raise InvalidInputError(f"star graph needs an integer n >= 2, got {n!r}")
    return int(n)


def _check_k(k) -> float:
    k = float(k)
    if not (k > 0 and math.isfinite(k)):
        raise InvalidMomentumError(f"invalid momentum k={k!r}; need k > 0")
    return k


def singular_limits(A: float, B: float, n: int) -> tuple[float, float]:
    """Return the quantities ``(C, D)`` preserved in the two singular limits of (A, B)."""
    n = _check_n(n)
    return B - A, n * (A + (n - 1) * B)


def bound_states(coupling: VertexCoupling, n: int) -> list[BoundState]:
    """Negative eigenvalues of the star graph with the given vertex coupling."""
    n = _check_n(n)
    if isinstance(coupling, Delta):
        if coupling.c < 0:
            return [BoundState(-((coupling.c / n) ** 2), 1)]
        return []
    if isinstance(coupling, DeltaPrime):
        if coupling.C > 0:
            return [BoundState(-(coupling.C ** -2), n - 1)]
        return []
    if isinstance(coupling, DeltaPrimeS):
        if coupling.D < 0:
            return [BoundState(-((n / coupling.D) ** 2), 1)]
        return []
    if isinstance(coupling, PermInvariant):
        A, B = coupling.A, coupling.B
        denominators = (A - B, A + (n - 1) * B)
        if 0.0 in denominators:
            raise SingularCouplingError(
                f"singular coupling parameters A={A}, B={B} for n={n}")
        return [BoundState(-(1.0 / d) ** 2, None) for d in denominators if d < 0]
    raise TypeError(f"unknown coupling {coupling!r}")


def smatrix_denominator(coupling: VertexCoupling, n: int, k: complex) -> complex:
    """Common denominator of r and t, valid for complex k (poles at k = i kappa)."""
    n = _check_n(n)
    if isinstance(coupling, Delta):
        return 1j * k * n - coupling.c
    if isinstance(coupling, DeltaPrime):
        return n + 1j * n * k * coupling.C
    if isinstance(coupling, DeltaPrimeS):
        return n - 1j * k * coupling.D
    raise NotApplicableError(
        "closed-form S-matrix only for the delta, delta' and delta'_s couplings")


def star_smatrix(coupling: VertexCoupling, n: int, k: float) -> ScatteringData:
    """Reflection and transmission amplitudes for a wave incident on one link."""
    k = _check_k(k)
    den = smatrix_denominator(coupling, n, k)
    ik = 1j * k
    if isinstance(coupling, Delta):
        r = (coupling.c - (n - 2) * ik) / den
        t = 2 * ik / den
    elif isinstance(coupling, DeltaPrime):
        r = (2 - n + ik * n * coupling.C) / den
        t = 2 / den
    else:
        r = (n - 2 - ik * coupling.D) / den
        t = -2 / den
    return ScatteringData(k, complex(r), complex(t), int(n))


def perm_reflection_asymptotic(A: float, B: float, n: int, k: float) -> complex:
    """Leading high-energy reflection amplitude of the permutation-invariant coupling.

    Accurate to O(k**-2); tends to +1 (Neumann decoupling) as k grows.
    """
    n = _check_n(n)
    k = _check_k(k)
    if B == 0 or A == B:
        raise NotApplicableError(
            f"asymptotic form not applicable for A={A}, B={B}")
    ratio = A / B - 1.0
    d = A + (n - 1) * B
    num = n - 2 + 1j * k * ratio * d
    den = -n - 2 * ratio + 1j * k * ratio * d
    if den == 0:
        raise NotApplicableError("asymptotic form not applicable: vanishing denominator")
    return complex(num / den)


def bc_matrices(coupling: VertexCoupling, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrices ``(M, N)`` with the coupling conditions reading ``M f + N f' = 0``."""
    n = _check_n(n)
    M = np.zeros((n, n))
    N = np.zeros((n, n))
    idx = np.arange(n - 1)
    if isinstance(coupling, Delta):
        M[idx, idx] = 1.0
        M[idx, idx + 1] = -1.0
        N[n - 1, :] = 1.0
        M[n - 1, 0] = -coupling.c
    elif isinstance(coupling, DeltaPrime):
        N[0, :] = 1.0
        M[idx + 1, idx] = 1.0
        M[idx + 1, idx + 1] = -1.0
        N[idx + 1, idx] = coupling.C
        N[idx + 1, idx + 1] = -coupling.C
    elif isinstance(coupling, DeltaPrimeS):
        N[idx, idx] = 1.0
        N[idx, idx + 1] = -1.0
        M[n - 1, :] = 1.0
        N[n - 1, 0] = -coupling.D
    elif isinstance(coupling, PermInvariant):
        M[:] = np.eye(n)
        N[:] = -coupling.B * (np.ones((n, n)) - np.eye(n)) - coupling.A * np.eye(n)
    else:
        raise TypeError(f"unknown coupling {coupling!r}")
    return M, N


def bc_residual(coupling: VertexCoupling, n: int,
                f: Sequence[complex], fp: Sequence[complex]) -> np.ndarray:
    """The n residuals of the coupling conditions for boundary data (f, f')."""
    f = np.asarray(f, dtype=complex)
    fp = np.asarray(fp, dtype=complex)
    if f.shape != (n,) or fp.shape != (n,):
        raise DimensionError(
            f"dimension error: expected {n} values and {n} derivatives, "
            f"got {f.shape} and {fp.shape}")
    M, N = bc_matrices(coupling, n)
    return M @ f + N @ fp
