"""Scattering on the spiked-onion graph and its many-link limit.

The onion graph replaces the vertex of an ``n``-link star by ``n`` nodes (one
per halfline end), every pair of nodes being joined by ``N`` parallel links of
length ``ell``; every node carries a delta coupling with the same ``c``.
Sending ``N -> oo`` with ``N * ell = tau`` fixed gives amplitudes that mimic the
delta' and delta'_s vertices at high energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NotApplicableError, ResonanceError
from .vertex import DeltaPrime, DeltaPrimeS, ScatteringData, VertexCoupling, _check_k, _check_n

__all__ = [
    "OnionGraph",
    "PQPair",
    "RESONANCE_TOL",
    "pq",
    "onion_smatrix",
    "solve_matching",
    "onion_limit_smatrix",
    "high_energy_smatrix",
    "tau_equivalent",
]

RESONANCE_TOL = 1e-9
_LIMIT_TOL = 1e-12


@dataclass(frozen=True)
class OnionGraph:
    n: int
    N: int
    ell: float
    c: float = 0.0

    def __post_init__(self):
        _check_n(self.n)
        if int(self.N) != self.N or self.N < 1:
            raise InvalidInputError(f"N must be a positive integer, got {self.N!r}")
        if not (self.ell > 0 and math.isfinite(self.ell)):
            raise InvalidInputError(f"link length must be positive, got {self.ell!r}")
        if not math.isfinite(self.c):
            raise InvalidInputError("coupling c must be finite")

    @classmethod
    def from_tau(cls, n: int, N: int, tau: float, c: float = 0.0) -> "OnionGraph":
        return cls(n, N, tau / N, c)


@dataclass(frozen=True)
class PQPair:
    P: complex
    Q: complex
    k: float


def _check_resonance(k: float, ell: float) -> None:
    x = k * ell / math.pi
    if abs(x - round(x)) < RESONANCE_TOL:
        raise ResonanceError(
            f"internal resonance: amplitudes singular at k*ell = {round(x)}*pi (k={k})")


def pq(g: OnionGraph, k: float) -> PQPair:
    k = _check_k(k)
    _check_resonance(k, g.ell)
    x = k * g.ell
    gamma = g.c / (1j * k)
    P = 1 - gamma + 1j * g.N * (g.n - 1) / math.tan(x)
    Q = 1j * g.N / math.sin(x)
    return PQPair(complex(P), complex(Q), k)


def onion_smatrix(g: OnionGraph, k: float) -> ScatteringData:
    """Closed-form amplitudes of the onion graph at momentum k.

    Derived from the reduced system ``r P - (n-1) Q t = conj(P)``,
    ``-Q r + (P - (n-2) Q) t = Q``; the determinant carries ``-(n-1) Q**2``.
    """
    p = pq(g, k)
    P, Q, n = p.P, p.Q, g.n
    den = P * P - (n - 2) * P * Q - (n - 1) * Q * Q
    r = (abs(P) ** 2 - (n - 2) * P.conjugate() * Q + (n - 1) * Q * Q) / den
    t = 2 * Q / den
    return ScatteringData(p.k, complex(r), complex(t), n)


def solve_matching(g: OnionGraph, k: float) -> ScatteringData:
    """Brute-force amplitudes from the 5x5 matching system in (r, t, alpha, beta, delta).

    Connecting links run over [-ell/2, ell/2]; links touching the incident
    node carry ``alpha e^{ikx} + beta e^{-ikx}``, the rest ``delta cos kx``.
    """
    k = _check_k(k)
    _check_resonance(k, g.ell)
    n, N = g.n, g.N
    eta = np.exp(0.5j * k * g.ell)
    etab = 1 / eta
    gamma = g.c / (1j * k)
    half = 0.5 * k * g.ell
    A = np.array([
        [1, 0, -etab, -eta, 0],
        [0, 1, -eta, -etab, 0],
        [0, 1, 0, 0, -math.cos(half)],
        [1 - gamma, 0, N * (n - 1) * etab, -N * (n - 1) * eta, 0],
        [0, 1 - gamma, -N * eta, N * etab, -1j * N * (n - 2) * math.sin(half)],
    ], dtype=complex)
    b = np.array([-1, 0, 0, 1 + gamma, 0], dtype=complex)
    r, t, *_ = np.linalg.solve(A, b)
    return ScatteringData(k, complex(r), complex(t), n)


def _limit_amplitudes(n: int, tau: float, c: float, k: float) -> ScatteringData:
    n = _check_n(n)
    k = _check_k(k)
    if not tau > 0:
        raise InvalidInputError(f"tau must be positive, got {tau!r}")
    pairs = n * (n - 1) / 2
    x = pairs * k * tau - n * c / k  # imaginary part of the denominator
    den = complex(-n, x)
    if abs(den) < _LIMIT_TOL:
        raise ResonanceError("limiting amplitude singular")
    r = complex(n - 2, -x) / den
    t = -2 / den
    return ScatteringData(k, r, t, n)


def onion_limit_smatrix(n: int, tau: float, c: float, k: float) -> ScatteringData:
    """Amplitudes of the N -> oo onion limit with total link length tau per pair."""
    return _limit_amplitudes(n, tau, c, k)


def high_energy_smatrix(n: int, tau: float, k: float) -> ScatteringData:
    """Limit amplitudes with the coupling term dropped (exact when c = 0)."""
    return _limit_amplitudes(n, tau, 0.0, k)


def tau_equivalent(coupling: VertexCoupling, n: int) -> float:
    """The tau for which the onion limit mimics ``coupling`` at high energy."""
    n = _check_n(n)
    if isinstance(coupling, DeltaPrime) and coupling.C < 0:
        return -2 * coupling.C / (n - 1)
    if isinstance(coupling, DeltaPrimeS) and coupling.D > 0:
        return 2 * coupling.D / (n * (n - 1))
    raise NotApplicableError(f"no geometric equivalent with positive tau for {coupling!r}")
