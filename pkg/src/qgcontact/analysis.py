"""Finite-cutoff checks of the lattice band/gap statements.

Everything here is built on the exact solvers of :mod:`qgcontact.bands`:
counting gaps, locating the critical coupling for gap opening, checking
edge quantization and the asymptotic width bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath

from .bands import LatticeSpec, SpectralInterval, Spectrum, kp_spectrum, lattice_spectrum
from .diophantine import WORK_DPS, frac_part, parse_theta
from .errors import InvalidInputError, NotApplicableError
from .vertex import Delta, DeltaPrime, DeltaPrimeS

__all__ = [
    "EnhancementFactors",
    "enhancement",
    "critical_coupling",
    "coupling_along_sequence",
    "GapReport",
    "count_gaps",
    "verify_propositions",
    "CensusRow",
    "gap_census",
    "asymptotic_threshold",
]

QUANT_RTOL = 1e-8
KP_TOL = 1e-8
WIDTH_SLACK = 0.1


@dataclass(frozen=True)
class EnhancementFactors:
    theta: float
    g: float
    e: float


def _g(theta: float) -> float:
    return (2 * theta + 1 + math.sqrt(1 + 4 * theta)) / (2 * (theta + 1))


def enhancement(theta: float) -> EnhancementFactors:
    """Band-conspiracy factors g(theta) and e(theta) = max(g(theta), g(1/theta))."""
    theta = float(theta)
    if not (theta > 0 and math.isfinite(theta)):
        raise InvalidInputError(f"theta must be positive, got {theta!r}")
    g = _g(theta)
    return EnhancementFactors(theta, g, max(g, _g(1 / theta)))


def _check_ratio(theta, ell1: float, ell2: float):
    t = parse_theta(theta)
    if not (ell1 > 0 and ell2 > 0):
        raise InvalidInputError("spacings must be positive")
    if abs(ell2 / ell1 - float(t)) > 1e-9 * float(t):
        raise InvalidInputError(
            f"spacing ratio l2/l1 = {ell2 / ell1!r} does not match theta = {t.label}")
    return t


def _edge_coupling(k: float, frac) -> float:
    # 2 k F_+(k) at a lattice point, F_+ being the right limit tan(pi {x} / 2)
    return 2 * k * math.tan(0.5 * math.pi * float(frac))


def critical_coupling(theta, ell1: float, ell2: float, e_max: float) -> float:
    """Smallest c > 0 opening a positive-energy gap of the delta lattice below e_max.

    Between lattice points ``2 k F_+(k)`` is increasing, so its infimum over
    the positive axis (away from the bottom gap) is attained as a right
    limit at some ``k_n = pi n / ell1`` or ``k_m = pi m / ell2``.  Fractional
    parts are evaluated in extended precision from ``theta``.
    """
    if not e_max > 0:
        raise InvalidInputError(f"invalid energy cutoff e_max={e_max!r}")
    t = _check_ratio(theta, ell1, ell2)
    k_max = math.sqrt(e_max)
    n_max = math.floor(k_max * ell1 / math.pi)
    m_max = math.floor(k_max * ell2 / math.pi)
    if n_max < 1 and m_max < 1:
        raise InvalidInputError("no lattice points below the energy cutoff")
    best = math.inf
    with mpmath.workdps(WORK_DPS):
        tm = t.mpf()
        for n in range(1, n_max + 1):
            best = min(best, _edge_coupling(math.pi * n / ell1, frac_part(n * tm)))
        for m in range(1, m_max + 1):
            best = min(best, _edge_coupling(math.pi * m / ell2, frac_part(m / tm)))
    return best


def coupling_along_sequence(theta, ell1: float, denominators: Iterable[int]) -> list[float]:
    """``2 k_n tan(pi {n theta} / 2)`` at ``k_n = pi n / ell1`` for the given n."""
    t = parse_theta(theta)
    out = []
    with mpmath.workdps(WORK_DPS):
        tm = t.mpf()
        for n in denominators:
            out.append(_edge_coupling(math.pi * n / ell1, frac_part(n * tm)))
    return out


def asymptotic_threshold(lat: LatticeSpec) -> float:
    """Energy above which the asymptotic width bounds are asserted."""
    return 100 * (2 * math.pi / (lat.ell1 + lat.ell2)) ** 2


def count_gaps(spec: Spectrum) -> list[SpectralInterval]:
    """Gaps lying above the spectral threshold (and at nonnegative energy)."""
    floor = max(spec.threshold, 0.0)
    return [g for g in spec.gaps if g.lo >= floor]


@dataclass
class GapReport:
    lattice: LatticeSpec
    e_max: float
    gap_count: int
    gap_widths: list[float]
    edge_quantization_ok: bool
    bound_violations: list[tuple[tuple[float, float], float, float]]
    # None marks a check that does not apply to the coupling family
    checks: dict[str, bool | None] = field(default_factory=dict)
    spectrum: Spectrum | None = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return all(v is not False for v in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "e_max": self.e_max,
            "ok": self.ok,
            "gap_count": self.gap_count,
            "gap_widths": list(self.gap_widths),
            "edge_quantization_ok": self.edge_quantization_ok,
            "bound_violations": [
                {"interval": list(iv), "bound": b, "value": v}
                for iv, b, v in self.bound_violations],
            "checks": dict(self.checks),
        }


def _quantized(energy: float, spacings: Sequence[float]) -> bool:
    if energy < 0:
        return False
    k = math.sqrt(energy)
    for ell in spacings:
        m = round(k * ell / math.pi)
        target = (math.pi * m / ell) ** 2
        if abs(energy - target) <= QUANT_RTOL * max(energy, 1e-300):
            return True
    return energy == 0.0


def _contained(gap: tuple[float, float], gaps: Sequence[SpectralInterval]) -> bool:
    lo, hi = gap
    for g in gaps:
        tol_lo = KP_TOL * max(1.0, abs(g.lo))
        tol_hi = KP_TOL * max(1.0, abs(g.hi))
        if g.lo - tol_lo <= lo and hi <= g.hi + tol_hi:
            return True
    return False


def _kp_containment(lat: LatticeSpec, spec: Spectrum) -> bool:
    # only the positive half-axis: at negative energy a 1D band need not lie in a 2D band
    kp = [kp_spectrum(ell, lat.coupling, spec.e_max, negative=False).gaps
          for ell in (lat.ell1, lat.ell2)]
    for g in spec.gaps:
        if g.hi <= 0:
            continue
        part = (max(g.lo, 0.0), g.hi)
        if not all(_contained(part, gs) for gs in kp):
            return False
    return True


def _alternating(spec: Spectrum) -> bool:
    ivs = spec.intervals
    if not ivs or ivs[-1].hi != spec.e_max:
        return False
    for a, b in zip(ivs[:-1], ivs[1:]):
        if a.kind == b.kind or a.hi != b.lo or not a.lo < a.hi:
            return False
    return True


def verify_propositions(lat: LatticeSpec, e_max: float, resolution: int = 512) -> GapReport:
    """Compute the spectrum and check the applicable structural statements.

    Violations are reported, never raised.
    """
    c = lat.coupling
    if not isinstance(c, (Delta, DeltaPrime, DeltaPrimeS)):
        raise NotApplicableError(f"no lattice solver for {c!r}")
    spec = lattice_spectrum(lat, e_max, negative=True, resolution=resolution)
    bands = spec.bands
    gaps = count_gaps(spec)
    spacings = (lat.ell1, lat.ell2)
    checks: dict[str, bool | None] = {
        "band_structure": _alternating(spec),
        "free_spectrum": None,
        "edge_quantization": None,
        "threshold_sign": None,
        "deep_coupling": None,
        "kp_containment": None,
        "width_bounds": None,
    }
    violations: list[tuple[tuple[float, float], float, float]] = []
    e_asym = asymptotic_threshold(lat)

    if isinstance(c, Delta):
        p = c.c
        checks["free_spectrum"] = (len(bands) == 1 and bands[0].lo == 0.0
                                   and bands[0].hi == spec.e_max) if p == 0 else None
        if p > 0:
            edges = [b.hi for b in bands if b.hi < spec.e_max]
        elif p < 0:
            edges = [b.lo for b in bands[1:]]
        else:
            edges = []
        checks["edge_quantization"] = all(_quantized(e, spacings) for e in edges) if p else None
        a1 = spec.threshold
        checks["threshold_sign"] = (a1 > 0) if p > 0 else (a1 < 0) if p < 0 else (a1 == 0)
        if p < -4 * (1 / lat.ell1 + 1 / lat.ell2) and len(bands) >= 2:
            alpha2 = (math.pi / lat.L) ** 2
            checks["deep_coupling"] = (bands[0].hi < 0 and
                                       abs(bands[1].lo - alpha2) <= QUANT_RTOL * alpha2)
        if p != 0:
            checks["kp_containment"] = _kp_containment(lat, spec)
            bound = 2 * abs(p) / (lat.ell1 + lat.ell2) * (1 + WIDTH_SLACK)
            asserted = [g for g in gaps if g.lo > e_asym and g.hi < spec.e_max]
            for g in asserted:
                if not g.width < bound:
                    violations.append(((g.lo, g.hi), bound, g.width))
            checks["width_bounds"] = (not violations) if asserted else None
    elif isinstance(c, DeltaPrimeS):
        p = c.D
        checks["free_spectrum"] = (len(bands) == 1 and bands[0].lo == 0.0
                                   and bands[0].hi == spec.e_max) if p == 0 else None
        if p > 0:
            edges = [b.lo for b in bands]
        elif p < 0:
            edges = [b.hi for b in bands[1:] if b.hi < spec.e_max]
        else:
            edges = []
        checks["edge_quantization"] = all(_quantized(e, spacings) for e in edges) if p else None
        a1 = spec.threshold
        checks["threshold_sign"] = (a1 == 0) if p >= 0 else (a1 < 0)
        if -(lat.ell1 + lat.ell2) < p < 0 and len(bands) >= 2:
            checks["deep_coupling"] = bands[0].hi < 0 and bands[1].lo == 0.0
        if p != 0:
            checks["kp_containment"] = _kp_containment(lat, spec)
            e_theta = enhancement(lat.theta).e
            upper = 8 / abs(p) * (1 / lat.ell1 + 1 / lat.ell2) * e_theta * (1 + WIDTH_SLACK)
            lower = 8 / (abs(p) * lat.L) * (1 - WIDTH_SLACK)
            asserted = [b for b in bands if b.lo > e_asym and b.hi < spec.e_max]
            for b in asserted:
                if not b.width < upper:
                    violations.append(((b.lo, b.hi), upper, b.width))
                if not b.width > lower:
                    violations.append(((b.lo, b.hi), lower, b.width))
            checks["width_bounds"] = (not violations) if asserted else None

    return GapReport(
        lattice=lat,
        e_max=spec.e_max,
        gap_count=len(gaps),
        gap_widths=[g.width for g in gaps],
        edge_quantization_ok=checks["edge_quantization"] is not False,
        bound_violations=violations,
        checks=checks,
        spectrum=spec,
    )


@dataclass(frozen=True)
class CensusRow:
    c: float
    cL: float
    gap_count: int
    lowest_gap: tuple[float, float] | None


def gap_census(theta, ell: float, coupling_values: Sequence[float], e_max: float) -> list[CensusRow]:
    """Gap counts of the delta lattice with l1 = ell theta**-1/2, l2 = ell theta**1/2."""
    if not len(coupling_values):
        raise InvalidInputError("coupling_values must be nonempty")
    th = float(parse_theta(theta))
    rows = []
    for c in coupling_values:
        lat = LatticeSpec.from_ratio(ell, th, Delta(c))
        spec = lattice_spectrum(lat, e_max)
        gaps = count_gaps(spec)
        lowest = (gaps[0].lo, gaps[0].hi) if gaps else None
        rows.append(CensusRow(float(c), abs(float(c)) * lat.L, len(gaps), lowest))
    return rows
