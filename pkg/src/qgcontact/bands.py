"""Band and gap structure of rectangular graph lattices and Kronig-Penney chains.

For the delta and delta'_s couplings the band condition reduces to comparing a
function built from ``tan`` or ``cot`` of the reduced phases with a constant.
Between consecutive lattice singularities ``k = m pi / ell_j`` that function is
strictly monotone, so every band edge is a single bisection root and the
enumeration of bands is complete: no micro-gap can be missed.

The delta' lattice has no such structure; its spectrum is found by scanning
the band indicator and refining its sign changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, LatticeSingularityError, NotApplicableError
from .vertex import Delta, DeltaPrime, DeltaPrimeS, VertexCoupling

__all__ = [
    "LatticeSpec",
    "BlochBox",
    "SpectralInterval",
    "Spectrum",
    "f_sum",
    "f_extrema_pos",
    "f_extrema_neg",
    "delta_spectrum",
    "dps_spectrum",
    "dprime_band_indicator",
    "dprime_spectrum",
    "kp_spectrum",
    "lattice_spectrum",
]

POLE_TOL = 1e-12
EDGE_RTOL = 1e-12
MERGE_RTOL = 1e-12
DPRIME_EDGE_TOL = 1e-8


@dataclass(frozen=True)
class LatticeSpec:
    ell1: float
    ell2: float
    coupling: VertexCoupling

    def __post_init__(self):
        for name in ("ell1", "ell2"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidInputError(f"{name} must be a positive length, got {v!r}")
            object.__setattr__(self, name, float(v))

    @classmethod
    def from_ratio(cls, ell: float, theta: float, coupling: VertexCoupling) -> "LatticeSpec":
        """Lattice with ``sqrt(ell1 ell2) = ell`` and ``ell2 / ell1 = theta``."""
        return cls(ell / math.sqrt(theta), ell * math.sqrt(theta), coupling)

    @property
    def ell(self) -> float:
        return math.sqrt(self.ell1 * self.ell2)

    @property
    def theta(self) -> float:
        return self.ell2 / self.ell1

    @property
    def L(self) -> float:
        return max(self.ell1, self.ell2)


@dataclass(frozen=True)
class BlochBox:
    v1: float
    v2: float

    def __post_init__(self):
        if not (-1 <= self.v1 <= 1 and -1 <= self.v2 <= 1):
            raise InvalidInputError("Bloch parameters must lie in [-1, 1]")


@dataclass(frozen=True)
class SpectralInterval:
    lo: float
    hi: float
    kind: str  # "band" | "gap"

    def __post_init__(self):
        if self.kind not in ("band", "gap"):
            raise InvalidInputError(f"unknown interval kind {self.kind!r}")
        if not self.lo < self.hi:
            raise InvalidInputError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass
class Spectrum:
    intervals: list[SpectralInterval]
    e_max: float
    meta: dict = field(default_factory=dict)

    @property
    def bands(self) -> list[SpectralInterval]:
        return [iv for iv in self.intervals if iv.kind == "band"]

    @property
    def gaps(self) -> list[SpectralInterval]:
        return [iv for iv in self.intervals if iv.kind == "gap"]

    @property
    def threshold(self) -> float:
        """Bottom of the spectrum (alpha_1) within the computed range."""
        bands = self.bands
        return bands[0].lo if bands else math.inf

    def contains(self, energies) -> np.ndarray:
        """Boolean band membership (closed bands) for an array of energies."""
        e = np.asarray(energies, dtype=float)
        out = np.zeros(e.shape, dtype=bool)
        for b in self.bands:
            out |= (e >= b.lo) & (e <= b.hi)
        return out

    def edge_distance(self, energies) -> np.ndarray:
        """Distance from each energy to the nearest interior interval edge."""
        e = np.asarray(energies, dtype=float)
        edges = np.array([iv.hi for iv in self.intervals[:-1]])
        if edges.size == 0:
            return np.full(e.shape, np.inf)
        return np.min(np.abs(e[..., None] - edges), axis=-1)


# ---------------------------------------------------------------------------
# Extremal values of the Bloch function F(k; v1, v2)


def f_sum(k: float, v1: float, v2: float, ell1: float, ell2: float) -> float:
    """F(k; v1, v2) = sum_j (v_j - cos k ell_j) / sin k ell_j."""
    if not k > 0:
        raise InvalidInputError("k must be positive")
    total = 0.0
    for v, ell in ((v1, ell1), (v2, ell2)):
        x = k * ell / math.pi
        if abs(x - round(x)) < POLE_TOL:
            raise LatticeSingularityError(f"evaluated at lattice singularity k={k}")
        total += (v - math.cos(k * ell)) / math.sin(k * ell)
    return total


def _reduced_phase(k: float, ell: float) -> tuple[float, bool]:
    """Phase ``k ell / 2 - (pi/2) floor(k ell / pi)`` in [0, pi/2) and a pole flag."""
    x = k * ell / math.pi
    m = round(x)
    if abs(x - m) < POLE_TOL:
        return 0.0, True
    return 0.5 * k * ell - 0.5 * math.pi * math.floor(x), False


def f_extrema_pos(k: float, ell1: float, ell2: float) -> tuple[float, float]:
    """(F_-, F_+): min and max of F(k; .) over the Bloch box, k > 0.

    At a lattice singularity F_+ takes its right limit and F_- its left limit,
    so the singular term contributes zero to both.
    """
    if not k > 0:
        raise InvalidInputError("k must be positive")
    fplus = fminus = 0.0
    for ell in (ell1, ell2):
        u, pole = _reduced_phase(k, ell)
        if pole:
            continue
        fplus += math.tan(u)
        fminus -= 1.0 / math.tan(u)
    return fminus, fplus


def f_extrema_neg(kappa: float, ell1: float, ell2: float) -> tuple[float, float]:
    """(F_-, F_+) on the negative energy axis, energy = -kappa**2."""
    if not kappa > 0:
        raise InvalidInputError("kappa must be positive")
    fplus = -sum(math.tanh(0.5 * kappa * ell) for ell in (ell1, ell2))
    fminus = -sum(1.0 / math.tanh(0.5 * kappa * ell) for ell in (ell1, ell2))
    return fminus, fplus


# ---------------------------------------------------------------------------
# Monotone edge solver


def _bisect(h: Callable[[float], float], lo: float, hi: float, target: float,
            increasing: bool, rtol: float = EDGE_RTOL) -> float:
    """Root of ``h = target`` in (lo, hi); h is only evaluated strictly inside."""
    while hi - lo > rtol * max(abs(hi), abs(lo), 1e-300):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        above = h(mid) >= target
        if above == increasing:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _singular_points(spacings: Sequence[float], k_max: float) -> list[tuple[float, frozenset]]:
    """Sorted lattice singularities in (0, k_max], coincident points merged."""
    pts = []
    for j, ell in enumerate(spacings):
        step = math.pi / ell
        m = 1
        while m * step <= k_max * (1 + MERGE_RTOL):
            pts.append((m * step, j))
            m += 1
    pts.sort()
    merged: list[tuple[float, set]] = []
    for k, j in pts:
        if merged and k - merged[-1][0] <= MERGE_RTOL * k:
            merged[-1][1].add(j)
        else:
            merged.append((k, {j}))
    return [(k, frozenset(js)) for k, js in merged]


class _Family:
    """h(k) = k**power * sum_j phi(u_j); band iff h >= threshold."""

    def __init__(self, spacings: Sequence[float], use_tan: bool, power: int):
        self.spacings = tuple(spacings)
        self.use_tan = use_tan
        self.power = power

    @property
    def increasing(self) -> bool:
        return self.use_tan

    def value(self, k: float, branch: Sequence[int]) -> float:
        s = 0.0
        for ell, m in zip(self.spacings, branch):
            u = 0.5 * k * ell - 0.5 * math.pi * m
            s += math.tan(u) if self.use_tan else 1.0 / math.tan(u)
        return s * k ** self.power

    def limit_at_zero(self) -> float:
        # small-k limits: tan(k l/2) ~ k l/2, cot(k l/2) ~ 2/(k l)
        if self.use_tan:
            return 0.0 if self.power == 1 else 0.5 * sum(self.spacings)
        return sum(2.0 / ell for ell in self.spacings) if self.power == 1 else math.inf

    def limit_at(self, k: float, branch: Sequence[int], singular: frozenset, side: str) -> float:
        """One-sided limit of h at k; ``singular`` indexes terms with a pole at k."""
        s = 0.0
        for j, (ell, m) in enumerate(zip(self.spacings, branch)):
            if j in singular:
                # left end of a branch: u -> 0; right end: u -> pi/2
                if (side == "left") == self.use_tan:
                    continue  # tan(0) = 0 or cot(pi/2) = 0
                return math.inf
            u = 0.5 * k * ell - 0.5 * math.pi * m
            s += math.tan(u) if self.use_tan else 1.0 / math.tan(u)
        return s * k ** self.power


def _positive_k_bands(family: _Family, threshold: float, k_max: float) -> list[tuple[float, float]]:
    """Band intervals in momentum on (0, k_max]."""
    pts = _singular_points(family.spacings, k_max)
    nodes = [(0.0, frozenset())] + pts
    if nodes[-1][0] < k_max:
        nodes.append((k_max, frozenset()))
    bands: list[list[float]] = []

    def add(lo: float, hi: float) -> None:
        if hi <= lo:
            return
        if bands and lo <= bands[-1][1]:
            bands[-1][1] = max(bands[-1][1], hi)
        else:
            bands.append([lo, hi])

    for (a, sa), (b, sb) in zip(nodes[:-1], nodes[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        branch = [math.floor(mid * ell / math.pi) for ell in family.spacings]
        h = lambda k, br=branch: family.value(k, br)
        h_left = family.limit_at_zero() if a == 0.0 else family.limit_at(a, branch, sa, "left")
        h_right = family.limit_at(b, branch, sb, "right")
        if family.increasing:
            if h_left >= threshold:
                add(a, b)
            elif h_right >= threshold:
                add(_bisect(h, a, b, threshold, True), b)
        else:
            if h_right >= threshold:
                add(a, b)
            elif h_left >= threshold:
                add(a, _bisect(h, a, b, threshold, False))
    return [(lo, min(hi, k_max)) for lo, hi in bands]


def _increasing_root(g: Callable[[float], float], target: float, hi0: float) -> float:
    """Root of an increasing g on (0, oo) with g(0+) < target."""
    hi = hi0
    while g(hi) < target:
        hi *= 2.0
        if hi > 1e300:
            raise LatticeSingularityError("negative-energy edge bracket failed")
    return _bisect(g, 0.0, hi, target, True)


def _negative_kappa_band(spacings: Sequence[float], coupling: VertexCoupling) -> tuple[float, float] | None:
    """Band (kappa_a, kappa_b) on the negative axis; energies [-kappa_b**2, -kappa_a**2]."""
    inv = sum(1.0 / ell for ell in spacings)
    if isinstance(coupling, Delta) and coupling.c < 0:
        c = -coupling.c
        hi0 = c / 2 + inv + 1.0
        # 2 kappa sum tanh <= |c| <= 2 kappa sum coth; both sides increase in kappa
        up = lambda x: 2 * x * sum(math.tanh(0.5 * x * ell) for ell in spacings)
        lo_f = lambda x: 2 * x * sum(1.0 / math.tanh(0.5 * x * ell) for ell in spacings)
        kb = _increasing_root(up, c, hi0)
        ka = _increasing_root(lo_f, c, hi0) if c > 4 * inv else 0.0
        return ka, kb
    if isinstance(coupling, DeltaPrimeS) and coupling.D < 0:
        d = -coupling.D
        total = sum(spacings)
        # sum tanh/kappa <= |D|/2 <= sum coth/kappa; both sides decrease in kappa
        g_lo = lambda x: -sum(math.tanh(0.5 * x * ell) for ell in spacings) / x
        g_hi = lambda x: -sum(1.0 / math.tanh(0.5 * x * ell) for ell in spacings) / x
        hi0 = 2 * len(spacings) / d + 2 * inv + 1.0
        kb = _increasing_root(g_hi, -d / 2, hi0)
        ka = _increasing_root(g_lo, -d / 2, hi0) if d < total else 0.0
        return ka, kb
    return None


def _assemble(bands: Iterable[tuple[float, float]], start: float, e_max: float) -> list[SpectralInterval]:
    """Alternating band/gap list covering [start, e_max] from sorted bands."""
    out: list[SpectralInterval] = []
    cursor = start
    for lo, hi in bands:
        lo, hi = max(lo, start), min(hi, e_max)
        if hi <= lo:
            continue
        if lo > cursor:
            out.append(SpectralInterval(cursor, lo, "gap"))
        if out and out[-1].kind == "band" and lo <= out[-1].hi:
            out[-1] = SpectralInterval(out[-1].lo, max(out[-1].hi, hi), "band")
        else:
            out.append(SpectralInterval(lo, hi, "band"))
        cursor = max(cursor, hi)
    if cursor < e_max:
        out.append(SpectralInterval(cursor, e_max, "gap"))
    return out


def _check_e_max(e_max: float) -> float:
    e_max = float(e_max)
    if not (e_max > 0 and math.isfinite(e_max)):
        raise InvalidInputError(f"invalid energy cutoff e_max={e_max!r}; need e_max > 0")
    return e_max


def _monotone_spectrum(spacings: Sequence[float], coupling: VertexCoupling, e_max: float,
                       negative: bool) -> Spectrum:
    e_max = _check_e_max(e_max)
    k_max = math.sqrt(e_max)
    if isinstance(coupling, Delta):
        p, kind = coupling.c, "delta"
        # c > 0: k sum tan >= c/2 ; c < 0: k sum cot >= |c|/2
        family = _Family(spacings, use_tan=p > 0, power=1)
        threshold = abs(p) / 2
    elif isinstance(coupling, DeltaPrimeS):
        p, kind = coupling.D, "delta_prime_s"
        # D > 0: sum cot / k >= D/2 ; D < 0: sum tan / k >= |D|/2
        family = _Family(spacings, use_tan=p < 0, power=-1)
        threshold = abs(p) / 2
    else:
        raise NotApplicableError(f"monotone solver handles delta and delta'_s only, not {coupling!r}")

    if p == 0:
        k_bands = [(0.0, k_max)]
    else:
        k_bands = _positive_k_bands(family, threshold, k_max)
    e_bands = [(lo * lo, hi * hi) for lo, hi in k_bands]

    start = 0.0
    neg = _negative_kappa_band(spacings, coupling) if negative else None
    if neg is not None:
        ka, kb = neg
        e_bands.insert(0, (-kb * kb, -ka * ka))
        start = -kb * kb
    meta = {
        "solver": {
            "method": "monotone-bisection",
            "edge_rtol": EDGE_RTOL,
            "negative": bool(negative),
            "singular_points": len(_singular_points(spacings, k_max)),
        },
        "family": kind,
    }
    return Spectrum(_assemble(e_bands, start, e_max), e_max, meta)


def _require(lat: LatticeSpec, cls) -> None:
    if not isinstance(lat.coupling, cls):
        raise InvalidInputError(f"expected a {cls.__name__} lattice, got {lat.coupling!r}")


def delta_spectrum(lat: LatticeSpec, e_max: float, negative: bool = True) -> Spectrum:
    """Exact band/gap list of the delta lattice up to energy e_max."""
    _require(lat, Delta)
    spec = _monotone_spectrum((lat.ell1, lat.ell2), lat.coupling, e_max, negative)
    spec.meta.update(_lattice_meta(lat))
    return spec


def dps_spectrum(lat: LatticeSpec, e_max: float, negative: bool = True) -> Spectrum:
    """Exact band/gap list of the delta'_s lattice up to energy e_max."""
    _require(lat, DeltaPrimeS)
    spec = _monotone_spectrum((lat.ell1, lat.ell2), lat.coupling, e_max, negative)
    spec.meta.update(_lattice_meta(lat))
    return spec


def kp_spectrum(ell: float, coupling: VertexCoupling, e_max: float, negative: bool = True) -> Spectrum:
    """One-dimensional periodic array (spacing ell) of delta or delta'_s couplings.

    The delta'_s chain has the same spectrum as a chain of line delta'
    interactions with strength D (transfer matrices differ by an overall sign).
    """
    if not (ell > 0 and math.isfinite(ell)):
        raise InvalidInputError(f"spacing must be positive, got {ell!r}")
    if not isinstance(coupling, (Delta, DeltaPrimeS)):
        raise InvalidInputError(f"Kronig-Penney chains support delta and delta'_s, got {coupling!r}")
    spec = _monotone_spectrum((float(ell),), coupling, e_max, negative)
    spec.meta.update({"coupling": coupling, "ell": float(ell), "e_max": spec.e_max})
    return spec


def _lattice_meta(lat: LatticeSpec) -> dict:
    return {"coupling": lat.coupling, "l1": lat.ell1, "l2": lat.ell2}


# ---------------------------------------------------------------------------
# delta' lattice


def _dprime_ranges(k: float, C: float, spacings: Sequence[float]) -> tuple[float, float]:
    """Lower/upper bounds of the delta' band function over the Bloch box."""
    lo = hi = 0.0
    w = 1 + 1j * k * C
    for ell in spacings:
        e = complex(math.cos(k * ell), math.sin(k * ell))
        R = ((1 - 1j * k * C) * e).real
        I = (e / (w * w)).imag
        if I == 0.0 or not math.isfinite(I):
            raise LatticeSingularityError(f"indicator undefined at singular k={k}")
        a, b = (-1 - R) / I, (1 - R) / I
        lo += min(a, b)
        hi += max(a, b)
    return lo, hi


def dprime_band_indicator(k: float, C: float, ell1: float, ell2: float) -> bool:
    """True iff some (v1, v2) in the Bloch box solves the delta' band condition at k.

    The condition is affine in (v1, v2), so checking whether its range over
    the box (attained at the corners) contains zero is exact.
    """
    if not k > 0:
        raise InvalidInputError("k must be positive")
    lo, hi = _dprime_ranges(k, C, (ell1, ell2))
    return lo <= 0.0 <= hi


def dprime_spectrum(lat: LatticeSpec, e_max: float, resolution: int = 512) -> Spectrum:
    """Positive-energy spectrum of the delta' lattice by adaptive scanning.

    ``resolution`` samples are placed in every interval between consecutive
    lattice singularities; indicator changes are refined by bisection to
    ``DPRIME_EDGE_TOL`` in k.  Features narrower than the sample spacing can
    be missed, so the result is flagged approximate.
    """
    if isinstance(lat.coupling, Delta) and lat.coupling.c == 0:
        # C = 0 was normalised to the free delta vertex
        C = 0.0
    else:
        _require(lat, DeltaPrime)
        C = lat.coupling.C
    if resolution < 64:
        raise InvalidInputError("resolution must be at least 64")
    e_max = _check_e_max(e_max)
    k_max = math.sqrt(e_max)
    spacings = (lat.ell1, lat.ell2)

    nodes = [0.0] + [k for k, _ in _singular_points(spacings, k_max)]
    if nodes[-1] < k_max:
        nodes.append(k_max)
    # interior samples only: the indicator is undefined at the singular nodes
    grid = np.concatenate([np.linspace(a, b, resolution + 1)[1:-1]
                           for a, b in zip(nodes[:-1], nodes[1:])] + [np.array([k_max])])

    undefined = 0

    def indicator(k: float) -> bool | None:
        try:
            lo, hi = _dprime_ranges(k, C, spacings)
        except LatticeSingularityError:
            return None
        return lo <= 0.0 <= hi

    samples = []
    for k in grid:
        val = indicator(float(k))
        if val is None:
            undefined += 1
            continue
        samples.append((float(k), val))

    refine_failures = 0

    def edge(k0: float, k1: float, v0: bool) -> float:
        nonlocal refine_failures
        a, b = k0, k1
        while b - a > DPRIME_EDGE_TOL:
            m = 0.5 * (a + b)
            v = indicator(m)
            if v is None:
                m = a + 0.5001 * (b - a)
                v = indicator(m)
                if v is None:
                    refine_failures += 1
                    break
            if v == v0:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    k_bands: list[tuple[float, float]] = []
    start = 0.0 if samples and samples[0][1] else None
    for (k0, v0), (k1, v1) in zip(samples[:-1], samples[1:]):
        if v0 == v1:
            continue
        x = edge(k0, k1, v0)
        if v1:
            start = x
        else:
            k_bands.append((start, x))
            start = None
    if start is not None:
        k_bands.append((start, k_max))

    meta = {
        "solver": {
            "method": "adaptive-scan",
            "resolution": int(resolution),
            "edge_tol_k": DPRIME_EDGE_TOL,
            "undefined_samples": undefined,
            "refine_failures": refine_failures,
            "negative": False,
        },
        "family": "delta_prime",
        "approximate": True,
        "negative_energies": "not computed",
    }
    if C > 0:
        meta["note"] = "C > 0: the single vertex binds; negative lattice spectrum may exist"
    meta.update(_lattice_meta(lat))
    e_bands = [(lo * lo, hi * hi) for lo, hi in k_bands]
    return Spectrum(_assemble(e_bands, 0.0, e_max), e_max, meta)


def lattice_spectrum(lat: LatticeSpec, e_max: float, negative: bool = True,
                     resolution: int = 512) -> Spectrum:
    """Dispatch to the solver matching the lattice coupling."""
    c = lat.coupling
    if isinstance(c, Delta):
        return delta_spectrum(lat, e_max, negative)
    if isinstance(c, DeltaPrimeS):
        return dps_spectrum(lat, e_max, negative)
    if isinstance(c, DeltaPrime):
        return dprime_spectrum(lat, e_max, resolution)
    raise NotApplicableError(f"no lattice solver for {c!r}")
