"""Continued fractions and rational approximation quality.

Expansions are driven by an enclosing interval ``[lo, hi]`` of exact
fractions rather than by a single float.  Each Gauss-map step maps the
interval exactly, so a quotient is emitted only while both ends agree on it.
When the interval straddles an integer the precision is exhausted and the
expansion stops (or snaps to a rational if the interval is negligibly narrow).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath

from .errors import InvalidInputError

__all__ = [
    "ThetaValue",
    "ContinuedFraction",
    "Convergent",
    "ApproxQuality",
    "HurwitzResult",
    "parse_theta",
    "cf_expand",
    "convergents",
    "even_truncations",
    "approx_quality",
    "hurwitz_sequence",
    "dist_to_int",
    "frac_part",
    "HURWITZ",
]

WORK_DPS = 60
SNAP_WIDTH = Fraction(1, 10 ** 12)
MAX_QUOTIENT = 10 ** 12
HURWITZ = 1 / math.sqrt(5)

@dataclass(frozen=True)
class ThetaValue:
    """A positive real known to lie in ``[lo, hi]``; ``lo == hi`` means exact."""

    lo: Fraction
    hi: Fraction
    label: str

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.mid)

    def mpf(self):
        with mpmath.workdps(WORK_DPS):
            return mpmath.mpf(self.mid.numerator) / self.mid.denominator


def _from_mpf(x, label: str) -> ThetaValue:
    # error of the evaluation at the current precision, padded by a few bits
    mid = _mpf_fraction(x)
    eps = abs(mid) * Fraction(1, 2 ** (mpmath.mp.prec - 8))
    return ThetaValue(mid - eps, mid + eps, label)


def _mpf_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * (Fraction(2) ** int(exp))


_SQRT = re.compile(r"sqrt:(\d+)$")
_RATIO = re.compile(r"ratio:(-?\d+)/(-?\d+)$")


def parse_theta(value: Union[str, float, int, Fraction, "ThetaValue"]) -> ThetaValue:
    """Parse ``decimal | golden | sqrt:<n> | ratio:<p>/<q>`` or a number into a ThetaValue."""
    if isinstance(value, ThetaValue):
        theta = value
    elif isinstance(value, (Fraction, int)) and not isinstance(value, bool):
        f = Fraction(value)
        theta = ThetaValue(f, f, str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidInputError(f"theta must be finite, got {value!r}")
        f = Fraction(value)
        eps = abs(f) * Fraction(1, 2 ** 52)
        theta = ThetaValue(f - eps, f + eps, repr(value))
    elif isinstance(value, str):
        s = value.strip()
        if s == "golden":
            with mpmath.workdps(WORK_DPS + 10):
                theta = _from_mpf((1 + mpmath.sqrt(5)) / 2, s)
        elif m := _SQRT.match(s):
            n = int(m.group(1))
            r = math.isqrt(n)
            if r * r == n:
                theta = ThetaValue(Fraction(r), Fraction(r), s)
            else:
                with mpmath.workdps(WORK_DPS + 10):
                    theta = _from_mpf(mpmath.sqrt(n), s)
        elif m := _RATIO.match(s):
            p, q = int(m.group(1)), int(m.group(2))
            if q == 0:
                raise InvalidInputError(f"zero denominator in theta {s!r}")
            f = Fraction(p, q)
            theta = ThetaValue(f, f, s)
        else:
            try:
                # decimal literals are taken as exact rationals
                f = Fraction(s)
            except (ValueError, ZeroDivisionError):
                raise InvalidInputError(
                    f"cannot parse theta {value!r}: expected decimal, golden, "
                    "sqrt:<n> or ratio:<p>/<q>") from None
            theta = ThetaValue(f, f, s)
    else:
        raise InvalidInputError(f"unsupported theta value {value!r}")
    if not theta.lo > 0:
        raise InvalidInputError(f"theta must be positive, got {theta.label}")
    return theta


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class ContinuedFraction:
    a0: int
    quotients: tuple[int, ...]
    exact: bool

    def __post_init__(self):
        if any(a < 1 for a in self.quotients):
            raise InvalidInputError("partial quotients must be positive")

    def __len__(self) -> int:
        return 1 + len(self.quotients)

    def value(self) -> Fraction:
        x = Fraction(0)
        for a in reversed(self.quotients):
            x = 1 / (a + x)
        return self.a0 + x


def _canonical(terms: list[int]) -> list[int]:
    # [..., a, 1] == [..., a + 1]
    if len(terms) > 1 and terms[-1] == 1:
        terms = terms[:-2] + [terms[-2] + 1]
    return terms


def cf_expand(x, depth: int) -> ContinuedFraction:
    """Expand x > 0 into at most ``depth`` partial quotients after a0.

    ``exact`` is true when the expansion terminated, i.e. x was recognised
    as rational at the available precision.
    """
    if int(depth) != depth or depth < 1:
        raise InvalidInputError(f"depth must be a positive integer, got {depth!r}")
    theta = parse_theta(x)
    lo, hi = theta.lo, theta.hi
    terms: list[int] = []
    exact = False
    while len(terms) < depth + 1:
        a_lo, a_hi = math.floor(lo), math.floor(hi)
        if a_lo != a_hi or lo == a_lo:
            # interval touches an integer
            n = a_hi
            if hi - lo < SNAP_WIDTH:
                terms.append(n)
                exact = True
            break
        if a_lo > MAX_QUOTIENT:
            break
        terms.append(a_lo)
        lo, hi = 1 / (hi - a_lo), 1 / (lo - a_lo)
    if exact:
        terms = _canonical(terms)
    if not terms:
        raise InvalidInputError(f"theta {theta.label} not resolvable at working precision")
    return ContinuedFraction(terms[0], tuple(terms[1:]), exact)


def convergents(cf: ContinuedFraction, count: int) -> list[Convergent]:
    """The first ``count`` convergents p_i/q_i (the first is a0/1)."""
    if count < 1 or count > len(cf):
        raise InvalidInputError(
            f"requested {count} convergents but only {len(cf)} quotients available")
    terms = (cf.a0,) + cf.quotients
    p_prev, q_prev, p, q = 1, 0, terms[0], 1
    out = [Convergent(p, q)]
    for a in terms[1:count]:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        out.append(Convergent(p, q))
    return out


def even_truncations(cf: ContinuedFraction, count: int | None = None) -> list[Convergent]:
    """Convergents [a0; a1, ..., a_2j] (even length not counting a0), all below the value."""
    all_c = convergents(cf, len(cf))
    evens = all_c[0::2]
    return evens if count is None else evens[:count]


def frac_part(x):
    """{x}, the fractional part (works for mpf and Fraction)."""
    return x - math.floor(x) if isinstance(x, Fraction) else x - mpmath.floor(x)


def dist_to_int(x):
    """||x||, the distance from x to the nearest integer."""
    f = frac_part(x)
    return min(f, 1 - f)


@dataclass(frozen=True)
class ApproxQuality:
    values: tuple[float, ...]
    estimate: float  # finite-depth estimate of the badly-approximable constant
    global_min: float
    rational: bool
    denominators: tuple[int, ...]


def approx_quality(theta, depth: int) -> ApproxQuality:
    """q * ||q theta|| along the convergent denominators of theta.

    The estimate is the minimum over the tail (second half) of the list,
    which tracks the liminf rather than transient small-q values.
    """
    if depth < 2:
        raise InvalidInputError("depth must be at least 2")
    t = parse_theta(theta)
    cf = cf_expand(t, depth)
    if cf.exact:
        qs = tuple(c.q for c in convergents(cf, len(cf)))
        return ApproxQuality((), 0.0, 0.0, True, qs)
    tm = t.mpf()
    vals, qs = [], []
    with mpmath.workdps(WORK_DPS):
        for c in convergents(cf, len(cf)):
            vals.append(float(c.q * dist_to_int(c.q * tm)))
            qs.append(c.q)
    tail = vals[len(vals) // 2:]
    return ApproxQuality(tuple(vals), min(tail), min(vals), False, tuple(qs))


@dataclass(frozen=True)
class HurwitzResult:
    members: tuple[Convergent, ...]
    complete: bool  # false if precision ran out before ``count`` members


def hurwitz_sequence(theta, count: int) -> HurwitzResult:
    """Even-length truncations m/n < theta with n |n theta - m| < 5**-0.5 (1 + 1e-6)."""
    if count < 1:
        raise InvalidInputError("count must be positive")
    t = parse_theta(theta)
    if t.exact:
        raise InvalidInputError(f"theta {t.label} is rational")
    with mpmath.workdps(WORK_DPS):
        bound = 1 / mpmath.sqrt(5) * (1 + mpmath.mpf("1e-6"))
    tm = t.mpf()
    depth = 8
    while True:
        cf = cf_expand(t, depth)
        members: list[Convergent] = []
        with mpmath.workdps(WORK_DPS):
            for c in even_truncations(cf):
                if c.q * abs(c.q * tm - c.p) < bound:
                    members.append(c)
                    if len(members) == count:
                        return HurwitzResult(tuple(members), True)
        if len(cf.quotients) < depth or depth > 4096:
            return HurwitzResult(tuple(members), False)
        depth *= 2
