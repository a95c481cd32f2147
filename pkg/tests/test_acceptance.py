"""Acceptance suite: one test per numbered criterion.

Each test prints a single ``[criterion N] PASS/FAIL`` line with the measured
numbers before asserting, so the outcome is visible in the pytest log.
"""

import cmath
import math

import numpy as np

from qgcontact.analysis import asymptotic_threshold, count_gaps, critical_coupling, enhancement
from qgcontact.bands import (
    LatticeSpec,
    delta_spectrum,
    dprime_band_indicator,
    dps_spectrum,
    kp_spectrum,
)
from qgcontact.diophantine import (
    HURWITZ,
    approx_quality,
    cf_expand,
    convergents,
    hurwitz_sequence,
    parse_theta,
)
from qgcontact.errors import LatticeSingularityError
from qgcontact.geoscatter import (
    OnionGraph,
    high_energy_smatrix,
    onion_limit_smatrix,
    onion_smatrix,
    solve_matching,
    tau_equivalent,
)
from qgcontact.vertex import Delta, DeltaPrime, DeltaPrimeS, bound_states, star_smatrix

from oracles import grid_membership

PHI = (1 + math.sqrt(5)) / 2
ELL = 1.0


def _kgrid(ell, count=200):
    """``count`` momenta in [0.05, 60] kept at least 1e-3 away from k ell in pi Z."""
    ks = []
    for k in np.linspace(0.05, 60.0, 4 * count):
        if abs(k * ell / math.pi - round(k * ell / math.pi)) > 1e-3:
            ks.append(float(k))
        if len(ks) == count:
            break
    return ks


ONION_GRID = [(n, N, c) for n in (2, 3, 4, 5) for N in (1, 3, 10) for c in (0.0, 1.0, -1.0)]


def test_criterion_01_unitarity(criterion):
    worst_onion = worst_star = 0.0
    ks = _kgrid(ELL)
    for n, N, c in ONION_GRID:
        g = OnionGraph(n, N, ELL, c)
        for k in ks:
            worst_onion = max(worst_onion, onion_smatrix(g, k).unitarity_defect)
    for n in (2, 3, 4, 5):
        for p in (0.0, 1.0, -1.0):
            couplings = [Delta(p), DeltaPrimeS(p)] + ([DeltaPrime(p)] if p else [])
            for coupling in couplings:
                for k in ks:
                    worst_star = max(worst_star, star_smatrix(coupling, n, k).unitarity_defect)
    ok = worst_onion < 1e-10 and worst_star < 1e-10
    criterion(1, ok, f"max defect onion={worst_onion:.2e} star={worst_star:.2e} (< 1e-10)")


def test_criterion_02_matching_oracle(criterion):
    # relative to the S-matrix row norm: for n=2, N=1, c=0 the line is free and r
    # vanishes identically, so a componentwise ratio would only compare rounding noise
    worst = worst_component = 0.0
    for n, N, c in ONION_GRID:
        g = OnionGraph(n, N, ELL, c)
        for k in _kgrid(ELL):
            a, b = onion_smatrix(g, k), solve_matching(g, k)
            scale = math.sqrt(abs(b.r) ** 2 + (n - 1) * abs(b.t) ** 2)
            worst = max(worst, abs(a.r - b.r) / scale, abs(a.t - b.t) / scale)
            for x, y in ((a.r, b.r), (a.t, b.t)):
                if abs(y) > 1e-6:
                    worst_component = max(worst_component, abs(x - y) / abs(y))
    criterion(2, worst < 1e-9, f"max deviation from matching solve relative to S-matrix norm "
              f"= {worst:.2e} (< 1e-9); componentwise on |amplitude| > 1e-6: {worst_component:.2e}")


def test_criterion_03_onion_first_order_convergence(criterion):
    n, tau, k = 3, 1.0, 5.0
    lim = onion_limit_smatrix(n, tau, 0.0, k)
    errs = {}
    for N in (10, 20, 40, 80, 160):
        s = onion_smatrix(OnionGraph.from_tau(n, N, tau), k)
        errs[N] = max(abs(s.r - lim.r), abs(s.t - lim.t))
    ratios = [errs[2 * N] / errs[N] for N in (10, 20, 40, 80)]
    ok = all(0.3 <= q <= 0.7 for q in ratios)
    criterion(3, ok, "error(2N)/error(N) for N=10,20,40,80 = "
              + ", ".join(f"{q:.4f}" for q in ratios) + " (required in [0.3, 0.7])")


def test_criterion_04_dprime_high_energy_match(criterion):
    n, C = 3, -1.0
    tau = tau_equivalent(DeltaPrime(C), n)
    geo, ref = high_energy_smatrix(n, tau, 100.0), star_smatrix(DeltaPrime(C), n, 100.0)
    t_rel = abs(abs(geo.t) - abs(ref.t)) / abs(ref.t)
    geo, ref = high_energy_smatrix(n, tau, 1e3), star_smatrix(DeltaPrime(C), n, 1e3)
    phase_gap = abs(cmath.phase(geo.r / ref.r))  # wrapped to [0, pi]
    ok = t_rel < 0.02 and math.pi - phase_gap < 0.1
    criterion(4, ok, f"|t| rel. diff at k=100: {t_rel:.2e} (< 2%); "
              f"phase diff at k=1e3: {phase_gap:.6f}, |diff - pi| = {math.pi - phase_gap:.2e} (< 0.1)")


def test_criterion_05_bound_states(criterion):
    cases = [
        (Delta(-4.0), 2, [(-(-4.0 / 2) ** 2, 1)]),
        (Delta(2.0), 3, []),
        (DeltaPrime(0.5), 4, [(-0.5 ** -2, 3)]),
        (DeltaPrimeS(-3.0), 2, [(-(2 / -3.0) ** 2, 1)]),
    ]
    worst, ok = 0.0, True
    for coupling, n, expected in cases:
        got = [(b.energy, b.multiplicity) for b in bound_states(coupling, n)]
        ok &= len(got) == len(expected)
        for (e, m), (e0, m0) in zip(got, expected):
            worst = max(worst, abs(e - e0))
            ok &= m == m0
    ok &= worst <= 1e-12
    criterion(5, ok, f"4 tabulated examples, max energy error {worst:.1e} (<= 1e-12)")


def test_criterion_06_deep_negative_delta(criterion):
    spec = delta_spectrum(LatticeSpec(1.0, 1.0, Delta(-10.0)), 200.0)
    negative = [b for b in spec.bands if b.lo < 0]
    alpha2 = spec.bands[1].lo
    ok = len(negative) == 1 and negative[0].hi < 0 and abs(alpha2 - math.pi ** 2) <= 1e-8
    criterion(6, ok, f"{len(negative)} negative band(s), beta_1={negative[0].hi:.6f}, "
              f"|alpha_2 - pi^2| = {abs(alpha2 - math.pi ** 2):.1e} (<= 1e-8)")


def test_criterion_07_golden_gap_threshold(criterion):
    crit = math.pi ** 2 / math.sqrt(5)
    L = PHI
    e_max = (40 * math.pi) ** 2
    below = count_gaps(delta_spectrum(LatticeSpec(1.0, PHI, Delta(0.9 * crit / L)), e_max))
    above = count_gaps(delta_spectrum(LatticeSpec(1.0, PHI, Delta(1.1 * crit / L)), e_max))
    cc = critical_coupling("golden", 1.0, PHI, (200 * math.pi) ** 2)
    rel = abs(cc * L - crit) / crit
    ok = len(below) == 0 and len(above) >= 1 and rel < 0.02
    criterion(7, ok, f"gaps at 0.9x: {len(below)}, at 1.1x: {len(above)}; "
              f"critical cL = {cc * L:.6f} vs {crit:.6f} (rel {rel:.1e} < 2%)")


def test_criterion_08_gap_width_bound(criterion):
    e_max = 1e4
    spec = delta_spectrum(LatticeSpec(1.0, 1.0, Delta(2.0)), e_max)
    gaps = [g for g in spec.gaps if g.lo > 100 and g.hi < e_max]
    widths = [g.width for g in gaps]
    top = widths[-5:]
    ok = (len(top) == 5 and all(0 < w <= 2.2 for w in widths)
          and all(abs(w - 2.0) <= 0.2 for w in top))
    criterion(8, ok, f"{len(widths)} gaps above 100, widths in [{min(widths):.4f}, {max(widths):.4f}]; "
              "highest five " + ", ".join(f"{w:.4f}" for w in top))


def test_criterion_09_dps_band_width_bound(criterion):
    e_max = 2e4
    lat = LatticeSpec(1.0, 1.0, DeltaPrimeS(2.0))
    spec = dps_spectrum(lat, e_max)
    widths = [b.width for b in spec.bands if b.hi < e_max]
    high = [b.width for b in spec.bands if b.lo >= asymptotic_threshold(lat) and b.hi < e_max]
    cap = 8 * enhancement(1.0).e * 1.1
    top = high[-5:]
    ok = len(top) == 5 and all(abs(w - 8) <= 0.8 for w in top) and max(widths) <= cap
    criterion(9, ok, f"{len(widths)} bands, max width {max(widths):.4f} (<= {cap:.4f}); "
              "highest five " + ", ".join(f"{w:.4f}" for w in top) + " (8 +/- 10%)")


def _quantized(energy, spacings):
    if energy == 0.0:
        return True
    k = math.sqrt(energy)
    return any(abs(energy - (math.pi * round(k * ell / math.pi) / ell) ** 2) <= 1e-8 * energy
               for ell in spacings)


def test_criterion_10_edge_quantization(criterion):
    e_max, checked, bad = 5000.0, 0, []
    for l2 in (1.0, PHI, 1.5, math.sqrt(2)):
        spacings = (1.0, l2)
        for b in delta_spectrum(LatticeSpec(1.0, l2, Delta(2.0)), e_max).bands:
            if b.hi < e_max:
                checked += 1
                if not _quantized(b.hi, spacings):
                    bad.append(("beta", l2, b.hi))
        for b in dps_spectrum(LatticeSpec(1.0, l2, DeltaPrimeS(2.0)), e_max).bands:
            checked += 1
            if not _quantized(b.lo, spacings):
                bad.append(("alpha", l2, b.lo))
    criterion(10, not bad, f"{checked} edges checked, {len(bad)} off the (pi m / l_j)^2 lattice")


def _inside(lo, hi, gaps, tol=1e-8):
    return any(g.lo - tol * max(1, abs(g.lo)) <= lo and hi <= g.hi + tol * max(1, abs(g.hi))
               for g in gaps)


def test_criterion_11_kp_containment(criterion):
    e_max, checked, bad = 3000.0, 0, 0
    for c in (2.0, -2.0):
        for l2 in (1.0, 1.5, float(parse_theta("golden"))):
            lat = LatticeSpec(1.0, l2, Delta(c))
            kp1 = kp_spectrum(1.0, Delta(c), e_max, negative=False).gaps
            kp2 = kp_spectrum(l2, Delta(c), e_max, negative=False).gaps
            for g in delta_spectrum(lat, e_max).gaps:
                if g.hi <= 0:
                    continue
                lo = max(g.lo, 0.0)
                checked += 1
                bad += not (_inside(lo, g.hi, kp1) and _inside(lo, g.hi, kp2))
    criterion(11, checked > 0 and bad == 0,
              f"{checked} positive-energy gaps checked, {bad} not inside both 1D gap sets")


def test_criterion_12_monotone_inclusion(criterion):
    e_max = 2000.0
    grid = np.linspace(0, e_max, 10001)[1:]
    leaks = {}
    for l2 in (1.0, PHI):
        for weak, strong in ((Delta(1.0), Delta(2.0)), (DeltaPrimeS(1.0), DeltaPrimeS(2.0))):
            solver = delta_spectrum if isinstance(weak, Delta) else dps_spectrum
            a = solver(LatticeSpec(1.0, l2, weak), e_max).contains(grid)
            b = solver(LatticeSpec(1.0, l2, strong), e_max).contains(grid)
            leaks[(type(weak).__name__, round(l2, 3))] = int(np.sum(b & ~a))
    criterion(12, not any(leaks.values()),
              f"grid points in the stronger band set but not the weaker: {leaks}")


def test_criterion_13_dense_grid_oracle(criterion):
    results = []
    cases = [("delta", 1.0, 1.0, 200.0), ("delta", -2.0, PHI, 200.0),
             ("dprimes", 2.0, 1.0, 500.0), ("dprimes", -1.0, 1.5, 500.0)]
    ok = True
    for kind, p, l2, e_max in cases:
        lat = LatticeSpec(1.0, l2, Delta(p) if kind == "delta" else DeltaPrimeS(p))
        spec = (delta_spectrum if kind == "delta" else dps_spectrum)(lat, e_max)
        energies = np.linspace(0, e_max, 100001)[1:]
        far = spec.edge_distance(energies) > 1e-6
        mismatch = int(np.sum(spec.contains(energies)[far]
                              != grid_membership(kind, p, energies, 1.0, l2)[far]))
        ok &= mismatch == 0
        results.append(f"{kind}({p:g}, l2={l2:.3f}): {mismatch}")
    criterion(13, ok, "mismatches off edges at 1e5 points: " + "; ".join(results))


def test_criterion_14_diophantine(criterion):
    cf = cf_expand("golden", 30)
    quotients_ok = cf.quotients == (1,) * 30 and cf.a0 == 1
    fib = [1, 1]
    while len(fib) < 40:
        fib.append(fib[-1] + fib[-2])
    conv = convergents(cf, 31)
    fib_ok = all((c.p, c.q) == (fib[i + 1], fib[i]) for i, c in enumerate(conv))
    quality = approx_quality("golden", 30).estimate
    quality_ok = abs(quality - HURWITZ) <= 0.01 * HURWITZ
    res = hurwitz_sequence("golden", 8)
    theta = parse_theta("golden")
    worst = max(c.q * abs(c.q * theta.mid - c.p) for c in res.members)
    hurwitz_ok = (res.complete and len(res.members) == 8
                  and float(worst) < HURWITZ * (1 + 1e-6)
                  and all(c.value < theta.lo for c in res.members))
    ok = quotients_ok and fib_ok and quality_ok and hurwitz_ok
    criterion(14, ok, f"quotients {quotients_ok}, Fibonacci {fib_ok}, "
              f"q||q theta|| -> {quality:.6f} vs {HURWITZ:.6f}, "
              f"Hurwitz members {len(res.members)} max {float(worst):.6f} below theta")


def _disagreement(C, D, K, samples=20001):
    """Measure (in k) of [K, 2K] where the delta' indicator and delta'_s bands differ."""
    spec = dps_spectrum(LatticeSpec(1.0, 1.0, DeltaPrimeS(D)), (2 * K) ** 2 * 1.01, negative=False)
    ks = np.linspace(K, 2 * K, samples)
    dps = spec.contains(ks ** 2)
    count = used = 0
    for k, member in zip(ks, dps):
        try:
            ind = dprime_band_indicator(float(k), C, 1.0, 1.0)
        except LatticeSingularityError:
            continue
        used += 1
        count += ind != member
    return count * K / used


def test_criterion_15_dprime_dps_agreement(criterion):
    D = 2.0
    C = -D / 4
    measures = [_disagreement(C, D, K) for K in (20.0, 40.0, 80.0)]
    ok = all(b <= a for a, b in zip(measures, measures[1:]))
    criterion(15, ok, "disagreement measure over [K, 2K] for K=20,40,80: "
              + ", ".join(f"{m:.3e}" for m in measures) + " (non-increasing)")
