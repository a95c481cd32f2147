import math
from fractions import Fraction

import numpy as np
import pytest

from qgcontact.analysis import (
    count_gaps,
    coupling_along_sequence,
    critical_coupling,
    enhancement,
    gap_census,
    verify_propositions,
)
from qgcontact.bands import LatticeSpec, delta_spectrum
from qgcontact.diophantine import ThetaValue, hurwitz_sequence, parse_theta
from qgcontact.errors import InvalidInputError, NotApplicableError
from qgcontact.vertex import Delta, DeltaPrime, DeltaPrimeS, PermInvariant

PHI = (1 + math.sqrt(5)) / 2
CRIT = math.pi ** 2 / math.sqrt(5)


def test_enhancement_values():
    assert enhancement(2).g == pytest.approx(4 / 3, abs=1e-15)
    assert enhancement(1).e == pytest.approx((3 + math.sqrt(5)) / 4, abs=1e-15)
    assert enhancement(1e8).e == pytest.approx(1, abs=1e-3)
    assert enhancement(1e-8).e == pytest.approx(1, abs=1e-3)
    with pytest.raises(InvalidInputError):
        enhancement(0)


def test_enhancement_maximum():
    thetas = np.linspace(0.05, 20, 20000)
    es = np.array([enhancement(t).e for t in thetas])
    assert es.max() == pytest.approx(4 / 3, abs=1e-9)
    assert np.all(es > 1)
    assert abs(thetas[es.argmax()] - 2) < 1e-2 or abs(thetas[es.argmax()] - 0.5) < 1e-2


def test_critical_coupling_golden():
    cc = critical_coupling("golden", 1.0, PHI, (200 * math.pi) ** 2)
    assert cc * PHI == pytest.approx(CRIT, rel=2e-2)


def test_critical_coupling_matches_solver():
    # just above the critical value a gap opens; just below there is none
    theta, e_max = "sqrt:2", 4e4
    l2 = math.sqrt(2)
    cc = critical_coupling(theta, 1.0, l2, e_max)
    below = delta_spectrum(LatticeSpec(1.0, l2, Delta(cc * 0.999)), e_max)
    above = delta_spectrum(LatticeSpec(1.0, l2, Delta(cc * 1.001)), e_max)
    assert len(count_gaps(below)) == 0
    assert len(count_gaps(above)) >= 1


def test_critical_coupling_monotone_in_cutoff():
    vals = [critical_coupling("golden", 1.0, PHI, (m * math.pi) ** 2) for m in (5, 10, 20, 40, 80, 160)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_critical_coupling_rational_vanishes():
    assert critical_coupling("ratio:1/1", 1.0, 1.0, 1e3) == 0.0
    assert critical_coupling("ratio:3/2", 1.0, 1.5, 1e3) == 0.0


def test_critical_coupling_errors():
    with pytest.raises(InvalidInputError):
        critical_coupling("golden", 1.0, PHI, 1.0)  # below the first lattice point
    with pytest.raises(InvalidInputError):
        critical_coupling("golden", 1.0, 2.0, 1e3)  # spacing ratio mismatch


def test_liouville_like_coupling_decays():
    # quotients growing tenfold: approximations improve so fast that the
    # gap-opening coupling along the Hurwitz denominators tends to zero
    x = Fraction(0)
    for a in reversed([1, 10, 100, 1000, 10000, 100000, 1000000, 2]):
        x = 1 / (a + x)
    eps = Fraction(1, 10 ** 80)
    theta = ThetaValue(x - eps, x + eps, "fast-quotients")
    members = hurwitz_sequence(theta, 3).members
    vals = coupling_along_sequence(theta, 1.0, [c.q for c in members])
    assert len(vals) == 3
    assert vals[0] > vals[1] > vals[2]
    assert vals[-1] < 1e-4


def test_gap_census_golden_threshold():
    e_max = (40 * math.pi) ** 2
    L = math.sqrt(PHI)  # with ell = 1 the longer spacing is theta**1/2
    rows = gap_census("golden", 1.0, [0.9 * CRIT / L, 1.1 * CRIT / L], e_max)
    assert rows[0].gap_count == 0 and rows[0].lowest_gap is None
    assert rows[1].gap_count >= 1
    assert rows[0].cL == pytest.approx(0.9 * CRIT)


def test_gap_census_rational():
    rows = gap_census("ratio:1/1", 1.0, [0.01], 1e4)
    assert rows[0].gap_count >= 1


def test_gap_census_monotone():
    cs = [0.5, 1.0, 2.0, 4.0, 8.0]
    counts = [r.gap_count for r in gap_census("sqrt:3", 1.0, cs, 2e4)]
    assert counts == sorted(counts)
    with pytest.raises(InvalidInputError):
        gap_census("golden", 1.0, [], 10)


def test_verify_delta():
    rep = verify_propositions(LatticeSpec(1, 1, Delta(2)), 1000)
    assert rep.ok and rep.edge_quantization_ok
    assert rep.checks["kp_containment"] is True
    assert rep.gap_count == len(rep.gap_widths) > 0


def test_verify_delta_high_energy_width_bound():
    rep = verify_propositions(LatticeSpec(1, 1, Delta(2)), 1e4)
    assert rep.checks["width_bounds"] is True and not rep.bound_violations
    high = rep.gap_widths[-5:]
    assert all(abs(w - 2) < 0.2 for w in high)


def test_verify_dps_band_widths():
    rep = verify_propositions(LatticeSpec(1, 1, DeltaPrimeS(2)), 1e4)
    assert rep.ok and rep.checks["width_bounds"] is True
    widths = [b.width for b in rep.spectrum.bands if b.lo > 1000 and b.hi < 1e4]
    assert all(abs(w - 8) < 0.8 for w in widths)
    assert max(widths) <= 8 * enhancement(1).e


def test_verify_free():
    rep = verify_propositions(LatticeSpec(1, PHI, Delta(0)), 500)
    assert rep.gap_count == 0 and rep.checks["free_spectrum"] is True


def test_verify_deep_couplings():
    rep = verify_propositions(LatticeSpec(1, 1, Delta(-10)), 300)
    assert rep.checks["deep_coupling"] is True and rep.ok
    rep = verify_propositions(LatticeSpec(1, 1, DeltaPrimeS(-1)), 300)
    assert rep.checks["deep_coupling"] is True and rep.ok


def test_verify_dprime_and_rejections():
    rep = verify_propositions(LatticeSpec(1, 1.3, DeltaPrime(-0.5)), 400, resolution=64)
    assert rep.checks["band_structure"] is True
    assert rep.checks["edge_quantization"] is None
    with pytest.raises(NotApplicableError):
        verify_propositions(LatticeSpec(1, 1, PermInvariant(1, 2)), 10)


def test_gap_count_excludes_bottom_and_negative_gaps():
    spec = delta_spectrum(LatticeSpec(1, 1, Delta(-10)), 200)
    assert all(g.lo >= 0 for g in count_gaps(spec))
    assert len(count_gaps(spec)) == len(spec.gaps) - 1
    spec = delta_spectrum(LatticeSpec(1, 1, Delta(1)), 200)
    assert len(count_gaps(spec)) == len(spec.gaps) - 1


def test_parse_theta_consistency():
    assert float(parse_theta("golden")) == pytest.approx(PHI, rel=1e-15)
