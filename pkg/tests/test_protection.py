import dataclasses
import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmselect.model import CiaVector, ProtectionAssignment
from cmselect.protection import (
    actual_danger,
    assessed_danger,
    assessed_protection,
    danger_matrices,
    effectiveness_from_factors,
    protection_level,
    protection_matrix,
    risk_mitigation,
    round_half_away,
    security_impact,
)

cia = st.builds(CiaVector, *(st.integers(0, 5) for _ in range(3)))
pct = st.floats(0, 100, allow_nan=False)
# multiples of 1/64 in [0, 100]: differences are exact in binary floating point
grid_pct = st.integers(0, 6400).map(lambda k: k / 64)


@pytest.mark.parametrize(
    "d, v, expected",
    [
        ((1, 2, 3), (5, 5, 5), 40.0),
        ((0, 0, 0), (5, 5, 5), 0.0),
        ((2, 2, 0), (5, 5, 5), 26.667),
        ((5, 4, 2), (5, 5, 3), 68.0),
    ],
)
def test_assessed_danger_examples(d, v, expected):
    assert assessed_danger(CiaVector(*d), CiaVector(*v)) == pytest.approx(expected, abs=5e-4)


def test_assessed_danger_display_rounding():
    assert round_half_away(assessed_danger(CiaVector(2, 2, 0), CiaVector(5, 5, 5))) == 27


def test_assessed_danger_brute_force():
    # independent oracle: exact rational arithmetic on the raw dot product
    for d in itertools.product(range(6), repeat=3):
        for v in itertools.product(range(6), repeat=3):
            expected = Fraction(sum(a * b for a, b in zip(d, v)) * 100, 75)
            assert abs(assessed_danger(CiaVector(*d), CiaVector(*v)) - float(expected)) <= 1e-9


@given(cia, cia)
def test_assessed_danger_bounds(d, v):
    ad = assessed_danger(d, v)
    assert 0 <= ad <= 100
    full = d.as_tuple() == (5, 5, 5) and v.as_tuple() == (5, 5, 5)
    assert (ad == 100) == full


@given(cia, cia, st.sampled_from("cia"))
def test_assessed_danger_monotone(d, v, comp):
    bumped = CiaVector(**{k: min(5, getattr(d, k) + (k == comp)) for k in "cia"})
    assert assessed_danger(bumped, v) >= assessed_danger(d, v)
    assert assessed_danger(v, bumped) >= assessed_danger(v, d)


def test_assessed_protection_examples():
    assert assessed_protection(ProtectionAssignment(50, 900, 2700)) == pytest.approx(16.667, abs=5e-4)
    assert round_half_away(assessed_protection(ProtectionAssignment(50, 900, 2700))) == 17
    assert assessed_protection(ProtectionAssignment(50, 900, 2700, deployed=False)) == 0.0
    assert assessed_protection(ProtectionAssignment(50)) == 50.0
    assert assessed_protection(None) == 0.0


def test_protection_level_examples():
    assert protection_level(68, 50 * 900 / 2700) == pytest.approx(48.667, abs=5e-4)
    assert protection_level(68, 17) == 49
    assert protection_level(40, 40) == 100
    assert protection_level(40, 75) == 100
    assert protection_level(68, 50) == 82


def test_actual_danger_examples():
    assert actual_danger(60, 75) == -15
    assert actual_danger(40, 0) == 40
    assert actual_danger(33.3, 33.3) == 0


@given(grid_pct, grid_pct)
def test_protection_level_properties(ad, ap):
    pl = protection_level(ad, ap)
    assert 0 <= pl <= 100
    assert (pl == 100) == (ap >= ad)
    assert pl == 100 - max(0, actual_danger(ad, ap))


@given(pct, pct)
def test_protection_level_identity_any_float(ad, ap):
    pl = protection_level(ad, ap)
    assert 0 <= pl <= 100
    assert pl == 100 - max(0, actual_danger(ad, ap))
    if ap >= ad:
        assert pl == 100


def test_security_impact_examples():
    assert security_impact(49, 82) == 33
    assert security_impact(61.5, 61.5) == 0
    exact_cur = 100 - (68 - 50 * 900 / 2700)
    exact_pot = 100 - (68 - 50 * 2000 / 2700)
    assert exact_cur == pytest.approx(48.667, abs=5e-4)
    assert exact_pot == pytest.approx(69.037, abs=5e-4)
    assert security_impact(exact_cur, exact_pot) == pytest.approx(20.37, abs=5e-3)


@given(pct, pct)
def test_security_impact_antisymmetric(a, b):
    assert security_impact(a, b) == -security_impact(b, a)


def test_risk_mitigation_examples():
    assert risk_mitigation(49, 82) == pytest.approx(0.647, abs=5e-4)
    assert risk_mitigation(49, 69) == pytest.approx(0.392, abs=5e-4)
    assert risk_mitigation(100, 100) == 0
    assert risk_mitigation(49, 49) == 0
    assert risk_mitigation(82, 49) < 0


@given(st.floats(0, 100, exclude_max=True, allow_nan=False))
def test_full_eradication_is_rm_one(pl):
    assert risk_mitigation(pl, 100) == pytest.approx(1.0, abs=1e-12)


def test_effectiveness_from_factors():
    assert effectiveness_from_factors(0.8, 0.6, 1.0) == 0.48
    assert effectiveness_from_factors(0.8, 0, 1.0) == 0
    assert effectiveness_from_factors(1, 1, 1) == 1
    with pytest.raises(ValueError):
        effectiveness_from_factors(1.2, 1, 1)


@pytest.mark.parametrize("x, nd, expected", [(26.5, 0, 27), (-86.5, 0, -87), (26.667, 0, 27), (0.645, 2, 0.65), (21.105, 2, 21.11)])
def test_round_half_away(x, nd, expected):
    assert round_half_away(x, nd) == expected


def test_danger_matrices_na_pattern(tables):
    assessed, actual = danger_matrices(tables)
    applicable = set(tables.applicability)
    for key, value in assessed.cells.items():
        assert (value is None) == (key not in applicable)
        assert (actual.cells[key] is None) == (value is None)


def test_empty_protection_gives_actual_equal_assessed(tables):
    bare = dataclasses.replace(tables, protections={})
    assessed, actual = danger_matrices(bare)
    assert assessed.cells == actual.cells


def test_protection_matrix(usecase):
    m = protection_matrix(usecase)
    assert m.get("User workstation compromise", "User service") == pytest.approx(50 / 3)
    assert m.get("Web site sabotage", "User service") is None
