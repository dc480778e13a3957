import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmselect.financial import (
    AivLedger,
    ArcLedger,
    LossBreakdown,
    NonPositiveInfrastructureValue,
    ZeroCost,
    aiv,
    ale,
    ale_with_diagnostics,
    arc,
    roi,
    rori,
    rosi,
)

money = st.floats(0, 1e7, allow_nan=False)
positive = st.floats(1, 1e7, allow_nan=False)


def test_ale():
    assert ale(LossBreakdown(), 5) == 0
    assert ale(LossBreakdown(la=1000), 12) == 12000
    value, diags = ale_with_diagnostics(LossBreakdown(la=300, ld=200, ci=1000), 1)
    assert value == 0
    assert len(diags) == 1 and "clamped" in diags[0].message


@given(money, money, st.floats(0, 100, allow_nan=False))
def test_ale_linear_in_aro(la, ld, aro):
    losses = LossBreakdown(la=la, ld=ld)
    assert ale(losses, 2 * aro) == pytest.approx(2 * ale(losses, aro), rel=1e-12, abs=1e-9)


def test_arc():
    assert arc(ArcLedger()) == 0
    assert arc(ArcLedger(ci=17)) == 17
    assert arc(ArcLedger(ci=30600, odc=10000)) == 40600
    assert ArcLedger(ci=1, cm=2, odc=3, ic=4).total == 10


def test_aiv():
    assert aiv(AivLedger(ec=75000)) == 75000
    assert aiv(AivLedger(ec=50000, pc=30000, rv=5000)) == 75000
    with pytest.raises(NonPositiveInfrastructureValue):
        aiv(AivLedger(ec=100, rv=100))


@pytest.mark.parametrize(
    "args, expected",
    [
        ((100000, 0.39, 18700, 75000), 21.66),
        ((100000, 0.65, 40600, 75000), 21.11),
        ((100000, 0.01, 17, 75000), 1.31),
    ],
)
def test_rori_table_values(args, expected):
    assert rori(*args) == pytest.approx(expected, abs=0.01)


def test_rori_errors():
    with pytest.raises(NonPositiveInfrastructureValue):
        rori(1000, 0.5, 10, 0)
    with pytest.raises(ValueError):
        rori(1000, 0.5, -1, 10)


@given(money, positive)
def test_rori_noop_is_exactly_zero(ale_value, aiv_value):
    assert rori(ale_value, 0, 0, aiv_value) == 0


@given(positive, st.floats(0.01, 0.99), money, positive)
def test_rori_monotone(ale_value, rm, arc_value, aiv_value):
    base = rori(ale_value, rm, arc_value, aiv_value)
    assert rori(ale_value, rm + 0.01, arc_value, aiv_value) > base
    assert rori(ale_value * 1.5, rm, arc_value, aiv_value) > base
    if ale_value * rm - arc_value > 0:
        assert rori(ale_value, rm, arc_value, aiv_value * 2) < base


# subnormals lose bits when halved, so exactness needs normal floats
normal_money = st.just(0.0) | st.floats(1e-3, 1e7)
milli_rm = st.integers(-1000, 1000).map(lambda k: k / 1000)


@given(normal_money, milli_rm, normal_money, positive, st.integers(-20, 20))
def test_rori_currency_scale_invariant(ale_value, rm, arc_value, aiv_value, k):
    scale = 2.0**k
    assert rori(ale_value * scale, rm, arc_value * scale, aiv_value * scale) == rori(ale_value, rm, arc_value, aiv_value)


def test_roi():
    assert roi(200, 100) == 100
    assert roi(100, 100) == 0
    assert roi(50, 100) == -50
    with pytest.raises(ZeroCost):
        roi(10, 0)


def test_rosi():
    assert rosi(100, 40, 30) == 100
    assert rosi(100, 100, 30) == -100
    assert rosi(100000, 35000, 18700) == pytest.approx(247.6, abs=0.05)
    with pytest.raises(ZeroCost):
        rosi(100, 50, 0)
