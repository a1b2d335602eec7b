from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from anticyclo.errors import DivisionByZero, NotOrdinary, OddPrimeOnly, PrecisionExhausted
from anticyclo.padic import PadicNumber, default_precision, padic, unit_root, vp

P = 5
ints = st.integers(min_value=-10**12, max_value=10**12)


def test_unit_root_examples():
    assert unit_root(2, 5, 2).residue() == 12
    a = unit_root(1, 3, 4)
    # alpha^2 - alpha + 3 == 0 mod 3^4
    assert (a * a - a + 3).is_zero()
    assert (PadicNumber.from_rational(1, 3, 4) - a).valuation() >= 1


def test_unit_root_rejects_supersingular():
    with pytest.raises(NotOrdinary):
        unit_root(5, 5)
    with pytest.raises(NotOrdinary):
        unit_root(0, 7)


def test_inverse_of_two_mod_25():
    assert PadicNumber.from_rational(2, 5, 2).inverse().residue() == 13


def test_p2_is_rejected():
    with pytest.raises(OddPrimeOnly):
        padic(1, 2)


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        padic(1, 5) / padic(0, 5)


def test_zero_product_precision():
    x = PadicNumber.from_rational(25, 5, 10)
    z = PadicNumber.zero(5, 10)
    prod = x * z
    assert prod.is_zero()
    assert prod.prec == 12


def test_residue_beyond_precision():
    with pytest.raises(PrecisionExhausted):
        padic(3, 5, 4).residue(5)


def test_env_precision(monkeypatch):
    monkeypatch.setenv("ANTICYCLO_PRECISION", "7")
    assert default_precision() == 7
    monkeypatch.delenv("ANTICYCLO_PRECISION")
    assert default_precision() == 20


def test_fraction_and_string():
    x = padic("3/25", 5, 10)
    assert x.valuation() == -2
    assert x * 25 == padic(3, 5, 10)
    assert padic(Fraction(1, 3), 5, 6) * 3 == 1


def test_vp():
    assert vp(250, 5) == 3
    assert vp(Fraction(7, 125), 5) == -3
    assert vp(0, 5) == float("inf")


def test_json_round_trip_and_digit_form():
    x = padic(1234, 5, 8)
    assert PadicNumber.from_json(x.to_json()) == x
    dig = {"p": 5, "val": x.val, "prec": 8, "digits": x.digits()}
    assert PadicNumber.from_json(dig) == x
    assert PadicNumber.from_json({"p": 5, "val": "inf", "prec": 3, "digits": []}).is_zero()


@settings(max_examples=200, deadline=None)
@given(ints, ints, ints)
def test_ring_axioms(a, b, c):
    x, y, z = (padic(v, P, 12) for v in (a, b, c))
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x - x == 0


@settings(max_examples=200, deadline=None)
@given(ints.filter(lambda v: v % P != 0))
def test_inverse(a):
    x = padic(a, P, 15)
    assert (x * x.inverse() - 1).is_zero()


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=-20, max_value=20).filter(lambda a: a % 7))
def test_unit_root_is_a_root(a):
    al = unit_root(a, 7, 15)
    assert al.is_unit()
    assert (al * al - al * a + 7).is_zero()
