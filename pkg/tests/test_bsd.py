import pytest

from anticyclo.bsd import (BSDInput, admissible_search, bdp_value, evaluate_series_against_prediction,
                           is_fundamental_discriminant, kronecker, predict_conjecture_BSD,
                           predict_conjecture_BSD_sqrt, rank_one_consistency, restriction_injective,
                           sel_div_order, sel_div_order_from_log, theorem_A_value, verify_certificate)
from anticyclo.elliptic import CurveData
from anticyclo.errors import AnomalousPrime, BadDiscriminant, NonSquareSha, NonUnitFactors
from anticyclo.heights import HeightSystem
from anticyclo.iwasawa import IwasawaSeries
from anticyclo.linalg import PMatrix
from anticyclo.padic import PadicNumber

E = CurveData.short(1, 1)


def test_bdp_example():
    assert bdp_value(1, 1, 2, 5, 5) == 16
    with pytest.raises(NonUnitFactors):
        bdp_value(5, 1, 2, 5, 5)


def test_theorem_a_example():
    inp = BSDInput(p=5, a_p=2, r_plus=1, r_minus=0, sha=25, log_y=5)
    ta = theorem_A_value(inp)
    assert ta.order_bound == 0 and ta.valuation == 2
    with pytest.raises(AnomalousPrime):
        theorem_A_value(BSDInput(p=5, a_p=6, r_plus=1, r_minus=0, log_y=5))


def test_prediction_rank_one():
    inp = BSDInput(p=5, a_p=2, r_plus=1, r_minus=0, sha=4, tamagawa=[2], log_y=15)
    pred = predict_conjecture_BSD(inp)
    e = PadicNumber.from_rational(4, 5, 21) / 5
    assert pred.order == 0
    assert pred.value.coefficient == e * e * 225 * 4 * 4


def test_sqrt_prediction_squares():
    H1 = PMatrix.from_ints([[0, 5, 0], [5, 0, 0], [0, 0, 0]], 5, 20, ring="Qp")
    hs = HeightSystem(5, 2, 1, (H1,))
    inp = BSDInput(p=5, a_p=3, r_plus=2, r_minus=1, sha=9, tamagawa=[3], log_y=10, heights=hs)
    full = predict_conjecture_BSD(inp).value
    half = predict_conjecture_BSD_sqrt(inp).value
    assert full.exponent == 2 and half.exponent == 1
    sq = half.coefficient * half.coefficient
    assert sq == full.coefficient or sq == -full.coefficient


def test_non_square_sha_warns():
    inp = BSDInput(p=5, a_p=2, r_plus=1, r_minus=0, sha=2, log_y=5)
    with pytest.warns(NonSquareSha):
        pred = predict_conjecture_BSD_sqrt(inp)
    assert pred.value is None


def test_rank_one_consistency_equivalence():
    idx, u, c, sha, tam = 6, 1, 1, 9, [2]
    assert rank_one_consistency(idx, u, c, sha, tam)
    log_y = PadicNumber.from_rational(10, 5, 20)
    inp = BSDInput(p=5, a_p=2, r_plus=1, r_minus=0, sha=sha, tamagawa=tam, u_K=u, c_E=c, log_y=log_y)
    assert bdp_value(u, c, 2, 5, log_y * idx) == predict_conjecture_BSD(inp).value.coefficient


def test_sel_div_paths_agree():
    for v in range(1, 6):
        log_y = PadicNumber.from_rational(5**v * 7, 5, 20)
        assert sel_div_order(25, log_y) == sel_div_order_from_log(25, log_y) == 25 * 5 ** (2 * v - 2)


def test_kronecker_and_discriminants():
    assert kronecker(-7, 3) == -1 and kronecker(-7, 2) == 1 and kronecker(-7, 7) == 0
    assert kronecker(-3, 2) == -1
    assert is_fundamental_discriminant(-7) and is_fundamental_discriminant(-4) and is_fundamental_discriminant(-8)
    assert not is_fundamental_discriminant(-12) and not is_fundamental_discriminant(-9)


def test_admissible_search():
    res = admissible_search(E, -7, 5, 1, 200)
    qs = [c.q for c in res.primes]
    assert qs == [13, 47, 83, 157]
    assert all(verify_certificate(E, -7, 5, 1, c) for c in res.primes)
    assert res.injective is None and res.notes
    # prefix property
    assert [c.q for c in admissible_search(E, -7, 5, 1, 100).primes] == [q for q in qs if q <= 100]
    with pytest.raises(BadDiscriminant):
        admissible_search(E, -31, 5, 1, 50)
    with pytest.raises(BadDiscriminant):
        admissible_search(E, -12, 5, 1, 50)


def test_restriction_injectivity():
    assert restriction_injective([[1, 0], [0, 1], [1, 1]], 5, 1)
    assert not restriction_injective([[1, 1], [2, 2]], 5, 1)
    assert not restriction_injective([[5, 0], [0, 1]], 5, 2)


def test_series_report():
    inp = BSDInput(p=5, a_p=2, r_plus=1, r_minus=0, sha=1, log_y=5)
    pred = predict_conjecture_BSD(inp).value.coefficient
    good = IwasawaSeries(5, 4, 20, (pred,) + tuple(PadicNumber.zero(5, 20) for _ in range(4)))
    rep = evaluate_series_against_prediction(good, inp)
    assert rep.passed and rep.flags["valuation_match"]
    vanishing = IwasawaSeries.from_ints(5, [0, 1, 0], prec=10)
    rep = evaluate_series_against_prediction(vanishing, inp)
    assert rep.flags["extra_vanishing"] and not rep.flags["order_contradiction"]
    H1 = PMatrix.from_ints([[0, 5, 0], [5, 0, 0], [0, 0, 0]], 5, 20, ring="Qp")
    inp3 = BSDInput(p=5, a_p=2, r_plus=2, r_minus=1, log_y=5, heights=HeightSystem(5, 2, 1, (H1,)))
    rep = evaluate_series_against_prediction(IwasawaSeries.from_ints(5, [1, 0, 0], prec=10), inp3)
    assert rep.flags["order_contradiction"] and not rep.passed
    assert rep.to_json()["predicted_order"] == 2


def test_input_validation():
    with pytest.raises(ValueError):
        BSDInput(p=5, a_p=2, r_plus=1, r_minus=1)
    inp = BSDInput.from_json({"p": 5, "ap": 2, "r_plus": 1, "r_minus": 0, "sha": 50, "log_y": 5})
    assert inp.sha_p_part == 25
