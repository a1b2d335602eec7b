import random

import pytest

from anticyclo.errors import BlockNotIsotropic, EqualRanks, FiltrationIncomplete, NotSymmetric, PrecisionExhausted
from anticyclo.heights import (HeightSystem, compute_filtration, derived_enhanced_regulator, derived_regulator_p,
                               enhanced_regulator, isotropic_block_determinant, sqrt_regulator,
                               universal_norm_sign)
from anticyclo.linalg import PMatrix, adjugate

p = 5


def Q(rows, prec=20):
    return PMatrix.from_ints(rows, p, prec, ring="Qp")


def test_diagonal_filtration():
    rep = compute_filtration((Q([[1, 0, 0], [0, 5, 0], [0, 0, 0]]),), 3, p)
    assert rep.e[:2] == [2, 0] and rep.d_p == 1
    assert rep.partials[0] == 5
    assert rep.exponent == 2


def test_second_layer():
    H1 = Q([[1, 0, 0], [0, 0, 0], [0, 0, 0]])
    H2 = Q([[0, 0, 0], [0, 0, 3], [0, -3, 0]])
    rep = compute_filtration((H1, H2), 3, p)
    assert rep.e[:2] == [1, 2] and rep.d_p == 0
    assert rep.exponent == 5
    assert rep.partials[1] == 9


def test_missing_pairing_counts_as_zero():
    rep = compute_filtration((Q([[2, 0], [0, 0]]),), 2, p)
    assert rep.e[0] == 1 and rep.d_p == 1


def test_precision_guard():
    H1 = Q([[5**19, 0], [0, 1]])
    with pytest.raises(PrecisionExhausted):
        compute_filtration((H1,), 2, p)


def test_enhanced_regulator_vanishes_at_high_corank():
    H1 = Q([[1, 0, 0], [0, 0, 0], [0, 0, 0]])
    C = enhanced_regulator(H1).coefficients
    assert all(C[i, j].is_zero() for i in range(3) for j in range(3))
    with pytest.raises(NotSymmetric):
        enhanced_regulator(Q([[0, 1], [2, 0]]))


def test_enhanced_regulator_is_adjugate():
    H1 = Q([[2, 1], [1, 3]])
    C = enhanced_regulator(H1, t_prime=5).coefficients
    A = adjugate(H1)
    for i in range(2):
        for j in range(2):
            assert C[i, j] * 25 == A[i, j]


def test_derived_regulators():
    sys = HeightSystem(p, 2, 1, (Q([[0, 5, 0], [5, 0, 0], [0, 0, 0]]),), t=1)
    g = derived_enhanced_regulator(sys)
    assert g.exponent == 2 and g.coefficient == -25
    gp = derived_regulator_p(sys, 10)
    assert gp.coefficient == -25 * 100
    empty = HeightSystem(p, 2, 1, (Q([[0, 0, 0], [0, 0, 0], [0, 0, 0]]),))
    with pytest.raises(FiltrationIncomplete):
        derived_enhanced_regulator(empty)


def test_block_determinant_sign():
    rng = random.Random(1)
    for s in (1, 2):
        for _ in range(5):
            d = 2 * s
            H = [[0] * d for _ in range(d)]
            for i in range(s):
                for j in range(s):
                    H[i][s + j] = H[s + j][i] = rng.randrange(-9, 10)
            chk = isotropic_block_determinant(Q(H), s)
            assert chk.full_det == chk.cross_det * chk.cross_det * chk.sign
            if not chk.cross_det.is_zero():
                assert chk.sign == (-1) ** s
    with pytest.raises(BlockNotIsotropic):
        isotropic_block_determinant(Q([[1, 1], [1, 0]]), 1)


def test_sqrt_regulator_squares_to_derived():
    H1 = Q([[0, 5, 0], [5, 0, 0], [0, 0, 0]])
    sys = HeightSystem(p, 2, 1, (H1,))
    sq = sqrt_regulator(sys).value
    full = derived_enhanced_regulator(sys)
    assert sq.exponent == 1
    assert sq.coefficient * sq.coefficient == -full.coefficient


def test_universal_norm_sign():
    assert universal_norm_sign(2, 1) == 1 and universal_norm_sign(0, 1) == -1
    with pytest.raises(EqualRanks):
        universal_norm_sign(1, 1)


def test_json():
    sys = HeightSystem.from_json({"p": 5, "r_plus": 1, "r_minus": 0, "H": [[[0]]]})
    assert sys.r == 1 and sys.H[0][0, 0].is_zero()
