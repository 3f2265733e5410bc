import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from starkit.exact import GOLDEN, INV_SQRT2, SQRT2, SQRT3, Quad, squarefree_decompose


def test_squarefree_decompose():
    assert squarefree_decompose(1) == (1, 1)
    assert squarefree_decompose(12) == (2, 3)
    assert squarefree_decompose(49) == (7, 1)
    assert squarefree_decompose(50) == (5, 2)


def test_constants():
    assert float(SQRT2) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert float(INV_SQRT2) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert float(GOLDEN) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)


def test_perfect_square_radicand_folds():
    q = Quad(0, 1, 4)
    assert q.is_rational and q.to_fraction() == 2


def test_field_arithmetic():
    a = Quad(1, 2, 3)  # 1 + 2*sqrt(3)
    b = Quad(Fraction(1, 2), -1, 3)
    assert float(a + b) == pytest.approx(float(a) + float(b))
    assert float(a * b) == pytest.approx(float(a) * float(b), rel=1e-14)
    assert float(a / b) == pytest.approx(float(a) / float(b), rel=1e-14)
    assert (a - a).sign() == 0


def test_cross_radicand_pure_ratio():
    r = SQRT2 / SQRT3
    assert not r.is_rational and r.d == 6
    assert float(r) == pytest.approx(math.sqrt(2) / math.sqrt(3))
    with pytest.raises(ValueError):
        (SQRT2 + 1) / SQRT3


def test_same_surd_ratio_is_rational():
    r = Quad(0, 3, 2) / Quad(0, 2, 2)
    assert r.is_rational and r.to_fraction() == Fraction(3, 2)


def test_exact_comparisons():
    assert SQRT2 > 1 and SQRT2 < Fraction(3, 2)
    # consecutive convergents bracket sqrt2 within ~1e-4; exact decisions
    assert Quad(Fraction(140, 99)) < SQRT2 < Quad(Fraction(99, 70))
    assert (SQRT2 * SQRT2) == 2


def test_floor_near_integers():
    assert math.floor(SQRT2) == 1
    assert math.floor(SQRT2 * SQRT2) == 2
    assert math.floor(-SQRT2) == -2
    assert math.floor(Quad(5)) == 5
    big = Quad(0, 985, 2)  # 985*sqrt2 = 1393.000359..., just above an integer
    assert math.floor(big) == 1393
    assert math.floor(Quad(0, 169, 2)) == 239  # 169*sqrt2 = 239.0023 from above
    assert math.floor(Quad(0, 408, 2) / 577) == 0  # 408sqrt2/577 = 0.999999...


@given(st.fractions(max_value=50, min_value=-50),
       st.fractions(max_value=50, min_value=-50),
       st.sampled_from([2, 3, 5, 6]))
def test_sign_matches_float(a, b, d):
    q = Quad(a, b, d)
    f = float(q)
    if abs(f) > 1e-9:
        assert q.sign() == (1 if f > 0 else -1)


def test_sqrt_of_fraction():
    q = Quad.sqrt(Fraction(9, 4))
    assert q.is_rational and q.to_fraction() == Fraction(3, 2)
    h = Quad.sqrt(Fraction(1, 2))
    assert h == INV_SQRT2
