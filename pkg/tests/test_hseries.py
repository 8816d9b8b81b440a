from fractions import Fraction as Q

import pytest

from curvequant.errors import BadConstantTerm, PrecisionError
from curvequant.hseries import HScalar, HScalarK, KSYM


def h(power=1, order=10):
    return HScalar.hbar(power, order)


def test_add_mul_exact():
    a = HScalar(0, [1, 2, 3], 5)
    b = HScalar(0, [0, 1], 5)
    s = a + b
    assert s.coeff(0) == 1 and s.coeff(1) == 3 and s.coeff(2) == 3
    p = a * b
    assert p.coeff(0) == 0 and p.coeff(1) == 1 and p.coeff(2) == 2 and p.coeff(3) == 3


def test_mul_order_is_min_for_unit_operands():
    a = HScalar(0, [1, 1], 4)
    b = HScalar(0, [1, 1], 7)
    assert (a * b).order == 4


def test_mul_order_is_min_rule():
    a = HScalar(1, [1], 4)   # h + O(h^5)
    b = HScalar(0, [1, 1], 3)
    assert (a * b).order == 3


def test_unknown_coefficient_raises():
    a = HScalar(0, [1], 2)
    with pytest.raises(PrecisionError):
        a.coeff(3)


def test_inverse_and_divide():
    x = HScalar(0, [1, 1], 6)  # 1 + h
    xi = x.inverse()
    assert (x * xi - HScalar.one(6)).is_zero()
    y = HScalar(1, [2, 4], 6)  # 2h + 4h^2
    yi = y.inverse()
    assert yi.lo == -1
    assert (y * yi - HScalar.one(6)).truncate(4).is_zero()


def test_exp_ln_roundtrip():
    u = HScalar(1, [1, Q(1, 2)], 6)
    assert (u.exp() - HScalar.one(6)).ln1p().same_known(u)


def test_sqrt_squares_back():
    u = HScalar(1, [3, -2], 6)
    r = (u).sqrt1p()
    assert ((r * r) - (HScalar.one(6) + u)).is_zero()


def test_exp_requires_positive_valuation():
    with pytest.raises(BadConstantTerm):
        HScalar.one(4).exp()


def test_hscalark_symbol_arithmetic():
    k = HScalarK.symbol(KSYM, 6)
    h1 = HScalarK.from_scalar(HScalar.hbar(1, 6))
    x = k * h1  # h*K
    y = x * x
    assert y.coeff_mono(((KSYM, 2),)).coeff(2) == 1
    assert x.check_central_degree()
    assert not (k.check_central_degree())  # bare K without hbar fails the invariant


def test_hscalark_subs_and_rename():
    k = HScalarK.symbol(KSYM, 6) * HScalar.hbar(1, 6)
    two = k.subs(KSYM, HScalarK.from_rat(2, 6))
    assert two.is_scalar() and two.constant_part().coeff(1) == 2
    k1 = k.rename_symbol(KSYM, "K1")
    assert "K1" in k1.symbols() and KSYM not in k1.symbols()


def test_hscalark_exp_inverse():
    k = HScalarK.symbol(KSYM, 4) * HScalar.hbar(1, 4)
    e = k.exp()
    assert (e * e.inverse() - HScalarK.one(4)).is_zero()
