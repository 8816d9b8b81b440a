from fractions import Fraction as Q

import pytest

from curvequant.config import Truncation
from curvequant.errors import InsufficientPrecision, NotLagrangian
from curvequant.geometry import build_instance, verify_lagrangian
from curvequant.hseries import HScalarK
from curvequant.tensors import chart_series, residue_series


TR = Truncation(nh=2, window=8, degree=2)


@pytest.fixture(scope="module")
def rational():
    return build_instance("rational", TR)


@pytest.fixture(scope="module")
def trig():
    return build_instance("trig", TR)


@pytest.fixture(scope="module")
def finite2():
    return build_instance("finite", TR, finite_m=2)


def test_residue_defining_property(trig):
    # res_0(z^n dz/z) = delta_{n,0}
    for n in range(-3, 4):
        x = trig.mode("0", n)
        cs = chart_series(x, "0")
        r = residue_series(cs, Q(1), -1)
        assert r.constant_part().coeff(0) == (1 if n == 0 else 0)


def test_residue_at_infinity_via_substitution(rational):
    # res_inf(z^-1 dz) computed in the t = 1/z chart equals -1
    x = rational.mode("inf", 1)  # z^-1 = t
    assert rational.residue_total(x).constant_part().coeff(0) == -1


def test_residue_unknown_tail_raises(rational):
    # a window that provably misses the -1 mode is fine; an unknown tail is not
    from curvequant.tensors import AxisWindow, Block, ModeTensor
    blk = Block([AxisWindow(2, 4, False, True)], {(3,): HScalarK.one()})
    x = ModeTensor(1, rational.chart_ids, {("inf",): blk})
    with pytest.raises(InsufficientPrecision):
        rational.residue_total(x)


def test_rational_pairing_isotropy(rational):
    # <z^a, z^b> = 0 for 0 <= a, b <= 6
    for a in range(0, 7):
        for b in range(0, 7):
            v = rational.pairing_k(rational.mode("inf", -a), rational.mode("inf", -b))
            assert v.is_zero()


def test_trig_two_chart_pairing_cancels(trig):
    # <z^m, z^n> = res_0 + res_inf = 0
    for m in range(-2, 3):
        for n in range(-2, 3):
            zm = trig.mode("0", m) + trig.mode("inf", -m)
            zn = trig.mode("0", n) + trig.mode("inf", -n)
            assert trig.pairing_k(zm, zn).is_zero()


def test_orientation_is_selected(rational, trig, finite2):
    for inst in (rational, trig, finite2):
        assert inst.nu in (Q(1), Q(-1))


def test_dual_bases(rational, trig):
    for inst in (rational, trig):
        dp = inst.dual_pair()
        for i in inst.r_range():
            for j in inst.r_range():
                v = inst.pairing_k(dp.e_upper(i), dp.e_lower(j))
                want = inst.nu if i == j else 0
                assert v.constant_part().coeff(0) == want and v.is_scalar()


def test_eps_extension_duality(trig):
    dp = trig.dual_pair()
    idx = [i for i in dp.eps_range() if -5 <= i <= 5]
    for i in idx:
        for j in idx:
            v = trig.pairing_k(dp.eps_upper(i), dp.eps_lower(j))
            want = trig.nu if i == j else 0
            assert v.constant_part().coeff(0) == want


def test_finite2_duality(finite2):
    # theta(1 * t) = 1, theta(1) = theta(t^2) = 0
    dp = finite2.dual_pair()
    assert finite2.pairing_k(dp.e_upper(0), dp.e_lower(0)).constant_part().coeff(0) == finite2.nu
    one = finite2.mode("t", 0)
    t = finite2.mode("t", 1)
    assert finite2.pairing_k(one, one).is_zero()
    assert finite2.pairing_k(t, t).is_zero()
    assert finite2.pairing_k(one, t).constant_part().coeff(0) == 1


def test_split_idempotent(trig, rational):
    for inst in (trig, rational):
        x = inst.r_element(2)
        r, l = inst.split_RL(x)
        assert (r - x).known_cells_all_zero() and l.known_cells_all_zero()
        y = inst.l_element(3)
        r2, l2 = inst.split_RL(y)
        assert r2.known_cells_all_zero() and (l2 - y).known_cells_all_zero()


def test_split_trig_mixed_mode(trig):
    # x = (z^-2, 0) splits across the exponent block {(0,-2), (inf,2)}
    x = trig.mode("0", -2)
    r, l = trig.split_RL(x)
    assert (r + l - x).known_cells_all_zero()
    assert not r.known_cells_all_zero() and not l.known_cells_all_zero()
    # r lies in the R span and l pairs to zero against every window e_j
    trig.dual_pair().expand_in_r(r)
    for j in trig.r_range():
        assert trig.pairing_k(l, trig.l_element(j)).is_zero()


def test_split_linear_pairing_adjoint(trig):
    import random
    rng = random.Random(7)
    for _ in range(5):
        x = trig.zero_k()
        for _ in range(3):
            x = x + trig.mode(rng.choice(["0", "inf"]), rng.randint(-4, 4),
                              Q(rng.randint(-3, 3)))
        xr, xl = trig.split_RL(x)
        assert (xr + xl - x).known_cells_all_zero()
        yr, yl = trig.split_RL(trig.mode("0", rng.randint(-3, 3)))
        assert trig.pairing_k(xr, yr).is_zero()
        assert trig.pairing_k(xl, yl).is_zero()


def test_deriv_T_and_eigenvalues(trig):
    # T z^n = (1 + (hn)^2/6 + ...) z^n ; T(1) = 1
    x = trig.mode("0", 3)
    tx = trig.op_T(x, 0, 2)
    c = tx.blocks[("0",)].coeffs[(3,)]
    assert c.constant_part().coeff(0) == 1
    assert c.constant_part().coeff(2) == Q(9, 6)
    one = trig.one_k()
    assert (trig.op_T(one, 0, 2) - one).known_cells_all_zero()


def test_exp_hK_deriv_eigenmode(trig):
    from curvequant.hseries import HScalar, KSYM
    c = HScalarK.symbol(KSYM, 2) * HScalar.hbar(1, 2)
    x = trig.mode("0", 2)
    y = trig.exp_c_deriv(x, c)
    cc = y.blocks[("0",)].coeffs[(2,)]
    # e^{hbar K n} with n = 2: 1 + 2 hbar K + 2 hbar^2 K^2
    assert cc.coeff_mono(((KSYM, 1),)).coeff(1) == 2
    assert cc.coeff_mono(((KSYM, 2),)).coeff(2) == 2


def test_integration_by_parts(trig, rational):
    for inst in (trig, rational):
        for i in list(inst.r_range())[:4]:
            for j in list(inst.r_range())[:4]:
                f, g = inst.r_element(i), inst.l_element(j)
                v = inst.pairing_k(inst.deriv(f), g) + inst.pairing_k(f, inst.deriv(g))
                assert v.is_zero()


def test_residue_theorem_on_p1(trig):
    # res_0 + res_inf of any global rational function times omega vanishes
    for n in range(-4, 5):
        zn = trig.mode("0", n) + trig.mode("inf", -n)
        assert trig.residue_total(zn).is_zero()


def test_verify_lagrangian_reports(rational, trig):
    for inst in (rational, trig):
        rep = verify_lagrangian(inst, 8)
        assert rep["passed"], rep


def test_finite_odd_m_rejected():
    with pytest.raises(NotLagrangian):
        build_instance("finite", TR, finite_m=3)
