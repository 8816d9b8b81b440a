import random
from fractions import Fraction as Q

import pytest

from curvequant.config import Truncation
from curvequant.errors import NoSolutionAtOrder
from curvequant.geometry import build_instance
from curvequant.hseries import HScalar, HScalarK
from curvequant.kernels import (KernelSet, build_a0, build_delta, gamma_kernel,
                                hochschild_gamma, promote_to_rr, rr_membership,
                                solve_phi_psi, structure_q, tau_default,
                                verify_antisymm_q, verify_a_operator, verify_compat,
                                verify_hochschild_cocycle, verify_id_tau, verify_reg)
from curvequant.tensors import ModeTensor

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


@pytest.fixture(scope="module")
def kern_rational(rational):
    return KernelSet(rational)


@pytest.fixture(scope="module")
def kern_trig(trig):
    return KernelSet(trig)


@pytest.fixture(scope="module")
def kern_finite(finite2):
    return KernelSet(finite2)


def test_a0_rational_simple_pole_pattern(rational):
    a0 = build_a0(rational)
    blk = a0.blocks[("inf", "inf")]
    for (i, j), c in blk.coeffs.items():
        assert j == -i + 1 and c.constant_part().coeff(0) in (1, -1)
    # a0 * a0 has the (m+1) geometric-square pattern
    sq = rational.multiply(a0, a0)
    blk = sq.blocks[("inf", "inf")]
    for (i, j), c in blk.coeffs.items():
        m = -i
        assert j == m + 2
        assert c.constant_part().coeff(0) == m + 1


def test_a0_trig_half_plus_geometric(trig):
    a0 = build_a0(trig)
    c00 = a0.blocks[("0", "0")].coeffs
    nu = trig.nu
    assert c00[(0, 0)].constant_part().coeff(0) == Q(1, 2) * nu
    for a in range(1, 5):
        assert c00[(-a, a)].constant_part().coeff(0) == nu


def test_a0_finite(finite2):
    a0 = build_a0(finite2)
    assert a0.blocks[("t", "t")].coeffs[(1, 0)].constant_part().coeff(0) == finite2.nu


def test_a0_reproducing_sign_identity(rational, trig):
    # (alpha (x) 1 - 1 (x) alpha)(a0 + a0~) has zero provable cells
    from curvequant.kernels import alpha_diff
    for inst in (rational, trig):
        a0 = build_a0(inst)
        alpha = inst.r_element(1)
        x = inst.multiply(alpha_diff(inst, alpha), a0 + a0.swap())
        assert x.known_cells_all_zero()
        assert x.provable_cell_count() > 0


def test_gamma_values(rational, trig, finite2):
    g_rat = promote_to_rr(rational, gamma_kernel(rational))
    assert g_rat.known_cells_all_zero()
    g_trig = promote_to_rr(trig, gamma_kernel(trig))
    want = ModeTensor.constant_one(2, trig.chart_ids).scale(Q(-1, 4))
    assert (g_trig - want).known_cells_all_zero()
    g_fin = promote_to_rr(finite2, gamma_kernel(finite2))
    assert g_fin.known_cells_all_zero()


def test_gamma_membership(rational, trig):
    for inst in (rational, trig):
        assert rr_membership(inst, gamma_kernel(inst))


def test_hochschild_gamma_in_rr_and_cocycle(rational, trig):
    rng = random.Random(11)
    for inst in (rational, trig):
        idx = list(inst.r_range())[:5]
        for _ in range(5):
            alpha = inst.zero_k()
            for i in idx:
                alpha = alpha + inst.r_element(i).scale(Q(rng.randint(-2, 2)))
            g = hochschild_gamma(inst, alpha, promote=True)  # raises if not in R(x)R
        for _ in range(3):
            a = inst.r_element(rng.choice(idx))
            b = inst.r_element(rng.choice(idx))
            assert verify_hochschild_cocycle(inst, a, b)


def test_hochschild_gamma_rational_constant(rational):
    # (z - z') a0 = constant: gamma(z) is -nu (1 (x) 1) up to the orientation
    g = hochschild_gamma(rational, rational.r_element(1), promote=True)
    cells = [(k, e, c) for k, e, c in g.items()]
    assert len(cells) == 1 and cells[0][1] == (0, 0)
    assert abs(cells[0][2].constant_part().coeff(0)) == 1


def test_tau_default_zero_for_builtins(kern_rational, kern_trig, kern_finite):
    for kern in (kern_rational, kern_trig, kern_finite):
        assert kern.tau.known_cells_all_zero()


def test_id_tau_holds_and_survives_antisymmetric_shift(trig):
    tau0 = tau_default(trig)
    assert verify_id_tau(trig, tau0)
    ups = (trig.r_element(1).outer(trig.r_element(2))
           - trig.r_element(2).outer(trig.r_element(1)))
    assert verify_id_tau(trig, tau0 + ups)


def test_structure_q_basics(kern_trig, trig):
    q = kern_trig.qfun
    # hbar^0 part is 1
    one = ModeTensor.constant_one(2, trig.chart_ids)
    diff = q - one
    assert diff.hbar_valuation() >= 1
    assert verify_antisymm_q(trig, q)


def test_structure_q_first_order(kern_rational, rational):
    # h^1 part = 2 sum_i e_i(z) e^i(w) when U = O(h^2)
    q = kern_rational.qfun
    from curvequant.kernels import dual_sum
    base = dual_sum(rational, [("l", None, None), ("r", None, None)])
    for key, exps, c in q.items():
        if exps == (0, 0) and key == ("inf", "inf"):
            continue
        b = base.blocks[key].coeffs.get(exps)
        want = 2 * b.constant_part().coeff(0) if b is not None else 0
        assert c.constant_part().coeff(1) == want


def test_structure_q_finite(kern_finite, finite2):
    # q = 1 + 2 hbar nu (1 (x) t) exactly (nilpotency kills the rest)
    q = kern_finite.qfun
    one = ModeTensor.constant_one(2, finite2.chart_ids)
    t2 = finite2.mode("t", 1).embed(2, (1,))
    want = one + t2.scale(HScalarK.from_scalar(HScalar(1, [2 * finite2.nu], 2)))
    assert (q - want).known_cells_all_zero()


def test_solver_forced_first_order(rational, trig):
    for inst in (rational, trig):
        phi, psi_p, psi_m = solve_phi_psi(inst, 3)
        one = ModeTensor.constant_one(2, inst.chart_ids)
        # phi^(0) = 0 and psi_-^(1) - psi_+^(1) = 2 (1 x 1)
        for _, _, c in phi.items():
            assert c.constant_part().coeff(0) == 0
        d = psi_m - psi_p
        for key, exps, c in d.items():
            want = 2 if exps == (0,) * 2 or exps == (0, 0) else 0
            if exps == (0, 0):
                assert c.constant_part().coeff(1) == 2
            else:
                assert c.constant_part().coeff(1) == 0
        assert psi_p.hbar_valuation() >= 1 and psi_m.hbar_valuation() >= 1


def test_solver_identities_to_order3(rational, trig):
    # the solver itself verifies both identities on the window before returning
    for inst in (rational, trig):
        solve_phi_psi(inst, 3)


def test_rational_psi_is_plus_minus_hbar(rational):
    phi, psi_p, psi_m = solve_phi_psi(rational, 3)
    one = ModeTensor.constant_one(2, rational.chart_ids)
    want_m = one.scale(HScalar(1, [1], 4))
    assert (psi_m - want_m).known_cells_all_zero()
    assert (psi_p + want_m).known_cells_all_zero()
    assert phi.known_cells_all_zero()


def test_trig_psi_matches_tanh(trig):
    # psi_- = 2 tanh(hbar/2) (1 x 1) = (hbar - hbar^3/12 + ...) (1 x 1)
    phi, psi_p, psi_m = solve_phi_psi(trig, 3)
    c = psi_m.blocks[("0", "0")].coeffs[(0, 0)].constant_part()
    assert c.coeff(1) == 1 and c.coeff(2) == 0 and c.coeff(3) == Q(-1, 12)


def test_compat(kern_rational, kern_trig):
    assert verify_compat(kern_rational.inst, kern_rational)
    assert verify_compat(kern_trig.inst, kern_trig)


def test_reg_identity(kern_trig, trig, kern_rational, rational):
    alpha = trig.r_element(2)
    rep = verify_reg(trig, kern_trig, alpha)
    assert rep["passed"], rep
    rep0 = verify_reg(trig, kern_trig, trig.one_k())
    assert rep0["passed"]
    rep_r = verify_reg(rational, kern_rational, rational.r_element(1))
    assert rep_r["passed"]


def test_reg_negative_control(trig):
    kern = KernelSet(trig)
    kern.psi_plus = kern.psi_plus + ModeTensor.constant_one(2, trig.chart_ids).scale(
        HScalar(1, [1], 3))
    rep = verify_reg(trig, kern, trig.r_element(2))
    assert not rep["passed"]


def test_a_operator(kern_trig, kern_rational):
    for kern in (kern_trig, kern_rational):
        rep = verify_a_operator(kern.inst, kern)
        assert rep["passed"], rep


def test_delta_reproduces(trig):
    d = build_delta(trig)
    # <delta(z, .), beta> = nu beta on central modes
    for n in (-1, 0, 1):
        beta = trig.mode("0", n)
        v = trig.pairing_axis(d, 1, beta)
        diff = v - beta.scale(trig.nu)
        # compare on the provable center
        for key, exps, c in diff.items():
            assert c.is_zero(), (key, exps, c)
