"""Shuffle-algebra realization of the positive half and vertex-relation
normalization.

The graded component of degree n is a window tensor of arity n together
with the iterated-Laurent expansion convention (later variables small).
The shuffle kernel is the structure function of the instance; the pair
(q+, q-) normalizing the two-sided vertex relation lives on the chart
diagonal and carries the directional expansion of 1/(z - w).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Q
from itertools import combinations, permutations
from math import factorial

from .errors import (CompatFailed, DegenerateRelation, DegreeCapExceeded,
                     InsufficientPrecision)
from .hseries import HScalar, HScalarK
from .kernels import KernelSet, promote_finite_window, zw_diff
from .tensors import AxisWindow, Block, ModeTensor

__all__ = ["QPair", "ShuffleElement", "normalize_relation", "ug_relation_multipliers",
           "sym_q", "sym_q_full", "shuffle_mul", "fo_membership", "shuffle_context"]


# --------------------------------------------------------------------------- #
# directional inversion and relation normalization
# --------------------------------------------------------------------------- #

def directional_inverse_D(inst, window=None, direction="w<<z") -> ModeTensor:
    """1/(z - w) per chart diagonal, expanded with the second variable small
    ("w<<z": sum_k w^k z^(-k-1)) or the first ("z<<w")."""
    window = window if window is not None else inst.trunc.window
    blocks = {}
    for s in inst.chart_ids:
        coeffs = {}
        for k in range(0, 2 * window + 1):
            if direction == "w<<z":
                coeffs[(-k - 1, k)] = HScalarK.one()
            else:
                coeffs[(k, -k - 1)] = HScalarK.from_rat(-1)
        if direction == "w<<z":
            wins = [AxisWindow(-2 * window - 1, -1, False, True),
                    AxisWindow(0, 2 * window, True, False)]
        else:
            wins = [AxisWindow(0, 2 * window, True, False),
                    AxisWindow(-2 * window - 1, -1, False, True)]
        blocks[(s, s)] = Block(wins, coeffs)
    return ModeTensor(2, inst.chart_ids, blocks, kind="k~k", direction=direction)


def invert_zw_unit(inst, t: ModeTensor, order, direction="w<<z") -> ModeTensor:
    """Inverse of D + C with D = sum_s (z_s - w_s) and C hbar-suppressed,
    supported on the chart diagonal, in the given expansion direction."""
    dinv = directional_inverse_D(inst, direction=direction)
    D = None
    for s in inst.chart_ids:
        d = zw_diff(inst, s)
        D = d if D is None else D + d
    C = t - D
    u = inst.multiply(C, dinv)          # C/(z-w), O(hbar)
    geo = ModeTensor.constant_one(2, inst.chart_ids)
    power = geo
    k = 0
    val = max(u.hbar_valuation(), 1)
    while (k + 1) * val <= order:
        k += 1
        power = inst.multiply(power, u)
        geo = geo + power.scale(Q((-1) ** k))
    return inst.multiply(dinv, geo)


@dataclass
class QPair:
    """Normalized vertex-relation kernels on the chart diagonal."""

    q_plus: ModeTensor
    q_minus: ModeTensor
    qratio: ModeTensor
    kappa: ModeTensor
    direction: str = "w<<z"


def _diag_restrict(inst, t: ModeTensor) -> ModeTensor:
    blocks = {}
    for key, blk in t.blocks.items():
        if key[0] == key[1]:
            blocks[key] = Block(blk.windows, dict(blk.coeffs))
    return ModeTensor(2, inst.chart_ids, blocks, kind=t.kind, direction=t.direction)


def diag_one(inst) -> ModeTensor:
    """The unit of the chart-diagonal function algebra."""
    return _diag_restrict(inst, ModeTensor.constant_one(2, inst.chart_ids))


def _diag_series(inst, u: ModeTensor, taylor, order) -> ModeTensor:
    """sum_k taylor(k) u^k in the chart-diagonal algebra (u hbar-suppressed)."""
    acc = diag_one(inst).scale(Q(taylor(0)))
    power = diag_one(inst)
    val = max(u.hbar_valuation(), 1)
    k = 0
    while (k + 1) * val <= order:
        k += 1
        power = inst.multiply(power, u)
        if power.known_cells_all_zero():
            break
        t = taylor(k)
        if t != 0:
            acc = acc + power.scale(Q(t))
    return acc


def _h1_part(t: ModeTensor):
    cells = {}
    for key, exps, c in t.items():
        v = c.constant_part()
        try:
            v1 = v.coeff(1)
        except Exception:
            continue
        if v1:
            cells[(key, exps)] = v1
    return cells


def normalize_relation(inst, A: ModeTensor, B: ModeTensor, order=None) -> QPair:
    """Normalize (z-w+A) x(z)x(w) = (z-w+B) x(w)x(z) into (q+, q-) with
    q-(z,w) = -q+(w,z), via kappa = -(z-w+B)/(w-z+A(w,z)), kappa kappa~ = 1."""
    order = order if order is not None else inst.trunc.nh
    if A.hbar_valuation() < 1 or B.hbar_valuation() < 1:
        raise CompatFailed("relation multipliers must be hbar-suppressed")
    A = _diag_restrict(inst, A)
    B = _diag_restrict(inst, B)
    D = None
    for s in inst.chart_ids:
        d = zw_diff(inst, s)
        D = d if D is None else D + d
    qbar_p = D + A
    qbar_m = D + B
    # compatibility: (z-w+B)(w-z+B~) = (z-w+A)(w-z+A~)
    diff = inst.multiply(qbar_m, qbar_m.swap()) - inst.multiply(qbar_p, qbar_p.swap())
    if not diff.truncate_h(order).verified_zero():
        raise CompatFailed("two-sided relation fails the compatibility identity")
    # non-degeneracy at order hbar: A - B not divisible by (z - w)
    d1 = _h1_part(A - B)
    if d1 and _divisible_by_diag(d1):
        raise DegenerateRelation("both sides define the same ideal at first order")
    if not d1:
        # A = B at first order is allowed only when both vanish (trivial case)
        pass
    # (z-w+A)^(21) = -(z-w - A^(21)), so
    # kappa = -(z-w+B)/(z-w+A)^(21) = (z-w+B) * inv(z-w - A^(21))
    kappa = inst.multiply(qbar_m, invert_zw_unit(inst, D - A.swap(), order)
                          ).truncate_h(order)
    # kappa~ = (z-w - B^(21)) * inv(z-w+A), expanded in the same direction
    kappa_sw = inst.multiply(D - B.swap(), invert_zw_unit(inst, qbar_p, order)
                             ).truncate_h(order)
    chk = inst.multiply(kappa, kappa_sw) - diag_one(inst)
    if not chk.truncate_h(order).verified_zero():
        raise CompatFailed("kappa kappa~ = 1 fails at truncation")
    # kappa^(-1/2) with unit constant term, in the chart-diagonal algebra
    u = kappa - diag_one(inst)
    half = [Q(1)]
    sqrt_inv = _diag_series(inst, u, _taylor_inv_sqrt, order)
    q_plus = inst.multiply(sqrt_inv, qbar_p)
    q_minus = inst.multiply(sqrt_inv, qbar_m)
    qratio = inst.multiply(q_plus, invert_zw_unit(inst, q_minus, order))
    qratio = qratio.copy_with(direction="w<<z")
    return QPair(q_plus, q_minus, qratio, kappa)


def _taylor_inv_sqrt(k):
    # coefficients of (1 + u)^(-1/2)
    from math import factorial
    num = Q(1)
    for j in range(k):
        num *= (Q(-1, 2) - j)
    return num / factorial(k)


def _divisible_by_diag(cells) -> bool:
    """All antidiagonal sums vanish <=> the coefficient function vanishes on
    z = w <=> divisible by (z - w) per chart block."""
    sums = {}
    for (key, exps), v in cells.items():
        if key[0] != key[1]:
            return False
        sums[(key, sum(exps))] = sums.get((key, sum(exps)), Q(0)) + v
    return all(v == 0 for v in sums.values())


def ug_relation_multipliers(kern: KernelSet):
    """The (A, B) pair of the e-e relation: A = psi- a0 (z-w),
    B = (q^{2(tau-phi)} - 1)(z-w) + q^{2(tau-phi)} psi+ a0 (z-w)."""
    inst = kern.inst
    one2 = ModeTensor.constant_one(2, inst.chart_ids)
    q2tp = kern.q_tau_phi()
    A = B = None
    for s in inst.chart_ids:
        d = zw_diff(inst, s)
        a0d = promote_finite_window(inst.multiply(kern.a0, d))
        As = kern.psi_minus.mul(a0d)
        Bs = (q2tp - one2).mul(d) + q2tp.mul(kern.psi_plus.mul(a0d))
        A = As if A is None else A + As
        B = Bs if B is None else B + Bs
    return A, B


# --------------------------------------------------------------------------- #
# the shuffle algebra
# --------------------------------------------------------------------------- #

@dataclass
class ShuffleElement:
    """Graded element of the shuffle realization: degree n -> arity-n tensor."""

    inst: object
    components: dict = field(default_factory=dict)
    direction: str = "iterated"

    def component(self, n):
        return self.components.get(n)

    def __add__(self, other):
        out = dict(self.components)
        for n, t in other.components.items():
            out[n] = out[n] + t if n in out else t
        return ShuffleElement(self.inst, out, self.direction)

    def same_known(self, other) -> bool:
        for n in set(self.components) | set(other.components):
            a, b = self.components.get(n), other.components.get(n)
            if a is None or b is None:
                if (a or b) is not None and not (a or b).known_cells_all_zero():
                    return False
                continue
            if not (a - b).known_cells_all_zero():
                return False
        return True


class ShuffleContext:
    """Shuffle products over one instance.

    The shuffle kernel is the swap of the structure function: the relation
    e(z) e(w) = q_struct(z, w) e(w) e(z) maps words to symmetrizations built
    with q = q+ / q- = q_struct(w, z), which is also what makes the q- product
    of a symmetrization totally antisymmetric.
    """

    def __init__(self, kern: KernelSet, degree_cap=None):
        self.kern = kern
        self.inst = kern.inst
        self.qfun = kern.qfun.swap()
        self.degree_cap = degree_cap if degree_cap is not None else kern.inst.trunc.degree
        self._qinv = None

    def q_inverse(self):
        if self._qinv is None:
            # q(z,w)^-1 = q(w,z) by the antisymmetry identity
            self._qinv = self.qfun.swap()
        return self._qinv

    def q_at(self, n, i, j):
        return self.qfun.embed(n, (i, j))

    # -- symmetrization -----------------------------------------------------
    def sym_q(self, eps: ModeTensor) -> ModeTensor:
        """S_q(eps) = sum_sigma eps(z_sigma(1),...) prod_{i<j, sigma(i)>sigma(j)} q(z_i,z_j)."""
        n = eps.arity
        if n > self.degree_cap + 1 and n > 3:
            raise DegreeCapExceeded(f"degree {n} beyond cap")
        out = None
        for sigma in permutations(range(n)):
            term = self._sym_term(eps, sigma, n)
            out = term if out is None else out + term
        return out

    def _sym_term(self, eps, sigma, n):
        # eps(z_sigma(1), ..., z_sigma(n)); each inversion i < j with
        # sigma(i) > sigma(j) crosses the variables z_sigma(j), z_sigma(i)
        # and contributes q(z_sigma(j), z_sigma(i)) (the variable-indexed
        # reading, which is the associative one and agrees with the n = 2
        # formula q(z1, z2)).
        inv_sigma = [0] * n
        for i, s in enumerate(sigma):
            inv_sigma[s] = i
        term = eps.permute(tuple(inv_sigma))
        for i in range(n):
            for j in range(i + 1, n):
                if sigma[i] > sigma[j]:
                    term = self.inst.multiply(term, self.q_at(n, sigma[j], sigma[i]))
        return term

    def sym_q_pm(self, eps: ModeTensor, qpair: QPair) -> ModeTensor:
        """Sym_q: inversions weighted by q+, non-inversions by q-; the
        freeness witness has leading term n! prod_{i<j}(z_i - z_j) eps_sym."""
        n = eps.arity
        out = None
        for sigma in permutations(range(n)):
            inv_sigma = [0] * n
            for i, s in enumerate(sigma):
                inv_sigma[s] = i
            term = eps.permute(tuple(inv_sigma))
            for i in range(n):
                for j in range(i + 1, n):
                    if sigma[i] > sigma[j]:
                        term = self.inst.multiply(
                            term, qpair.q_plus.embed(n, (sigma[j], sigma[i])))
                    else:
                        term = self.inst.multiply(
                            term, qpair.q_minus.embed(n, (sigma[i], sigma[j])))
            out = term if out is None else out + term
        return out

    # -- shuffle product ------------------------------------------------------
    def shuffle_mul(self, a: ShuffleElement, b: ShuffleElement) -> ShuffleElement:
        out = {}
        for n, ta in a.components.items():
            for m, tb in b.components.items():
                if n + m > max(self.degree_cap, 3):
                    raise DegreeCapExceeded(f"degree {n + m} beyond cap")
                t = self._shuffle_component(ta, tb, n, m)
                out[n + m] = out[n + m] + t if n + m in out else t
        return ShuffleElement(self.inst, out)

    def _shuffle_component(self, ta, tb, n, m):
        if n == 0 or m == 0:
            scal = ta if n == 0 else tb      # degree-0 components are scalars
            other = tb if n == 0 else ta
            return other.scale(scal)
        total = n + m
        out = None
        for first in combinations(range(total), n):
            sigma = [0] * total
            rest = [k for k in range(total) if k not in first]
            # sigma maps slot positions to variables: slot i -> sigma(i)
            for slot, var in enumerate(list(first) + rest):
                sigma[slot] = var
            term = self._sym_term(ta.outer(tb), tuple(sigma), total)
            out = term if out is None else out + term
        return out.scale(Q(factorial(n) * factorial(m), factorial(total)))

    # -- membership -------------------------------------------------------------
    def fo_membership(self, lam: ModeTensor, q_minus: ModeTensor) -> bool:
        """prod_{i<j} q-(z_i, z_j) lam is window-representable in k^(x)n
        and totally antisymmetric."""
        n = lam.arity
        prod = lam
        for i in range(n):
            for j in range(i + 1, n):
                prod = self.inst.multiply(prod, q_minus.embed(n, (i, j)))
        # window representability: some provable content must exist
        if not (prod.provable_cell_count() > 0 or prod.is_known_zero()):
            return False
        for sigma in permutations(range(n)):
            sign = _perm_sign(sigma)
            inv = [0] * n
            for i, s in enumerate(sigma):
                inv[s] = i
            d = prod - prod.permute(tuple(inv)).scale(sign)
            if not d.known_cells_all_zero():
                return False
        return True


def _perm_sign(sigma):
    sign = 1
    for i in range(len(sigma)):
        for j in range(i + 1, len(sigma)):
            if sigma[i] > sigma[j]:
                sign = -sign
    return sign


def shuffle_context(kern: KernelSet, degree_cap=None) -> ShuffleContext:
    return ShuffleContext(kern, degree_cap)


def sym_q(ctx: ShuffleContext, eps: ModeTensor) -> ModeTensor:
    return ctx.sym_q(eps)


def sym_q_full(ctx: ShuffleContext, parts) -> ModeTensor:
    """S_q of an outer product of arity-1 elements."""
    t = None
    for p in parts:
        t = p if t is None else t.outer(p)
    return ctx.sym_q(t)


def shuffle_mul(ctx: ShuffleContext, a: ShuffleElement, b: ShuffleElement) -> ShuffleElement:
    return ctx.shuffle_mul(a, b)


def fo_membership(ctx: ShuffleContext, lam: ModeTensor, q_minus: ModeTensor) -> bool:
    return ctx.fo_membership(lam, q_minus)
