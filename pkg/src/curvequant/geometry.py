"""Concrete Frobenius/curve instances.

An instance packages the charts of k = (+)_s k_s, the local densities of the
differential, the derivation d = d/omega, the Lagrangian pair (R, Lambda)
with dual bases, the mode-block split table and the residue pairing.

Built-ins:

* ``rational``  X = P^1, omega = dz, S = {inf}.  Local coordinate t = 1/z,
  so omega = -t^-2 dt and d = -t^2 d/dt.  R = C[z] = C[t^-1],
  Lambda = t C[[t]].
* ``trig``      X = P^1, omega = dz/z, S = {0, inf}.  Charts z (at 0) and
  w = 1/z (at inf); densities z^-1 and -w^-1; d = z d/dz.  R = C[z, z^-1]
  embedded diagonally, Lambda = z C[[z]] (+) w C[[w]] (+) C u with
  u = ((1,0) - (0,1))/2.
* ``finite(m)`` the Frobenius algebra C[t]/t^m with theta = coefficient of
  t^(m-1), R0 = span{t^ceil(m/2) .. t^(m-1)} (m even), derivation 0.

The orientation nu of the dual-basis pairing <e^i, e_j> = nu delta_ij is not
pinned down by residue conventions alone; the builder selects the sign for
which gamma = (d (x) 1)a0 - a0^2 lands in R (x) R on the window and records
it on the instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Q

from .config import Truncation
from .errors import (BadDifferential, IncompatibleShape, InsufficientPrecision,
                     MembershipFailed, NotLagrangian)
from .hseries import HScalar, HScalarK, as_hsk
from .tensors import (AxisWindow, Block, ModeTensor, chart_series, residue_series)

__all__ = ["Chart", "FrobeniusInstance", "DualBasisPair", "build_instance"]


@dataclass(frozen=True)
class Chart:
    """One local field k_s with its omega density and derivation data.

    residue_s(f omega) = omega_coeff * [t^(-1-omega_exp)] f
    d(t^n) = deriv_coeff * n * t^(n + deriv_exp - 1); deriv_coeff 0 for the
    derivation-free Frobenius variant.
    nilpotent_order: exponents >= this vanish identically (finite variant).
    """

    cid: str
    coord: str
    omega_coeff: Q
    omega_exp: int
    deriv_coeff: Q
    deriv_exp: int
    nilpotent_order: int | None = None


class FrobeniusInstance:
    def __init__(self, name, charts, trunc: Truncation):
        self.name = name
        self.charts = {c.cid: c for c in charts}
        self.chart_ids = tuple(c.cid for c in charts)
        self.trunc = trunc
        self.nu = Q(1)          # orientation, fixed by finish_build()
        self._r_basis = {}      # i -> KElement (arity-1 ModeTensor)
        self._l_basis = {}      # i -> KElement
        self._cache = {}

    # ----------------------------------------------------------------- modes
    def zero_k(self) -> ModeTensor:
        return ModeTensor.zeros(1, self.chart_ids)

    def one_k(self) -> ModeTensor:
        return ModeTensor.constant_one(1, self.chart_ids)

    def mode(self, chart, exp, coeff=1) -> ModeTensor:
        return ModeTensor.monomial(self.chart_ids, chart, exp, coeff)

    # subclasses fill these ---------------------------------------------------
    def r_element(self, i: int) -> ModeTensor:
        raise NotImplementedError

    def l_element(self, i: int) -> ModeTensor:
        """nu-normalized dual of r_element: <e^i, e_j> = nu delta_ij."""
        raise NotImplementedError

    def r_range(self):
        """Indices i of R-basis elements representable on the window."""
        raise NotImplementedError

    def l_range(self):
        return self.r_range()

    def r_index_of_product(self, i, j):
        """Index set decomposition of e^i * e^j in the R basis (exact)."""
        raise NotImplementedError

    def split_blocks(self):
        """Iterate mode blocks [(chart, exp), ...] with R/Lambda change of basis."""
        raise NotImplementedError

    # ------------------------------------------------------------- operations
    def multiply(self, f: ModeTensor, g: ModeTensor) -> ModeTensor:
        out = f.mul(g)
        self._reduce_nilpotent(out)
        return out

    def _reduce_nilpotent(self, x: ModeTensor):
        for key, blk in x.blocks.items():
            for axis, cid in enumerate(key):
                n = self.charts[cid].nilpotent_order
                if n is None:
                    continue
                drop = [e for e in blk.coeffs if e[axis] >= n]
                for e in drop:
                    del blk.coeffs[e]
                w = blk.windows[axis]
                wins = list(blk.windows)
                wins[axis] = AxisWindow(w.lo, min(w.hi, n - 1), w.zero_below, True)
                blk.windows = tuple(wins)

    def residue_total(self, f: ModeTensor) -> HScalarK:
        """sum_s res_s(f omega) for an arity-1 tensor."""
        total = HScalarK.zero()
        for cid, ch in self.charts.items():
            cs = chart_series(f, cid)
            total = total + residue_series(cs, ch.omega_coeff, ch.omega_exp)
        return total

    def residue_axis(self, f: ModeTensor, axis: int) -> ModeTensor:
        """Apply sum_s res_s(. omega) along one axis of an arity-n tensor."""
        if f.arity < 2:
            raise IncompatibleShape("use residue_total for arity 1")
        out = None
        arity = f.arity - 1
        for cid, ch in self.charts.items():
            target = -1 - ch.omega_exp
            blocks = {}
            ok = True
            for key, blk in f.blocks.items():
                if key[axis] != cid:
                    continue
                w = blk.windows[axis]
                nk = key[:axis] + key[axis + 1:]
                if not w.knows(target):
                    ok = False
                    blocks[nk] = Block.unknown(arity)
                    continue
                wins = blk.windows[:axis] + blk.windows[axis + 1:]
                coeffs = {}
                for exps, c in blk.coeffs.items():
                    if exps[axis] == target:
                        ne = exps[:axis] + exps[axis + 1:]
                        v = c * ch.omega_coeff
                        coeffs[ne] = coeffs[ne] + v if ne in coeffs else v
                blocks[nk] = Block(wins, coeffs)
            part = ModeTensor(arity, self.chart_ids, blocks, kind="k")
            out = part if out is None else out + part
        return out

    def pairing_k(self, f: ModeTensor, g: ModeTensor) -> HScalarK:
        """<f, g>_k = sum_s res_s(f g omega)."""
        return self.residue_total(self.multiply(f, g))

    def pairing_axis(self, t: ModeTensor, axis: int, g: ModeTensor) -> ModeTensor:
        """Pair one axis of an arity-n tensor against a k element."""
        emb = g.embed(t.arity, (axis,))
        return self.residue_axis(self.multiply_raw(t, emb), axis)

    def multiply_raw(self, f, g):
        out = f.mul(g)
        self._reduce_nilpotent(out)
        return out

    # derivation, T and exponentials ------------------------------------------
    def deriv(self, f: ModeTensor, axis: int = 0) -> ModeTensor:
        def op(cid, e):
            ch = self.charts[cid]
            if ch.deriv_coeff == 0:
                return []
            return [(e + ch.deriv_exp - 1, Q(e) * ch.deriv_coeff)]
        band = self._deriv_band()
        return f.apply_axis(axis, op, band)

    def _deriv_band(self):
        shifts = [ch.deriv_exp - 1 for ch in self.charts.values()]
        return (min(shifts), max(shifts))

    def op_T(self, f: ModeTensor, axis: int = 0, order: int | None = None) -> ModeTensor:
        """T = sh(h d)/(h d) = sum_m (h d)^(2m) / (2m+1)!."""
        order = order if order is not None else self.trunc.nh
        out = f
        power = f
        m = 0
        fact = 1
        while True:
            m += 1
            if 2 * m > order:
                break
            power = self.deriv(self.deriv(power, axis), axis)
            fact = fact * (2 * m) * (2 * m + 1)
            term = power.scale(HScalar(2 * m, [Q(1, fact)], order))
            out = out + term
        return out

    def exp_c_deriv(self, f: ModeTensor, c: HScalarK, axis: int = 0) -> ModeTensor:
        """exp(c d) f with c of positive hbar valuation (e.g. c = +-hbar K)."""
        if c.valuation() < 1:
            raise IncompatibleShape("exp(c d) needs hbar-suppressed c")
        order = c.order()
        out = f
        power = f
        cfac = HScalarK.one(order)
        k = 0
        fact = 1
        while (k + 1) * c.valuation() <= order:
            k += 1
            fact *= k
            power = self.deriv(power, axis)
            cfac = cfac * c
            out = out + power.scale(cfac * Q(1, fact))
        return out

    # R/Lambda split -----------------------------------------------------------
    def split_RL(self, x: ModeTensor):
        """x = x_R + x_Lambda on the window; exact block solve."""
        if x.arity != 1:
            raise IncompatibleShape("split_RL is defined on k elements")
        xr = self.zero_k()
        xl = self.zero_k()
        consumed = set()
        for block in self.split_blocks():
            modes = block["modes"]          # [(chart, exp), ...]
            if not any(self._mode_known_nonzero(x, m) for m in modes):
                continue
            vals = []
            for cid, e in modes:
                w = x.blocks[(cid,)].windows[0]
                if not w.knows(e):
                    raise InsufficientPrecision(
                        f"split window cuts mode block at ({cid}, {e})")
                vals.append(x.blocks[(cid,)].coeffs.get((e,), HScalarK.zero()))
            rpart, lpart = block["solve"](vals)
            xr = xr + rpart
            xl = xl + lpart
            consumed.update(modes)
        # remaining known-nonzero modes not covered by the table are an error
        for key, blk, in ((k, b) for k, b in x.blocks.items()):
            for exps, c in blk.coeffs.items():
                if not c.is_zero() and (key[0], exps[0]) not in consumed:
                    raise InsufficientPrecision(
                        f"mode ({key[0]}, {exps[0]}) outside the split table")
        return xr, xl

    def proj_R(self, x):
        return self.split_RL(x)[0]

    def proj_L(self, x):
        return self.split_RL(x)[1]

    def _mode_known_nonzero(self, x, mode):
        cid, e = mode
        c = x.blocks[(cid,)].coeffs.get((e,))
        return c is not None and not c.is_zero()

    # dual bases ---------------------------------------------------------------
    def dual_pair(self) -> "DualBasisPair":
        return DualBasisPair(self)

    def finish_build(self):
        """Fix the orientation nu by the gamma membership test."""
        from .kernels import gamma_kernel, rr_membership
        for nu in (Q(1), Q(-1)):
            self.nu = nu
            self._cache.clear()
            g = gamma_kernel(self)
            if rr_membership(self, g):
                return self
        raise MembershipFailed("no orientation makes gamma land in R (x) R")


class DualBasisPair:
    """Window dual bases of R and Lambda plus the epsilon extension to k.

    eps_i = e_i, eps^i = e^i for i >= 0; eps_i = e^(-i-1), eps^i = e_(-i-1)
    for i < 0; then <eps^i, eps_j> = nu delta_ij across the whole window.
    """

    def __init__(self, inst: FrobeniusInstance):
        self.inst = inst

    def e_upper(self, i):
        return self.inst.r_element(i)

    def e_lower(self, i):
        return self.inst.l_element(i)

    def eps_range(self):
        r = list(self.inst.r_range())
        return [-i - 1 for i in reversed(r)] + r

    def eps_upper(self, i):
        return self.e_upper(i) if i >= 0 else self.e_lower(-i - 1)

    def eps_lower(self, i):
        return self.e_lower(i) if i >= 0 else self.e_upper(-i - 1)

    def expand_in_eps_lower(self, x: ModeTensor, need_all=True):
        """Coordinates of x in the eps_i basis: x = sum_i c_i eps_i.

        c_i = nu^-1 <x, eps^i>.  When need_all, verify the expansion
        reproduces x on the window.
        """
        inst = self.inst
        coords = {}
        acc = inst.zero_k()
        for i in self.eps_range():
            c = inst.pairing_k(x, self.eps_upper(i)) * (1 / inst.nu)
            if not c.is_zero():
                coords[i] = c
                acc = acc + self.eps_lower(i).scale(c)
        if need_all and not (x - acc).known_cells_all_zero():
            raise InsufficientPrecision("element does not expand on the eps window basis")
        return coords

    def expand_in_r(self, x: ModeTensor, need_all=True):
        """x = sum_i c_i e^i with c_i = nu^-1 <x, e_i> (valid for x in R-span)."""
        inst = self.inst
        coords = {}
        acc = inst.zero_k()
        for i in inst.r_range():
            c = inst.pairing_k(x, self.e_lower(i)) * (1 / inst.nu)
            if not c.is_zero():
                coords[i] = c
                acc = acc + self.e_upper(i).scale(c)
        if need_all and not (x - acc).known_cells_all_zero():
            raise MembershipFailed("element does not expand on the R window basis")
        return coords


# --------------------------------------------------------------------------- #
# builders
# --------------------------------------------------------------------------- #

class RationalInstance(FrobeniusInstance):
    """X = P^1, omega = dz, S = {inf}; single chart t = 1/z."""

    def __init__(self, trunc):
        super().__init__("rational", [Chart("inf", "t", Q(-1), -2, Q(-1), 2)], trunc)

    def r_range(self):
        return range(0, self.trunc.window)

    def r_element(self, i):
        # e^i = z^i = t^-i
        return self.mode("inf", -i)

    def l_element(self, i):
        # dual of t^-i: nu * (-1) * t^(i+1)  (res_inf(t^(m-i-2)) picks m = i+1)
        return self.mode("inf", i + 1, -self.nu)

    def r_index_of_product(self, i, j):
        return {i + j: Q(1)}

    def split_blocks(self):
        blocks = []
        M = self.trunc.window
        for e in range(-M, M + 2):
            cid = "inf"
            def solve(vals, e=e):
                v = vals[0]
                r = self.mode("inf", e, v) if e <= 0 else self.zero_k()
                l = self.mode("inf", e, v) if e > 0 else self.zero_k()
                return r, l
            blocks.append({"modes": [(cid, e)], "solve": solve})
        return blocks


class TrigInstance(FrobeniusInstance):
    """X = P^1, omega = dz/z, S = {0, inf}; charts z and w = 1/z."""

    def __init__(self, trunc):
        super().__init__("trig", [Chart("0", "z", Q(1), -1, Q(1), 1),
                                  Chart("inf", "w", Q(-1), -1, Q(-1), 1)], trunc)

    # R-basis enumeration: index 0 -> 1; 2a-1 -> z^-a; 2a -> z^a
    def r_exponent(self, i):
        if i == 0:
            return 0
        a = (i + 1) // 2
        return -a if i % 2 == 1 else a

    def r_range(self):
        # exponents -W/2 .. W/2, symmetric
        return range(0, 2 * (self.trunc.window // 2) + 1)

    def r_element(self, i):
        n = self.r_exponent(i)
        # z^n is (z^n, w^-n) diagonally
        return self.mode("0", n) + self.mode("inf", -n)

    def l_element(self, i):
        nu = self.nu
        if i == 0:
            # nu * ((1,0) - (0,1)) / 2
            return self.mode("0", 0, Q(1, 2) * nu) + self.mode("inf", 0, Q(-1, 2) * nu)
        a = (i + 1) // 2
        if i % 2 == 1:
            return self.mode("0", a, nu)      # dual of z^-a
        return self.mode("inf", a, -nu)       # dual of z^a

    def r_index_of_product(self, i, j):
        n = self.r_exponent(i) + self.r_exponent(j)
        if n == 0:
            return {0: Q(1)}
        idx = 2 * (-n) - 1 if n < 0 else 2 * n
        return {idx: Q(1)}

    def split_blocks(self):
        blocks = []
        M = self.trunc.window
        nu_free_one = self.one_k()  # (1,1)

        def solve0(vals):
            a, b = vals  # components on (z^0, w^0)
            # (a,b) = alpha (1,1) + beta ((1,0)-(0,1))/2 * 2 ... solve:
            alpha = (a + b) * Q(1, 2)
            r = nu_free_one.scale(alpha)
            l = (self.mode("0", 0, Q(1, 2)) + self.mode("inf", 0, Q(-1, 2))).scale(a - b)
            return r, l

        blocks.append({"modes": [("0", 0), ("inf", 0)], "solve": solve0})
        for n in range(1, M + 1):
            def solve_n(vals, n=n):
                a, b = vals  # coefficients of (z^n, 0) and (0, w^-n)
                # (0, w^-n) = z^n_diag - (z^n, 0); (z^n, 0) in Lambda
                r = (self.mode("0", n) + self.mode("inf", -n)).scale(b)
                l = self.mode("0", n).scale(a - b)
                return r, l
            blocks.append({"modes": [("0", n), ("inf", -n)], "solve": solve_n})

            def solve_mn(vals, n=n):
                a, b = vals  # coefficients of (z^-n, 0) and (0, w^n)
                r = (self.mode("0", -n) + self.mode("inf", n)).scale(a)
                l = self.mode("inf", n).scale(b - a)
                return r, l
            blocks.append({"modes": [("0", -n), ("inf", n)], "solve": solve_mn})
        return blocks


class FiniteInstance(FrobeniusInstance):
    """Frobenius algebra C[t]/t^m, theta = [t^(m-1)], derivation 0 (m even)."""

    def __init__(self, trunc, m=2):
        if m % 2 != 0:
            raise NotLagrangian(f"finite({m}): the monomial half-window is Lagrangian "
                                "only for even m")
        self.m = m
        super().__init__(f"finite({m})",
                         [Chart("t", "t", Q(1), -m, Q(0), 0, nilpotent_order=m)], trunc)

    def r_range(self):
        return range(0, self.m // 2)

    def r_element(self, i):
        if i >= self.m // 2:
            return self.zero_k()
        return self.mode("t", self.m // 2 + i)

    def l_element(self, i):
        if i >= self.m // 2:
            return self.zero_k()
        return self.mode("t", self.m // 2 - 1 - i, self.nu)

    def r_index_of_product(self, i, j):
        # t^(m/2+i) t^(m/2+j) = t^(m+i+j) = 0 in C[t]/t^m
        return {}

    def split_blocks(self):
        blocks = []
        for e in range(0, self.m):
            def solve(vals, e=e):
                v = vals[0]
                r = self.mode("t", e, v) if e >= self.m // 2 else self.zero_k()
                l = self.mode("t", e, v) if e < self.m // 2 else self.zero_k()
                return r, l
            blocks.append({"modes": [("t", e)], "solve": solve})
        return blocks


def build_instance(spec: str, trunc: Truncation | None = None, finite_m: int = 2,
                   select_orientation=True) -> FrobeniusInstance:
    trunc = trunc or Truncation()
    if spec == "rational":
        inst = RationalInstance(trunc)
    elif spec == "trig":
        inst = TrigInstance(trunc)
    elif spec == "finite":
        inst = FiniteInstance(trunc, finite_m)
    else:
        raise BadDifferential(f"unknown instance spec {spec!r}")
    if select_orientation:
        inst.finish_build()
    return inst


# --------------------------------------------------------------------------- #
# verification
# --------------------------------------------------------------------------- #

def verify_lagrangian(inst: FrobeniusInstance, M: int | None = None) -> dict:
    """Isotropy of R and Lambda plus truncated maximality on the window."""
    M = M if M is not None else inst.trunc.window
    dp = inst.dual_pair()
    idx = [i for i in inst.r_range() if i < M]
    report = {"instance": inst.name, "window": M, "checks": [], "passed": True}

    def check(name, ok, detail=""):
        report["checks"].append({"name": name, "passed": bool(ok), "detail": detail})
        if not ok:
            report["passed"] = False

    iso_r = all(inst.pairing_k(dp.e_upper(i), dp.e_upper(j)).is_zero()
                for i in idx for j in idx)
    check("R isotropic", iso_r)
    iso_l = all(inst.pairing_k(dp.e_lower(i), dp.e_lower(j)).is_zero()
                for i in idx for j in idx)
    check("Lambda isotropic", iso_l)
    dual = all((inst.pairing_k(dp.e_upper(i), dp.e_lower(j))
                - HScalarK.from_rat(inst.nu * (1 if i == j else 0))).is_zero()
               for i in idx for j in idx)
    check("<e^i, e_j> = nu delta_ij", dual)
    eps = [i for i in dp.eps_range() if -M <= i < M]
    eps_dual = all((inst.pairing_k(dp.eps_upper(i), dp.eps_lower(j))
                    - HScalarK.from_rat(inst.nu * (1 if i == j else 0))).is_zero()
                   for i in eps for j in eps)
    check("<eps^i, eps_j> = nu delta_ij", eps_dual)
    # truncated maximality: Gram of R-window vs Lambda-window (k/R representatives)
    gram = [[inst.pairing_k(dp.e_upper(i), dp.e_lower(j)).constant_part().coeff(0)
             for j in idx] for i in idx]
    check("maximality Gram invertible", _det_nonzero(gram),
          "signed permutation at leading order")
    return report


def _det_nonzero(m) -> bool:
    n = len(m)
    m = [row[:] for row in m]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return False
        m[col], m[piv] = m[piv], m[col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] / m[col][col]
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return True
