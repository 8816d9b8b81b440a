"""Windowed multi-variable mode tensors with provable-coefficient tracking.

A ModeTensor of arity n represents an element of a completed tensor power of
the function space k = (+)_s k_s, stored per chart tuple as a finite grid of
HScalarK coefficients together with a per-axis exponent window and two tail
flags.  A coefficient is *provable* when it lies inside the window or in a
tail flagged known-zero.  Every operation propagates windows conservatively:
a coefficient is stored only when it is exactly determined by provable data
of the operands.  This is what makes identity checks at truncation honest:
contributions from unknown tails shrink the provable window instead of
silently corrupting values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from itertools import product as iproduct
from math import factorial

from .errors import (BadConstantTerm, EmptyResultWindow, ExpansionDirectionMismatch,
                     IncompatibleShape, InsufficientPrecision)
from .hseries import HScalar, HScalarK, as_hsk

_BIG = 10 ** 9


@dataclass(frozen=True)
class AxisWindow:
    """Exponent interval [lo, hi] with known-zero tail flags."""

    lo: int
    hi: int
    zero_below: bool
    zero_above: bool

    def is_empty(self) -> bool:
        return self.lo > self.hi

    def is_known_zero(self) -> bool:
        return self.is_empty() and self.zero_below and self.zero_above

    def eff_lo(self) -> int:
        return -_BIG if self.zero_below else (self.lo if not self.is_empty() else _BIG)

    def eff_hi(self) -> int:
        return _BIG if self.zero_above else (self.hi if not self.is_empty() else -_BIG)

    def knows(self, e: int) -> bool:
        if self.is_empty():
            # boundary information is discarded for empty windows
            return self.zero_below and self.zero_above
        if self.lo <= e <= self.hi:
            return True
        if e < self.lo:
            return self.zero_below
        return self.zero_above


def _empty_win(zb: bool, za: bool) -> AxisWindow:
    # partial tail knowledge has no usable boundary once the window is empty
    if zb and za:
        return AxisWindow(0, -1, True, True)
    return AxisWindow(0, -1, False, False)


def _win_known_zero() -> AxisWindow:
    return AxisWindow(0, -1, True, True)


def _win_unknown() -> AxisWindow:
    return AxisWindow(0, -1, False, False)


def _mul_window(a: AxisWindow, b: AxisWindow) -> AxisWindow:
    if a.is_known_zero() or b.is_known_zero():
        return _win_known_zero()
    zb = a.zero_below and b.zero_below
    za = a.zero_above and b.zero_above
    alo, ahi = (a.lo, a.hi) if not a.is_empty() else (_BIG, -_BIG)
    blo, bhi = (b.lo, b.hi) if not b.is_empty() else (_BIG, -_BIG)
    lo_bound, hi_bound = -_BIG, _BIG
    if not a.zero_below:
        if not b.zero_above:
            return _empty_win(zb, za)
        lo_bound = max(lo_bound, alo + bhi)
    if not a.zero_above:
        if not b.zero_below:
            return _empty_win(zb, za)
        hi_bound = min(hi_bound, ahi + blo)
    if not b.zero_below:
        if not a.zero_above:
            return _empty_win(zb, za)
        lo_bound = max(lo_bound, blo + ahi)
    if not b.zero_above:
        if not a.zero_below:
            return _empty_win(zb, za)
        hi_bound = min(hi_bound, bhi + alo)
    lo = max(lo_bound, alo + blo)
    hi = min(hi_bound, ahi + bhi)
    if hi < lo:
        return _empty_win(zb, za)
    return AxisWindow(lo, hi, zb, za)


def _add_window(a: AxisWindow, b: AxisWindow) -> AxisWindow:
    if a.is_known_zero():
        return b
    if b.is_known_zero():
        return a
    zb = a.zero_below and b.zero_below
    za = a.zero_above and b.zero_above
    lo = max(a.eff_lo(), b.eff_lo())
    hi = min(a.eff_hi(), b.eff_hi())
    if lo > hi:
        return _empty_win(zb, za)
    finite_los = [w.lo for w in (a, b) if not w.is_empty()]
    finite_his = [w.hi for w in (a, b) if not w.is_empty()]
    if lo == -_BIG:
        lo = min(finite_los) if finite_los else 0
    if hi == _BIG:
        hi = max(finite_his) if finite_his else -1
    if hi < lo:
        return _empty_win(zb, za)
    return AxisWindow(lo, hi, zb, za)


class Block:
    """Coefficient grid of one chart tuple."""

    __slots__ = ("windows", "coeffs")

    def __init__(self, windows, coeffs=None):
        self.windows = tuple(windows)
        self.coeffs = {}
        if coeffs:
            for exps, c in coeffs.items():
                c = as_hsk(c)
                if not c.is_zero() and all(w.lo <= e <= w.hi
                                           for w, e in zip(self.windows, exps)):
                    self.coeffs[tuple(exps)] = c

    @property
    def arity(self):
        return len(self.windows)

    def knows(self, exps) -> bool:
        return all(w.knows(e) for w, e in zip(self.windows, exps))

    def coeff(self, exps) -> HScalarK:
        exps = tuple(exps)
        if not self.knows(exps):
            raise InsufficientPrecision(f"mode {exps} outside provable window")
        return self.coeffs.get(exps, HScalarK.zero())

    def is_known_zero(self) -> bool:
        return (all(w.zero_below and w.zero_above for w in self.windows)
                and all(c.is_zero() for c in self.coeffs.values()))

    @classmethod
    def known_zero(cls, arity):
        return cls([_win_known_zero()] * arity)

    @classmethod
    def unknown(cls, arity):
        return cls([_win_unknown()] * arity)


class ModeTensor:
    """Arity-n windowed tensor over the charts of one Frobenius instance."""

    __slots__ = ("arity", "charts", "blocks", "kind", "direction")

    def __init__(self, arity, charts, blocks, kind="k", direction=None):
        self.arity = arity
        self.charts = tuple(charts)
        self.blocks = {}
        for key in iproduct(self.charts, repeat=arity):
            self.blocks[key] = blocks.get(key) or Block.known_zero(arity)
        self.kind = kind
        self.direction = direction

    # -- constructors --------------------------------------------------------
    @classmethod
    def zeros(cls, arity, charts, kind="k"):
        return cls(arity, charts, {}, kind=kind)

    @classmethod
    def unknown(cls, arity, charts, kind="k"):
        return cls(arity, charts,
                   {key: Block.unknown(arity) for key in iproduct(charts, repeat=arity)},
                   kind=kind)

    @classmethod
    def monomial(cls, charts, chart, exp, coeff=1, kind="k"):
        """Arity-1 single mode c * t_chart^exp (zero on every other chart)."""
        blk = Block([AxisWindow(exp, exp, True, True)], {(exp,): as_hsk(coeff)})
        return cls(1, charts, {(chart,): blk}, kind=kind)

    @classmethod
    def constant_one(cls, arity, charts, kind="k"):
        """The function 1 (x) ... (x) 1."""
        blocks = {}
        for key in iproduct(charts, repeat=arity):
            win = [AxisWindow(0, 0, True, True)] * arity
            blocks[key] = Block(win, {(0,) * arity: HScalarK.one()})
        return cls(arity, charts, blocks, kind=kind)

    def copy_with(self, blocks=None, kind=None, direction=None):
        return ModeTensor(self.arity, self.charts,
                          blocks if blocks is not None else self.blocks,
                          kind=kind if kind is not None else self.kind,
                          direction=direction if direction is not None else self.direction)

    # -- inspection ------------------------------------------------------------
    def block(self, key) -> Block:
        return self.blocks[tuple(key)]

    def coeff(self, chart_key, exps) -> HScalarK:
        return self.blocks[tuple(chart_key)].coeff(exps)

    def knows(self, chart_key, exps) -> bool:
        return self.blocks[tuple(chart_key)].knows(exps)

    def is_known_zero(self) -> bool:
        return all(b.is_known_zero() for b in self.blocks.values())

    def known_cells_all_zero(self) -> bool:
        return all(c.is_zero() for b in self.blocks.values() for c in b.coeffs.values())

    def verified_zero(self) -> bool:
        """Known cells all vanish and the verification is not vacuous."""
        return self.known_cells_all_zero() and (
            self.provable_cell_count() > 0 or self.is_known_zero())

    def provable_cell_count(self) -> int:
        n = 0
        for b in self.blocks.values():
            cells = 1
            for w in b.windows:
                cells *= max(0, w.hi - w.lo + 1)
            n += cells
        return n

    def hbar_valuation(self) -> int:
        vals = [c.valuation() for b in self.blocks.values() for c in b.coeffs.values()
                if not c.is_zero()]
        return min(vals) if vals else _BIG

    def items(self):
        for key, b in self.blocks.items():
            for exps, c in b.coeffs.items():
                if not c.is_zero():
                    yield key, exps, c

    # -- direction / kind plumbing ----------------------------------------------
    def _join_direction(self, other):
        if self.direction is None:
            return other.direction
        if other.direction is None or other.direction == self.direction:
            return self.direction
        raise ExpansionDirectionMismatch(
            f"cannot combine expansions {self.direction!r} and {other.direction!r}")

    def _check_compatible(self, other):
        if self.arity != other.arity or self.charts != other.charts:
            raise IncompatibleShape("tensor operands have different shape")

    # -- linear structure ---------------------------------------------------------
    def __add__(self, other: "ModeTensor") -> "ModeTensor":
        self._check_compatible(other)
        direction = self._join_direction(other)
        blocks = {}
        for key in self.blocks:
            a, b = self.blocks[key], other.blocks[key]
            wins = [_add_window(wa, wb) for wa, wb in zip(a.windows, b.windows)]
            coeffs = {}
            for exps in set(a.coeffs) | set(b.coeffs):
                if all(w.lo <= e <= w.hi for w, e in zip(wins, exps)):
                    c = a.coeffs.get(exps, HScalarK.zero()) + b.coeffs.get(exps, HScalarK.zero())
                    coeffs[exps] = c
            blocks[key] = Block(wins, coeffs)
        return ModeTensor(self.arity, self.charts, blocks, kind=self.kind, direction=direction)

    def __neg__(self):
        blocks = {k: Block(b.windows, {e: -c for e, c in b.coeffs.items()})
                  for k, b in self.blocks.items()}
        return self.copy_with(blocks)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "ModeTensor":
        c = as_hsk(c)
        blocks = {k: Block(b.windows, {e: v * c for e, v in b.coeffs.items()})
                  for k, b in self.blocks.items()}
        return self.copy_with(blocks)

    def truncate_h(self, order: int) -> "ModeTensor":
        blocks = {k: Block(b.windows, {e: v.truncate(order) for e, v in b.coeffs.items()})
                  for k, b in self.blocks.items()}
        return self.copy_with(blocks)

    # -- pointwise multiplication ---------------------------------------------------
    def mul(self, other: "ModeTensor", kind=None) -> "ModeTensor":
        self._check_compatible(other)
        direction = self._join_direction(other)
        blocks = {}
        any_window = False
        for key in self.blocks:
            a, b = self.blocks[key], other.blocks[key]
            if a.is_known_zero() or b.is_known_zero():
                blocks[key] = Block.known_zero(self.arity)
                any_window = True
                continue
            wins = [_mul_window(wa, wb) for wa, wb in zip(a.windows, b.windows)]
            if any(w.is_empty() and not w.is_known_zero() for w in wins):
                # nothing provable in this block beyond flagged tails
                blocks[key] = Block(wins)
                continue
            any_window = True
            coeffs = {}
            for ea, ca in a.coeffs.items():
                for eb, cb in b.coeffs.items():
                    exps = tuple(x + y for x, y in zip(ea, eb))
                    if all(w.lo <= e <= w.hi for w, e in zip(wins, exps)):
                        c = ca * cb
                        if exps in coeffs:
                            coeffs[exps] = coeffs[exps] + c
                        else:
                            coeffs[exps] = c
            blocks[key] = Block(wins, coeffs)
        if not any_window:
            raise EmptyResultWindow("no provable coefficient survives the product")
        return ModeTensor(self.arity, self.charts, blocks,
                          kind=kind or self.kind, direction=direction)

    def __mul__(self, other):
        if isinstance(other, ModeTensor):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def pow(self, n: int) -> "ModeTensor":
        out = ModeTensor.constant_one(self.arity, self.charts, kind=self.kind)
        for _ in range(n):
            out = out.mul(self)
        return out

    # -- structural operations ---------------------------------------------------------
    def outer(self, other: "ModeTensor", kind=None) -> "ModeTensor":
        """Tensor product: arity adds."""
        if self.charts != other.charts:
            raise IncompatibleShape("outer product across different instances")
        arity = self.arity + other.arity
        blocks = {}
        for ka, a in self.blocks.items():
            for kb, b in other.blocks.items():
                wins = a.windows + b.windows
                coeffs = {}
                for ea, ca in a.coeffs.items():
                    for eb, cb in b.coeffs.items():
                        coeffs[ea + eb] = ca * cb
                blocks[ka + kb] = Block(wins, coeffs)
        return ModeTensor(arity, self.charts, blocks, kind=kind or self.kind,
                          direction=self.direction or other.direction)

    def permute(self, perm) -> "ModeTensor":
        """Axis permutation: new axis i carries old axis perm[i]."""
        blocks = {}
        for key, b in self.blocks.items():
            nk = tuple(key[perm[i]] for i in range(self.arity))
            wins = tuple(b.windows[perm[i]] for i in range(self.arity))
            coeffs = {tuple(e[perm[i]] for i in range(self.arity)): c
                      for e, c in b.coeffs.items()}
            blocks[nk] = Block(wins, coeffs)
        return ModeTensor(self.arity, self.charts, blocks, kind=self.kind, direction=None)

    def swap(self) -> "ModeTensor":
        if self.arity != 2:
            raise IncompatibleShape("swap needs arity 2")
        return self.permute((1, 0))

    def embed(self, arity, positions) -> "ModeTensor":
        """Place this tensor's axes at `positions` in an arity-`arity` tensor,
        filling the remaining axes with the constant function 1."""
        rest = [i for i in range(arity) if i not in positions]
        out = self
        for _ in rest:
            out = out.outer(ModeTensor.constant_one(1, self.charts))
        # current axis order: positions..., rest...; permute into place
        order = list(positions) + rest
        perm = [0] * arity
        for cur, tgt in enumerate(order):
            perm[tgt] = cur
        return out.permute(tuple(perm))

    def restrict(self, lo: int, hi: int) -> "ModeTensor":
        """Clip every axis window to [lo, hi] (tail knowledge is kept)."""
        blocks = {}
        for key, b in self.blocks.items():
            wins = []
            for w in b.windows:
                nlo, nhi = max(w.lo, lo), min(w.hi, hi)
                zb = w.zero_below and w.lo >= lo
                za = w.zero_above and w.hi <= hi
                wins.append(AxisWindow(nlo, nhi, zb, za) if nlo <= nhi
                            else AxisWindow(0, -1, zb, za))
            coeffs = {e: c for e, c in b.coeffs.items()
                      if all(lo <= x <= hi for x in e)}
            blocks[key] = Block(wins, coeffs)
        return self.copy_with(blocks)

    # -- per-axis linear operators -----------------------------------------------------
    def apply_axis(self, axis: int, op, band) -> "ModeTensor":
        """Apply a chart-local linear operator along one axis.

        op(chart, exp) returns a list of (new_exp, factor) pairs with
        new_exp - exp within `band` = (dlo, dhi).
        """
        dlo, dhi = band
        blocks = {}
        for key, b in self.blocks.items():
            chart = key[axis]
            w = b.windows[axis]
            if w.is_known_zero():
                blocks[key] = Block(b.windows)
                continue
            lo = w.eff_lo() + dhi if not w.zero_below else w.lo + dlo
            hi = w.eff_hi() + dlo if not w.zero_above else w.hi + dhi
            lo = max(lo, w.lo + dlo)
            hi = min(hi, w.hi + dhi)
            nw = (AxisWindow(lo, hi, w.zero_below, w.zero_above) if lo <= hi
                  else AxisWindow(0, -1, w.zero_below, w.zero_above))
            wins = list(b.windows)
            wins[axis] = nw
            coeffs = {}
            for exps, c in b.coeffs.items():
                for ne, f in op(chart, exps[axis]):
                    nf = c * f if not isinstance(f, (int, Q)) else c * f
                    if nf.is_zero():
                        continue
                    nexps = exps[:axis] + (ne,) + exps[axis + 1:]
                    if nw.lo <= ne <= nw.hi:
                        coeffs[nexps] = coeffs[nexps] + nf if nexps in coeffs else nf
            blocks[key] = Block(wins, coeffs)
        return self.copy_with(blocks)

    # -- series functionals -------------------------------------------------------------
    def _power_series(self, taylor, order=None, max_terms=64) -> "ModeTensor":
        x = self if order is None else self.truncate_h(order)
        horder = min([c.order() for _, _, c in x.items()] or [_BIG])
        acc = ModeTensor.constant_one(x.arity, x.charts, kind=x.kind).scale(
            HScalarK.from_rat(taylor(0), horder))
        power = ModeTensor.constant_one(x.arity, x.charts, kind=x.kind)
        val = x.hbar_valuation()
        for k in range(1, max_terms + 1):
            if 1 <= val and k * val > horder:
                return acc
            power = power.mul(x)
            if power.known_cells_all_zero():
                return acc
            t = taylor(k)
            if t != 0:
                acc = acc + power.scale(Q(t))
        raise BadConstantTerm("series functional argument is neither hbar-suppressed "
                              "nor nilpotent at this truncation")

    def exp(self, order=None) -> "ModeTensor":
        return self._power_series(lambda k: Q(1, factorial(k)), order)

    def ln1p(self, order=None) -> "ModeTensor":
        return self._power_series(lambda k: Q(0) if k == 0 else Q((-1) ** (k + 1), k), order)

    def sqrt1p(self, order=None) -> "ModeTensor":
        def binom_half(k):
            num = Q(1)
            for j in range(k):
                num *= (Q(1, 2) - j)
            return num / factorial(k)
        return self._power_series(binom_half, order)

    def inv_unit(self, order=None) -> "ModeTensor":
        """Inverse of 1 + u where self = 1 + u, u hbar-suppressed or nilpotent."""
        one = ModeTensor.constant_one(self.arity, self.charts, kind=self.kind)
        return (self - one)._power_series(lambda k: Q((-1) ** k), order)

    # -- comparisons -----------------------------------------------------------------------
    def same_known(self, other: "ModeTensor") -> bool:
        return (self - other).known_cells_all_zero()

    def __repr__(self):
        items = list(self.items())
        if not items:
            return f"<ModeTensor arity={self.arity} zero/unknown>"
        body = ", ".join(f"{k}{e}:{c!r}" for k, e, c in items[:6])
        more = "" if len(items) <= 6 else f" ... ({len(items)} cells)"
        return f"<ModeTensor arity={self.arity} {body}{more}>"


@dataclass
class ChartSeries:
    """One chart component of an arity-1 tensor (a view, for residues)."""

    chart: str
    window: AxisWindow
    coeffs: dict


def chart_series(x: ModeTensor, chart: str) -> ChartSeries:
    if x.arity != 1:
        raise IncompatibleShape("chart_series needs an arity-1 tensor")
    b = x.blocks[(chart,)]
    return ChartSeries(chart, b.windows[0], {e[0]: c for e, c in b.coeffs.items()})


def residue_series(x: ChartSeries, density_coeff, density_exp: int) -> HScalarK:
    """Coefficient extraction res(x * density) with density = c * t^e dt.

    The residue picks the t^(-1) mode of x * c t^e, i.e. c * x_{-1-e}.
    """
    target = -1 - density_exp
    if not x.window.knows(target):
        raise InsufficientPrecision(
            f"residue mode {target} on chart {x.chart} outside provable window")
    return x.coeffs.get(target, HScalarK.zero()) * as_hsk(density_coeff)
