"""Exact truncated series in the formal parameter hbar.

HScalar is a Laurent-truncated series sum_{k} c_k hbar^k with exact rational
coefficients, known for k <= order and unknown beyond.  All arithmetic is
exact below the truncation order and never silently extends precision: the
order of a product is min(order_a + val_b, order_b + val_a).

HScalarK extends HScalar coefficients by a commutative polynomial in central
symbols (K, and the slot-tagged K1, K2, K3 used inside tensor squares and
cubes).  Every central symbol enters structure constants only through
exp(hbar K d), so the total symbol degree of a monomial never exceeds the
hbar valuation of its coefficient; `check_central_degree` enforces this.
"""

from __future__ import annotations

from fractions import Fraction as Q
from math import factorial

from .errors import BadConstantTerm, PrecisionError

__all__ = ["Q", "HScalar", "HScalarK", "KSYM", "K1SYM", "K2SYM", "K3SYM"]

KSYM = "K"
K1SYM = "K1"
K2SYM = "K2"
K3SYM = "K3"

_INF = 10 ** 9  # effectively infinite order for exact constants


class HScalar:
    """Truncated Laurent series in hbar over Q."""

    __slots__ = ("lo", "coeffs", "order")

    def __init__(self, lo: int, coeffs, order: int):
        coeffs = [Q(c) for c in coeffs]
        # clip to order, strip zero margins
        if lo + len(coeffs) - 1 > order:
            coeffs = coeffs[: order - lo + 1]
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            lo += 1
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            lo = 0
        self.lo = lo
        self.coeffs = tuple(coeffs)
        self.order = order

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_rat(cls, r, order: int = _INF) -> "HScalar":
        return cls(0, [Q(r)], order)

    @classmethod
    def zero(cls, order: int = _INF) -> "HScalar":
        return cls(0, [], order)

    @classmethod
    def one(cls, order: int = _INF) -> "HScalar":
        return cls(0, [Q(1)], order)

    @classmethod
    def hbar(cls, power: int = 1, order: int = _INF) -> "HScalar":
        return cls(power, [Q(1)], order)

    # -- inspection --------------------------------------------------------
    def is_zero(self) -> bool:
        """True when every known coefficient vanishes."""
        return not self.coeffs

    def valuation(self) -> int:
        """hbar valuation; order + 1 when no known coefficient is nonzero."""
        return self.lo if self.coeffs else self.order + 1

    def coeff(self, k: int) -> Q:
        if k > self.order:
            raise PrecisionError(f"hbar^{k} coefficient unknown beyond order {self.order}")
        if self.lo <= k < self.lo + len(self.coeffs):
            return self.coeffs[k - self.lo]
        return Q(0)

    def known_items(self):
        for i, c in enumerate(self.coeffs):
            if c != 0:
                yield self.lo + i, c

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "HScalar") -> "HScalar":
        order = min(self.order, other.order)
        if self.is_zero():
            return other.truncate(order)
        if other.is_zero():
            return self.truncate(order)
        lo = min(self.lo, other.lo)
        hi = min(max(self.lo + len(self.coeffs), other.lo + len(other.coeffs)) - 1, order)
        out = [Q(0)] * (hi - lo + 1)
        for i, c in enumerate(self.coeffs):
            k = self.lo + i
            if k <= hi:
                out[k - lo] += c
        for i, c in enumerate(other.coeffs):
            k = other.lo + i
            if k <= hi:
                out[k - lo] += c
        return HScalar(lo, out, order)

    def __neg__(self) -> "HScalar":
        return HScalar(self.lo, [-c for c in self.coeffs], self.order)

    def __sub__(self, other: "HScalar") -> "HScalar":
        return self + (-other)

    def __mul__(self, other) -> "HScalar":
        if isinstance(other, (int, Q)):
            return HScalar(self.lo, [c * other for c in self.coeffs], self.order)
        # truncation never silently extends: the product is known to the
        # smaller of the operand orders
        order = min(self.order, other.order)
        if self.is_zero() or other.is_zero():
            return HScalar.zero(order)
        lo = self.lo + other.lo
        hi = min(lo + len(self.coeffs) + len(other.coeffs) - 2, order)
        if hi < lo:
            return HScalar.zero(order)
        out = [Q(0)] * (hi - lo + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                k = self.lo + i + other.lo + j
                if k <= hi:
                    out[k - lo] += a * b
        return HScalar(lo, out, order)

    __rmul__ = __mul__

    def shift(self, k: int) -> "HScalar":
        """Multiply by hbar^k (k may be negative)."""
        return HScalar(self.lo + k, list(self.coeffs), self.order + k)

    def truncate(self, order: int) -> "HScalar":
        if order >= self.order:
            return self
        return HScalar(self.lo, list(self.coeffs), order)

    def inverse(self) -> "HScalar":
        v = self.valuation()
        if v > self.order:
            raise BadConstantTerm("cannot invert a series with no known nonzero coefficient")
        c0 = self.coeff(v)
        n = self.order - v  # unit part known to this relative order
        # unit part u with u_0 = 1
        u = [self.coeff(v + k) / c0 for k in range(n + 1)]
        inv = [Q(0)] * (n + 1)
        inv[0] = Q(1)
        for k in range(1, n + 1):
            s = Q(0)
            for j in range(1, k + 1):
                s += u[j] * inv[k - j]
            inv[k] = -s
        return HScalar(-v, [c / c0 for c in inv], self.order - 2 * v)

    def divide_exact(self, other: "HScalar") -> "HScalar":
        return self * other.inverse()

    # -- series functionals -------------------------------------------------
    def _unit_compose(self, taylor) -> "HScalar":
        """sum_k taylor(k) * u^k for u = self with valuation >= 1."""
        if self.valuation() < 1:
            raise BadConstantTerm("argument must have zero constant term")
        order = self.order
        acc = HScalar.from_rat(taylor(0), order)
        power = HScalar.one(order)
        k = 1
        while k * self.valuation() <= order:
            power = power * self
            t = taylor(k)
            if t != 0:
                acc = acc + power * t
            k += 1
        return acc

    def exp(self) -> "HScalar":
        return self._unit_compose(lambda k: Q(1, factorial(k)))

    def ln1p(self) -> "HScalar":
        """ln(1 + self)."""
        return self._unit_compose(lambda k: Q(0) if k == 0 else Q((-1) ** (k + 1), k))

    def sqrt1p(self) -> "HScalar":
        """sqrt(1 + self)."""

        def binom_half(k):
            num = Q(1)
            x = Q(1, 2)
            for j in range(k):
                num *= (x - j)
            return num / factorial(k)

        return self._unit_compose(binom_half)

    # -- misc ---------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, HScalar):
            return NotImplemented
        return (self.lo, self.coeffs, self.order) == (other.lo, other.coeffs, other.order)

    def __hash__(self):
        return hash((self.lo, self.coeffs, self.order))

    def same_known(self, other: "HScalar") -> bool:
        """True when both series agree on their common known range."""
        return (self - other).is_zero()

    def __repr__(self):
        if self.is_zero():
            return f"O(h^{self.order + 1})"
        parts = []
        for k, c in self.known_items():
            parts.append(f"{c}" if k == 0 else f"{c}*h^{k}")
        return " + ".join(parts) + f" + O(h^{self.order + 1})"


def _merge_mono(m1, m2):
    d = {}
    for s, p in m1:
        d[s] = d.get(s, 0) + p
    for s, p in m2:
        d[s] = d.get(s, 0) + p
    return tuple(sorted((s, p) for s, p in d.items() if p))


class HScalarK:
    """Polynomial in central symbols with HScalar coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = {m: c for m, c in terms.items() if not c.is_zero()} or {}
        if not self.terms:
            # keep one zero entry to remember an order
            order = min((c.order for c in terms.values()), default=_INF)
            self.terms = {(): HScalar.zero(order)}

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_scalar(cls, s: HScalar) -> "HScalarK":
        return cls({(): s})

    @classmethod
    def from_rat(cls, r, order: int = _INF) -> "HScalarK":
        return cls({(): HScalar.from_rat(r, order)})

    @classmethod
    def zero(cls, order: int = _INF) -> "HScalarK":
        return cls({(): HScalar.zero(order)})

    @classmethod
    def one(cls, order: int = _INF) -> "HScalarK":
        return cls({(): HScalar.one(order)})

    @classmethod
    def symbol(cls, sym: str, order: int = _INF) -> "HScalarK":
        return cls({((sym, 1),): HScalar.one(order)})

    # -- inspection --------------------------------------------------------
    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.terms.values())

    def order(self) -> int:
        return min(c.order for c in self.terms.values())

    def valuation(self) -> int:
        return min((c.valuation() for c in self.terms.values()), default=_INF)

    def constant_part(self) -> HScalar:
        """Coefficient of the empty central monomial."""
        return self.terms.get((), HScalar.zero(self.order()))

    def coeff_mono(self, mono) -> HScalar:
        return self.terms.get(tuple(sorted(mono)), HScalar.zero(self.order()))

    def is_scalar(self) -> bool:
        return all(m == () or c.is_zero() for m, c in self.terms.items())

    def central_degree(self) -> int:
        return max((sum(p for _, p in m) for m, c in self.terms.items() if not c.is_zero()),
                   default=0)

    def check_central_degree(self) -> bool:
        """Each symbol power must be hbar-suppressed at least once."""
        for m, c in self.terms.items():
            deg = sum(p for _, p in m)
            if deg and not c.is_zero() and c.valuation() < deg:
                return False
        return True

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "HScalarK") -> "HScalarK":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return HScalarK(out)

    def __neg__(self) -> "HScalarK":
        return HScalarK({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "HScalarK") -> "HScalarK":
        return self + (-other)

    def __mul__(self, other) -> "HScalarK":
        if isinstance(other, (int, Q)):
            return HScalarK({m: c * other for m, c in self.terms.items()})
        if isinstance(other, HScalar):
            return HScalarK({m: c * other for m, c in self.terms.items()})
        out = {}
        for m1, c1 in self.terms.items():
            if c1.is_zero():
                continue
            for m2, c2 in other.terms.items():
                m = _merge_mono(m1, m2)
                c = c1 * c2
                out[m] = out[m] + c if m in out else c
        if not out:
            return HScalarK.zero(min(self.order(), other.order()))
        return HScalarK(out)

    __rmul__ = __mul__

    def truncate(self, order: int) -> "HScalarK":
        return HScalarK({m: c.truncate(order) for m, c in self.terms.items()})

    def shift(self, k: int) -> "HScalarK":
        return HScalarK({m: c.shift(k) for m, c in self.terms.items()})

    def inverse(self) -> "HScalarK":
        c0 = self.constant_part()
        if c0.valuation() != 0:
            raise BadConstantTerm("HScalarK inverse needs an invertible scalar constant term")
        u = self - HScalarK.from_scalar(c0)
        inv0 = HScalarK.from_scalar(c0.inverse())
        n = u * inv0
        # (c0 (1 + n/...)): geometric series in n, which has valuation >= 1
        if n.valuation() < 1 and not n.is_zero():
            raise BadConstantTerm("non-scalar constant term in HScalarK inverse")
        acc = HScalarK.one(self.order())
        power = HScalarK.one(self.order())
        k = 1
        while k <= self.order() + 1 and not power.is_zero():
            power = power * n
            if power.is_zero():
                break
            acc = acc + power * Q((-1) ** k)
            k += 1
        return acc * inv0

    # -- substitutions ------------------------------------------------------
    def subs(self, sym: str, value: "HScalarK") -> "HScalarK":
        """Substitute a central symbol by an HScalarK value."""
        out = HScalarK.zero(self.order())
        for m, c in self.terms.items():
            term = HScalarK({tuple((s, p) for s, p in m if s != sym): c})
            power = sum(p for s, p in m if s == sym)
            for _ in range(power):
                term = term * value
            out = out + term
        return out

    def rename_symbol(self, old: str, new: str) -> "HScalarK":
        out = {}
        for m, c in self.terms.items():
            nm = _merge_mono(tuple((new if s == old else s, p) for s, p in m), ())
            out[nm] = out[nm] + c if nm in out else c
        return HScalarK(out)

    def symbols(self):
        syms = set()
        for m, c in self.terms.items():
            if not c.is_zero():
                syms.update(s for s, _ in m)
        return syms

    # -- functionals ---------------------------------------------------------
    def _unit_compose(self, taylor) -> "HScalarK":
        if self.valuation() < 1:
            raise BadConstantTerm("argument must have hbar valuation >= 1")
        order = self.order()
        acc = HScalarK.from_rat(taylor(0), order)
        power = HScalarK.one(order)
        k = 1
        while k * max(self.valuation(), 1) <= order:
            power = power * self
            t = taylor(k)
            if t != 0:
                acc = acc + power * Q(t)
            k += 1
        return acc

    def exp(self) -> "HScalarK":
        return self._unit_compose(lambda k: Q(1, factorial(k)))

    # -- misc ----------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, HScalarK):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for m, c in sorted(self.terms.items()):
            if c.is_zero():
                continue
            sym = "*".join(f"{s}^{p}" if p > 1 else s for s, p in m)
            parts.append(f"({c!r})" + (f"*{sym}" if sym else ""))
        return " + ".join(parts)


def as_hsk(x, order: int = _INF) -> HScalarK:
    if isinstance(x, HScalarK):
        return x
    if isinstance(x, HScalar):
        return HScalarK.from_scalar(x)
    return HScalarK.from_rat(x, order)
