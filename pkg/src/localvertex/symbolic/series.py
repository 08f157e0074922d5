"""Truncated q-Laurent series with exact coefficients.

``QSeries`` stores coefficients for q^low .. q^order inclusive; everything
above ``order`` is untrusted and everything below ``low`` is exactly zero.
Coefficients are duck-typed through a small ring adapter so the same class
serves integer generating series (Fraction coefficients) and partition
functions (RationalFunction coefficients).
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import NonUnitConstantTerm, NonzeroConstantTerm
from .poly import VarSpace
from .ratfunc import RationalFunction

_ONE = Fraction(1)


class FractionRing:
    """Coefficient adapter for plain rational numbers."""

    def zero(self):
        return Fraction(0)

    def one(self):
        return _ONE

    def is_zero(self, c):
        return c == 0

    def is_one(self, c):
        return c == 1

    def eq(self, a, b):
        return a == b

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise NonUnitConstantTerm("zero lowest coefficient")
        return 1 / a

    def scalar(self, a, f: Fraction):
        return a * f

    def frobenius(self, a, n: int):
        return a

    def to_json(self, a):
        return {"num": [{"c": _fs(a), "m": {}}] if a else [],
                "den": [{"c": "1", "m": {}}]}

    def from_json(self, d):
        num = sum(Fraction(t["c"]) for t in d["num"]) if d["num"] else Fraction(0)
        den = sum(Fraction(t["c"]) for t in d["den"])
        return num / den

    to_cache_json = to_json
    from_cache_json = from_json

    def __eq__(self, other):
        return isinstance(other, FractionRing)

    def __hash__(self):
        return hash("FractionRing")


def _fs(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


class RFRing:
    """Coefficient adapter for rational functions over a fixed alphabet."""

    def __init__(self, space: VarSpace):
        self.space = space

    def zero(self):
        return RationalFunction.zero(self.space)

    def one(self):
        return RationalFunction.one(self.space)

    def is_zero(self, c):
        return c.is_zero()

    def is_one(self, c):
        return c.is_one()

    def eq(self, a, b):
        return a.equals(b)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return a * -1

    def inv(self, a):
        if a.is_zero():
            raise NonUnitConstantTerm("zero lowest coefficient")
        return a.inverse()

    def scalar(self, a, f: Fraction):
        return a * f

    def frobenius(self, a, n: int):
        return a.scale_exponents(n)

    def to_json(self, a):
        return a.to_json()

    def from_json(self, d):
        return RationalFunction.from_json(self.space, d)

    def to_cache_json(self, a):
        return a.to_cache_json()

    def from_cache_json(self, d):
        return RationalFunction.from_cache_json(self.space, d)

    def __eq__(self, other):
        return isinstance(other, RFRing) and self.space is other.space

    def __hash__(self):
        return hash(("RFRing", self.space.names))


FRACTIONS = FractionRing()


class QSeries:
    __slots__ = ("ring", "low", "order", "coeffs")

    def __init__(self, ring, low: int, order: int, coeffs: list):
        assert len(coeffs) == order - low + 1, "coefficient window mismatch"
        self.ring = ring
        self.low = low
        self.order = order
        self.coeffs = coeffs

    # -- constructors ---------------------------------------------------
    @staticmethod
    def zero(ring, order: int) -> "QSeries":
        return QSeries(ring, 0, order, [ring.zero()] * (order + 1)) if order >= 0 \
            else QSeries(ring, 0, order, [])

    @staticmethod
    def one(ring, order: int) -> "QSeries":
        s = QSeries.zero(ring, order)
        if order >= 0:
            s.coeffs[0] = ring.one()
        return s

    @staticmethod
    def from_terms(ring, terms: dict, order: int) -> "QSeries":
        """terms: q-exponent -> coefficient (exponents may be negative)."""
        low = min(list(terms) + [0])
        s = QSeries(ring, low, order, [ring.zero()] * (order - low + 1))
        for n, c in terms.items():
            if n <= order:
                s.coeffs[n - low] = c
        return s

    @staticmethod
    def q_power(ring, n: int, order: int, coeff=None) -> "QSeries":
        return QSeries.from_terms(ring, {n: coeff if coeff is not None else ring.one()}, order)

    # -- access ----------------------------------------------------------
    def coeff(self, n):
        if n < self.low:
            return self.ring.zero()
        if n > self.order:
            raise IndexError(f"q^{n} beyond trusted order {self.order}")
        return self.coeffs[n - self.low]

    def valuation(self):
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                return self.low + i
        return None

    def is_zero(self):
        return self.valuation() is None

    def normalized(self) -> "QSeries":
        """Strip exactly-zero leading coefficients (raises ``low``)."""
        v = self.valuation()
        if v is None:
            return QSeries(self.ring, 0, self.order, [self.ring.zero()] * max(0, self.order + 1))
        return QSeries(self.ring, v, self.order, self.coeffs[v - self.low:])

    # -- arithmetic --------------------------------------------------------
    def _align(self, other):
        if isinstance(other, QSeries):
            return other
        raise TypeError(f"cannot combine QSeries with {type(other)}")

    def __add__(self, other):
        other = self._align(other)
        low = min(self.low, other.low)
        order = min(self.order, other.order)
        out = [self.ring.zero()] * (order - low + 1)
        for src in (self, other):
            for i, c in enumerate(src.coeffs):
                n = src.low + i
                if low <= n <= order:
                    out[n - low] = self.ring.add(out[n - low], c)
        return QSeries(self.ring, low, order, out)

    def __sub__(self, other):
        return self + other.scalar_mul(Fraction(-1))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scalar_mul(Fraction(other))
        other = self._align(other)
        low = self.low + other.low
        order = min(self.order + other.low, other.order + self.low)
        n_out = order - low + 1
        if n_out <= 0:
            return QSeries(self.ring, low, order, [])
        out = [self.ring.zero()] * n_out
        ring = self.ring
        for i, a in enumerate(self.coeffs):
            if ring.is_zero(a):
                continue
            na = self.low + i
            jmax = min(len(other.coeffs), order - na - other.low + 1)
            for j in range(jmax):
                b = other.coeffs[j]
                if ring.is_zero(b):
                    continue
                k = na + other.low + j - low
                out[k] = ring.add(out[k], ring.mul(a, b))
        return QSeries(self.ring, low, order, out)

    __rmul__ = __mul__

    def scalar_mul(self, f) -> "QSeries":
        if isinstance(f, (int, Fraction)):
            return QSeries(self.ring, self.low, self.order,
                           [self.ring.scalar(c, Fraction(f)) for c in self.coeffs])
        return QSeries(self.ring, self.low, self.order,
                       [self.ring.mul(c, f) for c in self.coeffs])

    def shift(self, k: int) -> "QSeries":
        return QSeries(self.ring, self.low + k, self.order + k, list(self.coeffs))

    def negate_q(self) -> "QSeries":
        out = [self.ring.scalar(c, Fraction(-1)) if (self.low + i) % 2 else c
               for i, c in enumerate(self.coeffs)]
        return QSeries(self.ring, self.low, self.order, out)

    def truncate(self, order: int) -> "QSeries":
        if order > self.order:
            raise IndexError(f"cannot extend trust from {self.order} to {order}")
        return QSeries(self.ring, self.low, order, self.coeffs[:order - self.low + 1])

    def map_coeffs(self, fn, ring=None) -> "QSeries":
        return QSeries(ring or self.ring, self.low, self.order,
                       [fn(c) for c in self.coeffs])

    def inverse(self) -> "QSeries":
        s = self.normalized()
        v = s.valuation()
        if v is None:
            raise NonUnitConstantTerm("inverse of zero series")
        unit = s.coeffs  # starts at q^v
        n_rel = s.order - v
        r0 = self.ring.inv(unit[0])
        rel = [r0]
        ring = self.ring
        for n in range(1, n_rel + 1):
            acc = ring.zero()
            for k in range(1, n + 1):
                if k < len(unit) and not ring.is_zero(unit[k]) and not ring.is_zero(rel[n - k]):
                    acc = ring.add(acc, ring.mul(unit[k], rel[n - k]))
            rel.append(ring.neg(ring.mul(r0, acc)))
        return QSeries(ring, -v, s.order - 2 * v, rel)

    def __truediv__(self, other):
        return self * other.inverse()

    def pow_int(self, m: int) -> "QSeries":
        if m == 0:
            return QSeries.one(self.ring, max(self.order, 0))
        if m < 0:
            return self.inverse().pow_int(-m)
        result = None
        b = self
        while m:
            if m & 1:
                result = b if result is None else result * b
            m >>= 1
            if m:
                b = b * b
        return result

    def sqrt(self) -> "QSeries":
        s = self.normalized()
        ring = self.ring
        if s.low != 0 or not ring.is_one(s.coeffs[0]):
            raise NonUnitConstantTerm("series sqrt needs constant term exactly 1")
        n_max = s.order
        r = [ring.one()]
        half = Fraction(1, 2)
        for n in range(1, n_max + 1):
            acc = s.coeff(n)
            for k in range(1, n):
                acc = ring.add(acc, ring.neg(ring.mul(r[k], r[n - k])))
            r.append(ring.scalar(acc, half))
        return QSeries(ring, 0, n_max, r)

    def exp(self) -> "QSeries":
        s = self.normalized()
        ring = self.ring
        if s.low < 0 or (s.low == 0 and s.order >= 0 and not ring.is_zero(s.coeffs[0])):
            raise NonzeroConstantTerm("exp needs a series with zero constant term")
        n_max = s.order
        e = [ring.one()]
        for n in range(1, n_max + 1):
            acc = ring.zero()
            for k in range(1, n + 1):
                ck = s.coeff(k) if k >= s.low else ring.zero()
                if ring.is_zero(ck) or ring.is_zero(e[n - k]):
                    continue
                acc = ring.add(acc, ring.scalar(ring.mul(ck, e[n - k]), Fraction(k)))
            e.append(ring.scalar(acc, Fraction(1, n)))
        return QSeries(ring, 0, n_max, e)

    def log(self) -> "QSeries":
        s = self.normalized()
        ring = self.ring
        if s.low != 0 or not ring.is_one(s.coeffs[0]):
            raise NonUnitConstantTerm("log needs constant term exactly 1")
        n_max = s.order
        l = [ring.zero()]
        for n in range(1, n_max + 1):
            acc = s.coeff(n)
            for k in range(1, n):
                if ring.is_zero(l[k]) or ring.is_zero(s.coeff(n - k)):
                    continue
                acc = ring.add(acc, ring.scalar(ring.mul(l[k], s.coeff(n - k)),
                                                Fraction(-k, n)))
            l.append(acc)
        return QSeries(ring, 0, n_max, l)

    def pow_scalar(self, exponent) -> "QSeries":
        """S^x for a q-independent exponent (constant term of S must be 1)."""
        return self.log().scalar_mul(exponent).exp()

    def plethystic_exp(self) -> "QSeries":
        """Exp(f) = exp(sum_n frobenius_n(f)(q^n)/n); needs f(q=0) = 0."""
        s = self.normalized()
        ring = self.ring
        if s.low <= 0 and not s.is_zero():
            raise NonzeroConstantTerm("plethystic exponential needs positive valuation")
        order = s.order
        total = QSeries.zero(ring, order)
        for n in range(1, order + 1):
            terms = {}
            for i, c in enumerate(s.coeffs):
                m = (s.low + i) * n
                if m <= order and not ring.is_zero(c):
                    terms[m] = ring.scalar(ring.frobenius(c, n), Fraction(1, n))
            if terms:
                total = total + QSeries.from_terms(ring, terms, order)
        return total.exp()

    # -- comparison ----------------------------------------------------------
    def first_discrepancy(self, other):
        """None if equal on the common trusted range, else (n, self_c, other_c)."""
        other = self._align(other)
        order = min(self.order, other.order)
        low = min(self.low, other.low)
        for n in range(low, order + 1):
            a = self.coeff(n) if n >= self.low else self.ring.zero()
            b = other.coeff(n) if n >= other.low else other.ring.zero()
            if not self.ring.eq(a, b):
                return (n, a, b)
        return None

    def eq_trusted(self, other) -> bool:
        return self.first_discrepancy(other) is None

    # -- serialization ---------------------------------------------------------
    def to_json(self):
        return {"lowest": self.low, "order": self.order,
                "coeffs": [self.ring.to_json(c) for c in self.coeffs]}

    @staticmethod
    def from_json(ring, data) -> "QSeries":
        coeffs = [ring.from_json(c) for c in data["coeffs"]]
        return QSeries(ring, data["lowest"], data["order"], coeffs)

    def to_cache_json(self):
        return {"lowest": self.low, "order": self.order,
                "coeffs": [self.ring.to_cache_json(c) for c in self.coeffs]}

    @staticmethod
    def from_cache_json(ring, data) -> "QSeries":
        coeffs = [ring.from_cache_json(c) for c in data["coeffs"]]
        return QSeries(ring, data["lowest"], data["order"], coeffs)

    def __repr__(self):
        bits = []
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                bits.append(f"({c!r})*q^{self.low + i}")
        body = " + ".join(bits) if bits else "0"
        return f"{body} + O(q^{self.order + 1})"


def geometric_inverse(ring, n: int, coeff, order: int) -> "QSeries":
    """(1 - coeff*q^n)^(-1) truncated at ``order`` (n >= 1)."""
    terms = {}
    power = ring.one()
    k = 0
    while k * n <= order:
        terms[k * n] = power
        power = ring.mul(power, coeff)
        k += 1
    return QSeries.from_terms(ring, terms, order)
