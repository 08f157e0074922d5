"""Rational functions with factored denominators, and the limit calculus.

A ``RationalFunction`` is ``coef * mono * num * prod(numf) / prod(denf)``
where ``num`` is an expanded Laurent polynomial and ``numf``/``denf`` are
multisets of canonical (unit-normal) polynomial factors.  Keeping
denominators factored is what makes sums over thousands of vertex-weight
terms tractable: common factors cancel by key identity, never through a
multivariate gcd.

Limits (t3 -> 1, anti-diagonal restriction, s3 -> 0, the refined
L -> infinity limit) are implemented by exact Laurent expansion in a formal
approach parameter: substitute ``var := center * (1 + eps)`` (or
``var := eps``), expand every factor as a truncated eps-series whose
coefficients live in the remaining variables, cancel, and read off the
eps^0 part.  A surviving negative eps-power is a genuine pole and raises.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import AlphabetMismatch, Divergent, InternalInvariantViolation, \
    NonIntegralExponent, PoleAtOne, PoleOnLocus
from .poly import Poly, VarSpace, space, SCALE, FIELD_BITS, _OFFSET, _FIELD_MASK

_ONE = Fraction(1)
_ZERO = Fraction(0)


class Factor:
    """A canonical (unit-normal, content-free) polynomial factor, hashable."""

    __slots__ = ("poly", "_hash", "_key")

    def __init__(self, poly: Poly):
        self.poly = poly
        self._key = (poly.den, tuple(sorted(poly.terms.items())))
        self._hash = hash(self._key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self._key == other._key and self.poly.space is other.poly.space

    def __repr__(self):
        return f"<{self.poly!r}>"


def canonical(poly: Poly):
    """Split ``poly`` into (coef, mono_key, Factor-or-None)."""
    coef, key, unit = poly.unit_normal()
    if unit.is_one():
        return coef, key, None
    return coef, key, Factor(unit)


_CYCLO: dict = {}


def cyclotomic(d: int) -> dict:
    """Coefficients {power: int} of the d-th cyclotomic polynomial."""
    if d not in _CYCLO:
        num = {d: 1, 0: -1}  # x^d - 1
        for e in range(1, d):
            if d % e == 0:
                num = _poly1_div(num, cyclotomic(e))
        _CYCLO[d] = num
    return _CYCLO[d]


def _poly1_div(a: dict, b: dict) -> dict:
    """Exact division of univariate integer polynomials given as dicts."""
    a = dict(a)
    q: dict = {}
    bd = max(b)
    while a:
        ad = max(a)
        c = a[ad] // b[bd]
        q[ad - bd] = c
        for k, v in b.items():
            nk = ad - bd + k
            nv = a.get(nk, 0) - c * v
            if nv:
                a[nk] = nv
            elif nk in a:
                del a[nk]
    return q


def factorize(poly: Poly):
    """(coef, mono_key, [(Factor, mult)...]) with binomials split into
    cyclotomic atoms.

    A unit-normal two-term polynomial with equal-magnitude coefficients is
    u^g -+ 1 in a primitive monomial direction u; splitting it as a product
    of cyclotomic values makes denominators from different brackets cancel
    exactly by factor identity (e.g. [t3^2] against [t3]).
    """
    coef, key, unit = poly.unit_normal()
    if unit.is_one():
        return coef, key, []
    sp = poly.space
    if len(unit) == 2:
        (k_lo, k_hi) = sorted(unit.terms)
        c_lo, c_hi = unit.terms[k_lo], unit.terms[k_hi]
        if abs(c_lo) == abs(c_hi) == 1:
            from math import gcd
            g = 0
            fixed = []
            for s in sp._shifts:
                e = ((k_hi >> s) & _FIELD_MASK) - ((k_lo >> s) & _FIELD_MASK)
                fixed.append(e)
                g = gcd(g, abs(e))
            if g > 1 or c_lo > 0:
                prim = [e // g for e in fixed]
                prim_key = sp.base + sum(e << s for e, s in zip(prim, sp._shifts))
                # unit = m_lo * (u^g - 1) when c_lo = -1, m_lo * (u^g + 1) otherwise
                divisors = [d for d in range(1, g + 1) if g % d == 0]
                if c_lo < 0:
                    atom_ds = divisors
                else:
                    atom_ds = [d for d in range(1, 2 * g + 1)
                               if (2 * g) % d == 0 and g % d != 0]
                total_coef = coef
                total_key = key + (k_lo - sp.base)
                factors: dict = {}
                for dd in atom_ds:
                    cyc = cyclotomic(dd)
                    terms = {sp.base + k * (prim_key - sp.base): c
                             for k, c in cyc.items()}
                    c2, key2, unit2 = Poly(sp, terms, 1).unit_normal()
                    total_coef *= c2
                    total_key = sp.mono_mul(total_key, key2)
                    f = Factor(unit2)
                    factors[f] = factors.get(f, 0) + 1
                return total_coef, total_key, sorted(factors.items(),
                                                     key=lambda kv: kv[0]._key)
    return coef, key, [(Factor(unit), 1)]


def _merge_power(d: dict, f, e: int):
    n = d.get(f, 0) + e
    if n:
        d[f] = n
    elif f in d:
        del d[f]


class RationalFunction:
    __slots__ = ("space", "coef", "mono", "num", "numf", "denf")

    def __init__(self, space: VarSpace, coef=_ONE, mono=None, num=None,
                 numf=None, denf=None):
        self.space = space
        self.coef = coef
        self.mono = space.base if mono is None else mono
        self.num = num  # expanded extra numerator Poly; None means 1
        self.numf = numf or {}
        self.denf = denf or {}

    # -- constructors ---------------------------------------------------
    @staticmethod
    def one(sp: VarSpace) -> "RationalFunction":
        return RationalFunction(sp)

    @staticmethod
    def zero(sp: VarSpace) -> "RationalFunction":
        return RationalFunction(sp, coef=_ZERO)

    @staticmethod
    def from_fraction(sp: VarSpace, value) -> "RationalFunction":
        return RationalFunction(sp, coef=Fraction(value))

    @staticmethod
    def from_poly(poly: Poly) -> "RationalFunction":
        coef, key, facs = factorize(poly)
        if coef == 0:
            return RationalFunction.zero(poly.space)
        return RationalFunction(poly.space, coef=coef, mono=key, numf=dict(facs))

    @staticmethod
    def monomial(sp: VarSpace, expmap: dict, coeff=1) -> "RationalFunction":
        f = Fraction(coeff)
        if f == 0:
            return RationalFunction.zero(sp)
        return RationalFunction(sp, coef=f, mono=sp.pack_map(expmap))

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.coef == 0 or (self.num is not None and self.num.is_zero())

    def is_one(self) -> bool:
        return self.equals(RationalFunction.one(self.space))

    # -- basic algebra ------------------------------------------------------
    def _check(self, other):
        if self.space is not other.space:
            raise AlphabetMismatch(f"{self.space} vs {other.space}")

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            if f == 0:
                return RationalFunction.zero(self.space)
            return RationalFunction(self.space, self.coef * f, self.mono, self.num,
                                    dict(self.numf), dict(self.denf))
        self._check(other)
        if self.is_zero() or other.is_zero():
            return RationalFunction.zero(self.space)
        numf = dict(self.numf)
        denf = dict(self.denf)
        for f, e in other.numf.items():
            _merge_power(numf, f, e)
        for f, e in other.denf.items():
            _merge_power(denf, f, e)
        for f in [f for f in numf if f in denf]:
            m = min(numf[f], denf[f])
            _merge_power(numf, f, -m)
            _merge_power(denf, f, -m)
        if self.num is None:
            num = other.num
        elif other.num is None:
            num = self.num
        else:
            num = self.num * other.num
        return RationalFunction(self.space, self.coef * other.coef,
                                self.space.mono_mul(self.mono, other.mono),
                                num, numf, denf)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        numf = dict(self.denf)
        denf = dict(self.numf)
        coef = 1 / self.coef
        mono = self.space.mono_inv(self.mono)
        if self.num is not None:
            c, k, facs = factorize(self.num)
            coef /= c
            mono = self.space.mono_mul(mono, self.space.mono_inv(k))
            for fac, e in facs:
                _merge_power(denf, fac, e)
        return RationalFunction(self.space, coef, mono, None, numf, denf)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return self * other.inverse()

    def __neg__(self):
        return self * -1

    def expand_num(self) -> Poly:
        """Numerator (coef, mono, num and numf together) as one polynomial."""
        p = Poly.from_key(self.space, self.mono, self.coef)
        if self.num is not None:
            p = p * self.num
        for f, e in self.numf.items():
            for _ in range(e):
                p = p * f.poly
        return p

    def den_factors_poly(self) -> Poly:
        p = Poly.const(self.space, 1)
        for f, e in self.denf.items():
            for _ in range(e):
                p = p * f.poly
        return p

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalFunction.from_fraction(self.space, other)
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        denf: dict = dict(self.denf)
        for f, e in other.denf.items():
            if denf.get(f, 0) < e:
                denf[f] = e
        pa = self.expand_num()
        for f, e in denf.items():
            for _ in range(e - self.denf.get(f, 0)):
                pa = pa * f.poly
        pb = other.expand_num()
        for f, e in denf.items():
            for _ in range(e - other.denf.get(f, 0)):
                pb = pb * f.poly
        return _quotient(pa + pb, denf, cancel=True)

    def __radd__(self, other):
        return self + other

    def __sub__(self, other):
        return self + (other * -1)

    def equals(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RationalFunction.from_fraction(self.space, other)
        return (self - other).is_zero()

    def normalized(self) -> "RationalFunction":
        """Cancel denominator factors into the numerator where possible."""
        if self.is_zero():
            return RationalFunction.zero(self.space)
        if not self.denf:
            return self
        return _quotient(self.expand_num(), dict(self.denf))

    # -- inspection -----------------------------------------------------------
    def as_num_den(self):
        """Fully expanded (numerator, denominator) Laurent polynomials."""
        return self.expand_num(), self.den_factors_poly()

    def __repr__(self):
        num, den = self.as_num_den()
        if den.is_one():
            return repr(num)
        return f"({num!r}) / ({den!r})"

    # -- substitutions --------------------------------------------------------
    def remap(self, target: VarSpace, images: dict) -> "RationalFunction":
        """Monomial substitution; ``images``: var -> packed key of target."""
        mono_poly = Poly.from_key(self.space, self.mono).remap(target, images)
        (mk,) = mono_poly.terms
        out = RationalFunction(target, self.coef, mk)
        if self.num is not None:
            out = out * RationalFunction.from_poly(self.num.remap(target, images))
        for f, e in self.numf.items():
            g = RationalFunction.from_poly(f.poly.remap(target, images))
            for _ in range(e):
                out = out * g
        for f, e in self.denf.items():
            g = RationalFunction.from_poly(f.poly.remap(target, images)).inverse()
            for _ in range(e):
                out = out * g
        return out

    def substitute(self, mapping: dict, target: VarSpace = None) -> "RationalFunction":
        """var -> monomial map given as {var: {target_var: exponent}}."""
        target = target or self.space
        images = {}
        for v in self.space.names:
            images[v] = target.pack_map(mapping[v]) if v in mapping else target.pack_map({v: 1})
        return self.remap(target, images)

    def scale_exponents(self, n: int) -> "RationalFunction":
        base = self.space.base
        out = RationalFunction(self.space, self.coef, base + n * (self.mono - base))
        if self.num is not None:
            out = out * RationalFunction.from_poly(self.num.scale_exponents(n))
        for f, e in self.numf.items():
            g = RationalFunction.from_poly(f.poly.scale_exponents(n))
            for _ in range(e):
                out = out * g
        for f, e in self.denf.items():
            g = RationalFunction.from_poly(f.poly.scale_exponents(n)).inverse()
            for _ in range(e):
                out = out * g
        return out

    def subs_var_poly(self, var, replacement: Poly) -> "RationalFunction":
        """Substitute ``var`` by a polynomial (used for linear s-shifts)."""
        sp = self.space
        e = sp.exponent(self.mono, var)
        if e.denominator != 1:
            raise NonIntegralExponent(f"{var} exponent {e} not integral")
        rest = self.mono - ((int(e) * SCALE) << (FIELD_BITS * sp.index[var]))
        out = RationalFunction(sp, self.coef, rest)
        if e:
            rp = RationalFunction.from_poly(replacement ** abs(int(e)))
            out = out * (rp if e > 0 else rp.inverse())
        if self.num is not None:
            out = out * _subs_poly_rf(self.num, var, replacement)
        for f, ee in self.numf.items():
            g = _subs_poly_rf(f.poly, var, replacement)
            for _ in range(ee):
                out = out * g
        for f, ee in self.denf.items():
            g = _subs_poly_rf(f.poly, var, replacement).inverse()
            for _ in range(ee):
                out = out * g
        return out

    # -- limits ----------------------------------------------------------------
    def eps_expansion(self, var, center_coef, center_map, target: VarSpace,
                      hi: int, additive_zero=False) -> "EpsSeries":
        """Exact Laurent expansion under var := center*(1+eps) or var := eps."""
        return _eps_expand(self, var, Fraction(center_coef), center_map or {},
                           target, hi, additive_zero)

    def limit(self, var, center_coef=1, center_map=None, target: VarSpace = None,
              additive_zero=False) -> "RationalFunction":
        """Exact limit (cancel-then-evaluate); PoleAtOne on genuine poles."""
        if target is None:
            target = space(*(v for v in self.space.names if v != var))
        ser = self.eps_expansion(var, center_coef, center_map, target, 0,
                                 additive_zero)
        ser.assert_regular(f"sending {var} to its limit")
        return ser.coeff(0)

    def limit_t3_one(self) -> "RationalFunction":
        from .poly import K2_SPACE
        return self.limit("t3", 1, {}, K2_SPACE)

    def restrict_antidiagonal(self) -> "RationalFunction":
        """t1*t2 = 1 (K-theoretic) or s1 + s2 = 0 (cohomological)."""
        sp = self.space
        try:
            if "t2" in sp.names:
                target = space(*(v for v in sp.names if v != "t2"))
                return self.limit("t2", 1, {"t1": -1}, target)
            if "s2" in sp.names:
                target = space(*(v for v in sp.names if v != "s2"))
                return self.limit("s2", -1, {"s1": 1}, target)
        except PoleAtOne as exc:
            raise PoleOnLocus(str(exc)) from exc
        raise ValueError(f"no anti-diagonal pair in {sp}")

    def refined_limit(self, var="L") -> "RationalFunction":
        """Leading behaviour as var -> infinity; Divergent if unbounded."""
        sp = self.space
        target = space(*(v for v in sp.names if v != var))
        if self.is_zero():
            return RationalFunction.zero(target)
        deg = sp.exponent(self.mono, var)
        pieces = []
        num_polys = [(self.num, 1, True)] if self.num is not None else []
        num_polys += [(f.poly, e, True) for f, e in self.numf.items()]
        num_polys += [(f.poly, e, False) for f, e in self.denf.items()]
        for poly, e, is_num in num_polys:
            top = poly.var_degree_range(var)[1]
            deg += e * top if is_num else -e * top
            pieces.append((_leading_part(poly, var, top, target), e, is_num))
        if deg > 0:
            raise Divergent(f"degree {deg} in {var}")
        if deg < 0:
            return RationalFunction.zero(target)
        rest = {v: e for v, e in zip(sp.names, sp.unpack(self.mono))
                if v != var and e}
        out = RationalFunction(target, self.coef, target.pack_map(rest))
        for poly, e, is_num in pieces:
            g = RationalFunction.from_poly(poly)
            if not is_num:
                g = g.inverse()
            for _ in range(e):
                out = out * g
        return out

    # -- serialization -----------------------------------------------------
    def to_json(self):
        """The documented external schema: expanded numerator/denominator."""
        num, den = self.as_num_den()
        return {"num": poly_to_json(num), "den": poly_to_json(den)}

    @staticmethod
    def from_json(sp: VarSpace, data) -> "RationalFunction":
        num = poly_from_json(sp, data["num"])
        den = poly_from_json(sp, data["den"])
        return RationalFunction.from_poly(num) / RationalFunction.from_poly(den)

    def to_cache_json(self):
        """Factored layout for cache files; avoids expanding denominators."""
        out = {"c": _frac_str(self.coef),
               "m": _mono_json(self.space, self.mono)}
        if self.num is not None:
            out["num"] = poly_to_json(self.num)
        if self.numf:
            out["numf"] = _factors_json(self.numf)
        if self.denf:
            out["denf"] = _factors_json(self.denf)
        return out

    @staticmethod
    def from_cache_json(sp: VarSpace, data) -> "RationalFunction":
        coef = Fraction(data["c"])
        mono = sp.pack_map({v: Fraction(e) for v, e in data["m"].items()})
        num = poly_from_json(sp, data["num"]) if "num" in data else None
        numf = _factors_from_json(sp, data.get("numf", []))
        denf = _factors_from_json(sp, data.get("denf", []))
        return RationalFunction(sp, coef, mono, num, numf, denf)


def _quotient(num: Poly, denf: dict, cancel=True) -> RationalFunction:
    """num / prod(denf), attempting factor cancellation when asked to."""
    sp = num.space
    if num.is_zero():
        return RationalFunction.zero(sp)
    remaining: dict = {}
    for f, e in denf.items():
        while cancel and e > 0:
            q = num.exact_div(f.poly)
            if q is None:
                break
            num = q
            e -= 1
        if e:
            remaining[f] = e
    coef, key, facs = factorize(num)
    numf = dict(facs)
    # a freshly split numerator may cancel factor-exactly after all
    for f in [f for f in numf if f in remaining]:
        m = min(numf[f], remaining[f])
        _merge_power(numf, f, -m)
        _merge_power(remaining, f, -m)
    return RationalFunction(sp, coef, key, None, numf, remaining)


def rf_sum(items, sp: VarSpace, normalize=True) -> RationalFunction:
    """Balanced sum with one cancellation pass at the end.

    Pairwise adds keep factored common denominators but skip cancellation
    attempts; a single pass over the final numerator is both cheaper and
    finds everything the incremental passes would."""
    items = [x for x in items if not x.is_zero()]
    if not items:
        return RationalFunction.zero(sp)
    while len(items) > 1:
        nxt = []
        for i in range(0, len(items) - 1, 2):
            nxt.append(items[i] + items[i + 1])
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0].normalized() if normalize else items[0]


def _subs_poly_rf(poly: Poly, var, replacement: Poly) -> RationalFunction:
    """Poly substitution tolerating negative integer powers of ``var``."""
    lo = poly.var_degree_range(var)[0]
    if lo >= 0:
        return RationalFunction.from_poly(poly.subs_var_poly(var, replacement))
    k = -int(lo)
    sp = poly.space
    shifted = poly.mul_monomial(sp.pack_map({var: k}))
    num = shifted.subs_var_poly(var, replacement)
    return RationalFunction.from_poly(num) / RationalFunction.from_poly(replacement ** k)


def _leading_part(poly: Poly, var, top, target: VarSpace) -> Poly:
    s = FIELD_BITS * poly.space.index[var]
    want = int(top * SCALE) + _OFFSET
    terms = {}
    for k, c in poly.terms.items():
        if ((k >> s) & _FIELD_MASK) == want:
            terms[k - (int(top * SCALE) << s)] = c
    return Poly(poly.space, terms, poly.den).drop_var(var, target)


# ---------------------------------------------------------------------------
# eps-series machinery


class EpsSeries:
    """Truncated Laurent series in a formal parameter with RF coefficients.

    ``lo`` is an exact lower bound for the support; indices above ``hi`` are
    untrusted.  Coefficients live over ``target``.
    """

    __slots__ = ("target", "lo", "hi", "c")

    def __init__(self, target: VarSpace, lo: int, hi: int, coeffs: dict):
        self.target = target
        self.lo = lo
        self.hi = hi
        self.c = coeffs

    @staticmethod
    def zero(target: VarSpace, hi: int) -> "EpsSeries":
        return EpsSeries(target, 0, hi, {})

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.c.values())

    def coeff(self, k) -> RationalFunction:
        if k > self.hi:
            raise InternalInvariantViolation("eps coefficient beyond truncation")
        return self.c.get(k, RationalFunction.zero(self.target))

    def assert_regular(self, context=""):
        for k in sorted(self.c):
            if k < 0 and not self.c[k].is_zero():
                raise PoleAtOne(f"pole of order {-k} {context}".strip())

    def mul(self, other: "EpsSeries", hi=None) -> "EpsSeries":
        if not self.c or not other.c:
            h = self.hi if hi is None else hi
            return EpsSeries(self.target, self.lo + other.lo, h, {})
        trust = min(self.hi + other.lo, other.hi + self.lo)
        hi = trust if hi is None else min(hi, trust)
        out: dict = {}
        for i, a in self.c.items():
            if a.is_zero():
                continue
            for j, b in other.c.items():
                k = i + j
                if k > hi:
                    continue
                prod = a * b
                if k in out:
                    out[k] = out[k] + prod
                else:
                    out[k] = prod
        return EpsSeries(self.target, self.lo + other.lo, hi, out)

    def add(self, other: "EpsSeries") -> "EpsSeries":
        hi = min(self.hi, other.hi)
        lo = min(self.lo, other.lo)
        out = {k: v for k, v in self.c.items() if k <= hi}
        for k, v in other.c.items():
            if k <= hi:
                out[k] = out[k] + v if k in out else v
        return EpsSeries(self.target, lo, hi, out)

    def valuation(self):
        for k in sorted(self.c):
            if not self.c[k].is_zero():
                return k
        return None

    def inverse(self) -> "EpsSeries":
        val = self.valuation()
        if val is None:
            raise ZeroDivisionError("inverse of zero eps-series")
        lead = self.c[val]
        inv_lead = lead.inverse()
        hi_out = self.hi - 2 * val
        rel_max = self.hi - val
        rel = {0: inv_lead}
        for m in range(1, rel_max + 1):
            acc = RationalFunction.zero(self.target)
            for k in range(1, m + 1):
                a = self.c.get(val + k)
                if a is None or a.is_zero():
                    continue
                r = rel.get(m - k)
                if r is None or r.is_zero():
                    continue
                acc = acc + a * r
            if not acc.is_zero():
                rel[m] = (acc * inv_lead) * -1
        out = {m - val: v for m, v in rel.items() if m - val <= hi_out}
        return EpsSeries(self.target, -val, hi_out, out)

    def scalar(self, rf) -> "EpsSeries":
        return EpsSeries(self.target, self.lo, self.hi,
                         {k: v * rf for k, v in self.c.items()})


def binomial_frac(gamma: Fraction, k: int) -> Fraction:
    out = _ONE
    for i in range(k):
        out = out * (gamma - i) / (i + 1)
    return out


def _mono_eps_poly(gamma: Fraction, center_coef: Fraction, center_map: dict,
                   target: VarSpace, rest_key: int, weight: Fraction,
                   hi: int, additive_zero: bool, acc: dict):
    """Accumulate the expansion of weight * rest * var^gamma into Poly dict acc."""
    if additive_zero:
        if gamma.denominator != 1:
            raise NonIntegralExponent(f"var^{gamma} under additive expansion")
        g = int(gamma)
        if g <= hi:
            p = acc.get(g)
            add = Poly.from_key(target, rest_key, weight)
            acc[g] = add if p is None else p + add
        return g
    if center_coef != 1:
        if gamma.denominator != 1:
            raise NonIntegralExponent("fractional power of a signed center")
        weight = weight * center_coef ** int(gamma)
    key = rest_key
    if center_map:
        cmap = {v: e * gamma for v, e in center_map.items()}
        key = target.mono_mul(rest_key, target.pack_map(cmap))
    for k in range(0, hi + 1):
        b = binomial_frac(gamma, k)
        if b:
            p = acc.get(k)
            add = Poly.from_key(target, key, weight * b)
            acc[k] = add if p is None else p + add
    return 0


def _poly_eps_series(poly: Poly, var, center_coef, center_map, target: VarSpace,
                     hi: int, additive_zero: bool) -> EpsSeries:
    sp = poly.space
    s = FIELD_BITS * sp.index[var]
    acc: dict = {}
    lo = 0
    for k, c in poly.terms.items():
        gamma = Fraction(((k >> s) & _FIELD_MASK) - _OFFSET, SCALE)
        restmap = {v: e for v, e in zip(sp.names, sp.unpack(k)) if v != var and e}
        rest_key = target.pack_map(restmap)
        g = _mono_eps_poly(gamma, center_coef, center_map, target, rest_key,
                           Fraction(c, poly.den), hi, additive_zero, acc)
        lo = min(lo, g)
    coeffs = {k: RationalFunction.from_poly(p) for k, p in acc.items() if not p.is_zero()}
    return EpsSeries(target, lo, hi, coeffs)


def _eps_expand(rf: RationalFunction, var, center_coef: Fraction, center_map: dict,
                target: VarSpace, hi: int, additive_zero: bool) -> EpsSeries:
    if rf.is_zero():
        return EpsSeries.zero(target, hi)
    sp = rf.space
    extra = sum(rf.denf.values()) + 2
    if additive_zero:
        g = sp.exponent(rf.mono, var)
        extra += max(0, -int(g))
        if rf.num is not None:
            extra += max(0, -int(rf.num.var_degree_range(var)[0]))
    while True:
        work_hi = hi + extra
        mono_acc: dict = {}
        g = sp.exponent(rf.mono, var)
        _mono_eps_poly(g, center_coef, center_map, target,
                       _rest_key(sp, rf.mono, var, target), rf.coef,
                       work_hi, additive_zero, mono_acc)
        out = EpsSeries(target, int(g) if additive_zero else 0, work_hi,
                        {k: RationalFunction.from_poly(p) for k, p in mono_acc.items()})
        if rf.num is not None:
            out = out.mul(_poly_eps_series(rf.num, var, center_coef, center_map,
                                           target, work_hi, additive_zero), hi=work_hi)
        for f, e in rf.numf.items():
            fs = _poly_eps_series(f.poly, var, center_coef, center_map, target,
                                  work_hi, additive_zero)
            for _ in range(e):
                out = out.mul(fs, hi=work_hi)
        for f, e in rf.denf.items():
            fs = _poly_eps_series(f.poly, var, center_coef, center_map, target,
                                  work_hi, additive_zero)
            inv = fs.inverse()
            for _ in range(e):
                out = out.mul(inv)
        if out.hi >= hi:
            return EpsSeries(target, out.lo, hi,
                             {k: v for k, v in out.c.items() if k <= hi})
        extra += (hi - out.hi) + 2


def _rest_key(sp: VarSpace, key, var, target: VarSpace):
    restmap = {v: e for v, e in zip(sp.names, sp.unpack(key)) if v != var and e}
    return target.pack_map(restmap)


# ---------------------------------------------------------------------------
# exact zero tests by point sampling in one variable


def _poly_eval_var(poly: Poly, var, base: int, target: VarSpace) -> Poly:
    """Substitute var := base^SCALE (so the quarter-step unit goes to base)."""
    sp = poly.space
    s = FIELD_BITS * sp.index[var]
    terms: dict = {}
    den = poly.den
    negshift = 0
    lo = min(((k >> s) & _FIELD_MASK) - _OFFSET for k in poly.terms) if poly.terms else 0
    if lo < 0:
        negshift = -lo
    for k, c in poly.terms.items():
        e = ((k >> s) & _FIELD_MASK) - _OFFSET
        v = c * base ** (e + negshift)
        restmap = {vv: ee for vv, ee in zip(sp.names, sp.unpack(k)) if vv != var and ee}
        nk = target.pack_map(restmap)
        nc = terms.get(nk, 0) + v
        if nc:
            terms[nk] = nc
        elif nk in terms:
            del terms[nk]
    p = Poly(target, terms, den)
    if negshift:
        p = p * Fraction(1, base ** negshift)
    return p


_ATOM_EVAL_MEMO: dict = {}


def _atom_eval(f: Factor, var, base: int) -> RationalFunction:
    key = (f, var, base)
    hit = _ATOM_EVAL_MEMO.get(key)
    if hit is None:
        sp = f.poly.space
        target = space(*(v for v in sp.names if v != var))
        hit = RationalFunction.from_poly(_poly_eval_var(f.poly, var, base, target))
        _ATOM_EVAL_MEMO[key] = hit
    return hit


def eval_var_power(rf: RationalFunction, var, base: int) -> RationalFunction:
    """Exact evaluation of one variable at an integer point (quarter-step
    unit set to ``base``); returns a rational function over the remaining
    variables."""
    sp = rf.space
    target = space(*(v for v in sp.names if v != var))
    e = sp.exponent(rf.mono, var)
    coef = rf.coef * Fraction(base) ** int(e * SCALE)
    rest = {v: ee for v, ee in zip(sp.names, sp.unpack(rf.mono)) if v != var and ee}
    out = RationalFunction(target, coef, target.pack_map(rest))
    if rf.num is not None:
        out = out * RationalFunction.from_poly(_poly_eval_var(rf.num, var, base, target))
    for f, m in rf.numf.items():
        g = _atom_eval(f, var, base)
        for _ in range(m):
            out = out * g
    for f, m in rf.denf.items():
        g = _atom_eval(f, var, base)
        if g.is_zero():
            raise ZeroDivisionError(f"denominator factor vanished at {var}={base}^{SCALE}")
        g = g.inverse()
        for _ in range(m):
            out = out * g
    return out


def _var_span(poly: Poly, var) -> int:
    s = FIELD_BITS * poly.space.index[var]
    fields = [(k >> s) & _FIELD_MASK for k in poly.terms]
    return max(fields) - min(fields)


def sampled_zero_check(terms, var="t3"):
    """Exact zero test for a finite sum of factored rational functions.

    Clears denominators conceptually: the cleared numerator is a Laurent
    polynomial in ``var`` whose degree span is bounded by the supports of
    the factored pieces, so vanishing at span+1 distinct integer points
    (var^(1/SCALE) = 2, 3, ...) proves vanishing identically.  Returns
    (True, None) or (False, witness_point).
    """
    terms = [t for t in terms if not t.is_zero()]
    if not terms:
        return True, None
    sp = terms[0].space
    lcm: dict = {}
    for t in terms:
        for f, e in t.denf.items():
            if lcm.get(f, 0) < e:
                lcm[f] = e
    den_span = sum(_var_span(f.poly, var) * e for f, e in lcm.items())
    span = 0
    for t in terms:
        s = sum(_var_span(f.poly, var) * e for f, e in t.numf.items())
        if t.num is not None:
            s += _var_span(t.num, var)
        s += den_span - sum(_var_span(f.poly, var) * e for f, e in t.denf.items())
        span = max(span, s)
    target = space(*(v for v in sp.names if v != var))
    for j in range(2, span + 3):
        value = rf_sum([eval_var_power(t, var, j) for t in terms], target)
        if not value.is_zero():
            return False, j
    return True, None


# ---------------------------------------------------------------------------
# the K -> cohomology limit: t = exp(b s), extract the b-coefficient


def _linear_form_poly(exps, src_names, pairs, target: VarSpace) -> Poly:
    terms: dict = {}
    for v, e in zip(src_names, exps):
        if e:
            key = target.pack_map({pairs[v]: 1})
            terms[key] = terms.get(key, Fraction(0)) + e
    total = Poly.zero(target)
    for key, c in terms.items():
        if c:
            total = total + Poly.from_key(target, key, c)
    return total


def _exp_b_series(poly: Poly, pairs, target: VarSpace, hi: int) -> EpsSeries:
    """b-expansion of poly under t_i := exp(b * s_i); coefficients are polys."""
    sp = poly.space
    acc: dict = {}
    for k, c in poly.terms.items():
        lin = _linear_form_poly(sp.unpack(k), sp.names, pairs, target)
        weight = Fraction(c, poly.den)
        power = Poly.const(target, 1)
        fact = 1
        for m in range(hi + 1):
            if m:
                power = power * lin
                fact *= m
            add = power * (weight / fact)
            acc[m] = acc[m] + add if m in acc else add
    coeffs = {m: RationalFunction.from_poly(p) for m, p in acc.items() if not p.is_zero()}
    return EpsSeries(target, 0, hi, coeffs)


def exp_limit(rf: RationalFunction, power: int, pairs: dict, target: VarSpace
              ) -> RationalFunction:
    """lim_{b->0} b^power * rf|_{t_i = exp(b s_i)}.

    ``pairs`` maps each source variable to its linear-form variable.  Raises
    NegativeBPower when the normalisation power leaves negative b-orders.
    """
    from ..errors import NegativeBPower
    if rf.is_zero():
        return RationalFunction.zero(target)
    extra = sum(rf.denf.values()) + 2
    want = -power
    while True:
        hi = max(0, want) + extra
        out = _exp_b_series(Poly.from_key(rf.space, rf.mono, rf.coef), pairs, target, hi)
        if rf.num is not None:
            out = out.mul(_exp_b_series(rf.num, pairs, target, hi), hi=hi)
        for f, e in rf.denf.items():
            fs = _exp_b_series(f.poly, pairs, target, hi)
            inv = fs.inverse()
            for _ in range(e):
                out = out.mul(inv)
        for f, e in rf.numf.items():
            fs = _exp_b_series(f.poly, pairs, target, hi)
            for _ in range(e):
                out = out.mul(fs, hi=out.hi)
        if out.hi >= want:
            break
        extra += (want - out.hi) + 2
    for k in sorted(out.c):
        if k < want and not out.c[k].is_zero():
            raise NegativeBPower(
                f"b^{k + power} survives the cohomological limit (power {power})")
    return out.coeff(want) if want >= out.lo else RationalFunction.zero(target)


# -- JSON helpers -------------------------------------------------------------

def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def poly_to_json(poly: Poly):
    sp = poly.space
    out = []
    for k in sorted(poly.terms):
        m = {v: _frac_str(e) for v, e in zip(sp.names, sp.unpack(k)) if e}
        out.append({"c": _frac_str(Fraction(poly.terms[k], poly.den)), "m": m})
    return out


def poly_from_json(sp: VarSpace, data) -> Poly:
    total = Poly.zero(sp)
    for term in data:
        expmap = {v: Fraction(e) for v, e in term["m"].items()}
        c = Fraction(term["c"])
        total = total + Poly(sp, {sp.pack_map(expmap): c.numerator}, c.denominator)
    return total


def _mono_json(sp: VarSpace, key):
    return {v: _frac_str(e) for v, e in zip(sp.names, sp.unpack(key)) if e}


def _factors_json(factors: dict):
    out = []
    for f, e in sorted(factors.items(), key=lambda kv: kv[0]._key):
        out.append({"p": poly_to_json(f.poly), "e": e})
    return out


def _factors_from_json(sp: VarSpace, data) -> dict:
    out: dict = {}
    for item in data:
        poly = poly_from_json(sp, item["p"])
        coef, key, unit = poly.unit_normal()
        if coef != 1 or key != sp.base:
            raise ValueError("cache factor not unit-normal")
        out[Factor(unit)] = item["e"]
    return out
