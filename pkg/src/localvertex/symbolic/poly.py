"""Sparse Laurent polynomials with exact rational coefficients.

Monomials are packed into a single integer: each variable of a ``VarSpace``
owns a fixed bit field holding ``SCALE * exponent + offset``.  Exponents are
rationals with denominator dividing ``SCALE`` (integers, halves and quarters
are what the equivariant weights and their square roots produce).  Packing
makes monomial multiplication a single integer addition and keeps dict
operations fast.

A ``Poly`` stores integer coefficients over one common positive denominator,
so coefficient arithmetic is pure-int except at (de)normalisation points.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from ..errors import AlphabetMismatch, NonIntegralExponent

SCALE = 4
FIELD_BITS = 28
_OFFSET = 1 << (FIELD_BITS - 1)
_FIELD_MASK = (1 << FIELD_BITS) - 1


class VarSpace:
    """An ordered, fixed alphabet of variable names with packed exponents."""

    __slots__ = ("names", "base", "index", "_shifts")

    def __init__(self, names):
        self.names = tuple(names)
        self.index = {v: i for i, v in enumerate(self.names)}
        self._shifts = tuple(FIELD_BITS * i for i in range(len(self.names)))
        self.base = sum(_OFFSET << s for s in self._shifts)

    def __repr__(self):
        return f"VarSpace{self.names}"

    def __len__(self):
        return len(self.names)

    def scaled(self, exponent) -> int:
        e = exponent * SCALE
        if isinstance(e, Fraction):
            if e.denominator != 1:
                raise NonIntegralExponent(
                    f"exponent {exponent} not representable at scale 1/{SCALE}")
            e = e.numerator
        return int(e)

    def pack(self, exps) -> int:
        key = 0
        for s, e in zip(self._shifts, exps):
            key += (self.scaled(e) + _OFFSET) << s
        return key

    def pack_map(self, expmap) -> int:
        key = self.base
        for v, e in expmap.items():
            key += self.scaled(e) << (FIELD_BITS * self.index[v])
        return key

    def unpack(self, key) -> tuple:
        out = []
        for s in self._shifts:
            out.append(Fraction(((key >> s) & _FIELD_MASK) - _OFFSET, SCALE))
        return tuple(out)

    def exponent(self, key, var) -> Fraction:
        s = FIELD_BITS * self.index[var]
        return Fraction(((key >> s) & _FIELD_MASK) - _OFFSET, SCALE)

    def mono_mul(self, a, b) -> int:
        return a + b - self.base

    def mono_inv(self, a) -> int:
        return 2 * self.base - a

    def mono_pow(self, a, n: int) -> int:
        return n * (a - self.base) + self.base

    def mono_str(self, key) -> str:
        parts = []
        for v, e in zip(self.names, self.unpack(key)):
            if e:
                parts.append(v if e == 1 else f"{v}^{e}")
        return "*".join(parts) if parts else "1"


_SPACES: dict = {}


def space(*names) -> VarSpace:
    """Memoized VarSpace; identity comparison doubles as alphabet check."""
    if names not in _SPACES:
        _SPACES[names] = VarSpace(names)
    return _SPACES[names]


# The canonical alphabets used across the engine.
K_SPACE = space("t1", "t2", "t3")
K2_SPACE = space("t1", "t2")
K1_SPACE = space("t1",)
COH_SPACE = space("s1", "s2", "s3")
COH2_SPACE = space("s1", "s2")
REF_SPACE = space("L", "kappa")
KAPPA_SPACE = space("kappa",)
B_SPACE = space("b", "s1", "s2", "s3")


def _check(a: "Poly", b: "Poly"):
    if a.space is not b.space:
        raise AlphabetMismatch(f"{a.space} vs {b.space}")


class Poly:
    """Sparse Laurent polynomial: (sum of int-coefficient monomials) / den."""

    __slots__ = ("space", "terms", "den", "_ev", "_un")

    def __init__(self, space: VarSpace, terms: dict, den: int = 1, normalize: bool = True):
        self.space = space
        self.terms = terms
        self.den = den
        self._ev = None
        self._un = None
        if normalize:
            self._normalize()

    def _normalize(self):
        terms = self.terms
        for k in [k for k, c in terms.items() if c == 0]:
            del terms[k]
        if not terms:
            self.den = 1
            return
        if self.den < 0:
            self.den = -self.den
            for k in terms:
                terms[k] = -terms[k]
        if self.den != 1:
            g = self.den
            for c in terms.values():
                g = gcd(g, c)
                if g == 1:
                    break
            if g > 1:
                self.den //= g
                for k in terms:
                    terms[k] //= g

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero(space: VarSpace) -> "Poly":
        return Poly(space, {}, 1, normalize=False)

    @staticmethod
    def const(space: VarSpace, value) -> "Poly":
        f = Fraction(value)
        if f == 0:
            return Poly.zero(space)
        return Poly(space, {space.base: f.numerator}, f.denominator, normalize=False)

    @staticmethod
    def monomial(space: VarSpace, exps, coeff=1) -> "Poly":
        f = Fraction(coeff)
        if f == 0:
            return Poly.zero(space)
        return Poly(space, {space.pack(exps): f.numerator}, f.denominator, normalize=False)

    @staticmethod
    def from_key(space: VarSpace, key: int, coeff=1) -> "Poly":
        f = Fraction(coeff)
        if f == 0:
            return Poly.zero(space)
        return Poly(space, {key: f.numerator}, f.denominator, normalize=False)

    # -- predicates ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.den == 1 and len(self.terms) == 1 and self.terms.get(self.space.base) == 1

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.space is other.space and self.den == other.den and self.terms == other.terms

    def __hash__(self):
        return hash((self.den, tuple(sorted(self.terms.items()))))

    # -- arithmetic ----------------------------------------------------
    def __neg__(self):
        return Poly(self.space, {k: -c for k, c in self.terms.items()}, self.den, normalize=False)

    def __add__(self, other):
        _check(self, other)
        if self.den == other.den:
            terms = dict(self.terms)
            for k, c in other.terms.items():
                nc = terms.get(k, 0) + c
                if nc:
                    terms[k] = nc
                elif k in terms:
                    del terms[k]
            return Poly(self.space, terms, self.den)
        g = gcd(self.den, other.den)
        ma, mb = other.den // g, self.den // g
        terms = {k: c * ma for k, c in self.terms.items()}
        for k, c in other.terms.items():
            nc = terms.get(k, 0) + c * mb
            if nc:
                terms[k] = nc
            elif k in terms:
                del terms[k]
        return Poly(self.space, terms, self.den * ma)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            if f == 0:
                return Poly.zero(self.space)
            return Poly(self.space,
                        {k: c * f.numerator for k, c in self.terms.items()},
                        self.den * f.denominator)
        _check(self, other)
        if not self.terms or not other.terms:
            return Poly.zero(self.space)
        base = self.space.base
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        terms: dict = {}
        get = terms.get
        for kb, cb in b.items():
            shift = kb - base
            for ka, ca in a.items():
                k = ka + shift
                nc = get(k, 0) + ca * cb
                if nc:
                    terms[k] = nc
                elif k in terms:
                    del terms[k]
        return Poly(self.space, terms, self.den * other.den)

    __rmul__ = __mul__

    def mul_monomial(self, key: int, coeff=1) -> "Poly":
        f = Fraction(coeff)
        shift = key - self.space.base
        return Poly(self.space,
                    {k + shift: c * f.numerator for k, c in self.terms.items()},
                    self.den * f.denominator)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power on Poly")
        result = Poly.const(self.space, 1)
        b = self
        while n:
            if n & 1:
                result = result * b
            b = b * b if n > 1 else b
            n >>= 1
        return result

    # -- structure -----------------------------------------------------
    def coeff_of_key(self, key) -> Fraction:
        return Fraction(self.terms.get(key, 0), self.den)

    def constant(self) -> Fraction:
        return Fraction(self.terms.get(self.space.base, 0), self.den)

    def leading_key(self) -> int:
        return max(self.terms)

    def content_key(self) -> int:
        """Packed key of per-variable minimal exponents (monomial content)."""
        mins = None
        for k in self.terms:
            if mins is None:
                mins = [(k >> s) & _FIELD_MASK for s in self.space._shifts]
            else:
                for i, s in enumerate(self.space._shifts):
                    f = (k >> s) & _FIELD_MASK
                    if f < mins[i]:
                        mins[i] = f
        return sum(m << s for m, s in zip(mins, self.space._shifts))

    def var_degree_range(self, var) -> tuple:
        """(min, max) exponent of ``var`` over the support; requires nonzero."""
        s = FIELD_BITS * self.space.index[var]
        fields = [((k >> s) & _FIELD_MASK) for k in self.terms]
        return (Fraction(min(fields) - _OFFSET, SCALE), Fraction(max(fields) - _OFFSET, SCALE))

    def unit_normal(self):
        """Factor as coef * mono * unitpoly.

        The unit-normal polynomial has per-variable minimal exponent 0,
        integer coefficients with content 1, and positive leading coefficient.
        """
        if self._un is not None:
            return self._un
        if not self.terms:
            return Fraction(0), self.space.base, self
        ckey = self.content_key()
        shift = ckey - self.space.base
        terms = {k - shift: c for k, c in self.terms.items()}
        g = 0
        for c in terms.values():
            g = gcd(g, c)
            if g == 1:
                break
        if terms[max(terms)] < 0:
            g = -g
        coef = Fraction(g, self.den)
        inv = terms if g == 1 else {k: c // g for k, c in terms.items()}
        self._un = (coef, ckey, Poly(self.space, inv, 1, normalize=False))
        return self._un

    # -- substitution --------------------------------------------------
    def remap(self, target: VarSpace, images: dict) -> "Poly":
        """Monomial substitution var -> packed monomial key of ``target``.

        Every variable of self.space must appear in ``images``.  Exponents of
        the image keys are scaled by the source exponent (rational scaling
        allowed when the result stays representable).
        """
        cols = []
        for v in self.space.names:
            cols.append(images[v] - target.base)
        shifts = self.space._shifts
        terms: dict = {}
        for k, c in self.terms.items():
            nk = target.base
            for col, s in zip(cols, shifts):
                e = ((k >> s) & _FIELD_MASK) - _OFFSET
                if e:
                    if (e * col) % SCALE:
                        raise NonIntegralExponent("substitution leaves the exponent lattice")
                    nk += (e * col) // SCALE
            nc = terms.get(nk, 0) + c
            if nc:
                terms[nk] = nc
            elif nk in terms:
                del terms[nk]
        return Poly(target, terms, self.den)

    def identity_images(self, target: VarSpace, overrides: dict = None) -> dict:
        images = {}
        for v in self.space.names:
            if overrides and v in overrides:
                images[v] = overrides[v]
            else:
                images[v] = target.pack_map({v: 1})
        return images

    def scale_exponents(self, n: int) -> "Poly":
        """t -> t^n on every variable (plethystic Frobenius action)."""
        base = self.space.base
        return Poly(self.space, {n * (k - base) + base: c for k, c in self.terms.items()},
                    self.den, normalize=False)

    def subs_var_poly(self, var, replacement: "Poly") -> "Poly":
        """Substitute ``var`` by a polynomial (integer nonnegative exponents)."""
        s = FIELD_BITS * self.space.index[var]
        one = self.space.base
        powers = {0: Poly.const(self.space, 1)}

        def power(n):
            if n not in powers:
                powers[n] = power(n - 1) * replacement
            return powers[n]

        out = Poly.zero(self.space)
        for k, c in self.terms.items():
            e4 = ((k >> s) & _FIELD_MASK) - _OFFSET
            if e4 % SCALE:
                raise NonIntegralExponent(f"{var} exponent not integral")
            e = e4 // SCALE
            if e < 0:
                raise NonIntegralExponent(f"negative {var} exponent in subs_var_poly")
            rest = k - (e4 << s)
            out = out + power(e).mul_monomial(rest, Fraction(c, self.den))
        return out

    def subs_var_one(self, var) -> "Poly":
        """Evaluate var := 1 (drop its exponent field)."""
        s = FIELD_BITS * self.space.index[var]
        terms: dict = {}
        for k, c in self.terms.items():
            e4 = ((k >> s) & _FIELD_MASK) - _OFFSET
            nk = k - (e4 << s)
            nc = terms.get(nk, 0) + c
            if nc:
                terms[nk] = nc
            elif nk in terms:
                del terms[nk]
        return Poly(self.space, terms, self.den)

    def drop_var(self, var, target: VarSpace) -> "Poly":
        """Move to ``target`` (self.space minus ``var``); var-exponents must be 0."""
        images = {}
        for v in self.space.names:
            if v == var:
                images[v] = target.base  # exponent must be zero anyway
            else:
                images[v] = target.pack_map({v: 1})
        s = FIELD_BITS * self.space.index[var]
        for k in self.terms:
            if ((k >> s) & _FIELD_MASK) != _OFFSET:
                raise NonIntegralExponent(f"residual {var} exponent while leaving space")
        return self.remap(target, images)

    # -- division ------------------------------------------------------
    def exact_div(self, divisor: "Poly"):
        """Return self / divisor if the division is exact, else None."""
        _check(self, divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("poly division by zero")
        if self.is_zero():
            return self
        dcoef, dkey, dhat = divisor.unit_normal()
        scoef, skey, shat = self.unit_normal()
        # quotient = (scoef/dcoef) * mono(skey-dkey) * (shat / dhat)
        if dhat.is_one():
            q = shat
        else:
            if len(shat) < len(dhat):
                return None
            for s in self.space._shifts:
                smin = smax = None
                for k in shat.terms:
                    f = (k >> s) & _FIELD_MASK
                    if smin is None or f < smin:
                        smin = f
                    if smax is None or f > smax:
                        smax = f
                dmin = dmax = None
                for k in dhat.terms:
                    f = (k >> s) & _FIELD_MASK
                    if dmin is None or f < dmin:
                        dmin = f
                    if dmax is None or f > dmax:
                        dmax = f
                if smax - smin < dmax - dmin:
                    return None
            if dhat._ev is None:
                dhat._ev = eval_at_point(dhat)
            if dhat._ev:
                if shat._ev is None:
                    shat._ev = eval_at_point(shat)
                if shat._ev % dhat._ev:
                    return None
            q = _divide_unit(shat, dhat)
            if q is None:
                return None
        mono = self.space.mono_mul(skey, self.space.mono_inv(dkey))
        return q.mul_monomial(mono, scoef / dcoef)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for k in sorted(self.terms, reverse=True):
            c = Fraction(self.terms[k], self.den)
            m = self.space.mono_str(k)
            bits.append(f"{c}*{m}" if m != "1" else f"{c}")
        return " + ".join(bits)


def eval_at_point(poly: Poly) -> int:
    """Integer value of a unit-normal polynomial at the fixed filter point.

    Variable number i is sent to the square of the (i+1)-th prime,
    exponentiated in the scaled (quarter-step) lattice; divisibility of
    polynomials implies divisibility of these values, a cheap rejection test.
    """
    bases = (4, 9, 25, 49)
    shifts = poly.space._shifts
    total = 0
    for k, c in poly.terms.items():
        v = c
        for p, s in zip(bases, shifts):
            e = ((k >> s) & _FIELD_MASK) - _OFFSET
            if e:
                v *= p ** e
        total += v
    return total


def _divide_unit(f: Poly, d: Poly):
    """Exact division of unit-normal genuine polynomials; None on failure.

    Both inputs are content-free with integer coefficients, so an exact
    quotient is again integral (Gauss) and every intermediate leading
    coefficient must be divisible by the divisor's: an all-integer
    fail-fast loop.  Keys created during reduction descend monotonically,
    so the leading term comes from merging the pre-sorted original support
    with a small heap of freshly created keys.
    """
    import heapq

    space = f.space
    base = space.base
    dlead = d.leading_key()
    dlc = d.terms[dlead]
    rem = dict(f.terms)
    dterms = [(k - dlead, c) for k, c in d.terms.items() if k != dlead]
    q: dict = {}
    shifts = space._shifts
    skeys = sorted(rem, reverse=True)
    si = 0
    pending: list = []
    nkeys = len(skeys)
    while True:
        while si < nkeys and skeys[si] not in rem:
            si += 1
        while pending and -pending[0] not in rem:
            heapq.heappop(pending)
        if si < nkeys and (not pending or skeys[si] >= -pending[0]):
            lead = skeys[si]
            si += 1
        elif pending:
            lead = -heapq.heappop(pending)
        else:
            break
        mkey = lead - dlead + base
        for s in shifts:
            if ((mkey >> s) & _FIELD_MASK) < _OFFSET:
                return None
        lc = rem.pop(lead)
        if lc % dlc:
            return None
        coef = lc // dlc
        q[mkey] = coef
        off = mkey - base
        for dk, dc in dterms:
            k = dk + dlead + off
            if k in rem:
                nc = rem[k] - coef * dc
                if nc:
                    rem[k] = nc
                else:
                    del rem[k]
            else:
                rem[k] = -coef * dc
                heapq.heappush(pending, -k)
    return Poly(space, q, 1)
