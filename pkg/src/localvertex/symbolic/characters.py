"""Virtual torus characters and their K-theoretic / cohomological Euler classes."""

from __future__ import annotations

from fractions import Fraction

from ..errors import FixedWeightPresent, NonIntegralExponent
from .poly import Poly, VarSpace, space, K_SPACE, SCALE
from .ratfunc import RationalFunction


class VirtualCharacter:
    """Integer combination of torus weights t1^a t2^b t3^c (packed keys)."""

    __slots__ = ("space", "terms")

    def __init__(self, sp: VarSpace = K_SPACE, terms: dict = None):
        self.space = sp
        self.terms = terms or {}

    @staticmethod
    def from_weights(weights, sp: VarSpace = K_SPACE) -> "VirtualCharacter":
        """weights: iterable of (expmap, multiplicity)."""
        ch = VirtualCharacter(sp, {})
        for expmap, mult in weights:
            ch._bump(sp.pack_map(expmap), mult)
        return ch

    def _bump(self, key, mult):
        n = self.terms.get(key, 0) + mult
        if n:
            self.terms[key] = n
        elif key in self.terms:
            del self.terms[key]

    def copy(self) -> "VirtualCharacter":
        return VirtualCharacter(self.space, dict(self.terms))

    def __add__(self, other):
        out = self.copy()
        for k, m in other.terms.items():
            out._bump(k, m)
        return out

    def __sub__(self, other):
        out = self.copy()
        for k, m in other.terms.items():
            out._bump(k, -m)
        return out

    def __neg__(self):
        return VirtualCharacter(self.space, {k: -m for k, m in self.terms.items()})

    def __mul__(self, other):
        """Tensor product: multiply weights, multiply multiplicities."""
        if isinstance(other, int):
            if other == 0:
                return VirtualCharacter(self.space, {})
            return VirtualCharacter(self.space, {k: other * m for k, m in self.terms.items()})
        out = VirtualCharacter(self.space, {})
        base = self.space.base
        for ka, ma in self.terms.items():
            for kb, mb in other.terms.items():
                out._bump(ka + kb - base, ma * mb)
        return out

    __rmul__ = __mul__

    def dual(self) -> "VirtualCharacter":
        base2 = 2 * self.space.base
        return VirtualCharacter(self.space, {base2 - k: m for k, m in self.terms.items()})

    def scale_weight(self, expmap: dict) -> "VirtualCharacter":
        """Multiply every weight by a fixed monomial."""
        shift = self.space.pack_map(expmap) - self.space.base
        return VirtualCharacter(self.space, {k + shift: m for k, m in self.terms.items()})

    def rank(self) -> int:
        return sum(self.terms.values())

    def weights(self):
        """Iterate (exponent tuple, multiplicity)."""
        for k, m in sorted(self.terms.items()):
            yield self.space.unpack(k), m

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return self.space is other.space and self.terms == other.terms

    def __repr__(self):
        bits = []
        for k, m in sorted(self.terms.items()):
            bits.append(f"{m}*{self.space.mono_str(k)}")
        return " + ".join(bits) if bits else "0"


def bracket(ch: VirtualCharacter) -> RationalFunction:
    """The symmetrised K-theoretic Euler class: products of x^(1/2) - x^(-1/2).

    Positive-multiplicity weights go to the numerator, negative ones to the
    denominator.  The trivial weight is rejected: it signals a non-movable
    character.
    """
    sp = ch.space
    out = RationalFunction.one(sp)
    base = sp.base
    for key, mult in ch.terms.items():
        if key == base:
            raise FixedWeightPresent("trivial weight under the symmetrised Euler class")
        poly = Poly(sp, {key: 1, base: -1}, 1)
        piece = RationalFunction.from_poly(poly)
        half = RationalFunction(sp, Fraction(1), base - (key - base) // 2)
        if (key - base) % 2:
            raise NonIntegralExponent("weight exponent not representable at half scale")
        piece = piece * half
        if mult < 0:
            piece = piece.inverse()
        for _ in range(abs(mult)):
            out = out * piece
    return out


_T_TO_S = {"t1": "s1", "t2": "s2", "t3": "s3"}


def linear_euler(ch: VirtualCharacter) -> RationalFunction:
    """The cohomological Euler class: products of linear forms in s-variables."""
    sp = ch.space
    names = tuple(_T_TO_S[v] for v in sp.names)
    target = space(*names)
    out = RationalFunction.one(target)
    base = sp.base
    for key, mult in ch.terms.items():
        if key == base:
            raise FixedWeightPresent("trivial weight under the Euler class")
        exps = sp.unpack(key)
        terms = {}
        for name, e in zip(names, exps):
            if e:
                if e.denominator != 1:
                    raise NonIntegralExponent(f"non-integral weight exponent {e}")
                terms[target.pack_map({name: 1})] = terms.get(target.pack_map({name: 1}), 0) + int(e)
        poly = Poly(target, terms, 1)
        piece = RationalFunction.from_poly(poly)
        if mult < 0:
            piece = piece.inverse()
        for _ in range(abs(mult)):
            out = out * piece
    return out
