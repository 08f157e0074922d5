"""The 1-leg equivariant vertex: weights, series, edge factors, cache.

Torus conventions: the diagram character puts a box (i, j) at weight
t1^(-i) t2^(-j); the third axis t3 grades the depth of a labelling entry
(negative powers on the Hilbert-scheme side, positive on the stable-pair
side).  All weights and multiplicities are exact integers.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from fractions import Fraction

from .errors import CacheError, InternalInvariantViolation, MismatchBetweenDefinitions, \
    NonIntegralExponent
from .partitions import BoxLabelling, Partition, REVERSE, SKEW, enumerate_labellings
from .symbolic.poly import (K_SPACE, K2_SPACE, COH_SPACE, COH2_SPACE, Poly,
                            VarSpace, SCALE)
from .symbolic.ratfunc import EpsSeries, RationalFunction, rf_sum
from .symbolic.series import QSeries, RFRing
from .symbolic.characters import VirtualCharacter, bracket, linear_euler

DT = "dt"
PT = "pt"
K_THEORY = "k"
COHOMOLOGY = "coh"

RING_K3 = RFRing(K_SPACE)
RING_K2 = RFRing(K2_SPACE)
RING_C3 = RFRing(COH_SPACE)
RING_C2 = RFRing(COH2_SPACE)


def _ring3(flavor):
    return RING_K3 if flavor == K_THEORY else RING_C3


def _ring2(flavor):
    return RING_K2 if flavor == K_THEORY else RING_C2


# ---------------------------------------------------------------------------
# characters


def diagram_character(shape: Partition, sp: VarSpace = K2_SPACE) -> VirtualCharacter:
    ch = VirtualCharacter(sp, {})
    for (i, j) in shape.boxes():
        ch._bump(sp.pack_map({"t1": -i, "t2": -j}), 1)
    return ch


def tangent_character(shape: Partition) -> VirtualCharacter:
    """Tangent weights of the point Hilbert scheme of the plane at the
    monomial ideal of the diagram: Z + Z^dual t1 t2 - (1-t1)(1-t2) Z Z^dual."""
    sp = K2_SPACE
    z = diagram_character(shape, sp)
    zbar = z.dual()
    one_minus = VirtualCharacter.from_weights([({}, 1), ({"t1": 1}, -1)], sp) * \
        VirtualCharacter.from_weights([({}, 1), ({"t2": 1}, -1)], sp)
    return z + zbar.scale_weight({"t1": 1, "t2": 1}) - one_minus * z * zbar


def tangent_character_armleg(shape: Partition) -> VirtualCharacter:
    """The same weights through arm/leg data, used as a cross-check."""
    sp = K2_SPACE
    ch = VirtualCharacter(sp, {})
    for box in shape.boxes():
        a, l = shape.arm(box), shape.leg(box)
        ch._bump(sp.pack_map({"t1": -l, "t2": a + 1}), 1)
        ch._bump(sp.pack_map({"t1": l + 1, "t2": -a}), 1)
    return ch


def derivative_character(ch: VirtualCharacter, axis: int) -> VirtualCharacter:
    """t_axis d/dt_axis: scale each multiplicity by the axis exponent."""
    var = ch.space.names[axis - 1]
    out = VirtualCharacter(ch.space, {})
    for key, mult in ch.terms.items():
        e = ch.space.exponent(key, var)
        if e.denominator != 1:
            raise NonIntegralExponent(f"{var}^{e} under the derivative operator")
        if e:
            out._bump(key, mult * int(e))
    return out


def _labelling_character(shape: Partition, lab: BoxLabelling) -> VirtualCharacter:
    ch = VirtualCharacter(K_SPACE, {})
    if lab.kind == SKEW:
        for (i, j), n in lab.entries.items():
            for alpha in range(n):
                ch._bump(K_SPACE.pack_map({"t1": -i, "t2": -j, "t3": -alpha}), 1)
    else:
        for (i, j), n in lab.entries.items():
            for alpha in range(1, n + 1):
                ch._bump(K_SPACE.pack_map({"t1": -i, "t2": -j, "t3": alpha}), 1)
    return ch


def _vertex_weight(shape: Partition, lab: BoxLabelling) -> VirtualCharacter:
    sp = K_SPACE
    z = _labelling_character(shape, lab)
    zbar = z.dual()
    zshape = diagram_character(shape, sp)
    zshapebar = zshape.dual()
    one_minus_12 = VirtualCharacter.from_weights([({}, 1), ({"t1": 1}, -1)], sp) * \
        VirtualCharacter.from_weights([({}, 1), ({"t2": 1}, -1)], sp)
    one_minus_3 = VirtualCharacter.from_weights([({}, 1), ({"t3": 1}, -1)], sp)
    inner = (-1 * (zshape * zbar).scale_weight({"t3": 1})) + zshapebar * z \
        + one_minus_3 * z * zbar
    v = z - zbar.scale_weight({"t1": 1, "t2": 1, "t3": 1}) - one_minus_12 * inner
    _check_weight(v, lab)
    return v


def _check_weight(v: VirtualCharacter, lab: BoxLabelling):
    if v.rank() != 0:
        raise InternalInvariantViolation(f"vertex weight rank {v.rank()} != 0 at {lab!r}")
    sp = v.space
    for key in v.terms:
        e1, e2, e3 = sp.unpack(key)
        if e1 == e2 == e3:
            raise InternalInvariantViolation(
                f"diagonal weight t^({e1},{e2},{e3}) in vertex weight at {lab!r}")


def dt_vertex_weight(shape: Partition, lab: BoxLabelling) -> VirtualCharacter:
    if lab.kind != SKEW or lab.shape != shape:
        raise ValueError("Hilbert-scheme vertex weight needs a skew labelling of the shape")
    return _vertex_weight(shape, lab)


def pt_vertex_weight(shape: Partition, lab: BoxLabelling) -> VirtualCharacter:
    if lab.kind != REVERSE or lab.shape != shape:
        raise ValueError("stable-pairs vertex weight needs a reverse labelling of the shape")
    return _vertex_weight(shape, lab)


def vertex_term(theory, flavor, shape: Partition, lab: BoxLabelling) -> RationalFunction:
    """The localisation measure of one labelling: Euler class of minus the weight."""
    weight = dt_vertex_weight(shape, lab) if theory == DT else pt_vertex_weight(shape, lab)
    neg = -weight
    return bracket(neg) if flavor == K_THEORY else linear_euler(neg)


# ---------------------------------------------------------------------------
# per-labelling term tables (in-process memo)

_TERMS_MEMO: dict = {}


def vertex_terms(theory, flavor, shape: Partition, order: int):
    """Lists of (labelling, term) per size 0..order, memoized incrementally."""
    key = (theory, flavor, shape.rows)
    per_size = _TERMS_MEMO.setdefault(key, [])
    kind = SKEW if theory == DT else REVERSE
    while len(per_size) <= order:
        n = len(per_size)
        batch = []
        for lab in enumerate_labellings(kind, shape, n):
            batch.append((lab, vertex_term(theory, flavor, shape, lab)))
        per_size.append(batch)
    return per_size[:order + 1]


@dataclass
class VertexSeries:
    theory: str
    flavor: str
    shape: tuple
    order: int
    series: QSeries


def vertex_series(theory, flavor, shape: Partition, order: int,
                  cache: "VertexCache" = None) -> VertexSeries:
    """The 1-leg vertex as a q-series with expanded rational-function
    coefficients: sum over all labellings, collected by size."""
    if cache is not None:
        hit = cache.get_vertex(theory, flavor, shape, order)
        if hit is not None:
            return hit
    ring = _ring3(flavor)
    terms = vertex_terms(theory, flavor, shape, order)
    coeffs = [rf_sum([rf for _, rf in batch], ring.space) for batch in terms]
    series = QSeries(ring, 0, order, coeffs)
    if not series.coeff(0).is_one():
        raise InternalInvariantViolation("vertex series constant term is not 1")
    result = VertexSeries(theory, flavor, shape.rows, order, series)
    if cache is not None:
        cache.put_vertex(result)
    return result


# ---------------------------------------------------------------------------
# twisted two-patch products


def twist_term_k(rf: RationalFunction, k1: int, k2: int) -> RationalFunction:
    """t1 -> t1 t3^(-k1), t2 -> t2 t3^(-k2), t3 -> t3^(-1) (simultaneous)."""
    return rf.substitute({
        "t1": {"t1": 1, "t3": -k1},
        "t2": {"t2": 1, "t3": -k2},
        "t3": {"t3": -1},
    })

def twist_term_coh(rf: RationalFunction, k1: int, k2: int) -> RationalFunction:
    """s1 -> s1 - k1 s3, s2 -> s2 - k2 s3, s3 -> -s3 (simultaneous)."""
    sp = rf.space
    out = rf.subs_var_poly("s3", Poly.monomial(sp, (0, 0, 1), -1))
    if k1:
        out = out.subs_var_poly("s1", Poly(sp, {sp.pack_map({"s1": 1}): 1,
                                                sp.pack_map({"s3": 1}): -k1}, 1))
    if k2:
        out = out.subs_var_poly("s2", Poly(sp, {sp.pack_map({"s2": 1}): 1,
                                                sp.pack_map({"s3": 1}): -k2}, 1))
    return out


def _t3_pole_order(rf: RationalFunction) -> int:
    """How many denominator factors vanish at t3 = 1."""
    p = 0
    for f, e in rf.denf.items():
        if f.poly.subs_var_one("t3").is_zero():
            p += e
    return p


def _s3_pole_order(rf: RationalFunction) -> int:
    """Order of the s3 pole carried by the monomial part (factors are regular)."""
    sp = rf.space
    p = -int(sp.exponent(rf.mono, "s3"))
    if rf.num is not None:
        p = max(p, -int(rf.num.var_degree_range("s3")[0]))
    return max(p, 0)


def _expand_k(rf: RationalFunction, hi: int) -> EpsSeries:
    return rf.eps_expansion("t3", 1, {}, K2_SPACE, hi)


def _expand_coh(rf: RationalFunction, hi: int) -> EpsSeries:
    return rf.eps_expansion("s3", 1, {}, COH2_SPACE, hi, additive_zero=True)


def paired_vertex_series(theory, flavor, shape: Partition, k1: int, k2: int,
                         order: int, cache: "VertexCache" = None) -> QSeries:
    """The two-patch localisation product

        ( V(q) * V(q)|twisted by the two degrees ) |_(t3 -> 1)

    computed labelling pair by labelling pair.  Pairs are grouped by the sum
    of their labellings; each group is the localisation sum of one compact
    fixed component, so its expansion must be regular at t3 = 1 (asserted at
    runtime) and contributes its limit to the q-coefficient.
    """
    if cache is not None:
        hit = cache.get_pairprod(theory, flavor, shape, k1, k2, order)
        if hit is not None:
            return hit
    ring = _ring2(flavor)
    is_k = flavor == K_THEORY
    terms = vertex_terms(theory, flavor, shape, order)
    plain = []
    twisted = []
    pole_plain = []
    pole_twist = []
    for batch in terms:
        row_p, row_t = [], []
        pp = pt = 0
        for lab, rf in batch:
            trf = twist_term_k(rf, k1, k2) if is_k else twist_term_coh(rf, k1, k2)
            p_rf = _t3_pole_order(rf) if is_k else _s3_pole_order(rf)
            p_trf = _t3_pole_order(trf) if is_k else _s3_pole_order(trf)
            row_p.append((lab, rf, p_rf))
            row_t.append((lab, trf, p_trf))
            pp = max(pp, p_rf)
            pt = max(pt, p_trf)
        plain.append(row_p)
        twisted.append(row_t)
        pole_plain.append(pp)
        pole_twist.append(pt)
    expand = _expand_k if is_k else _expand_coh
    # precompute expansions once per term, wide enough for every partner size
    plain_exp, twist_exp = [], []
    for i in range(order + 1):
        hi_p = max(pole_twist[:order - i + 1], default=0)
        hi_t = max(pole_plain[:order - i + 1], default=0)
        plain_exp.append([(lab, expand(rf, hi_p)) for lab, rf, _ in plain[i]])
        twist_exp.append([(lab, expand(rf, hi_t)) for lab, rf, _ in twisted[i]])
    coeffs = []
    for n in range(order + 1):
        groups: dict = {}
        for i in range(n + 1):
            j = n - i
            for lab_a, ser_a in plain_exp[i]:
                for lab_b, ser_b in twist_exp[j]:
                    prod = ser_a.mul(ser_b, hi=0)
                    gkey = _merge_key(lab_a, lab_b)
                    if gkey in groups:
                        groups[gkey] = groups[gkey].add(prod)
                    else:
                        groups[gkey] = prod
        pieces = []
        for gkey, ser in sorted(groups.items()):
            ser.assert_regular(f"in the two-patch product at q^{n}")
            pieces.append(ser.coeff(0))
        coeffs.append(rf_sum(pieces, ring.space))
    series = QSeries(ring, 0, order, coeffs)
    if cache is not None:
        cache.put_pairprod(theory, flavor, shape, k1, k2, series)
    return series


def _merge_key(lab_a: BoxLabelling, lab_b: BoxLabelling):
    merged = dict(lab_a.entries)
    for box, e in lab_b.entries.items():
        merged[box] = merged.get(box, 0) + e
    return tuple(sorted(merged.items()))


def _term_signature(rf: RationalFunction, swap: bool):
    """Canonical signature of a factored term, optionally under t1 <-> t2."""
    if swap:
        images = {"t1": K_SPACE.pack_map({"t2": 1}), "t2": K_SPACE.pack_map({"t1": 1}),
                  "t3": K_SPACE.pack_map({"t3": 1})}
        rf = rf.remap(K_SPACE, images)
    num_key = tuple(sorted(rf.num.terms.items())) + (rf.num.den,) if rf.num is not None else ()
    return (rf.coef, rf.mono, num_key,
            tuple(sorted((f._key, e) for f, e in rf.numf.items())),
            tuple(sorted((f._key, e) for f, e in rf.denf.items())))


def conjugate_symmetry_ok(theory, flavor, shape: Partition, order: int) -> bool:
    """Check that the vertex terms of the conjugate diagram are exactly the
    t1 <-> t2 images of the terms of the diagram, size by size.

    Transposing a labelling transposes its weight, so the two multisets must
    agree; this reduces vertex identities to one diagram per conjugacy pair.
    """
    conj = shape.conjugate()
    mine = vertex_terms(theory, flavor, shape, order)
    theirs = vertex_terms(theory, flavor, conj, order)
    for n in range(order + 1):
        a = sorted(_term_signature(rf, swap=True) for _, rf in mine[n])
        b = sorted(_term_signature(rf, swap=False) for _, rf in theirs[n])
        if a != b:
            return False
    return True


def vertex_dtpt_report(shape: Partition, order: int, cache: "VertexCache" = None):
    """Exact comparison of V_shape against V_empty * V_shape^PT through the
    given order.  Returns None on success, else the first discrepancy."""
    lhs = vertex_series(DT, K_THEORY, shape, order, cache).series
    empty = vertex_series(DT, K_THEORY, Partition(), order, cache).series
    pt = vertex_series(PT, K_THEORY, shape, order, cache).series
    return lhs.first_discrepancy((empty * pt).truncate(order))


# ---------------------------------------------------------------------------
# edge factors


@dataclass
class EdgeFactors:
    shape: tuple
    flavor: str
    genus_factor: RationalFunction
    deg1_factor: RationalFunction
    deg2_factor: RationalFunction

    def as_tuple(self):
        return (self.genus_factor, self.deg1_factor, self.deg2_factor)


def _weight_bracket(expmap) -> RationalFunction:
    return bracket(VirtualCharacter.from_weights([(expmap, 1)], K2_SPACE))


def _linear_form(c1, c2) -> RationalFunction:
    sp = COH2_SPACE
    poly = Poly(sp, {sp.pack_map({"s1": 1}): c1, sp.pack_map({"s2": 1}): c2}, 1)
    return RationalFunction.from_poly(poly)


def edge_factors(shape: Partition, flavor) -> EdgeFactors:
    """Euler classes of minus the tangent weights and their two derivative
    twists, computed both from the characters and from the closed hook
    products; the two must agree."""
    tangent = tangent_character(shape)
    d1 = derivative_character(tangent, 1)
    d2 = derivative_character(tangent, 2)
    if flavor == K_THEORY:
        op = bracket
        sp = K2_SPACE
    else:
        op = linear_euler
        sp = COH2_SPACE
    from_char = (op(-tangent), op(-d1), op(-d2))

    genus = RationalFunction.one(sp)
    deg1 = RationalFunction.one(sp)
    deg2 = RationalFunction.one(sp)
    for box in shape.boxes():
        a, l = shape.arm(box), shape.leg(box)
        if flavor == K_THEORY:
            up = _weight_bracket({"t1": -l, "t2": a + 1})
            down = _weight_bracket({"t1": l + 1, "t2": -a})
        else:
            up = _linear_form(-l, a + 1)
            down = _linear_form(l + 1, -a)
        genus = genus * (up * down).inverse()
        deg1 = deg1 * _int_pow(up, l) * _int_pow(down, -(l + 1))
        deg2 = deg2 * _int_pow(down, a) * _int_pow(up, -(a + 1))
    from_hooks = (genus, deg1, deg2)

    for lhs, rhs in zip(from_char, from_hooks):
        if not lhs.equals(rhs):
            raise MismatchBetweenDefinitions(
                f"edge factor mismatch for {shape.rows} ({flavor})")
    return EdgeFactors(shape.rows, flavor, *from_char)


def _int_pow(rf: RationalFunction, n: int) -> RationalFunction:
    out = RationalFunction.one(rf.space)
    base = rf if n >= 0 else rf.inverse()
    for _ in range(abs(n)):
        out = out * base
    return out


# ---------------------------------------------------------------------------
# persistent cache


class VertexCache:
    """One JSON file per cached object; atomic writes; checksum-verified."""

    SCHEMA = 1

    def __init__(self, path=None):
        self.dir = str(path or os.environ.get("LOCALVERTEX_CACHE")
                       or os.path.join(os.path.expanduser("~"), ".cache", "localvertex"))

    def _ensure(self):
        try:
            os.makedirs(self.dir, exist_ok=True)
        except OSError as exc:
            raise CacheError(f"cannot create cache dir {self.dir}: {exc}") from exc

    @staticmethod
    def _shape_tag(rows):
        return "-".join(str(r) for r in rows) if rows else "e"

    def _vertex_path(self, theory, flavor, rows):
        return os.path.join(self.dir, f"vertex_{theory}_{flavor}_{self._shape_tag(rows)}.json")

    def _pair_path(self, theory, flavor, rows, k1, k2):
        return os.path.join(
            self.dir, f"pairprod_{theory}_{flavor}_{self._shape_tag(rows)}_{k1}_{k2}.json")

    @staticmethod
    def _checksum(payload) -> str:
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def _read(self, path):
        if not os.path.exists(path):
            return None
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            if doc.get("schema") != self.SCHEMA:
                return None
            if doc.get("checksum") != self._checksum(doc["series"]):
                return None
            return doc
        except (OSError, ValueError, KeyError):
            return None

    def _write(self, path, doc):
        self._ensure()
        doc["checksum"] = self._checksum(doc["series"])
        tmp = path + ".tmp"
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
            os.replace(tmp, path)
        except OSError as exc:
            raise CacheError(f"cache write failed for {path}: {exc}") from exc

    # -- vertex series ---------------------------------------------------
    def get_vertex(self, theory, flavor, shape: Partition, order: int):
        doc = self._read(self._vertex_path(theory, flavor, shape.rows))
        if doc is None or doc["order"] < order:
            return None
        series = QSeries.from_cache_json(_ring3(flavor), doc["series"]).truncate(order)
        return VertexSeries(theory, flavor, shape.rows, order, series)

    def put_vertex(self, vs: VertexSeries):
        path = self._vertex_path(vs.theory, vs.flavor, vs.shape)
        doc = self._read(path)
        if doc is not None and doc["order"] >= vs.order:
            return
        self._write(path, {"schema": self.SCHEMA, "kind": "vertex",
                           "theory": vs.theory, "flavor": vs.flavor,
                           "shape": list(vs.shape), "order": vs.order,
                           "series": vs.series.to_cache_json()})

    # -- two-patch products ------------------------------------------------
    def get_pairprod(self, theory, flavor, shape: Partition, k1, k2, order):
        doc = self._read(self._pair_path(theory, flavor, shape.rows, k1, k2))
        if doc is None or doc["order"] < order:
            return None
        return QSeries.from_cache_json(_ring2(flavor), doc["series"]).truncate(order)

    def put_pairprod(self, theory, flavor, shape: Partition, k1, k2, series: QSeries):
        path = self._pair_path(theory, flavor, shape.rows, k1, k2)
        doc = self._read(path)
        if doc is not None and doc["order"] >= series.order:
            return
        self._write(path, {"schema": self.SCHEMA, "kind": "pairprod",
                           "theory": theory, "flavor": flavor,
                           "shape": list(shape.rows), "k1": k1, "k2": k2,
                           "order": series.order, "series": series.to_cache_json()})

    # -- administration ----------------------------------------------------
    def entries(self):
        if not os.path.isdir(self.dir):
            return []
        out = []
        for name in sorted(os.listdir(self.dir)):
            if not name.endswith(".json"):
                continue
            doc = self._read(os.path.join(self.dir, name))
            if doc is None:
                continue
            out.append({k: doc[k] for k in ("kind", "theory", "flavor", "shape", "order")
                        if k in doc} | ({"k1": doc["k1"], "k2": doc["k2"]}
                                        if "k1" in doc else {}))
        return out

    def clear(self):
        if not os.path.isdir(self.dir):
            return
        try:
            for name in os.listdir(self.dir):
                if name.endswith(".json") or name.endswith(".tmp"):
                    os.remove(os.path.join(self.dir, name))
        except OSError as exc:
            raise CacheError(f"cache clear failed: {exc}") from exc
