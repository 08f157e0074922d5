"""Universal series, full partition functions, closed forms and identity checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InternalInvariantViolation, TruncationTooShallow, UnknownForm
from .partitions import (Partition, enumerate_partitions, macmahon, q_offset,
                         topological_dt, topological_pt)
from .symbolic.poly import (K_SPACE, K2_SPACE, K1_SPACE, COH_SPACE, COH2_SPACE,
                            KAPPA_SPACE, REF_SPACE, space)
from .symbolic.ratfunc import RationalFunction, exp_limit
from .symbolic.series import FRACTIONS, QSeries, RFRing, geometric_inverse
from .symbolic.characters import VirtualCharacter, bracket
from .vertex import (COHOMOLOGY, DT, K_THEORY, PT, VertexCache, _int_pow, _ring2,
                     edge_factors, paired_vertex_series, vertex_series)

RING_T1 = RFRing(K1_SPACE)
RING_S1 = RFRing(space("s1",))
RING_KAPPA = RFRing(KAPPA_SPACE)
ANTIDIAGONAL = "antidiagonal"


@dataclass(frozen=True)
class LocalCurveGeometry:
    genus: int
    k1: int
    k2: int

    def __post_init__(self):
        if self.genus < 0:
            raise ValueError("negative genus")

    @property
    def is_cy(self) -> bool:
        return self.k1 + self.k2 == 2 * self.genus - 2

    def require_cy(self):
        if not self.is_cy:
            raise ValueError(
                f"k1+k2 = {self.k1 + self.k2} != 2g-2 = {2 * self.genus - 2}: not Calabi-Yau")


@dataclass
class UniversalTriple:
    theory: str
    flavor: str
    shape: tuple
    order: int
    restricted: bool
    genus_series: QSeries
    deg1_series: QSeries
    deg2_series: QSeries


def _restrict_series(series: QSeries, ring) -> QSeries:
    return series.map_coeffs(lambda c: c.restrict_antidiagonal(), ring)


def universal_triple(theory, flavor, shape: Partition, order: int,
                     cache: VertexCache = None, restrict=None) -> UniversalTriple:
    """The three per-diagram universal series.

    Built from the two-patch localisation products for the degree twists
    (0,0), (-2,0), (0,-2); the t3 -> 1 limit is taken before the square
    root, and the optional anti-diagonal restriction right after the limit
    (both commute with the remaining unit-series algebra).
    """
    g00 = paired_vertex_series(theory, flavor, shape, 0, 0, order, cache)
    gm20 = paired_vertex_series(theory, flavor, shape, -2, 0, order, cache)
    g0m2 = paired_vertex_series(theory, flavor, shape, 0, -2, order, cache)
    edges = edge_factors(shape, flavor)
    ring = g00.ring
    e_genus, e_deg1, e_deg2 = edges.as_tuple()
    if restrict == ANTIDIAGONAL:
        ring = RING_T1 if flavor == K_THEORY else RING_S1
        g00 = _restrict_series(g00, ring)
        gm20 = _restrict_series(gm20, ring)
        g0m2 = _restrict_series(g0m2, ring)
        e_genus = e_genus.restrict_antidiagonal()
        e_deg1 = e_deg1.restrict_antidiagonal()
        e_deg2 = e_deg2.restrict_antidiagonal()
    elif restrict is not None:
        raise ValueError(f"unknown restriction {restrict!r}")
    if not g00.coeff(0).is_one():
        raise InternalInvariantViolation("two-patch product does not start at 1")
    genus_series = g00.scalar_mul(e_genus)
    deg1_series = (g00 * gm20.inverse()).sqrt().scalar_mul(e_deg1)
    deg2_series = (g00 * g0m2.inverse()).sqrt().scalar_mul(e_deg2)
    for s, e in ((genus_series, e_genus), (deg1_series, e_deg1), (deg2_series, e_deg2)):
        if not s.coeff(0).equals(e):
            raise InternalInvariantViolation("universal series constant term != edge factor")
    return UniversalTriple(theory, flavor, shape.rows, order,
                           restrict == ANTIDIAGONAL, genus_series, deg1_series,
                           deg2_series)


def partition_function(theory, flavor, geom: LocalCurveGeometry, d: int,
                       order: int, cache: VertexCache = None,
                       restrict=None) -> QSeries:
    """The degree-d series: sum over size-d diagrams of the universal-series
    powers with their q-prefactors."""
    g, k1, k2 = geom.genus, geom.k1, geom.k2
    shapes = enumerate_partitions(d)
    offsets = {s: q_offset(s, g, k1, k2) for s in shapes}
    lowest = min(offsets.values())
    if order < lowest:
        raise TruncationTooShallow(
            f"order {order} below the lowest q-exponent {lowest}")
    total = None
    for shape in shapes:
        off = offsets[shape]
        inner = order - off
        if inner < 0:
            continue
        triple = universal_triple(theory, flavor, shape, inner, cache, restrict)
        summand = triple.genus_series.pow_int(1 - g)
        if k1:
            summand = summand * triple.deg1_series.pow_int(k1)
        if k2:
            summand = summand * triple.deg2_series.pow_int(k2)
        summand = summand.truncate(inner).shift(off)
        total = summand if total is None else total + summand
    return total


def topological_partition_function(theory, g, k1, k2, d, order) -> QSeries:
    return (topological_dt if theory == DT else topological_pt)(g, k1, k2, d, order)


# ---------------------------------------------------------------------------
# closed-form builders


def _rf_monomial(ring, expmap, coeff=1):
    return RationalFunction.monomial(ring.space, expmap, coeff)


def _bracket_in(sp, expmap):
    return bracket(VirtualCharacter.from_weights([(expmap, 1)], sp))


def _box_product_inverse(ring, weight_rf, order):
    """1 / ([w q][w q^-1]) = -q / ((1 - q w)(1 - q w^-1)) as a q-series."""
    g1 = geometric_inverse(ring, 1, weight_rf, order)
    g2 = geometric_inverse(ring, 1, weight_rf.inverse(), order)
    return (g1 * g2).shift(1).scalar_mul(Fraction(-1))


def _lift(series: QSeries, ring) -> QSeries:
    return series.map_coeffs(lambda c: RationalFunction.from_fraction(ring.space, c), ring)


def closed_form(name: str, params: dict, order: int):
    """Exact truncated expansion of a displayed closed formula.

    Names: degree0_K_A, degree0_K_B, degree0_coh_A, degree0_coh_B,
    V_empty_K, V_empty_coh, degree1_PT, antidiagonal_DT, refined_deg0,
    refined_reduced, conifold.  All are series in q except ``conifold``,
    which returns the list of coefficients of the auxiliary degree variable.
    """
    params = params or {}
    ring2 = RFRing(K2_SPACE)
    if name == "degree0_K_A":
        w = _rf_monomial(ring2, {"t1": Fraction(1, 2), "t2": Fraction(1, 2)})
        br12 = _bracket_in(K2_SPACE, {"t1": 1, "t2": 1})
        br1 = _bracket_in(K2_SPACE, {"t1": 1})
        br2 = _bracket_in(K2_SPACE, {"t2": 1})
        front = br12 * br12 * (br1 * br2).inverse() * 2
        return _box_product_inverse(ring2, w, order).scalar_mul(front).plethystic_exp()
    if name == "degree0_K_B":
        w = _rf_monomial(ring2, {"t1": Fraction(1, 2), "t2": Fraction(1, 2)})
        front = (w + w.inverse()) * Fraction(1, 2)
        return _box_product_inverse(ring2, w, order).scalar_mul(front).plethystic_exp()
    if name == "degree0_coh_A":
        ring = RFRing(COH2_SPACE)
        s1 = _rf_monomial(ring, {"s1": 1})
        s2 = _rf_monomial(ring, {"s2": 1})
        expo = (s1 + s2) * (s1 + s2) * (s1 * s2).inverse() * -2
        return _lift(macmahon(order), ring).negate_q().pow_scalar(expo)
    if name == "degree0_coh_B":
        ring = RFRing(COH2_SPACE)
        return _lift(macmahon(order), ring).negate_q().pow_int(-1)
    if name == "V_empty_K":
        ring = RFRing(K_SPACE)
        u = _rf_monomial(ring, {"t1": Fraction(1, 2), "t2": Fraction(1, 2),
                                "t3": Fraction(1, 2)})
        num = (_bracket_in(K_SPACE, {"t1": 1, "t2": 1})
               * _bracket_in(K_SPACE, {"t1": 1, "t3": 1})
               * _bracket_in(K_SPACE, {"t2": 1, "t3": 1}))
        den = (_bracket_in(K_SPACE, {"t1": 1}) * _bracket_in(K_SPACE, {"t2": 1})
               * _bracket_in(K_SPACE, {"t3": 1}))
        return _box_product_inverse(ring, u, order).scalar_mul(num * den.inverse()) \
            .plethystic_exp()
    if name == "V_empty_coh":
        ring = RFRing(COH_SPACE)
        s1 = _rf_monomial(ring, {"s1": 1})
        s2 = _rf_monomial(ring, {"s2": 1})
        s3 = _rf_monomial(ring, {"s3": 1})
        expo = (s1 + s2) * (s2 + s3) * (s1 + s3) * (s1 * s2 * s3).inverse() * -1
        return _lift(macmahon(order), ring).negate_q().pow_scalar(expo)
    if name == "degree1_PT":
        g, k1, k2 = params["g"], params["k1"], params["k2"]
        if k1 + k2 != 2 * g - 2:
            raise UnknownForm("degree1_PT closed form is stated for the Calabi-Yau case")
        br1 = _bracket_in(K2_SPACE, {"t1": 1})
        br2 = _bracket_in(K2_SPACE, {"t2": 1})
        front = _int_pow(br1, g - 1 - k1) * _int_pow(br2, g - 1 - k2)
        kroot = _rf_monomial(ring2, {"t1": Fraction(1, 2), "t2": Fraction(1, 2)})
        # [t4][t5] = kappa^(1/2) + kappa^(-1/2) - q - 1/q with kappa = t1 t2
        s45 = QSeries.from_terms(ring2, {
            -1: ring2.one() * Fraction(-1),
            0: kroot + kroot.inverse(),
            1: ring2.one() * Fraction(-1),
        }, order + 2 * abs(g - 1) + 2)
        return s45.pow_int(g - 1).scalar_mul(front).truncate(order)
    if name == "antidiagonal_DT":
        g, k1, k2, d = params["g"], params["k1"], params["k2"], params["d"]
        total = None
        for shape in enumerate_partitions(d):
            off = q_offset(shape, g, k1, k2)
            inner = order - off
            if inner < 0:
                continue
            hooks = RationalFunction.one(K1_SPACE)
            hook_poly = QSeries.one(FRACTIONS, max(inner, 0))
            for box in shape.boxes():
                h = shape.hook(box)
                hooks = hooks * _int_pow(_bracket_in(K1_SPACE, {"t1": h}),
                                         2 * g - 2 - k1 - k2)
                hook_poly = hook_poly * (QSeries.one(FRACTIONS, inner)
                                         - QSeries.q_power(FRACTIONS, h, inner))
            mac_part = (macmahon(inner).pow_int(-1) * hook_poly).pow_int(k1 + k2)
            summand = _lift(mac_part, RING_T1).scalar_mul(hooks).shift(off)
            total = summand if total is None else total + summand
        sign = Fraction(-1) ** ((d * params["k2"]) % 2)
        return total.scalar_mul(sign)
    if name == "refined_deg0":
        g = params["g"]
        f = _refined_box_inverse(order).scalar_mul(
            (_kappa_root() + _kappa_root().inverse()) * Fraction(1 - g))
        return f.plethystic_exp()
    if name == "refined_reduced":
        g, k1, d = params["g"], params["k1"], params["d"]
        total = None
        for shape in enumerate_partitions(d):
            norm = shape.norm_sq()
            norm_conj = shape.conjugate().norm_sq()
            t4_pow = Fraction(norm * (1 - g)) + Fraction(k1 * norm, 2)
            t5_pow = Fraction(k1 * norm_conj, 2)
            qshift = t4_pow - t5_pow
            if qshift.denominator != 1:
                raise InternalInvariantViolation("fractional q-shift in refined form")
            kexp = -(t4_pow + t5_pow) / 2
            inner = order - int(qshift)
            if inner < 0:
                continue
            summand = QSeries.one(RING_KAPPA, inner)
            for box in shape.boxes():
                a, l = shape.arm(box), shape.leg(box)
                h = a + l + 1
                c1 = _rf_monomial(RING_KAPPA, {"kappa": Fraction(l - a - 1, 2)})
                c2 = _rf_monomial(RING_KAPPA, {"kappa": Fraction(l + 1 - a, 2)})
                summand = summand * (geometric_inverse(RING_KAPPA, h, c1, inner)
                                     * geometric_inverse(RING_KAPPA, h, c2, inner))
            summand = summand.pow_int(1 - g)
            summand = summand.scalar_mul(_rf_monomial(RING_KAPPA, {"kappa": kexp}))
            summand = summand.shift(int(qshift))
            total = summand if total is None else total + summand
        sign = Fraction(-1) ** ((d * k1) % 2)
        return total.scalar_mul(sign)
    if name == "conifold":
        qmax = params.get("q_order", order)
        g1 = _refined_box_inverse(qmax)
        q2 = (g1 * g1 + frobenius_q(g1, 2).truncate(g1.order * 2 - 1)) \
            .scalar_mul(Fraction(1, 2))
        return [QSeries.one(RING_KAPPA, qmax), g1, q2.truncate(qmax)]
    raise UnknownForm(name)


def frobenius_q(series: QSeries, m: int) -> QSeries:
    """q -> q^m together with the exponent scaling on every coefficient."""
    terms = {}
    for i, c in enumerate(series.coeffs):
        if not series.ring.is_zero(c):
            terms[m * (series.low + i)] = series.ring.frobenius(c, m)
    return QSeries.from_terms(series.ring, terms, m * series.order + (m - 1))


def _kappa_root() -> RationalFunction:
    return RationalFunction.monomial(KAPPA_SPACE, {"kappa": Fraction(1, 2)})


def _refined_box_inverse(order: int) -> QSeries:
    """1/([t4][t5]) = -q/((1 - q kappa^(1/2))(1 - q kappa^(-1/2)))."""
    g1 = geometric_inverse(RING_KAPPA, 1, _kappa_root(), order)
    g2 = geometric_inverse(RING_KAPPA, 1, _kappa_root().inverse(), order)
    return (g1 * g2).shift(1).scalar_mul(Fraction(-1))


# ---------------------------------------------------------------------------
# refined limit


@dataclass
class RefinedSeries:
    genus: int
    k1: int
    d: int
    series: QSeries  # over RING_KAPPA


def refined_partition_function(geom: LocalCurveGeometry, d: int, order: int,
                               cache: VertexCache = None) -> RefinedSeries:
    """lim_{L -> inf} of the K-theoretic series under t1 = L kappa^(1/2),
    t2 = kappa^(1/2)/L, coefficient by coefficient."""
    geom.require_cy()
    series = partition_function(DT, K_THEORY, geom, d, order, cache)

    def one_coeff(rf):
        sub = rf.substitute({"t1": {"L": 1, "kappa": Fraction(1, 2)},
                             "t2": {"L": -1, "kappa": Fraction(1, 2)}},
                            REF_SPACE)
        return sub.refined_limit("L")

    return RefinedSeries(geom.genus, geom.k1, d,
                         series.map_coeffs(one_coeff, RING_KAPPA))


def cohomological_limit_series(series: QSeries, power: int) -> QSeries:
    """lim_{b->0} b^power * S|_{t_i = exp(b s_i)} coefficientwise."""
    src = series.ring.space
    pairs = {"t1": "s1", "t2": "s2", "t3": "s3"}
    pairs = {v: pairs[v] for v in src.names}
    target = space(*(pairs[v] for v in src.names))
    ring = RFRing(target)
    return series.map_coeffs(lambda c: exp_limit(c, power, pairs, target), ring)


# ---------------------------------------------------------------------------
# identity checks


@dataclass
class Report:
    check: str
    params: dict
    status: str
    first_discrepancy: dict = None

    @property
    def passed(self):
        return self.status == "pass"

    def to_json(self):
        out = {"check": self.check, "params": self.params, "status": self.status}
        if self.first_discrepancy is not None:
            out["first_discrepancy"] = self.first_discrepancy
        return out


def _series_report(check, params, lhs: QSeries, rhs: QSeries) -> Report:
    diff = lhs.first_discrepancy(rhs)
    if diff is None:
        return Report(check, params, "pass")
    n, a, b = diff
    return Report(check, params, "fail",
                  {"q_power": n, "lhs": repr(a), "rhs": repr(b)})


def dtpt_check(flavor, geom: LocalCurveGeometry, d: int, order: int,
               cache: VertexCache = None) -> Report:
    """DT_d = DT_0 * PT_d, in any of the three flavors ('top' included)."""
    params = {"flavor": flavor, "g": geom.genus, "k1": geom.k1, "k2": geom.k2,
              "d": d, "order": order}
    if flavor == "top":
        lhs = topological_dt(geom.genus, geom.k1, geom.k2, d, order)
        rhs = (topological_dt(geom.genus, geom.k1, geom.k2, 0, order)
               * topological_pt(geom.genus, geom.k1, geom.k2, d, order)).truncate(order)
        return _series_report("dtpt", params, lhs, rhs)
    lhs = partition_function(DT, flavor, geom, d, order, cache)
    rhs = (partition_function(DT, flavor, geom, 0, order, cache)
           * partition_function(PT, flavor, geom, d, order, cache))
    return _series_report("dtpt", params, lhs, rhs.truncate(min(order, rhs.order)))


def limit_check(geom: LocalCurveGeometry, d: int, order: int,
                cache: VertexCache = None) -> Report:
    """The b -> 0 limit of the K-theoretic series equals the cohomological one."""
    power = d * (2 - 2 * geom.genus + geom.k1 + geom.k2)
    params = {"g": geom.genus, "k1": geom.k1, "k2": geom.k2, "d": d,
              "order": order, "power": power}
    khat = partition_function(DT, K_THEORY, geom, d, order, cache)
    lhs = cohomological_limit_series(khat, power)
    rhs = partition_function(DT, COHOMOLOGY, geom, d, order, cache)
    return _series_report("coh-limit", params, lhs, rhs)
