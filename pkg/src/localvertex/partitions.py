"""Young diagrams, skew and reverse plane partitions, and their counting series.

Conventions: a box is (i, j) with i the row (vertical) index and j the column
index; the diagram of ``rows = (r0 >= r1 >= ...)`` holds the boxes (i, j) with
0 <= j < rows[i].  Skew plane partitions label the complement of the diagram
inside the positive quadrant and are non-increasing toward larger indices;
reverse plane partitions label the diagram and are non-decreasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .symbolic.series import QSeries, FRACTIONS, geometric_inverse

SKEW = "skew"
REVERSE = "reverse"


class Partition:
    __slots__ = ("rows",)

    def __init__(self, rows=()):
        rows = tuple(int(r) for r in rows if r != 0)
        for a, b in zip(rows, rows[1:]):
            if a < b:
                raise ValueError(f"rows not non-increasing: {rows}")
        if any(r < 0 for r in rows):
            raise ValueError(f"negative row in {rows}")
        self.rows = rows

    @property
    def size(self) -> int:
        return sum(self.rows)

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"Partition{self.rows}"

    def __iter__(self):
        return iter(self.rows)

    def boxes(self):
        return [(i, j) for i, r in enumerate(self.rows) for j in range(r)]

    def contains(self, box) -> bool:
        i, j = box
        return 0 <= i < len(self.rows) and 0 <= j < self.rows[i]

    def conjugate(self) -> "Partition":
        if not self.rows:
            return Partition()
        return Partition(tuple(sum(1 for r in self.rows if r > j)
                               for j in range(self.rows[0])))

    def arm(self, box) -> int:
        i, j = box
        return self.rows[i] - j - 1

    def leg(self, box) -> int:
        i, j = box
        return sum(1 for r in self.rows[i + 1:] if r > j)

    def hook(self, box) -> int:
        return self.arm(box) + self.leg(box) + 1

    def n_stat(self) -> int:
        """n(.) = sum over rows of i * rows[i]."""
        return sum(i * r for i, r in enumerate(self.rows))

    def norm_sq(self) -> int:
        return sum(r * r for r in self.rows)

    def hook_cells(self, box):
        """In-diagram hook: the box, its row to the right, its column below."""
        i, j = box
        cells = [(i, k) for k in range(j, self.rows[i])]
        cells += [(l, j) for l in range(i + 1, len(self.rows)) if self.rows[l] > j]
        return cells

    def out_hook_cells(self, box):
        """Complement hook: the box, then left along the row and up the column,
        staying inside the complement of the diagram."""
        i, j = box
        cells = []
        for k in range(j, -1, -1):
            if self.contains((i, k)):
                break
            cells.append((i, k))
        for l in range(i - 1, -1, -1):
            if self.contains((l, j)):
                break
            cells.append((l, j))
        return cells


def box_stats(shape: Partition, box):
    """(arm, leg, hook) of a box; raises if the box is outside the diagram."""
    if not shape.contains(box):
        raise ValueError(f"box {box} outside {shape}")
    a = shape.arm(box)
    l = shape.leg(box)
    return a, l, a + l + 1


def enumerate_partitions(d: int):
    """All partitions of d, lexicographically descending on rows."""
    if d < 0:
        raise ValueError("negative size")
    out = []

    def rec(remaining, maxpart, prefix):
        if remaining == 0:
            out.append(Partition(prefix))
            return
        for part in range(min(maxpart, remaining), 0, -1):
            rec(remaining - part, part, prefix + (part,))

    rec(d, d if d else 1, ())
    return out


@dataclass(frozen=True)
class SocleData:
    socle: frozenset
    subsocle: frozenset
    cosocle: frozenset
    cosubsocle: frozenset


def socle_data(shape: Partition) -> SocleData:
    inside = shape.contains
    soc, subsoc = set(), set()
    for box in shape.boxes():
        i, j = box
        right, down, diag = inside((i, j + 1)), inside((i + 1, j)), inside((i + 1, j + 1))
        if not right and not down:
            soc.add(box)
        elif right and down and not diag:
            subsoc.add(box)

    def in_complement(box):
        i, j = box
        return i >= 0 and j >= 0 and not inside(box)

    cosoc, cosubsoc = set(), set()
    # candidates sit along the rim of the diagram
    rim = set()
    for i in range(len(shape.rows) + 2):
        width = shape.rows[i] if i < len(shape.rows) else 0
        for j in range(width, (shape.rows[0] if shape.rows else 0) + 2):
            rim.add((i, j))
    for box in rim:
        if not in_complement(box):
            continue
        i, j = box
        up, left, diag = (i - 1, j), (i, j - 1), (i - 1, j - 1)
        if not in_complement(up) and not in_complement(left):
            cosoc.add(box)
        elif in_complement(up) and in_complement(left) and not in_complement(diag):
            cosubsoc.add(box)
    return SocleData(frozenset(soc), frozenset(subsoc), frozenset(cosoc),
                     frozenset(cosubsoc))


class BoxLabelling:
    """A skew plane partition (complement shape) or reverse plane partition."""

    __slots__ = ("kind", "shape", "entries")

    def __init__(self, kind, shape: Partition, entries: dict):
        if kind not in (SKEW, REVERSE):
            raise ValueError(f"unknown labelling kind {kind!r}")
        self.kind = kind
        self.shape = shape
        self.entries = {box: int(e) for box, e in entries.items() if e}
        self._validate()

    def _validate(self):
        inside = self.shape.contains
        get = self.entries.get
        if self.kind == SKEW:
            for (i, j), e in self.entries.items():
                if i < 0 or j < 0 or inside((i, j)):
                    raise ValueError(f"skew entry at {(i, j)} not in the complement")
                if e < 0:
                    raise ValueError("negative entry")
                for prev in ((i - 1, j), (i, j - 1)):
                    pi, pj = prev
                    if pi >= 0 and pj >= 0 and not inside(prev) and get(prev, 0) < e:
                        raise ValueError(f"skew labelling increases toward {(i, j)}")
        else:
            for (i, j), e in self.entries.items():
                if not inside((i, j)):
                    raise ValueError(f"reverse entry at {(i, j)} outside the diagram")
                if e < 0:
                    raise ValueError("negative entry")
            for box in self.shape.boxes():
                i, j = box
                e = get(box, 0)
                for nxt in ((i + 1, j), (i, j + 1)):
                    if inside(nxt) and get(nxt, 0) < e:
                        raise ValueError(f"reverse labelling decreases after {box}")

    @property
    def size(self) -> int:
        return sum(self.entries.values())

    def entry(self, box) -> int:
        return self.entries.get(box, 0)

    def omega(self) -> int:
        """Signed socle sum: the dimension of the associated nested fixed locus."""
        data = socle_data(self.shape)
        if self.kind == SKEW:
            return (sum(self.entry(b) for b in data.cosocle)
                    - sum(self.entry(b) for b in data.cosubsocle))
        return (sum(self.entry(b) for b in data.socle)
                - sum(self.entry(b) for b in data.subsocle))

    def key(self):
        return (self.kind, self.shape.rows, tuple(sorted(self.entries.items())))

    def __eq__(self, other):
        return isinstance(other, BoxLabelling) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"BoxLabelling({self.kind}, {self.shape.rows}, {dict(sorted(self.entries.items()))})"


def _skew_candidates(shape: Partition, size: int):
    """Complement boxes that can carry a nonzero entry at the given size.

    The nonzero support of a skew labelling is a downward-closed subset of the
    complement, so a box is reachable only if the minimal such subset through
    it (the full rectangle ideal below-left of it) fits in the budget.
    """
    if size <= 0:
        return []
    inside = shape.contains
    rows = len(shape.rows)
    width = shape.rows[0] if shape.rows else 0
    candidates = []
    for i in range(size + rows):
        for j in range(size + width):
            if inside((i, j)):
                continue
            ideal = 0
            for a in range(i + 1):
                for b in range(j + 1):
                    if not inside((a, b)):
                        ideal += 1
            if ideal <= size:
                candidates.append((i, j))
            elif j >= (shape.rows[i] if i < rows else 0):
                break
    return candidates


def enumerate_labellings(kind, shape: Partition, size: int):
    """All labellings of the given kind, shape and exact size, in the
    deterministic depth-first row-major order (entries ascending)."""
    if size < 0:
        raise ValueError("negative size")
    out = []
    if kind == SKEW:
        boxes = _skew_candidates(shape, size)
        inside = shape.contains

        def rec(idx, budget, acc):
            if idx == len(boxes):
                if budget == 0:
                    out.append(BoxLabelling(SKEW, shape, dict(acc)))
                return
            i, j = boxes[idx]
            ub = budget
            for prev in ((i - 1, j), (i, j - 1)):
                pi, pj = prev
                if pi >= 0 and pj >= 0 and not inside(prev):
                    ub = min(ub, acc.get(prev, 0))
            for e in range(0, ub + 1):
                if e:
                    acc[(i, j)] = e
                rec(idx + 1, budget - e, acc)
                if e:
                    del acc[(i, j)]

        rec(0, size, {})
    elif kind == REVERSE:
        boxes = shape.boxes()
        if not boxes:
            if size == 0:
                out.append(BoxLabelling(REVERSE, shape, {}))
            return out

        def rec(idx, budget, acc):
            if idx == len(boxes):
                if budget == 0:
                    out.append(BoxLabelling(REVERSE, shape, dict(acc)))
                return
            i, j = boxes[idx]
            lb = 0
            if i > 0 and shape.contains((i - 1, j)):
                lb = max(lb, acc.get((i - 1, j), 0))
            if j > 0:
                lb = max(lb, acc.get((i, j - 1), 0))
            if lb > budget:
                return
            for e in range(lb, budget + 1):
                if e:
                    acc[(i, j)] = e
                rec(idx + 1, budget - e, acc)
                if e:
                    del acc[(i, j)]

        rec(0, size, {})
    else:
        raise ValueError(f"unknown labelling kind {kind!r}")
    return out


# ---------------------------------------------------------------------------
# counting series


def macmahon(order: int) -> QSeries:
    """prod_{d>=1} (1 - q^d)^(-d), the plane-partition generating function."""
    s = QSeries.one(FRACTIONS, order)
    for d in range(1, order + 1):
        g = geometric_inverse(FRACTIONS, d, Fraction(1), order)
        for _ in range(d):
            s = s * g
    return s


def sagan_series(shape: Partition, order: int) -> QSeries:
    """Size generating series of skew plane partitions of the complement shape."""
    s = macmahon(order)
    for box in shape.boxes():
        s = s * geometric_inverse(FRACTIONS, shape.hook(box), Fraction(1), order)
    return s


def rpp_hook_series(shape: Partition, order: int) -> QSeries:
    """Size generating series of reverse plane partitions of the shape."""
    s = QSeries.one(FRACTIONS, order)
    for box in shape.boxes():
        s = s * geometric_inverse(FRACTIONS, shape.hook(box), Fraction(1), order)
    return s


def diagonal_of(box) -> int:
    i, j = box
    return j - i


class MultiDegreeSeries:
    """Truncated series in the trace variables q_d, one per diagonal d = j - i.

    The per-box refinement of the hook-product identities is false (a size-3
    labelling of shape (2,2) already separates the two sides), so the series
    carries the diagonal multidegree, for which the hook products are the
    classical trace generating functions.
    """

    __slots__ = ("bound", "terms")

    def __init__(self, bound: int, terms: dict = None):
        self.bound = bound
        self.terms = terms if terms is not None else {(): 1}

    @staticmethod
    def key_of(expmap: dict):
        return tuple(sorted((d, e) for d, e in expmap.items() if e))

    @staticmethod
    def degree(key) -> int:
        return sum(e for _, e in key)

    def add_labelling(self, entries: dict, coeff=1):
        expmap: dict = {}
        for box, e in entries.items():
            d = diagonal_of(box)
            expmap[d] = expmap.get(d, 0) + e
        key = self.key_of(expmap)
        if self.degree(key) > self.bound:
            return
        n = self.terms.get(key, 0) + coeff
        if n:
            self.terms[key] = n
        elif key in self.terms:
            del self.terms[key]

    def mul_geometric(self, pmap: dict) -> "MultiDegreeSeries":
        """Multiply by (1 - prod q_d^pmap[d])^(-1), truncated."""
        d = sum(pmap.values())
        if d == 0:
            raise ValueError("geometric factor needs positive degree")
        out = {}
        for key, c in self.terms.items():
            base = dict(key)
            deg = self.degree(key)
            k = 0
            while deg + k * d <= self.bound:
                cur = dict(base)
                for dg, e in pmap.items():
                    cur[dg] = cur.get(dg, 0) + k * e
                kk = self.key_of(cur)
                out[kk] = out.get(kk, 0) + c
                k += 1
        return MultiDegreeSeries(self.bound, out)

    def __eq__(self, other):
        return (isinstance(other, MultiDegreeSeries) and self.bound == other.bound
                and self.terms == other.terms)

    def first_discrepancy(self, other):
        keys = sorted(set(self.terms) | set(other.terms),
                      key=lambda k: (self.degree(k), k))
        for k in keys:
            a, b = self.terms.get(k, 0), other.terms.get(k, 0)
            if a != b:
                return (k, a, b)
        return None

    def to_json(self):
        items = sorted(self.terms.items(), key=lambda kv: (self.degree(kv[0]), kv[0]))
        return {"bound": self.bound,
                "terms": [{"m": [[d, e] for d, e in k], "c": c} for k, c in items]}

    def __repr__(self):
        return f"MultiDegreeSeries(bound={self.bound}, {len(self.terms)} terms)"


def _hook_pmap(cells):
    pmap: dict = {}
    for cell in cells:
        d = diagonal_of(cell)
        pmap[d] = pmap.get(d, 0) + 1
    return pmap


def gansner_series(shape: Partition, bound: int) -> MultiDegreeSeries:
    """Trace generating series of reverse plane partitions of the shape,
    as the hook product over the diagram."""
    s = MultiDegreeSeries(bound)
    for box in shape.boxes():
        s = s.mul_geometric(_hook_pmap(shape.hook_cells(box)))
    return s


def rpp_multidegree_series(shape: Partition, bound: int) -> MultiDegreeSeries:
    """The same series by direct enumeration (the oracle side)."""
    s = MultiDegreeSeries(bound, {})
    for n in range(bound + 1):
        for lab in enumerate_labellings(REVERSE, shape, n):
            s.add_labelling(lab.entries)
    return s


def spp_multidegree_series(shape: Partition, bound: int) -> MultiDegreeSeries:
    """Trace multidegree series of skew plane partitions by direct enumeration."""
    s = MultiDegreeSeries(bound, {})
    for n in range(bound + 1):
        for lab in enumerate_labellings(SKEW, shape, n):
            s.add_labelling(lab.entries)
    return s


def skew_hook_product(shape: Partition, bound: int) -> MultiDegreeSeries:
    """Hook product over the reachable complement boxes, truncated."""
    s = MultiDegreeSeries(bound)
    inside = shape.contains
    rows = len(shape.rows)
    width = shape.rows[0] if shape.rows else 0
    for i in range(bound + rows + 1):
        for j in range(bound + width + 1):
            if inside((i, j)):
                continue
            cells = shape.out_hook_cells((i, j))
            if len(cells) > bound:
                continue
            s = s.mul_geometric(_hook_pmap(cells))
    return s


@dataclass
class ConjectureReport:
    shape: tuple
    bound: int
    equal: bool
    first_discrepancy: object
    lhs: MultiDegreeSeries
    rhs: MultiDegreeSeries


def conjecture_check(shape: Partition, bound: int) -> ConjectureReport:
    """Exploratory comparison of the enumerated skew series with the hook
    product over the complement.  Reports; never asserts."""
    lhs = spp_multidegree_series(shape, bound)
    rhs = skew_hook_product(shape, bound)
    diff = lhs.first_discrepancy(rhs)
    return ConjectureReport(shape.rows, bound, diff is None, diff, lhs, rhs)


# ---------------------------------------------------------------------------
# topological partition functions


def q_offset(shape: Partition, g: int, k1: int, k2: int) -> int:
    """The q-prefactor exponent of a diagram's contribution:
    |shape|(1-g) - k1*n(shape) - k2*n(conjugate)."""
    return (shape.size * (1 - g) - k1 * shape.n_stat()
            - k2 * shape.conjugate().n_stat())


def topological_dt(g: int, k1: int, k2: int, d: int, order: int) -> QSeries:
    """Euler-characteristic generating series of the curve-in-threefold
    Hilbert schemes, by diagram sum with hook products."""
    if d == 0:
        return macmahon(order).pow_int(2 - 2 * g)
    total = None
    for shape in enumerate_partitions(d):
        off = q_offset(shape, g, k1, k2)
        if off > order:
            continue
        inner = sagan_series(shape, order - off).pow_int(2 - 2 * g).shift(off)
        total = inner if total is None else total + inner
    if total is None:
        return QSeries.zero(FRACTIONS, order)
    return total


def topological_pt(g: int, k1: int, k2: int, d: int, order: int) -> QSeries:
    """Euler-characteristic generating series of the stable-pair moduli."""
    if d == 0:
        return QSeries.one(FRACTIONS, order)
    total = None
    for shape in enumerate_partitions(d):
        off = q_offset(shape, g, k1, k2)
        if off > order:
            continue
        inner = rpp_hook_series(shape, order - off).pow_int(2 - 2 * g).shift(off)
        total = inner if total is None else total + inner
    if total is None:
        return QSeries.zero(FRACTIONS, order)
    return total
