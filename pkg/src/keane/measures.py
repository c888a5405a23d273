"""Certified rational enclosures of Keane's two ergodic measures.

For measure ``i`` the vector ``(lambda_i(I_j^(k)) / lambda_i(I^(k)))_j`` is
the normalization of ``A_{k+1} ... A_{k+r} w`` where ``w`` is the tail
vector at level ``k+r``.  The tail vector is unknown but lies in a polytope
that is forward invariant under every matrix satisfying Keane's hypotheses:

* ``lambda_2``: ``{w : w_2 >= 1/4}``, invariant when ``m >= 3n`` and ``n >= 2``;
* ``lambda_3``: ``{w : w_1, w_2, w_4 <= 1/(n_{t+1}+1)}``, invariant when
  ``2 m_s <= n_{s+1} + 1``.

Every quantity evaluated here is a ratio of two linear forms in ``w``, so its
extremes over the polytope occur at vertices; the enclosures are exact
minima and maxima over the pushed-forward vertices.  Passing
``tail="simplex"`` uses the whole simplex instead, which gives the same
(measure independent) enclosure for both measures.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .construction import (
    KeaneConstruction,
    ParamSeq,
    all_return_times,
    keane_matrix,
    matvec,
)
from .errors import DomainError, PrecisionWarning
from .towers import TowerDecomposition

__all__ = [
    "RatioEnclosure",
    "MeasureValue",
    "ratio_enclosure",
    "level_measure",
    "mass_range",
    "interval_measure",
    "distance",
    "LEMMAS",
    "LemmaRow",
    "lemma_suite",
    "lemma_csv",
]

ONES = (1, 1, 1, 1)
TAILS = ("keane", "simplex")


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class RatioEnclosure:
    level: int
    measure: int
    lo: tuple[Fraction, ...]
    hi: tuple[Fraction, ...]
    truncation: int
    vertices: tuple[tuple[int, ...], ...]  # unnormalized, at level ``level``
    tail: str = "keane"

    def contains(self, vec: Sequence) -> bool:
        return all(l <= x <= h for l, x, h in zip(self.lo, vec, self.hi))

    @property
    def normalized_vertices(self) -> list[tuple[Fraction, ...]]:
        return [tuple(Fraction(x, sum(u)) for x in u) for u in self.vertices]


def _simplex_vertices():
    return [tuple(int(i == j) for j in range(4)) for i in range(4)]


def _lambda2_holds(seq: ParamSeq, t: int) -> bool:
    return all(seq.m(s) >= 3 * seq.n(s) and seq.n(s) >= 2 for s in range(t + 1, seq.K + 1))


def _lambda3_holds(seq: ParamSeq, t: int) -> bool:
    return all(2 * seq.m(s) <= seq.n(s + 1) + 1 for s in range(t + 1, seq.K))


def _lambda3_box(seq: ParamSeq, t: int):
    # w_1, w_2, w_4 <= 1/N.  Beyond the sequence, n_{K+1} + 1 >= 2 m_K is assumed.
    if t + 1 <= seq.K:
        N = seq.n(t + 1) + 1
    elif t >= 1:
        N = 2 * seq.m(t)
    else:
        return None
    if N < 3:
        return None
    out = []
    for a in (0, 1):
        for b in (0, 1):
            for d in (0, 1):
                out.append((a, b, N - a - b - d, d))
    return out


def tail_vertices(seq: ParamSeq, i: int, t: int, tail: str = "keane") -> list[tuple]:
    """Vertices of a polytope containing the level-``t`` tail vector of ``lambda_i``."""
    if tail == "simplex":
        return _simplex_vertices()
    if tail != "keane":
        raise DomainError(f"unknown tail model {tail!r}")
    holds = _lambda2_holds if i == 2 else _lambda3_holds
    start = t
    while start < seq.K and not holds(seq, start):
        start += 1
    if i == 2:
        verts = [(0, 4, 0, 0), (3, 1, 0, 0), (0, 1, 3, 0), (0, 1, 0, 3)]
    else:
        verts = _lambda3_box(seq, start) or _simplex_vertices()
    for s in range(start, t, -1):
        A = keane_matrix(seq.m(s), seq.n(s)).entries
        verts = [matvec(A, w) for w in verts]
    return verts


def _check_measure(i):
    if i not in (2, 3):
        raise DomainError(f"measure index must be 2 or 3, got {i}")


def default_truncation(seq: ParamSeq, k: int) -> int:
    return min(4, seq.K - k)


def ratio_enclosure(seq: ParamSeq, i: int, k: int, r: int | None = None,
                    tail: str = "keane") -> RatioEnclosure:
    """Enclose ``lambda_i(I_j^(k)) / lambda_i(I^(k))`` for ``j = 1..4``."""
    _check_measure(i)
    if r is None:
        r = default_truncation(seq, k)
    if k < 0 or r < 2 or k + r > seq.K:
        raise DomainError(f"need 0 <= k and r >= 2 with k + r <= K; got k={k}, r={r}, K={seq.K}")
    verts = tail_vertices(seq, i, k + r, tail)
    for s in range(k + r, k, -1):
        A = keane_matrix(seq.m(s), seq.n(s)).entries
        verts = [matvec(A, w) for w in verts]
    verts = [_integral(u) for u in verts]
    normed = [tuple(Fraction(x, sum(u)) for x in u) for u in verts]
    lo = tuple(min(v[j] for v in normed) for j in range(4))
    hi = tuple(max(v[j] for v in normed) for j in range(4))
    return RatioEnclosure(k, i, lo, hi, r, tuple(verts), tail)


def _integral(u) -> tuple[int, ...]:
    """Clear denominators; every ratio used downstream is scale invariant."""
    u = [Fraction(x) for x in u]
    d = lcm(*(x.denominator for x in u))
    return tuple(int(x * d) for x in u)


def mass_range(enc: RatioEnclosure, b: Sequence[int], c_lo: Sequence, c_hi: Sequence | None = None):
    """Range of ``(c . u) / (b . u)`` over the enclosure's vertices.

    With ``b = b_k`` this is the ``lambda_i`` mass of a union of level-k
    floors with ``c_j`` floors of tower ``j``; ``c_hi`` allows extra floors
    that are only partly included.
    """
    c_hi = c_lo if c_hi is None else c_hi
    lo = hi = None
    for u in enc.vertices:
        den = sum(x * y for x, y in zip(b, u))
        a = sum(x * y for x, y in zip(c_lo, u))
        z = a if c_hi is c_lo else sum(x * y for x, y in zip(c_hi, u))
        # compare a/den against the current extremes without normalizing
        if lo is None or a * lo[1] < lo[0] * den:
            lo = (a, den)
        if hi is None or z * hi[1] > hi[0] * den:
            hi = (z, den)
    return Fraction(*lo), Fraction(*hi)


@dataclass(frozen=True)
class MeasureValue:
    lo: Fraction
    hi: Fraction
    level: int
    truncation: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError(f"bad enclosure [{self.lo}, {self.hi}]")

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other: "MeasureValue") -> "MeasureValue":
        return MeasureValue(self.lo + other.lo, self.hi + other.hi,
                            min(self.level, other.level), min(self.truncation, other.truncation))

    def within(self, lo, hi) -> bool:
        """True when the enclosure lies in the open interval ``(lo, hi)``."""
        return lo < self.lo and self.hi < hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class LevelMeasure(MeasureValue):
    b_lower: Fraction = Fraction(0)
    b_upper: Fraction = Fraction(1)

    @property
    def consistent(self) -> bool:
        """The enclosure sits strictly between the return-time bounds."""
        return self.within(self.b_lower, self.b_upper)


def level_measure(seq: ParamSeq, i: int, k: int, r: int | None = None, tail: str = "keane",
                  ratio_threshold: Fraction = Fraction(8)) -> LevelMeasure:
    """Enclosure of ``lambda_i(I^(k))`` plus the return-time bounds as a cross-check.

    The bounds are ``(4 b_{k,2})^-1 < lambda_2(I^(k)) < b_{k,2}^-1`` and
    ``(8 b_{k,3})^-1 < lambda_3(I^(k)) < b_{k,3}^-1``.  The upper one for
    ``lambda_2`` cannot hold for ``k >= 1``: the towers tile [0,1) and
    ``b_{k,2}`` is the largest return time, so ``sum_j b_{k,j} lambda(I_j^(k)) = 1``
    forces ``lambda(I^(k)) > b_{k,2}^-1``.  It is still emitted, and
    ``consistent`` reports the violation.
    """
    _check_measure(i)
    b = all_return_times(seq)[k] if 0 <= k <= seq.K else None
    if b is None:
        raise DomainError(f"level {k} out of range")
    if k == 0:
        return LevelMeasure(Fraction(1), Fraction(1), 0, 0, Fraction(1, 4 if i == 2 else 8), Fraction(1))
    enc = ratio_enclosure(seq, i, k, r, tail)
    lo, hi = mass_range(enc, b, ONES)
    if lo == 0 or hi / lo > ratio_threshold:
        warnings.warn(f"lambda_{i}(I^({k})) enclosure [{float(lo):.3g}, {float(hi):.3g}] is wide",
                      PrecisionWarning, stacklevel=2)
    bk = b[i - 1]
    return LevelMeasure(lo, hi, k, enc.truncation, Fraction(1, (4 if i == 2 else 8) * bk),
                        Fraction(1, bk))


def interval_measure(seq: ParamSeq, i: int, a, b, k: int, r: int | None = None, *,
                     towers: TowerDecomposition | None = None, tail: str = "keane",
                     budget: int | None = None) -> MeasureValue:
    """Enclosure of ``lambda_i([a,b))`` from the level-``k`` tower floors.

    Fully contained floors contribute their exact mass range; the at most two
    floors cut by ``a`` or ``b`` widen the upper end only.
    """
    _check_measure(i)
    if towers is None:
        towers = TowerDecomposition(KeaneConstruction(seq), k, budget)
    elif towers.k != k:
        raise DomainError("tower decomposition is for a different level")
    enc = _level_enclosure(seq, i, k, r, tail)
    full, touched = towers.cover(a, b)
    lo, hi = mass_range(enc, towers.b, full, touched)
    return MeasureValue(lo, min(hi, Fraction(1)), k, enc.truncation)


def _level_enclosure(seq, i, k, r, tail):
    if k == 0 and (r is None or r == 0):
        return RatioEnclosure(0, i, ONES, ONES, 0, (ONES,), tail)
    return ratio_enclosure(seq, i, k, r, tail)


def distance(seq: ParamSeq, x, y, k: int, r: int | None = None, *,
             towers: TowerDecomposition | None = None,
             measures: Sequence[int] = (2, 3)) -> MeasureValue:
    """``d_mu(x, y) = mu([min, max))`` for ``mu`` the sum of the given measures."""
    x, y = Fraction(x), Fraction(y)
    lo, hi = min(x, y), max(x, y)
    total = None
    for i in measures:
        v = interval_measure(seq, i, lo, hi, k, r, towers=towers)
        total = v if total is None else total + v
    return total


# -- lemma suite --------------------------------------------------------------

def _ratio(j):
    return lambda b: (tuple(int(t == j) for t in range(1, 5)), ONES)


def _orbit(j):
    return lambda b: (tuple(b[t - 1] if t == j else 0 for t in range(1, 5)), tuple(b))


# (id, measure, quantity, relation, bound(m1, n1, m2, n2))
# m1, n1 = m_{k+1}, n_{k+1}; m2, n2 = m_{k+2}, n_{k+2}
LEMMAS = [
    ("L3I2big", 3, _ratio(2), ">=", lambda m1, n1, m2, n2: Fraction(m1, 2 * n1 * n2)),
    ("L3I2small", 3, _ratio(2), "<=", lambda m1, n1, m2, n2: Fraction(2 * m1, (n2 + 1) * (n1 + 1))),
    ("L3I3big", 3, _ratio(3), ">=", lambda m1, n1, m2, n2: 1 - Fraction(3, n1)),
    ("L3I4small", 3, _ratio(4), "<=", lambda m1, n1, m2, n2: Fraction(1, n1)),
    ("L3I4big", 3, _ratio(4), ">=", lambda m1, n1, m2, n2: Fraction(1, 2 * n1)),
    ("L3I1small", 3, _ratio(1), "<=", lambda m1, n1, m2, n2: Fraction(1, n1)),
    ("L3I1big", 3, _ratio(1), ">=", lambda m1, n1, m2, n2: Fraction(1, 3 * n1)),
    ("L2I2big", 2, _ratio(2), ">", lambda m1, n1, m2, n2: Fraction(m1, 4 * (n1 + m1 + 2))),
    ("L2I3small", 2, _ratio(3), "<=", lambda m1, n1, m2, n2: Fraction(4 * n1, m1)),
    ("L2I3big", 2, _ratio(3), ">=", lambda m1, n1, m2, n2: Fraction(n1, 2 * m1)),
    ("L2I4big", 2, _ratio(4), ">", lambda m1, n1, m2, n2: Fraction(1, 2 * m1)),
    ("L2I4small", 2, _ratio(4), "<", lambda m1, n1, m2, n2: Fraction(4, m1)),
    ("L2I1small", 2, _ratio(1), "<", lambda m1, n1, m2, n2: Fraction(16 * n2 + 16, m1 * m2)),
    ("L2I1big", 2, _ratio(1), ">", lambda m1, n1, m2, n2: Fraction(n2, 4 * m1 * m2)),
    ("L3bigorbit", 3, _orbit(3), ">", lambda m1, n1, m2, n2: Fraction(1, 8)),
    ("L2bigorbit", 2, _orbit(2), ">", lambda m1, n1, m2, n2: Fraction(1, 4)),
]


def verdict(lo: Fraction, hi: Fraction, relation: str, bound: Fraction) -> tuple[str, Fraction]:
    """Certified verdict and margin of ``quantity <relation> bound``.

    The margin is measured from the certifying edge of the enclosure and is
    negative unless the claim is certified.
    """
    if relation in (">=", ">"):
        margin = lo - bound
        ok = lo > bound if relation == ">" else lo >= bound
        bad = hi <= bound if relation == ">" else hi < bound
    else:
        margin = bound - hi
        ok = hi < bound if relation == "<" else hi <= bound
        bad = lo >= bound if relation == "<" else lo > bound
    return ("PASS" if ok else "FAIL" if bad else "INCONCLUSIVE"), margin


@dataclass(frozen=True)
class LemmaRow:
    lemma_id: str
    k: int
    verdict: str
    bound: Fraction
    enclosure_lo: Fraction
    enclosure_hi: Fraction
    margin: Fraction


def lemma_suite(seq: ParamSeq, K_max: int, r: int = 3, tail: str = "keane") -> list[LemmaRow]:
    """Evaluate every measure lemma at levels ``0..K_max``."""
    if K_max + r > seq.K or r < 2:
        raise DomainError(f"levels 0..{K_max} with truncation {r} need K >= {K_max + r}, have {seq.K}")
    bs = all_return_times(seq)
    rows = []
    for k in range(K_max + 1):
        encs = {i: ratio_enclosure(seq, i, k, r, tail) for i in (2, 3)}
        m1, n1, m2, n2 = seq.m(k + 1), seq.n(k + 1), seq.m(k + 2), seq.n(k + 2)
        for lemma_id, i, quantity, relation, bound in LEMMAS:
            num, den = quantity(bs[k])
            lo, hi = mass_range(encs[i], den, num)
            B = bound(m1, n1, m2, n2)
            v, margin = verdict(lo, hi, relation, B)
            rows.append(LemmaRow(lemma_id, k, v, B, lo, hi, margin))
    return rows


def lemma_csv(rows: Sequence[LemmaRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lemma_id", "k", "verdict", "bound", "enclosure_lo", "enclosure_hi", "margin"])
    for row in rows:
        w.writerow([row.lemma_id, row.k, row.verdict, fmt(row.bound), fmt(row.enclosure_lo),
                    fmt(row.enclosure_hi), fmt(row.margin)])
    return buf.getvalue()
