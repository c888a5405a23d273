"""Keane's 4-interval construction from a sequence of integer matrices.

Each pair ``(m, n)`` gives the matrix ``A_{m,n}`` whose column ``j`` is the
landing pattern of the ``j``-th subinterval of the next level.  Everything
here is integer matrix arithmetic; lengths are normalized only at the end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import DigitBudgetExceeded, DomainError
from .iet import IETSpec, Permutation

__all__ = [
    "KEANE_PERMUTATION",
    "LITERAL_PERMUTATION",
    "ParamSeq",
    "KeaneMatrix",
    "ReturnTimes",
    "AdmissibilityRow",
    "keane_matrix",
    "admissible",
    "lengths",
    "return_times",
    "product",
    "matvec",
    "KeaneConstruction",
]

# "(4213)" read as the order of the intervals after the exchange: I_4, I_2,
# I_1, I_3.  As position images (the convention of IETSpec) this is (3 2 4 1).
# The literal one-line reading (4 2 1 3) does not reproduce I_1 = T(I_4^(1) u
# I_3^(1)); see tests/test_construction.py::test_literal_reading_is_rejected.
LITERAL_PERMUTATION = Permutation((4, 2, 1, 3))
KEANE_PERMUTATION = LITERAL_PERMUTATION.inverse()

SEED = (Fraction(1, 4),) * 4
DEFAULT_DIGIT_BUDGET = 10**5

Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ParamSeq:
    """Finite parameter sequence ``(m_1, n_1), ..., (m_K, n_K)``."""

    pairs: tuple[tuple[int, int], ...]
    rule_tag: str = "explicit"

    def __post_init__(self):
        pairs = tuple((int(m), int(n)) for m, n in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise DomainError("a parameter sequence needs at least one pair")
        for k, (m, n) in enumerate(pairs, start=1):
            if m < 1 or n < 1:
                raise DomainError(f"pair {k} = ({m}, {n}) is not positive")

    @property
    def K(self) -> int:
        return len(self.pairs)

    def m(self, k: int) -> int:
        return self.pairs[k - 1][0]

    def n(self, k: int) -> int:
        return self.pairs[k - 1][1]

    def truncated(self, K: int) -> "ParamSeq":
        return ParamSeq(self.pairs[:K], self.rule_tag)

    def to_json(self) -> str:
        return json.dumps({"rule": self.rule_tag, "pairs": [list(p) for p in self.pairs]})

    @classmethod
    def from_json(cls, text: str) -> "ParamSeq":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"parameter file is not JSON: {exc}") from None
        if not isinstance(data, dict) or set(data) != {"rule", "pairs"}:
            raise DomainError('expected an object with keys "rule" and "pairs"')
        pairs = data["pairs"]
        if not isinstance(pairs, list) or not all(
            isinstance(p, list) and len(p) == 2 and all(type(x) is int for x in p) for p in pairs
        ):
            raise DomainError('"pairs" must be a list of [m, n] integer pairs')
        return cls(tuple(tuple(p) for p in pairs), str(data["rule"]))


@dataclass(frozen=True)
class KeaneMatrix:
    m: int
    n: int
    entries: Matrix = field(repr=False)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j - 1] for row in self.entries)

    @property
    def column_sums(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.entries))


def keane_matrix(m: int, n: int) -> KeaneMatrix:
    if m < 1 or n < 1:
        raise DomainError(f"A_(m,n) needs positive parameters, got ({m}, {n})")
    rows = ((0, 0, 1, 1), (m - 1, m, 0, 0), (n, n, n - 1, n), (1, 1, 1, 1))
    return KeaneMatrix(m, n, rows)


IDENTITY: Matrix = tuple(tuple(int(i == j) for j in range(4)) for i in range(4))


def _matmul(X: Matrix, Y: Matrix) -> Matrix:
    cols = list(zip(*Y))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in X)


def matvec(X: Matrix, v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in X)


def product(seq: ParamSeq, start: int = 0, stop: int | None = None) -> Matrix:
    """``A_{start+1} ... A_{stop}`` accumulated left to right."""
    stop = seq.K if stop is None else stop
    if not 0 <= start <= stop <= seq.K:
        raise DomainError(f"levels {start}..{stop} out of range for K={seq.K}")
    P = IDENTITY
    for m, n in seq.pairs[start:stop]:
        P = _matmul(P, keane_matrix(m, n).entries)
    return P


# -- admissibility ----------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityRow:
    k: int
    condition: str
    status: str  # "pass" | "warn" | "fail"
    detail: str


def _short(x: int) -> str:
    """Decimal form, or a digit count when the integer is too long to print."""
    if x.bit_length() < 200:
        return str(x)
    return f"<{int(x.bit_length() * 0.30103) + 1}-digit integer>"


def admissible(seq: ParamSeq, strict: bool = False) -> list[AdmissibilityRow]:
    """Check Keane's hypotheses ``3(n_k+1) <= m_k <= (n_{k+1}+1)/2`` and ``n_1 > 9``.

    In relaxed mode a violation is a warning: finitely many matrices may
    break the hypotheses without affecting the conclusion.
    """
    bad = "fail" if strict else "warn"
    rows = []
    n1 = seq.n(1)
    rows.append(AdmissibilityRow(1, "n_1 > 9", "pass" if n1 > 9 else bad, f"n_1 = {_short(n1)}"))
    for k in range(1, seq.K + 1):
        m, n = seq.pairs[k - 1]
        ok = 3 * (n + 1) <= m
        rows.append(AdmissibilityRow(k, "3(n_k+1) <= m_k", "pass" if ok else bad,
                                     f"3*({_short(n)}+1) = {_short(3 * (n + 1))} vs m_k = {_short(m)}"))
        if k < seq.K:
            n_next = seq.n(k + 1)
            ok = 2 * m <= n_next + 1
            rows.append(AdmissibilityRow(k, "m_k <= (n_{k+1}+1)/2", "pass" if ok else bad,
                                         f"m_k = {_short(m)} vs ({_short(n_next)}+1)/2"))
    return rows


def is_admissible(seq: ParamSeq) -> bool:
    return all(r.status == "pass" for r in admissible(seq, strict=True))


# -- lengths and return times -------------------------------------------------

def _check_simplex(v: Sequence) -> tuple[Fraction, ...]:
    v = tuple(Fraction(x) for x in v)
    if len(v) != 4 or any(x <= 0 for x in v) or sum(v) != 1:
        raise DomainError(f"{v} is not a point of the open 3-simplex")
    return v


def lengths(seq: ParamSeq | None, v: Sequence = SEED, K: int | None = None) -> tuple[Fraction, ...]:
    """Normalization of ``A_1 ... A_K v``; the empty product returns ``v``."""
    v = _check_simplex(v)
    if seq is None or K == 0:
        return v
    w = matvec(product(seq, 0, K), v)
    total = sum(w)
    return tuple(x / total for x in w)


@dataclass(frozen=True)
class ReturnTimes:
    k: int
    b: tuple[int, ...]

    def __getitem__(self, i: int) -> int:
        """1-based access, ``rt[2] == b_{k,2}``."""
        return self.b[i - 1]


def return_times(seq: ParamSeq, k: int) -> ReturnTimes:
    """Column sums of ``A_1 ... A_k``, cross-checked against the recurrences."""
    if not 0 <= k <= seq.K:
        raise DomainError(f"level {k} out of range 0..{seq.K}")
    b = tuple(sum(col) for col in zip(*product(seq, 0, k)))
    if k >= 1:
        prev = tuple(sum(col) for col in zip(*product(seq, 0, k - 1)))
        m, n = seq.pairs[k - 1]
        b2 = m * prev[1] + n * prev[2] + prev[3]
        b3 = prev[0] + (n - 1) * prev[2] + prev[3]
        if (b2, b3) != (b[1], b[2]):  # pragma: no cover - arithmetic identity
            raise AssertionError("return time recurrences disagree with the matrix product")
    return ReturnTimes(k, b)


def all_return_times(seq: ParamSeq) -> list[tuple[int, ...]]:
    """``b_k`` for ``k = 0..K`` from one running product."""
    out = [(1, 1, 1, 1)]
    P = IDENTITY
    for m, n in seq.pairs:
        P = _matmul(P, keane_matrix(m, n).entries)
        out.append(tuple(sum(col) for col in zip(*P)))
    return out


# -- the constructed IET and its tower bases --------------------------------

class KeaneConstruction:
    """The IET built from ``A_1 ... A_K v`` together with its nested bases.

    ``I^(k)`` is the fourth interval of level ``k-1``.  The subintervals of
    each level are named in reverse order relative to the previous level,
    so the orientation alternates: at even levels ``I_1^(k)`` is leftmost,
    at odd levels it is rightmost.
    """

    def __init__(self, seq: ParamSeq, v: Sequence = SEED, depth: int | None = None):
        self.seq = seq
        self.v = _check_simplex(v)
        self.depth = seq.K if depth is None else depth
        if not 0 <= self.depth <= seq.K:
            raise DomainError(f"depth {self.depth} out of range")

    @cached_property
    def _tails(self) -> list[tuple]:
        # _tails[k] = A_{k+1} ... A_depth v, unnormalized
        tails = [None] * (self.depth + 1)
        w = self.v
        tails[self.depth] = w
        for k in range(self.depth, 0, -1):
            m, n = self.seq.pairs[k - 1]
            w = matvec(keane_matrix(m, n).entries, w)
            tails[k - 1] = w
        return tails

    @cached_property
    def iet(self) -> IETSpec:
        w = self._tails[0]
        total = sum(w)
        return IETSpec(KEANE_PERMUTATION, tuple(x / total for x in w))

    def orientation(self, k: int) -> int:
        return 1 if k % 2 == 0 else -1

    def level_lengths(self, k: int) -> tuple[Fraction, ...]:
        """Absolute lengths of ``I_1^(k), ..., I_4^(k)``."""
        self._check_level(k)
        total = sum(self._tails[0])
        return tuple(x / total for x in self._tails[k])

    def _check_level(self, k):
        if not 0 <= k <= self.depth:
            raise DomainError(f"level {k} out of range 0..{self.depth}")

    @cached_property
    def _bases(self) -> list[tuple[tuple[Fraction, Fraction], ...]]:
        out = []
        left, right = Fraction(0), Fraction(1)
        for k in range(self.depth + 1):
            ls = self.level_lengths(k)
            assert sum(ls) == right - left
            order = range(4) if self.orientation(k) > 0 else range(3, -1, -1)
            spans = [None] * 4
            pos = left
            for j in order:
                spans[j] = (pos, pos + ls[j])
                pos += ls[j]
            out.append(tuple(spans))
            left, right = spans[3]
        return out

    def base(self, k: int, j: int) -> tuple[Fraction, Fraction]:
        """``I_j^(k)`` as a half-open ``(left, right)`` pair."""
        self._check_level(k)
        return self._bases[k][j - 1]

    def level_interval(self, k: int) -> tuple[Fraction, Fraction]:
        """``I^(k)``; ``I^(0) = [0, 1)``."""
        if k == 0:
            return (Fraction(0), Fraction(1))
        return self.base(k - 1, 4)

    def induced_spec(self, k: int) -> IETSpec:
        """First return map on ``I^(k)`` rescaled to [0,1), left to right."""
        ls = self.level_lengths(k)
        if self.orientation(k) > 0:
            return IETSpec.from_weights(KEANE_PERMUTATION, ls)
        return IETSpec.from_weights(KEANE_PERMUTATION.reflected(), ls[::-1])

    def names_left_to_right(self, k: int) -> tuple[int, ...]:
        return (1, 2, 3, 4) if self.orientation(k) > 0 else (4, 3, 2, 1)


def decimal_digits(x: int) -> int:
    """Upper estimate of the number of decimal digits of ``|x|``."""
    return int(abs(x).bit_length() * 0.30103) + 1


def _check_digits(x: int, budget: int):
    if decimal_digits(x) > budget:
        raise DigitBudgetExceeded(decimal_digits(x), budget)


def iterate_rule(m_of, n_next_of, n1: int, K: int, tag: str,
                 digit_budget: int = DEFAULT_DIGIT_BUDGET) -> ParamSeq:
    """Build ``K`` pairs from ``m_k = m_of(k, n_k, b)`` and ``n_{k+1} = n_next_of(k, m_k, b)``.

    ``b`` is the list of return-time vectors ``b_0 .. b_{k-1}`` for ``m_of``
    and ``b_0 .. b_k`` for ``n_next_of``.  Raises ``DigitBudgetExceeded``
    as soon as a parameter outgrows ``digit_budget`` decimal digits.
    """
    if K < 1:
        raise DomainError("K must be at least 1")
    pairs = []
    bs = [(1, 1, 1, 1)]
    P = IDENTITY
    n = n1
    for k in range(1, K + 1):
        _check_digits(n, digit_budget)
        m = m_of(k, n, bs)
        _check_digits(m, digit_budget)
        pairs.append((m, n))
        P = _matmul(P, keane_matrix(m, n).entries)
        bs.append(tuple(sum(col) for col in zip(*P)))
        if k < K:
            n = n_next_of(k, m, bs)
    return ParamSeq(tuple(pairs), tag)


def minimal_admissible(K: int, n1: int = 10) -> ParamSeq:
    """Smallest choices allowed by Keane's hypotheses at every step."""
    return iterate_rule(lambda k, n, b: 3 * (n + 1),
                        lambda k, m, b: 2 * m - 1, n1, K, "minimal-admissible")


def with_pairs(seq: ParamSeq, pairs: Iterable[tuple[int, int]]) -> ParamSeq:
    return ParamSeq(tuple(pairs), seq.rule_tag)
