"""Hausdorff-dimension bound sequences, parameter rules and generic points.

The dimension bounds are the four log-quotients

* ``dim(lambda_2, d_lambda_3)``: upper ``log_{lambda_3(I_2^(k))} b_{k,2}^-1``,
  lower ``log_{lambda_3(I_2^(k))} lambda_2(I_2^(k))``;
* ``dim(lambda_3, d_lambda_2)``: upper ``log_{lambda_2(I_3^(k))} b_{k,3}^-1``,
  lower ``log_{lambda_2(I_3^(k))} lambda_3(I_3^(k))``;

whose liminf in ``k`` bounds the dimension.  Only finite prefixes are
computed; the running minimum stands in for the liminf.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import numeric
from .construction import (
    KeaneConstruction,
    ParamSeq,
    all_return_times,
    iterate_rule,
    minimal_admissible,
)
from .errors import DomainError, StepBudgetExceeded, step_budget
from .measures import mass_range, ratio_enclosure, verdict
from .towers import TowerDecomposition

__all__ = [
    "RuleSpec",
    "parse_rule",
    "generate_rule",
    "iroot",
    "DimRow",
    "DimBoundSeq",
    "dim_bounds",
    "alpha2_statistic",
    "alpha3_statistic",
    "GenericReport",
    "generic_analysis",
    "t_k",
    "t_k_symbolic",
    "PhaseOracle",
    "phase_oracle",
]

DEFAULT_N1 = 10


def iroot(x: int, p: int) -> int:
    """Largest integer ``r`` with ``r**p <= x``."""
    if x < 0 or p < 1:
        raise DomainError("iroot needs x >= 0 and p >= 1")
    if x < 2 or p == 1:
        return x
    r = 1 << -(-x.bit_length() // p)  # r**p > x
    while True:
        s = ((p - 1) * r + x // r ** (p - 1)) // p
        if s >= r:
            break
        r = s
    while r ** p > x:
        r -= 1
    while (r + 1) ** p <= x:
        r += 1
    return r


def floor_power(x: int, alpha: Fraction) -> int:
    """``floor(x ** (1/alpha))`` exactly."""
    return iroot(x ** alpha.denominator, alpha.numerator)


@dataclass(frozen=True)
class RuleSpec:
    tag: str
    alpha: Fraction | None = None
    n1: int = DEFAULT_N1

    @property
    def label(self) -> str:
        if self.tag in ("alpha2", "alpha3"):
            return f"{self.tag}({self.alpha})"
        return self.tag


_FLIP = re.compile(r"^flip\(?([01]),?([01])\)?$")


def parse_rule(name: str, alpha=None, n1: int = DEFAULT_N1) -> RuleSpec:
    """Accept ``flip11``/``flip(1,1)``, ``alpha2``, ``alpha3``, ``generic``, ``appendix``, ``minimal``."""
    name = name.strip()
    m = _FLIP.match(name)
    if m:
        return RuleSpec(f"flip({m.group(1)},{m.group(2)})", None, n1)
    m = re.match(r"^(alpha[23])(?:\((.+)\))?$", name)
    if m:
        a = m.group(2) if m.group(2) is not None else alpha
        if a is None:
            raise DomainError(f"rule {m.group(1)} needs an alpha")
        a = Fraction(str(a))
        if not 0 <= a <= 1:
            raise DomainError(f"alpha must lie in [0,1], got {a}")
        if a == 0:
            raise DomainError("alpha = 0 is realized by the flip rules, not by the power rules")
        return RuleSpec(m.group(1), a, n1)
    if name in ("minimal", "minimal-admissible"):
        return RuleSpec("minimal-admissible", None, n1)
    if name in ("generic", "appendix"):
        return RuleSpec(name, None, n1)
    raise DomainError(f"unknown rule {name!r}")


def generate_rule(rule: RuleSpec | str, K: int) -> ParamSeq:
    """Deterministic ``K``-pair sequence realizing a parameter rule.

    Strict inequalities in the rules are met with the smallest integer:
    ``m > X`` becomes ``m = X + 1``.
    """
    if isinstance(rule, str):
        rule = parse_rule(rule)
    if K < 1:
        raise DomainError("K must be at least 1")
    n1, tag = rule.n1, rule.label

    if rule.tag.startswith("flip"):
        h2, h3 = int(rule.tag[5]), int(rule.tag[7])
        m_of = (lambda k, n, b: 4 * n) if h3 else (lambda k, n, b: n ** k)
        n_of = (lambda k, m, b: 4 * m) if h2 else (lambda k, m, b: m ** k)
        return iterate_rule(m_of, n_of, n1, K, tag)

    if rule.tag == "minimal-admissible":
        return minimal_admissible(K, n1)

    if rule.tag == "generic":
        return iterate_rule(lambda k, n, b: 3 * n, lambda k, m, b: b[k][1] ** k, n1, K, tag)

    if rule.tag == "appendix":
        return iterate_rule(lambda k, n, b: k * k * n, lambda k, m, b: b[k][1] ** 2, n1, K, tag)

    alpha = rule.alpha
    if rule.tag == "alpha2":
        # m_{k+1} > (n_{k+1} b_{k,3})^k and n_{k+2} = floor(m_{k+1}^(1/alpha)),
        # started from the minimal admissible (m_1, n_1, n_2)
        def m_of(k, n, b):
            return 3 * (n + 1) if k == 1 else (n * b[k - 1][2]) ** (k - 1) + 1

        def n_of(k, m, b):
            return 2 * m - 1 if k == 1 else floor_power(m, alpha)

        return iterate_rule(m_of, n_of, n1, K, tag)

    if rule.tag == "alpha3":
        # on k = 2, 4, 6, ...: n_k > b_{k-1,2}^k and m_k = floor(n_k^(1/alpha));
        # elsewhere the filler n_{k+1} = 2 m_k, then m_{k+1} = 3 n_{k+1}
        def m_of(k, n, b):
            return floor_power(n, alpha) if k % 2 == 0 else 3 * n

        def n_of(k, m, b):
            return b[k][1] ** (k + 1) + 1 if (k + 1) % 2 == 0 else 2 * m

        return iterate_rule(m_of, n_of, n1, K, tag)

    raise DomainError(f"unknown rule {rule.tag!r}")  # pragma: no cover


# -- dimension bound sequences ----------------------------------------------

DIRECTIONS = {"2": "dim(lambda2,d_lambda3)", "3": "dim(lambda3,d_lambda2)"}


@dataclass
class DimRow:
    k: int
    upper: object  # mpmath interval, or None when flagged
    lower: object
    flagged: bool = False
    note: str = ""


@dataclass
class DimBoundSeq:
    direction: str
    rows: list[DimRow] = field(default_factory=list)
    digits: int = numeric.DEFAULT_DIGITS

    def _running_min(self, attr) -> list[tuple[Fraction, Fraction] | None]:
        out, cur = [], None
        for row in self.rows:
            val = getattr(row, attr)
            if not row.flagged:
                lo, hi = numeric.endpoints(val)
                cur = (lo, hi) if cur is None else (min(cur[0], lo), min(cur[1], hi))
            out.append(cur)
        return out

    @property
    def running_min_upper(self):
        return self._running_min("upper")

    @property
    def running_min_lower(self):
        return self._running_min("lower")

    def last(self) -> DimRow:
        return [r for r in self.rows if not r.flagged][-1]

    def to_csv(self, digits: int = 20) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "direction", "upper", "upper_err", "lower", "lower_err", "running_min"])
        for row, rmin in zip(self.rows, self.running_min_upper):
            if row.flagged:
                w.writerow([row.k, DIRECTIONS[self.direction], "", "", "", "", ""])
                continue
            up, up_err = numeric.mid_err(row.upper, digits)
            lo, lo_err = numeric.mid_err(row.lower, digits)
            w.writerow([row.k, DIRECTIONS[self.direction], up, up_err, lo, lo_err,
                        numeric.decimal_str(rmin[1], digits, "up")])
        return buf.getvalue()


def dim_bounds(seq: ParamSeq, direction: str | int, K_max: int, r: int | None = None,
               digits: int = numeric.DEFAULT_DIGITS, tail: str = "keane") -> DimBoundSeq:
    """Upper and lower dimension bounds at levels ``1..K_max``."""
    direction = str(direction)
    if direction not in DIRECTIONS:
        raise DomainError(f"direction must be 2 or 3, got {direction}")
    if K_max < 1 or K_max + 2 > seq.K:
        raise DomainError(f"K_max={K_max} needs a sequence of length >= {K_max + 2}")
    j = int(direction)            # the interval I_j^(k) and the measure being sized
    other = 5 - j                 # the metric measure
    bs = all_return_times(seq)
    out = DimBoundSeq(direction, digits=digits)
    e_j = tuple(int(t == j) for t in range(1, 5))
    with numeric.precision(digits):
        for k in range(1, K_max + 1):
            rr = r if r is not None else min(4, seq.K - k)
            own = mass_range(ratio_enclosure(seq, j, k, rr, tail), bs[k], e_j)
            metric = mass_range(ratio_enclosure(seq, other, k, rr, tail), bs[k], e_j)
            if not (0 < metric[0] and metric[1] < 1 and 0 < own[0] and own[1] < 1):
                out.rows.append(DimRow(k, None, None, True, "log base enclosure not inside (0,1)"))
                continue
            neg_log_metric = -numeric.log(numeric.interval(*metric))
            neg_log_own = -numeric.log(numeric.interval(*own))
            upper = numeric.log(numeric.interval(bs[k][j - 1])) / neg_log_metric
            lower = neg_log_own / neg_log_metric
            out.rows.append(DimRow(k, upper, lower))
    return out


def alpha2_statistic(seq: ParamSeq, k: int, digits: int = numeric.DEFAULT_DIGITS):
    """``-log b_{k,2} / log(m_{k+1} / (n_{k+1} n_{k+2} b_{k,3}))``."""
    if not 1 <= k <= seq.K - 2:
        raise DomainError(f"need 1 <= k <= K-2, got k={k}, K={seq.K}")
    b = all_return_times(seq.truncated(k))[k]
    with numeric.precision(digits):
        ratio = numeric.interval(Fraction(seq.m(k + 1), seq.n(k + 1) * seq.n(k + 2) * b[2]))
        return -numeric.log(numeric.interval(b[1])) / numeric.log(ratio)


def alpha3_statistic(seq: ParamSeq, k: int, digits: int = numeric.DEFAULT_DIGITS):
    """``log(1/b_{k,3}) / (log(1/b_{k,2}) + log(n_{k+1}/m_{k+1}))``."""
    if not 1 <= k <= seq.K - 1:
        raise DomainError(f"need 1 <= k <= K-1, got k={k}, K={seq.K}")
    b = all_return_times(seq.truncated(k))[k]
    with numeric.precision(digits):
        num = -numeric.log(numeric.interval(b[2]))
        den = -numeric.log(numeric.interval(b[1])) + numeric.log(
            numeric.interval(Fraction(seq.n(k + 1), seq.m(k + 1))))
        return num / den


# -- generic points ---------------------------------------------------------

def _good_phases(L: int, b1: int, b4: int, eps: Fraction) -> int:
    """Number of ``p in [0, L)`` with ``b1 / (L - p + b4) < eps``."""
    threshold = L + b4 - Fraction(b1) / eps      # p < threshold
    count = -((-threshold.numerator) // threshold.denominator)  # ceil
    return max(0, min(L, count))


@dataclass
class GenericReport:
    k: int
    eps: Fraction
    b: tuple[int, ...]
    n_next: int
    m_next: int
    pattern_phases: int
    pattern_good: int
    piece_runs: dict = field(default_factory=dict)   # piece -> (run length, good phases)
    covering_value: object = None
    covering_verdict: str = ""
    complement_hi: Fraction | None = None
    complement_bound: Fraction | None = None
    complement_verdict: str = ""

    @property
    def pattern_fraction(self) -> Fraction:
        return Fraction(self.pattern_good, self.pattern_phases)

    def as_dict(self, digits: int = 20) -> dict:
        lo, hi = numeric.bounds_str(self.covering_value, digits)
        return {
            "k": self.k,
            "eps": f"{self.eps.numerator}/{self.eps.denominator}",
            "b": list(self.b),
            "n_next": self.n_next,
            "pattern_phases": self.pattern_phases,
            "pattern_good": self.pattern_good,
            "pattern_fraction": f"{self.pattern_fraction.numerator}/{self.pattern_fraction.denominator}",
            "piece_runs": {str(j): list(v) for j, v in self.piece_runs.items()},
            "covering_value": [lo, hi],
            "covering_threshold": f"1/{self.k}",
            "covering_verdict": self.covering_verdict,
            "complement_hi": None if self.complement_hi is None else
            f"{self.complement_hi.numerator}/{self.complement_hi.denominator}",
            "complement_bound": None if self.complement_bound is None else
            f"{self.complement_bound.numerator}/{self.complement_bound.denominator}",
            "complement_verdict": self.complement_verdict,
        }


def generic_analysis(seq: ParamSeq, k: int, eps, r: int | None = None,
                     digits: int = numeric.DEFAULT_DIGITS) -> GenericReport:
    """Phase counting in the ``I_3^(k)`` tower and the covering condition at level ``k``.

    A point at phase ``p`` of a run of ``L`` consecutive passes through
    ``O(I_3^(k))`` needs at least ``L - p + b_{k,4}`` steps to reach
    ``O(I_1^(k))``, with equality when the following return to ``I^(k+1)``
    lands in piece 3 or 4.  Runs have ``n_{k+1}`` passes, one fewer for
    piece 3.
    """
    eps = Fraction(str(eps)) if not isinstance(eps, Fraction) else eps
    if eps <= 0:
        raise DomainError("eps must be positive")
    if not 1 <= k <= seq.K - 1:
        raise DomainError(f"need 1 <= k <= K-1, got k={k}, K={seq.K}")
    b = all_return_times(seq)[k]
    m1, n1 = seq.m(k + 1), seq.n(k + 1)
    b1, b2, b3, b4 = b
    L = n1 * b3
    report = GenericReport(k, eps, b, n1, m1, L, _good_phases(L, b1, b4, eps))
    passes = {1: n1, 2: n1, 3: n1 - 1, 4: n1}
    for piece, c in passes.items():
        Lj = c * b3
        report.piece_runs[piece] = (Lj, _good_phases(Lj, b1, b4, eps))

    with numeric.precision(digits):
        val = numeric.power(numeric.interval(Fraction(b1, n1)), Fraction(1, k)) * b3
        report.covering_value = val
        report.covering_verdict = verdict(*numeric.endpoints(val), "<", Fraction(1, k))[0]

    if k + 2 <= seq.K:
        rr = r if r is not None else min(4, seq.K - k)
        enc = ratio_enclosure(seq, 3, k, rr)
        lo, hi = mass_range(enc, b, (b1, b2, 0, b4))
        bound = Fraction(b1 + b4, n1) + Fraction(2 * b2 * m1, n1 * seq.n(k + 2))
        report.complement_hi = hi
        report.complement_bound = bound
        report.complement_verdict = verdict(lo, hi, "<", bound)[0]
    return report


def t_k(construction: KeaneConstruction, x, k: int, towers: TowerDecomposition | None = None,
        budget: int | None = None) -> int:
    """``min{n >= 0 : T^n x in O(I_1^(k))}`` by orbit stepping."""
    from math import lcm

    x = Fraction(x)
    towers = towers or TowerDecomposition(construction, k, budget)
    limit = step_budget(budget)
    scale = lcm(towers.scale, construction.iet.denominator, x.denominator)
    model = construction.iet.scaled(scale)
    factor = scale // towers.scale
    p = int(x * scale)
    from bisect import bisect_right

    lefts, tw = towers.lefts, towers.towers
    for steps in range(limit + 1):
        if tw[bisect_right(lefts, p // factor) - 1] == 1:
            return steps
        p, _ = model.step(p)
    raise StepBudgetExceeded(limit + 1, limit)


@dataclass
class PhaseOracle:
    """Orbit-simulated ``t_k`` along one run of passes through ``O(I_3^(k))``."""

    k: int
    piece: int
    run_length: int
    t_sim: list[int]
    t_phase: list[int]
    predicted_good: int
    simulated_good: int

    @property
    def agrees(self) -> bool:
        return self.t_sim == self.t_phase and self.predicted_good == self.simulated_good


def phase_oracle(construction: KeaneConstruction, k: int, eps, piece: int | None = None,
                 towers: TowerDecomposition | None = None, budget: int | None = None) -> PhaseOracle:
    """Check the phase formula ``t_k = L - p + b_{k,4}`` against orbit stepping.

    The run is the last segment of the journey of ``I_piece^(k+1)``; it is
    followed by ``O(I_1^(k))`` only when the next return lands in piece 3
    or 4, so a base point with that property is chosen.
    """
    from .iet import orbit

    eps = Fraction(str(eps)) if not isinstance(eps, Fraction) else eps
    seq = construction.seq
    b = all_return_times(seq)[k]
    towers = towers or TowerDecomposition(construction, k, budget)
    lo, hi = construction.level_interval(k + 1)
    induced = construction.induced_spec(k + 1)
    names = construction.names_left_to_right(k + 1)

    candidates = [piece] if piece else [3, 4, 1, 2]
    for j in candidates:
        left, right = construction.base(k + 1, j)
        for i in range(16):
            x0 = left + (right - left) * Fraction(2 * i + 1, 32)
            nxt = names[induced.interval_of(induced((x0 - lo) / (hi - lo))) - 1]
            if nxt in (3, 4):
                break
        else:
            continue
        break
    else:
        raise DomainError(f"no base point at level {k + 1} returns into pieces 3 or 4")

    segments = _journey(seq, b, k, j)
    start = segments[0][1] + segments[1][1]
    L = segments[2][1]
    points = [p for p, _ in orbit(construction.iet, x0, start + L - 1, budget)[start:]]
    t_sim = [t_k(construction, z, k, towers, budget) for z in points]
    t_phase = [L - p + b[3] for p in range(L)]
    sim_good = sum(1 for t in t_sim if b[0] < eps * t)
    return PhaseOracle(k, j, L, t_sim, t_phase, _good_phases(L, b[0], b[3], eps), sim_good)


def _journey(seq: ParamSeq, b: Sequence[int], k: int, piece: int) -> list[tuple[int, int]]:
    """Level-``k`` towers visited by ``I_piece^(k+1)`` before it returns, as (tower, steps)."""
    m, n = seq.m(k + 1), seq.n(k + 1)
    middle = (1, b[0]) if piece in (3, 4) else (2, (m - 1 if piece == 1 else m) * b[1])
    last = (3, (n - 1 if piece == 3 else n) * b[2])
    return [(4, b[3]), middle, last]


def t_k_symbolic(construction: KeaneConstruction, x, k: int,
                 upper: TowerDecomposition | None = None, max_iter: int = 10**6) -> int:
    """``t_k`` from the level-``k+1`` tower position and the level-``k+1`` return map.

    Pieces 3 and 4 of level ``k+1`` pass through ``O(I_1^(k))`` right after
    ``O(I_4^(k))``; pieces 1 and 2 never do.  Runs of returns inside piece 2
    are a translation of the induced map and are skipped in one jump.
    """
    x = Fraction(x)
    seq = construction.seq
    upper = upper or TowerDecomposition(construction, k + 1)
    bs = all_return_times(seq)
    b, b_up = bs[k], bs[k + 1]
    left, _, piece, tau = upper.floor(upper.locate(x))

    clock = 0
    for tower, steps in _journey(seq, b, k, piece):
        if tower == 1 and tau < clock + steps:
            return max(0, clock - tau)
        clock += steps

    lo, hi = construction.level_interval(k + 1)
    induced = construction.induced_spec(k + 1)
    names = construction.names_left_to_right(k + 1)
    slot = {name: i for i, name in enumerate(names)}
    base = construction.base(k + 1, piece)[0] + (x - left)
    y = induced((base - lo) / (hi - lo))
    total = b_up[piece - 1] - tau

    c2 = induced.starts[slot[2]]
    d2 = c2 + induced.lengths[slot[2]]
    s2 = induced.translations[slot[2]]
    for _ in range(max_iter):
        piece = names[induced.interval_of(y) - 1]
        if piece in (3, 4):
            return total + b[3]
        if piece == 1:
            total += b_up[0]
            y = induced(y)
            continue
        # stay in piece 2 for q consecutive returns
        q = -((y - d2) // s2) if s2 > 0 else (y - c2) // -s2 + 1
        total += int(q) * b_up[1]
        y += q * s2
    raise StepBudgetExceeded(max_iter, max_iter)
