"""Quantitative recurrence under the metric ``d = d_{lambda_2 + lambda_3}``.

The "appendix" rule parameters ``m_k = k^2 n_k``, ``n_{k+1} = b_{k,2}^2`` make the
two ergodic measures approximate each other at different rates.  Only the
finite-depth machinery is here: the statistic ``n^alpha d(T^n x, y)`` along
exact orbits, and the two combinatorial estimates behind the rates.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import numeric
from .construction import DEFAULT_DIGIT_BUDGET, KeaneConstruction, ParamSeq, all_return_times, iterate_rule
from .errors import DomainError, StepBudgetExceeded, step_budget
from .measures import fmt, mass_range, ratio_enclosure, verdict
from .towers import TowerDecomposition

__all__ = [
    "appendix_params",
    "sample_point",
    "RecurrenceRun",
    "recurrence_stat",
    "NiceCheck",
    "controlled_nice_check",
    "MostCheck",
    "control_most_bound",
]

_OFFSET_BITS = 32
RECORD_COLUMNS = ["n", "d_lo", "d_hi", "stat_lo", "stat_hi", "running_min_hi"]


def appendix_params(K: int, n1: int = 10, digit_budget: int = DEFAULT_DIGIT_BUDGET) -> ParamSeq:
    """``m_k = k^2 n_k`` and ``n_{k+1} = b_{k,2}^2``."""
    return iterate_rule(lambda k, n, b: k * k * n, lambda k, m, b: b[k][1] ** 2, n1, K, "appendix",
                        digit_budget)


def sample_point(towers: TowerDecomposition, measure: int, rng: random.Random) -> Fraction:
    """A point in a uniformly chosen floor of the ``I_measure^(k)`` tower.

    ``lambda_2`` gives most of its mass to the ``I_2`` tower and ``lambda_3``
    to the ``I_3`` tower, so this approximates sampling from the measure.
    """
    if measure not in (2, 3):
        raise DomainError(f"measure must be 2 or 3, got {measure}")
    t = rng.randrange(towers.b[measure - 1])
    idx = next(i for i, (tw, tm) in enumerate(zip(towers.towers, towers.times))
               if tw == measure and tm == t)
    left, right, _, _ = towers.floor(idx)
    u = rng.getrandbits(_OFFSET_BITS)
    return left + (right - left) * Fraction(u, 1 << _OFFSET_BITS)


@dataclass
class RecurrenceRun:
    x: Fraction
    y: Fraction
    alpha: Fraction
    N: int
    level: int
    x_measure: int | None = None
    y_measure: int | None = None
    records: list[tuple] = field(default_factory=list)  # (n, d_lo, d_hi, stat_lo, stat_hi, run_min_hi)
    truncated: bool = False

    @property
    def running_min(self) -> list[Fraction]:
        return [r[5] for r in self.records]

    def rows(self, digits: int = 20) -> list[list]:
        """Records as outward-rounded decimal strings."""
        dec = numeric.decimal_str
        return [[n, dec(d_lo, digits, "down"), dec(d_hi, digits, "up"),
                 dec(s_lo, digits, "down"), dec(s_hi, digits, "up"), dec(rmin, digits, "up")]
                for n, d_lo, d_hi, s_lo, s_hi, rmin in self.records]

    def to_csv(self, digits: int = 20) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        w.writerows(self.rows(digits))
        if self.truncated:
            w.writerow(["# truncated", len(self.records), "", "", "", ""])
        return buf.getvalue()


def _power_bounds(n: int, alpha: Fraction) -> tuple[Fraction, Fraction]:
    if alpha == 0:
        return Fraction(1), Fraction(1)
    if alpha.denominator == 1:
        v = Fraction(n) ** alpha
        return v, v
    return numeric.endpoints(numeric.power(numeric.interval(n), alpha))


def recurrence_stat(seq: ParamSeq, x, y, N: int, alpha, level: int | None = None, r: int | None = None,
                    towers: TowerDecomposition | None = None, budget: int | None = None,
                    digits: int = 30) -> RecurrenceRun:
    """Record ``n^alpha d(T^n x, y)`` for ``1 <= n <= N``.

    ``d`` is enclosed from the level-``level`` tower floors; the orbit itself
    is exact.  When ``N`` exceeds the step budget the record stops there and
    is marked truncated.
    """
    x, y, alpha = Fraction(x), Fraction(y), Fraction(str(alpha)) if isinstance(alpha, float) else Fraction(alpha)
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    if N < 1:
        raise DomainError("N must be positive")
    if level is None:
        level = towers.k if towers is not None else seq.K - 2
    construction = towers.construction if towers is not None else KeaneConstruction(seq)
    towers = towers or TowerDecomposition(construction, level, budget)
    encs = [ratio_enclosure(seq, i, level, r) for i in (2, 3)]
    b = towers.b
    limit = step_budget(budget)
    run = RecurrenceRun(x, y, alpha, N, level)
    steps = min(N, limit)
    run.truncated = steps < N

    from math import lcm

    scale = lcm(construction.iet.denominator, x.denominator, y.denominator, towers.scale)
    model = construction.iet.scaled(scale)
    p = int(x * scale)
    Y = y
    best = None
    with numeric.precision(digits):
        for n in range(1, steps + 1):
            p, _ = model.step(p)
            z = Fraction(p, scale)
            a, c = (z, Y) if z <= Y else (Y, z)
            full, touched = towers.cover(a, c)
            d_lo = d_hi = Fraction(0)
            for enc in encs:
                lo, hi = mass_range(enc, b, full, touched)
                d_lo += lo
                d_hi += min(hi, Fraction(1))
            w_lo, w_hi = _power_bounds(n, alpha)
            s_lo, s_hi = d_lo * w_lo, d_hi * w_hi
            best = s_hi if best is None else min(best, s_hi)
            run.records.append((n, d_lo, d_hi, s_lo, s_hi, best))
    return run


# -- rate estimates ------------------------------------------------------------

@dataclass
class NiceCheck:
    k: int
    c: Fraction
    alpha: Fraction
    radius_exponent: Fraction
    t0: int
    components: int
    component_bound: int
    lhs_hi: Fraction        # certified upper bound of the extra neighborhood mass
    rhs_lo: Fraction        # certified lower bound of the extra allowance
    verdict: str
    margin: Fraction

    def as_dict(self) -> dict:
        return {
            "k": self.k, "c": fmt(self.c), "alpha": fmt(self.alpha),
            "radius_exponent": fmt(self.radius_exponent), "t0": self.t0,
            "components": self.components, "component_bound": self.component_bound,
            "lhs_extra_hi": fmt(self.lhs_hi), "rhs_extra_lo": fmt(self.rhs_lo),
            "verdict": self.verdict, "margin": fmt(self.margin),
        }


def controlled_nice_check(seq: ParamSeq, k: int, c, alpha, radius_exponent=None,
                          r: int | None = None, towers: TowerDecomposition | None = None,
                          budget: int | None = None, digits: int = 30) -> NiceCheck:
    """Mass of a ``rho``-neighborhood of ``O(I_3^(k))`` against its allowance.

    The neighborhood adds at most ``2 rho`` of ``lambda_2`` mass in each gap
    between maximal runs of ``I_3^(k)`` floors (``rho`` at the two ends of
    [0,1)), and never more than the gap itself.  The allowance is
    ``(b_{k-1,1} + b_{k-1,4} + b_{k-1,3}) 2c t0^-alpha`` with
    ``t0 = floor(n_k b_{k-1,3} / (k-1)^2)``.  The common term
    ``lambda_2(O(I_3^(k)))`` cancels.
    """
    c, alpha = Fraction(c), Fraction(alpha)
    radius_exponent = alpha if radius_exponent is None else Fraction(radius_exponent)
    if k < 2:
        raise DomainError("the estimate needs k >= 2")
    if c < 0 or alpha < 0:
        raise DomainError("c and alpha must be nonnegative")
    bs = all_return_times(seq)
    b_prev = bs[k - 1]
    t0 = seq.n(k) * b_prev[2] // (k - 1) ** 2
    towers = towers or TowerDecomposition(KeaneConstruction(seq), k, budget)
    enc = ratio_enclosure(seq, 2, k, r)
    runs = towers.runs(3)
    component_bound = b_prev[0] + b_prev[3] + b_prev[2]

    with numeric.precision(digits):
        rho_hi = c * numeric.endpoints(numeric.power(numeric.interval(t0), -radius_exponent))[1]
        allowance = component_bound * 2 * c
        rhs_lo = allowance * numeric.endpoints(numeric.power(numeric.interval(t0), -alpha))[0]

    gaps = []
    if runs and runs[0][0] > 0:
        gaps.append((0, runs[0][0], 1))
    for (_, stop), (start, _) in zip(runs, runs[1:]):
        gaps.append((stop, start, 2))
    if runs and runs[-1][1] < len(towers):
        gaps.append((runs[-1][1], len(towers), 1))
    lhs_hi = Fraction(0)
    for start, stop, sides in gaps:
        gap_hi = mass_range(enc, towers.b, towers.counts(start, stop))[1]
        lhs_hi += min(sides * rho_hi, gap_hi)

    ok = lhs_hi <= rhs_lo
    return NiceCheck(k, c, alpha, radius_exponent, t0, len(runs), component_bound, lhs_hi, rhs_lo,
                     "PASS" if ok else "INCONCLUSIVE", rhs_lo - lhs_hi)


@dataclass
class MostCheck:
    k: int
    mass_lo: Fraction
    mass_hi: Fraction
    bound: Fraction
    mass_verdict: str
    margin: Fraction
    ratio_checks: dict           # i -> (b_{k,i}/n_{k+1}, 1/b_{k,2}, verdict)
    witness: tuple[Fraction, Fraction]
    witness_verdict: str

    @property
    def verdict(self) -> str:
        parts = [self.mass_verdict, self.witness_verdict, *(v[2] for v in self.ratio_checks.values())]
        if "FAIL" in parts:
            return "FAIL"
        return "PASS" if all(p == "PASS" for p in parts) else "INCONCLUSIVE"

    def as_dict(self) -> dict:
        return {
            "k": self.k, "verdict": self.verdict,
            "mass_lo": fmt(self.mass_lo), "mass_hi": fmt(self.mass_hi), "bound": fmt(self.bound),
            "mass_verdict": self.mass_verdict, "margin": fmt(self.margin),
            "ratio_checks": {str(i): [fmt(a), fmt(b), v] for i, (a, b, v) in self.ratio_checks.items()},
            "witness": [fmt(w) for w in self.witness], "witness_verdict": self.witness_verdict,
        }


def control_most_bound(seq: ParamSeq, k: int, r: int | None = None) -> MostCheck:
    """``lambda_3`` of the towers over ``I_1, I_2, I_4`` at level ``k`` against the three-term bound."""
    if not 1 <= k or k + 2 > seq.K:
        raise DomainError(f"level {k} needs n_{{k+2}}, i.e. K >= {k + 2}; have K={seq.K}")
    bs = all_return_times(seq)
    b = bs[k]
    m1, n1, n2 = seq.m(k + 1), seq.n(k + 1), seq.n(k + 2)
    enc = ratio_enclosure(seq, 3, k, r)
    lo, hi = mass_range(enc, b, (b[0], b[1], 0, b[3]))
    bound = Fraction(b[0], n1) + Fraction(2 * b[1] * m1, n1 * n2) + Fraction(b[3], n1)
    v, margin = verdict(lo, hi, "<=", bound)

    ratios = {}
    for i in (1, 3, 4):
        q, cap = Fraction(b[i - 1], n1), Fraction(1, b[1])
        ratios[i] = (q, cap, "PASS" if q < cap else "FAIL")

    w_now = Fraction(1, k * k) + Fraction(3, b[1])
    w_next = Fraction(1, (k + 1) ** 2) + Fraction(3, bs[k + 1][1])
    return MostCheck(k, lo, hi, bound, v, margin, ratios, (w_now, w_next),
                     "PASS" if w_next < w_now else "FAIL")
