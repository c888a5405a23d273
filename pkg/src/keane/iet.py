"""Exact interval exchange transformations.

An IET on ``n`` letters is a permutation together with a length vector on
the open simplex.  Interval ``I_j`` is the half-open interval
``[l_1 + ... + l_{j-1}, l_1 + ... + l_j)`` and the map translates it so that
afterwards the intervals appear in the order given by the permutation:
``perm.images[j-1]`` is the position of ``I_j`` after the exchange.

All points are :class:`fractions.Fraction`.  Orbit stepping is done on
integers after scaling every coordinate by a common denominator, which is
what keeps long orbits cheap.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Sequence

from .errors import DomainError, StepBudgetExceeded, step_budget

__all__ = [
    "Permutation",
    "IETSpec",
    "InducedMap",
    "apply",
    "orbit",
    "first_return",
]


@dataclass(frozen=True)
class Permutation:
    """A permutation of ``{1..n}`` in one-line notation."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        object.__setattr__(self, "images", images)
        n = len(images)
        if n < 1:
            # one letter is allowed: it is what a return map to a continuity interval looks like
            raise DomainError("a permutation needs at least one letter")
        if sorted(images) != list(range(1, n + 1)):
            raise DomainError(f"{images} is not a permutation of 1..{n}")

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, j: int) -> int:
        return self.images[j - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for j, p in enumerate(self.images, start=1):
            inv[p - 1] = j
        return Permutation(tuple(inv))

    def reflected(self) -> "Permutation":
        """The permutation seen after reversing the orientation of [0,1)."""
        n = self.n
        return Permutation(tuple(n + 1 - self.images[n - j] for j in range(1, n + 1)))

    def __str__(self):
        return "(" + " ".join(map(str, self.images)) + ")"


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise DomainError("floating point input is not accepted; pass a Fraction or 'p/q'")
    return Fraction(x)


@dataclass(frozen=True)
class IETSpec:
    perm: Permutation
    lengths: tuple[Fraction, ...]

    def __post_init__(self):
        perm = self.perm if isinstance(self.perm, Permutation) else Permutation(tuple(self.perm))
        lengths = tuple(_as_fraction(x) for x in self.lengths)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "lengths", lengths)
        if len(lengths) != perm.n:
            raise DomainError("need one length per letter")
        if any(l <= 0 for l in lengths):
            raise DomainError("lengths must be positive")
        if sum(lengths) != 1:
            raise DomainError(f"lengths must sum to 1, got {sum(lengths)}")

    @classmethod
    def from_weights(cls, perm, weights: Sequence) -> "IETSpec":
        """Normalize a positive weight vector onto the simplex."""
        weights = [_as_fraction(w) for w in weights]
        total = sum(weights)
        return cls(perm if isinstance(perm, Permutation) else Permutation(tuple(perm)),
                   tuple(w / total for w in weights))

    @property
    def n(self) -> int:
        return self.perm.n

    @cached_property
    def starts(self) -> tuple[Fraction, ...]:
        out, acc = [], Fraction(0)
        for l in self.lengths:
            out.append(acc)
            acc += l
        return tuple(out)

    @cached_property
    def translations(self) -> tuple[Fraction, ...]:
        pi = self.perm.images
        out = []
        for j in range(self.n):
            image_start = sum(self.lengths[k] for k in range(self.n) if pi[k] < pi[j])
            out.append(image_start - self.starts[j])
        return tuple(out)

    @cached_property
    def denominator(self) -> int:
        return lcm(*(l.denominator for l in self.lengths))

    def interval_of(self, x: Fraction) -> int:
        """1-based index of the interval containing ``x``."""
        if not 0 <= x < 1:
            raise DomainError(f"{x} is not in [0,1)")
        return bisect_right(self.starts, x)

    def scaled(self, denominator: int) -> "_ScaledIET":
        return _ScaledIET(self, denominator)

    def __call__(self, x) -> Fraction:
        return apply(self, x)


class _ScaledIET:
    """Integer model of an IET: coordinates multiplied by ``scale``."""

    __slots__ = ("scale", "starts", "ends", "shifts", "n")

    def __init__(self, iet: IETSpec, scale: int):
        if scale % iet.denominator:
            raise ValueError("scale must be a multiple of the length denominator")
        self.scale = scale
        self.n = iet.n
        self.starts = [int(s * scale) for s in iet.starts]
        self.ends = self.starts[1:] + [scale]
        self.shifts = [int(t * scale) for t in iet.translations]

    def step(self, x: int) -> tuple[int, int]:
        """Return ``(T(x), j)`` with ``j`` the 0-based interval of ``x``."""
        j = bisect_right(self.starts, x) - 1
        return x + self.shifts[j], j


def apply(iet: IETSpec, x) -> Fraction:
    """Evaluate the IET at a rational point of [0,1)."""
    x = _as_fraction(x)
    j = iet.interval_of(x)
    return x + iet.translations[j - 1]


def orbit(iet: IETSpec, x, N: int, budget: int | None = None) -> list[tuple[Fraction, int]]:
    """The first ``N+1`` orbit points of ``x`` with their interval symbols."""
    x = _as_fraction(x)
    if not 0 <= x < 1:
        raise DomainError(f"{x} is not in [0,1)")
    if N < 0:
        raise DomainError("N must be nonnegative")
    limit = step_budget(budget)
    if N > limit:
        raise StepBudgetExceeded(N, limit)
    scale = lcm(iet.denominator, x.denominator)
    model = iet.scaled(scale)
    p = int(x * scale)
    out = []
    for _ in range(N + 1):
        q, j = model.step(p)
        out.append((Fraction(p, scale), j + 1))
        p = q
    return out


@dataclass(frozen=True)
class InducedMap:
    """First return map of an IET to a half-open subinterval ``[a,b)``.

    ``pieces`` are the exchanged subintervals in left-to-right order as
    ``(left, right)`` pairs; ``return_times`` and the columns of
    ``landing_pattern`` follow the same order.  ``induced`` is the return
    map rescaled to [0,1).
    """

    base: IETSpec
    sub_interval: tuple[Fraction, Fraction]
    induced: IETSpec
    pieces: tuple[tuple[Fraction, Fraction], ...]
    return_times: tuple[int, ...]
    landing_pattern: tuple[tuple[int, ...], ...] = field(repr=False)

    def column(self, j: int) -> tuple[int, ...]:
        """Visit counts of the ``j``-th piece (0-based) to each interval."""
        return tuple(row[j] for row in self.landing_pattern)

    @property
    def visited_fraction(self) -> Fraction:
        """Lebesgue measure of the union of the return towers."""
        return sum((t * (r - l) for t, (l, r) in zip(self.return_times, self.pieces)),
                   Fraction(0))


def first_return(iet: IETSpec, sub: Iterable, budget: int | None = None) -> InducedMap:
    """Compute the first return map to ``sub = (a, b)`` by exact piece tracking.

    Every piece of ``[a,b)`` is pushed forward as a whole interval; it is cut
    whenever it straddles a discontinuity of the map or the boundary of
    ``[a,b)``, which is the same as pulling the discontinuities back along
    the orbit.
    """
    a, b = (_as_fraction(t) for t in sub)
    if not 0 <= a < b <= 1:
        raise DomainError(f"[{a},{b}) is not a nonempty subinterval of [0,1)")
    limit = step_budget(budget)
    scale = lcm(iet.denominator, a.denominator, b.denominator)
    model = iet.scaled(scale)
    A, B = int(a * scale), int(b * scale)
    n = iet.n

    # work item: (origin, position, length, steps taken, visit counts)
    work = []
    cuts = sorted({A, B, *(s for s in model.starts if A < s < B)})
    for lo, hi in zip(cuts, cuts[1:]):
        work.append((lo, lo, hi - lo, 0, (0,) * n))

    done = []
    applications = 0
    while work:
        origin, pos, length, steps, counts = work.pop()
        j = bisect_right(model.starts, pos) - 1
        end = model.ends[j]
        if pos + length > end:
            cut = end - pos
            work.append((origin + cut, end, length - cut, steps, counts))
            length = cut
        applications += 1
        if applications > limit:
            raise StepBudgetExceeded(applications, limit)
        counts = counts[:j] + (counts[j] + 1,) + counts[j + 1:]
        steps += 1
        lo, hi = pos + model.shifts[j], pos + model.shifts[j] + length
        # split the image against [A, B)
        if lo < A:
            part = min(hi, A) - lo
            work.append((origin, lo, part, steps, counts))
            origin, lo = origin + part, lo + part
        if lo >= hi:
            continue
        if hi > B and lo < B:
            part = B - lo
            work.append((origin + part, B, hi - B, steps, counts))
            hi = B
        if A <= lo < B:
            done.append((origin, lo, hi - lo, steps, counts))
        else:
            work.append((origin, lo, hi - lo, steps, counts))

    done.sort()
    span = B - A
    pieces = tuple((Fraction(o, scale), Fraction(o + l, scale)) for o, _, l, _, _ in done)
    order = sorted(range(len(done)), key=lambda t: done[t][1])
    rank = {t: r + 1 for r, t in enumerate(order)}
    induced = IETSpec(Permutation(tuple(rank[t] for t in range(len(done)))),
                      tuple(Fraction(l, span) for _, _, l, _, _ in done))
    pattern = tuple(tuple(d[4][i] for d in done) for i in range(n))
    return InducedMap(iet, (a, b), induced, pieces, tuple(d[3] for d in done), pattern)
