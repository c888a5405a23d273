"""Level-k Rokhlin tower decomposition of the constructed IET."""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from itertools import accumulate
from math import lcm

from .construction import KeaneConstruction, return_times
from .errors import DomainError, StepBudgetExceeded, step_budget


class TowerDecomposition:
    """Floors ``T^t(I_j^(k))``, ``0 <= t < b_{k,j}``, sorted left to right.

    Floors are located by stepping the left endpoint of each base interval;
    a floor never meets a discontinuity before its tower returns, so the
    whole floor is a translate of its base.
    """

    def __init__(self, construction: KeaneConstruction, k: int, budget: int | None = None):
        if not 0 <= k <= construction.depth:
            raise DomainError(f"level {k} out of range 0..{construction.depth}")
        self.construction = construction
        self.k = k
        self.b = return_times(construction.seq, k).b
        limit = step_budget(budget)
        total = sum(self.b)
        if total > limit:
            raise StepBudgetExceeded(total, limit)

        iet = construction.iet
        bases = [construction.base(k, j) for j in (1, 2, 3, 4)]
        scale = lcm(iet.denominator, *(x.denominator for span in bases for x in span))
        model = iet.scaled(scale)
        self.scale = scale

        floors = []
        for j, (left, right) in enumerate(bases, start=1):
            x = int(left * scale)
            width = int((right - left) * scale)
            for t in range(self.b[j - 1]):
                floors.append((x, width, j, t))
                if t + 1 < self.b[j - 1]:
                    x, _ = model.step(x)
        floors.sort()
        self.lefts = [f[0] for f in floors]
        self.widths = [f[1] for f in floors]
        self.towers = [f[2] for f in floors]
        self.times = [f[3] for f in floors]
        self._check_partition()
        # prefix[j][t] = number of floors of tower j+1 among the first t floors
        self.prefix = [
            [0, *accumulate(1 if tw == j else 0 for tw in self.towers)] for j in (1, 2, 3, 4)
        ]

    def _check_partition(self):
        pos = 0
        for x, w in zip(self.lefts, self.widths):
            if x != pos:
                raise AssertionError(f"tower floors do not tile [0,1) at {Fraction(x, self.scale)}")
            pos += w
        if pos != self.scale:
            raise AssertionError("tower floors do not cover [0,1)")

    def __len__(self):
        return len(self.lefts)

    def floor(self, idx: int) -> tuple[Fraction, Fraction, int, int]:
        """``(left, right, tower, time)`` of the ``idx``-th floor from the left."""
        x, w = self.lefts[idx], self.widths[idx]
        return Fraction(x, self.scale), Fraction(x + w, self.scale), self.towers[idx], self.times[idx]

    def locate(self, x) -> int:
        """Index of the floor containing the point ``x``."""
        x = Fraction(x)
        if not 0 <= x < 1:
            raise DomainError(f"{x} is not in [0,1)")
        return bisect_right(self.lefts, (x * self.scale).__floor__()) - 1

    def tower_of(self, x) -> tuple[int, int]:
        idx = self.locate(x)
        return self.towers[idx], self.times[idx]

    def counts(self, start: int, stop: int) -> tuple[int, int, int, int]:
        """Floors of each tower among indices ``start <= idx < stop``."""
        return tuple(p[stop] - p[start] for p in self.prefix)

    def cover(self, a, b) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Floor counts fully inside ``[a,b)`` and counts of all floors meeting it."""
        a, b = Fraction(a), Fraction(b)
        if not 0 <= a <= b <= 1:
            raise DomainError(f"[{a},{b}) is not a subinterval of [0,1]")
        if a == b:
            return (0, 0, 0, 0), (0, 0, 0, 0)
        S = self.scale
        ia = self.locate(a)
        a_on_edge = self.lefts[ia] == a * S
        if b == 1:
            ib, b_on_edge = len(self), True
        else:
            ib = self.locate(b)
            b_on_edge = self.lefts[ib] == b * S
        if ia == ib:
            part = [0, 0, 0, 0]
            part[self.towers[ia] - 1] = 1
            return (0, 0, 0, 0), tuple(part)
        first_full = ia if a_on_edge else ia + 1
        full = self.counts(first_full, ib)
        touched = list(full)
        if not a_on_edge:
            touched[self.towers[ia] - 1] += 1
        if not b_on_edge:
            touched[self.towers[ib] - 1] += 1
        return full, tuple(touched)

    def runs(self, tower: int) -> list[tuple[int, int]]:
        """Maximal runs ``[start, stop)`` of consecutive floors of ``tower``."""
        out, start = [], None
        for idx, tw in enumerate(self.towers):
            if tw == tower and start is None:
                start = idx
            elif tw != tower and start is not None:
                out.append((start, idx))
                start = None
        if start is not None:
            out.append((start, len(self)))
        return out
