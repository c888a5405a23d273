"""Brute-force induction versus the matrix-product predictions."""

from __future__ import annotations

from dataclasses import dataclass

from .construction import KeaneConstruction, ParamSeq, keane_matrix, product, return_times
from .errors import DomainError
from .iet import first_return

__all__ = ["OracleReport", "induction_oracle"]


@dataclass(frozen=True)
class OracleReport:
    k: int
    return_times: tuple[int, ...]          # simulated, by piece name 1..4
    predicted_times: tuple[int, ...]
    pattern_ok: bool                       # visits to I_1..I_4 equal A_1 ... A_k
    local_pattern_ok: bool                 # visits inside I^(k-1) equal A_k
    induced_ok: bool                       # return map equals the level-k Keane IET
    full_cover: bool

    @property
    def ok(self) -> bool:
        return (self.return_times == self.predicted_times and self.pattern_ok
                and self.local_pattern_ok and self.induced_ok and self.full_cover)

    def as_dict(self) -> dict:
        return {"k": self.k, "ok": self.ok, "return_times": list(self.return_times),
                "predicted": list(self.predicted_times), "pattern": self.pattern_ok,
                "local_pattern": self.local_pattern_ok, "induced": self.induced_ok,
                "full_cover": self.full_cover}


def _by_name(pattern_cols, names):
    """Reindex left-to-right columns by piece name."""
    return {name: pattern_cols[pos] for pos, name in enumerate(names)}


def induction_oracle(seq: ParamSeq, k: int, budget: int | None = None) -> OracleReport:
    """Compute the first return to ``I^(k)`` by orbit stepping and compare.

    The direct return to ``I^(k)`` inside [0,1) must reproduce the return
    times ``b_k`` and the landing pattern ``A_1 ... A_k``; the return to
    ``I^(k)`` inside ``I^(k-1)`` must reproduce ``A_k`` alone.
    """
    if not 1 <= k <= seq.K:
        raise DomainError(f"level {k} out of range 1..{seq.K}")
    C = KeaneConstruction(seq)
    names = C.names_left_to_right(k)
    direct = first_return(C.iet, C.level_interval(k), budget)
    if len(direct.pieces) != 4:
        return OracleReport(k, direct.return_times, return_times(seq, k).b, False, False, False, False)

    times = _by_name(direct.return_times, names)
    cols = _by_name([direct.column(j) for j in range(4)], names)
    P = product(seq, 0, k)
    pattern_ok = all(cols[j] == tuple(P[i][j - 1] for i in range(4)) for j in (1, 2, 3, 4))
    induced_ok = direct.induced == C.induced_spec(k)
    full_cover = direct.visited_fraction == 1

    # one level of induction inside I^(k-1)
    outer_lo, outer_hi = C.level_interval(k - 1)
    span = outer_hi - outer_lo
    lo, hi = C.level_interval(k)
    base = C.iet if k == 1 else C.induced_spec(k - 1)
    local = first_return(base, ((lo - outer_lo) / span, (hi - outer_lo) / span), budget)
    outer_names = C.names_left_to_right(k - 1)
    A = keane_matrix(*seq.pairs[k - 1]).entries
    local_ok = len(local.pieces) == 4
    if local_ok:
        lcols = _by_name([local.column(j) for j in range(4)], names)
        for j in (1, 2, 3, 4):
            # rows of the local pattern are the level-(k-1) pieces, left to right
            by_row = {outer_names[pos]: lcols[j][pos] for pos in range(4)}
            local_ok &= all(by_row[i] == A[i - 1][j - 1] for i in (1, 2, 3, 4))

    return OracleReport(k, tuple(times[j] for j in (1, 2, 3, 4)), return_times(seq, k).b,
                        pattern_ok, local_ok, induced_ok, full_cover)
