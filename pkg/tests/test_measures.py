import csv
import io
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from keane.construction import KeaneConstruction, all_return_times, minimal_admissible
from keane.errors import DomainError
from keane.measures import (
    LEMMAS,
    distance,
    interval_measure,
    lemma_csv,
    lemma_suite,
    level_measure,
    mass_range,
    ratio_enclosure,
)
from keane.towers import TowerDecomposition

SEQ = minimal_admissible(8)


@pytest.fixture(scope="module")
def towers2():
    return TowerDecomposition(KeaneConstruction(SEQ), 2)


def test_l3_enclosure_third_entry_big():
    enc = ratio_enclosure(SEQ, 3, 0, 3)
    assert enc.lo[2] >= 1 - Fraction(3, SEQ.n(1))


def test_l2_enclosure_second_entry_big():
    enc = ratio_enclosure(SEQ, 2, 0, 3)
    m1, n1 = SEQ.pairs[0]
    assert enc.lo[1] >= Fraction(m1, 4 * (n1 + m1 + 2))


def test_enclosure_needs_tail():
    with pytest.raises(DomainError):
        ratio_enclosure(SEQ, 2, 6, 3)
    with pytest.raises(DomainError):
        ratio_enclosure(SEQ, 2, 0, 1)
    with pytest.raises(DomainError):
        ratio_enclosure(SEQ, 4, 0, 3)


@pytest.mark.parametrize("i", [2, 3])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_enclosure_nesting(i, k):
    prev = None
    for r in range(2, SEQ.K - k + 1):
        enc = ratio_enclosure(SEQ, i, k, r)
        assert all(lo <= hi for lo, hi in zip(enc.lo, enc.hi))
        assert sum(enc.lo) <= 1 <= sum(enc.hi)
        if prev is not None:
            assert all(a <= b for a, b in zip(prev.lo, enc.lo))
            assert all(a >= b for a, b in zip(prev.hi, enc.hi))
        prev = enc


@pytest.mark.parametrize("tail", ["keane", "simplex"])
def test_simplex_tail_is_coarser(tail):
    enc = ratio_enclosure(SEQ, 2, 1, 3, tail)
    fine = ratio_enclosure(SEQ, 2, 1, 3)
    assert all(a <= b for a, b in zip(enc.lo, fine.lo))


def test_level_zero_measure_is_one():
    for i in (2, 3):
        v = level_measure(SEQ, i, 0)
        assert v.lo == v.hi == 1


@pytest.mark.parametrize("k", range(1, 7))
def test_lambda3_level_sandwich(k):
    b = all_return_times(SEQ)[k]
    v = level_measure(SEQ, 3, k)
    assert v.consistent
    assert Fraction(1, 8 * b[2]) < v.lo <= v.hi < Fraction(1, b[2])


@pytest.mark.parametrize("k", range(1, 7))
def test_lambda2_level_exceeds_reciprocal_b2(k):
    # 1 = sum_j b_{k,j} lambda(I_j^(k)) <= b_{k,2} lambda(I^(k))
    b = all_return_times(SEQ)[k]
    v = level_measure(SEQ, 2, k)
    assert v.lo > Fraction(1, b[1])
    assert not v.consistent
    lo, hi = mass_range(ratio_enclosure(SEQ, 2, k), b, (0, 1, 0, 0))
    assert Fraction(1, 4 * b[1]) < lo <= hi < Fraction(1, b[1])


@pytest.mark.parametrize("k", range(0, 5))
def test_normalization_contains_one(k):
    b = all_return_times(SEQ)[k]
    for i in (2, 3):
        enc = ratio_enclosure(SEQ, i, k, 3)
        lo, hi = mass_range(enc, b, b)
        assert lo == hi == 1


@pytest.mark.parametrize("k", range(0, 4))
def test_consistency_across_levels(k):
    for i in (2, 3):
        inner = level_measure(SEQ, i, k + 1)
        enc = ratio_enclosure(SEQ, i, k)
        lo, hi = mass_range(enc, all_return_times(SEQ)[k], (0, 0, 0, 1))
        assert lo <= inner.lo and inner.hi <= hi


def test_interval_measure_full_and_level(towers2):
    for i in (2, 3):
        whole = interval_measure(SEQ, i, 0, 1, 2, towers=towers2)
        assert whole.lo == whole.hi == 1
    C = towers2.construction
    lo, hi = C.level_interval(2)
    for i in (2, 3):
        v = interval_measure(SEQ, i, lo, hi, 2, towers=towers2)
        lm = level_measure(SEQ, i, 2)
        assert v.lo == lm.lo and v.hi == lm.hi


@given(st.lists(st.integers(0, 10**6), min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_interval_measure_additive_and_monotone(towers2, pts):
    a, b, c = sorted(Fraction(p, 10**6) for p in pts)
    for i in (2, 3):
        left = interval_measure(SEQ, i, a, b, 2, towers=towers2)
        right = interval_measure(SEQ, i, b, c, 2, towers=towers2)
        whole = interval_measure(SEQ, i, a, c, 2, towers=towers2)
        total = left + right
        assert total.lo <= whole.hi and whole.lo <= total.hi
        assert left.hi <= whole.hi + right.hi


@given(st.lists(st.integers(0, 10**6 - 1), min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_distance_symmetry_and_triangle(towers2, pts):
    x, y, z = (Fraction(p, 10**6) for p in pts)
    dxy = distance(SEQ, x, y, 2, towers=towers2)
    assert dxy == distance(SEQ, y, x, 2, towers=towers2)
    dxz = distance(SEQ, x, z, 2, towers=towers2)
    dzy = distance(SEQ, z, y, 2, towers=towers2)
    assert dxy.lo <= dxz.hi + dzy.hi


def test_interval_measure_rejects_bad_interval(towers2):
    with pytest.raises(DomainError):
        interval_measure(SEQ, 2, Fraction(1, 2), Fraction(1, 3), 2, towers=towers2)


def test_lemma_suite_all_pass():
    rows = lemma_suite(minimal_admissible(7), 4, r=3)
    assert len(rows) == len(LEMMAS) * 5 == 80
    assert {r.verdict for r in rows} == {"PASS"}
    by_id = {(r.lemma_id, r.k): r for r in rows}
    seq = minimal_admissible(7)
    for k in range(5):
        row = by_id[("L3I4small", k)]
        assert row.bound == Fraction(1, seq.n(k + 1)) and row.enclosure_hi <= row.bound
        row = by_id[("L2I4big", k)]
        assert row.bound == Fraction(1, 2 * seq.m(k + 1)) and row.enclosure_lo > row.bound
        assert by_id[("L3bigorbit", k)].enclosure_lo > Fraction(1, 8)


def test_lemma_suite_simplex_tail_never_fails():
    rows = lemma_suite(minimal_admissible(7), 4, r=3, tail="simplex")
    assert "FAIL" not in {r.verdict for r in rows}
    assert "INCONCLUSIVE" in {r.verdict for r in rows}


def test_lemma_csv_header():
    rows = lemma_suite(minimal_admissible(5), 2, r=3)
    table = list(csv.reader(io.StringIO(lemma_csv(rows))))
    assert table[0] == ["lemma_id", "k", "verdict", "bound", "enclosure_lo", "enclosure_hi", "margin"]
    assert len(table) == len(rows) + 1
    assert all("/" in cell for cell in table[1][3:])
