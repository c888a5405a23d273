import json
from fractions import Fraction
from math import prod

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from keane.construction import (
    KEANE_PERMUTATION,
    LITERAL_PERMUTATION,
    KeaneConstruction,
    ParamSeq,
    admissible,
    all_return_times,
    is_admissible,
    keane_matrix,
    lengths,
    minimal_admissible,
    return_times,
)
from keane.errors import DomainError
from keane.iet import IETSpec, first_return


@st.composite
def admissible_seqs(draw, K_max=4):
    """Random sequences meeting 3(n_k+1) <= m_k <= (n_{k+1}+1)/2 and n_1 > 9."""
    K = draw(st.integers(1, K_max))
    n = draw(st.integers(10, 40))
    pairs = []
    for k in range(K):
        m = draw(st.integers(3 * (n + 1), 3 * (n + 1) + 50))
        pairs.append((m, n))
        n = draw(st.integers(2 * m - 1, 2 * m + 100))
    return ParamSeq(tuple(pairs))


def test_matrix_rows():
    assert keane_matrix(1, 1).entries == ((0, 0, 1, 1), (0, 1, 0, 0), (1, 1, 0, 1), (1, 1, 1, 1))
    A = keane_matrix(33, 10)
    assert A.entries[1] == (32, 33, 0, 0)
    assert A.entries[2] == (10, 10, 9, 10)
    assert A.column_sums == (43, 44, 11, 12)


@pytest.mark.parametrize("m,n", [(0, 1), (1, 0), (-3, 5)])
def test_matrix_rejects_nonpositive(m, n):
    with pytest.raises(DomainError):
        keane_matrix(m, n)


def test_admissible_example():
    rows = admissible(ParamSeq(((33, 10), (201, 66))), strict=True)
    assert all(r.status == "pass" for r in rows)


def test_admissible_n1():
    rows = admissible(ParamSeq(((33, 9),)), strict=True)
    assert [r.status for r in rows if r.condition == "n_1 > 9"] == ["fail"]
    relaxed = admissible(ParamSeq(((33, 9),)))
    assert [r.status for r in relaxed if r.condition == "n_1 > 9"] == ["warn"]


def test_single_pair_only_checks_n1_and_lower_bound():
    rows = admissible(ParamSeq(((33, 10),)), strict=True)
    assert {r.condition for r in rows} == {"n_1 > 9", "3(n_k+1) <= m_k"}


def test_lengths_one_level():
    v = (Fraction(1, 4),) * 4
    for m, n in [(10, 3), (33, 10), (7, 1)]:
        expect = tuple(Fraction(x, 2 * m + 4 * n + 4) for x in (2, 2 * m - 1, 4 * n - 1, 4))
        assert lengths(ParamSeq(((m, n),)), v) == expect
    assert lengths(ParamSeq(((10, 3),)), v) == (Fraction(1, 18), Fraction(19, 36), Fraction(11, 36), Fraction(1, 9))


def test_lengths_empty_product():
    v = (Fraction(1, 10), Fraction(2, 10), Fraction(3, 10), Fraction(4, 10))
    assert lengths(None, v) == v
    assert lengths(ParamSeq(((33, 10),)), v, K=0) == v


def test_lengths_reject_off_simplex():
    with pytest.raises(DomainError):
        lengths(ParamSeq(((33, 10),)), (Fraction(1, 2),) * 4)


def test_return_times():
    seq = ParamSeq(((33, 10), (201, 66)))
    assert return_times(seq, 1).b == (43, 44, 11, 12)
    assert return_times(seq, 0).b == (1, 1, 1, 1)
    assert return_times(seq, 2)[2] == 201 * 44 + 66 * 11 + 12
    with pytest.raises(DomainError):
        return_times(seq, 3)


@given(admissible_seqs())
@settings(max_examples=120, deadline=None)
def test_return_time_laws(seq):
    for k, b in enumerate(all_return_times(seq)):
        if k == 0:
            continue
        assert b[1] > max(b[0], b[2], b[3])
        assert b[1] <= prod(2 * m for m, _ in seq.pairs[:k])
        assert b[2] > prod(n for _, n in seq.pairs[:k])


@given(admissible_seqs(), st.data())
@settings(max_examples=120, deadline=None)
def test_perturbation_independence(seq, data):
    k = data.draw(st.integers(1, seq.K))
    base = all_return_times(seq)
    pairs = list(seq.pairs)
    m, n = pairs[k - 1]

    pairs[k - 1] = (m, n + 1)
    bumped_n = all_return_times(ParamSeq(tuple(pairs)))
    for i in range(k):
        assert bumped_n[i][1] == base[i][1] and bumped_n[i][2] == base[i][2]

    pairs[k - 1] = (m + 1, n)
    bumped_m = all_return_times(ParamSeq(tuple(pairs)))
    for i in range(k):
        assert bumped_m[i][1] == base[i][1]
    for i in range(k + 1):
        assert bumped_m[i][2] == base[i][2]


def test_paramseq_json_round_trip():
    seq = ParamSeq(((33, 10), (201, 66)), "minimal-admissible")
    text = seq.to_json()
    assert json.loads(text) == {"rule": "minimal-admissible", "pairs": [[33, 10], [201, 66]]}
    assert ParamSeq.from_json(text) == seq


@pytest.mark.parametrize("text", [
    '{"rule": "x", "pairs": [[0, 10]]}',
    '{"rule": "x", "pairs": []}',
    '{"rule": "x", "pairs": [[1]]}',
    '{"pairs": [[3, 1]]}',
    '[1, 2]',
    '{"rule": "x", "pairs": [[1.5, 2]]}',
])
def test_paramseq_json_validation(text):
    with pytest.raises(DomainError):
        ParamSeq.from_json(text)


def test_minimal_admissible_is_admissible():
    seq = minimal_admissible(6)
    assert seq.pairs[:3] == ((33, 10), (198, 65), (1188, 395))
    assert is_admissible(seq)


def _composition_holds(perm, C):
    # I_1 = T(I_4^(1) u I_3^(1))
    T = IETSpec(perm, C.iet.lengths)
    spans = sorted((T(C.base(1, j)[0]), T(C.base(1, j)[0]) + C.base(1, j)[1] - C.base(1, j)[0])
                   for j in (3, 4))
    return spans[0][0] == 0 and spans[0][1] == spans[1][0] and spans[1][1] == C.iet.lengths[0]


def test_tower_composition_relation():
    C = KeaneConstruction(ParamSeq(((33, 10),)))
    assert _composition_holds(KEANE_PERMUTATION, C)


def test_literal_reading_is_rejected():
    C = KeaneConstruction(ParamSeq(((33, 10),)))
    assert not _composition_holds(LITERAL_PERMUTATION, C)
    literal = IETSpec(LITERAL_PERMUTATION, C.iet.lengths)
    ind = first_return(literal, C.level_interval(1))
    assert sorted(ind.return_times) != sorted((43, 44, 11, 12))


def test_bases_nest_and_alternate():
    C = KeaneConstruction(minimal_admissible(4))
    for k in range(1, 5):
        lo, hi = C.level_interval(k)
        spans = [C.base(k, j) for j in (1, 2, 3, 4)]
        assert min(s[0] for s in spans) == lo and max(s[1] for s in spans) == hi
        first = spans[0][0] == lo
        assert first == (k % 2 == 0)


@pytest.mark.parametrize("k", [1, 2])
def test_induced_spec_matches_first_return(k):
    C = KeaneConstruction(ParamSeq(((33, 10), (201, 66), (1200, 403))))
    ind = first_return(C.iet, C.level_interval(k))
    assert ind.induced == C.induced_spec(k)
