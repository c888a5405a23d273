from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from keane.construction import KeaneConstruction, all_return_times, is_admissible, iterate_rule
from keane.dimension import (
    alpha2_statistic,
    dim_bounds,
    floor_power,
    generate_rule,
    generic_analysis,
    iroot,
    parse_rule,
    phase_oracle,
    t_k,
    t_k_symbolic,
)
from keane.errors import DomainError, StepBudgetExceeded
from keane.numeric import endpoints
from keane.towers import TowerDecomposition


@given(st.integers(0, 10**40), st.integers(1, 7))
@settings(max_examples=200, deadline=None)
def test_iroot_is_floor(x, p):
    r = iroot(x, p)
    assert r**p <= x < (r + 1) ** p


@given(st.integers(1, 10**12), st.integers(1, 5), st.integers(1, 5))
@settings(max_examples=200, deadline=None)
def test_floor_power_bracket(x, a, b):
    alpha = Fraction(min(a, b), max(a, b))
    y = floor_power(x, alpha)
    # y <= x^(1/alpha) < y + 1, compared through integer powers
    assert y**alpha.numerator <= x**alpha.denominator < (y + 1) ** alpha.numerator


@pytest.mark.parametrize("name,first", [
    ("flip00", (10, 10)), ("flip01", (40, 10)), ("flip11", (40, 10)), ("flip(1,0)", (10, 10)),
    ("generic", (30, 10)), ("appendix", (10, 10)), ("minimal-admissible", (33, 10)),
])
def test_rule_first_pairs(name, first):
    seq = generate_rule(parse_rule(name), 3)
    assert seq.pairs[0] == first and seq.K == 3


def test_flip_rules_follow_their_recursions():
    seq = generate_rule("flip11", 4)
    for k in range(1, 4):
        assert seq.m(k) == 4 * seq.n(k) and seq.n(k + 1) == 4 * seq.m(k)
    seq = generate_rule("flip00", 3)
    for k in range(1, 3):
        assert seq.m(k) == seq.n(k) ** k and seq.n(k + 1) == seq.m(k) ** k


def test_generic_rule_recursion():
    seq = generate_rule("generic", 3)
    b = all_return_times(seq)
    for k in range(1, 3):
        assert seq.m(k) == 3 * seq.n(k) and seq.n(k + 1) == b[k][1] ** k


@pytest.mark.parametrize("text", ["nope", "alpha2(0)", "alpha2(3/2)", "alpha3"])
def test_bad_rules(text):
    with pytest.raises(DomainError):
        parse_rule(text)


def test_alpha2_rule_is_admissible_and_small():
    seq = generate_rule(parse_rule("alpha2(1/2)"), 6)
    assert is_admissible(seq)
    assert max(n.bit_length() for _, n in seq.pairs) * 0.30103 < 10**5
    s = [endpoints(alpha2_statistic(seq, k)) for k in range(1, 5)]
    assert all(0 < lo <= hi < 1 for lo, hi in s)


def test_dim_bounds_decrease_under_power_rule():
    seq = iterate_rule(lambda k, n, b: n**k, lambda k, m, b: 2 * m - 1, 10, 6, "power")
    out = dim_bounds(seq, 3, 4, digits=30)
    ups = [endpoints(r.upper)[1] for r in out.rows]
    assert all(a > b for a, b in zip(ups, ups[1:]))
    assert ups[-1] < Fraction(1, 2)
    assert out.running_min_upper[-1][1] == ups[-1]


def test_dim_bounds_flip11_lower_increases():
    seq = generate_rule("flip11", 8)
    for d in ("2", "3"):
        out = dim_bounds(seq, d, 6, digits=30)
        lows = [endpoints(r.lower)[0] for r in out.rows]
        assert lows[-1] > Fraction(3, 4) > lows[0]


def test_dim_bounds_are_positive_intervals():
    seq = generate_rule("minimal-admissible", 6)
    for d in ("2", "3"):
        for row in dim_bounds(seq, d, 4).rows:
            assert not row.flagged
            for val in (row.lower, row.upper):
                lo, hi = endpoints(val)
                assert 0 < lo <= hi


def test_dim_bounds_validation():
    seq = generate_rule("minimal-admissible", 4)
    with pytest.raises(DomainError):
        dim_bounds(seq, 3, 3)
    with pytest.raises(DomainError):
        dim_bounds(seq, 4, 1)


def test_dim_csv_header():
    seq = generate_rule("minimal-admissible", 5)
    text = dim_bounds(seq, 2, 2).to_csv(10)
    assert text.splitlines()[0] == "k,direction,upper,upper_err,lower,lower_err,running_min"
    assert len(text.splitlines()) == 3


def test_generic_covering_fails_at_small_k():
    seq = generate_rule("generic", 4)
    for k in (1, 2):
        rep = generic_analysis(seq, k, Fraction(1, 100))
        assert rep.covering_verdict == "FAIL"
        assert endpoints(rep.covering_value)[0] > Fraction(1, k)


@pytest.mark.parametrize("piece", [3, None])
def test_phase_count_matches_simulation(piece):
    C = KeaneConstruction(generate_rule("generic", 3))
    po = phase_oracle(C, 1, Fraction(1, 5), piece)
    assert po.agrees
    assert len(po.t_sim) >= 10


@pytest.mark.parametrize("rule", ["generic", "minimal-admissible"])
def test_symbolic_t_k_matches_orbit(rule):
    C = KeaneConstruction(generate_rule(rule, 3))
    low, up = TowerDecomposition(C, 1), TowerDecomposition(C, 2)
    checked = 0
    for idx in range(0, len(low), 3):
        x = low.floor(idx)[0]
        try:
            sim = t_k(C, x, 1, low, budget=2 * 10**5)
        except StepBudgetExceeded:
            continue
        assert t_k_symbolic(C, x, 1, up) == sim
        checked += 1
    assert checked >= 10
