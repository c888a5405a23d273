"""Outward-rounded decimal evaluation of logarithms and powers.

Logarithms are the only non-rational step; they are evaluated with
``mpmath.iv`` at a configurable number of decimal digits so every printed
value carries a certified error bar.
"""

from __future__ import annotations

from contextlib import contextmanager
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction

from mpmath import iv
from mpmath.libmp import to_rational

DEFAULT_DIGITS = 50


@contextmanager
def precision(digits: int = DEFAULT_DIGITS):
    saved = iv.prec
    iv.dps = digits + 10
    try:
        yield
    finally:
        iv.prec = saved


def interval(lo, hi=None):
    """Outward interval around rationals ``[lo, hi]``."""
    lo = Fraction(lo)
    hi = lo if hi is None else Fraction(hi)
    a = iv.mpf(lo.numerator) / lo.denominator
    b = a if hi == lo else iv.mpf(hi.numerator) / hi.denominator
    return iv.mpf([a.a, b.b])


def log(x):
    return iv.log(x)


def power(base, exponent):
    """``base ** exponent`` for a positive interval base and rational exponent."""
    exponent = Fraction(exponent)
    if exponent == 0:
        return iv.mpf(1)
    if exponent.denominator == 1:
        return base ** int(exponent)
    return iv.exp(interval(exponent) * iv.log(base))


def to_fraction(x) -> Fraction:
    """Exact value of an mpf, or of a degenerate interval endpoint."""
    raw = x._mpi_[0] if hasattr(x, "_mpi_") else x._mpf_
    return _rational(raw)


def endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an interval."""
    lo, hi = x._mpi_
    return _rational(lo), _rational(hi)


def _rational(raw) -> Fraction:
    p, q = to_rational(raw)
    return Fraction(int(p), int(q))


def decimal_str(q, digits: int = 20, rounding: str = "down") -> str:
    """Render a rational with ``digits`` significant digits, rounded outward."""
    q = Fraction(q)
    ctx = Context(prec=digits, rounding=ROUND_FLOOR if rounding == "down" else ROUND_CEILING)
    d = ctx.divide(Decimal(q.numerator), Decimal(q.denominator))
    return format(d, "g") if abs(d.adjusted()) > 30 else format(d, "f")


def bounds_str(x, digits: int = 20) -> tuple[str, str]:
    """Outward decimal strings for the endpoints of an interval."""
    a, b = endpoints(x)
    return decimal_str(a, digits, "down"), decimal_str(b, digits, "up")


def mid_err(x, digits: int = 20) -> tuple[str, str]:
    """Midpoint and a rounded-up half width of an interval."""
    a, b = endpoints(x)
    mid = (a + b) / 2
    err = (b - a) / 2
    approx = Fraction(decimal_str(mid, digits, "down"))
    err += abs(mid - approx)
    return decimal_str(approx, digits, "down"), decimal_str(err, 3, "up")
