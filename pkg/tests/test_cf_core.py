from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import continuants, euclid
from sturmian_stats.cf_core import (
    DyadicSlope,
    PatternSlope,
    RationalSlope,
    cf_expand,
    dyadic_from_fraction,
    fundamental_interval,
    locate_n,
    parse_alpha,
    precision_bits,
    window_of,
)
from sturmian_stats.errors import DomainError, InsufficientExpansion

GOLDEN = PatternSlope((), (1,))


def test_five_sevenths():
    cf = cf_expand(Fraction(5, 7))
    assert cf.quotients == (1, 2, 2)
    assert cf.q == (1, 1, 3, 7)
    assert cf.exhausted


def test_golden_128_bits_gives_fibonacci():
    # (sqrt5 - 1)/2 truncated to 128 bits
    from math import isqrt

    num = (isqrt(5 << 256) - (1 << 128)) >> 1
    cf = cf_expand(DyadicSlope(num, 128), stop=lambda k, q: q > 10**12)
    assert set(cf.quotients) == {1}
    assert cf.q[:8] == (1, 1, 2, 3, 5, 8, 13, 21)
    assert not cf.exhausted


def test_half_is_exhausted():
    cf = cf_expand(Fraction(1, 2), stop=lambda k, q: q > 100)
    assert cf.quotients == (2,) and cf.exhausted


def test_alpha_out_of_range():
    for bad in (Fraction(0), Fraction(1), Fraction(3, 2)):
        with pytest.raises(DomainError):
            cf_expand(bad)
    with pytest.raises(DomainError):
        cf_expand(0.5)
    with pytest.raises(DomainError):
        DyadicSlope(1, 32)


def test_infinite_pattern_needs_stop():
    with pytest.raises(DomainError):
        cf_expand(GOLDEN)


@pytest.mark.parametrize("n, window", [(4, (3, 5)), (5, (5, 8)), (1, (1, 2)), (7, (5, 8))])
def test_locate_fibonacci(n, window):
    w = locate_n(cf_expand(GOLDEN, max_depth=3), n)  # re-expands on demand
    assert (w.q_prev, w.q_cur) == window


def test_locate_insufficient():
    with pytest.raises(InsufficientExpansion):
        locate_n(cf_expand(Fraction(5, 7)), 10)


def test_first_window_convention():
    # m1 = 3: q0 = 1, q1 = 3, so n = 1, 2 sit in [q0, q1)
    cf = cf_expand(Fraction(3, 10))
    assert (locate_n(cf, 1).q_prev, locate_n(cf, 1).q_cur) == (1, 3)
    assert locate_n(cf, 2).k == 1


def test_fundamental_interval_examples():
    fi = fundamental_interval([1])
    assert {fi.left, fi.right} == {Fraction(1), Fraction(1, 2)}
    assert fi.length == Fraction(1, 2)
    assert fundamental_interval([2]).length == Fraction(1, 6)
    M = 40
    total = sum(fundamental_interval([m]).length for m in range(1, M + 1))
    assert total == 1 - Fraction(1, M + 1)


def test_parse_alpha_grammar():
    assert parse_alpha("rat:5/7") == RationalSlope(Fraction(5, 7))
    assert parse_alpha("cf:1,2,2").value == Fraction(5, 7)
    assert parse_alpha("cf:(1)*") == GOLDEN
    assert parse_alpha("cf:2,(1)*") == PatternSlope((2,), (1,))
    d = parse_alpha("dec:0.25", 128)
    assert d.value == Fraction(1, 4)
    with pytest.raises(DomainError):
        parse_alpha("float:0.3")


def test_precision_bits():
    assert precision_bits(1000) == 128
    assert precision_bits(2**20) == 4 * 20 + 64


def test_pattern_bracket_contains_value():
    lo, hi, exact = GOLDEN.bracket(200)
    g = (Fraction(5**0.5) - 1) / 2  # rough, only for containment of a wide bracket
    assert not exact and lo < hi and hi - lo < Fraction(1, 2**200)
    assert abs(lo - g) < Fraction(1, 10**10)


fractions_01 = st.builds(lambda q, p: Fraction(p % (q - 1) + 1, q), st.integers(2, 10**30), st.integers(0, 10**30))


@given(fractions_01)
def test_determinant_and_recurrences(x):
    cf = cf_expand(x)
    assert list(cf.quotients) == euclid(x.numerator, x.denominator)
    assert list(cf.q) == continuants(cf.quotients)
    for k in range(1, cf.depth + 1):
        assert abs(cf.p[k] * cf.q[k - 1] - cf.p[k - 1] * cf.q[k]) == 1
        assert cf.q[k] >= cf.q[k - 1]
        if k >= 2:
            assert cf.q[k] > cf.q[k - 1]
    assert Fraction(cf.p[-1], cf.q[-1]) == x


@given(fractions_01, st.integers(1, 10**6))
def test_window_invariants(x, n):
    cf = cf_expand(x)
    if cf.q[-1] <= n:
        assert window_of(x.numerator, x.denominator, n) is None
        return
    w = locate_n(cf, n)
    assert w.q_prev <= n < w.q_cur
    assert cf.q[w.k - 1] == w.q_prev and cf.q[w.k] == w.q_cur
    assert window_of(x.numerator, x.denominator, n) == (w.q_prev, w.q_cur)


@given(st.integers(1, 6), st.integers(1, 12))
def test_pseudo_partition_monotone(depth, M):
    # sum over prefixes of length `depth` with quotients <= M, increasing in M, below 1
    import itertools

    def total(MM):
        return sum(fundamental_interval(p).length for p in itertools.product(range(1, MM + 1), repeat=min(depth, 3)))

    a, b = total(M), total(M + 1)
    assert a < b < 1


@given(st.integers(1 << 120, (1 << 128) - 1), st.integers(2, 5000))
def test_precision_audit_property(num, n):
    # doubling the precision changes no quotient up to the located depth, as
    # long as the window sits far below the working precision
    d = DyadicSlope(num, 128)
    w1 = window_of(num, 1 << 128, n)
    assume(w1 is not None and w1[1] < 2**40)
    assume(window_of(num, 1 << 128, w1[1] << 24) is not None)
    assert window_of(d.extended(12345, 128).numerator, 1 << 256, n) == w1


def test_dyadic_from_fraction():
    d = dyadic_from_fraction(Fraction(1, 3), 64)
    assert d.value <= Fraction(1, 3) < d.value + Fraction(1, 2**64)
