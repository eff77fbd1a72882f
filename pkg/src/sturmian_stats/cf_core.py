"""Exact continued fractions, continuants and fundamental intervals.

Slopes are never handled as floats.  Three exact representations are
supported:

* ``RationalSlope``  -- an exact rational p/q,
* ``DyadicSlope``    -- a B-bit fixed-point value A / 2**B,
* ``PatternSlope``   -- an explicit or eventually periodic list of quotients.

All of them expose ``quotients()`` (the integer Euclid algorithm on the exact
value) and ``bracket()`` (an exact interval known to contain the real slope),
which the word generator uses to certify floor/ceiling decisions.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence, Union

from .errors import DomainError, InsufficientExpansion

MIN_BITS = 128


def precision_bits(n: int) -> int:
    """Working precision for locating ``n``: max(128, 4*ceil(log2 n) + 64)."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    return max(MIN_BITS, 4 * math.ceil(math.log2(n)) + 64) if n > 1 else MIN_BITS


# ---------------------------------------------------------------------------
# slope representations
# ---------------------------------------------------------------------------


def _euclid(num: int, den: int) -> Iterator[int]:
    while num:
        m, r = divmod(den, num)
        yield m
        den, num = num, r


@dataclass(frozen=True)
class RationalSlope:
    value: Fraction

    def __post_init__(self):
        if not 0 < self.value < 1:
            raise DomainError(f"slope must lie in (0, 1), got {self.value}")

    @property
    def finite(self) -> bool:
        return True

    def quotients(self) -> Iterator[int]:
        return _euclid(self.value.numerator, self.value.denominator)

    def bracket(self, min_bits: int = 0):
        return self.value, self.value, True

    def describe(self) -> str:
        return f"rat:{self.value.numerator}/{self.value.denominator}"


@dataclass(frozen=True)
class DyadicSlope:
    """The fixed-point value ``numerator / 2**bits``.

    For continued-fraction purposes the slope *is* this dyadic rational.  For
    word generation it stands for an unknown real in the half-open cell
    ``[numerator, numerator + 1) / 2**bits``.
    """

    numerator: int
    bits: int

    def __post_init__(self):
        if self.bits < 64:
            raise DomainError(f"dyadic slopes need at least 64 bits, got {self.bits}")
        if not 0 < self.numerator < (1 << self.bits):
            raise DomainError("dyadic slope must lie in (0, 1)")

    @property
    def finite(self) -> bool:
        return True

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.bits)

    def quotients(self) -> Iterator[int]:
        return _euclid(self.numerator, 1 << self.bits)

    def bracket(self, min_bits: int = 0):
        scale = 1 << self.bits
        return Fraction(self.numerator, scale), Fraction(self.numerator + 1, scale), False

    def extended(self, extra: int, extra_bits: int) -> "DyadicSlope":
        """Append ``extra_bits`` low-order bits; used by the precision audit."""
        return DyadicSlope((self.numerator << extra_bits) | extra, self.bits + extra_bits)

    def describe(self) -> str:
        return f"dyadic:{self.numerator:#x}/2^{self.bits}"


@dataclass(frozen=True)
class PatternSlope:
    """Quotients ``prefix`` followed by ``period`` repeated forever (if given)."""

    prefix: tuple
    period: tuple = ()

    def __post_init__(self):
        if not self.prefix and not self.period:
            raise DomainError("empty quotient pattern")
        if any(int(m) < 1 for m in self.prefix + self.period):
            raise DomainError("partial quotients must be positive integers")

    @property
    def finite(self) -> bool:
        return not self.period

    @property
    def value(self) -> Fraction:
        if self.period:
            raise DomainError("periodic pattern has no exact rational value")
        p_prev, p, q_prev, q = 1, 0, 0, 1
        for m in self.prefix:
            p_prev, p = p, m * p + p_prev
            q_prev, q = q, m * q + q_prev
        return Fraction(p, q)

    def quotients(self) -> Iterator[int]:
        if self.period:
            return itertools.chain(self.prefix, itertools.cycle(self.period))
        return iter(self.prefix)

    def bracket(self, min_bits: int = 0):
        if not self.period:
            v = self.value
            return v, v, True
        # the real value lies strictly between consecutive convergents
        p_prev, p, q_prev, q = 1, 0, 0, 1
        target = 1 << max(min_bits, MIN_BITS)
        for m in self.quotients():
            p_prev, p = p, m * p + p_prev
            q_prev, q = q, m * q + q_prev
            if q_prev * q > target and q_prev > 0:
                break
        a, b = Fraction(p_prev, q_prev), Fraction(p, q)
        return min(a, b), max(a, b), False

    def describe(self) -> str:
        body = ",".join(map(str, self.prefix))
        if self.period:
            per = "(" + ",".join(map(str, self.period)) + ")*"
            body = f"{body},{per}" if body else per
        return f"cf:{body}"


Slope = Union[RationalSlope, DyadicSlope, PatternSlope]


def dyadic_from_fraction(x: Fraction, bits: int) -> DyadicSlope:
    return DyadicSlope(math.floor(x * (1 << bits)), bits)


_CF_PERIODIC = re.compile(r"^cf:(?P<pre>[0-9,\s]*?),?\s*\((?P<per>[0-9,\s]+)\)\*$")


def parse_alpha(text: str, bits: int = MIN_BITS) -> Slope:
    """Parse ``rat:p/q``, ``dec:0.xxx``, ``cf:m1,m2,...`` or ``cf:[pre,](m1,...)*``."""
    text = text.strip()
    kind, _, body = text.partition(":")
    try:
        if kind == "rat":
            num, _, den = body.partition("/")
            return RationalSlope(Fraction(int(num), int(den or 1)))
        if kind == "dec":
            return dyadic_from_fraction(Fraction(body), bits)
        if kind == "cf":
            m = _CF_PERIODIC.match(text)
            if m:
                pre = tuple(int(t) for t in m["pre"].split(",") if t.strip())
                per = tuple(int(t) for t in m["per"].split(",") if t.strip())
                return PatternSlope(pre, per)
            return PatternSlope(tuple(int(t) for t in body.split(",") if t.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse slope {text!r}: {exc}") from exc
    raise DomainError(f"unknown slope syntax {text!r}")


def as_slope(alpha, bits: int = MIN_BITS) -> Slope:
    if isinstance(alpha, (RationalSlope, DyadicSlope, PatternSlope)):
        return alpha
    if isinstance(alpha, str):
        return parse_alpha(alpha, bits)
    if isinstance(alpha, (Fraction, int)):
        return RationalSlope(Fraction(alpha))
    raise DomainError(f"unsupported slope value {alpha!r} (floats are not accepted)")


# ---------------------------------------------------------------------------
# expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFraction:
    """Quotients m_1..m_K with convergents p_k/q_k for k = 0..K.

    ``p[0] = 0`` and ``q[0] = 1``; index k of ``p``/``q`` matches m_k.
    """

    quotients: tuple
    p: tuple
    q: tuple
    exhausted: bool
    source: Optional[Slope] = field(default=None, compare=False)

    @property
    def depth(self) -> int:
        return len(self.quotients)


def cf_expand(
    alpha,
    stop: Optional[Callable[[int, int], bool]] = None,
    max_depth: Optional[int] = None,
) -> ContinuedFraction:
    """Expand ``alpha`` until ``stop(k, q_k)`` holds or the expansion ends."""
    slope = as_slope(alpha)
    if stop is None and max_depth is None and not slope.finite:
        raise DomainError("infinite pattern needs a stop predicate or max_depth")
    ms, ps, qs = [], [0], [1]
    p_prev, q_prev = 1, 0
    exhausted = True
    for k, m in enumerate(slope.quotients(), start=1):
        p, q = ps[-1], qs[-1]
        ps.append(m * p + p_prev)
        qs.append(m * q + q_prev)
        p_prev, q_prev = p, q
        ms.append(m)
        if (stop is not None and stop(k, qs[-1])) or (max_depth is not None and k >= max_depth):
            exhausted = False
            break
    return ContinuedFraction(tuple(ms), tuple(ps), tuple(qs), exhausted, slope)


@dataclass(frozen=True)
class ContinuantWindow:
    """Consecutive continuants with ``q_prev <= n < q_cur``."""

    k: int
    q_prev: int
    q_cur: int
    n: int


def locate_n(cf: ContinuedFraction, n: int) -> ContinuantWindow:
    """Return the window [q_{k-1}, q_k) containing ``n`` (smallest k with q_k > n)."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    qs = cf.q
    if qs[-1] <= n:
        if cf.exhausted or cf.source is None:
            raise InsufficientExpansion(f"largest continuant {qs[-1]} does not exceed n={n}")
        cf = cf_expand(cf.source, stop=lambda k, q: q > n)
        qs = cf.q
        if qs[-1] <= n:
            raise InsufficientExpansion(f"largest continuant {qs[-1]} does not exceed n={n}")
    # q is nondecreasing, so bisect for the first q_k > n
    lo, hi = 1, len(qs) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if qs[mid] > n:
            hi = mid
        else:
            lo = mid + 1
    return ContinuantWindow(lo, qs[lo - 1], qs[lo], n)


def window_of(num: int, den: int, n: int):
    """Fast path: (q_prev, q_cur) for the rational num/den, or None if exhausted.

    Same result as ``locate_n(cf_expand(Fraction(num, den)), n)`` without
    building intermediate objects.
    """
    q_prev, q = 0, 1
    while q <= n:
        if not num:
            return None
        m, r = divmod(den, num)
        q_prev, q = q, m * q + q_prev
        den, num = num, r
    return q_prev, q


def quotients_until(num: int, den: int, n: int):
    """Quotients of num/den up to (and including) the first one with q_k > n."""
    out = []
    q_prev, q = 0, 1
    while q <= n:
        if not num:
            return out, False
        m, r = divmod(den, num)
        out.append(m)
        q_prev, q = q, m * q + q_prev
        den, num = num, r
    return out, True


# ---------------------------------------------------------------------------
# fundamental intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FundamentalInterval:
    depth: int
    prefix: tuple
    left: Fraction
    right: Fraction

    @property
    def length(self) -> Fraction:
        return self.right - self.left


def fundamental_interval(prefix: Sequence[int]) -> FundamentalInterval:
    """Set of slopes whose expansion starts with ``prefix``.

    Its ends are p_k/q_k and (p_k + p_{k-1})/(q_k + q_{k-1}), so the length is
    1 / (q_k (q_k + q_{k-1})).
    """
    prefix = tuple(int(m) for m in prefix)
    if not prefix or any(m < 1 for m in prefix):
        raise DomainError("prefix must be a nonempty list of positive integers")
    cf = cf_expand(PatternSlope(prefix))
    pk, pk1 = cf.p[-1], cf.p[-2]
    qk, qk1 = cf.q[-1], cf.q[-2]
    a, b = Fraction(pk, qk), Fraction(pk + pk1, qk + qk1)
    return FundamentalInterval(len(prefix), prefix, min(a, b), max(a, b))


def omega_int(x: int, y: int) -> Fraction:
    return Fraction(1, y * (x + y))
