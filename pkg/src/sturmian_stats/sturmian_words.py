"""Mechanical (Sturmian) words, factor complexity and brute-force recurrence.

Words are u_m = floor(alpha (m+1) + beta) - floor(alpha m + beta) (``floor``
variant) or the same with ceilings.  Floors are taken exactly on certified
brackets of alpha and beta; when a bracket straddles an integer the symbol is
undecidable and ``PrecisionError`` is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .cf_core import ContinuedFraction, PatternSlope, as_slope, cf_expand, locate_n
from .errors import ComputationRefused, DomainError, PrecisionError, PrefixTooShort

PREFIX_MARGIN = 64


@dataclass(frozen=True)
class WordPrefix:
    bits: np.ndarray
    alpha: Optional[object] = None
    beta: Optional[object] = None
    variant: Optional[str] = None

    @property
    def length(self) -> int:
        return int(self.bits.size)

    def __str__(self) -> str:
        return "".join("01"[b] for b in self.bits.tolist())

    @classmethod
    def from_bits(cls, text) -> "WordPrefix":
        """A word given literally (e.g. a periodic test word); carries no slope."""
        if isinstance(text, str):
            arr = np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(text, dtype=np.uint8)
        if arr.size == 0 or np.any(arr > 1):
            raise DomainError("word must be a nonempty 0/1 sequence")
        return cls(arr.astype(np.uint8))


@dataclass(frozen=True)
class FactorSet:
    n: int
    factors: frozenset


def _bracket_beta(beta, bits: int):
    if beta is None or isinstance(beta, (int, Fraction)):
        b = Fraction(beta or 0)
        if not 0 <= b < 1:
            raise DomainError(f"beta must lie in [0, 1), got {b}")
        return b, b, True
    return as_slope(beta).bracket(bits)


def _floors(lo: Fraction, hi: Fraction, blo: Fraction, bhi: Fraction, m: np.ndarray, exact: bool):
    """floor(alpha m + beta) for m in ``m`` given alpha in [lo, hi], beta in [blo, bhi]."""
    d_lo = lo.denominator * blo.denominator
    f_lo = (lo.numerator * blo.denominator * m + blo.numerator * lo.denominator) // d_lo
    if exact:
        return f_lo, f_lo, None
    d_hi = hi.denominator * bhi.denominator
    n_hi = hi.numerator * bhi.denominator * m + bhi.numerator * hi.denominator
    c_hi = -((-n_hi) // d_hi)
    return f_lo, c_hi, n_hi % d_hi == 0


def generate(alpha, beta=0, L: int = 1, variant: str = "floor") -> WordPrefix:
    """First ``L`` symbols of the mechanical word of slope alpha and intercept beta."""
    if L < 1:
        raise DomainError("L must be >= 1")
    if variant not in ("floor", "ceil"):
        raise DomainError("variant must be 'floor' or 'ceil'")
    slope = as_slope(alpha)
    bits = max(128, math.ceil(math.log2(L + 1)) + 64)
    lo, hi, exact_a = slope.bracket(bits)
    blo, bhi, exact_b = _bracket_beta(beta, bits)
    exact = exact_a and exact_b
    m = np.arange(L + 1, dtype=object)
    f_lo, c_hi, _ = _floors(lo, hi, blo, bhi, m, exact)
    if exact:
        fl = f_lo
        if variant == "floor":
            x = fl
        else:
            d = lo.denominator * blo.denominator
            num = lo.numerator * blo.denominator * m + blo.numerator * lo.denominator
            x = -((-num) // d)
    else:
        # the true value lies in [lo, hi) (dyadic) or (lo, hi) (pattern); decide floor
        # only if the bracket does not contain an integer in its interior
        undecided = c_hi - f_lo != 1
        if exact_b:
            undecided[0] = False  # alpha*0 + beta is beta itself
        if np.any(undecided):
            bad = int(np.nonzero(undecided)[0][0])
            raise PrecisionError(f"cannot decide floor(alpha*{bad} + beta) at {bits} bits")
        x = f_lo
        if variant == "ceil":
            # alpha m + beta is integral only at m = 0 with an exact integral beta
            x = f_lo + 1
            if exact_b and blo.denominator == 1:
                x[0] = blo.numerator
    u = np.diff(np.asarray(x, dtype=object)).astype(np.int64)
    if np.any((u < 0) | (u > 1)):
        raise DomainError("slope outside (0, 1) produced a non-binary symbol")
    return WordPrefix(u.astype(np.uint8), slope, beta, variant)


# ---------------------------------------------------------------------------
# factors
# ---------------------------------------------------------------------------


def _factor_codes(bits: np.ndarray, n: int) -> np.ndarray:
    """One hashable key per length-n window (int64 for n <= 62, else void rows)."""
    L = bits.size
    if n > L:
        return np.zeros(0, dtype=np.int64)
    if n <= 62:
        b = bits.astype(np.int64)
        codes = b[: L - n + 1].copy()
        for j in range(1, n):
            codes = codes * 2 + b[j : L - n + 1 + j]
        return codes
    win = np.lib.stride_tricks.sliding_window_view(bits.astype(np.uint8), n)
    packed = np.packbits(win, axis=1)
    return np.ascontiguousarray(packed).view(np.dtype((np.void, packed.shape[1]))).ravel()


def _grouped_positions(codes: np.ndarray):
    order = np.argsort(codes, kind="stable")
    sc = codes[order]
    same = sc[1:] == sc[:-1]
    starts = np.concatenate(([True], ~same))
    ends = np.concatenate((~same, [True]))
    return order, same, starts, ends


def factor_set(w: WordPrefix, n: int) -> FactorSet:
    if not 1 <= n <= w.length:
        raise DomainError("factor length must lie in [1, L]")
    win = np.lib.stride_tricks.sliding_window_view(w.bits, n)
    uniq = np.unique(win, axis=0)
    return FactorSet(n, frozenset("".join("01"[b] for b in row) for row in uniq.tolist()))


def _required_length(w: WordPrefix, n: int) -> Optional[int]:
    if w.alpha is None:
        return None
    cf = cf_expand(w.alpha, stop=lambda k, q: q > n)
    return recurrence_formula(cf, n) + n


def complexity(w: WordPrefix, n: int) -> int:
    """Number of distinct length-n factors of the prefix.

    For words built from a slope the prefix must have length >= R(alpha, n) + n,
    which guarantees every factor of the infinite word occurs in it.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    need = _required_length(w, n)
    if need is not None and w.length < need:
        raise PrefixTooShort(f"prefix of length {w.length} < R + n = {need}")
    if n > w.length:
        raise PrefixTooShort("factor length exceeds prefix")
    return int(np.unique(_factor_codes(w.bits, n)).size)


def recurrence_formula(cf: ContinuedFraction, n: int) -> int:
    """R(alpha, n) = n - 1 + q_k + q_{k-1} for n in [q_{k-1}, q_k)."""
    win = locate_n(cf, n)
    return n - 1 + win.q_cur + win.q_prev


def default_q_range(cf: ContinuedFraction, n: int) -> int:
    """Largest start q that a too-short window can have.

    A window of length l = R(n) - 1 that misses an n-factor is itself an
    l-factor, and every l-factor already occurs in the first R(l) symbols, so
    scanning q <= R(l) - l finds it.  That reaches one continuant further
    than the window of n; 2 q_k + n does not (see tests).
    """
    ell = recurrence_formula(cf, n) - 1
    return recurrence_formula(cf, ell) - ell


def prefix_length(alpha, n_max: int, margin: int = PREFIX_MARGIN) -> int:
    """Length that certifies factor saturation and the waiting-time scan up to n_max."""
    cf = cf_expand(alpha, stop=lambda k, q: q > n_max)
    return default_q_range(cf, n_max) + recurrence_formula(cf, n_max) + margin


def brute_recurrence(w: WordPrefix, n: int, q_range: Optional[int] = None) -> int:
    """max over q in [0, q_range] of the waiting time w(q, n), computed from the prefix.

    w(q, n) is the least l such that u_q .. u_{q+l-1} contains every length-n
    factor.  For each factor only its first occurrence and the gaps between
    consecutive occurrences matter, so the scan is a single sort.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if q_range is None:
        if w.alpha is None:
            raise DomainError("q_range is required for words without a slope")
        q_range = default_q_range(cf_expand(w.alpha, stop=lambda k, q: q > n), n)
    codes = _factor_codes(w.bits, n)
    if codes.size == 0:
        raise PrefixTooShort("prefix shorter than n")
    order, same, starts, ends = _grouped_positions(codes)
    last = order[ends]
    if np.any(last < q_range):
        raise PrefixTooShort(f"some factor does not recur beyond q = {q_range} inside the prefix")
    worst = int(order[starts].max())
    gaps = order[1:][same] - order[:-1][same] - 1
    q_at = order[:-1][same] + 1
    sel = q_at <= q_range
    if np.any(sel):
        worst = max(worst, int(gaps[sel].max()))
    return worst + n


def covers_all(w: WordPrefix, n: int, length: int) -> bool:
    """True when every window of ``length`` inside the prefix contains all n-factors."""
    L = w.length
    if length > L or length < n:
        return False
    codes = _factor_codes(w.bits, n)
    order, same, starts, ends = _grouped_positions(codes)
    span = length - n  # occurrences must start within [q, q + span]
    if int(order[starts].max()) > span:
        return False
    last_q = L - length
    if np.any(order[ends] + 1 <= last_q):
        return False
    gaps = order[1:][same] - order[:-1][same] - 1
    q_at = order[:-1][same] + 1
    sel = q_at <= last_q
    return not np.any(gaps[sel] > span)


MAX_PREFIX = 50_000_000


def sized_word(alpha, n_max: int, beta=0, variant: str = "floor", max_length: int = MAX_PREFIX) -> WordPrefix:
    """Prefix long enough for every check up to n_max (see ``prefix_length``)."""
    L = prefix_length(alpha, n_max)
    if L > max_length:
        raise ComputationRefused(f"slope needs a prefix of {L} symbols (limit {max_length})")
    return generate(alpha, beta, L, variant)


GOLDEN = PatternSlope((), (1,))
GOLDEN_SQUARED = PatternSlope((2,), (1,))
