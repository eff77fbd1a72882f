"""Monte Carlo estimates and convergence studies.

Random slopes come from a counter-based generator (Philox 4x64).  Sample i of
a stream with key ``seed`` is read from counter block i (several blocks per
sample when more than 256 bits are needed), so any range of samples can be
produced independently and batches concatenate exactly.  Draws that must be
replaced use the disjoint counter family [i, r, 0, 0] with r >= 1; the
precision audit reads its extra bits from [i, 0, 1, 0].
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .cf_core import DyadicSlope, as_slope, cf_expand, precision_bits, window_of
from .errors import ComputationRefused, DomainError, EmptyCondition
from .lattice_sums import Constraint, cdf_exact
from .qfunc import S, QFunctionSpec, builtin

AUDIT_EVERY = 100
CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# slope source
# ---------------------------------------------------------------------------


@dataclass
class AlphaSource:
    """Seeded uniform B-bit dyadic slopes; ``counter`` is the next sample index."""

    seed: int
    bits: int = 128
    counter: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 1 << 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.bits < 64:
            raise DomainError("bits must be >= 64")

    @property
    def words(self) -> int:
        return -(-self.bits // 64)

    @property
    def blocks(self) -> int:
        return -(-self.words // 4)

    def numerators(self, start: int, count: int) -> List[int]:
        """Raw B-bit numerators of samples start..start+count-1 (0 allowed here)."""
        bg = np.random.Philox(key=self.seed)
        bg.advance(start * self.blocks)
        raw = bg.random_raw(count * self.blocks * 4).reshape(count, self.blocks * 4)[:, : self.words]
        acc = raw[:, 0].astype(object)
        for j in range(1, self.words):
            acc = (acc << 64) | raw[:, j].astype(object)
        shift = 64 * self.words - self.bits
        if shift:
            acc = acc >> shift
        return acc.tolist()

    def redraw(self, index: int, attempt: int) -> int:
        """Replacement numerator for sample ``index`` (attempt >= 1)."""
        return _counter_bits(self.seed, [index, attempt, 0, 0], self.bits)

    def audit_bits(self, index: int, extra_bits: int) -> int:
        return _counter_bits(self.seed, [index, 0, 1, 0], extra_bits)

    def substream(self, start: int) -> "AlphaSource":
        return AlphaSource(self.seed, self.bits, start)


def _counter_bits(seed: int, counter, bits: int) -> int:
    words = -(-bits // 64)
    raw = np.random.Philox(key=seed, counter=counter).random_raw(words)
    v = 0
    for w in raw.tolist():
        v = (v << 64) | w
    return v >> (64 * words - bits)


def sample_alpha(src: AlphaSource) -> DyadicSlope:
    """Next slope of the stream (numerator 0 is replaced deterministically)."""
    i = src.counter
    num = src.numerators(i, 1)[0]
    attempt = 0
    while num == 0:
        attempt += 1
        num = src.redraw(i, attempt)
    src.counter += 1
    return DyadicSlope(num, src.bits)


# ---------------------------------------------------------------------------
# window sampling
# ---------------------------------------------------------------------------

INT64_CAP = (1 << 62) - 1


@dataclass
class WindowSample:
    """Windows (q_{k-1}, q_k) at n for M sampled slopes.

    ``q_cur`` is clipped at ``INT64_CAP``; exact comparisons account for it.
    """

    n: int
    q_prev: np.ndarray
    q_cur: np.ndarray
    resampled: int
    audited: int
    audit_mismatches: int
    seed: int
    bits: int
    start: int

    @property
    def M(self) -> int:
        return int(self.q_prev.size)


def _windows_chunk(seed: int, bits: int, start: int, count: int, n: int):
    src = AlphaSource(seed, bits)
    den = 1 << bits
    nums = src.numerators(start, count)
    qp = np.empty(count, dtype=np.int64)
    qc = np.empty(count, dtype=np.int64)
    resampled = audited = mism = 0
    for j, num in enumerate(nums):
        i = start + j
        w = window_of(num, den, n) if num else None
        attempt = 0
        while w is None:
            attempt += 1
            resampled += 1
            num = src.redraw(i, attempt)
            w = window_of(num, den, n) if num else None
        if i % AUDIT_EVERY == 0:
            audited += 1
            ext = (num << bits) | src.audit_bits(i, bits)
            if window_of(ext, den << bits, n) != w:
                mism += 1
        qp[j] = w[0]
        qc[j] = min(w[1], INT64_CAP)
    return qp, qc, resampled, audited, mism


def mc_windows(n: int, M: int, src: AlphaSource, threads: int = 1) -> WindowSample:
    """Sample M slopes from the stream position and locate n in each expansion."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if M < 0:
        raise DomainError("M must be >= 0")
    bits = max(src.bits, precision_bits(n))
    start = src.counter
    jobs = [(src.seed, bits, s, min(CHUNK, start + M - s), n) for s in range(start, start + M, CHUNK)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_windows_chunk, *zip(*jobs)))
    else:
        parts = [_windows_chunk(*job) for job in jobs]
    src.counter = start + M
    if not parts:
        z = np.zeros(0, dtype=np.int64)
        return WindowSample(n, z, z.copy(), 0, 0, 0, src.seed, bits, start)
    qp = np.concatenate([p[0] for p in parts])
    qc = np.concatenate([p[1] for p in parts])
    return WindowSample(
        n, qp, qc, sum(p[2] for p in parts), sum(p[3] for p in parts), sum(p[4] for p in parts), src.seed, bits, start
    )


def satisfies(ws: WindowSample, spec: QFunctionSpec, relation: str, lam) -> np.ndarray:
    """Exact test of ``f(q_prev/n, q_cur/n) <relation> lam`` for every sample."""
    ea, eb, ec, strict = Constraint(spec, relation, Fraction(lam)).integer_form()
    n = ws.n
    mag = abs(ea) * n + abs(ec) * n + strict
    coef = abs(ea) + abs(eb) + abs(ec) + 1
    cap = INT64_CAP // coef
    # clipping q_cur at cap keeps the sign whenever |eb| * cap exceeds the rest
    if eb != 0 and abs(eb) * cap > mag and cap > n:
        qc = np.minimum(ws.q_cur, cap)
        lhs = ea * ws.q_prev + eb * qc + ec * n
        return lhs <= -strict
    qp = ws.q_prev.astype(object)
    qc = ws.q_cur.astype(object)
    lhs = ea * qp + eb * qc + ec * n
    return np.asarray(lhs <= -strict, dtype=bool)


def values(ws: WindowSample, spec: QFunctionSpec) -> np.ndarray:
    """Float values of the statistic (for binning and averages only)."""
    x = ws.q_prev / ws.n
    y = ws.q_cur / ws.n
    num = float(spec.a1) * x + float(spec.b1) * y + float(spec.c1)
    den = float(spec.a2) * x + float(spec.b2) * y + float(spec.c2)
    return num / den


def ecdf(ws: WindowSample, spec: QFunctionSpec, lams: Sequence) -> np.ndarray:
    return np.array([satisfies(ws, spec, "<=", lam).mean() if ws.M else np.nan for lam in lams])


# ---------------------------------------------------------------------------
# histograms
# ---------------------------------------------------------------------------


@dataclass
class Histogram:
    lo: float
    hi: float
    step: float
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    @property
    def edges(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.counts.size + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    @property
    def scaled(self) -> np.ndarray:
        """Bins scaled to integrate to 1 over [lo, hi]."""
        inside = int(self.counts.sum())
        if inside == 0:
            raise EmptyCondition("no samples inside the histogram range; cannot scale")
        return self.counts / (inside * self.step)

    @property
    def density(self) -> np.ndarray:
        """Bins scaled by the full sample size (comparable with the limit density)."""
        if self.total == 0:
            raise EmptyCondition("empty histogram")
        return self.counts / (self.total * self.step)


SUPPORT = {"S": (2.0, 6.0), "rho": (0.0, 1.0), "mu": (0.0, 1.0), "nu": (0.0, 1.0)}


def step_rule(rule, n: int) -> Fraction:
    """``inv_n`` -> 1/n, ``inv_sqrt_n`` -> 1/ceil(sqrt n), or an explicit rational."""
    if rule == "inv_n":
        return Fraction(1, n)
    if rule == "inv_sqrt_n":
        return Fraction(1, math.isqrt(n - 1) + 1)
    return Fraction(rule)


def histogram_from(vals: np.ndarray, lo: float, hi: float, step: float) -> Histogram:
    nb = max(1, int(math.ceil((hi - lo) / step - 1e-9)))
    hi = lo + nb * step
    idx = np.floor((vals - lo) / step)
    under = int(np.count_nonzero(idx < 0))
    over = int(np.count_nonzero(idx >= nb))
    ok = (idx >= 0) & (idx < nb)
    counts = np.bincount(idx[ok].astype(np.int64), minlength=nb)
    return Histogram(lo, hi, float(step), counts, under, over)


def mc_histogram(
    spec: QFunctionSpec,
    n: int,
    M: int,
    step,
    src: AlphaSource,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    threads: int = 1,
) -> Histogram:
    """Histogram of Lambda_n over M sampled slopes."""
    step = float(step_rule(step, n))
    if step <= 0:
        raise DomainError("step must be positive")
    dlo, dhi = SUPPORT.get(spec.name, (0.0, 10.0))
    lo = dlo if lo is None else lo
    hi = dhi if hi is None else hi
    ws = mc_windows(n, M, src, threads)
    return histogram_from(values(ws, spec), lo, hi, step)


# ---------------------------------------------------------------------------
# secants, conditional expectations, counting
# ---------------------------------------------------------------------------


def rational(x, max_den: int = 10**6) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(max_den)


def eps_rule(rule, n: int) -> Fraction:
    if rule == "inv_n":
        return Fraction(1, n)
    if rule == "inv_sqrt_n":
        return rational(n**-0.5)
    return rational(rule)


def secant_estimate(spec: QFunctionSpec, n: int, lam, eps_n, tol: float = 1e-4) -> float:
    """(F_n(lam + eps) - F_n(lam)) / eps from exact lattice CDFs."""
    lam, eps = rational(lam), rational(eps_n)
    if eps <= 0:
        raise DomainError("eps must be positive")
    hi = cdf_exact(spec, lam + eps, n, tol).value
    lo = cdf_exact(spec, lam, n, tol).value
    return (hi - lo) / float(eps)


@dataclass(frozen=True)
class MCMean:
    mean: float
    stderr: float
    accepted_fraction: float = 1.0
    resampled: int = 0


def _mean_se(v: np.ndarray) -> Tuple[float, float]:
    m = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf
    return m, se


def mc_cond_expectation(gamma, eps, n: int, M: int, src: AlphaSource, threads: int = 1) -> MCMean:
    """Mean of S_n over sampled slopes with Gamma_n >= eps (rejection)."""
    eps = rational(eps)
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    spec = builtin(gamma) if isinstance(gamma, str) else gamma
    ws = mc_windows(n, M, src, threads)
    keep = satisfies(ws, spec, ">=", eps)
    if not np.any(keep):
        raise EmptyCondition("no sample satisfies the condition")
    s_vals = (n + ws.q_prev[keep] + ws.q_cur[keep]) / n
    m, se = _mean_se(s_vals)
    return MCMean(m, se, float(keep.mean()), ws.resampled)


def count_continuants(num: int, den: int, n: int, P: int, Q: int) -> Optional[int]:
    """Number of k >= 0 with n <= q_k < (P/Q) n, or None if the expansion ends first."""
    q_prev, q = 0, 1
    count = 1 if n <= 1 < Fraction(P, Q) * n else 0
    while Q * q < P * n:
        if not num:
            return None
        m, r = divmod(den, num)
        q_prev, q = q, m * q + q_prev
        den, num = num, r
        if n <= q and Q * q < P * n:
            count += 1
    return count


def _count_chunk(seed: int, bits: int, start: int, count: int, n: int, P: int, Q: int):
    src = AlphaSource(seed, bits)
    den = 1 << bits
    out = np.empty(count, dtype=np.int64)
    resampled = 0
    for j, num in enumerate(src.numerators(start, count)):
        c = count_continuants(num, den, n, P, Q) if num else None
        attempt = 0
        while c is None:
            attempt += 1
            resampled += 1
            num = src.redraw(start + j, attempt)
            c = count_continuants(num, den, n, P, Q) if num else None
        out[j] = c
    return out, resampled


def mc_continuant_count(n: int, c, M: int, src: AlphaSource, threads: int = 1) -> MCMean:
    """Mean number of continuants in [n, c n) over M sampled slopes."""
    c = rational(c, 10**12)
    if c <= 1:
        raise DomainError("c must be > 1")
    if M < 2:
        raise DomainError("M must be >= 2")
    bits = max(src.bits, precision_bits(max(2, math.ceil(c * n))))
    start = src.counter
    jobs = [(src.seed, bits, s, min(CHUNK, start + M - s), n, c.numerator, c.denominator) for s in range(start, start + M, CHUNK)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_count_chunk, *zip(*jobs)))
    else:
        parts = [_count_chunk(*job) for job in jobs]
    src.counter = start + M
    v = np.concatenate([p[0] for p in parts]).astype(float)
    m, se = _mean_se(v)
    return MCMean(m, se, 1.0, sum(p[1] for p in parts))


def quotient_series(alpha_desc, n_max: int) -> List[Tuple[int, Fraction]]:
    """Exact S(alpha, n) for n = 1..n_max."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    cf = cf_expand(as_slope(alpha_desc), stop=lambda k, q: q > n_max)
    if cf.q[-1] <= n_max:
        from .errors import InsufficientExpansion

        raise InsufficientExpansion(f"expansion ends at q = {cf.q[-1]} <= n_max = {n_max}")
    out = []
    k = 1
    for n in range(1, n_max + 1):
        while cf.q[k] <= n:
            k += 1
        out.append((n, Fraction(n + cf.q[k - 1] + cf.q[k], n)))
    return out


def fit_log_law(ns: Sequence[int], means: Sequence[float]) -> Tuple[float, float, np.ndarray]:
    """Least-squares slope and intercept of means against log n, with residuals."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.asarray(means, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), y - (slope * x + intercept)
