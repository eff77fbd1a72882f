"""Plain and coprime Riemann sums of omega-type integrands on lattice domains.

A pair (a, b) stands for the point (a/n, b/n).  Over the base region
R = {0 < x <= 1 < y} the lattice columns are a = 1..n with b >= n + 1, and

    P[Lambda_n <= lam] = sum over coprime (a, b) in Delta_f(lam) of 2 / (b (a + b)),

because every window (q_{k-1}, q_k) = (a, b) is carried by two fundamental
intervals of length 1 / (b (a + b)).

Integrands are ``OmegaLinear(c0, cx, cy)``, i.e. omega(x, y) * (c0 + cx x + cy y)
with omega(x, y) = 1 / (y (x + y)).  That family covers 2*omega and 2*omega*f_S.
For such integrands the sum along one lattice column has a closed form in
terms of harmonic blocks, so the Moebius route below never truncates the
unbounded direction.  The ``direct_gcd`` route enumerates points one by one
and truncates with a certified tail instead; the two are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import digamma, zeta

from .errors import ComputationRefused, ConsistencyError, DomainError, EmptyCondition
from .qfunc import MU, NU, RHO, S, QFunctionSpec, builtin

INF = np.int64(1) << np.int64(62)
_SAFE = 1 << 61
# columns whose first admissible b exceeds this are dropped; their mass is
# bounded by 2 / _B_CAP each and reported in the tail bound
_B_CAP = 1 << 50

RELATIONS = ("<=", "<", ">=", ">")


# ---------------------------------------------------------------------------
# number theory
# ---------------------------------------------------------------------------


def mobius_sieve(N: int) -> np.ndarray:
    """Moebius function mu(0..N) by a linear sieve (entry 0 is unused and 0)."""
    if N < 1:
        raise DomainError("N must be >= 1")
    mu = np.zeros(N + 1, dtype=np.int8)
    mu[1] = 1
    is_comp = bytearray(N + 1)
    primes = []
    for i in range(2, N + 1):
        if not is_comp[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            ip = i * p
            if ip > N:
                break
            is_comp[ip] = 1
            if i % p == 0:
                mu[ip] = 0
                break
            mu[ip] = -mu[i]
    return mu


@lru_cache(maxsize=8)
def _mobius_cached(N: int) -> np.ndarray:
    return mobius_sieve(N)


def _mobius_upto(N: int) -> np.ndarray:
    # reuse one sieve for many sizes
    size = 1 << max(10, (N - 1).bit_length())
    return _mobius_cached(size)


@lru_cache(maxsize=16)
def _divisor_pairs(a_max: int):
    """Flattened (d, k, mu(d)) over squarefree d and k >= 1 with d*k <= a_max."""
    mu = _mobius_upto(a_max)[: a_max + 1]
    ds = np.nonzero(mu)[0]
    counts = a_max // ds
    D = np.repeat(ds, counts).astype(np.int64)
    starts = np.cumsum(counts) - counts
    K = (np.arange(counts.sum(), dtype=np.int64) - np.repeat(starts, counts) + 1)
    M = mu[D].astype(np.float64)
    return D, K, M


# ---------------------------------------------------------------------------
# harmonic blocks
# ---------------------------------------------------------------------------


def harmonic_block(x, k) -> np.ndarray:
    """sum_{i=x}^{x+k-1} 1/i for integers x >= 1, k >= 0, accurate for k << x."""
    x = np.asarray(x, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    x, k = np.broadcast_arrays(x, k)
    out = np.empty(x.shape)
    small = x < 64
    if np.any(small):
        xs, ks = x[small], k[small]
        out[small] = digamma(xs + ks) - digamma(xs)
    big = ~small
    if np.any(big):
        xb, kb = x[big], k[big]
        y = xb + kb
        r = kb / xb
        inv_x2, inv_y2 = 1.0 / (xb * xb), 1.0 / (y * y)
        out[big] = (
            np.log1p(r)
            + 0.5 * kb / (xb * y)
            + kb * (xb + y) * inv_x2 * inv_y2 / 12.0
            - (inv_x2 * inv_x2 - inv_y2 * inv_y2) / 120.0
            + (inv_x2**3 - inv_y2**3) / 252.0
        )
    return out


# ---------------------------------------------------------------------------
# integrands
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OmegaLinear:
    """g(x, y) = omega(x, y) * (c0 + cx x + cy y)."""

    c0: float
    cx: float = 0.0
    cy: float = 0.0

    @property
    def homogeneous_degree(self) -> Optional[float]:
        return -2.0 if self.cx == 0 and self.cy == 0 else None

    @property
    def decays(self) -> bool:
        """Strongly decreasing in y (sum of strip sups converges)."""
        return self.cy == 0

    def __call__(self, x, y):
        return (self.c0 + self.cx * x + self.cy * y) / (y * (x + y))

    def strip_bounds(self, k, y_lo: float = 1.0, x_max: float = 1.0):
        """Upper bounds for sup|g| and sup|dg/dy| on the strip y in [k, k+1]."""
        y = np.maximum(np.asarray(k, dtype=float), y_lo)
        lin = abs(self.c0) + abs(self.cx) * x_max
        C = lin / y**2 + abs(self.cy) / y
        D = 2.0 * lin / y**3 + 3.0 * abs(self.cy) / y**2
        return C, D

    def strip_bound(self, y_lo: float = 1.0, y_hi: float = math.inf, x_max: float = 1.0) -> float:
        """M_g = max(sum_k C_g(k), sum_k D_g(k)) over strips meeting [y_lo, y_hi]."""
        k0 = int(math.floor(y_lo))
        if math.isinf(y_hi):
            if not self.decays:
                raise ComputationRefused("integrand does not decay in y; strip bound diverges")
            K = max(k0 + 1, 10_000)
            ks = np.arange(k0, K)
            C, D = self.strip_bounds(ks, y_lo, x_max)
            lin = abs(self.c0) + abs(self.cx) * x_max
            Ct = float(C.sum()) + lin * float(zeta(2, K))
            Dt = float(D.sum()) + 2 * lin * float(zeta(3, K))
            return max(Ct, Dt)
        ks = np.arange(k0, int(math.ceil(y_hi)))
        C, D = self.strip_bounds(ks, y_lo, x_max)
        return max(float(C.sum()), float(D.sum()))


TWO_OMEGA = OmegaLinear(2.0)
TWO_OMEGA_FS = OmegaLinear(2.0, 2.0, 2.0)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    spec: QFunctionSpec
    relation: str
    threshold: Fraction

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise DomainError(f"relation must be one of {RELATIONS}")
        object.__setattr__(self, "threshold", _as_fraction(self.threshold))

    def negated(self) -> "Constraint":
        flip = {"<=": ">", "<": ">=", ">=": "<", ">": "<="}
        return Constraint(self.spec, flip[self.relation], self.threshold)

    def holds(self, x: Fraction, y: Fraction) -> bool:
        v = self.spec(x, y)
        t = self.threshold
        return {"<=": v <= t, "<": v < t, ">=": v >= t, ">": v > t}[self.relation]

    def integer_form(self) -> Tuple[int, int, int, int]:
        """(ea, eb, ec, strict) with the constraint <=> ea*a + eb*b + ec*n <= -strict."""
        spec, lam = self.spec, self.threshold
        P, Q = lam.numerator, lam.denominator
        s = spec.denominator_sign()
        if self.relation in (">=", ">"):
            s = -s
        coef = [s * (Q * u - P * v) for u, v in zip(spec.num, spec.den)]
        scale = math.lcm(*(c.denominator for c in coef))
        ea, eb, ec = (int(c * scale) for c in coef)
        return ea, eb, ec, int(self.relation in ("<", ">"))


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError("threshold must be finite")
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class LatticeDomain:
    """Conjunction of ratio-of-linear constraints over a base region.

    ``base="R"``: 0 < x <= 1 < y.  ``base="T"``: the counting strip
    {0 < x < y, 1 <= y < c}.
    """

    constraints: Tuple[Constraint, ...] = ()
    base: str = "R"
    c: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.base not in ("R", "T"):
            raise DomainError("base must be 'R' or 'T'")
        if self.base == "T":
            if self.c is None:
                raise DomainError("strip base needs a height c")
            object.__setattr__(self, "c", _as_fraction(self.c))

    def contains(self, x: Fraction, y: Fraction) -> bool:
        if self.base == "R":
            if not (0 < x <= 1 < y):
                return False
        elif not (0 < x < y and 1 <= y < self.c):
            return False
        return all(con.holds(x, y) for con in self.constraints)

    def with_constraint(self, con: Constraint) -> "LatticeDomain":
        return LatticeDomain(self.constraints + (con,), self.base, self.c)

    def columns(self, n: int):
        """Per-column bounds: a = 1..a_max and b in [lo[a-1], hi[a-1]] (hi = INF if unbounded)."""
        if n < 1:
            raise DomainError("n must be >= 1")
        if self.base == "R":
            a_max = n
            a = np.arange(1, a_max + 1, dtype=np.int64)
            lo = np.full(a_max, n + 1, dtype=np.int64)
            hi = np.full(a_max, INF, dtype=np.int64)
        else:
            cn = self.c * n
            b_top = math.ceil(cn) - 1
            a_max = max(b_top - 1, 0)
            if a_max == 0:
                z = np.zeros(0, dtype=np.int64)
                return 0, z, z.copy()
            a = np.arange(1, a_max + 1, dtype=np.int64)
            lo = np.maximum(a + 1, n)
            hi = np.full(a_max, b_top, dtype=np.int64)
        for con in self.constraints:
            _apply(con, n, a, lo, hi)
        return a_max, lo, hi

    def is_bounded(self, n: int) -> bool:
        _, lo, hi = self.columns(n)
        return not np.any((hi >= INF) & (lo <= hi))


def _apply(con: Constraint, n: int, a: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> None:
    ea, eb, ec, strict = con.integer_form()
    big = abs(ea) * int(a[-1]) + abs(ec) * n + 1 >= _SAFE or abs(eb) >= _SAFE
    if big:
        av = a.astype(object)
    else:
        av = a
    R = -ea * av - ec * n - strict  # constraint <=> eb * b <= R
    if eb > 0:
        bound = R // eb
        bound = np.clip(np.array(bound, dtype=object), -INF, INF).astype(np.int64) if big else np.clip(bound, -INF, INF)
        np.minimum(hi, bound, out=hi)
    elif eb < 0:
        bound = -((-R) // eb)  # ceil(R / eb)
        bound = np.clip(np.array(bound, dtype=object), -INF, INF).astype(np.int64) if big else np.clip(bound, -INF, INF)
        np.maximum(lo, bound, out=lo)
    else:
        dead = np.array(R < 0, dtype=bool)
        hi[dead] = np.minimum(hi[dead], lo[dead] - 1)


# ---------------------------------------------------------------------------
# sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SumResult:
    """Lattice sum with a certified bound on the truncation error.

    ``pairs_visited`` counts lattice points for ``direct_gcd`` and lattice
    columns (closed-form column sums) for ``mobius``.
    """

    value: float
    tail_bound: float
    pairs_visited: int
    method: str


def _column_sums(g: OmegaLinear, n: int, d, k, Lj, Uj, unbounded) -> np.ndarray:
    """Closed-form sum over j in [Lj, Uj] of g(d k / n, d j / n) / n^2."""
    kf = k.astype(np.float64)
    df = d.astype(np.float64)
    head = harmonic_block(Lj, k)
    tail = np.zeros_like(head)
    fin = ~unbounded
    if np.any(fin):
        tail[fin] = harmonic_block(Uj[fin] + 1, k[fin])
    s_omega = (head - tail) / kf  # sum 1 / (j (k + j))
    out = (g.c0 + g.cx * df * kf / n) * s_omega / (df * df)
    if g.cy:
        if np.any(unbounded):
            raise ComputationRefused("integrand with a linear-in-y factor on an unbounded domain")
        s_lin = harmonic_block(Lj + k, Uj - Lj + 1)  # sum 1 / (k + j)
        out = out + (g.cy / n) * s_lin / df
    return out


def _lattice_sum(g: OmegaLinear, domain: LatticeDomain, n: int, coprime: bool) -> SumResult:
    a_max, lo, hi = domain.columns(n)
    if a_max == 0:
        return SumResult(0.0, 0.0, 0, "mobius" if coprime else "plain")
    if coprime:
        D, K, M = _divisor_pairs(a_max)
    else:
        D = np.ones(a_max, dtype=np.int64)
        K = np.arange(1, a_max + 1, dtype=np.int64)
        M = np.ones(a_max)
    idx = D * K - 1
    L, U = lo[idx], hi[idx]
    unbounded = U >= INF
    Lj = -((-L) // D)
    Uj = np.where(unbounded, INF, U // D)
    keep = Lj <= Uj
    capped = keep & (Lj > _B_CAP)
    tail = 0.0
    if np.any(capped):
        # omitted mass of a column starting beyond _B_CAP is below |c0|+|cx| times 1/(d^2 Lj)
        lin = abs(g.c0) + abs(g.cx) * 1.0
        tail = float(np.sum(lin / (D[capped].astype(float) ** 2 * Lj[capped].astype(float))))
        keep &= ~capped
    D, K, M, Lj, Uj, unbounded = D[keep], K[keep], M[keep], Lj[keep], Uj[keep], unbounded[keep]
    if D.size == 0:
        return SumResult(0.0, tail, 0, "mobius" if coprime else "plain")
    vals = M * _column_sums(g, n, D, K, Lj, Uj, unbounded)
    value = _stratified_fsum(vals)
    eps_round = 1e-15 * float(np.sum(np.abs(vals))) + 1e-16 * vals.size
    return SumResult(value, tail + eps_round, int(D.size), "mobius" if coprime else "plain")


def _stratified_fsum(vals: np.ndarray, strata: int = 64) -> float:
    # partial sums per stratum, merged with compensated summation
    if vals.size <= strata:
        return math.fsum(vals.tolist())
    parts = np.array_split(vals, strata)
    return math.fsum(math.fsum(p.tolist()) for p in parts)


def _direct_sum(g: OmegaLinear, domain: LatticeDomain, n: int, tol: float) -> SumResult:
    a_max, lo, hi = domain.columns(n)
    b_max = int(math.ceil(2 * n / tol)) + 1
    total, tail, visited = [], 0.0, 0
    for a in range(1, a_max + 1):
        L, U = int(lo[a - 1]), int(hi[a - 1])
        if L > U:
            continue
        if U >= INF:
            if not g.decays:
                raise ComputationRefused("non-decaying integrand on an unbounded domain")
            if L > b_max:
                tail += (abs(g.c0) + abs(g.cx) * a / n) / L
                continue
            # sum_{b > B} |lin| / (b (a + b)) <= |lin| / (B + 1)
            tail += (abs(g.c0) + abs(g.cx) * a / n) / (b_max + 1)
            U = b_max
        for start in range(L, U + 1, 1 << 22):
            b = np.arange(start, min(U, start + (1 << 22) - 1) + 1, dtype=np.int64)
            b = b[np.gcd(b, a) == 1]
            visited += b.size
            bf = b.astype(np.float64)
            total.append(math.fsum(((g.c0 + g.cx * a / n + g.cy * bf / n) / (bf * (a + bf))).tolist()))
    return SumResult(math.fsum(total), tail, visited, "direct_gcd")


def plain_riemann(g: OmegaLinear, domain: LatticeDomain, n: int) -> SumResult:
    """(1/n^2) * sum of g over all lattice points of the domain (no coprimality)."""
    if not g.decays and not domain.is_bounded(n):
        raise ComputationRefused("non-decaying integrand on an unbounded domain")
    return _lattice_sum(g, domain, n, coprime=False)


def coprime_riemann(
    g: OmegaLinear,
    domain: LatticeDomain,
    n: int,
    method: str = "mobius",
    tol: float = 1e-4,
) -> SumResult:
    """Coprime Riemann sum; ``method`` is ``mobius``, ``direct_gcd`` or ``both``.

    ``both`` evaluates the two routes and raises ``ConsistencyError`` if they
    differ by more than their combined bounds.
    """
    if not g.decays and not domain.is_bounded(n):
        raise ComputationRefused("non-decaying integrand on an unbounded domain")
    if method == "mobius":
        return _lattice_sum(g, domain, n, coprime=True)
    if method == "direct_gcd":
        return _direct_sum(g, domain, n, tol)
    if method == "both":
        m = _lattice_sum(g, domain, n, coprime=True)
        d = _direct_sum(g, domain, n, tol)
        slack = m.tail_bound + d.tail_bound + 1e-12
        if abs(m.value - d.value) > slack:
            raise ConsistencyError(f"mobius {m.value!r} vs direct {d.value!r} exceeds {slack:.3g}")
        return m
    raise DomainError(f"unknown method {method!r}")


def zeta_value(beta: float) -> float:
    return float(zeta(beta, 1))


def coprime_certificate(g: OmegaLinear, n: int, base_bound: Optional[float] = None) -> float:
    """(1/n) (1 + 5 zeta(beta)) M_g(R) for g homogeneous of degree -beta, beta > 1."""
    deg = g.homogeneous_degree
    if deg is None or -deg <= 1:
        raise ComputationRefused("certificate needs an integrand homogeneous of degree -beta, beta > 1")
    M = g.strip_bound() if base_bound is None else base_bound
    return (1 + 5 * zeta_value(-deg)) * M / n


def plain_certificate(g: OmegaLinear, n: int, y_lo: float = 1.0, y_hi: float = math.inf) -> float:
    """(5/n) M_g(Omega) with strip sups taken at the corner nearest the origin."""
    return 5 * g.strip_bound(y_lo, y_hi) / n


# ---------------------------------------------------------------------------
# distributions and expectations
# ---------------------------------------------------------------------------


def delta_domain(spec: QFunctionSpec, lam, relation: str = "<=") -> LatticeDomain:
    return LatticeDomain((Constraint(spec, relation, lam),))


def cdf_exact(spec: QFunctionSpec, lam, n: int, tol: float = 1e-4, method: str = "mobius") -> SumResult:
    """P[Lambda_n <= lam] as the coprime Riemann sum of 2*omega over Delta_f(lam).

    When Delta_f(lam) is unbounded but its complement in R is bounded, the
    result is 1 minus the (finite) sum over the complement.
    """
    lam = _as_fraction(lam)
    dom = delta_domain(spec, lam)
    if dom.is_bounded(n):
        return coprime_riemann(TWO_OMEGA, dom, n, method, tol)
    comp = delta_domain(spec, lam, ">")
    if comp.is_bounded(n):
        r = coprime_riemann(TWO_OMEGA, comp, n, method, tol)
        return SumResult(1.0 - r.value, r.tail_bound, r.pairs_visited, r.method)
    return coprime_riemann(TWO_OMEGA, dom, n, method, tol)


def joint_tail(spec_f, lam, spec_g, eps, n: int, tol: float = 1e-4, method: str = "mobius") -> SumResult:
    """P[Lambda_n >= lam, Gamma_n >= eps]."""
    dom = LatticeDomain((Constraint(spec_f, ">=", lam), Constraint(spec_g, ">=", eps)))
    return coprime_riemann(TWO_OMEGA, dom, n, method, tol)


def _gamma_spec(gamma) -> QFunctionSpec:
    spec = builtin(gamma) if isinstance(gamma, str) else gamma
    if not spec.tends_to_zero_in_y():
        raise DomainError(f"conditioning statistic {spec.name} must vanish as y -> infinity")
    return spec


def cond_expectation_parts(gamma, eps, n: int, method: str = "mobius"):
    """(E[S_n ; Gamma_n >= eps], P[Gamma_n >= eps]) as two finite coprime sums."""
    eps = _as_fraction(eps)
    if eps <= 0:
        raise ComputationRefused("eps must be positive: E[S_n] itself is infinite")
    spec = _gamma_spec(gamma)
    dom = LatticeDomain((Constraint(spec, ">=", eps),))
    num = coprime_riemann(TWO_OMEGA_FS, dom, n, method)
    den = coprime_riemann(TWO_OMEGA, dom, n, method)
    return num.value, den.value


def cond_expectation_exact(gamma, eps, n: int, tol: float = 1e-4, method: str = "mobius") -> float:
    """E[S_n | Gamma_n >= eps] for Gamma in {rho, mu, nu}."""
    num, den = cond_expectation_parts(gamma, eps, n, method)
    if den <= 0:
        raise EmptyCondition(f"P[{gamma} >= {eps}] = 0 at n={n}")
    return num / den


def strip_domain(c) -> LatticeDomain:
    return LatticeDomain((), base="T", c=_as_fraction(c))


def continuant_count_mean(n: int, c, tol: float = 1e-4, method: str = "mobius") -> float:
    """Mean number of continuants q_k(alpha) in [n, c n) for uniform alpha."""
    c = _as_fraction(c)
    if c <= 1:
        if c == 1:
            return 0.0
        raise DomainError("c must be >= 1")
    value = coprime_riemann(TWO_OMEGA, strip_domain(c), n, method, tol).value
    if n == 1:
        # q_0 = 1 for every alpha, and q_1 = 1 exactly when m_1 = 1 (measure 1/2)
        value += 1.0 + 0.5
    return value


def count_certificate(n: int, c) -> float:
    """Extrapolated coprime-sum certificate on the strip T_c (not a subset of R)."""
    c = float(c)
    M = TWO_OMEGA.strip_bound(1.0, c, x_max=c)
    return (1 + 5 * zeta_value(2)) * M / n


def total_mass(n: int) -> float:
    """Sum of 2*omega over all coprime lattice points of R; equals 1 for every n."""
    return coprime_riemann(TWO_OMEGA, LatticeDomain(), n).value


BUILTINS = {"S": S, "rho": RHO, "mu": MU, "nu": NU}
