"""Limit objects: the omega/psi densities, limit laws of the four parameters,
the dilogarithm, conditional-expectation closed forms and named constants.

A = 12/pi^2 throughout.  Limit CDFs are F(lam) = A * I_f(lam) where I_f is the
omega-area of {f <= lam} inside 0 < x <= 1 < y.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Tuple

from scipy import integrate

from .errors import ComputationRefused, DomainError
from .qfunc import QFunctionSpec, builtin

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class Constants:
    A: float = 12.0 / math.pi**2
    levy_L: float = math.pi**2 / (12.0 * LOG2)
    zeta2: float = math.pi**2 / 6.0

    @property
    def kappa(self) -> float:
        return math.exp(self.levy_L)


CONSTANTS = Constants()
A = CONSTANTS.A
KAPPA = CONSTANTS.kappa


class AsymptoticRegimeWarning(UserWarning):
    """An asymptotic formula was evaluated far from its regime of validity."""


# ---------------------------------------------------------------------------
# point densities
# ---------------------------------------------------------------------------


def omega(x: float, y: float) -> float:
    if y <= 0 or x + y <= 0:
        raise DomainError(f"omega has a pole or is undefined at ({x}, {y})")
    return 1.0 / (y * (x + y))


def psi(x: float, y: float) -> float:
    return A * omega(x, y)


# ---------------------------------------------------------------------------
# dilogarithm
# ---------------------------------------------------------------------------


def _li2_series(x: float) -> float:
    # |x| <= 1/2: terms shrink at least like 2^-k
    terms, p, k = [], x, 1
    while True:
        t = p / (k * k)
        terms.append(t)
        if abs(t) < 1e-18:
            break
        k += 1
        p *= x
    return math.fsum(terms)


def _li2(x: float) -> float:
    """Real dilogarithm on [-1, 1]."""
    if x < 0:
        return 0.5 * _li2(x * x) - _li2(-x)
    if x <= 0.5:
        return _li2_series(x)
    if x == 1.0:
        return math.pi**2 / 6
    return math.pi**2 / 6 - math.log(x) * math.log1p(-x) - _li2_series(1.0 - x)


def dilog(x: float) -> float:
    """Li_2(x) = sum_{k>=1} x^k / k^2 for 0 <= x <= 1."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"dilog is only provided on [0, 1], got {x}")
    return _li2(x)


# ---------------------------------------------------------------------------
# limit densities
# ---------------------------------------------------------------------------


def _dens_S(lam: float) -> float:
    if lam < 2:
        return 0.0
    if lam <= 3:
        return A * math.log(lam - 1) / (lam - 1)
    return A * math.log1p(1.0 / (lam - 2)) / (lam - 1)


def _dens_rho(lam: float) -> float:
    if not 0 <= lam <= 1:
        return 0.0
    if lam == 0:
        return math.inf
    return A * abs(math.log(lam)) / (1 + lam)


_MU_H1 = 4 - 4 * LOG2  # h'(1/2) for h(l) = 2 log 2 - log(l)/(l - 1)
_MU_H2 = 8 - 16 * LOG2  # h''(1/2)


def _log_ratio(lam: float) -> float:
    # log(lam) / (lam - 1), stable near 1
    t = lam - 1.0
    return 1.0 - t / 2 if abs(t) < 1e-8 else math.log1p(t) / t


def _dens_mu(lam: float) -> float:
    if not 0 <= lam <= 1:
        return 0.0
    if lam == 0:
        return math.inf
    t = lam - 0.5
    if abs(2 * t) < 1e-6:
        return A * (_MU_H1 / 2 + _MU_H2 * t / 4)
    return A * (2 * LOG2 - _log_ratio(lam)) / (2 * lam - 1)


def _dens_nu(lam: float) -> float:
    if not 0 <= lam <= 1:
        return 0.0
    if lam == 0:
        return A
    return A * math.log1p(lam) / lam


@dataclass(frozen=True)
class DensityLaw:
    """Piecewise closed-form limit density A * J_f on its support."""

    name: str
    support: Tuple[float, float]
    pieces: Tuple[Tuple[Tuple[float, float], Callable[[float], float]], ...]
    singular_points: Tuple[float, ...]
    split_points: Tuple[float, ...] = field(default=())

    def __call__(self, lam: float) -> float:
        return density(self, lam)


LAWS = {
    "S": DensityLaw("S", (2.0, math.inf), (((2.0, 3.0), _dens_S), ((3.0, math.inf), _dens_S)), (3.0,), (2.0, 3.0)),
    "rho": DensityLaw("rho", (0.0, 1.0), (((0.0, 1.0), _dens_rho),), (0.0, 1.0), (0.0, 1.0)),
    "mu": DensityLaw("mu", (0.0, 1.0), (((0.0, 1.0), _dens_mu),), (0.5,), (0.0, 0.5, 1.0)),
    "nu": DensityLaw("nu", (0.0, 1.0), (((0.0, 1.0), _dens_nu),), (0.0, 1.0), (0.0, 1.0)),
}


def law(name: str) -> DensityLaw:
    key = builtin(name).name
    return LAWS[key]


def density(lw, lam: float) -> float:
    lw = law(lw) if isinstance(lw, str) else lw
    lam = float(lam)
    for (lo, hi), fn in lw.pieces:
        if lo <= lam <= hi:
            return fn(lam)
    return 0.0


# ---------------------------------------------------------------------------
# limit CDFs
# ---------------------------------------------------------------------------


def _quad_density(lw: DensityLaw, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    pts = sorted({p for p in lw.split_points if lo < p < hi})
    edges = [lo, *pts, hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda t: density(lw, t), a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total


def limit_cdf(lw, lam: float) -> float:
    """F_inf(lam) = A * I_f(lam), closed form where available."""
    lw = law(lw) if isinstance(lw, str) else lw
    lam = float(lam)
    lo, hi = lw.support
    if lam <= lo:
        return 0.0
    if lam >= hi:
        return 1.0
    if lw.name == "S":
        if lam <= 3:
            return 0.5 * A * math.log(lam - 1) ** 2
        return 1.0 - A * _li2(1.0 / (lam - 1))
    if lw.name == "nu":
        return -A * _li2(-lam)
    if lw.name == "rho":
        return A * (-math.log(lam) * math.log1p(lam) - _li2(-lam))
    return _quad_density(lw, lo, lam)


def total_mass(lw) -> float:
    lw = law(lw) if isinstance(lw, str) else lw
    lo, hi = lw.support
    if math.isinf(hi):
        # S: quadrature up to a cut, then the exact dilogarithm tail
        cut = 1e4
        return _quad_density(lw, lo, cut) + A * _li2(1.0 / (cut - 1))
    return _quad_density(lw, lo, hi)


# ---------------------------------------------------------------------------
# generic geometric path (no density formula needed)
# ---------------------------------------------------------------------------


def _y_interval_coeffs(spec: QFunctionSpec, relation: str, lam: Fraction):
    from .lattice_sums import Constraint

    ea, eb, ec, _ = Constraint(spec, relation, lam).integer_form()
    return float(ea), float(eb), float(ec)


def _omega_strip(x: float, ylo: float, yhi: float) -> float:
    # integral of 1/(y (x + y)) over [ylo, yhi]
    if yhi <= ylo:
        return 0.0
    upper = 0.0 if math.isinf(yhi) else math.log1p(x / yhi)
    return (math.log1p(x / ylo) - upper) / x


def _y_bounds(x: float, cons) -> Tuple[float, float]:
    lo, hi = 1.0, math.inf
    for ea, eb, ec in cons:
        rhs = -(ea * x + ec)  # eb * y <= rhs
        if eb > 0:
            hi = min(hi, rhs / eb)
        elif eb < 0:
            lo = max(lo, rhs / eb)
        elif rhs < 0:
            return 1.0, 1.0
    return lo, hi


def _breakpoints(cons) -> list:
    pts = set()
    for ea, eb, ec in cons:
        if ea:
            x = -(eb + ec) / ea
            if 0 < x < 1:
                pts.add(x)
    return sorted(pts)


def region_integral(constraints, integrand: str = "omega") -> float:
    """Integral over {0 < x <= 1 < y} cut by ``(spec, relation, threshold)`` triples.

    ``integrand`` is ``omega`` or ``omega_fS`` (omega times 1 + x + y); the
    inner y-integral is taken in closed form and the outer x-integral by
    adaptive quadrature split where a boundary line crosses y = 1.
    """
    cons = [_y_interval_coeffs(s, r, Fraction(t)) for s, r, t in constraints]

    def inner(x: float) -> float:
        lo, hi = _y_bounds(x, cons)
        if hi <= lo:
            return 0.0
        w = _omega_strip(x, lo, hi)
        if integrand == "omega":
            return w
        if math.isinf(hi):
            raise ComputationRefused("omega * f_S is not integrable on an unbounded region")
        return w + math.log(hi / lo)

    pts = _breakpoints(cons)
    edges = [0.0, *pts, 1.0]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(inner, a, b, epsabs=1e-14, epsrel=1e-12, limit=400)
        total += val
    return total


def limit_cdf_geometric(spec: QFunctionSpec, lam) -> float:
    """A * I_f(lam) for any ratio-of-linears spec, by quadrature of omega."""
    return A * region_integral([(spec, "<=", Fraction(lam))])


# ---------------------------------------------------------------------------
# conditional expectations
# ---------------------------------------------------------------------------

# intercepts as printed alongside the asymptotic law
C_PUBLISHED = {"nu": 1.0, "mu": 0.0, "rho": 1.0}
# intercepts obtained by integrating psi * f_S exactly (see cond_product_exact)
C_INTEGRAL = {"nu": 1.0, "mu": 1.0 - A, "rho": 1.0 - A}


def _gamma_name(gamma) -> str:
    name = builtin(gamma).name if isinstance(gamma, str) else gamma.name
    if name not in ("rho", "mu", "nu"):
        raise DomainError(f"conditioning parameter must be rho, mu or nu, got {name}")
    return name


def _check_eps(eps) -> float:
    eps = float(eps)
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return eps


def cond_product_closed(gamma, eps) -> float:
    """Tabulated closed forms for E_psi[f_S | f_G >= eps] * P_psi[f_G >= eps]."""
    g, eps = _gamma_name(gamma), _check_eps(eps)
    L = abs(math.log(eps))
    if g == "rho":
        return A * L + 1 - A * eps * L
    if g == "mu":
        return A * L + A / (1 - eps) * eps * L
    return A * L + 1


def cond_product_exact(gamma, eps) -> float:
    """E_psi[f_S ; f_G >= eps] by closed inner integral and 1-D quadrature."""
    g, eps = _gamma_name(gamma), _check_eps(eps)
    return A * region_integral([(builtin(g), ">=", Fraction(eps))], "omega_fS")


def cond_prob_exact(gamma, eps) -> float:
    g, eps = _gamma_name(gamma), _check_eps(eps)
    return A * region_integral([(builtin(g), ">=", Fraction(eps))])


def cond_expectation_asymptotic(gamma, eps, constants: str = "published") -> float:
    """A |log eps| + C(Gamma).

    The error term is O(1/(eps n) + eps log^2 eps).  ``constants`` selects the
    printed intercepts (``published``) or those from exact integration
    (``integral``).  Warns when eps is too large for the asymptotics to mean much.
    """
    g, eps = _gamma_name(gamma), _check_eps(eps)
    table = {"published": C_PUBLISHED, "integral": C_INTEGRAL}[constants]
    if eps > 0.1:
        warnings.warn(f"eps={eps}: asymptotic regime not reached", AsymptoticRegimeWarning, stacklevel=2)
    return A * abs(math.log(eps)) + table[g]


def fixed_k_limit_expectation(mu_pos) -> float:
    """1 + (1/log 2) * int_0^1 dt / (t + mu (1 - t))."""
    mu = Fraction(mu_pos) if not isinstance(mu_pos, float) else mu_pos
    if not 0 < mu <= 1:
        raise DomainError(f"mu must lie in (0, 1], got {mu_pos}")
    if mu == 1:
        return 1 + 1 / LOG2
    m = float(mu)
    return 1 + abs(math.log(m)) / ((1 - m) * LOG2)


def count_limit(c, formula: str = "integral") -> float:
    """Limit of the mean number of continuants in [n, c n).

    ``integral`` evaluates (6/pi^2) * int_{T_c} 2 omega = A log 2 log c.
    ``published`` evaluates the printed expression A log c / log 2.
    """
    c = float(c)
    if c < 1:
        raise DomainError("c must be >= 1")
    if formula == "integral":
        return A * LOG2 * math.log(c)
    if formula == "published":
        return A * math.log(c) / LOG2
    raise DomainError(f"unknown formula {formula!r}")
