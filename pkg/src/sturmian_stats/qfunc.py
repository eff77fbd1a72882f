"""Continuant functions: statistics of the form f(q_{k-1}/n, q_k/n).

``f`` is a ratio of two linear forms

    f(x, y) = (a1 x + b1 y + c1) / (a2 x + b2 y + c2)

which must be nonnegative on the region 0 < x <= 1 < y.  Four such statistics
are built in: the recurrence quotient S and the position parameters rho, mu
and nu.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .cf_core import ContinuedFraction, ContinuantWindow, locate_n
from .errors import ConsistencyError, DomainError, SingularEvaluation

Coeffs = Tuple[Fraction, Fraction, Fraction]


def _lin(c: Coeffs, x, y):
    return c[0] * x + c[1] * y + c[2]


@dataclass(frozen=True)
class QFunctionSpec:
    a1: Fraction
    b1: Fraction
    c1: Fraction
    a2: Fraction
    b2: Fraction
    c2: Fraction
    name: str = "custom"

    def __post_init__(self):
        for f in ("a1", "b1", "c1", "a2", "b2", "c2"):
            object.__setattr__(self, f, Fraction(getattr(self, f)))
        num, den = self.num, self.den
        if num[0] * den[1] == num[1] * den[0] and num[0] * den[2] == num[2] * den[0] and num[1] * den[2] == num[2] * den[1]:
            raise DomainError(f"{self.name}: numerator and denominator are proportional (f is constant)")
        if self.b1 == 0 and self.b2 == 0:
            raise DomainError(f"{self.name}: f must depend on y")
        sign = self.denominator_sign()
        if sign == 0:
            raise DomainError(f"{self.name}: denominator vanishes or changes sign on 0 < x <= 1 < y")
        # nonnegativity: with a positive denominator the numerator must be >= 0
        # on the closure, i.e. at both corners and along the recession direction
        n0, n1 = _lin(num, 0, 1) * sign, _lin(num, 1, 1) * sign
        if n0 < 0 or n1 < 0 or num[1] * sign < 0:
            raise DomainError(f"{self.name}: f takes negative values on the base region")

    @property
    def num(self) -> Coeffs:
        return (self.a1, self.b1, self.c1)

    @property
    def den(self) -> Coeffs:
        return (self.a2, self.b2, self.c2)

    @property
    def coefficients(self) -> tuple:
        return (self.a1, self.b1, self.c1, self.a2, self.b2, self.c2)

    def denominator_sign(self) -> int:
        """+1 or -1 if the denominator keeps a strict sign on R, else 0."""
        den = self.den
        for s in (1, -1):
            d = tuple(s * v for v in den)
            closure_ok = _lin(d, 0, 1) >= 0 and _lin(d, 1, 1) >= 0 and d[1] >= 0
            if closure_ok and _lin(d, Fraction(1, 2), 2) > 0 and _lin(d, 1, 2) > 0:
                return s
        return 0

    def __call__(self, x, y):
        d = _lin(self.den, x, y)
        if d == 0:
            raise SingularEvaluation(f"{self.name}: denominator vanishes at ({x}, {y})")
        return _lin(self.num, x, y) / d

    def tends_to_zero_in_y(self) -> bool:
        """True when f -> 0 as y -> infinity (so {f >= eps} is bounded for eps > 0)."""
        return self.b1 == 0 and self.b2 != 0

    def describe(self) -> str:
        return ",".join(str(c) for c in self.coefficients)


_BUILTINS = {
    "S": (1, 1, 1, 0, 0, 1),
    "rho": (1, 0, 0, 0, 1, 0),
    "mu": (-1, 0, 1, -1, 1, 0),
    "nu": (0, 0, 1, 0, 1, 0),
}
_ALIASES = {"s": "S", "ρ": "rho", "μ": "mu", "ν": "nu"}


def builtin(name: str) -> QFunctionSpec:
    """f_S = 1+x+y, f_rho = x/y, f_mu = (1-x)/(y-x), f_nu = 1/y."""
    key = _ALIASES.get(name, name)
    if key not in _BUILTINS:
        raise DomainError(f"unknown Q-function {name!r}; expected one of {sorted(_BUILTINS)}")
    return QFunctionSpec(*_BUILTINS[key], name=key)


def parse_spec(text: str) -> QFunctionSpec:
    """A builtin name or six rational literals ``a1,b1,c1,a2,b2,c2``."""
    text = text.strip()
    if "," not in text:
        return builtin(text)
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 6:
        raise DomainError(f"custom spec needs six coefficients, got {len(parts)}")
    try:
        coeffs = [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad coefficient in {text!r}") from exc
    return QFunctionSpec(*coeffs, name=text)


@dataclass(frozen=True)
class QValue:
    value: Fraction
    window: ContinuantWindow
    name: str


def eval_window(spec: QFunctionSpec, q_prev: int, q_cur: int, n: int) -> Fraction:
    return spec(Fraction(q_prev, n), Fraction(q_cur, n))


def eval_q(spec: QFunctionSpec, cf: ContinuedFraction, n: int) -> QValue:
    w = locate_n(cf, n)
    return QValue(eval_window(spec, w.q_prev, w.q_cur, n), w, spec.name)


S, RHO, MU, NU = (builtin(k) for k in ("S", "rho", "mu", "nu"))


@dataclass(frozen=True)
class IdentityReport:
    n: int
    window: ContinuantWindow
    S: Fraction
    rho: Fraction
    mu: Fraction
    nu: Fraction


def check_identities(cf: ContinuedFraction, n: int) -> IdentityReport:
    """Verify the exact relations between S, rho, mu and nu at (alpha, n).

    Raises ``ConsistencyError`` on any violation.
    """
    w = locate_n(cf, n)
    s, rho, mu, nu = (eval_window(f, w.q_prev, w.q_cur, n) for f in (S, RHO, MU, NU))

    def need(cond, what):
        if not cond:
            raise ConsistencyError(f"{what} fails at n={n}, window=({w.q_prev}, {w.q_cur})")

    need(s == 1 + (1 + rho) / nu, "S = 1 + (1 + rho)/nu")
    need(2 + rho <= s <= 2 + 1 / rho, "2 + rho <= S <= 2 + 1/rho")
    need(rho <= nu < 1, "rho <= nu < 1")
    need(0 <= mu < 1, "0 <= mu < 1")
    if n == w.q_prev:
        need(nu == rho and s == 2 + 1 / rho, "upper bound attained at n = q_prev")
    return IdentityReport(n, w, s, rho, mu, nu)
