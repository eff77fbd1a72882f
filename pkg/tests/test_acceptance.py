"""Acceptance suite: one PASS/FAIL line per criterion (also listed in the
terminal summary).  Tolerances are the published ones; nothing is relaxed."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from acceptance_log import report
from sturmian_stats import experiments as ex
from sturmian_stats import limit_laws as ll
from sturmian_stats.cf_core import DyadicSlope, cf_expand
from sturmian_stats.lattice_sums import (
    TWO_OMEGA,
    cdf_exact,
    cond_expectation_exact,
    continuant_count_mean,
    coprime_riemann,
    delta_domain,
)
from sturmian_stats.qfunc import MU, NU, RHO, S
from sturmian_stats.sturmian_words import brute_recurrence, complexity, recurrence_formula, sized_word

pytestmark = pytest.mark.slow

A = 12 / math.pi**2
SPECS = {"S": S, "rho": RHO, "mu": MU, "nu": NU}
CORPUS_SEED = 20240601


@pytest.fixture(scope="module")
def corpus():
    nums = ex.AlphaSource(CORPUS_SEED).numerators(0, 100)
    t0 = time.perf_counter()
    out = []
    for num in nums:
        alpha = DyadicSlope(num | 1, 128)
        out.append((alpha, sized_word(alpha, 50), cf_expand(alpha, stop=lambda k, q: q > 200)))
    return out, time.perf_counter() - t0


def test_ac1_recurrence_formula(corpus):
    words, t_words = corpus
    t0 = time.perf_counter()
    bad = [(a.describe(), n) for a, w, cf in words for n in range(1, 51) if brute_recurrence(w, n) != recurrence_formula(cf, n)]
    elapsed = t_words + time.perf_counter() - t0
    ok = not bad and elapsed <= 120
    report("AC1", ok, f"{len(bad)} mismatches over 100 slopes x n<=50, {elapsed:.1f}s (limit 120s)")
    assert ok, bad[:5]


def test_ac2_complexity(corpus):
    words, _ = corpus
    bad = [(a.describe(), n) for a, w, _ in words for n in range(1, 51) if complexity(w, n) != n + 1]
    report("AC2", not bad, f"{len(bad)} cases with p(n) != n+1")
    assert not bad


def test_ac3_S_below_three():
    target = A / 2 * math.log(2) ** 2
    e1 = cdf_exact(S, 3, 1000).value - target
    e4 = cdf_exact(S, 3, 4000).value - target
    ratio = abs(e1) / abs(e4)
    checks = {"n=1000 within 0.01": abs(e1) <= 0.01, "n=4000 within 0.0025": abs(e4) <= 0.0025, "ratio in [2.5, 6]": 2.5 <= ratio <= 6}
    ok = all(checks.values())
    report("AC3", ok, f"err(1000)={e1:+.3e}, err(4000)={e4:+.3e}, ratio={ratio:.2f}; " + ", ".join(f"{k}: {v}" for k, v in checks.items()))
    assert ok


def test_ac4_tail_law():
    worst = 0.0
    for b in (2, 3, 5, 10):
        tail = 1 - cdf_exact(S, b + 1, 2000).value
        worst = max(worst, abs(tail - A * ll.dilog(1 / b)))
    mass = A / 2 * math.log(2) ** 2 + A * ll.dilog(0.5)
    ok = worst <= 0.005 and abs(mass - 1) <= 1e-12
    report("AC4", ok, f"max tail error {worst:.2e} (<=0.005), mass identity off by {abs(mass - 1):.1e} (<=1e-12)")
    assert ok


def test_ac5_densities():
    masses = {name: ll.total_mass(name) for name in SPECS}
    mass_ok = all(abs(m - 1) <= 1e-8 for m in masses.values())
    target = 24 / math.pi**2 * (1 - math.log(2))
    h = 1e-10
    mu_gap = max(abs(ll.density("mu", x) - target) for x in (0.5 - h, 0.5, 0.5 + h))
    s_gap = abs(ll.density("S", 3 - h) - ll.density("S", 3 + h))
    ok = mass_ok and mu_gap <= 1e-8 and s_gap <= 1e-8
    worst = max(abs(m - 1) for m in masses.values())
    report("AC5", ok, f"max |mass-1|={worst:.1e}, mu(1/2) gap {mu_gap:.1e}, S jump at 3 {s_gap:.1e}")
    assert ok


def _secant_grid(name):
    if name == "S":
        # ten points on each side of the kink at 3
        return [Fraction(21, 10) + Fraction(8, 90) * i for i in range(10)] + [
            Fraction(31, 10) + Fraction(29, 90) * i for i in range(10)
        ]
    return [Fraction(1, 10) + Fraction(8, 190) * i for i in range(20)]


def _secant_err(name, n):
    eps = ex.eps_rule("inv_sqrt_n", n)
    return max(abs(ex.secant_estimate(SPECS[name], n, lam, eps) - ll.density(name, float(lam))) for lam in _secant_grid(name))


def test_ac6_secant_convergence():
    parts, ok = [], True
    for name in ("S", "nu"):
        e1, e16 = _secant_err(name, 1000), _secant_err(name, 16000)
        ok &= e1 / e16 >= 2
        parts.append(f"{name}: {e1:.3e} -> {e16:.3e} (factor {e1 / e16:.2f})")
    report("AC6", ok, "; ".join(parts) + " (need factor >= 2)")
    assert ok


def test_ac7_conditional_expectation():
    t0 = time.perf_counter()
    ns = (100, 500, 2000)
    target = {"nu": 1.0, "mu": 0.0, "rho": 1.0}
    parts, ok = [], True
    for g in ("nu", "mu", "rho"):
        res = [cond_expectation_exact(g, Fraction(1, n), n) - A * math.log(n) - target[g] for n in ns]
        good = all(abs(r) <= 0.5 for r in res)
        ok &= good
        parts.append(f"{g} residuals {', '.join(f'{r:+.3f}' for r in res)} {'ok' if good else 'out'}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 600
    report("AC7", ok, "; ".join(parts) + f"; {elapsed:.1f}s")
    assert ok


BOUNDED = [
    (S, "<=", [Fraction(5, 2), 3, Fraction(7, 2), 5]),
    (RHO, ">", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]),
    (MU, ">", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]),
    (NU, ">", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]),
]
CERT_GRID = {
    "S": [Fraction(2) + Fraction(i, 5) for i in range(1, 41)],
    "rho": [Fraction(i, 40) for i in range(1, 40)],
    "mu": [Fraction(i, 40) for i in range(1, 40)],
    "nu": [Fraction(i, 40) for i in range(1, 40)],
}


def test_ac8_certificates():
    # the two paths are floating-point computations of the same finite sum;
    # agreement is required to accumulated rounding (1e-13)
    diff = 0.0
    for n in range(1, 201):
        for spec, rel, lams in BOUNDED:
            for lam in lams:
                dom = delta_domain(spec, lam, rel)
                a = coprime_riemann(TWO_OMEGA, dom, n, "mobius").value
                b = coprime_riemann(TWO_OMEGA, dom, n, "direct_gcd")
                assert b.tail_bound == 0
                diff = max(diff, abs(a - b.value))
    M = TWO_OMEGA.strip_bound()
    worst_ratio = 0.0
    for n in (50, 200, 1000):
        env = 2 / n * (1 + 5 * math.pi**2 / 6) * M
        for name, grid in CERT_GRID.items():
            for lam in grid:
                gap = abs(cdf_exact(SPECS[name], lam, n).value - ll.limit_cdf(name, float(lam)))
                worst_ratio = max(worst_ratio, gap / env)
    ok = diff <= 1e-13 and worst_ratio <= 1
    report("AC8", ok, f"mobius vs direct_gcd max diff {diff:.1e} over n<=200; max |F_n-F_inf|/envelope = {worst_ratio:.3f}")
    assert ok


def test_ac9_continuant_count():
    kappa = ex.rational(ll.KAPPA, 10**12)
    exact = continuant_count_mean(1000, kappa)
    mc = ex.mc_continuant_count(1000, kappa, 10**6, ex.AlphaSource(2025))
    mc_ok = abs(mc.mean - exact) <= 4 * mc.stderr
    cs = {"2": Fraction(2), "kappa": kappa, "kappa^2": ex.rational(ll.KAPPA**2, 10**12)}
    gen = {k: (continuant_count_mean(1000, c), ll.count_limit(float(c), "published")) for k, c in cs.items()}
    gen_ok = all(abs(a - b) <= 0.02 for a, b in gen.values())
    ok = abs(exact - 1) <= 0.02 and mc_ok and gen_ok
    gtxt = ", ".join(f"c={k}: {a:.4f} vs {b:.4f}" for k, (a, b) in gen.items())
    report(
        "AC9",
        ok,
        f"E[T](1000, kappa)={exact:.6f}; MC {mc.mean:.5f}+-{mc.stderr:.5f} ({'ok' if mc_ok else 'out'}); "
        f"general c against A log c / log 2: {gtxt} ({'ok' if gen_ok else 'out'})",
    )
    assert ok


def test_ac10_monte_carlo_vs_exact():
    n, M = 500, 10**6
    ws = ex.mc_windows(n, M, ex.AlphaSource(500))
    grids = {
        "S": [Fraction(21, 10) + Fraction(1, 5) * i for i in range(20)],
        "rho": [Fraction(i, 21) for i in range(1, 21)],
        "mu": [Fraction(i, 21) for i in range(1, 21)],
        "nu": [Fraction(i, 21) for i in range(1, 21)],
    }
    parts, ok = [], True
    for name, grid in grids.items():
        emp = ex.ecdf(ws, SPECS[name], grid)
        z = 0.0
        for lam, e in zip(grid, emp):
            F = cdf_exact(SPECS[name], lam, n).value
            sd = math.sqrt(max(F * (1 - F), 1e-300) / M)
            z = max(z, abs(e - F) / sd)
        ok &= z <= 4
        parts.append(f"{name} max z {z:.2f}")
    report("AC10", ok, "; ".join(parts) + f"; resampled {ws.resampled}/{M}")
    assert ok


UPPER = {"nu": lambda x, e: 1 / e, "rho": lambda x, e: x / e, "mu": lambda x, e: x + (1 - x) / e}


def test_ac11_closed_forms():
    worst = {}
    for g, up in UPPER.items():
        for eps in (1e-1, 1e-2, 1e-3):
            x0 = eps if g == "rho" else 0.0
            quad, _ = integrate.dblquad(
                lambda y, x: A * (1 + x + y) / (y * (x + y)), x0, 1, 1, lambda x: up(x, eps), epsabs=1e-12, epsrel=1e-12
            )
            worst[g] = max(worst.get(g, 0.0), abs(ll.cond_product_closed(g, eps) - quad))
    ok = all(v <= 1e-6 for v in worst.values())
    report("AC11", ok, "max |closed - 2-D quadrature|: " + ", ".join(f"{g} {v:.3e}" for g, v in worst.items()) + " (limit 1e-6)")
    assert ok
