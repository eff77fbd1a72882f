"""Error of the exact finite-n CDF and of secant density estimates against the limit.

Prints P[S_n <= 3] - (6/pi^2) log^2 2 over a range of n, which shows the
oscillating O(1/n) error, and the worst secant error on a fixed grid.
"""

import argparse
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List

from sturmian_stats.experiments import eps_rule, secant_estimate
from sturmian_stats.lattice_sums import cdf_exact
from sturmian_stats.limit_laws import density
from sturmian_stats.qfunc import NU, S


@dataclass
class Config:
    ns: List[int] = field(default_factory=lambda: [1000, 1001, 1500, 2000, 3000, 4000, 8000, 16000])
    eps: str = "inv_sqrt_n"


def cdf_errors(cfg: Config) -> None:
    target = 6 / math.pi**2 * math.log(2) ** 2
    print("n,err,n*err")
    for n in cfg.ns:
        e = cdf_exact(S, 3, n).value - target
        print(f"{n},{e:.6e},{n * e:.4f}")


def secant_errors(cfg: Config) -> None:
    grids = {
        "S": [Fraction(21, 10) + Fraction(8, 90) * i for i in range(10)] + [Fraction(31, 10) + Fraction(29, 90) * i for i in range(10)],
        "nu": [Fraction(1, 10) + Fraction(8, 190) * i for i in range(20)],
    }
    specs = {"S": S, "nu": NU}
    print("spec,n,max_secant_error")
    for name, grid in grids.items():
        for n in cfg.ns:
            eps = eps_rule(cfg.eps, n)
            err = max(abs(secant_estimate(specs[name], n, lam, eps) - density(name, float(lam))) for lam in grid)
            print(f"{name},{n},{err:.6e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", type=lambda t: [int(v) for v in t.split(",")], default=Config().ns)
    ap.add_argument("--eps", default="inv_sqrt_n")
    cfg = Config(**vars(ap.parse_args()))
    cdf_errors(cfg)
    secant_errors(cfg)
