"""Mean number of continuants in [n, c n): exact lattice value, Monte Carlo and both limit formulas."""

import argparse

from sturmian_stats.experiments import AlphaSource, mc_continuant_count, rational
from sturmian_stats.lattice_sums import continuant_count_mean
from sturmian_stats.limit_laws import KAPPA, count_limit

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--M", type=int, default=10**5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    print("c,exact,mc_mean,mc_stderr,limit_integral,limit_published")
    for label, c in (("2", 2), ("3", 3), ("kappa", KAPPA), ("kappa^2", KAPPA**2)):
        c = rational(c, 10**12)
        mc = mc_continuant_count(args.n, c, args.M, AlphaSource(args.seed))
        print(
            f"{label},{continuant_count_mean(args.n, c):.6f},{mc.mean:.5f},{mc.stderr:.5f},"
            f"{count_limit(float(c)):.6f},{count_limit(float(c), 'published'):.6f}"
        )
