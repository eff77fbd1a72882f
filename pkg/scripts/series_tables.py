"""Recurrence quotient S(alpha, n) for n <= n_max at alpha = phi^2 and alpha = 1/e."""

import argparse
import os

from sturmian_stats.cli import main as cli

SLOPES = {
    "phi2": "cf:2,(1)*",
    # 50 decimals of 1/e; the quotients are exact far beyond n_max
    "inv_e": "dec:0.36787944117144232159552377016146086744581113103177",
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=1000)
    ap.add_argument("--outdir", default="results/series")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    for tag, desc in SLOPES.items():
        path = os.path.join(args.outdir, f"series_{tag}.csv")
        cli(["series", "--alpha", desc, "--n-max", str(args.n_max), "--out", path])
        print(path)
