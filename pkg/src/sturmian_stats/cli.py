"""Command-line interface: every computation as a reproducible file-emitting subcommand.

Exit codes: 0 success, 1 computation refused, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import random
import sys
from fractions import Fraction
from typing import List, Sequence

from . import __version__
from .cf_core import DyadicSlope, cf_expand, parse_alpha
from .errors import ComputationRefused, DomainError
from .experiments import (
    AlphaSource,
    eps_rule,
    mc_cond_expectation,
    mc_continuant_count,
    mc_histogram,
    quotient_series,
    rational,
    secant_estimate,
    step_rule,
)
from .lattice_sums import TWO_OMEGA, cdf_exact, coprime_certificate, cond_expectation_exact, continuant_count_mean
from .limit_laws import KAPPA, cond_expectation_asymptotic, count_limit, density, limit_cdf, limit_cdf_geometric
from .qfunc import check_identities, parse_spec
from .sturmian_words import brute_recurrence, complexity, covers_all, recurrence_formula, sized_word

SEED_ENV = "STURMIAN_SEED"
SCHEMA_NAME = "output.schema.json"


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------


def _spec_arg(text: str):
    try:
        return parse_spec(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _grid_arg(text: str) -> List[Fraction]:
    """``lo:hi:step`` (endpoints included within half a step) or a comma list."""
    try:
        if ":" in text:
            lo, hi, step = (Fraction(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            if hi < lo:
                raise ValueError("empty grid")
            count = math.floor((hi - lo) / step + Fraction(1, 2))
            return [lo + i * step for i in range(count + 1)]
        return [Fraction(t) for t in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from exc


def _int_list(text: str) -> List[int]:
    try:
        out = [int(float(t)) for t in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc
    if any(v < 1 for v in out):
        raise argparse.ArgumentTypeError("values must be positive")
    return out


def _pos_int(text: str) -> int:
    try:
        v = int(float(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _c_arg(text: str) -> Fraction:
    t = text.strip().lower()
    if t in ("kappa", "κ"):
        return rational(KAPPA, 10**12)
    if t in ("kappa^2", "kappa2", "κ^2", "κ²"):
        return rational(KAPPA**2, 10**12)
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad constant {text!r}") from exc


def _alpha_arg(text: str):
    try:
        return parse_alpha(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _default_seed() -> int:
    try:
        return int(os.environ.get(SEED_ENV, "0"))
    except ValueError:
        return 0


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    return str(v)


def _jsonable(v):
    if isinstance(v, Fraction):
        return _fmt(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _config(args) -> dict:
    skip = {"func", "out", "format", "threads", "_raw"}
    cfg = {"subcommand": args.cmd, "version": __version__}
    for k, v in sorted(vars(args).items()):
        if k in skip or k == "cmd":
            continue
        cfg[k] = getattr(args, "_raw", {}).get(k, v if isinstance(v, (int, float, str, bool, type(None))) else str(v))
    return cfg


def emit(args, columns: Sequence[str], rows: Sequence[Sequence], meta: dict | None = None) -> str:
    cfg = _config(args)
    if args.format == "json":
        doc = {
            "config": cfg,
            "columns": list(columns),
            "rows": [[_jsonable(v) for v in r] for r in rows],
            "meta": {k: _jsonable(v) for k, v in (meta or {}).items()},
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
        for k, v in (meta or {}).items():
            buf.write(f"# {k}: {_fmt(v)}\n")
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_fmt(v) for v in r) + "\n")
        text = buf.getvalue()
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_cdf(args) -> int:
    bound = coprime_certificate(TWO_OMEGA, args.n)
    rows = []
    for lam in args.lam:
        fn = cdf_exact(args.spec, lam, args.n, args.tol, args.method).value
        if args.spec.name in ("S", "rho", "mu", "nu"):
            finf = limit_cdf(args.spec.name, float(lam))
        else:
            finf = limit_cdf_geometric(args.spec, lam)
        rows.append((lam, float(fn), finf, fn - finf, bound))
    emit(args, ("lambda", "F_n_exact", "F_inf", "diff", "certified_bound"), rows)
    return 0


def cmd_density(args) -> int:
    rows = [(lam, density(args.law, float(lam))) for lam in args.lam]
    emit(args, ("lambda", "density"), rows)
    return 0


def cmd_histogram(args) -> int:
    spec = args.spec
    src = AlphaSource(args.seed, args.bits)
    h = mc_histogram(spec, args.n, args.M, args.step, src, args.lo, args.hi, args.threads)
    scaled = h.scaled
    rows = []
    has_law = spec.name in ("S", "rho", "mu", "nu")
    for i, (a, b) in enumerate(zip(h.edges[:-1], h.edges[1:])):
        lim = density(spec.name, 0.5 * (a + b)) if has_law else float("nan")
        rows.append((float(a), float(b), int(h.counts[i]), float(scaled[i]), float(h.density[i]), lim))
    meta = {"underflow": h.underflow, "overflow": h.overflow, "samples": h.total, "step": h.step}
    emit(args, ("bin_lo", "bin_hi", "count", "scaled", "density_estimate", "density_limit"), rows, meta)
    return 0


def cmd_secant(args) -> int:
    rows = []
    for n in args.n:
        eps = eps_rule(args.eps_rule, n)
        for lam in args.lam:
            sec = secant_estimate(args.spec, n, lam, eps, args.tol)
            dens = density(args.spec.name, float(lam)) if args.spec.name in ("S", "rho", "mu", "nu") else float("nan")
            rows.append((n, lam, eps, sec, dens, sec - dens))
    emit(args, ("n", "lambda", "eps", "secant", "density", "diff"), rows)
    return 0


def cmd_condexp(args) -> int:
    rows = []
    src = AlphaSource(args.seed, args.bits)
    for n in args.n:
        eps = eps_rule(args.eps_rule, n)
        if args.exact:
            mean, se, acc = cond_expectation_exact(args.gamma, eps, n, args.tol), 0.0, float("nan")
        else:
            r = mc_cond_expectation(args.gamma, eps, n, args.M, src, args.threads)
            mean, se, acc = r.mean, r.stderr, r.accepted_fraction
        pub = cond_expectation_asymptotic(args.gamma, eps, "published")
        integ = cond_expectation_asymptotic(args.gamma, eps, "integral")
        rows.append((n, eps, mean, se, acc, pub, integ))
    emit(args, ("n", "eps", "mean", "stderr", "accepted_fraction", "asymptotic_published", "asymptotic_integral"), rows)
    return 0


def cmd_count(args) -> int:
    rows = []
    src = AlphaSource(args.seed, args.bits)
    for n in args.n:
        if args.exact:
            mean, se = continuant_count_mean(n, args.c, args.tol), 0.0
        else:
            r = mc_continuant_count(n, args.c, args.M, src, args.threads)
            mean, se = r.mean, r.stderr
        rows.append((n, args.c, mean, se, count_limit(args.c), count_limit(args.c, "published")))
    emit(args, ("n", "c", "mean", "stderr", "limit_integral", "limit_published"), rows)
    return 0


def cmd_series(args) -> int:
    rows = [(n, s, float(s)) for n, s in quotient_series(args.alpha, args.n_max)]
    emit(args, ("n", "S_exact", "S"), rows, {"alpha": args.alpha.describe()})
    return 0


def cmd_verify(args) -> int:
    rng = random.Random(args.seed)
    failures = []
    checked = 0
    for _ in range(args.samples):
        alpha = DyadicSlope(rng.getrandbits(args.bits) | 1, args.bits)
        w = sized_word(alpha, args.n_max)
        cf = cf_expand(alpha, stop=lambda k, q: q > 4 * args.n_max)
        for n in range(1, args.n_max + 1):
            checked += 1
            R = recurrence_formula(cf, n)
            got = brute_recurrence(w, n)
            if got != R:
                failures.append(("recurrence", alpha.describe(), n, R, got))
            if complexity(w, n) != n + 1:
                failures.append(("complexity", alpha.describe(), n, n + 1, complexity(w, n)))
            if not covers_all(w, n, R) or covers_all(w, n, R - 1):
                failures.append(("minimality", alpha.describe(), n, R, ""))
            try:
                check_identities(cf, n)
            except AssertionError as exc:
                failures.append(("identities", alpha.describe(), n, "", str(exc)))
    emit(args, ("check", "alpha", "n", "expected", "got"), failures, {"cases": checked, "failures": len(failures)})
    msg = "all checks passed" if not failures else f"{len(failures)} checks failed"
    print(msg, file=sys.stderr)
    return 0 if not failures else 1


def cmd_rerun(args) -> int:
    """Re-execute the configuration stamped in an output file."""
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        cfg = json.loads(text)["config"]
    else:
        line = next(l for l in text.splitlines() if l.startswith("# config: "))
        cfg = json.loads(line[len("# config: ") :])
    argv = config_to_argv(cfg)
    if args.out:
        argv += ["--out", args.out]
    argv += ["--format", args.format]
    return main(argv)


def config_to_argv(cfg: dict) -> List[str]:
    cfg = dict(cfg)
    cmd = cfg.pop("subcommand")
    cfg.pop("version", None)
    argv = [cmd]
    for k, v in cfg.items():
        if v is None or v is False:
            continue
        flag = "--" + k.replace("_", "-")
        if k == "lam":
            flag = "--lambda"
        if v is True:
            argv.append(flag)
        else:
            argv += [flag, str(v)]
    return argv


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _keep(parser, *flags, **kw):
    """add_argument that records the raw string in the stamp."""
    action = parser.add_argument(*flags, **kw)
    orig = action.type

    def typed(text, _orig=orig, _dest=action.dest):
        _RAW_SEEN[_dest] = text
        return _orig(text) if _orig else text

    action.type = typed
    return action


_RAW_SEEN: dict = {}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sturmian-stats", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, seeded=False):
        sp.add_argument("--out", default="-", help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--tol", type=float, default=1e-4)
        if seeded:
            sp.add_argument("--seed", type=int, default=_default_seed())
            sp.add_argument("--bits", type=int, default=128)

    sp = sub.add_parser("cdf", help="exact finite-n CDF against the limit law")
    _keep(sp, "--spec", type=_spec_arg, required=True)
    sp.add_argument("--n", type=_pos_int, required=True)
    _keep(sp, "--lambda", dest="lam", type=_grid_arg, required=True)
    sp.add_argument("--method", choices=("mobius", "direct_gcd"), default="mobius")
    common(sp)
    sp.set_defaults(func=cmd_cdf)

    sp = sub.add_parser("density", help="limit densities")
    sp.add_argument("--law", choices=("S", "rho", "mu", "nu"), required=True)
    _keep(sp, "--lambda", dest="lam", type=_grid_arg, required=True)
    common(sp)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("histogram", help="Monte Carlo histogram of a statistic")
    _keep(sp, "--spec", type=_spec_arg, required=True)
    sp.add_argument("--n", type=_pos_int, required=True)
    sp.add_argument("--M", type=_pos_int, default=10**6)
    sp.add_argument("--step", default="inv_sqrt_n")
    sp.add_argument("--lo", type=float, default=None)
    sp.add_argument("--hi", type=float, default=None)
    common(sp, seeded=True)
    sp.set_defaults(func=cmd_histogram)

    sp = sub.add_parser("secant", help="secant slopes of exact CDFs")
    _keep(sp, "--spec", type=_spec_arg, required=True)
    _keep(sp, "--n", type=_int_list, required=True)
    _keep(sp, "--lambda", dest="lam", type=_grid_arg, required=True)
    sp.add_argument("--eps-rule", default="inv_sqrt_n")
    common(sp)
    sp.set_defaults(func=cmd_secant)

    sp = sub.add_parser("condexp", help="E[S_n | Gamma_n >= eps]")
    sp.add_argument("--gamma", choices=("rho", "mu", "nu"), required=True)
    sp.add_argument("--eps-rule", default="inv_n")
    _keep(sp, "--n", type=_int_list, required=True)
    sp.add_argument("--M", type=_pos_int, default=10**6)
    sp.add_argument("--exact", action="store_true")
    common(sp, seeded=True)
    sp.set_defaults(func=cmd_condexp)

    sp = sub.add_parser("count", help="mean number of continuants in [n, c n)")
    _keep(sp, "--n", type=_int_list, required=True)
    _keep(sp, "--c", type=_c_arg, default=_c_arg("kappa"))
    sp.add_argument("--M", type=_pos_int, default=10**6)
    sp.add_argument("--exact", action="store_true")
    common(sp, seeded=True)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("series", help="exact recurrence quotients S(alpha, n)")
    _keep(sp, "--alpha", type=_alpha_arg, required=True)
    sp.add_argument("--n-max", type=_pos_int, required=True)
    common(sp)
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("verify", help="brute-force recurrence and identity suite")
    sp.add_argument("--n-max", type=_pos_int, default=50)
    sp.add_argument("--samples", type=_pos_int, default=100)
    common(sp, seeded=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("rerun", help="re-execute the config stamped in an output file")
    sp.add_argument("file")
    sp.add_argument("--out", default="-")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_rerun)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    _RAW_SEEN.clear()
    parser = build_parser()
    args = parser.parse_args(argv)
    args._raw = dict(_RAW_SEEN)
    if getattr(args, "n", 1) == 0 or getattr(args, "n_max", 1) == 0:
        parser.error("n must be >= 1")
    try:
        return args.func(args)
    except ComputationRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
