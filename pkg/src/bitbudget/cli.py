"""Command-line entry point."""

import argparse
import json
import logging
import sys

import numpy as np

from . import inner
from .harness import ExperimentConfig, balls_bins_sim, rate_fit, run_sweep, verify_assumptions
from .harness.sweep import default_threads
from .models import ALL_MODELS, ModelKind
from .protocol import configure, truth_grid, worst_case_mse
from .regimes import RegimeParams, plan


def _csv_ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _emit(obj, out):
    text = json.dumps(obj, indent=2, default=float)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_regimes(args):
    p = RegimeParams(args.m, args.n, args.l, args.r)
    pl = plan(p, c3=args.c3, theory_constants=args.theory_constants)
    _emit(
        {"m": p.m, "n": p.n, "l": p.l, "r": p.r, "case": int(pl.case_id), "n_ess": pl.n_ess,
         "H": pl.H, "K": pl.K, "K0": pl.K0},
        args.out,
    )
    return 0


def cmd_simulate(args):
    p = RegimeParams(args.m, args.n, args.l, args.r)
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 1]))
    truths = truth_grid(args.model, args.r, args.k, rng, args.signs)
    ov = {"c3": args.c3, "theory_constants": args.theory_constants}
    if args.variant:
        ov["variant"] = args.variant
    res = worst_case_mse(p, args.model, truths, args.trials, args.seed, **ov)
    cfg = configure(p, args.model, **ov)
    _emit(
        {"m": p.m, "n": p.n, "l": p.l, "r": p.r, "model": ModelKind.parse(args.model).value,
         "case": int(cfg.plan.case_id), "n_ess": cfg.plan.n_ess, "K": cfg.plan.K, "K0": cfg.K0,
         "inner_variant": cfg.variant.value, "trials": args.trials, "mean_mse": res.mean_mse,
         "stderr": res.stderr, "worst_truth_k": truths[res.index].k, "transcript_bits": p.m * p.l},
        args.out,
    )
    return 0


def cmd_sweep(args):
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    points = run_sweep(cfg, out=args.out, threads=args.threads, resume=not args.fresh)
    print(f"{len(points)} rows in {args.out or cfg.output}")
    if args.fit:
        fit = rate_fit(points)
        print(json.dumps({"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}))
    return 0


def cmd_verify(args):
    models = ALL_MODELS if args.model == "all" else (ModelKind.parse(args.model),)
    ss = np.random.SeedSequence(args.seed)
    ok = True
    report = {}
    for model, child in zip(models, ss.spawn(len(models))):
        rep = verify_assumptions(model, args.r, args.k_grid, args.samples, np.random.default_rng(child))
        print(rep.summary())
        report[model.value] = {"passed": rep.passed, "checks": rep.checks, "constants": rep.constants}
        ok = ok and rep.passed
    if args.out:
        _emit(report, args.out)
    return 0 if ok else 1


def cmd_balls_bins(args):
    rng = np.random.default_rng(args.seed)
    grid = [(args.n, args.k)] if args.n and args.k else [(16, 64), (64, 64), (256, 16)]
    ok = True
    rows = []
    for n, k in grid:
        st = balls_bins_sim(n, k, args.trials, rng)
        mean_ok = st.mean_load_ok()
        ok = ok and mean_ok
        for chk in st.checks(args.c):
            ok = ok and chk.passed
            rows.append({"n": n, "k": k, "event": chk.event, "frequency": chk.frequency,
                         "bound": chk.bound, "se": chk.se, "passed": chk.passed})
            print(f"n={n:4d} k={k:3d} {chk.event:>12s} freq={chk.frequency:.4g} "
                  f"bound={chk.bound:.4g} {'pass' if chk.passed else 'FAIL'}")
        print(f"n={n:4d} k={k:3d} mean load n/k: {'pass' if mean_ok else 'FAIL'}")
    if args.out:
        _emit(rows, args.out)
    return 0 if ok else 1


def cmd_inner_bench(args):
    ss = np.random.SeedSequence(args.seed)
    p = np.random.default_rng(ss.spawn(1)[0]).dirichlet(np.ones(args.k))
    errs = []
    for child in ss.spawn(args.trials):
        data, pub, priv = [np.random.default_rng(c) for c in child.spawn(3)]
        samples = data.choice(args.k, size=(args.m, args.n), p=p)
        params = {"b_bits": args.b_bits} if args.b_bits else {}
        if args.variant == "quantized_frames" and not params:
            params["b_bits"] = min(args.l, inner.count_bits(args.n))
        tr, est = inner.run_inner(args.variant, args.k, args.m, args.n, args.l, samples, pub, priv, **params)
        errs.append(float(np.sum((est - p) ** 2)))
    errs = np.array(errs)
    _emit({"variant": args.variant, "k": args.k, "m": args.m, "n": args.n, "l": args.l,
           "trials": args.trials, "mse": errs.mean(), "stderr": errs.std(ddof=1) / np.sqrt(args.trials)},
          args.out)
    return 0


def cmd_plot(args):
    from .harness.plot import plot_sweep

    out = args.out or str(args.csv).rsplit(".", 1)[0] + ".svg"
    print(plot_sweep(args.csv, out))
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="root seed (default 0; sweeps default to the config seed)")
    common.add_argument("--out", default=None, help="output file")
    common.add_argument("--threads", type=int, default=default_threads())

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--m", type=int, required=True)
    point.add_argument("--n", type=int, required=True)
    point.add_argument("--l", type=int, required=True)
    point.add_argument("--r", type=float, default=0.8)
    point.add_argument("--c3", type=float, default=4.0)
    point.add_argument("--theory-constants", action="store_true")

    ap = argparse.ArgumentParser(prog="bitbudget", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("regimes", parents=[common, point], help="print the regime plan as JSON")
    s.set_defaults(func=cmd_regimes)

    s = sub.add_parser("simulate", parents=[common, point], help="run one configuration")
    s.add_argument("--model", default="density")
    s.add_argument("--k", type=_csv_ints, default=[8], help="sieve scales, comma separated")
    s.add_argument("--signs", type=int, default=1)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--variant", choices=[v.value for v in inner.ProtocolVariant])
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", parents=[common], help="run a sweep from a config file")
    s.add_argument("config")
    s.add_argument("--fit", action="store_true", help="print the log-log slope")
    s.add_argument("--fresh", action="store_true", help="ignore existing rows")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify-assumptions", parents=[common], help="Monte-Carlo assumption checks")
    s.add_argument("--model", default="all")
    s.add_argument("--r", type=float, default=0.8)
    s.add_argument("--k-grid", type=_csv_ints, default=[8, 16, 32])
    s.add_argument("--samples", type=int, default=100_000)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("balls-bins", parents=[common], help="maximum-load tail bounds")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--c", type=_csv_ints, default=[10, 20])
    s.add_argument("--trials", type=int, default=10_000)
    s.set_defaults(func=cmd_balls_bins)

    s = sub.add_parser("inner-bench", parents=[common], help="standalone inner-protocol MSE")
    s.add_argument("--variant", default="count_frames", choices=[v.value for v in inner.ProtocolVariant])
    s.add_argument("--k", type=int, default=8)
    s.add_argument("--m", type=int, default=64)
    s.add_argument("--n", type=int, default=16)
    s.add_argument("--l", type=int, default=20)
    s.add_argument("--b-bits", type=int)
    s.add_argument("--trials", type=int, default=200)
    s.set_defaults(func=cmd_inner_bench)

    s = sub.add_parser("plot", parents=[common], help="render a sweep CSV as SVG")
    s.add_argument("csv")
    s.set_defaults(func=cmd_plot)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed is None and args.command != "sweep":
        args.seed = 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, inner.BudgetTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
