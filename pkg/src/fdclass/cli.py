"""Command-line interface: ``fdclass {bench,classify,bayes,cv,simulate}``."""

from __future__ import annotations

import argparse
import logging
import sys
import traceback

import numpy as np

from .bayes import GeneralPair, PluginClassifier, bayes_classify, log_rn_general
from .bench import (
    RunConfig,
    monte_carlo,
    rates_csv,
    simulate,
    summary_csv,
    summary_table,
)
from .core import Grid, smooth_spline
from .exceptions import FDAError
from .gp import model1_population
from .io import load_csv, save_csv
from .selection import METHODS, default_grid, loo_cv_select, make_estimator

log = logging.getLogger("fdclass")

CLASSIFY_METHODS = ("knn", "knn-sup", "knn-l2", "mwr", "mwr-sup", "mwr-l2", "pls", "rkhs", "hmode", "rp")


def _method_id(method, metric):
    if method in ("knn", "mwr"):
        return f"{method}-{metric or 'sup'}"
    return method


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_bench(args):
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    cfg = RunConfig(
        model=args.model,
        runs=args.runs,
        train=args.train,
        test=args.test,
        nodes=args.nodes,
        seed=args.seed,
        methods=methods,
        smooth=args.smooth,
        basis_size=args.basis_size,
    )
    summary, rates = monte_carlo(cfg, n_jobs=args.jobs)
    title = f"Model {cfg.model}: {cfg.runs} runs, {cfg.train}+{cfg.train} train, {cfg.test}+{cfg.test} test, {cfg.nodes} nodes, seed {cfg.seed}"
    if cfg.smooth:
        title += " (spline-smoothed)"
    sys.stdout.write(summary_table(summary, title))
    if args.rates:
        _write(rates_csv(rates), args.rates)
    if args.summary:
        _write(summary_csv(summary), args.summary)
    return 0


def _load_pair(train_path, test_path):
    train = load_csv(train_path)
    test = load_csv(test_path)
    train.grid.require_same(test.grid, "training and test files")
    sample = train.sample
    if sample is None:
        raise FDAError(f"{train_path} has no labeled rows")
    return sample, test


def cmd_classify(args):
    sample, test = _load_pair(args.train, args.test)
    X_train, X_test = sample.X, test.X
    if args.smooth:
        X_train = smooth_spline(X_train, sample.grid)
        X_test = smooth_spline(X_test, sample.grid)
        sample = type(sample)(sample.grid, X_train, sample.y)
    method = _method_id(args.method, args.metric)
    cv = loo_cv_select(sample, method, random_state=args.seed)
    est = make_estimator(method, cv.params, sample.grid, random_state=args.seed)
    pred = est.fit(sample.X, sample.y).predict(X_test)
    lines = ["row,label"] + [f"{i},{int(p)}" for i, p in enumerate(pred)]
    _write("\n".join(lines) + "\n", args.out)
    log.info("method %s selected %s (LOO accuracy %.4f)", method, cv.params, cv.accuracy)
    mask = test.labeled
    if mask.any():
        acc = float(np.mean(pred[mask] == test.labels[mask]))
        print(f"test accuracy on {int(mask.sum())} labeled rows: {acc:.4f}", file=sys.stderr)
    return 0


def cmd_bayes(args):
    data = load_csv(args.test)
    pair = GeneralPair(model1_population(0), model1_population(1))
    clf = PluginClassifier(pair, args.prior)
    log_r = np.atleast_1d(log_rn_general(pair, data.X, data.grid))
    labels = np.atleast_1d(bayes_classify(data.X, clf, data.grid))
    lines = ["row,label,log_rn"] + [
        f"{i},{int(lab)},{format(float(lr), '.17g')}" for i, (lab, lr) in enumerate(zip(labels, log_r))
    ]
    _write("\n".join(lines) + "\n", args.out)
    mask = data.labeled
    if mask.any():
        acc = float(np.mean(labels[mask] == data.labels[mask]))
        print(f"plug-in accuracy on {int(mask.sum())} labeled rows: {acc:.4f}", file=sys.stderr)
    return 0


def cmd_cv(args):
    data = load_csv(args.train)
    sample = data.sample
    if sample is None:
        raise FDAError(f"{args.train} has no labeled rows")
    method = _method_id(args.method, args.metric)
    grid = default_grid(method, sample)
    cv = loo_cv_select(sample, method, grid, random_state=args.seed)
    print(f"method: {method}")
    print(f"selected: {', '.join(f'{k}={v:.6g}' for k, v in cv.params.items()) or '(no tuning parameters)'}")
    print(f"loo_accuracy: {cv.accuracy:.4f}")
    return 0


def cmd_simulate(args):
    grid = Grid.equispaced(args.nodes)
    rng = np.random.default_rng(args.seed)
    save_csv(simulate(args.model, args.n, grid, rng), args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="fdclass", description="Functional data classification toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="Monte Carlo comparison on a simulation model")
    p.add_argument("--model", type=int, choices=(1, 2), required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--train", type=int, default=100, help="training curves per class")
    p.add_argument("--test", type=int, default=50, help="test curves per class")
    p.add_argument("--nodes", type=int, default=51)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default=",".join(m for m in METHODS if m != "bayes"))
    p.add_argument("--smooth", action="store_true", help="spline-smooth all curves first")
    p.add_argument("--basis-size", type=int, default=None)
    p.add_argument("--rates", help="write per-run rates CSV here")
    p.add_argument("--summary", help="write the summary CSV here")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("classify", help="tune on a training file and label a test file")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--method", required=True, choices=CLASSIFY_METHODS)
    p.add_argument("--metric", choices=("sup", "l2"))
    p.add_argument("--smooth", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bayes", help="plug-in Bayes labels for Model 1 curves")
    p.add_argument("--model", type=int, choices=(1,), required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--prior", type=float, default=0.5, help="P(Y = 0)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bayes)

    p = sub.add_parser("cv", help="leave-one-out parameter selection on a training file")
    p.add_argument("--train", required=True)
    p.add_argument("--method", required=True, choices=CLASSIFY_METHODS)
    p.add_argument("--metric", choices=("sup", "l2"))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("simulate", help="write a balanced sample from a simulation model")
    p.add_argument("--model", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=int, required=True, help="curves per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=51)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def _failing_module(exc):
    name = "cli"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("fdclass.") and mod != "fdclass.cli":
            name = mod.split(".", 1)[1]
    return name


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (FDAError, OSError) as exc:
        print(f"fdclass: error in {_failing_module(exc)}: {exc}", file=sys.stderr)
        return 1


def run_cli(argv=None):
    """Run the CLI and return its exit code (usage errors give 2)."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1


if __name__ == "__main__":
    sys.exit(main())
