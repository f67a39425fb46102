"""Monte Carlo comparison of the classifiers on the two simulation models.

Each replication draws a balanced training sample and a balanced test sample,
tunes every method by leave-one-out on the training sample, and records the
proportion of correctly classified test curves.  Replication ``r`` draws from
its own child of ``SeedSequence(seed)``, so its result does not depend on which
other replications run.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .core import Grid, LabeledSample, smooth_spline
from .exceptions import ParameterError, UnsupportedError
from .gp import model1_population, model2_sample, sample_gaussian_paths
from .selection import METHODS, ALIASES, loo_cv_select, make_estimator

__all__ = [
    "RunConfig",
    "SummaryStats",
    "simulate",
    "run_replication",
    "monte_carlo",
    "summary_table",
    "summary_csv",
    "rates_csv",
    "QUARTILE_CONVENTION",
]

log = logging.getLogger(__name__)

QUARTILE_CONVENTION = "quartiles: median of the lower/upper half (median excluded when n is odd)"


@dataclass(frozen=True)
class RunConfig:
    """Design of a Monte Carlo study (defaults reproduce the published design)."""

    model: int = 1
    runs: int = 100
    train: int = 100
    test: int = 50
    nodes: int = 51
    seed: int = 0
    methods: tuple = ("knn-sup", "knn-l2", "pls", "rkhs", "hmode", "rp", "mwr")
    smooth: bool = False
    basis_size: int = None
    grids: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in (1, 2):
            raise ParameterError(f"model must be 1 or 2, got {self.model}")
        for name in ("runs", "train", "test", "nodes"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be positive")
        if self.nodes < 2:
            raise ParameterError("at least two nodes are required")
        methods = tuple(str(m).lower() for m in self.methods)
        bad = [m for m in methods if m not in METHODS and m not in ALIASES]
        if bad:
            raise ParameterError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
        if self.model == 2 and "bayes" in methods:
            raise UnsupportedError("the plug-in Bayes rule needs Gaussian classes (model 1 only)")
        object.__setattr__(self, "methods", methods)

    @property
    def grid(self):
        return Grid.equispaced(self.nodes)


@dataclass(frozen=True)
class SummaryStats:
    minimum: float
    q1: float
    median: float
    mean: float
    q3: float
    maximum: float
    sd: float
    n: int

    @classmethod
    def from_rates(cls, rates):
        """Summaries of per-replication rates; quartiles by median-of-halves."""
        r = np.sort(np.asarray(rates, dtype=float))
        n = r.size
        if n == 0:
            raise ParameterError("no rates to summarize")
        half = n // 2
        lower, upper = r[:half], r[n - half :]
        q1 = float(np.median(lower)) if half else float(r[0])
        q3 = float(np.median(upper)) if half else float(r[0])
        sd = float(np.std(r, ddof=1)) if n > 1 else 0.0
        return cls(float(r[0]), q1, float(np.median(r)), float(r.mean()), q3, float(r[-1]), sd, n)

    def as_row(self):
        return [self.minimum, self.q1, self.median, self.mean, self.q3, self.maximum, self.sd]


def simulate(model, n_per_class, grid, rng):
    """Balanced labelled sample (class 0 first) from benchmark model 1 or 2."""
    parts = []
    for i in (0, 1):
        if model == 1:
            parts.append(sample_gaussian_paths(model1_population(i), grid, n_per_class, rng))
        else:
            parts.append(model2_sample(i, grid, n_per_class, rng))
    y = np.repeat([0, 1], n_per_class)
    return LabeledSample(grid, np.vstack(parts), y)


def _streams(cfg, rep):
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(rep,))
    train_ss, test_ss, method_ss = ss.spawn(3)
    return (
        np.random.default_rng(train_ss),
        np.random.default_rng(test_ss),
        int(method_ss.generate_state(1)[0]),
    )


def run_replication(cfg, rep):
    """Correct-classification rate of each method on replication ``rep``.

    Returns a dict ``method -> rate`` with rates over the pooled test set.
    """
    grid = cfg.grid
    rng_train, rng_test, method_seed = _streams(cfg, rep)
    train = simulate(cfg.model, cfg.train, grid, rng_train)
    test = simulate(cfg.model, cfg.test, grid, rng_test)
    if cfg.smooth:
        s_train = LabeledSample(grid, smooth_spline(train.X, grid, cfg.basis_size), train.y)
        s_test_X = smooth_spline(test.X, grid, cfg.basis_size)
    else:
        s_train, s_test_X = train, test.X
    rates = {}
    for method in cfg.methods:
        if method == "bayes":
            est = make_estimator("bayes", {"prior": 0.5}, grid).fit(train.X, train.y)
            pred = est.predict(test.X)
        else:
            cv = loo_cv_select(s_train, method, cfg.grids.get(method), random_state=method_seed)
            est = make_estimator(method, cv.params, grid, random_state=method_seed)
            pred = est.fit(s_train.X, s_train.y).predict(s_test_X)
        rates[method] = float(np.mean(pred == test.y))
    return rates


def monte_carlo(cfg, reps=None, n_jobs=1):
    """Run the study and summarize it.

    Parameters
    ----------
    cfg : RunConfig
    reps : iterable of int, optional
        Replication indices to run; defaults to ``range(cfg.runs)``.
    n_jobs : int
        Parallel workers; results are folded in replication order either way.

    Returns
    -------
    summary : dict
        ``method -> SummaryStats``.
    rates : dict
        ``method -> ndarray`` of per-replication rates.
    """
    reps = list(range(cfg.runs) if reps is None else reps)
    if n_jobs == 1:
        results = []
        for r in reps:
            results.append(run_replication(cfg, r))
            log.debug("replication %d: %s", r, results[-1])
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(run_replication)(cfg, r) for r in reps)
    rates = {m: np.array([res[m] for res in results]) for m in cfg.methods}
    summary = {m: SummaryStats.from_rates(v) for m, v in rates.items()}
    return summary, rates


_ROW_NAMES = (
    "Minimum",
    "First quartile",
    "Median",
    "Mean",
    "Third quartile",
    "Maximum",
    "Std. deviation",
)


def summary_table(summary, title=None):
    """Plain-text table: statistics as rows, methods as columns."""
    methods = list(summary)
    width = max(10, *(len(m) + 2 for m in methods))
    lines = []
    if title:
        lines.append(title)
    lines.append(f"# {QUARTILE_CONVENTION}")
    lines.append(" " * 16 + "".join(m.rjust(width) for m in methods))
    for i, name in enumerate(_ROW_NAMES):
        cells = "".join(f"{summary[m].as_row()[i]:.4f}".rjust(width) for m in methods)
        lines.append(name.ljust(16) + cells)
    return "\n".join(lines) + "\n"


def summary_csv(summary):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "min", "q1", "median", "mean", "q3", "max", "sd"])
    for m, st in summary.items():
        w.writerow([m, *(f"{v:.6f}" for v in st.as_row())])
    return buf.getvalue()


def rates_csv(rates, reps=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rep", "method", "rate"])
    methods = list(rates)
    n = len(next(iter(rates.values()))) if rates else 0
    reps = list(range(n) if reps is None else reps)
    for i, r in enumerate(reps):
        for m in methods:
            w.writerow([r, m, repr(float(rates[m][i]))])
    return buf.getvalue()
