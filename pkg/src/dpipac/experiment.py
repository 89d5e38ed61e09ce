"""Synthetic 2-D logistic classification experiment.

Features are standard bivariate Gaussian, labels are Bernoulli with a logistic
link on ``x @ w_star``, and the hypothesis space is a finite set of linear sign
classifiers with coordinates drawn uniformly from a box.  Under a uniform prior
we compare bound budgets across sample sizes and check by Monte Carlo that the
supremum KL gap exceeds each budget no more often than ``delta``.

Randomness: one master seed, with an independent stream per
``(purpose, index...)`` built from ``SeedSequence(seed, spawn_key=...)``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from . import bounds
from .divergences import binary_kl

HYPOTHESIS_STREAM = 1
POPULATION_STREAM = 2
TRIAL_STREAM = 3

FIGURE1_METHODS = (
    bounds.OCCAMS_RAZOR,
    bounds.D_ALPHA,
    bounds.HELLINGER_P,
    bounds.CHI_SQUARED,
    bounds.PAC_BAYES_POINT_MASS,
)
COVERAGE_METHODS = (
    bounds.OCCAMS_RAZOR,
    bounds.PAC_BAYES_POINT_MASS,
    bounds.D_ALPHA,
    bounds.HELLINGER_P,
    bounds.CHI_SQUARED,
)

FIGURE1_HEADER = ("method", "order", "n", "delta", "q_min", "kl_budget")
COVERAGE_HEADER = ("method", "order", "n", "trials", "violations", "frequency", "stderr")


def fmt(x: float | int | None) -> str:
    """17 significant digits for floats, plain ints, empty for missing."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple[int, ...] = (100, 200, 400, 800, 1600)
    hypothesis_count: int = 50
    box_half_width: float = 100.0
    w_star: tuple[float, float] = (0.5, 0.5)
    delta: float = 0.025
    seed: int = 0
    trials: int = 2000
    population_mc_samples: int = 1_000_000
    orders: tuple[float, ...] = (10.0, 1e3, 1e7)

    def __post_init__(self) -> None:
        if self.hypothesis_count < 1:
            raise ValueError("hypothesis_count must be >= 1")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n_values must be a nonempty list of integers >= 1")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must be in (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.population_mc_samples < 1:
            raise ValueError("population_mc_samples must be >= 1")
        if not self.box_half_width > 0:
            raise ValueError("box_half_width must be > 0")
        if len(self.w_star) != 2:
            raise ValueError("w_star must have two coordinates")
        if any(o <= 1 for o in self.orders):
            raise ValueError("orders must all be > 1")

    @property
    def q_min(self) -> float:
        return 1.0 / self.hypothesis_count


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


# --- data model -----------------------------------------------------------


def sample_hypotheses(config: ExperimentConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """``(hypothesis_count, 2)`` weights, uniform on the box.

    Without ``rng`` each hypothesis gets its own stream, so growing the space
    leaves the existing hypotheses unchanged.
    """
    b = config.box_half_width
    if rng is not None:
        return rng.uniform(-b, b, size=(config.hypothesis_count, 2))
    return np.array([stream(config.seed, HYPOTHESIS_STREAM, i).uniform(-b, b, size=2)
                     for i in range(config.hypothesis_count)])


def generate_dataset(n: int, w_star: Sequence[float], rng: np.random.Generator
                     ) -> tuple[np.ndarray, np.ndarray]:
    """``n`` samples: features ``(n, 2)`` and integer labels ``(n,)`` in {0, 1}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = rng.standard_normal((n, 2))
    p1 = expit(x @ np.asarray(w_star, dtype=float))
    y = (rng.random(n) < p1).astype(np.int8)
    return x, y


def predict(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Sign classifier; a score of exactly 0 predicts label 0."""
    return (x @ np.asarray(w, dtype=float).T > 0).astype(np.int8)


def zero_one_loss(x: Sequence[float], y: int, w: Sequence[float]) -> int:
    return int(predict(np.asarray(x, dtype=float), np.asarray(w, dtype=float)) != y)


def empirical_losses(x: np.ndarray, y: np.ndarray, hypotheses: np.ndarray) -> np.ndarray:
    """Mean 0-1 loss of every hypothesis on one dataset."""
    preds = predict(x, hypotheses)
    return (preds != y[:, None]).mean(axis=0)


def population_loss_oracle(h: Sequence[float], w_star: Sequence[float], mc_samples: int,
                           rng: np.random.Generator) -> float:
    """Monte Carlo estimate of the population 0-1 loss of ``h``.

    Uses the label probability directly rather than sampled labels, which
    keeps the standard error below ``0.5 / sqrt(mc_samples)``.
    """
    if mc_samples < 1:
        raise ValueError("mc_samples must be >= 1")
    x = rng.standard_normal((mc_samples, 2))
    p1 = expit(x @ np.asarray(w_star, dtype=float))
    pred = x @ np.asarray(h, dtype=float) > 0
    return float(np.where(pred, 1.0 - p1, p1).mean())


@dataclass(frozen=True)
class PopulationLosses:
    values: np.ndarray
    clamped: tuple[int, ...]


def population_losses(config: ExperimentConfig, hypotheses: np.ndarray) -> PopulationLosses:
    """Population loss per hypothesis, each from its own RNG stream, clamped to
    ``[1/(2m), 1 - 1/(2m)]`` so KL gaps stay finite."""
    m = config.population_mc_samples
    lo, hi = 1.0 / (2 * m), 1.0 - 1.0 / (2 * m)
    raw = np.array([
        population_loss_oracle(h, config.w_star, m, stream(config.seed, POPULATION_STREAM, i))
        for i, h in enumerate(hypotheses)
    ])
    values = np.clip(raw, lo, hi)
    clamped = tuple(int(i) for i in np.flatnonzero(values != raw))
    return PopulationLosses(values, clamped)


# --- trials ---------------------------------------------------------------


def coverage_budgets(config: ExperimentConfig, n: int) -> dict[tuple[str, float | None], float]:
    """Uniform-prior budget for each coverage method and order at sample size ``n``."""
    out = {}
    for method in COVERAGE_METHODS:
        orders = config.orders if method in bounds.ORDERED_METHODS else (None,)
        for order in orders:
            out[(method, order)] = bounds.rhs(method, n, config.delta, config.q_min, order)
    return out


@dataclass
class TrialRecord:
    trial_index: int
    n: int
    empirical_loss: np.ndarray
    population_loss: np.ndarray
    kl_gap: np.ndarray
    sup_kl_gap: float
    violations: dict[tuple[str, float | None], bool]
    clamped: tuple[int, ...] = field(default_factory=tuple)


def run_trial(config: ExperimentConfig, n: int, hypotheses: np.ndarray,
              population: PopulationLosses, trial_index: int,
              budgets: dict[tuple[str, float | None], float] | None = None) -> TrialRecord:
    """Draw a fresh training set and flag which budgets the worst KL gap exceeds."""
    rng = stream(config.seed, TRIAL_STREAM, n, trial_index)
    x, y = generate_dataset(n, config.w_star, rng)
    emp = empirical_losses(x, y, hypotheses)
    gaps = np.array([binary_kl(float(e), float(p)) for e, p in zip(emp, population.values)])
    sup_gap = float(gaps.max())
    if budgets is None:
        budgets = coverage_budgets(config, n)
    return TrialRecord(
        trial_index=trial_index,
        n=n,
        empirical_loss=emp,
        population_loss=population.values,
        kl_gap=gaps,
        sup_kl_gap=sup_gap,
        violations={key: sup_gap > b for key, b in budgets.items()},
        clamped=population.clamped,
    )


def _trial_block(config: ExperimentConfig, n: int, hypotheses: np.ndarray,
                 population: PopulationLosses, start: int, stop: int
                 ) -> list[tuple[int, float, dict]]:
    budgets = coverage_budgets(config, n)
    out = []
    for t in range(start, stop):
        rec = run_trial(config, n, hypotheses, population, t, budgets)
        out.append((t, rec.sup_kl_gap, rec.violations))
    return out


@dataclass(frozen=True)
class CoverageRow:
    method: str
    order: float | None
    n: int
    trials: int
    violations: int

    @property
    def frequency(self) -> float:
        return self.violations / self.trials

    @property
    def stderr(self) -> float:
        f = self.frequency
        return math.sqrt(f * (1.0 - f) / self.trials)


@dataclass
class CoverageReport:
    config: ExperimentConfig
    rows: list[CoverageRow]
    clamped: tuple[int, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COVERAGE_HEADER)
        for r in self.rows:
            w.writerow([r.method, fmt(r.order), r.n, r.trials, r.violations,
                        fmt(r.frequency), fmt(r.stderr)])
        return buf.getvalue()

    def max_frequency(self) -> float:
        return max(r.frequency for r in self.rows)


def coverage_estimate(config: ExperimentConfig, workers: int = 1,
                      block_size: int = 250) -> CoverageReport:
    """Violation frequency of every coverage method at every ``n``.

    Trials are split into blocks that may run on separate processes; each trial
    draws from its own stream and blocks are folded in trial order, so the
    report is identical for any ``workers``.
    """
    hypotheses = sample_hypotheses(config)
    population = population_losses(config, hypotheses)
    tasks = [(config, n, hypotheses, population, s, min(s + block_size, config.trials))
             for n in config.n_values
             for s in range(0, config.trials, block_size)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_block, *zip(*tasks)))
    else:
        results = [_trial_block(*t) for t in tasks]

    counts: dict[tuple[str, float | None, int], int] = {}
    for task, block in zip(tasks, results):
        n = task[1]
        for _, _, flags in block:
            for (method, order), hit in flags.items():
                key = (method, order, n)
                counts[key] = counts.get(key, 0) + int(hit)

    rows = []
    for method in COVERAGE_METHODS:
        orders = config.orders if method in bounds.ORDERED_METHODS else (None,)
        for order in orders:
            for n in config.n_values:
                rows.append(CoverageRow(method, order, n, config.trials, counts[(method, order, n)]))
    return CoverageReport(config, rows, population.clamped)


# --- budget comparison ----------------------------------------------------


def figure1_sweep(config: ExperimentConfig) -> list[bounds.SweepRow]:
    """Budgets of the compared bounds across ``n`` under a uniform prior.

    The budgets do not depend on the data, so this is one deterministic
    evaluation per row.
    """
    return bounds.sweep(FIGURE1_METHODS, config.n_values, config.delta, config.q_min,
                        config.orders)


def figure1_csv(rows: Sequence[bounds.SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIGURE1_HEADER)
    for r in rows:
        w.writerow([r.method, fmt(r.order), r.n, fmt(r.delta), fmt(r.q_min), fmt(r.kl_budget)])
    return buf.getvalue()
