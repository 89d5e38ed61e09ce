"""Change-of-measure upper bounds on ``P(E)`` from ``Q(E)`` and a divergence.

Each bound comes from pushing ``P`` and ``Q`` through the two-output kernel
that indicates membership in ``E`` and applying data processing.  The
exhaustive checker in :func:`verify_lemmas` compares every bound against the
exact ``P(E)`` on random small supports.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .divergences import (
    DiscreteDistribution,
    MarkovKernel,
    chi_squared_divergence,
    dpi_check,
    hellinger_log_moment,
    renyi_divergence,
)

SLACK = 1e-12
DEFAULT_ORDERS = (1.5, 2.0, 5.0, 10.0, 100.0)
PARTITION_SIZE = 500


@dataclass(frozen=True)
class ComBoundResult:
    """Upper bound on ``P(E)``, capped at 1.

    ``applicable`` is False when a precondition visibly fails; the bound is
    still reported but carries no guarantee.
    """

    p_event_bound: float
    applicable: bool = True
    precondition_note: str = ""


def _from_log(log_bound: float) -> float:
    if log_bound >= 0.0:
        return 1.0
    return math.exp(log_bound)


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def renyi_com_bound(q_event: float, d_alpha: float, alpha: float) -> ComBoundResult:
    """``Q(E)^((a-1)/a) * exp((a-1)/a * D_a(P||Q))``."""
    if not alpha > 1:
        raise ValueError(f"alpha must be > 1, got {alpha!r}")
    if math.isinf(d_alpha):
        return ComBoundResult(1.0, True, "infinite divergence: trivial bound")
    k = (alpha - 1.0) / alpha
    return ComBoundResult(_from_log(k * (_safe_log(q_event) + d_alpha)))


def hellinger_com_bound_from_log_moment(
    q_event: float, log_moment: float, p: float
) -> ComBoundResult:
    """Same as :func:`hellinger_com_bound` with ``ln((p-1) H^p + 1)`` given directly."""
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p!r}")
    if q_event >= 0.5:
        note = "Q(E) >= 1/2: precondition violated, bound carries no guarantee"
        applicable = False
    else:
        note = "valid only if P(E) < 1/2 as well (not checkable from these inputs)"
        applicable = True
    if math.isinf(log_moment):
        return ComBoundResult(1.0, applicable, note)
    # ln(1 + Q(E)^(1-p)) without forming the power
    log_one_plus = np.logaddexp(0.0, (1.0 - p) * _safe_log(q_event)) if q_event > 0 else math.inf
    log_bound = (log_moment - log_one_plus) / p
    return ComBoundResult(_from_log(float(log_bound)), applicable, note)


def hellinger_com_bound(q_event: float, h_p: float, p: float) -> ComBoundResult:
    """``[1 + Q(E)^(1-p)]^(-1/p) * [(p-1) H^p(P||Q) + 1]^(1/p)``.

    Requires ``P(E) < 1/2`` and ``Q(E) < 1/2``.  Only the ``Q(E)`` half can be
    checked here; ``applicable`` is False when it fails.
    """
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p!r}")
    log_moment = math.inf if math.isinf(h_p) else math.log1p((p - 1.0) * h_p)
    return hellinger_com_bound_from_log_moment(q_event, log_moment, p)


def chi2_com_bound(q_event: float, chi2: float) -> ComBoundResult:
    """``sqrt(Q(E) * (chi^2(P||Q) + 2))``."""
    if math.isinf(chi2):
        return ComBoundResult(1.0, True, "infinite divergence: trivial bound")
    return ComBoundResult(min(1.0, math.sqrt(q_event * (chi2 + 2.0))))


@dataclass
class VerificationReport:
    trials: int
    applicable: int
    violations: int
    max_slack_observed: float
    seed: int
    checks: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _random_distribution(rng: np.random.Generator, k: int) -> DiscreteDistribution:
    m = rng.exponential(size=k)
    return DiscreteDistribution(m / m.sum())


def _random_kernel(rng: np.random.Generator, k_in: int, k_out: int) -> MarkovKernel:
    m = rng.exponential(size=(k_in, k_out))
    return MarkovKernel(m / m.sum(axis=1, keepdims=True))


class _Tally:
    def __init__(self) -> None:
        self.checks: dict[str, dict[str, int]] = {}
        self.applicable = 0
        self.violations = 0
        self.worst = -math.inf

    def record(self, name: str, lhs: float, rhs: float, applicable: bool = True) -> None:
        entry = self.checks.setdefault(name, {"evaluated": 0, "applicable": 0, "violations": 0})
        entry["evaluated"] += 1
        if not applicable:
            return
        entry["applicable"] += 1
        self.applicable += 1
        excess = lhs - rhs
        self.worst = max(self.worst, excess)
        if excess > SLACK:
            entry["violations"] += 1
            self.violations += 1

    def merge(self, other: "_Tally") -> None:
        for name, counts in other.checks.items():
            entry = self.checks.setdefault(name, {"evaluated": 0, "applicable": 0, "violations": 0})
            for key, value in counts.items():
                entry[key] += value
        self.applicable += other.applicable
        self.violations += other.violations
        self.worst = max(self.worst, other.worst)


def _run_partition(
    seed: int,
    partition: int,
    trials: int,
    max_support: int,
    orders: tuple[float, ...],
    force_equal: bool,
    inject_slack: float,
) -> _Tally:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(partition,)))
    tally = _Tally()
    for _ in range(trials):
        k = int(rng.integers(2, max_support + 1))
        P = _random_distribution(rng, k)
        Q = P if force_equal else _random_distribution(rng, k)
        event = rng.random(k) < 0.5
        p_e, q_e = P.probability(event), Q.probability(event)

        chi2 = chi_squared_divergence(P, Q)
        tally.record("chi_squared", p_e, chi2_com_bound(q_e, chi2).p_event_bound - inject_slack)
        for order in orders:
            d = renyi_divergence(P, Q, order)
            bound = renyi_com_bound(q_e, d, order).p_event_bound - inject_slack
            tally.record(f"renyi[{order:g}]", p_e, bound)

            res = hellinger_com_bound_from_log_moment(q_e, hellinger_log_moment(P, Q, order), order)
            gated = res.applicable and p_e < 0.5
            tally.record(f"hellinger[{order:g}]", p_e, res.p_event_bound - inject_slack, gated)

        kernel = _random_kernel(rng, k, int(rng.integers(1, max_support + 1)))
        for kind, order in [("renyi", orders[0]), ("renyi", orders[-1]), ("chi_squared", None),
                            ("kl", None)]:
            after, before = dpi_check(kernel, P, Q, kind, order)
            label = f"dpi_{kind}" if order is None else f"dpi_{kind}[{order:g}]"
            tally.record(label, after, before - inject_slack)
    return tally


def verify_lemmas(
    trials: int,
    max_support: int,
    seed: int,
    orders: tuple[float, ...] = DEFAULT_ORDERS,
    *,
    force_equal: bool = False,
    inject_slack: float = 0.0,
    workers: int = 1,
) -> VerificationReport:
    """Check all three change-of-measure bounds and a set of data-processing
    inequalities on random instances.

    Instances are drawn in fixed-size partitions, each with its own RNG stream
    derived from ``(seed, partition)``, so the report does not depend on
    ``workers``.  ``inject_slack`` subtracts a constant from every right-hand
    side; it exists only to exercise the failure path.
    ``max_slack_observed`` is the largest ``lhs - rhs`` seen (negative when
    every inequality holds strictly).
    """
    if max_support < 2:
        raise ValueError("max_support must be >= 2")
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    sizes = [min(PARTITION_SIZE, trials - start) for start in range(0, trials, PARTITION_SIZE)]
    args = [(seed, i, n, max_support, tuple(orders), force_equal, inject_slack)
            for i, n in enumerate(sizes)]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_partition, *zip(*args)))
    else:
        parts = [_run_partition(*a) for a in args]
    total = _Tally()
    for part in parts:
        total.merge(part)
    worst = total.worst if total.applicable else 0.0
    return VerificationReport(
        trials=trials,
        applicable=total.applicable,
        violations=total.violations,
        max_slack_observed=worst,
        seed=seed,
        checks=dict(sorted(total.checks.items())),
    )

