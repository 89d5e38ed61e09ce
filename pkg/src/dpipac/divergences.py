"""Divergences between finite discrete distributions and the binary KL function.

All power sums ``sum_x P(x)**a * Q(x)**b`` are accumulated in the log domain so
that orders around 1e7 do not overflow.  Zero-mass conventions: ``0 * ln 0 = 0``
and any point with ``P(x) > 0 = Q(x)`` makes an order > 1 divergence infinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

NORMALIZATION_TOL = 1e-9
KL_INVERSE_ITERATIONS = 100


class DimensionError(ValueError):
    """Raised when supports or kernel alphabets do not line up."""


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability masses over the finite support ``{0, ..., k-1}``."""

    masses: np.ndarray

    def __init__(self, masses: Sequence[float] | np.ndarray):
        arr = np.array(masses, dtype=float).reshape(-1)
        if arr.size < 1:
            raise ValueError("distribution needs at least one support point")
        total = float(arr.sum())
        if not math.isfinite(total):
            raise ValueError("masses must be finite")
        if arr.min() < 0:
            raise ValueError("masses must be nonnegative")
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"masses sum to {total!r}, expected 1 within {NORMALIZATION_TOL}")
        arr.setflags(write=False)
        object.__setattr__(self, "masses", arr)

    @classmethod
    def bernoulli(cls, p: float) -> "DiscreteDistribution":
        """Two-point distribution ``(1 - p, p)``; index 1 is the event."""
        return cls([1.0 - p, p])

    @classmethod
    def uniform(cls, k: int) -> "DiscreteDistribution":
        return cls(np.full(k, 1.0 / k))

    @property
    def size(self) -> int:
        return int(self.masses.size)

    @property
    def min_mass(self) -> float:
        """Smallest mass on the support (``Q_min`` when this is a prior)."""
        return float(self.masses.min())

    def probability(self, event: Sequence[bool] | np.ndarray) -> float:
        mask = np.asarray(event, dtype=bool)
        if mask.shape != self.masses.shape:
            raise DimensionError(f"event of length {mask.size} on support of size {self.size}")
        return float(self.masses[mask].sum())

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return np.array_equal(self.masses, other.masses)

    def __repr__(self) -> str:
        return f"DiscreteDistribution({self.masses.tolist()!r})"


@dataclass(frozen=True, eq=False)
class MarkovKernel:
    """Row-stochastic matrix: ``rows[x][y] = W(y | x)``."""

    matrix: np.ndarray

    def __init__(self, rows: Sequence[Sequence[float]] | np.ndarray):
        mat = np.array(rows, dtype=float)
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise DimensionError("kernel must be a nonempty 2-D array (inputs x outputs)")
        sums = mat.sum(axis=1)
        if not np.all(np.isfinite(sums)) or mat.min() < 0:
            raise ValueError("kernel entries must be finite and nonnegative")
        if np.max(np.abs(sums - 1.0)) > NORMALIZATION_TOL:
            raise ValueError(f"kernel rows must sum to 1 within {NORMALIZATION_TOL}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, k: int) -> "MarkovKernel":
        return cls(np.eye(k))

    @classmethod
    def event_indicator(cls, event: Sequence[bool] | np.ndarray) -> "MarkovKernel":
        """Kernel sending ``x`` to output 1 if ``x`` is in the event, else 0."""
        mask = np.asarray(event, dtype=bool)
        mat = np.zeros((mask.size, 2))
        mat[mask, 1] = 1.0
        mat[~mask, 0] = 1.0
        return cls(mat)

    @property
    def input_size(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def output_size(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def rows(self) -> list[DiscreteDistribution]:
        return [DiscreteDistribution(r) for r in self.matrix]


def _check_pair(P: DiscreteDistribution, Q: DiscreteDistribution) -> None:
    if P.size != Q.size:
        raise DimensionError(f"support sizes differ: {P.size} vs {Q.size}")


def _logsumexp(a: np.ndarray) -> float:
    # scipy.special.logsumexp costs ~100x more on the tiny arrays used here
    m = float(a.max())
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.exp(a - m).sum()))


def _log_power_sum(P: DiscreteDistribution, Q: DiscreteDistribution, order: float) -> float:
    """``ln sum_x P(x)**order * Q(x)**(1 - order)`` for ``order > 1``.

    Points with ``P(x) = 0`` contribute nothing; ``P(x) > 0 = Q(x)`` gives +inf.
    """
    p, q = P.masses, Q.masses
    support = p > 0
    qs = q[support]
    if qs.min() == 0:
        return math.inf
    lp = np.log(p[support])
    lq = np.log(qs)
    return _logsumexp(order * lp + (1.0 - order) * lq)


def binary_kl(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q), in nats."""
    if q <= 0.0:
        return 0.0 if p <= 0.0 else math.inf
    if q >= 1.0:
        return 0.0 if p >= 1.0 else math.inf
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * (math.log1p(-p) - math.log1p(-q))
    return max(out, 0.0)


def kl_inverse_upper(p_hat: float, budget: float) -> float:
    """Largest ``q >= p_hat`` with ``binary_kl(p_hat, q) <= budget``.

    Plain bisection on ``[p_hat, 1)`` for a fixed number of halvings, which is
    well past double resolution and needs no derivative at ``p_hat`` in {0, 1}.
    """
    if not math.isfinite(budget) or budget < 0:
        raise ValueError(f"budget must be finite and nonnegative, got {budget!r}")
    if p_hat >= 1.0:
        return 1.0
    if budget == 0.0:
        return p_hat
    lo, hi = p_hat, 1.0
    for _ in range(KL_INVERSE_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if binary_kl(p_hat, mid) > budget:
            hi = mid
        else:
            lo = mid
    return lo


def pinsker_risk_bound(p_hat: float, budget: float) -> float:
    """Additive relaxation ``p_hat + sqrt(budget / 2)``, capped at 1."""
    if not math.isfinite(budget) or budget < 0:
        raise ValueError(f"budget must be finite and nonnegative, got {budget!r}")
    return min(1.0, p_hat + math.sqrt(budget / 2.0))


def renyi_divergence(P: DiscreteDistribution, Q: DiscreteDistribution, alpha: float) -> float:
    """Rényi divergence of order ``alpha > 1`` in nats."""
    if not alpha > 1:
        raise ValueError(f"alpha must be > 1, got {alpha!r}")
    _check_pair(P, Q)
    log_sum = _log_power_sum(P, Q, alpha)
    if math.isinf(log_sum):
        return math.inf
    return max(log_sum / (alpha - 1.0), 0.0)


def chi_squared_divergence(P: DiscreteDistribution, Q: DiscreteDistribution) -> float:
    _check_pair(P, Q)
    p, q = P.masses, Q.masses
    support = p > 0
    if np.any(q[support] == 0):
        return math.inf
    return max(float(np.sum(p[support] ** 2 / q[support])) - 1.0, 0.0)


def hellinger_log_moment(P: DiscreteDistribution, Q: DiscreteDistribution, p: float) -> float:
    """``ln((p - 1) * H^p(P||Q) + 1)``, finite even where ``H^p`` overflows."""
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p!r}")
    _check_pair(P, Q)
    return _log_power_sum(P, Q, p)


def hellinger_p_divergence(P: DiscreteDistribution, Q: DiscreteDistribution, p: float) -> float:
    """Hellinger divergence of order ``p > 1``.

    Returns +inf past the double range (about ``exp(709) / (p - 1)``); use
    :func:`hellinger_log_moment` when large orders make that likely.
    """
    log_sum = hellinger_log_moment(P, Q, p)
    if math.isinf(log_sum):
        return math.inf
    with np.errstate(over="ignore"):
        value = math.expm1(log_sum) if log_sum < 709.0 else math.inf
    return max(value / (p - 1.0), 0.0)


def _assert_convex(f: Callable[[float], float]) -> None:
    grid = (0.01, 1.0, 100.0)
    for a, b in ((grid[0], grid[1]), (grid[1], grid[2]), (grid[0], grid[2])):
        fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
        if fm > 0.5 * (fa + fb) + 1e-12 * (1.0 + abs(fa) + abs(fb)):
            raise ValueError(f"generator fails the midpoint convexity check on [{a}, {b}]")


def f_divergence(
    P: DiscreteDistribution,
    Q: DiscreteDistribution,
    f: Callable[[float], float],
    slope_at_infinity: float | None = None,
) -> float:
    """``sum_x Q(x) f(P(x) / Q(x))`` for a convex generator with ``f(1) = 0``.

    Points with ``Q(x) = 0 < P(x)`` contribute ``P(x) * slope_at_infinity`` when
    the slope is supplied, otherwise the divergence is +inf.  The convexity
    check is a cheap spot check on [0.01, 100]; convexity remains the caller's
    responsibility.
    """
    _check_pair(P, Q)
    if abs(f(1.0)) > 1e-9:
        raise ValueError(f"generator must satisfy f(1) = 0, got {f(1.0)!r}")
    _assert_convex(f)
    total = 0.0
    for px, qx in zip(P.masses, Q.masses):
        if qx > 0:
            total += qx * f(px / qx)
        elif px > 0:
            if slope_at_infinity is None or math.isinf(slope_at_infinity):
                return math.inf
            total += px * slope_at_infinity
    return max(total, 0.0)


def kl_generator(t: float) -> float:
    return t * math.log(t) if t > 0 else 0.0


def chi_squared_generator(t: float) -> float:
    return t * t - 1.0


def hellinger_generator(p: float) -> Callable[[float], float]:
    def f(t: float) -> float:
        return (t**p - 1.0) / (p - 1.0)

    return f


def pushforward(K: MarkovKernel, P: DiscreteDistribution) -> DiscreteDistribution:
    """Output distribution ``P_Y(y) = sum_x K(y|x) P(x)``."""
    if K.input_size != P.size:
        raise DimensionError(f"kernel takes {K.input_size} inputs, distribution has {P.size}")
    out = P.masses @ K.matrix
    # rows and P each sum to 1 within tolerance; renormalize the rounding only
    return DiscreteDistribution(out / out.sum())


DIVERGENCES = ("renyi", "chi_squared", "hellinger", "kl")


def divergence(
    P: DiscreteDistribution,
    Q: DiscreteDistribution,
    kind: str,
    order: float | None = None,
    generator: Callable[[float], float] | None = None,
) -> float:
    """Dispatch by name: ``renyi``, ``hellinger`` (need ``order``), ``chi_squared``,
    ``kl``, or ``f`` (needs ``generator``)."""
    if kind == "renyi":
        return renyi_divergence(P, Q, _need_order(order, kind))
    if kind == "hellinger":
        return hellinger_p_divergence(P, Q, _need_order(order, kind))
    if kind == "chi_squared":
        return chi_squared_divergence(P, Q)
    if kind == "kl":
        return f_divergence(P, Q, kl_generator)
    if kind == "f":
        if generator is None:
            raise ValueError("kind 'f' needs a generator")
        return f_divergence(P, Q, generator)
    raise ValueError(f"unknown divergence {kind!r}")


def _need_order(order: float | None, kind: str) -> float:
    if order is None:
        raise ValueError(f"divergence {kind!r} needs an order")
    return order


def dpi_check(
    K: MarkovKernel,
    P: DiscreteDistribution,
    Q: DiscreteDistribution,
    kind: str,
    order: float | None = None,
    generator: Callable[[float], float] | None = None,
) -> tuple[float, float]:
    """Return ``(D(KP || KQ), D(P || Q))``; the first should never exceed the second."""
    _check_pair(P, Q)
    before = divergence(P, Q, kind, order, generator)
    after = divergence(pushforward(K, P), pushforward(K, Q), kind, order, generator)
    return after, before
