"""Right-hand sides of KL-form generalization bounds and risk certificates.

Every bound here has the shape ``KL(L_hat || L) <= budget`` holding for all
hypotheses simultaneously with probability at least ``1 - delta``.  The budget
is turned into a risk upper bound by binary-KL inversion, and into the looser
additive form via Pinsker's inequality.  Logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .divergences import kl_inverse_upper, pinsker_risk_bound

TEST_SET = "test_set"
OCCAMS_RAZOR = "occams_razor"
PAC_BAYES_POINT_MASS = "pac_bayes_point_mass"
D_ALPHA = "d_alpha"
HELLINGER_P = "hellinger_p"
CHI_SQUARED = "chi_squared"
LIMIT_OR = "limit_or"
CHI_SQUARED_COROLLARY = "chi_squared_corollary"

METHODS = (
    TEST_SET,
    OCCAMS_RAZOR,
    PAC_BAYES_POINT_MASS,
    D_ALPHA,
    HELLINGER_P,
    CHI_SQUARED,
    LIMIT_OR,
    CHI_SQUARED_COROLLARY,
)
ORDERED_METHODS = (D_ALPHA, HELLINGER_P)

HELLINGER_DELTA_WARNING = 0.5


class BoundError(ValueError):
    """Invalid method or parameter combination."""


def _check_common(n: float, delta: float, q_mass: float | None = None) -> None:
    if not n >= 1:
        raise BoundError(f"n must be >= 1, got {n!r}")
    if not 0 < delta <= 1:
        raise BoundError(f"delta must be in (0, 1], got {delta!r}")
    if q_mass is not None and not 0 < q_mass <= 1:
        raise BoundError(f"q_mass must be in (0, 1], got {q_mass!r}")


def _check_order(order: float | None, name: str) -> float:
    if order is None:
        raise BoundError(f"{name} requires an order > 1")
    if not order > 1:
        raise BoundError(f"{name} requires order > 1, got {order!r}")
    return float(order)


def rhs_test_set(n: float, delta: float) -> float:
    _check_common(n, delta)
    return -math.log(delta) / n


def rhs_occams_razor(n: float, delta: float, q_mass: float) -> float:
    _check_common(n, delta, q_mass)
    return (-math.log(q_mass) - math.log(delta)) / n


def rhs_pac_bayes_point_mass(n: float, delta: float, q_mass: float) -> float:
    """PAC-Bayes-kl with a point-mass posterior; carries an extra ``ln(2 sqrt(n))``."""
    _check_common(n, delta, q_mass)
    return (-math.log(q_mass) + math.log(2.0 * math.sqrt(n)) - math.log(delta)) / n


def rhs_d_alpha(n: float, delta: float, q_min: float, alpha: float) -> float:
    _check_common(n, delta, q_min)
    alpha = _check_order(alpha, D_ALPHA)
    # alpha / (alpha - 1) written so it stays strictly decreasing near 1e9
    return (-math.log(q_min) - (1.0 + 1.0 / (alpha - 1.0)) * math.log(delta)) / n


def hellinger_log_argument(delta: float, q_min: float, p: float) -> float:
    """``ln(q_min^(1-p) * delta^(-p))`` as a sum of nonnegative terms."""
    return (p - 1.0) * -math.log(q_min) + p * -math.log(delta)


def rhs_hellinger_p(n: float, delta: float, q_min: float, p: float) -> float:
    """``ln(q_min^(1-p) delta^(-p) - 1) / ((p - 1) n)``.

    With ``X = q_min^(1-p) delta^(-p)`` this is ``[ln X + ln(1 - 1/X)] / ((p-1) n)``,
    and ``ln X / ((p-1) n)`` is exactly the Rényi budget at the same order.  It
    is evaluated as that budget plus the nonpositive correction, which never
    overflows and keeps the result at or below the Rényi budget in floating
    point too.  May be negative when ``delta`` is large.
    """
    _check_common(n, delta, q_min)
    p = _check_order(p, HELLINGER_P)
    log_x = hellinger_log_argument(delta, q_min, p)
    if log_x <= 0:
        raise BoundError("hellinger_p needs delta * q_min < 1 (outer logarithm undefined)")
    correction = math.log(-math.expm1(-log_x)) / ((p - 1.0) * n)
    return rhs_d_alpha(n, delta, q_min, p) + correction


def rhs_chi_squared(n: float, delta: float, q_min: float) -> float:
    _check_common(n, delta, q_min)
    return (math.log1p(q_min) - math.log(q_min) - 2.0 * math.log(delta)) / n


def rhs_limit_or(n: float, delta: float, q_mass: float) -> float:
    """Limit of the Rényi and Hellinger budgets as the order grows; same value
    as Occam's razor under a uniform prior."""
    return rhs_occams_razor(n, delta, q_mass)


def rhs_chi_squared_corollary(n: float, delta: float, q_mass: float) -> float:
    """Chi-squared budget with a uniform prior's per-hypothesis mass."""
    return rhs_chi_squared(n, delta, q_mass)


def rhs(method: str, n: float, delta: float, q_mass: float = 1.0,
        order: float | None = None) -> float:
    """Dispatch to the named budget; ``order`` is used by ``d_alpha`` and
    ``hellinger_p`` only."""
    if method == TEST_SET:
        return rhs_test_set(n, delta)
    if method == OCCAMS_RAZOR:
        return rhs_occams_razor(n, delta, q_mass)
    if method == PAC_BAYES_POINT_MASS:
        return rhs_pac_bayes_point_mass(n, delta, q_mass)
    if method == D_ALPHA:
        return rhs_d_alpha(n, delta, q_mass, _check_order(order, method))
    if method == HELLINGER_P:
        return rhs_hellinger_p(n, delta, q_mass, _check_order(order, method))
    if method == CHI_SQUARED:
        return rhs_chi_squared(n, delta, q_mass)
    if method == LIMIT_OR:
        return rhs_limit_or(n, delta, q_mass)
    if method == CHI_SQUARED_COROLLARY:
        return rhs_chi_squared_corollary(n, delta, q_mass)
    raise BoundError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


@dataclass(frozen=True)
class BoundRequest:
    method: str
    n: int
    delta: float
    q_mass: float = 1.0
    order: float | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise BoundError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        _check_common(self.n, self.delta, self.q_mass)
        if self.method in ORDERED_METHODS:
            _check_order(self.order, self.method)
        elif self.order is not None:
            object.__setattr__(self, "order", None)

    def budget(self) -> float:
        return rhs(self.method, self.n, self.delta, self.q_mass, self.order)


@dataclass(frozen=True)
class BoundCertificate:
    request: BoundRequest
    empirical_loss: float
    kl_budget: float
    risk_upper: float
    risk_upper_pinsker: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "method": self.request.method,
            "n": self.request.n,
            "delta": self.request.delta,
            "q_mass": self.request.q_mass,
            "order": self.request.order,
            "kl_budget": self.kl_budget,
            "empirical_loss": self.empirical_loss,
            "risk_upper": self.risk_upper,
            "risk_upper_pinsker": self.risk_upper_pinsker,
            "warnings": list(self.warnings),
        }


def certify(request: BoundRequest, empirical_loss: float) -> BoundCertificate:
    """Turn a request and an observed empirical loss into a risk certificate."""
    if not 0 <= empirical_loss <= 1:
        raise BoundError(f"empirical_loss must be in [0, 1], got {empirical_loss!r}")
    budget = request.budget()
    warnings = []
    if request.method == HELLINGER_P and request.delta >= HELLINGER_DELTA_WARNING:
        warnings.append(
            f"hellinger_p is only guaranteed for sufficiently small delta; "
            f"delta={request.delta:g} >= {HELLINGER_DELTA_WARNING:g} may be outside that range"
        )
    if budget < 0:
        raise BoundError(f"{request.method} budget is negative ({budget:.6g}); "
                         "delta is too large for this bound")
    return BoundCertificate(
        request=request,
        empirical_loss=empirical_loss,
        kl_budget=budget,
        risk_upper=kl_inverse_upper(empirical_loss, budget),
        risk_upper_pinsker=pinsker_risk_bound(empirical_loss, budget),
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class SweepRow:
    method: str
    n: int
    order: float | None
    delta: float
    q_min: float
    kl_budget: float


def sweep(
    methods: Sequence[str],
    n_values: Iterable[int],
    delta: float,
    q_min: float,
    orders: Sequence[float],
) -> list[SweepRow]:
    """Evaluate every (method, n, order) combination.

    Rows come out ordered by method (as given), then n, then order.
    Parameter-free methods get a single row per n with ``order=None``.
    """
    n_values = list(n_values)
    if not methods or not n_values:
        raise BoundError("methods and n_values must be nonempty")
    if any(m in ORDERED_METHODS for m in methods) and not orders:
        raise BoundError("orders must be nonempty when d_alpha or hellinger_p is requested")
    rows = []
    for method in methods:
        for n in n_values:
            method_orders = orders if method in ORDERED_METHODS else [None]
            for order in method_orders:
                rows.append(SweepRow(method, n, order, delta, q_min,
                                     rhs(method, n, delta, q_min, order)))
    return rows
