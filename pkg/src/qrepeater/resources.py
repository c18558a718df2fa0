"""Saved-resource accounting, node bounds and hashing-rate copy arithmetic."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from .measures import von_neumann_entropy_marginal


class UndistillableError(ValueError):
    """The hashing rate is zero, so no finite number of copies suffices."""


def _x(p: float, delta: float) -> float:
    return delta * (1.0 - delta) * (1.0 - p) ** 2


def _check_domain(p: float, delta: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta={delta} outside (0, 1)")


def contrast(p: float, delta: float) -> float:
    """``K = (p^2 - x)/(p^2 + x)`` with ``x = delta(1-delta)(1-p)^2``."""
    _check_domain(p, delta)
    x = _x(p, delta)
    return (p * p - x) / (p * p + x)


def saved_resource(n: int, C: float) -> float:
    """``n (1 - C)`` ebits saved by using segments of concurrence ``C``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= C <= 1.0:
        raise ValueError(f"C={C} outside [0, 1]")
    return n * (1.0 - C)


def max_nodes(p: float, delta: float, C: float) -> float:
    """Largest node count for which segments of concurrence ``C`` stay feasible."""
    if not 0.0 < C <= 1.0:
        raise ValueError(f"C={C} outside (0, 1]")
    k = contrast(p, delta)
    if C == 1.0:
        return math.inf
    return abs(math.log1p(-k * k)) / (2.0 * abs(math.log(C)))


def min_concurrence(n: int, p: float, delta: float) -> float:
    """``(1 - K^2)^(1/(2n))``, the smallest per-segment concurrence at ``n`` nodes."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = contrast(p, delta)
    return (1.0 - k * k) ** (1.0 / (2.0 * n))


def saved_resource_bound(n: int, p: float, delta: float) -> float:
    """``n - n (1 - K^2)^(1/(2n))``."""
    k = contrast(p, delta)
    # expm1 keeps precision at large n.
    return -n * math.expm1(math.log1p(-k * k) / (2.0 * n)) if k * k < 1.0 else float(n)


def saved_resource_limit(p: float, delta: float) -> float:
    """Large-``n`` limit of the bound, natural logarithm.

    Diverges at ``p = 0`` and ``p = 1``, where ``+inf`` is returned.
    """
    _check_domain(p, delta)
    if p <= 0.0 or p >= 1.0:
        return math.inf
    x = _x(p, delta)
    return -0.5 * math.log(x * p * p / (x + p * p) ** 2) - math.log(2.0)


@dataclass(frozen=True)
class HashingRate:
    rate: float
    hashable: bool


def hashing_rate_report(F: float) -> HashingRate:
    """Hashing yield for a Werner state, clipped at zero with a flag."""
    if not 0.0 <= F <= 1.0:
        raise ValueError(f"F={F} outside [0, 1]")
    d = 1.0
    if F > 0.0:
        d += F * math.log2(F)
    if F < 1.0:
        d += (1.0 - F) * math.log2((1.0 - F) / 3.0)
    return HashingRate(max(d, 0.0), d > 0.0)


def hashing_rate(F: float) -> float:
    """``1 + F log2 F + (1-F) log2((1-F)/3)``, or 0 below the hashing threshold."""
    return hashing_rate_report(F).rate


def alpha_for_noise(p: float) -> float:
    """Schmidt weight ``4p^2/(5p^2 - 2p + 1)``, clamped to ``[1/2, 1]``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    a = 4.0 * p * p / (5.0 * p * p - 2.0 * p + 1.0)
    return min(max(a, 0.5), 1.0)


def copies_required(n: int, p: float, F: float) -> float:
    """``n S(alpha(p)) / D(F)`` Werner copies for an ``n``-node chain.

    Raises
    ------
    UndistillableError
        When the hashing rate at ``F`` is zero.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rep = hashing_rate_report(F)
    if not rep.hashable:
        raise UndistillableError(f"undistillable at hashing rate (F={F})")
    return n * von_neumann_entropy_marginal(alpha_for_noise(p)) / rep.rate


def entropy_from_rv(rv: float, n: int) -> float:
    """Marginal entropy of the pure segment reached with saved resource ``rv``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= rv <= n:
        raise ValueError(f"rv={rv} outside [0, {n}]")
    c = 1.0 - rv / n
    alpha = 0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - c * c)))
    return von_neumann_entropy_marginal(min(alpha, 1.0))


@dataclass(frozen=True)
class ResourceReport:
    n: int
    concurrence_per_segment: float
    rv: float
    rv_upper: float
    rv_limit: float
    copies_required: Optional[float]
    feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)


def resource_report(
    n: int, p: float, delta: float, F: float, C: Optional[float] = None
) -> ResourceReport:
    """Collect the accounting for ``n`` nodes; ``C`` defaults to the minimal concurrence."""
    _check_domain(p, delta)
    feasible = p * p >= _x(p, delta)
    if C is None:
        C = min_concurrence(n, p, delta) if feasible else 1.0
    try:
        copies = copies_required(n, p, F)
    except UndistillableError:
        copies = None
    return ResourceReport(
        n=int(n),
        concurrence_per_segment=float(C),
        rv=saved_resource(n, C),
        rv_upper=saved_resource_bound(n, p, delta),
        rv_limit=saved_resource_limit(p, delta),
        copies_required=copies,
        feasible=bool(feasible),
    )
