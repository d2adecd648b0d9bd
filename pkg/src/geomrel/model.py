"""Core equations of the geometric-rates reliability growth model.

The faults present in a system are ordered by how likely each one is to
trigger a failure during a single incident (one usage task).  The rate of
the n-th fault decays geometrically, ``rate(n) = p1 * d**(n-1)``, and each
fault's time to first failure is geometrically distributed with its own
rate.  Expected failure counts and failure intensities are then finite
sums over a truncated fault population.

All operations here are pure functions of immutable inputs and safe for
unrestricted concurrent use.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "DEFAULT_RATE_FLOOR",
    "GeometricModelParams",
    "additional_time",
    "additional_time_abs",
    "default_truncation",
    "failure_intensity",
    "fault_cdf",
    "fault_rate",
    "log_likelihood_small",
    "mean_failures",
    "time_for_intensity",
    "time_for_intensity_exact",
]

# Faults whose rate falls below p1 * DEFAULT_RATE_FLOOR are dropped from the
# default truncation of the (conceptually unbounded) fault population.
DEFAULT_RATE_FLOOR = 1e-6

# Enumeration caps for the exact likelihood; the subset count C(N, x) blows
# up beyond desk scale otherwise.
MAX_LIKELIHOOD_TRUNCATION = 20
MAX_LIKELIHOOD_FAILURES = 5


def default_truncation(d: float, rate_floor: float = DEFAULT_RATE_FLOOR) -> int:
    """Number of fault terms kept by default for decay ratio ``d``.

    Returns the smallest N with ``d**N <= rate_floor``, i.e. the fault
    population is cut once rates drop below ``p1 * rate_floor``.  The tail
    beyond N contributes at most ``rate_floor * p1`` per dropped fault to
    any intensity value.
    """
    if not 0.0 < d < 1.0:
        raise ValueError(f"d must lie in (0, 1) to derive a truncation, got {d}")
    if not 0.0 < rate_floor < 1.0:
        raise ValueError(f"rate_floor must lie in (0, 1), got {rate_floor}")
    return max(1, math.ceil(math.log(rate_floor) / math.log(d)))


@dataclass(frozen=True)
class GeometricModelParams:
    """Identity of a geometric-rates model.

    ``p1`` is the failure rate of the most failure-prone fault, ``d`` the
    constant ratio between the rates of consecutive faults, and
    ``truncation`` the number N of fault terms evaluated in every sum.
    When ``truncation`` is omitted it is derived with
    :func:`default_truncation`.

    ``d`` must lie strictly inside (0, 1); the degenerate d = 1 case, in
    which every fault shares the rate p1, is available only through the
    :meth:`constant_rates` test-mode constructor because the release-time
    formulas and the truncation rule divide by ``1 - d`` or ``ln d``.

    Instances are immutable and hashable.
    """

    p1: float
    d: float
    truncation: int | None = None
    constant_mode: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.p1 < 1.0:
            raise ValueError(f"p1 must lie in (0, 1), got {self.p1}")
        if self.constant_mode:
            if self.d != 1.0:
                raise ValueError("constant-rates mode is only meaningful for d = 1")
            if self.truncation is None:
                raise ValueError("constant-rates mode requires an explicit truncation")
        elif not 0.0 < self.d < 1.0:
            raise ValueError(
                f"d must lie in (0, 1), got {self.d}; use "
                "GeometricModelParams.constant_rates for the d = 1 test mode"
            )
        if self.truncation is None:
            object.__setattr__(self, "truncation", default_truncation(self.d))
        n = self.truncation
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"truncation must be a positive integer, got {n!r}")
        object.__setattr__(self, "truncation", int(n))

    @classmethod
    def constant_rates(cls, p1: float, truncation: int) -> "GeometricModelParams":
        """Test-mode constructor where every fault has the same rate ``p1``."""
        return cls(p1, 1.0, truncation, constant_mode=True)

    @cached_property
    def rates(self) -> np.ndarray:
        """Per-fault rates ``p1 * d**(n-1)`` for n = 1..truncation (read-only)."""
        r = self.p1 * self.d ** np.arange(self.truncation, dtype=float)
        r.setflags(write=False)
        return r

    @cached_property
    def log_survival(self) -> np.ndarray:
        """``ln(1 - rate)`` per fault, evaluated cancellation-free (read-only)."""
        s = np.log1p(-self.rates)
        s.setflags(write=False)
        return s


def fault_rate(params: GeometricModelParams, n: int) -> float:
    """Failure rate of the n-th most failure-prone fault, ``p1 * d**(n-1)``."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ValueError(f"fault index must be an integer, got {n!r}")
    if not 1 <= n <= params.truncation:
        raise ValueError(f"fault index {n} outside 1..{params.truncation}")
    return params.p1 * params.d ** (n - 1)


def fault_cdf(p: float, t: float) -> float:
    """Probability that a fault with rate ``p`` has occurred by time ``t``.

    Computes ``1 - (1 - p)**t`` as ``-expm1(t * log1p(-p))`` so that tiny
    rates do not cancel catastrophically.  The per-incident failure process
    is discrete, but real-valued ``t`` is accepted (and interpolates the
    integer-time values monotonically).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"rate must lie in (0, 1), got {p}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return -math.expm1(t * math.log1p(-p))


def _as_time_array(t, minimum: float, what: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < minimum) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} requires finite t >= {minimum}, got {t!r}")
    return arr, arr.ndim == 0


def mean_failures(params: GeometricModelParams, t):
    """Expected cumulative number of failures by time ``t`` (incidents).

    Sums each fault's occurrence probability ``1 - (1 - p_a)**t`` over the
    truncated population; non-decreasing in ``t`` and bounded above by the
    truncation count.  Accepts a scalar or an array of times.
    """
    arr, scalar = _as_time_array(t, 0.0, "mean_failures")
    vals = (-np.expm1(arr[..., np.newaxis] * params.log_survival)).sum(axis=-1)
    return float(vals) if scalar else vals


def failure_intensity(params: GeometricModelParams, t):
    """Expected number of failures occurring at time ``t`` (per incident).

    Sums the per-fault probability masses ``p_a * (1 - p_a)**(t-1)``;
    strictly decreasing in ``t`` whenever ``d < 1``.  For integer ``t`` this
    equals ``mean_failures(t) - mean_failures(t - 1)``.
    """
    arr, scalar = _as_time_array(t, 1.0, "failure_intensity")
    vals = (params.rates * np.exp((arr[..., np.newaxis] - 1.0) * params.log_survival)).sum(axis=-1)
    return float(vals) if scalar else vals


def _occurrence_hazard_sum(params: GeometricModelParams) -> float:
    """``sum(p_a - p_a**2)`` over the fault population."""
    return float(np.sum(params.rates * (1.0 - params.rates)))


def time_for_intensity(params: GeometricModelParams, lambda_target: float) -> float:
    """Closed-form time at which the intensity reaches ``lambda_target``.

    Evaluates ``ln(lambda_target) / sum(p_a - p_a**2) + 1`` verbatim.  This
    algebraic shortcut does not invert :func:`failure_intensity` exactly
    for more than one fault and can return values below 1 (even negative
    ones) for small targets; the raw value is returned unclamped so callers
    can decide how to interpret it.  Use :func:`time_for_intensity_exact`
    for the numerical inverse of the intensity curve.
    """
    lam1 = failure_intensity(params, 1.0)
    if lambda_target <= 0:
        raise ValueError(f"intensity target must be positive, got {lambda_target}")
    if lambda_target > lam1:
        raise ValueError(
            f"intensity target {lambda_target} exceeds the initial intensity {lam1}"
        )
    return math.log(lambda_target) / _occurrence_hazard_sum(params) + 1.0


def time_for_intensity_exact(params: GeometricModelParams, lambda_target: float) -> float:
    """Numerical inverse of :func:`failure_intensity` by bisection.

    Returns the t >= 1 with ``failure_intensity(params, t) == lambda_target``
    to floating-point resolution.  The intensity is strictly decreasing, so
    the root is unique.
    """
    lam1 = failure_intensity(params, 1.0)
    if lambda_target <= 0:
        raise ValueError(f"intensity target must be positive, got {lambda_target}")
    if lambda_target > lam1:
        raise ValueError(
            f"intensity target {lambda_target} exceeds the initial intensity {lam1}"
        )
    if lambda_target == lam1:
        return 1.0
    lo, hi = 1.0, 2.0
    while failure_intensity(params, hi) > lambda_target:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if failure_intensity(params, mid) > lambda_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def additional_time(
    params: GeometricModelParams, lambda_now: float, lambda_objective: float
) -> float:
    """Further time needed to move the intensity from ``lambda_now`` to
    ``lambda_objective``.

    Evaluates ``(ln lambda_objective - ln lambda_now) / sum(p_a - p_a**2)``
    and returns exactly 0 when the two intensities coincide.  With rates in
    (0, 1) the denominator is positive, so the printed formula yields a
    negative value whenever the objective lies below the current intensity;
    the raw signed value is surfaced unchanged (see
    :func:`additional_time_abs` for the magnitude).
    """
    if lambda_now <= 0 or lambda_objective <= 0:
        raise ValueError("intensities must be positive")
    if lambda_objective > lambda_now:
        raise ValueError(
            f"objective intensity {lambda_objective} exceeds current intensity {lambda_now}"
        )
    if lambda_objective == lambda_now:
        return 0.0
    return (math.log(lambda_objective) - math.log(lambda_now)) / _occurrence_hazard_sum(params)


def additional_time_abs(
    params: GeometricModelParams, lambda_now: float, lambda_objective: float
) -> float:
    """Magnitude of :func:`additional_time`, for planning arithmetic."""
    return abs(additional_time(params, lambda_now, lambda_objective))


def log_likelihood_small(params: GeometricModelParams, x: int, t: float) -> float:
    """Exact log-likelihood of observing ``x`` failures by time ``t``.

    Enumerates every size-x subset of the fault population: each subset
    contributes the product of occurrence probabilities for its faults and
    survival probabilities for the rest.  The subset count is C(N, x),
    hence the hard caps (N <= 20, x <= 5); this is a desk-scale
    cross-check, not a fitting route.
    """
    n = params.truncation
    if n > MAX_LIKELIHOOD_TRUNCATION:
        raise ValueError(
            f"truncation {n} exceeds the enumeration cap {MAX_LIKELIHOOD_TRUNCATION}"
        )
    if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
        raise ValueError(f"failure count must be an integer, got {x!r}")
    if not 0 <= x <= MAX_LIKELIHOOD_FAILURES:
        raise ValueError(
            f"failure count {x} outside 0..{MAX_LIKELIHOOD_FAILURES} (enumeration cap)"
        )
    if x > n:
        raise ValueError(f"cannot observe {x} distinct failures from {n} faults")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")

    log_surv = t * params.log_survival  # ln P(fault silent through t)
    base = float(log_surv.sum())
    if x == 0:
        return base
    with np.errstate(divide="ignore"):
        log_occ = np.log(-np.expm1(log_surv))  # ln P(fault occurred by t); -inf at t = 0
    weight = log_occ - log_surv

    best = -math.inf
    terms = []
    for subset in itertools.combinations(range(n), x):
        v = base + float(weight[list(subset)].sum())
        terms.append(v)
        if v > best:
            best = v
    if best == -math.inf:
        return -math.inf
    return best + math.log(math.fsum(math.exp(v - best) for v in terms))
