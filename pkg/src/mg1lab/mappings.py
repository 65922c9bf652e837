"""Parameter transformations between the 2-class dynamic-priority schemes
(beta <-> p1, beta <-> busy-period integral, alpha <-> p1) and a
completeness solver that hits any target point on the achievable segment
with any scheme.

The canonical exchange currencies are beta and the busy-period integral,
which are exact; urgency differences (ubar, dbar) are only ever reported
as the terminal parameter of a simulation-backed bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .analytic import expected_clearing_time, rp2_waits
from .core import SystemModel, derive_loads, segment_point, wait_bounds
from .errors import (
    BisectionError,
    IntegralOutOfRangeError,
    InvalidParameterError,
    OracleRequiredError,
)

SCHEMES = ("ddp", "rp", "edd", "holpj", "pp")

#: schemes whose parameter can only be located through a simulation oracle
SIMULATED_SCHEMES = ("edd", "holpj", "pp")


@dataclass(frozen=True)
class SegmentTarget:
    """A point on the 2-class achievable segment, by convex weight or by
    class-1 mean wait.  Exactly one of the two must be set."""

    alpha: Optional[float] = None
    target_w1: Optional[float] = None

    def __post_init__(self):
        if (self.alpha is None) == (self.target_w1 is None):
            raise InvalidParameterError("set exactly one of alpha / target_w1")
        if self.alpha is not None and not (0.0 <= self.alpha <= 1.0):
            raise InvalidParameterError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class SchemeParameter:
    """The parameter of one scheme: beta, p1, ubar, dbar, or omega1."""

    scheme: str
    value: float
    diagnostics: dict = field(default_factory=dict, compare=False)


def _check_rho(rho: float) -> None:
    if not (0.0 < rho < 1.0):
        raise InvalidParameterError(f"rho must lie in (0, 1), got {rho}")


def beta_from_p1(rho: float, p1: float) -> float:
    """Map the relative-priority parameter to the equivalent beta.

    Strictly decreasing, beta(1/2) = 1, beta(1) = 0, beta(0) = +inf.
    """
    _check_rho(rho)
    if not (0.0 <= p1 <= 1.0):
        raise InvalidParameterError(f"p1 must lie in [0, 1], got {p1}")
    if p1 >= 0.5:
        return (2.0 - rho) * (1.0 - p1) / (1.0 - rho * (1.0 - p1))
    if p1 == 0.0:
        return math.inf
    return (1.0 - rho * p1) / ((2.0 - rho) * p1)


def p1_from_beta(rho: float, beta: float) -> float:
    """Exact inverse of :func:`beta_from_p1`."""
    _check_rho(rho)
    if not (beta >= 0):
        raise InvalidParameterError(f"beta must be in [0, +inf], got {beta}")
    if beta <= 1.0:
        return (1.0 + (1.0 - rho) * (1.0 - beta)) / (2.0 - rho * (1.0 - beta))
    if math.isinf(beta):
        return 0.0
    return 1.0 / ((2.0 - rho) * beta + rho)


def beta_from_integral(model: SystemModel, integral_value: float, branch: str) -> float:
    """Map a busy-period integral value to the equivalent beta.

    branch "ubar_neg" (class 1 favoured) yields beta in [0, 1]; branch
    "ubar_nonneg" yields beta in [1, +inf].
    """
    model.require_two_classes()
    if branch not in ("ubar_neg", "ubar_nonneg"):
        raise InvalidParameterError(f"unknown branch {branch!r}")
    rhos, rho, w0 = derive_loads(model)
    favoured = 0 if branch == "ubar_neg" else 1
    upper = expected_clearing_time(model, favoured)
    if not (0.0 <= integral_value <= upper * (1.0 + 1e-12) + 1e-15):
        raise IntegralOutOfRangeError(
            f"integral {integral_value} outside [0, {upper}] on branch {branch}"
        )
    iv = min(integral_value, upper)
    if branch == "ubar_neg":
        num = w0 - (1.0 - rhos[0]) * (1.0 - rho) * iv
        den = w0 + rhos[0] * (1.0 - rho) * iv
        return max(num, 0.0) / den
    num = w0 + rhos[1] * (1.0 - rho) * iv
    den = w0 - (1.0 - rhos[1]) * (1.0 - rho) * iv
    if den <= 0.0:
        return math.inf
    return num / den


def integral_from_beta(model: SystemModel, beta: float) -> tuple[float, str]:
    """Inverse of :func:`beta_from_integral`; returns (integral, branch)."""
    model.require_two_classes()
    if not (beta >= 0):
        raise InvalidParameterError(f"beta must be in [0, +inf], got {beta}")
    rhos, rho, w0 = derive_loads(model)
    if beta <= 1.0:
        iv = w0 * (1.0 - beta) / ((1.0 - rho) * (1.0 - rhos[0] * (1.0 - beta)))
        return iv, "ubar_neg"
    if math.isinf(beta):
        return expected_clearing_time(model, 1), "ubar_nonneg"
    iv = w0 * (beta - 1.0) / ((1.0 - rho) * (rhos[1] + beta * (1.0 - rhos[1])))
    return iv, "ubar_nonneg"


def p1_from_alpha(model: SystemModel, alpha: float) -> float:
    """Relative-priority parameter whose wait vector is the segment point at
    alpha (alpha = 1 is strict (1,2), alpha = 0 strict (2,1))."""
    model.require_two_classes()
    if not (0.0 <= alpha <= 1.0):
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")
    rhos, rho, w0 = derive_loads(model)
    r1, r2 = rhos
    num = alpha * r2 * (2.0 - r1 - r2) * (1.0 - r2) * (1.0 - r1 - r2)
    den = (alpha * r2 * (r1 + r2 - 2.0) + 1.0 - r1) * (r2 * (1.0 - r2) - r1 * (1.0 - r1)) + rho * (
        1.0 - r1
    ) * (1.0 - r2) * (1.0 - r1 - r2)
    return min(max(num / den, 0.0), 1.0)


def alpha_from_p1(model: SystemModel, p1: float) -> float:
    """Convex weight of the segment point reached by relative priority p1."""
    model.require_two_classes()
    w1 = rp2_waits(model, p1)[0]
    lo = segment_point(model, 0.0)[0]  # strict (2,1): largest class-1 wait
    hi = segment_point(model, 1.0)[0]
    if lo == hi:
        return 0.5  # degenerate segment (an empty class); every alpha coincides
    return (w1 - lo) / (hi - lo)


def _target_w1(model: SystemModel, target: SegmentTarget) -> float:
    if target.alpha is not None:
        return segment_point(model, target.alpha)[0]
    (lo1, hi1), _ = wait_bounds(model)
    tol = 1e-9 * max(hi1, 1.0)
    if not (lo1 - tol <= target.target_w1 <= hi1 + tol):
        raise InvalidParameterError(
            f"target w1 = {target.target_w1} outside achievable [{lo1}, {hi1}]"
        )
    return min(max(target.target_w1, lo1), hi1)


def _alpha_of_w1(model: SystemModel, w1: float) -> float:
    lo = segment_point(model, 0.0)[0]
    hi = segment_point(model, 1.0)[0]
    if lo == hi:
        return 0.5
    return min(max((w1 - lo) / (hi - lo), 0.0), 1.0)


# bisection knobs for the simulated schemes
_BRACKET_TOL = 1e-3
_MAX_ORACLE_CALLS = 20

#: scale factor turning the bounded bisection variable into an urgency
#: difference; tan maps (0, 1) onto the full extended real line.
def _ubar_of_t(t: float, scale: float) -> float:
    if t <= 0.0:
        return -math.inf
    if t >= 1.0:
        return math.inf
    return scale * math.tan(math.pi * (t - 0.5))


def achieve_target(
    model: SystemModel,
    target: SegmentTarget,
    scheme: str,
    sim_oracle: Optional[Callable[[float], tuple[float, float]]] = None,
    max_oracle_calls: int = _MAX_ORACLE_CALLS,
) -> SchemeParameter:
    """Find the scheme parameter whose class-1 mean wait matches the target.

    For RP and DDP the answer is analytic and exact.  For EDD, HOL-PJ and PP
    a simulation oracle `param -> (mean_w1, ci_halfwidth)` must be supplied;
    the parameter is located by monotone bisection, stopping once the oracle
    CI covers the target or the parameter bracket closes below 1e-3.
    """
    model.require_two_classes()
    if scheme not in SCHEMES:
        raise InvalidParameterError(f"unknown scheme {scheme!r}")
    w1_star = _target_w1(model, target)
    (lo1, hi1), _ = wait_bounds(model)
    rho = model.rho

    # exact endpoint ties resolve to the strict-priority parameter
    if w1_star == lo1 or w1_star == hi1:
        at_12 = w1_star == lo1
        endpoint = {
            "rp": 1.0 if at_12 else 0.0,
            "ddp": 0.0 if at_12 else math.inf,
            "edd": -math.inf if at_12 else math.inf,
            "holpj": -math.inf if at_12 else math.inf,
            "pp": 1.0 if at_12 else 0.0,
        }[scheme]
        return SchemeParameter(scheme, endpoint, {"case": "endpoint"})

    alpha = _alpha_of_w1(model, w1_star)
    p1 = p1_from_alpha(model, alpha)
    if scheme == "rp":
        return SchemeParameter("rp", p1, {"case": "analytic"})
    if scheme == "ddp":
        return SchemeParameter("ddp", beta_from_p1(rho, p1), {"case": "analytic"})

    if sim_oracle is None:
        raise OracleRequiredError(f"scheme {scheme!r} needs a simulation oracle")

    # EDD / HOL-PJ: w1 increasing in the urgency difference; PP: w1
    # decreasing in omega1.  Solve on a bounded variable t in [0, 1] with
    # w1 increasing in t.
    scale = model.w0 / (1.0 - rho)
    if scheme == "pp":
        param_of_t = lambda t: 1.0 - t  # noqa: E731
    else:
        param_of_t = lambda t: _ubar_of_t(t, scale)  # noqa: E731

    calls = 0

    def probe(t: float) -> tuple[float, float]:
        nonlocal calls
        calls += 1
        if calls > max_oracle_calls:
            raise BisectionError(
                f"no convergence within {max_oracle_calls} oracle calls", iterations=calls
            )
        return sim_oracle(param_of_t(t))

    t_lo, t_hi = 0.0, 1.0
    t_mid = 0.5
    while True:
        mean, ci = probe(t_mid)
        if abs(mean - w1_star) <= ci:
            return SchemeParameter(
                scheme,
                param_of_t(t_mid),
                {"case": "bisection", "oracle_calls": calls, "bracket": t_hi - t_lo,
                 "achieved_w1": mean, "ci": ci},
            )
        if mean < w1_star:
            t_lo = t_mid
        else:
            t_hi = t_mid
        if t_hi - t_lo < _BRACKET_TOL:
            return SchemeParameter(
                scheme,
                param_of_t(0.5 * (t_lo + t_hi)),
                {"case": "bisection", "oracle_calls": calls, "bracket": t_hi - t_lo,
                 "achieved_w1": mean, "ci": ci},
            )
        t_mid = 0.5 * (t_lo + t_hi)
