"""Optimal-control solvers built on the two-class achievable wait region.

Six applications share the same backbone: the achievable mean-wait pairs
form a line segment pinned by the conservation law, so each control
problem reduces to picking one point of that segment (equivalently one
scheduling parameter) and, where prices are involved, a price vector.
Closed forms are used where available; the pricing problems are solved
numerically and certified against dense grids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .core import (
    CustomerClassSpec,
    ServiceDistribution,
    SystemModel,
    gfcfs_wait,
    strict_priority_waits_2class,
    segment_point,
)
from .analytic import rp2_waits
from .errors import FixedPointDivergenceError, InfeasibleError, InvalidParameterError

_INF = math.inf


# ---------------------------------------------------------------------------
# solution record

@dataclass(frozen=True)
class ControlSolution:
    """Solver output: a case/regime tag, the decision values, the achieved
    objective, any active constraints, and solver diagnostics."""

    case: str
    params: dict
    objective: Optional[float] = None
    active_constraints: tuple[str, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "case": self.case,
                "params": self.params,
                "objective": self.objective,
                "active_constraints": list(self.active_constraints),
                "diagnostics": self.diagnostics,
            },
            sort_keys=True,
        )


# ---------------------------------------------------------------------------
# small numeric helpers

def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section maximization on [lo, hi]; returns (x, f(x)).  Endpoint
    values are checked so boundary optima are never missed."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    xm = 0.5 * (a + b)
    candidates = [(xm, f(xm)), (lo, f(lo)), (hi, f(hi))]
    # parabolic polish: golden-section alone resolves a smooth interior
    # maximum only to about sqrt(machine epsilon); one wide-stencil parabola
    # fit recovers the vertex of a locally quadratic objective exactly
    h = 1e-5 * (hi - lo)
    if h > 0.0 and lo <= xm - h and xm + h <= hi:
        f0, f1c, f2 = f(xm - h), f(xm), f(xm + h)
        curve = f0 - 2.0 * f1c + f2
        if curve < 0.0 and all(map(math.isfinite, (f0, f1c, f2))):
            xv = xm + 0.5 * h * (f0 - f2) / curve
            xv = min(max(xv, lo), hi)
            candidates.append((xv, f(xv)))
    return max(candidates, key=lambda t: t[1])


def _rp2_inline(l1: float, l2: float, s: float, s2: float, p1: float) -> tuple[float, float]:
    """Two-class relative-priority mean waits for Poisson rates l1, l2 with
    a common service distribution (mean s, second moment s2); returns
    (inf, inf) when the system is unstable."""
    r1, r2 = l1 * s, l2 * s
    rho = r1 + r2
    if rho >= 1.0 - 1e-9:
        return _INF, _INF
    w0 = 0.5 * (l1 + l2) * s2
    p2 = 1.0 - p1
    den = (1.0 - r1 - p2 * r2) * (1.0 - r2 - p1 * r1) - p1 * p2 * r1 * r2
    return (1.0 - rho * p1) * w0 / den, (1.0 - rho * p2) * w0 / den


# ---------------------------------------------------------------------------
# network utility with a delay deadline

@dataclass(frozen=True)
class NetworkUtilityConfig:
    """Two classes with deterministic unit service; class 1 carries a
    quality-of-service pair (d, b): complete within deadline d with miss
    probability at most b.  v1 rewards meeting the deadline, v2 penalizes
    declaring it missed, v3 values served class-2 traffic, v4 is the
    per-time holding cost on the class-2 response time."""

    model: SystemModel
    d: float
    b: float
    v1: float
    v2: float
    v3: float
    v4: float

    def __post_init__(self):
        self.model.require_two_classes()
        for spec in self.model.classes:
            if spec.service.kind != "deterministic" or spec.service.mean != 1.0:
                raise InvalidParameterError(
                    "deterministic unit service is required for both classes"
                )
        if self.d <= 1.0:
            raise InvalidParameterError("deadline d must exceed the unit service time")
        if not 0.0 < self.b < self.model.rho:
            raise InvalidParameterError("miss probability b must lie in (0, rho)")
        for name in ("v1", "v2", "v3", "v4"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be nonnegative")


def network_K(rho: float, d: float, b: float) -> float:
    """Mean-wait target K for the deadline class: the largest mean wait at
    which the exponential tail approximation still meets (d, b)."""
    if not 0.0 < rho < 1.0:
        raise InvalidParameterError("rho must lie in (0, 1)")
    if d <= 1.0:
        raise InvalidParameterError("d must exceed the unit service time")
    if not 0.0 < b < rho:
        raise InvalidParameterError("b must lie in (0, rho)")
    return rho * (d - 1.0) / math.log(rho / b)


def tail_prob_approx(rho: float, mean_wait: float, x: float) -> float:
    """Exponential tail approximation P(wait > x) ~ rho * exp(-rho x / mean),
    clamped to [0, 1]."""
    if mean_wait <= 0:
        raise InvalidParameterError("mean_wait must be positive")
    if x < 0:
        raise InvalidParameterError("x must be nonnegative")
    return min(1.0, max(0.0, rho * math.exp(-rho * x / mean_wait)))


def _class1_wait_range(model: SystemModel) -> tuple[float, float]:
    lo = strict_priority_waits_2class(model, 0)[0]
    hi = strict_priority_waits_2class(model, 1)[0]
    return lo, hi


def _partner_wait(model: SystemModel, w1: float) -> float:
    r1, r2 = model.rho_per_class
    return (model.rho * gfcfs_wait(model) - r1 * w1) / r2


def rp_param_for_utility(cfg: NetworkUtilityConfig) -> ControlSolution:
    """Relative-priority weight p1 maximizing the network utility; the
    dynamic case pins the class-1 mean wait to K, the static cases hand
    class 2 strict priority."""
    model = cfg.model
    r1, r2 = model.rho_per_class
    rho, w0 = model.rho, model.w0
    K = network_K(rho, cfg.d, cfg.b)
    lo, hi = _class1_wait_range(model)
    if not lo <= K <= hi:
        case = "deadline-slack" if K > hi else "deadline-unmeetable"
        return ControlSolution(case, {"p1": 0.0}, diagnostics={"K": K})
    L = math.log(rho / cfg.b)
    num = L * w0 - rho * (cfg.d - 1.0) * (1.0 - r2) * (1.0 - rho)
    den = rho * L * w0 + rho * (cfg.d - 1.0) * (r2 * (1.0 - r2) - r1 * (1.0 - r1))
    p1 = num / den
    return ControlSolution("dynamic", {"p1": p1}, diagnostics={"K": K})


def pp_param_for_utility_approx(cfg: NetworkUtilityConfig) -> ControlSolution:
    """Polling probability omega1 whose approximate class-1 mean wait equals
    K; static cases return omega1 = 0 (class-2 priority)."""
    model = cfg.model
    r1, r2 = model.rho_per_class
    rho, w0 = model.rho, model.w0
    K = network_K(rho, cfg.d, cfg.b)
    lo, hi = _class1_wait_range(model)
    if not lo <= K <= hi:
        case = "deadline-slack" if K > hi else "deadline-unmeetable"
        return ControlSolution(case, {"omega1": 0.0}, diagnostics={"K": K})
    L = math.log(rho / cfg.b)
    S = (rho * (cfg.d - 1.0) * (1.0 - r1) - w0 * L) / (rho * (cfg.d - 1.0) + (1.0 - w0) * L)
    den = r2 - rho * S
    if den == 0.0:
        raise InvalidParameterError("degenerate configuration: rho2 equals rho * S")
    omega1 = (S * S - S * (1.0 + r2) + r2) / den
    return ControlSolution("dynamic", {"omega1": omega1}, diagnostics={"K": K, "S": S})


def network_optimal_utility(cfg: NetworkUtilityConfig) -> ControlSolution:
    """Maximum utility over work-conserving disciplines, in three cases by
    the location of K relative to the achievable class-1 wait range."""
    model = cfg.model
    r1, r2 = model.rho_per_class
    K = network_K(model.rho, cfg.d, cfg.b)
    lo, hi = _class1_wait_range(model)
    w2_strict = model.w0 / (1.0 - r2)
    if K > hi:
        util = cfg.v1 + cfg.v3 - cfg.v4 * (1.0 + w2_strict)
        return ControlSolution("deadline-slack", {"w1": hi}, objective=util,
                               diagnostics={"K": K})
    if K < lo:
        util = cfg.v3 - cfg.v2 - cfg.v4 * (1.0 + w2_strict)
        return ControlSolution("deadline-unmeetable", {"w1": hi}, objective=util,
                               diagnostics={"K": K})
    w2 = _partner_wait(model, K)
    util = cfg.v1 + cfg.v3 - cfg.v4 * (1.0 + w2)
    return ControlSolution("dynamic", {"w1": K}, objective=util,
                           diagnostics={"K": K, "w2": w2})


def approx_utility_gfcfs(cfg: NetworkUtilityConfig) -> float:
    """Utility of the undifferentiated global-FCFS baseline, where both
    classes share the conserved mean wait."""
    K = network_K(cfg.model.rho, cfg.d, cfg.b)
    w = gfcfs_wait(cfg.model)
    if w <= K:
        return cfg.v1 + cfg.v3 - cfg.v4 * (1.0 + w)
    return cfg.v3 - cfg.v2 - cfg.v4 * (1.0 + w)


# ---------------------------------------------------------------------------
# linear holding costs: the cost-to-load index rule

def cmu_rule_2class(model: SystemModel, c1: float, c2: float) -> ControlSolution:
    """Minimize c1*W1 + c2*W2: strict priority to the class with the larger
    cost-to-load ratio.  On a tie the objective is flat and every
    work-conserving rule is optimal (p1 = 0 reported with a tie flag)."""
    model.require_two_classes()
    if c1 < 0 or c2 < 0:
        raise InvalidParameterError("holding costs must be nonnegative")
    r1, r2 = model.rho_per_class
    ratio1 = c1 / r1 if r1 > 0 else _INF
    ratio2 = c2 / r2 if r2 > 0 else _INF
    tie = ratio1 == ratio2 or math.isclose(ratio1, ratio2, rel_tol=1e-12)
    p1 = 1.0 if (ratio1 > ratio2 and not tie) else 0.0
    w = rp2_waits(model, p1)
    cost = c1 * w[0] + c2 * w[1]
    return ControlSolution(
        "tie" if tie else "strict",
        {"p1": p1},
        objective=cost,
        diagnostics={"ratio1": ratio1, "ratio2": ratio2, "tie": tie},
    )


# ---------------------------------------------------------------------------
# min-max fairness

def minmax_fair_point(model: SystemModel) -> tuple[float, float, float]:
    """Segment weight minimizing the larger of the two mean waits; both
    waits equalize at the conserved global-FCFS value."""
    model.require_two_classes()
    r1, r2 = model.rho_per_class
    alpha1 = (1.0 - r1) / (2.0 - r1 - r2)
    return alpha1, 1.0 - alpha1, gfcfs_wait(model)


# ---------------------------------------------------------------------------
# two-type computing service: utility and constrained revenue

@dataclass(frozen=True)
class HpcConfig:
    """Prime (P) and regular (R) job types with a common service
    distribution.  The prime price is demand-set as theta = a - b*W_P; w1
    weighs prime revenue and w2 the regular-class service level, penalized
    by default (set penalize_regular=False for the additive reading)."""

    lambda_P: float
    lambda_R: float
    service: ServiceDistribution
    a: float
    b: float
    w1: float
    w2: float
    S_R: Optional[float] = None
    penalize_regular: bool = True

    def __post_init__(self):
        if self.lambda_P <= 0 or self.lambda_R <= 0:
            raise InvalidParameterError("both arrival rates must be positive")
        if self.a <= 0 or self.b <= 0:
            raise InvalidParameterError("price-sensitivity coefficients must be positive")
        if self.w1 < 0 or self.w2 < 0:
            raise InvalidParameterError("weights must be nonnegative")

    def model(self) -> SystemModel:
        return SystemModel(
            (
                CustomerClassSpec(self.lambda_P, self.service),
                CustomerClassSpec(self.lambda_R, self.service),
            )
        )


def hpc_utility_opt(cfg: HpcConfig) -> ControlSolution:
    """Maximize w1*(a - b*W_P(p))*lambda_P - w2*W_R(p) over the relative
    priority weight p of the prime class.  Golden-section refinement on
    top of a coarse grid; endpoints always checked."""
    model = cfg.model()
    sign = -1.0 if cfg.penalize_regular else 1.0

    def theta(p):
        return cfg.a - cfg.b * rp2_waits(model, p)[0]

    if theta(1.0) < 0:
        raise InfeasibleError("the prime price is negative at every priority level")

    def util(p):
        w = rp2_waits(model, p)
        return cfg.w1 * (cfg.a - cfg.b * w[0]) * cfg.lambda_P + sign * cfg.w2 * w[1]

    grid = np.linspace(0.0, 1.0, 1001)
    vals = [util(p) for p in grid]
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    p_star, u_star = _golden_max(util, lo, hi, 1e-12)
    return ControlSolution(
        "interior" if 0.0 < p_star < 1.0 else "boundary",
        {"p1": p_star, "theta": theta(p_star)},
        objective=u_star,
        diagnostics={"grid_points": len(grid)},
    )


def hpc_revenue_constrained(cfg: HpcConfig) -> ControlSolution:
    """Maximize the prime revenue theta*lambda_P subject to the regular
    service level W_R(p) <= S_R.  Revenue rises and W_R worsens as p grows,
    so the optimum sits at p = 1 or on the constraint boundary."""
    if cfg.S_R is None:
        raise InvalidParameterError("S_R is required for the constrained problem")
    model = cfg.model()

    def w_reg(p):
        return rp2_waits(model, p)[1]

    def revenue(p):
        return (cfg.a - cfg.b * rp2_waits(model, p)[0]) * cfg.lambda_P

    w_min, w_max = w_reg(0.0), w_reg(1.0)
    if cfg.S_R < w_min - 1e-12:
        raise InfeasibleError(
            f"S_R={cfg.S_R:.6g} is below the minimum regular-class wait {w_min:.6g}"
        )
    if cfg.S_R >= w_max:
        p_star, active = 1.0, ()
    else:
        p_star = brentq(lambda p: w_reg(p) - cfg.S_R, 0.0, 1.0, xtol=1e-14)
        active = ("S_R",)
    return ControlSolution(
        "constrained" if active else "slack",
        {"p1": p_star, "theta": cfg.a - cfg.b * rp2_waits(model, p_star)[0]},
        objective=revenue(p_star),
        active_constraints=active,
        diagnostics={"W_R": w_reg(p_star)},
    )


# ---------------------------------------------------------------------------
# cloud pricing with delay-sensitive linear demand

@dataclass(frozen=True)
class CloudConfig:
    """Two priced classes on one server (rate mu, squared coefficient of
    variation scv).  Demand lambda_i = a_i - b_i*theta_i - c_i*W_i couples
    arrivals to the waits they induce; T_i are SLA caps on the waits."""

    mu: float
    scv: float
    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]
    T: tuple[float, float] = (_INF, _INF)

    def __post_init__(self):
        if self.mu <= 0:
            raise InvalidParameterError("mu must be positive")
        if self.scv < 0:
            raise InvalidParameterError("scv must be nonnegative")
        if any(x <= 0 for x in self.a) or any(x <= 0 for x in self.b):
            raise InvalidParameterError("demand intercepts and price slopes must be positive")
        if any(x < 0 for x in self.c):
            raise InvalidParameterError("delay sensitivities must be nonnegative")
        if any(x <= 0 for x in self.T):
            raise InvalidParameterError("SLA thresholds must be positive")


def _cloud_equilibrium(cfg: CloudConfig, theta1: float, theta2: float, p1: float):
    """Damped fixed point for the induced arrival rates; returns
    (l1, l2, w1, w2) or raises FixedPointDivergenceError."""
    s = 1.0 / cfg.mu
    s2 = (1.0 + cfg.scv) * s * s
    cap1 = max(cfg.a[0] - cfg.b[0] * theta1, 0.0)
    cap2 = max(cfg.a[1] - cfg.b[1] * theta2, 0.0)

    def demand(base, c, w, cap):
        # c = 0 demand ignores waits entirely, even unstable ones; positive
        # delay sensitivity chokes demand to zero when waits blow up
        if c == 0.0:
            d = base
        elif not math.isfinite(w):
            d = 0.0
        else:
            d = base - c * w
        return min(max(d, 0.0), cap)

    l1, l2 = min(cap1, 0.45 * cfg.mu), min(cap2, 0.45 * cfg.mu)
    for _ in range(1000):
        w1, w2 = _rp2_inline(l1, l2, s, s2, p1)
        n1 = demand(cfg.a[0] - cfg.b[0] * theta1, cfg.c[0], w1, cap1)
        n2 = demand(cfg.a[1] - cfg.b[1] * theta2, cfg.c[1], w2, cap2)
        d = max(abs(n1 - l1), abs(n2 - l2))
        l1 = 0.5 * (l1 + n1)
        l2 = 0.5 * (l2 + n2)
        if d < 1e-10:
            w1, w2 = _rp2_inline(l1, l2, s, s2, p1)
            return l1, l2, w1, w2
    raise FixedPointDivergenceError("arrival-rate fixed point did not converge")


def cloud_revenue_opt(cfg: CloudConfig, p_grid: int = 41, theta_tol: float = 1e-7) -> ControlSolution:
    """Maximize theta1*l1 + theta2*l2 over prices and the priority weight,
    with the arrival rates set by the demand fixed point and SLA caps
    enforced by rejection.  Nested golden-section over the two prices, a
    grid plus golden refinement over p."""

    theta_hi = (cfg.a[0] / cfg.b[0], cfg.a[1] / cfg.b[1])

    def revenue(theta1, theta2, p1):
        try:
            l1, l2, w1, w2 = _cloud_equilibrium(cfg, theta1, theta2, p1)
        except FixedPointDivergenceError:
            return -_INF, None
        if (l1 > 0 and w1 > cfg.T[0] + 1e-12) or (l2 > 0 and w2 > cfg.T[1] + 1e-12):
            return -_INF, None
        return theta1 * l1 + theta2 * l2, (l1, l2, w1, w2)

    def best_at_p(p1, tol):
        def outer(theta1):
            return _golden_max(
                lambda theta2: revenue(theta1, theta2, p1)[0], 0.0, theta_hi[1], tol
            )[1]

        t1, _ = _golden_max(outer, 0.0, theta_hi[0], tol)
        t2, r = _golden_max(lambda x: revenue(t1, x, p1)[0], 0.0, theta_hi[1], tol)
        return r, t1, t2

    # coarse scan over p, then one golden refinement of p, then a fine
    # price solve at the incumbent p
    coarse = max(theta_tol, 1e-3)
    grid = np.linspace(0.0, 1.0, p_grid)
    results = [(best_at_p(p, coarse), p) for p in grid]
    i = int(np.argmax([r[0][0] for r in results]))
    p_best = grid[i]
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, p_grid - 1)]
    if hi > lo:
        p_ref, r_ref = _golden_max(lambda p: best_at_p(p, coarse)[0], lo, hi, 1e-3)
        if r_ref > results[i][0][0]:
            p_best = p_ref
    r_best, t1_best, t2_best = best_at_p(p_best, theta_tol)
    if r_best == -_INF:
        raise InfeasibleError("no price pair satisfies the SLA constraints")

    r_final, detail = revenue(t1_best, t2_best, p_best)
    l1, l2, w1, w2 = detail
    active = tuple(
        name
        for name, w, T, l in (("T1", w1, cfg.T[0], l1), ("T2", w2, cfg.T[1], l2))
        if l > 0 and math.isfinite(T) and w > T - 1e-6
    )

    # coarse re-certification around the incumbent
    margin = 0.0
    for t1 in np.linspace(0.0, theta_hi[0], 21):
        for t2 in np.linspace(0.0, theta_hi[1], 21):
            r, _ = revenue(t1, t2, p_best)
            margin = max(margin, r - r_final)
    return ControlSolution(
        "priced",
        {"theta1": t1_best, "theta2": t2_best, "p1": p_best},
        objective=r_final,
        active_constraints=active,
        diagnostics={
            "lambda1": l1,
            "lambda2": l2,
            "W1": w1,
            "W2": w2,
            "certification_margin": margin,
        },
    )


# ---------------------------------------------------------------------------
# joint pricing of a secondary class sharing the server with a primary class

@dataclass(frozen=True)
class JointPricingConfig:
    """A primary stream (rate lambda_p) shares the server (rate mu, service
    variance sigma2) with a priced secondary stream whose demand is
    lambda_s = a - b*theta - c*S_s at quoted delay S_s; S_p caps the
    primary mean wait."""

    lambda_p: float
    mu: float
    sigma2: float
    S_p: float
    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.lambda_p <= 0 or self.mu <= 0:
            raise InvalidParameterError("rates must be positive")
        if self.lambda_p >= self.mu:
            raise InvalidParameterError("the primary stream alone must be stable")
        if self.sigma2 < 0:
            raise InvalidParameterError("sigma2 must be nonnegative")
        if self.S_p <= 0:
            raise InvalidParameterError("S_p must be positive")
        if self.a < 0 or self.b <= 0 or self.c < 0:
            raise InvalidParameterError("need a >= 0, b > 0, c >= 0")


def joint_pricing_T1(cfg: JointPricingConfig, grid: int = 200) -> ControlSolution:
    """Maximize the secondary-class revenue (a*l - l^2 - c*l*W_s(l, p))/b
    over the admitted rate l and the primary priority weight p, subject to
    the primary service level W_p <= S_p and stability l <= mu - lambda_p.
    Grid search with alternating golden-section refinement."""
    s = 1.0 / cfg.mu
    s2 = cfg.sigma2 + s * s
    ls_max = cfg.mu - cfg.lambda_p
    delay_blind = cfg.c == 0.0 and not math.isfinite(cfg.S_p)

    w_p0 = 0.5 * cfg.lambda_p * s2 / (1.0 - cfg.lambda_p * s)
    if cfg.S_p < w_p0 - 1e-12:
        raise InfeasibleError(
            f"S_p={cfg.S_p:.6g} is below the primary wait {w_p0:.6g} with no secondary traffic"
        )

    def obj(ls, p):
        if ls < 0.0 or ls > ls_max:
            return -_INF
        if delay_blind:
            return (cfg.a * ls - ls * ls) / cfg.b
        w_pri, w_sec = _rp2_inline(cfg.lambda_p, ls, s, s2, p)
        if w_pri > cfg.S_p + 1e-12:
            return -_INF
        if ls > 0.0 and not math.isfinite(w_sec):
            return -_INF
        return (cfg.a * ls - ls * ls - cfg.c * ls * (0.0 if ls == 0.0 else w_sec)) / cfg.b

    def ls_upper(p):
        # largest admissible rate under the service-level cap; the primary
        # wait is increasing in the secondary rate, so bisect on it
        if delay_blind or not math.isfinite(cfg.S_p):
            return ls_max
        def excess(ls):
            w_pri, _ = _rp2_inline(cfg.lambda_p, ls, s, s2, p)
            return min(w_pri, 1e18) - cfg.S_p
        if excess(ls_max) <= 0.0:
            return ls_max
        if excess(0.0) >= 0.0:
            return 0.0
        return brentq(excess, 0.0, ls_max, xtol=1e-14)

    def best_at_p(p):
        # the objective is concave in the rate on the feasible interval
        if delay_blind:
            # exactly quadratic: vertex at a/2, clipped to the stable range
            x = min(max(cfg.a / 2.0, 0.0), ls_max)
            return x, obj(x, p)
        return _golden_max(lambda x: obj(x, p), 0.0, ls_upper(p), 1e-12)

    p_grid = np.linspace(0.0, 1.0, grid)
    values = [best_at_p(p)[1] for p in p_grid]
    k = int(np.argmax(values))
    lo = p_grid[max(k - 1, 0)]
    hi = p_grid[min(k + 1, grid - 1)]
    p_star, _ = _golden_max(lambda p: best_at_p(p)[1], lo, hi, 1e-10)
    ls_star, v_star = best_at_p(p_star)
    if v_star == -_INF:
        raise InfeasibleError("no feasible (rate, priority) point")

    if delay_blind:
        w_pri, w_sec = _rp2_inline(cfg.lambda_p, ls_star, s, s2, p_star)
    else:
        w_pri, w_sec = _rp2_inline(cfg.lambda_p, ls_star, s, s2, p_star)
    theta = (cfg.a - ls_star - (cfg.c * w_sec if math.isfinite(w_sec) else 0.0)) / cfg.b
    active = []
    if math.isfinite(cfg.S_p) and w_pri > cfg.S_p - 1e-6:
        active.append("S_p")
    if ls_star > ls_max - 1e-9:
        active.append("stability")
    return ControlSolution(
        "priced",
        {"lambda_s": ls_star, "p1": p_star, "theta": theta, "S_s": w_sec},
        objective=v_star,
        active_constraints=tuple(active),
        diagnostics={"W_p": w_pri},
    )
