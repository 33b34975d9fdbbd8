"""Optimal order size and backorder level.

The reduced cost rate is

    f(y, B) = (h+b) B^2 / (2 R y) - h B + C y + K D P3 / y,

with C = [h P1/2 + h A1 D + h_d (P2 - A1 D)] P3.  For fixed y it is a
parabola in B, minimised at B = h R y / (h + b); substituting leaves
a y + c / y, minimised in closed form.  :func:`numeric_optimum` reaches the
same point by direct search as an independent check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize as sopt

from .costs import cycle_timing, etpu, etpu_constant, f_objective, lot_size_denominator
from .errors import (BackorderCapacityError, DomainError, NoFiniteOptimumError,
                     UnsupportedError)
from .model import (Moments, Policy, Scenario, UniformOnZeroBeta, compute_moments,
                    uniform_ratio_closed_form)

B_INFINITY_PROXY = 1e12


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    APPROXIMATE = "approximate"
    NUMERIC = "numeric"


@dataclass
class Solution:
    y_star: float
    b_star: float
    etpu_star: float
    f_min: float
    method: Method
    diagnostics: list = field(default_factory=list)

    @property
    def policy(self) -> Policy:
        return Policy(self.y_star, self.b_star)


class Hessian(NamedTuple):
    d2f_dB2: float
    d2f_dy2: float
    d2f_dBdy: float
    determinant: float


def _denominator(moments, scenario):
    den = lot_size_denominator(moments, scenario)
    if not den > 0:
        raise NoFiniteOptimumError(
            f"lot-size denominator {den:.6g} is not positive; "
            "the backordering benefit outweighs every holding cost")
    return den


def _policy_diagnostics(y, B, moments, scenario):
    diags = []
    if scenario.backorder_cost == 0:
        diags.append("b = 0: backorders are free, so B* = R y* and the cycle "
                     "may not clear them before stock runs out")
    worst = scenario.rho_max
    try:
        cycle_timing(Policy(y, B), worst, scenario)
    except BackorderCapacityError:
        diags.append(f"t4 < 0 at the optimum for the worst-case defective share "
                     f"rho_max={worst:.6g}: B={B:.6g} exceeds what that lot can clear")
    return diags


def b_given_y(y, moments: Moments, scenario: Scenario):
    """Backorder level minimising f for a fixed order size."""
    y = np.asarray(y, dtype=float) if np.ndim(y) else float(y)
    if np.any(np.asarray(y) <= 0):
        raise DomainError("order size y must be positive")
    h, b = scenario.hold_good, scenario.backorder_cost
    return h * moments.r / (h + b) * y


def optimal_policy(moments: Moments, scenario: Scenario) -> Solution:
    """Closed-form optimum y*, B* and the maximal profit rate."""
    den = _denominator(moments, scenario)
    K, D = scenario.order_cost, scenario.demand
    y = math.sqrt(2.0 * K * D / den)
    B = b_given_y(y, moments, scenario)
    f_min = moments.p3 * math.sqrt(2.0 * K * D * den)
    return Solution(
        y_star=y,
        b_star=B,
        etpu_star=etpu_constant(moments, scenario) - f_min,
        f_min=f_min,
        method=Method.CLOSED_FORM,
        diagnostics=_policy_diagnostics(y, B, moments, scenario),
    )


def amgm_lower_bound(moments: Moments, scenario: Scenario) -> float:
    """Lower bound on f(y, B) over all positive (y, B); attained at the optimum."""
    den = lot_size_denominator(moments, scenario)
    if den < 0:
        raise NoFiniteOptimumError(f"negative radicand {den:.6g} in the AM-GM bound")
    return moments.p3 * math.sqrt(2.0 * scenario.order_cost * scenario.demand * den)


def hessian_check(policy: Policy, moments: Moments, scenario: Scenario) -> Hessian:
    """Analytic second partial derivatives of f and their determinant."""
    y, B = policy.y, policy.B
    hb = scenario.hold_good + scenario.backorder_cost
    R = moments.r
    kdp3 = scenario.order_cost * scenario.demand * moments.p3
    return Hessian(
        d2f_dB2=hb / (R * y),
        d2f_dy2=hb * B * B / (R * y**3) + 2.0 * kdp3 / y**3,
        d2f_dBdy=-hb * B / (R * y * y),
        determinant=2.0 * hb * kdp3 / (R * y**4),
    )


def classical_eoq_with_backorders(scenario: Scenario) -> float:
    """sqrt(2KD(h+b)/(hb)), or sqrt(2KD/h) when backorders are forbidden."""
    K, D, h, b = (scenario.order_cost, scenario.demand, scenario.hold_good,
                  scenario.backorder_cost)
    if b == 0:
        return math.inf
    return math.sqrt(2.0 * K * D * (h + b) / (h * b))


def numeric_optimum(moments: Moments, scenario: Scenario, *, xtol: float = 1e-10) -> Solution:
    """Minimise f by golden-section search in y with B eliminated exactly.

    The search brackets y in [1, 100 * y_classical], where y_classical is
    the textbook lot size sqrt(2KD/h), and never uses the closed-form y*.
    """
    K, D, h = scenario.order_cost, scenario.demand, scenario.hold_good
    diags = []
    if not lot_size_denominator(moments, scenario) > 0:
        raise NoFiniteOptimumError("f is unbounded below in y")

    def f_of_y(y):
        return float(f_objective(y, moments, scenario, B=b_given_y(y, moments, scenario)))

    y_hi = 100.0 * math.sqrt(2.0 * K * D / h) if h > 0 and K > 0 else 1e6
    lo, hi = 1.0, max(y_hi, 2.0)
    grid = np.geomspace(lo, hi, 401)
    values = np.array([f_of_y(v) for v in grid])
    k = int(np.argmin(values))
    if k == 0 or k == len(grid) - 1:
        diags.append(f"minimum on bracket edge y={grid[k]:.6g}; bracket [{lo:g}, {hi:g}] failed")
        y = float(grid[k])
    else:
        res = sopt.minimize_scalar(
            f_of_y, bracket=(grid[k - 1], grid[k], grid[k + 1]),
            method="golden", tol=xtol)
        y = float(res.x)
    B = float(b_given_y(y, moments, scenario))
    f_min = f_of_y(y)
    diags.extend(_policy_diagnostics(y, B, moments, scenario))
    return Solution(y, B, etpu_constant(moments, scenario) - f_min, f_min, Method.NUMERIC, diags)


def _single_uniform(scenario: Scenario):
    if scenario.n != 1:
        raise UnsupportedError(f"single-stage formula called with {scenario.n} stages")
    dist = scenario.stages[0].defect_dist
    if not isinstance(dist, UniformOnZeroBeta):
        raise UnsupportedError("single-stage formula requires a Uniform(0, beta) stage")
    if scenario.hold_defective != 0:
        raise UnsupportedError("single-stage formula assumes h_d = 0")
    return dist.beta, scenario.demand / scenario.slowest_rate


def exact_policy_n1_uniform(scenario: Scenario) -> Solution:
    """One uniform screen, h_d = 0: optimum written directly in beta and D/x_1."""
    beta, q = _single_uniform(scenario)
    if not 1.0 - beta - q > 0:
        raise DomainError(f"1 - beta - D/x_1 = {1.0 - beta - q:.6g} must be positive")
    K, D, h, b = (scenario.order_cost, scenario.demand, scenario.hold_good,
                  scenario.backorder_cost)
    inv_ratio = 1.0 / uniform_ratio_closed_form(beta, q)
    bracket = (1.0 - beta + beta * beta / 3.0 + D * beta / scenario.slowest_rate
               - h * (1.0 - beta / 2.0) ** 2 / (h + b) * inv_ratio)
    if not bracket > 0:
        raise NoFiniteOptimumError(f"lot-size bracket {bracket:.6g} is not positive")
    y = math.sqrt(2.0 * K * D / (h * bracket))
    B = h * (2.0 - beta) / (2.0 * (h + b)) * inv_ratio * y
    return _evaluated(y, B, scenario, Method.CLOSED_FORM)


def approx_policy_n1(scenario: Scenario) -> Solution:
    """Small-beta approximation for one uniform screen with h_d = 0."""
    beta, q = _single_uniform(scenario)
    K, D, h, b = (scenario.order_cost, scenario.demand, scenario.hold_good,
                  scenario.backorder_cost)
    y = math.sqrt(2.0 * K * D * (h + b)
                  / (h * (h * (1.0 - beta) * q + b * (1.0 - beta - q * beta))))
    B = h * (2.0 - beta) * (1.0 - beta - q) / (2.0 * (h + b) * (1.0 - beta)) * y
    return _evaluated(y, B, scenario, Method.APPROXIMATE)


def _evaluated(y, B, scenario, method):
    moments = compute_moments(scenario)
    f_val = float(f_objective(y, moments, scenario, B=B))
    return Solution(y, B, etpu_constant(moments, scenario) - f_val, f_val, method,
                    _policy_diagnostics(y, B, moments, scenario))


def b_infinite_limit(moments: Moments, scenario: Scenario) -> float:
    """Limit of y* as the backorder cost grows without bound."""
    m, sc = moments, scenario
    h, D = sc.hold_good, sc.demand
    den = h * m.p1 + 2.0 * h * m.a1 * D + 2.0 * sc.hold_defective * (m.p2 - m.a1 * D)
    if not den > 0:
        raise NoFiniteOptimumError(f"no-shortage denominator {den:.6g} is not positive")
    return math.sqrt(2.0 * sc.order_cost * D / den)


def salvage_threshold(moments: Moments, scenario: Scenario) -> float:
    """Salvage value at or below which storing rejects for return does not pay.

    At v equal to this threshold the salvage income v D P4 exactly offsets
    the reject-storage share of the optimal cost rate.
    """
    m, sc = moments, scenario
    if sc.hold_defective < 0:
        raise DomainError("h_d must be non-negative")
    if sc.hold_defective == 0:
        return 0.0
    if not m.e_rho > 0:
        raise DomainError("threshold undefined when no items are rejected")
    excess = m.p2 / sc.demand - m.a1
    if not excess > 0:
        raise DomainError(f"P2/D - A1 = {excess:.6g} must be positive")
    return 2.0 / m.e_rho * math.sqrt(sc.order_cost * sc.hold_defective * excess)


@dataclass
class SellingPriceBound:
    """Break-even selling price for v = 0, h_d = 0.

    ``printed`` evaluates the commonly quoted expression whose radicand
    subtracts h A1/(h+b).  ``breakeven`` solves ETPU* = 0 directly, where
    the subtracted term is h R / ((h+b) P3).  ``value`` is the breakeven
    price; ``diagnostics`` records any disagreement between the two.
    """

    printed: float
    breakeven: float
    diagnostics: list = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.breakeven


def min_selling_price(moments: Moments, scenario: Scenario, *, rtol: float = 1e-9) -> SellingPriceBound:
    m, sc = moments, scenario
    if sc.salvage != 0 or sc.hold_defective != 0:
        raise UnsupportedError("minimum selling price assumes v = 0 and h_d = 0")
    K, D, h, b = sc.order_cost, sc.demand, sc.hold_good, sc.backorder_cost
    base = sc.purchase_cost + m.a2

    printed_rad = 2.0 * K * h / D * (m.p1 + 2.0 * m.a1 * D - h * m.a1 / (h + b))
    consistent_rad = 2.0 * K * h / D * (m.p1 + 2.0 * m.a1 * D - h * m.r / ((h + b) * m.p3))
    if consistent_rad < 0:
        raise DomainError(f"negative radicand {consistent_rad:.6g}")
    breakeven = m.p3 * (base + math.sqrt(consistent_rad))
    printed = m.p3 * (base + math.sqrt(printed_rad)) if printed_rad >= 0 else math.nan

    diags = []
    if not math.isclose(printed, breakeven, rel_tol=rtol):
        diags.append(
            f"printed-radicand price {printed:.6f} differs from the break-even price "
            f"{breakeven:.6f} (relative {abs(printed / breakeven - 1):.3e}); "
            "the break-even value is returned")
    return SellingPriceBound(printed, breakeven, diags)
