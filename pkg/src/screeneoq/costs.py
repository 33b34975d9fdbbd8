"""Per-cycle revenue and costs, expected profit and the profit-rate objective.

Every per-cycle cost is linear in a handful of defect statistics:
1 - rho, (1 - rho)^2, rho (1 - rho), the stage shares rho_i and the
backorder ratio g = (1 - rho) / ((1 - rho) - D/x_n).  :class:`DefectStats`
holds those, either realized for one lot (simulation) or as expectations
(analytics), and :func:`cycle_breakdown` evaluates the same algebra for
both.  Functions accept numpy arrays wherever a realized quantity appears,
so the simulator can evaluate many cycles at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BackorderCapacityError, DomainError, ShortageDuringScreeningError
from .model import Moments, Policy, Scenario, rho_proportions

# Relative slack on t4 >= 0 so that the boundary policy B = y((1-rho) - D/x_n)
# is not rejected on round-off.
_T4_RTOL = 1e-12


@dataclass(frozen=True)
class CycleTiming:
    """Phase lengths of one cycle, in years.

    ``t1``: backorders accumulate after stock runs out; ``t2 = T - t1``;
    ``t3``: backorders are cleared at rate (1 - rho) x_n - D;
    ``t4 = t2 - t3``: positive stock is depleted.
    """

    t_cycle: float
    t1: float
    t2: float
    t3: float
    t4: float


@dataclass(frozen=True)
class CycleBreakdown:
    revenue: float
    purchase: float
    screening: float
    hold_good: float
    hold_defective: float
    shortage: float
    ordering: float

    @property
    def total_cost(self):
        return (self.purchase + self.screening + self.hold_good + self.hold_defective
                + self.shortage + self.ordering)

    @property
    def net_profit(self):
        return self.revenue - self.total_cost


@dataclass(frozen=True)
class DefectStats:
    """Defect statistics that the cycle economics depend on linearly."""

    survival: object         # 1 - rho
    survival_sq: object      # (1 - rho)^2
    rho_survival: object     # rho (1 - rho)
    rho_props: object        # rho_i, last axis indexes stages
    ratio: object            # (1 - rho) / ((1 - rho) - D/x_n)

    @classmethod
    def realized(cls, defect_fractions, scenario: Scenario) -> "DefectStats":
        props = np.asarray(rho_proportions(np.asarray(defect_fractions, dtype=float)))
        rho = props.sum(axis=-1)
        surv = 1.0 - rho
        gap = surv - scenario.demand / scenario.slowest_rate
        if np.any(gap <= 0):
            raise ShortageDuringScreeningError(
                "good output of the slowest screen does not exceed demand")
        return cls(surv, surv * surv, rho * surv, props, surv / gap)

    @classmethod
    def expected(cls, moments: Moments) -> "DefectStats":
        surv = 1.0 - moments.e_rho
        return cls(surv, moments.p1, moments.p2, np.asarray(moments.e_rho_i), moments.e_ratio)


def _slowest_gap(rho, scenario):
    gap = (1.0 - np.asarray(rho, dtype=float)) * scenario.slowest_rate - scenario.demand
    if np.any(gap <= 0):
        raise ShortageDuringScreeningError(
            "(1 - rho) x_n must exceed demand; the backorder could never be cleared")
    return gap


def cycle_timing(policy: Policy, rho, scenario: Scenario) -> CycleTiming:
    """Phase lengths for a realized defective share ``rho``."""
    y, B, D = policy.y, policy.B, scenario.demand
    gap = _slowest_gap(rho, scenario)
    t_cycle = (1.0 - rho) * y / D
    t1 = B / D
    t2 = t_cycle - t1
    t3 = B / gap
    t4 = t2 - t3
    if np.any(t4 < -_T4_RTOL * t_cycle):
        raise BackorderCapacityError(
            f"backorder B={B:g} cannot be cleared within the cycle (t4 < 0)")
    return CycleTiming(t_cycle, t1, t2, t3, t4)


def revenue(y, rho, scenario: Scenario):
    """Sales of good items plus salvage of rejected ones."""
    return (1.0 - rho) * y * scenario.sell_price + rho * y * scenario.salvage


def screening_cost(y, rho_props, stages):
    """Each screen is charged for the items that reach it."""
    props = np.asarray(rho_props, dtype=float)
    if props.shape[-1] != len(stages):
        raise DomainError(
            f"{props.shape[-1]} rejection shares given for {len(stages)} stages")
    d = np.array([st.unit_cost for st in stages], dtype=float)
    reached = 1.0 - (np.cumsum(props, axis=-1) - props)
    return (reached * d).sum(axis=-1) * y


def screening_cost_rearranged(y, rho_props, stages):
    """[sum d_i - sum_{i<n} rho_i sum_{k>i} d_k] y."""
    props = np.asarray(rho_props, dtype=float)
    if props.shape[-1] != len(stages):
        raise DomainError(
            f"{props.shape[-1]} rejection shares given for {len(stages)} stages")
    d = np.array([st.unit_cost for st in stages], dtype=float)
    later = np.cumsum(d[::-1])[::-1] - d
    return (d.sum() - (props * later).sum(axis=-1)) * y


def _defect_dwell(y, rho_props, scenario):
    # sum_i rho_i y * (y / x_i)
    x = scenario.annual_rates()
    return (np.asarray(rho_props, dtype=float) / x).sum(axis=-1) * y * y


def holding_cost_good(policy: Policy, rho, rho_props, scenario: Scenario):
    """h [((1-rho)y - B)^2/(2D) + B^2/(2((1-rho)x_n - D)) + sum rho_i y^2/x_i]."""
    y, B, D = policy.y, policy.B, scenario.demand
    gap = _slowest_gap(rho, scenario)
    cycle_timing(policy, rho, scenario)
    stock = ((1.0 - rho) * y - B) ** 2 / (2.0 * D) + B * B / (2.0 * gap)
    return scenario.hold_good * (stock + _defect_dwell(y, rho_props, scenario))


def holding_cost_good_trapezoid(policy: Policy, rho, rho_props, scenario: Scenario):
    """Same cost from the phase areas t4^2 D/2 + t3^2 (1-rho) x_n / 2 + t3 t4 D."""
    tm = cycle_timing(policy, rho, scenario)
    D, x_n = scenario.demand, scenario.slowest_rate
    area = (tm.t4**2 * D / 2.0 + tm.t3**2 * (1.0 - rho) * x_n / 2.0 + tm.t3 * tm.t4 * D)
    return scenario.hold_good * (area + _defect_dwell(policy.y, rho_props, scenario))


def holding_cost_defective(y, rho_props, rho, scenario: Scenario):
    """h_d [rho(1-rho)/D - sum rho_i/x_i] y^2."""
    x = scenario.annual_rates()
    props = np.asarray(rho_props, dtype=float)
    return scenario.hold_defective * (
        rho * (1.0 - rho) / scenario.demand - (props / x).sum(axis=-1)) * y * y


def holding_cost_defective_events(y, rho_props, rho, scenario: Scenario):
    """h_d sum_i rho_i y (T - y/x_i): each reject batch waits until the next lot."""
    x = scenario.annual_rates()
    props = np.asarray(rho_props, dtype=float)
    T = (1.0 - np.asarray(rho, dtype=float)) * y / scenario.demand
    wait = np.expand_dims(T, -1) - y / x
    return scenario.hold_defective * (props * y * wait).sum(axis=-1)


def shortage_cost(policy: Policy, rho, scenario: Scenario):
    """b (1-rho) B^2 / (2D((1-rho) - D/x_n))."""
    B, D = policy.B, scenario.demand
    denom = (1.0 - rho) - D / scenario.slowest_rate
    if np.any(denom <= 0):
        raise ShortageDuringScreeningError("(1 - rho) - D/x_n must be positive")
    return scenario.backorder_cost * (1.0 - rho) * B * B / (2.0 * D * denom)


def shortage_cost_triangles(policy: Policy, rho, scenario: Scenario):
    """b (t3 B/2 + t1 B/2): backorders ramp down over t3 and up over t1."""
    B, D = policy.B, scenario.demand
    t3 = B / _slowest_gap(rho, scenario)
    return scenario.backorder_cost * (t3 * B / 2.0 + (B / D) * B / 2.0)


def cycle_breakdown(policy: Policy, stats: DefectStats, scenario: Scenario) -> CycleBreakdown:
    """Revenue and the six cost items for realized or expected statistics."""
    sc = scenario
    y, B, D = policy.y, policy.B, sc.demand
    x = sc.annual_rates()
    props = np.asarray(stats.rho_props, dtype=float)
    dwell = (props / x).sum(axis=-1)
    rho = 1.0 - stats.survival
    return CycleBreakdown(
        revenue=stats.survival * y * sc.sell_price + rho * y * sc.salvage,
        purchase=sc.purchase_cost * y * np.ones_like(stats.survival),
        screening=screening_cost(y, props, sc.stages),
        hold_good=sc.hold_good * (
            stats.survival_sq * y * y / (2.0 * D) - stats.survival * B * y / D
            + stats.ratio * B * B / (2.0 * D) + dwell * y * y),
        hold_defective=sc.hold_defective * (stats.rho_survival / D - dwell) * y * y,
        shortage=sc.backorder_cost * stats.ratio * B * B / (2.0 * D),
        ordering=sc.order_cost * np.ones_like(stats.survival),
    )


def expected_breakdown(policy: Policy, moments: Moments, scenario: Scenario) -> CycleBreakdown:
    bd = cycle_breakdown(policy, DefectStats.expected(moments), scenario)
    return CycleBreakdown(*(float(v) for v in (
        bd.revenue, bd.purchase, bd.screening, bd.hold_good,
        bd.hold_defective, bd.shortage, bd.ordering)))


def expected_net_profit(policy: Policy, moments: Moments, scenario: Scenario) -> float:
    """ETP(y, B): expected revenue minus expected cost per cycle."""
    return expected_breakdown(policy, moments, scenario).net_profit


def expected_cycle_length(y, moments: Moments, scenario: Scenario):
    return (1.0 - moments.e_rho) * y / scenario.demand


def etpu_constant(moments: Moments, scenario: Scenario) -> float:
    """sD + vDP4 - (c + A2)DP3, the part of the profit rate free of (y, B)."""
    m, sc = moments, scenario
    D = sc.demand
    return sc.sell_price * D + sc.salvage * D * m.p4 - (sc.purchase_cost + m.a2) * D * m.p3


def _linear_coefficient(moments: Moments, scenario: Scenario) -> float:
    # [h P1/2 + h A1 D + h_d (P2 - A1 D)] P3
    m, sc = moments, scenario
    D = sc.demand
    return (sc.hold_good * m.p1 / 2.0 + sc.hold_good * m.a1 * D
            + sc.hold_defective * (m.p2 - m.a1 * D)) * m.p3


def f_objective(policy_or_y, moments: Moments, scenario: Scenario, B=None):
    """Reduced cost rate f(y, B); the profit rate is ``etpu_constant - f``.

    Accepts a :class:`Policy`, or ``y`` and ``B`` (scalars or arrays).
    """
    y, B = _unpack(policy_or_y, B)
    m, sc = moments, scenario
    h, b, D = sc.hold_good, sc.backorder_cost, sc.demand
    return ((h + b) * B * B / (2.0 * m.r * y) - h * B
            + _linear_coefficient(m, sc) * y + sc.order_cost * D * m.p3 / y)


def f_completed_square(policy_or_y, moments: Moments, scenario: Scenario, B=None):
    """f(y, B) with the B-dependence written as a perfect square."""
    y, B = _unpack(policy_or_y, B)
    m, sc = moments, scenario
    h, b, D = sc.hold_good, sc.backorder_cost, sc.demand
    bracket = lot_size_denominator(m, sc)
    return ((h + b) / (2.0 * m.r * y) * (B - h * m.r / (h + b) * y) ** 2
            + bracket * m.p3 * y / 2.0 + sc.order_cost * D * m.p3 / y)


def lot_size_denominator(moments: Moments, scenario: Scenario) -> float:
    """hP1 + 2hA1D + 2h_d(P2 - A1D) - h^2 R / ((h+b) P3)."""
    m, sc = moments, scenario
    h, b, D = sc.hold_good, sc.backorder_cost, sc.demand
    return (h * m.p1 + 2.0 * h * m.a1 * D + 2.0 * sc.hold_defective * (m.p2 - m.a1 * D)
            - h * h * m.r / ((h + b) * m.p3))


def etpu(policy_or_y, moments: Moments, scenario: Scenario, B=None):
    """Expected profit per unit time by the renewal reward theorem."""
    y, B = _unpack(policy_or_y, B)
    m, sc = moments, scenario
    h, b, D = sc.hold_good, sc.backorder_cost, sc.demand
    return (sc.sell_price * D + sc.salvage * D * m.p4 - (sc.purchase_cost + m.a2) * D * m.p3
            - ((h + b) * B * B / (2.0 * m.r * y) - h * B
               + _linear_coefficient(m, sc) * y + sc.order_cost * D * m.p3 / y))


def _unpack(policy_or_y, B):
    if isinstance(policy_or_y, Policy):
        return policy_or_y.y, policy_or_y.B
    y = np.asarray(policy_or_y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("order size y must be positive")
    B = 0.0 if B is None else B
    if np.ndim(y) == 0 and np.ndim(B) == 0:
        return float(y), float(B)
    return y, np.asarray(B, dtype=float)
