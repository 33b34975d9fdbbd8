"""Renewal-cycle Monte Carlo check of the expected profit rate.

Each cycle draws one defect fraction per stage, evaluates that lot's profit
exactly from its piecewise-linear inventory paths, and the long-run profit
rate is estimated as total profit over total time.

Random numbers for cycle ``i`` depend only on ``(seed, i)``: cycles are
grouped in fixed blocks and each block owns a child stream spawned from
the seed, so any evaluation order or partition gives identical draws.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .costs import (CycleBreakdown, DefectStats, cycle_breakdown, cycle_timing,
                    holding_cost_defective_events, holding_cost_good_trapezoid, revenue,
                    screening_cost, shortage_cost_triangles)
from .errors import DomainError, EstimationError, InfeasibleError
from .model import Policy, Scenario, rho_proportions

BLOCK_SIZE = 4096
_T4_RTOL = 1e-12


@dataclass(frozen=True)
class SimConfig:
    cycles: int = 100_000
    seed: int = 0
    antithetic: bool = False
    keep_trace: bool = False

    def __post_init__(self):
        if self.cycles < 1:
            raise DomainError("cycles must be at least 1")
        if self.antithetic and self.cycles % 2:
            raise DomainError("antithetic sampling needs an even number of cycles")


@dataclass
class SimResult:
    etpu_estimate: float
    std_error: float
    mean_cycle_length: float
    cycles: int
    infeasible_cycles: int
    per_cycle_trace: Optional[np.ndarray] = None   # columns: profit, length, rho

    @property
    def std_error_available(self) -> bool:
        return not math.isnan(self.std_error)

    def z_score(self, reference: float) -> float:
        diff = self.etpu_estimate - reference
        if not self.std_error_available:
            return math.nan
        if self.std_error == 0:
            return 0.0 if abs(diff) <= 1e-9 * abs(reference) else math.copysign(math.inf, diff)
        return diff / self.std_error


# ---------------------------------------------------------------------------
# Random draws
# ---------------------------------------------------------------------------


def _block_uniforms(seed: int, block: int, n_stages: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.PCG64(ss)).random((BLOCK_SIZE, n_stages))


def uniform_draws(seed: int, start: int, count: int, n_stages: int,
                  antithetic: bool = False) -> np.ndarray:
    """Uniform variates for cycles ``start .. start+count-1``, shape (count, n_stages).

    With ``antithetic`` set, cycle ``2j+1`` uses ``1 - u`` of cycle ``2j``.
    """
    idx = np.arange(start, start + count)
    base = idx // 2 if antithetic else idx
    out = np.empty((count, n_stages))
    for block in np.unique(base // BLOCK_SIZE):
        sel = (base // BLOCK_SIZE) == block
        out[sel] = _block_uniforms(seed, int(block), n_stages)[base[sel] % BLOCK_SIZE]
    if antithetic:
        odd = idx % 2 == 1
        out[odd] = 1.0 - out[odd]
    return out


def sample_defects(scenario: Scenario, seed: int, start: int, count: int,
                   antithetic: bool = False) -> np.ndarray:
    """Defect fractions p, shape (count, n), for a contiguous range of cycles."""
    u = uniform_draws(seed, start, count, scenario.n, antithetic)
    return np.column_stack([st.defect_dist.from_uniform(u[:, i])
                            for i, st in enumerate(scenario.stages)])


# ---------------------------------------------------------------------------
# One cycle
# ---------------------------------------------------------------------------


def cycle_accounts(policy: Policy, sampled_p, scenario: Scenario) -> CycleBreakdown:
    """Revenue and costs of one realized lot, from its inventory geometry.

    Raises :class:`InfeasibleError` if the lot cannot clear its backorders.
    """
    props = np.asarray(rho_proportions(np.asarray(sampled_p, dtype=float)))
    rho = float(props.sum())
    cycle_timing(policy, rho, scenario)
    y = policy.y
    return CycleBreakdown(
        revenue=float(revenue(y, rho, scenario)),
        purchase=scenario.purchase_cost * y,
        screening=float(screening_cost(y, props, scenario.stages)),
        hold_good=float(holding_cost_good_trapezoid(policy, rho, props, scenario)),
        hold_defective=float(holding_cost_defective_events(y, props, rho, scenario)),
        shortage=float(shortage_cost_triangles(policy, rho, scenario)),
        ordering=scenario.order_cost,
    )


def simulate_cycle(policy: Policy, sampled_p, scenario: Scenario):
    """Return ``(profit, length)`` of one cycle with defect fractions ``sampled_p``."""
    acc = cycle_accounts(policy, sampled_p, scenario)
    rho = float(np.sum(rho_proportions(np.asarray(sampled_p, dtype=float))))
    return acc.net_profit, (1.0 - rho) * policy.y / scenario.demand


def _feasible_mask(policy, rho, scenario):
    gap = (1.0 - rho) * scenario.slowest_rate - scenario.demand
    ok = gap > 0
    D = scenario.demand
    T = (1.0 - rho) * policy.y / D
    with np.errstate(divide="ignore", invalid="ignore"):
        t4 = T - policy.B / D - policy.B / gap
    return ok & (t4 >= -_T4_RTOL * T)


def evaluate_cycles(policy: Policy, p: np.ndarray, scenario: Scenario):
    """Vectorised profit, length and rho for the feasible rows of ``p``.

    Returns ``(profit, length, rho, feasible_mask)``.
    """
    props = rho_proportions(p)
    rho = props.sum(axis=-1)
    mask = _feasible_mask(policy, rho, scenario)
    stats = DefectStats.realized(p[mask], scenario)
    profit = cycle_breakdown(policy, stats, scenario).net_profit
    length = (1.0 - rho[mask]) * policy.y / scenario.demand
    return np.asarray(profit, dtype=float), length, rho[mask], mask


# ---------------------------------------------------------------------------
# Estimator
# ---------------------------------------------------------------------------


def estimate_etpu(policy: Policy, scenario: Scenario, config: SimConfig = SimConfig()) -> SimResult:
    """Ratio-of-sums renewal reward estimate of the long-run profit rate.

    The standard error comes from the delta method on the ratio; with
    antithetic sampling each pair of cycles is treated as one observation.
    """
    p = sample_defects(scenario, config.seed, 0, config.cycles, config.antithetic)
    profit, length, rho, mask = evaluate_cycles(policy, p, scenario)
    n_bad = int((~mask).sum())
    if n_bad == len(mask):
        raise EstimationError("every sampled cycle was infeasible")
    if n_bad:
        warnings.warn(f"{n_bad} of {config.cycles} sampled cycles were infeasible and excluded",
                      RuntimeWarning, stacklevel=2)

    estimate = profit.sum() / length.sum()
    if config.antithetic and not n_bad:
        unit_p = profit.reshape(-1, 2).sum(axis=1)
        unit_l = length.reshape(-1, 2).sum(axis=1)
    else:
        unit_p, unit_l = profit, length

    deterministic = all(st.defect_dist.is_degenerate for st in scenario.stages)
    if deterministic:
        se = 0.0
    elif len(unit_p) < 2:
        se = math.nan
    else:
        resid = unit_p - estimate * unit_l
        se = float(np.std(resid, ddof=1) / math.sqrt(len(unit_p)) / unit_l.mean())

    trace = np.column_stack([profit, length, rho]) if config.keep_trace else None
    return SimResult(float(estimate), se, float(length.mean()), config.cycles, n_bad, trace)


def write_trace_csv(result: SimResult, path) -> None:
    """Write the per-cycle trace as CSV with columns cycle, profit, length, rho."""
    if result.per_cycle_trace is None:
        raise DomainError("result carries no per-cycle trace; rerun with keep_trace=True")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cycle", "profit", "length", "rho"])
        for i, (pr, ln, rh) in enumerate(result.per_cycle_trace):
            w.writerow([i, repr(float(pr)), repr(float(ln)), repr(float(rh))])


# ---------------------------------------------------------------------------
# Inventory paths
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled inventory paths over one cycle, all arrays of equal length.

    ``good`` is on-hand stock including not-yet-rejected items, ``defective``
    the stock of rejects awaiting return, ``backorder`` the outstanding
    backorders (a non-negative quantity).
    """

    time: np.ndarray
    good: np.ndarray
    defective: np.ndarray
    backorder: np.ndarray

    def rows(self):
        return list(zip(self.time.tolist(), self.good.tolist(),
                        self.defective.tolist(), self.backorder.tolist()))


def _levels(t, policy, props, rho, scenario, tm):
    y, B, D = policy.y, policy.B, scenario.demand
    x = scenario.annual_rates()
    x_n = scenario.slowest_rate
    done = y / x
    base = np.where(
        t <= tm.t3,
        (1.0 - rho) * y - (1.0 - rho) * x_n * t,
        np.maximum(tm.t4 * D - D * (t - tm.t3), 0.0))
    pending = (props * y * (t[:, None] < done)).sum(axis=1)
    defective = (props * y * (t[:, None] >= done)).sum(axis=1)
    backorder = np.where(
        t <= tm.t3, B - ((1.0 - rho) * x_n - D) * t,
        np.where(t <= tm.t2, 0.0, D * (t - tm.t2)))
    return base + pending, defective, backorder


def trajectory(policy: Policy, sampled_p, scenario: Scenario, samples_per_cycle: int = 1000,
               include_breakpoints: bool = False) -> Trajectory:
    """Sample the good, defective and backorder levels over one cycle.

    Levels at a jump take the value just after it, except at ``t = T``,
    where rejects are still on hand (they leave with the next delivery).
    With ``include_breakpoints`` every kink and jump is added to the grid,
    jumps as a pair of left/right limits, which makes trapezoid integrals
    exact.
    """
    if samples_per_cycle < 2:
        raise DomainError("need at least two samples per cycle")
    props = np.asarray(rho_proportions(np.asarray(sampled_p, dtype=float)))
    rho = float(props.sum())
    tm = cycle_timing(policy, rho, scenario)
    t = np.linspace(0.0, tm.t_cycle, samples_per_cycle)
    good, dfc, bo = _levels(t, policy, props, rho, scenario, tm)
    if include_breakpoints:
        jumps = policy.y / scenario.annual_rates()
        jumps = jumps[jumps < tm.t_cycle]
        kinks = np.array([tm.t3, tm.t2])
        extra = np.concatenate([kinks, jumps])
        e_good, e_dfc, e_bo = _levels(extra, policy, props, rho, scenario, tm)
        # left limits, evaluated one ulp before each jump but stored at the jump time
        l_good, l_dfc, l_bo = _levels(np.nextafter(jumps, -np.inf), policy, props, rho,
                                      scenario, tm)
        t = np.concatenate([t, extra, jumps])
        good = np.concatenate([good, e_good, l_good])
        dfc = np.concatenate([dfc, e_dfc, l_dfc])
        bo = np.concatenate([bo, e_bo, l_bo])
        # left limits sort before right limits at equal time
        tag = np.concatenate([np.ones(samples_per_cycle + len(extra)), np.zeros(len(jumps))])
        order = np.lexsort((tag, t))
        t, good, dfc, bo = t[order], good[order], dfc[order], bo[order]
    return Trajectory(t, good, dfc, bo)
