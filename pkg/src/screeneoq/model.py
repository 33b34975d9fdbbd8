"""Domain types and defect-fraction moments for the multi-screen EOQ model.

A lot of size ``y`` passes through ``n`` screens ordered from fastest to
slowest.  Screen ``i`` rejects a random fraction ``p_i`` of what reaches it,
so the share of the original lot rejected at screen ``i`` is

    rho_i = p_i * prod_{k<i} (1 - p_k)

and the total rejected share is ``rho = 1 - prod_i (1 - p_i)``.  Everything
the cost and optimisation modules need from the defect distributions is
collected in :class:`Moments`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, ScenarioError

DEFAULT_MINUTES_PER_YEAR = 175200.0
DEFAULT_QUADRATURE_NODES = 64
# Random dimensions above this count switch the R expectation to Monte Carlo.
MAX_QUADRATURE_DIMS = 3
DEFAULT_MC_SAMPLES = 10**7
_MC_CHUNK = 10**6

R_METHODS = ("auto", "closed_form", "quadrature", "monte_carlo")
R_CONVENTIONS = ("exact", "additive")


# ---------------------------------------------------------------------------
# Defect distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformOnZeroBeta:
    """Defect fraction uniformly distributed on ``(0, beta)``."""

    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"uniform defect bound beta must lie in (0, 1), got {self.beta}")

    @property
    def mean(self) -> float:
        return self.beta / 2.0

    @property
    def survival_sq_mean(self) -> float:
        """E[(1 - p)^2]."""
        b = self.beta
        return 1.0 - b + b * b / 3.0

    @property
    def sup(self) -> float:
        return self.beta

    @property
    def is_degenerate(self) -> bool:
        return False

    def from_uniform(self, u):
        return self.beta * np.asarray(u, dtype=float)

    def quadrature(self, nodes: int):
        x, w = np.polynomial.legendre.leggauss(nodes)
        return self.beta * (x + 1.0) / 2.0, w / 2.0


@dataclass(frozen=True)
class PointMass:
    """Deterministic defect fraction ``p``."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise DomainError(f"point-mass defect fraction must lie in [0, 1), got {self.p}")

    @property
    def mean(self) -> float:
        return self.p

    @property
    def survival_sq_mean(self) -> float:
        return (1.0 - self.p) ** 2

    @property
    def sup(self) -> float:
        return self.p

    @property
    def is_degenerate(self) -> bool:
        return True

    def from_uniform(self, u):
        return np.full(np.shape(u), self.p, dtype=float)

    def quadrature(self, nodes: int):
        return np.array([self.p]), np.array([1.0])


DefectDistribution = Union[UniformOnZeroBeta, PointMass]


def uniform_defects(beta: float) -> DefectDistribution:
    """Uniform(0, beta), with ``beta == 0`` collapsing to ``PointMass(0)``."""
    if beta == 0:
        return PointMass(0.0)
    return UniformOnZeroBeta(beta)


# ---------------------------------------------------------------------------
# Scenario types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScreeningStage:
    """One screening process.

    ``rate_raw`` is in units per minute; :meth:`Scenario.annual_rates`
    converts it to units per year.
    """

    rate_raw: float
    unit_cost: float
    defect_dist: DefectDistribution
    label: str = ""

    def __post_init__(self):
        if not self.rate_raw > 0:
            raise DomainError(f"stage {self.label!r}: screening rate must be positive")
        if self.unit_cost < 0:
            raise DomainError(f"stage {self.label!r}: unit screening cost must be non-negative")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class Scenario:
    """Economic environment plus the ordered screening stages.

    Monetary quantities are per unit (or per unit per year for the holding
    and backorder rates); ``demand`` is in units per year.
    """

    demand: float
    order_cost: float
    purchase_cost: float
    sell_price: float
    salvage: float
    hold_good: float
    hold_defective: float
    backorder_cost: float
    stages: tuple = ()
    minutes_per_year: float = DEFAULT_MINUTES_PER_YEAR

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.demand > 0:
            raise ScenarioError("demand must be positive", [Diagnostic("domain", "demand <= 0")])
        for name in ("order_cost", "purchase_cost", "sell_price", "salvage",
                     "hold_good", "hold_defective", "backorder_cost"):
            if getattr(self, name) < 0:
                raise ScenarioError(f"{name} must be non-negative",
                                    [Diagnostic("domain", f"{name} < 0")])
        if not self.minutes_per_year > 0:
            raise ScenarioError("minutes_per_year must be positive",
                                [Diagnostic("domain", "minutes_per_year <= 0")])
        if not self.stages:
            raise ScenarioError("at least one screening stage is required",
                                [Diagnostic("domain", "no stages")])

    @property
    def n(self) -> int:
        return len(self.stages)

    def annual_rates(self) -> np.ndarray:
        return np.array([st.rate_raw for st in self.stages], dtype=float) * self.minutes_per_year

    @property
    def slowest_rate(self) -> float:
        return float(self.annual_rates()[-1])

    @property
    def unit_costs(self) -> np.ndarray:
        return np.array([st.unit_cost for st in self.stages], dtype=float)

    @property
    def labels(self) -> list:
        return [st.label for st in self.stages]

    @property
    def rho_max(self) -> float:
        """Largest realizable total defective share, 1 - prod(1 - sup p_i)."""
        return 1.0 - math.prod(1.0 - st.defect_dist.sup for st in self.stages)

    def sorted_by_rate(self) -> "Scenario":
        """Copy with stages in non-increasing rate order (stable for ties)."""
        order = sorted(range(self.n), key=lambda i: -self.stages[i].rate_raw)
        return self.replace(stages=tuple(self.stages[i] for i in order))

    def select(self, labels: Sequence[str]) -> "Scenario":
        """Copy keeping only the named stages, in the order given."""
        by_label = {st.label: st for st in self.stages}
        missing = [lab for lab in labels if lab not in by_label]
        if missing:
            raise KeyError(
                f"unknown stage label(s) {missing}; available: {sorted(by_label)}")
        return self.replace(stages=tuple(by_label[lab] for lab in labels))

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Policy:
    """Decision pair: order size ``y`` and maximum backorder ``B``."""

    order_size: float
    max_backorder: float = 0.0

    def __post_init__(self):
        if not self.order_size > 0:
            raise DomainError(f"order size must be positive, got {self.order_size}")
        if self.max_backorder < 0:
            raise DomainError(f"maximum backorder must be non-negative, got {self.max_backorder}")

    @property
    def y(self) -> float:
        return self.order_size

    @property
    def B(self) -> float:
        return self.max_backorder


def policy_within_support(policy: Policy, scenario: Scenario) -> bool:
    """True when ``B <= (1 - rho_max) y``, the good output of the worst lot."""
    return policy.max_backorder <= (1.0 - scenario.rho_max) * policy.order_size


@dataclass(frozen=True)
class Moments:
    """Distribution-derived scalars feeding the cost and optimum formulas.

    ``e_ratio`` is E[(1 - rho) / ((1 - rho) - D/x_n)], the expectation
    inside R.  ``r_std_error`` is non-zero only when that expectation was
    estimated by Monte Carlo.
    """

    e_rho_i: tuple
    e_rho: float
    p1: float
    p2: float
    p3: float
    p4: float
    r: float
    a1: float
    a2: float
    e_ratio: float
    r_method: str = "closed_form"
    r_std_error: float = 0.0


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def rho_proportions(defect_fractions):
    """Share of the lot rejected at each screen for realized fractions ``p``.

    Accepts a 1-D sequence or an array whose last axis indexes stages.
    """
    p = np.asarray(defect_fractions, dtype=float)
    if np.any(p < 0) or np.any(p >= 1) or np.any(np.isnan(p)):
        raise DomainError("defect fractions must lie in [0, 1)")
    survive = np.cumprod(1.0 - p, axis=-1)
    before = np.concatenate([np.ones_like(p[..., :1]), survive[..., :-1]], axis=-1)
    out = before * p
    if np.ndim(defect_fractions) == 1 and not isinstance(defect_fractions, np.ndarray):
        return out.tolist()
    return out


def expected_rho_proportions(stages: Sequence[ScreeningStage]) -> list:
    """E[rho_i] using independence of the stage defect fractions."""
    out = []
    surv = 1.0
    for st in stages:
        m = st.defect_dist.mean
        out.append(surv * m)
        surv *= 1.0 - m
    return out


def validate_scenario(scenario: Scenario) -> list:
    """Return every violated model assumption as a :class:`Diagnostic`."""
    diags = []
    rates = scenario.annual_rates()
    D = scenario.demand
    if np.any(np.diff(rates) > 0):
        diags.append(Diagnostic(
            "rate-order",
            "stages must be ordered by non-increasing screening rate; got "
            + ", ".join(f"{lab or i}={x:g}" for i, (lab, x) in enumerate(zip(scenario.labels, rates)))))
    slow = [f"{lab or i} (x={x:g}/yr)" for i, (lab, x) in enumerate(zip(scenario.labels, rates))
            if not x > D]
    if slow:
        diags.append(Diagnostic(
            "slow-screen", f"screening rates must exceed demand D={D:g}/yr: " + ", ".join(slow)))
    x_n = float(rates.min())
    rho_max = scenario.rho_max
    limit = 1.0 - D / x_n
    # At equality the backorder clearing rate can reach zero, so t3 is unbounded.
    if not rho_max < limit:
        diags.append(Diagnostic(
            "defect-share",
            f"worst-case defective share rho_max={rho_max:.6g} must be below "
            f"1 - D/x_n = {limit:.6g}"))
    if not scenario.salvage < scenario.sell_price:
        diags.append(Diagnostic(
            "salvage-price",
            f"salvage value v={scenario.salvage:g} must be below selling price s={scenario.sell_price:g}"))
    return diags


def _require_valid(scenario: Scenario) -> None:
    diags = validate_scenario(scenario)
    if diags:
        raise ScenarioError("; ".join(str(d) for d in diags), diags)


def _survival(p_grid, convention: str):
    if convention == "additive":
        return 1.0 - sum(p_grid)
    s = 1.0
    for p in p_grid:
        s = s * (1.0 - p)
    return s


def uniform_ratio_closed_form(beta: float, q: float) -> float:
    """E[(1 - p)/(1 - p - q)] for p ~ Uniform(0, beta)."""
    if not 1.0 - beta - q > 0:
        raise DomainError(f"1 - beta - D/x = {1.0 - beta - q:g} must be positive")
    # ln((1-q)/(1-beta-q)) written to stay accurate for small beta
    return 1.0 + (q / beta) * -math.log1p(-beta / (1.0 - q))


def _ratio_quadrature(dists, q, nodes, convention):
    grids = [d.quadrature(nodes) for d in dists]
    points = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    weights = np.ones(())
    for _, w in grids:
        weights = np.multiply.outer(weights, w)
    s = _survival(points, convention)
    return float(np.sum(weights * s / (s - q)))


def _ratio_monte_carlo(dists, q, samples, seed, convention):
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(_MC_CHUNK, samples - done)
        u = rng.random((len(dists), m))
        p = [d.from_uniform(row) for d, row in zip(dists, u)]
        s = _survival(p, convention)
        g = s / (s - q)
        total += g.sum()
        total_sq += np.dot(g, g)
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return mean, math.sqrt(var / samples)


def compute_moments(
    scenario: Scenario,
    *,
    nodes: int = DEFAULT_QUADRATURE_NODES,
    r_method: str = "auto",
    r_convention: str = "exact",
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
) -> Moments:
    """Compute E[rho_i], E[rho], P1..P4, R, A1 and A2 for ``scenario``.

    Parameters
    ----------
    nodes
        Gauss-Legendre nodes per uniform stage for the R expectation.
    r_method
        ``"auto"`` uses the log closed form for one uniform stage,
        tensor quadrature for up to three uniform stages and Monte Carlo
        beyond that.  The other values force one path.
    r_convention
        ``"exact"`` evaluates R's expectation at 1 - rho = prod(1 - p_i).
        ``"additive"`` uses 1 - rho = 1 - sum(p_i) inside that expectation
        only; this is the convention that reproduces the published
        two- and three-screen tables.  Both agree for a single stage.
    """
    if r_method not in R_METHODS:
        raise DomainError(f"r_method must be one of {R_METHODS}")
    if r_convention not in R_CONVENTIONS:
        raise DomainError(f"r_convention must be one of {R_CONVENTIONS}")
    _require_valid(scenario)

    D = scenario.demand
    rates = scenario.annual_rates()
    d = scenario.unit_costs
    dists = [st.defect_dist for st in scenario.stages]
    q = D / rates[-1]

    e_rho_i = expected_rho_proportions(scenario.stages)
    e_rho = float(sum(e_rho_i))
    p1 = math.prod(dist.survival_sq_mean for dist in dists)
    p2 = (1.0 - e_rho) - p1
    p3 = 1.0 / (1.0 - e_rho)
    p4 = e_rho * p3
    a1 = float(sum(e / x for e, x in zip(e_rho_i, rates)))
    tail = np.cumsum(d[::-1])[::-1]  # tail[i] = sum_{k>=i} d_k
    a2 = float(d.sum() - sum(e_rho_i[i] * tail[i + 1] for i in range(len(d) - 1)))

    if r_convention == "additive" and sum(dist.sup for dist in dists) >= 1.0 - q:
        raise ScenarioError(
            f"additive defect share sum(sup p_i)={sum(dist.sup for dist in dists):.6g} "
            f"reaches 1 - D/x_n = {1.0 - q:.6g}",
            [Diagnostic("defect-share", "additive convention infeasible")])

    random_dists = [dist for dist in dists if not dist.is_degenerate]
    fixed = [dist.p for dist in dists if dist.is_degenerate]
    # Point masses enter the survival factor as constants.
    if r_convention == "additive":
        shift = sum(fixed)
        q_eff, scale = q, 1.0
    else:
        scale = math.prod(1.0 - p for p in fixed)
        shift = 0.0
        q_eff = q / scale

    method = r_method
    if method == "auto":
        if not random_dists:
            method = "quadrature"
        elif len(random_dists) == 1 and isinstance(random_dists[0], UniformOnZeroBeta):
            method = "closed_form"
        elif len(random_dists) <= MAX_QUADRATURE_DIMS:
            method = "quadrature"
        else:
            method = "monte_carlo"

    std_err = 0.0
    if not random_dists:
        s = 1.0 - shift if r_convention == "additive" else scale
        e_ratio = s / (s - q)
        method = "deterministic"
    elif r_convention == "additive":
        # Shift the constant part into an effective demand ratio on 1 - sum(random p).
        base = 1.0 - shift
        q_add = q / base
        scaled = [_scaled_uniform(dist, base) for dist in random_dists]
        if method == "closed_form":
            e_ratio = _closed_form_ratio(scaled, q_add)
        elif method == "quadrature":
            e_ratio = _ratio_quadrature(scaled, q_add, nodes, "additive")
        else:
            e_ratio, std_err = _ratio_monte_carlo(scaled, q_add, mc_samples, seed, "additive")
    else:
        if method == "closed_form":
            e_ratio = _closed_form_ratio(random_dists, q_eff)
        elif method == "quadrature":
            e_ratio = _ratio_quadrature(random_dists, q_eff, nodes, "exact")
        else:
            e_ratio, std_err = _ratio_monte_carlo(random_dists, q_eff, mc_samples, seed, "exact")

    r = (1.0 - e_rho) / e_ratio
    return Moments(
        e_rho_i=tuple(float(e) for e in e_rho_i),
        e_rho=e_rho,
        p1=float(p1),
        p2=float(p2),
        p3=p3,
        p4=p4,
        r=float(r),
        a1=a1,
        a2=a2,
        e_ratio=float(e_ratio),
        r_method=method,
        r_std_error=float(std_err * (1.0 - e_rho) / e_ratio**2),
    )


def _scaled_uniform(dist, base):
    # 1 - c - p = base * (1 - p/base) with p/base ~ Uniform(0, beta/base)
    return UniformOnZeroBeta(dist.beta / base) if isinstance(dist, UniformOnZeroBeta) else dist


def _closed_form_ratio(random_dists, q):
    if len(random_dists) != 1 or not isinstance(random_dists[0], UniformOnZeroBeta):
        raise DomainError("closed-form R requires exactly one uniform stage")
    return uniform_ratio_closed_form(random_dists[0].beta, q)
