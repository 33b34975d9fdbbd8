import numpy as np
import pytest

from screeneoq.model import PointMass, Scenario, ScreeningStage, UniformOnZeroBeta
from screeneoq.scenario_file import bundled_table1_path, parse_scenario

# (beta, units/min, $/unit) for the seven example screens
TABLE1 = {
    "S1": (0.01, 1.0, 0.5),
    "S2": (0.04, 1.0, 0.5),
    "S3": (0.10, 1.0, 0.5),
    "S4": (0.01, 2.0, 1.0),
    "S5": (0.04, 2.0, 0.5),
    "S6": (0.04, 0.5, 1.0),
    "S7": (0.10, 0.5, 0.3),
}

ECONOMICS = dict(demand=50000.0, order_cost=100.0, purchase_cost=25.0, sell_price=50.0,
                 salvage=20.0, hold_good=5.0, hold_defective=0.0, backorder_cost=10.0)


def make_stage(label):
    beta, rate, cost = TABLE1[label]
    return ScreeningStage(rate, cost, UniformOnZeroBeta(beta), label)


def make_scenario(*labels, **overrides):
    """Scenario with the named example screens, sorted fastest first."""
    econ = dict(ECONOMICS, **overrides)
    return Scenario(stages=tuple(make_stage(lab) for lab in labels), **econ).sorted_by_rate()


def point_scenario(ps, rates=None, costs=None, **overrides):
    rates = rates or [1.0] * len(ps)
    costs = costs or [0.5] * len(ps)
    stages = tuple(ScreeningStage(x, d, PointMass(p), f"P{i}")
                   for i, (p, x, d) in enumerate(zip(ps, rates, costs)))
    return Scenario(stages=stages, **dict(ECONOMICS, **overrides)).sorted_by_rate()


def random_scenario(rng, max_stages=3, allow_point=True):
    """A random scenario that satisfies every model assumption."""
    while True:
        n = int(rng.integers(1, max_stages + 1))
        rates = np.sort(rng.uniform(0.4, 3.0, n))[::-1]
        stages = []
        for i in range(n):
            if allow_point and rng.random() < 0.25:
                dist = PointMass(float(rng.uniform(0.0, 0.08)))
            else:
                dist = UniformOnZeroBeta(float(rng.uniform(0.002, 0.12)))
            stages.append(ScreeningStage(float(rates[i]), float(rng.uniform(0, 1.5)), dist, f"R{i}"))
        econ = dict(
            demand=float(rng.uniform(2e4, 6e4)), order_cost=float(rng.uniform(20, 400)),
            purchase_cost=float(rng.uniform(5, 40)), sell_price=float(rng.uniform(45, 90)),
            salvage=float(rng.uniform(0, 30)), hold_good=float(rng.uniform(1, 10)),
            hold_defective=float(rng.uniform(0, 5)), backorder_cost=float(rng.uniform(1, 40)))
        sc = Scenario(stages=tuple(stages), **econ)
        if sc.rho_max < 1 - sc.demand / sc.slowest_rate - 0.02 and sc.slowest_rate > sc.demand:
            return sc


@pytest.fixture(scope="session")
def catalog():
    return parse_scenario(bundled_table1_path())


@pytest.fixture
def s1():
    return make_scenario("S1")


@pytest.fixture
def s2():
    return make_scenario("S2")


# one line per acceptance criterion, filled by test_acceptance and printed at the end
ACCEPTANCE_LOG = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
