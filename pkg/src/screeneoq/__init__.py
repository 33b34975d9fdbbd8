"""Order quantity and backorder optimisation with multiple imperfect screens."""

from .costs import (CycleBreakdown, CycleTiming, DefectStats, cycle_breakdown, cycle_timing,
                    etpu, etpu_constant, expected_net_profit, f_objective)
from .errors import (DomainError, InfeasibleError, NoFiniteOptimumError, ScenarioError,
                     ScreenEOQError, UnsupportedError)
from .model import (Moments, PointMass, Policy, Scenario, ScreeningStage, UniformOnZeroBeta,
                    compute_moments, expected_rho_proportions, rho_proportions,
                    uniform_defects, validate_scenario)
from .optimize import (Method, Solution, approx_policy_n1, exact_policy_n1_uniform,
                       numeric_optimum, optimal_policy)
from .scenario_file import bundled_table1_path, parse_scenario, write_scenario
from .simulate import SimConfig, SimResult, estimate_etpu

__version__ = "0.1.0"
