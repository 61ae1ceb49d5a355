"""Independent certification of the market equilibrium.

Solves the centralized welfare problem by projected-gradient ascent with
the segment-wise cost gradient, runs an exhaustive grid search for tiny
instances, and compares either against a distributed run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .agent import CustomerProfile, project_box_sum, step_profile, worst_kkt_residual
from .market import (
    DivergenceError,
    EquilibriumReport,
    default_step_size,
    social_welfare,
)
from .model import (
    Allocation,
    CostParams,
    PriceSchedule,
    Scenario,
    cost_gradients,
    cost_value,
    utility_value,
)

BOUNDARY_TOL = 1e-6
MAX_GRID_POINTS = 10**8
_GRID_CHUNK = 1_000_000


@dataclass(frozen=True)
class OracleSolution:
    """A welfare maximizer found by an oracle method."""

    allocation: Allocation
    welfare: float
    method: str  # "centralized-gradient" | "grid"
    converged: bool
    boundary_degenerate: bool
    stationarity_residual: float | None
    scenario_fingerprint: str


@dataclass(frozen=True)
class ComparisonReport:
    """Distributed-vs-oracle agreement at the requested tolerances."""

    allocation_gap: float
    welfare_gap: float
    passed: bool
    boundary_degenerate: bool

    def as_dict(self) -> dict:
        return {
            "allocation_gap": self.allocation_gap,
            "welfare_gap": self.welfare_gap,
            "pass": self.passed,
            "boundary_degenerate": self.boundary_degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def _is_boundary_degenerate(alloc: Allocation, scenario: Scenario) -> bool:
    demand = alloc.x.sum(axis=0)
    block_total = scenario.blocks.b * scenario.num_customers
    return bool(np.any(np.abs(demand - block_total) < BOUNDARY_TOL))


def solve_welfare_centralized(scenario: Scenario, tol: float = 1e-6,
                              gamma: float | None = None,
                              max_iter: int = 200000,
                              x0: np.ndarray | None = None) -> OracleSolution:
    """Projected-gradient ascent on the joint welfare objective.

    Uses the same per-customer projection machinery as the market loop but
    drives the step with the segment-wise marginal costs directly instead
    of broadcast prices.  Stops once the stationarity residuals drop below
    ``tol``; if the iteration cap is hit first the solution is returned
    with ``converged=False``.
    """
    n, t = scenario.num_customers, scenario.num_slots
    if gamma is None:
        gamma = default_step_size(scenario)
    if x0 is None:
        x = np.empty((n, t))
        for i, customer in enumerate(scenario.customers):
            x[i, :] = customer.d_min / t
    else:
        x = np.empty((n, t))
        for i, customer in enumerate(scenario.customers):
            x[i, :] = project_box_sum(np.asarray(x0, dtype=float)[i],
                                      customer.d_min, customer.d_max)

    alloc = Allocation.from_consumption(x, scenario.blocks)
    # Stop stepping once allocation movement is well below what a
    # tol-sized residual would produce, then measure the residual itself.
    step_tol = 0.1 * gamma * tol
    residual = np.inf
    converged = False
    for k in range(1, max_iter + 1):
        marginal = PriceSchedule(*cost_gradients(alloc.x.sum(axis=0), scenario.cost))
        new_x = np.empty_like(x)
        for i, customer in enumerate(scenario.customers):
            profile = CustomerProfile(x=alloc.x[i], y=alloc.y[i], z=alloc.z[i])
            new_x[i, :] = step_profile(profile, marginal, gamma,
                                       customer, scenario.blocks).x
        if not np.all(np.isfinite(new_x)):
            raise DivergenceError(k)
        change = float(np.max(np.abs(new_x - x)))
        x = new_x
        alloc = Allocation.from_consumption(x, scenario.blocks)
        if change < step_tol:
            marginal = PriceSchedule(*cost_gradients(alloc.x.sum(axis=0),
                                                     scenario.cost))
            residual = worst_kkt_residual(scenario, alloc, marginal)
            if residual < tol:
                converged = True
                break

    if not converged:
        marginal = PriceSchedule(*cost_gradients(alloc.x.sum(axis=0), scenario.cost))
        residual = worst_kkt_residual(scenario, alloc, marginal)
        converged = residual < tol

    return OracleSolution(
        allocation=alloc,
        welfare=social_welfare(alloc, scenario),
        method="centralized-gradient",
        converged=converged,
        boundary_degenerate=_is_boundary_degenerate(alloc, scenario),
        stationarity_residual=float(residual),
        scenario_fingerprint=scenario.fingerprint(),
    )


def brute_force_welfare(scenario: Scenario, grid_step: float) -> OracleSolution:
    """Exhaustive grid search over tiny instances (N*T <= 3).

    Each variable ranges over ``[0, w/alpha]`` at resolution ``grid_step``;
    points violating a customer's daily energy band are discarded.  Ties
    resolve to the lexicographically lowest allocation (first occurrence in
    row-major enumeration over ascending axes).
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    n, t = scenario.num_customers, scenario.num_slots
    if n * t > 3:
        raise ValueError("grid oracle limited to N*T <= 3 variables")

    variables = [(i, s) for i in range(n) for s in range(t)]
    # size the grid before materializing any axis
    sizes = []
    for i, s in variables:
        sat = scenario.customers[i].satiation[s]
        sizes.append(int(np.ceil((sat + 0.5 * grid_step) / grid_step)))
    total_points = int(np.prod(sizes, dtype=np.int64))
    if total_points > MAX_GRID_POINTS:
        raise ValueError(
            f"grid too large: {total_points} points exceeds {MAX_GRID_POINTS}")
    axes = []
    for i, s in variables:
        sat = scenario.customers[i].satiation[s]
        axes.append(np.arange(0.0, sat + 0.5 * grid_step, grid_step))
    shape = tuple(axis.size for axis in axes)
    total_points = int(np.prod(shape, dtype=np.int64))

    block_total = scenario.blocks.b * n
    best_welfare = -np.inf
    best_point = None
    for start in range(0, total_points, _GRID_CHUNK):
        flat = np.arange(start, min(start + _GRID_CHUNK, total_points))
        coords = np.unravel_index(flat, shape)
        xs = [axes[j][coords[j]] for j in range(len(variables))]

        feasible = np.ones(flat.size, dtype=bool)
        for i, customer in enumerate(scenario.customers):
            daily = sum(xs[j] for j, (ci, _) in enumerate(variables) if ci == i)
            feasible &= (daily >= customer.d_min - 1e-9)
            feasible &= (daily <= customer.d_max + 1e-9)
        if not np.any(feasible):
            continue

        welfare = np.zeros(flat.size)
        for j, (i, s) in enumerate(variables):
            customer = scenario.customers[i]
            welfare += utility_value(xs[j], customer.w[s], customer.alpha)
        for s in range(t):
            demand = sum(xs[j] for j, (_, cs) in enumerate(variables) if cs == s)
            welfare -= cost_value(demand, block_total[s],
                                  _slot_cost(scenario, s))
        welfare[~feasible] = -np.inf

        j_best = int(np.argmax(welfare))
        if welfare[j_best] > best_welfare:
            best_welfare = float(welfare[j_best])
            best_point = [float(xs[j][j_best]) for j in range(len(variables))]

    if best_point is None:
        raise ValueError("no feasible grid point (daily band narrower than grid)")

    x = np.zeros((n, t))
    for j, (i, s) in enumerate(variables):
        x[i, s] = best_point[j]
    alloc = Allocation.from_consumption(x, scenario.blocks)
    return OracleSolution(
        allocation=alloc,
        welfare=best_welfare,
        method="grid",
        converged=True,
        boundary_degenerate=_is_boundary_degenerate(alloc, scenario),
        stationarity_residual=None,
        scenario_fingerprint=scenario.fingerprint(),
    )


def _slot_cost(scenario: Scenario, s: int) -> CostParams:
    return CostParams(beta1=scenario.cost.beta1[s], beta2=scenario.cost.beta2[s])


def compare_equilibrium(distributed: EquilibriumReport, oracle: OracleSolution,
                        tol_allocation: float = 1e-3,
                        tol_welfare: float = 1e-4) -> ComparisonReport:
    """Measure the distributed-vs-oracle allocation and welfare gaps."""
    if distributed.scenario_fingerprint != oracle.scenario_fingerprint:
        raise ValueError("scenario mismatch between distributed run and oracle")
    allocation_gap = float(np.max(np.abs(distributed.allocation.x
                                         - oracle.allocation.x)))
    welfare_gap = abs(distributed.welfare - oracle.welfare)
    return ComparisonReport(
        allocation_gap=allocation_gap,
        welfare_gap=welfare_gap,
        passed=allocation_gap < tol_allocation and welfare_gap < tol_welfare,
        boundary_degenerate=oracle.boundary_degenerate,
    )
