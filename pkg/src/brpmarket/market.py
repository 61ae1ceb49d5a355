"""Distributed market loop: aggregate demand, price, broadcast, step customers.

Each iteration updates the full daily profile of every customer jointly
(all slots priced, all slots stepped, the daily-sum projection applied
once), so the daily energy band constraints stay enforced throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .agent import CustomerProfile, step_profile, worst_kkt_residual
from .model import Allocation, PriceSchedule, Scenario, cost_value, utility_value
from .pricing import AggregateDemand, block_prices

TRACE_COMMENT = (
    "# welfare and max_change are per-iteration summary values repeated on "
    "every row of that iteration; max_change is the max-norm allocation "
    "change vs the previous iteration (nan for iteration 0)"
)
TRACE_COLUMNS = ["iter", "slot", "customer", "x", "y", "z",
                 "p_l", "p_u", "welfare", "max_change"]


class DivergenceError(RuntimeError):
    """Raised when an iterate turns non-finite (step size too large)."""

    def __init__(self, iteration: int):
        super().__init__(f"market iteration diverged at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class RunConfig:
    """Step size, convergence tolerance and iteration cap for a market run."""

    gamma: float
    tol: float = 1e-6
    max_iter: int = 50000

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    """One market iterate: allocation, prices, welfare, allocation change."""

    allocation: Allocation
    prices: PriceSchedule
    welfare: float
    max_change: float


@dataclass
class IterationTrace:
    """Time series of market iterates."""

    records: list[IterationRecord] = field(default_factory=list)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, idx) -> IterationRecord:
        return self.records[idx]

    def to_csv(self, path) -> None:
        """Write one row per (iteration, slot, customer), full float precision."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(TRACE_COMMENT + "\n")
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for k, rec in enumerate(self.records):
                n, t = rec.allocation.x.shape
                for slot in range(t):
                    for cust in range(n):
                        writer.writerow([
                            k, slot, cust,
                            repr(float(rec.allocation.x[cust, slot])),
                            repr(float(rec.allocation.y[cust, slot])),
                            repr(float(rec.allocation.z[cust, slot])),
                            repr(float(rec.prices.p_l[slot])),
                            repr(float(rec.prices.p_u[slot])),
                            repr(float(rec.welfare)),
                            repr(float(rec.max_change)),
                        ])


@dataclass(frozen=True)
class EquilibriumReport:
    """Outcome of a market run."""

    converged: bool
    iterations: int
    allocation: Allocation
    prices: PriceSchedule
    welfare: float
    worst_kkt_residual: float
    scenario_fingerprint: str


def social_welfare(alloc: Allocation, scenario: Scenario) -> float:
    """Total customer utility minus total production cost."""
    total = 0.0
    for i, customer in enumerate(scenario.customers):
        total += float(np.sum(utility_value(alloc.x[i], customer.w, customer.alpha)))
    demand = alloc.x.sum(axis=0)
    block_total = scenario.blocks.b * scenario.num_customers
    total -= float(np.sum(cost_value(demand, block_total, scenario.cost)))
    return total


def detect_convergence(trace: IterationTrace, tol: float) -> bool:
    """True iff both allocation and prices settled over the last iterate."""
    if len(trace) < 2:
        raise ValueError("need at least two iterates to detect convergence")
    prev, cur = trace[-2], trace[-1]
    alloc_change = float(np.max(np.abs(cur.allocation.x - prev.allocation.x)))
    price_change = max(
        float(np.max(np.abs(cur.prices.p_l - prev.prices.p_l))),
        float(np.max(np.abs(cur.prices.p_u - prev.prices.p_u))),
    )
    return alloc_change < tol and price_change < tol


def default_step_size(scenario: Scenario) -> float:
    """A step size safely inside the stability region of the iteration.

    When consumption sits below the block threshold but the marginal
    utility exceeds both prices, the two block variables move together and
    the effective step doubles, so the stability bound carries a factor 2.
    """
    alpha_max = max(c.alpha for c in scenario.customers)
    beta_max = float(np.max(scenario.cost.beta2))
    return 0.5 / (alpha_max + 2.0 * beta_max * scenario.num_customers)


def run_market(scenario: Scenario, config: RunConfig):
    """Iterate the distributed price/demand loop to equilibrium.

    Returns ``(EquilibriumReport, IterationTrace)``.  Raises
    :class:`DivergenceError` if any iterate turns non-finite.
    """
    n, t = scenario.num_customers, scenario.num_slots
    x = np.empty((n, t))
    for i, customer in enumerate(scenario.customers):
        x[i, :] = customer.d_min / t

    trace = IterationTrace()
    alloc = Allocation.from_consumption(x, scenario.blocks)
    prices = block_prices(AggregateDemand.from_allocation(alloc, scenario.blocks),
                          scenario.cost)
    trace.append(IterationRecord(alloc, prices, social_welfare(alloc, scenario),
                                 float("nan")))

    converged = False
    iterations = 0
    for k in range(1, config.max_iter + 1):
        new_x = np.empty_like(x)
        for i, customer in enumerate(scenario.customers):
            profile = CustomerProfile(x=alloc.x[i], y=alloc.y[i], z=alloc.z[i])
            new_x[i, :] = step_profile(profile, prices, config.gamma,
                                       customer, scenario.blocks).x

        new_alloc = Allocation.from_consumption(new_x, scenario.blocks)
        new_prices = block_prices(
            AggregateDemand.from_allocation(new_alloc, scenario.blocks),
            scenario.cost)
        welfare = social_welfare(new_alloc, scenario)
        if not (np.all(np.isfinite(new_x))
                and np.all(np.isfinite(new_prices.p_l))
                and np.all(np.isfinite(new_prices.p_u))
                and np.isfinite(welfare)):
            raise DivergenceError(k)

        max_change = float(np.max(np.abs(new_x - x)))
        trace.append(IterationRecord(new_alloc, new_prices, welfare, max_change))
        x, alloc, prices = new_x, new_alloc, new_prices
        iterations = k
        if detect_convergence(trace, config.tol):
            converged = True
            break

    report = EquilibriumReport(
        converged=converged,
        iterations=iterations,
        allocation=alloc,
        prices=prices,
        welfare=social_welfare(alloc, scenario),
        worst_kkt_residual=worst_kkt_residual(scenario, alloc, prices),
        scenario_fingerprint=scenario.fingerprint(),
    )
    return report, trace
