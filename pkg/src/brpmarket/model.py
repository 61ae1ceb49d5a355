"""Domain types and pricing-model primitives.

Customers have a quadratic-then-flat utility of consumption; the supplier
has a two-segment quadratic cost that switches at an aggregate threshold.
Consumption at each slot is decomposed into first-block and second-block
energy around a per-slot threshold ``b``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np


class ScenarioError(ValueError):
    """Raised when a scenario document violates a model invariant."""


def _as_slot_array(value, num_slots: int, path: str) -> np.ndarray:
    """Broadcast a scalar to a per-slot vector, or validate vector length."""
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{path}: expected a number or a list of numbers")
    if arr.ndim == 0:
        return np.full(num_slots, float(arr))
    if arr.shape != (num_slots,):
        raise ScenarioError(
            f"{path}: expected a scalar or an array of length {num_slots}, "
            f"got shape {arr.shape}"
        )
    return arr.astype(float).copy()


@dataclass(frozen=True)
class Customer:
    """One customer: per-slot willingness, satiation rate, daily energy band."""

    id: int
    w: np.ndarray       # willingness coefficient per slot (utils/kWh)
    alpha: float        # satiation coefficient (utils/kWh^2)
    d_min: float        # minimum daily energy (kWh)
    d_max: float        # maximum daily energy (kWh)

    @property
    def satiation(self) -> np.ndarray:
        """Per-slot consumption level beyond which utility is flat."""
        return self.w / self.alpha


@dataclass(frozen=True)
class BlockSchedule:
    """Per-slot consumption threshold separating the two price blocks."""

    b: np.ndarray       # block threshold per slot (kWh)


@dataclass(frozen=True)
class CostParams:
    """Two-segment quadratic production cost coefficients (per slot)."""

    beta1: np.ndarray   # first-segment coefficient (currency/kWh^2)
    beta2: np.ndarray   # second-segment coefficient (currency/kWh^2)


@dataclass(frozen=True)
class PriceSchedule:
    """Per-slot prices for the first and second block."""

    p_l: np.ndarray     # first-block price (currency/kWh)
    p_u: np.ndarray     # second-block price (currency/kWh)


@dataclass(frozen=True)
class Scenario:
    """A full market instance."""

    num_customers: int
    num_slots: int
    customers: tuple[Customer, ...]
    blocks: BlockSchedule
    cost: CostParams

    def fingerprint(self) -> str:
        """Stable digest of all scenario data, used to match solver outputs."""
        h = hashlib.sha256()
        h.update(np.array([self.num_customers, self.num_slots]).tobytes())
        for c in self.customers:
            h.update(np.asarray([float(c.id), c.alpha, c.d_min, c.d_max]).tobytes())
            h.update(np.asarray(c.w, dtype=float).tobytes())
        h.update(np.asarray(self.blocks.b, dtype=float).tobytes())
        h.update(np.asarray(self.cost.beta1, dtype=float).tobytes())
        h.update(np.asarray(self.cost.beta2, dtype=float).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class Allocation:
    """Per-(customer, slot) consumption with its canonical block split."""

    x: np.ndarray       # consumption, shape (N, T)
    y: np.ndarray       # first-block part min(x, b), shape (N, T)
    z: np.ndarray       # second-block carrier max(x, b), shape (N, T)

    @classmethod
    def from_consumption(cls, x: np.ndarray, blocks: BlockSchedule) -> "Allocation":
        x = np.asarray(x, dtype=float)
        y, z = canonical_split(x, blocks.b)
        return cls(x=x, y=y, z=z)


def utility_value(x, w, alpha):
    """Customer utility of consumption.

    Quadratic ``w*x - (alpha/2)*x**2`` up to the satiation point ``w/alpha``,
    flat at ``w**2 / (2*alpha)`` beyond it.  Continuous, nondecreasing and
    concave, with zero utility at zero consumption.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("consumption must be nonnegative")
    w = np.asarray(w, dtype=float)
    sat = w / alpha
    val = np.where(x < sat, w * x - 0.5 * alpha * x * x, w * w / (2.0 * alpha))
    return float(val) if val.ndim == 0 else val


def utility_gradient(x, w, alpha):
    """Marginal utility: ``w - alpha*x`` below satiation, 0 at and beyond it.

    The subgradient at the kink is taken on the saturated side (0) so a
    gradient step never pushes consumption past satiation.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("consumption must be nonnegative")
    w = np.asarray(w, dtype=float)
    grad = np.where(x < w / alpha, w - alpha * x, 0.0)
    return float(grad) if grad.ndim == 0 else grad


def cost_value(demand, block_total, cost: CostParams):
    """Supplier cost of serving aggregate demand at one or more slots.

    ``beta1 * D**2`` while demand is at or below the aggregate block
    threshold ``block_total`` (= b * N), ``beta2 * D**2`` above it.  Note the
    cost itself jumps at the threshold whenever beta1 != beta2.
    """
    demand = np.asarray(demand, dtype=float)
    if np.any(demand < 0):
        raise ValueError("demand must be nonnegative")
    val = np.where(
        demand <= np.asarray(block_total, dtype=float),
        np.asarray(cost.beta1, dtype=float) * demand * demand,
        np.asarray(cost.beta2, dtype=float) * demand * demand,
    )
    return float(val) if val.ndim == 0 else val


def cost_gradients(demand, cost: CostParams):
    """Segment-wise marginal costs ``(2*beta1*D, 2*beta2*D)`` at total demand."""
    demand = np.asarray(demand, dtype=float)
    return (
        2.0 * np.asarray(cost.beta1, dtype=float) * demand,
        2.0 * np.asarray(cost.beta2, dtype=float) * demand,
    )


def canonical_split(x, b):
    """Split consumption into ``y = min(x, b)`` and ``z = max(x, b)``.

    The identity ``y + z - b == x`` holds exactly (one of y, z equals x and
    the other equals b, so no rounding is introduced).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("consumption must be nonnegative")
    b = np.asarray(b, dtype=float)
    y = np.minimum(x, b)
    z = np.maximum(x, b)
    if y.ndim == 0:
        return float(y), float(z)
    return y, z


def validate_scenario(doc: dict) -> Scenario:
    """Validate a parsed scenario document and build a Scenario.

    Scalars broadcast to per-slot vectors.  Keys starting with an underscore
    are ignored (free-form notes).  Every invariant violation is reported
    with the path of the offending field.
    """
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")

    try:
        num_slots = int(doc["num_slots"])
    except KeyError:
        raise ScenarioError("num_slots: field is required")
    except (TypeError, ValueError):
        raise ScenarioError("num_slots: must be an integer")
    if num_slots < 1:
        raise ScenarioError("num_slots: must be at least 1")

    raw_customers = doc.get("customers")
    if not isinstance(raw_customers, list) or not raw_customers:
        raise ScenarioError("customers: must be a non-empty list")

    customers = []
    for idx, entry in enumerate(raw_customers):
        path = f"customers[{idx}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{path}: must be an object")
        w = _as_slot_array(entry.get("w", None), num_slots, f"{path}.w")
        if np.any(w <= 0):
            raise ScenarioError(f"{path}.w: w must be strictly positive for every slot")
        try:
            alpha = float(entry["alpha"])
        except (KeyError, TypeError, ValueError):
            raise ScenarioError(f"{path}.alpha: must be a number")
        if alpha <= 0:
            raise ScenarioError(f"{path}.alpha: alpha must be strictly positive")
        try:
            d_min = float(entry.get("d_min", 0.0))
            d_max = float(entry["d_max"])
        except (KeyError, TypeError, ValueError):
            raise ScenarioError(f"{path}: d_min/d_max must be numbers")
        if d_min < 0:
            raise ScenarioError(f"{path}.d_min: must be nonnegative")
        if d_min > d_max:
            raise ScenarioError(f"{path}: d_min exceeds d_max")
        if d_min > float(np.sum(w / alpha)):
            raise ScenarioError(
                f"{path}: infeasible scenario, d_min exceeds the total "
                f"satiation energy sum(w/alpha) = {float(np.sum(w / alpha))!r}"
            )
        customers.append(
            Customer(id=int(entry.get("id", idx)), w=w, alpha=alpha,
                     d_min=d_min, d_max=d_max)
        )

    blocks_doc = doc.get("blocks")
    if not isinstance(blocks_doc, dict):
        raise ScenarioError("blocks: must be an object with field b")
    b = _as_slot_array(blocks_doc.get("b", None), num_slots, "blocks.b")
    if np.any(b <= 0):
        raise ScenarioError("blocks.b: thresholds must be strictly positive")

    cost_doc = doc.get("cost")
    if not isinstance(cost_doc, dict):
        raise ScenarioError("cost: must be an object with fields beta1, beta2")
    beta1 = _as_slot_array(cost_doc.get("beta1", None), num_slots, "cost.beta1")
    beta2 = _as_slot_array(cost_doc.get("beta2", None), num_slots, "cost.beta2")
    if np.any(beta1 <= 0):
        raise ScenarioError("cost.beta1: must be strictly positive")
    if np.any(beta2 <= 0):
        raise ScenarioError("cost.beta2: must be strictly positive")

    return Scenario(
        num_customers=len(customers),
        num_slots=num_slots,
        customers=tuple(customers),
        blocks=BlockSchedule(b=b),
        cost=CostParams(beta1=beta1, beta2=beta2),
    )


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})")
    return validate_scenario(doc)
