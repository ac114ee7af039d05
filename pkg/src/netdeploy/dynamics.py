"""Adoption dynamics: costs, utilities, logistic transition probabilities and
the synchronous one-step update.

A non-adopted node ``v`` at step ``t`` has utility

    u(v, t) = (h_G(t) * h(v, t) - c(v)) / alpha

where ``h_G`` is the total adopted count and ``h`` the number of adopted
neighbors, and adopts with probability ``1 / (1 + exp(beta - u))``. In
independent mode every non-adopted node adopts with a fixed probability.
Adopted nodes never revert.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from ._validation import check_node, check_positive_real, check_probability
from .graphs import Graph

COST_KINDS = ("constant", "degree_linear", "depth_exponential")
MODES = ("networked", "independent")

# Upper bound on uniforms drawn at once while fast-forwarding idle steps.
_MAX_BATCH_DRAWS = 1 << 20


@dataclass(frozen=True)
class CostModel:
    kind: str = "constant"
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"unknown cost model {self.kind!r}; expected one of {COST_KINDS}")
        object.__setattr__(self, "gamma", check_positive_real(self.gamma, "gamma", allow_zero=True))

    def costs(self, g: Graph) -> np.ndarray:
        """Per-node cost vector for ``g``."""
        if self.kind == "constant":
            return np.full(g.node_count, self.gamma)
        if self.kind == "degree_linear":
            return self.gamma * (1.0 + g.degrees())
        if g.depth is None:
            raise ValueError(f"depth_exponential cost needs a binary_tree graph, got {g.kind}")
        return self.gamma * np.exp2(-g.depth.astype(float))


@dataclass(frozen=True)
class DynamicsParams:
    """Parameters of the adoption rule.

    ``cost_model`` is only consulted in networked mode and
    ``gamma_independent`` only in independent mode.
    """

    mode: str = "networked"
    alpha: float = 1.0
    beta: float = 3.0
    gamma_independent: Optional[float] = None
    cost_model: CostModel = CostModel()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        object.__setattr__(self, "alpha", check_positive_real(self.alpha, "alpha"))
        beta = float(self.beta)
        if not np.isfinite(beta):
            raise ValueError("beta must be finite")
        object.__setattr__(self, "beta", beta)
        if self.mode == "independent":
            if self.gamma_independent is None:
                raise ValueError("independent mode needs gamma_independent")
            object.__setattr__(
                self, "gamma_independent", check_probability(self.gamma_independent, "gamma_independent")
            )
        if isinstance(self.cost_model, dict):
            object.__setattr__(self, "cost_model", CostModel(**self.cost_model))


class DeploymentState:
    """Adoption flags at one step. Treated as immutable once built."""

    __slots__ = ("adopted", "adopted_count", "step")

    def __init__(self, adopted, step: int = 0):
        adopted = np.array(adopted, dtype=bool)
        if adopted.ndim != 1:
            raise ValueError("adopted flags must be 1-D")
        adopted.setflags(write=False)
        self.adopted = adopted
        self.adopted_count = int(adopted.sum())
        self.step = int(step)

    @classmethod
    def initial(cls, node_count: int, seeds=()) -> "DeploymentState":
        flags = np.zeros(node_count, dtype=bool)
        flags[list(seeds)] = True
        return cls(flags, 0)

    @property
    def node_count(self) -> int:
        return self.adopted.size

    def to_bits(self) -> bytes:
        return np.packbits(self.adopted).tobytes()

    @classmethod
    def from_bits(cls, bits: bytes, node_count: int, step: int) -> "DeploymentState":
        flags = np.unpackbits(np.frombuffer(bits, dtype=np.uint8), count=node_count)
        return cls(flags.astype(bool), step)

    def to_dict(self) -> dict:
        return {"node_count": self.node_count, "step": self.step, "bits": self.to_bits().hex()}

    @classmethod
    def from_dict(cls, d: dict) -> "DeploymentState":
        return cls.from_bits(bytes.fromhex(d["bits"]), d["node_count"], d["step"])

    def __eq__(self, other):
        if not isinstance(other, DeploymentState):
            return NotImplemented
        return self.step == other.step and np.array_equal(self.adopted, other.adopted)

    def __repr__(self):
        return f"DeploymentState(step={self.step}, adopted_count={self.adopted_count}/{self.node_count})"


def node_cost(model: CostModel, g: Graph, v) -> float:
    v = check_node(g.node_count, v)
    if model.kind == "constant":
        return model.gamma
    if model.kind == "degree_linear":
        return model.gamma * (1 + g.degree(v))
    return model.gamma * 2.0 ** -g.depth_of(v)


def adopted_neighbor_count(g: Graph, state: DeploymentState, v) -> int:
    v = check_node(g.node_count, v)
    if g.implicit:
        return state.adopted_count - int(state.adopted[v])
    return int(state.adopted[g.neighbors(v)].sum())


def utility(g: Graph, state: DeploymentState, params: DynamicsParams, v) -> float:
    if params.mode != "networked":
        raise ValueError("utility is only defined in networked mode")
    v = check_node(g.node_count, v)
    if state.adopted[v]:
        raise ValueError(f"node {v} has already adopted; utility does not apply")
    benefit = float(state.adopted_count) * float(adopted_neighbor_count(g, state, v))
    return (benefit - node_cost(params.cost_model, g, v)) / params.alpha


def transition_probability(u, beta):
    """Logistic adoption probability ``1 / (1 + exp(beta - u))``.

    Accepts scalars or arrays. Mathematically strictly inside (0, 1); in
    double precision it saturates to exactly 0 or 1 once ``|u - beta|``
    exceeds about 37 (upper side) or 745 (lower side).
    """
    p = expit(np.subtract(u, beta, dtype=float))
    return float(p) if np.ndim(p) == 0 else p


def adoption_probabilities(g: Graph, state: DeploymentState, params: DynamicsParams,
                           costs: Optional[np.ndarray] = None):
    """Return ``(ids, p)``: non-adopted node ids (ascending) and their probabilities."""
    ids = np.flatnonzero(~state.adopted)
    if params.mode == "independent":
        return ids, np.full(ids.size, params.gamma_independent)
    if costs is None:
        costs = params.cost_model.costs(g)
    h = g.adopted_neighbor_counts(state.adopted)[ids]
    u = (float(state.adopted_count) * h - costs[ids]) / params.alpha
    return ids, expit(u - params.beta)


def step(g: Graph, state: DeploymentState, params: DynamicsParams, rng,
         costs: Optional[np.ndarray] = None) -> DeploymentState:
    """Advance one synchronous step.

    Every non-adopted node decides from the start-of-step state, consuming
    one uniform draw from ``rng`` in ascending node-id order.
    """
    ids, p = adoption_probabilities(g, state, params, costs)
    if ids.size == 0:
        return DeploymentState(state.adopted, state.step + 1)
    draws = rng.random(ids.size)
    flags = state.adopted.copy()
    flags[ids[draws < p]] = True
    return DeploymentState(flags, state.step + 1)


class DeploymentProcess:
    """Mutable driver for one run on one graph.

    Produces exactly the same trajectory as repeated :func:`step` calls with
    the same generator. While nothing changes, the probabilities stay fixed,
    so idle steps are drawn in blocks; when a block contains the first
    adoption, the generator is rewound and advanced past exactly the draws a
    step-by-step loop would have consumed.
    """

    def __init__(self, g: Graph, params: DynamicsParams, state: DeploymentState):
        if state.node_count != g.node_count:
            raise ValueError("state and graph disagree on node count")
        self.graph = g
        self.params = params
        self.costs = params.cost_model.costs(g) if params.mode == "networked" else None
        self.state = state

    def advance(self, rng, max_steps: int) -> list:
        """Run until the adopted set changes or ``max_steps`` steps elapse.

        Returns the adopted count after each elapsed step.
        """
        state = self.state
        ids, p = adoption_probabilities(self.graph, state, self.params, self.costs)
        k = ids.size
        if k == 0:
            self.state = DeploymentState(state.adopted, state.step + max_steps)
            return [state.adopted_count] * max_steps
        bitgen = rng.bit_generator
        can_rewind = hasattr(bitgen, "advance")
        elapsed = 0
        batch = 1
        while elapsed < max_steps:
            rows = min(batch, max_steps - elapsed)
            if rows > 1:
                saved = bitgen.state
            draws = rng.random(rows * k).reshape(rows, k)
            hit = draws < p
            any_hit = hit.any(axis=1)
            if any_hit.any():
                r = int(np.argmax(any_hit))
                if r < rows - 1:
                    bitgen.state = saved
                    bitgen.advance((r + 1) * k)
                flags = state.adopted.copy()
                flags[ids[hit[r]]] = True
                new_state = DeploymentState(flags, state.step + elapsed + r + 1)
                self.state = new_state
                return [state.adopted_count] * (elapsed + r) + [new_state.adopted_count]
            elapsed += rows
            if can_rewind:
                batch = min(batch * 2, max(1, _MAX_BATCH_DRAWS // k))
        self.state = DeploymentState(state.adopted, state.step + elapsed)
        return [state.adopted_count] * elapsed
