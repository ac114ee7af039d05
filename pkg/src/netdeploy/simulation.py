"""Full runs, ensembles and the named experiment presets."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._validation import check_positive_int, check_probability, target_count
from .dynamics import CostModel, DeploymentProcess, DeploymentState, DynamicsParams
from .graphs import (KINDS, Graph, make_barabasi_albert, make_binary_tree, make_clique,
                     make_erdos_renyi)

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 1_000_000
PRESET_NODE_COUNT = 10_000
PRESET_BETA = 3.0
QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


@dataclass(frozen=True)
class GraphSpec:
    """Which generator to call, plus its family-specific parameters."""

    kind: str = "clique"
    edge_prob: Optional[float] = None
    ring_size: Optional[int] = None
    m: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "erdos_renyi":
            check_probability(self.edge_prob, "edge_prob")
        if self.kind == "barabasi_albert":
            if self.ring_size is None:
                raise ValueError("barabasi_albert needs ring_size")
            object.__setattr__(self, "m", 1 if self.m is None else self.m)

    def build(self, n: int, rng) -> Graph:
        if self.kind == "clique":
            return make_clique(n)
        if self.kind == "erdos_renyi":
            return make_erdos_renyi(n, self.edge_prob, rng)
        if self.kind == "barabasi_albert":
            return make_barabasi_albert(n, self.ring_size, self.m, rng)
        return make_binary_tree(n)

    def to_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


SeedNodeRule = Union[str, int]


@dataclass(frozen=True)
class SimulationConfig:
    graph: GraphSpec
    dynamics: DynamicsParams
    node_count: int = PRESET_NODE_COUNT
    seed_node_rule: SeedNodeRule = "uniform_random"
    stop_fraction: float = 0.99
    max_steps: int = DEFAULT_MAX_STEPS
    rng_seed: int = 0

    def __post_init__(self):
        if isinstance(self.graph, dict):
            object.__setattr__(self, "graph", GraphSpec(**self.graph))
        if isinstance(self.dynamics, dict):
            object.__setattr__(self, "dynamics", DynamicsParams(**self.dynamics))
        check_positive_int(self.node_count, "node_count")
        check_probability(self.stop_fraction, "stop_fraction", open_low=True)
        check_positive_int(self.max_steps, "max_steps")
        if not isinstance(self.rng_seed, (int, np.integer)) or not 0 <= self.rng_seed < 2 ** 64:
            raise ValueError(f"rng_seed must be an integer in [0, 2**64), got {self.rng_seed!r}")
        rule = self.seed_node_rule
        if isinstance(rule, str):
            if rule != "uniform_random":
                raise ValueError(f"seed_node_rule must be 'uniform_random' or a node id, got {rule!r}")
        elif not 0 <= int(rule) < self.node_count:
            raise ValueError(f"fixed seed node {rule} out of range [0, {self.node_count})")
        if (self.dynamics.mode == "networked" and self.dynamics.cost_model.kind == "depth_exponential"
                and self.graph.kind != "binary_tree"):
            raise ValueError("depth_exponential cost is only valid on binary_tree graphs")

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        dyn = self.dynamics
        rule = self.seed_node_rule
        return {
            "graph": self.graph.to_dict(),
            "dynamics": {
                "mode": dyn.mode,
                "alpha": dyn.alpha,
                "beta": dyn.beta,
                "gamma_independent": dyn.gamma_independent,
                "cost_model": {"kind": dyn.cost_model.kind, "gamma": dyn.cost_model.gamma},
            },
            "node_count": self.node_count,
            "seed_node_rule": rule if isinstance(rule, str) else {"fixed": int(rule)},
            "stop_fraction": self.stop_fraction,
            "max_steps": self.max_steps,
            "rng_seed": int(self.rng_seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        dyn = dict(d["dynamics"])
        dyn["cost_model"] = CostModel(**dyn.get("cost_model", {}))
        d["dynamics"] = DynamicsParams(**dyn)
        d["graph"] = GraphSpec(**d["graph"])
        rule = d.get("seed_node_rule", "uniform_random")
        if isinstance(rule, dict):
            d["seed_node_rule"] = int(rule["fixed"])
        return cls(**d)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "SimulationConfig":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path) -> SimulationConfig:
    with open(path) as fh:
        return SimulationConfig.from_json(fh.read())


@dataclass(eq=False)
class GrowthCurve:
    """Adopted count after each step; ``counts[0]`` is the initial state.

    ``saturated`` is False when the run hit ``max_steps`` before reaching the
    stop fraction.
    """

    counts: np.ndarray
    node_count: int
    config_digest: str = ""
    saturated: bool = True

    def __len__(self):
        return len(self.counts)

    @property
    def final_count(self) -> int:
        return int(self.counts[-1])

    @property
    def fractions(self) -> np.ndarray:
        return self.counts / self.node_count


def _seed_node(config: SimulationConfig, rng) -> int:
    if isinstance(config.seed_node_rule, str):
        return int(rng.integers(config.node_count))
    return int(config.seed_node_rule)


def run(config: SimulationConfig, graph: Optional[Graph] = None) -> GrowthCurve:
    """Simulate one run until the stop fraction is met or ``max_steps`` elapse.

    The graph (unless supplied), the seed node and every adoption draw come
    from one generator seeded with ``config.rng_seed``, in that order.
    """
    rng = np.random.default_rng(config.rng_seed)
    n = config.node_count
    if graph is None:
        graph = config.graph.build(n, rng)
    elif graph.node_count != n:
        raise ValueError(f"graph has {graph.node_count} nodes, config expects {n}")
    state = DeploymentState.initial(n, [_seed_node(config, rng)])
    process = DeploymentProcess(graph, config.dynamics, state)
    target = target_count(config.stop_fraction, n)

    counts = np.empty(min(config.max_steps, 4096) + 1, dtype=np.int32)
    counts[0] = state.adopted_count
    used = 1
    while process.state.adopted_count < target and used - 1 < config.max_steps:
        chunk = process.advance(rng, config.max_steps - (used - 1))
        if used + len(chunk) > counts.size:
            grown = np.empty(max(counts.size * 2, used + len(chunk)), dtype=np.int32)
            grown[:used] = counts[:used]
            counts = grown
        counts[used:used + len(chunk)] = chunk
        used += len(chunk)

    saturated = process.state.adopted_count >= target
    if not saturated:
        logger.info("run %s stopped at max_steps=%d with %d/%d adopted",
                    config.digest(), config.max_steps, process.state.adopted_count, n)
    return GrowthCurve(counts[:used].copy(), n, config.digest(), saturated)


def derive_seed(seed_stream: int, index: int) -> int:
    """Deterministic 64-bit seed for run ``index`` of an ensemble."""
    ss = np.random.SeedSequence(int(seed_stream), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class EnsembleSummary:
    """Per-step statistics over an ensemble, curves right-extended at their final value."""

    mean: np.ndarray
    min: np.ndarray
    max: np.ndarray
    quantiles: dict
    saturation_steps: list
    saturated: list
    seeds: list
    curves: list = field(repr=False)

    @property
    def num_runs(self) -> int:
        return len(self.curves)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(self.mean.size)

    def table(self) -> dict:
        cols = {"step": self.steps, "mean": self.mean, "min": self.min, "max": self.max}
        for q in sorted(self.quantiles):
            cols[f"q{round(q * 100):02d}"] = self.quantiles[q]
        return cols


def _aligned(curves: list) -> np.ndarray:
    length = max(len(c) for c in curves)
    out = np.empty((len(curves), length), dtype=np.int32)
    for i, c in enumerate(curves):
        out[i, :len(c)] = c.counts
        out[i, len(c):] = c.counts[-1]
    return out


def summarize(curves: list, seeds: Optional[list] = None, stop_fraction: float = 0.99) -> EnsembleSummary:
    from .analysis import saturation_step

    mat = _aligned(curves)
    return EnsembleSummary(
        mean=mat.mean(axis=0),
        min=mat.min(axis=0),
        max=mat.max(axis=0),
        quantiles={q: v for q, v in zip(QUANTILES, np.quantile(mat, QUANTILES, axis=0))},
        saturation_steps=[saturation_step(c, stop_fraction) for c in curves],
        saturated=[c.saturated for c in curves],
        seeds=list(seeds) if seeds is not None else [],
        curves=list(curves),
    )


def _run_pinned(args):
    config, graph = args
    return run(config, graph)


def run_ensemble(config: SimulationConfig, num_runs: int, seed_stream: int, *,
                 jobs: int = 1, pin_graph: bool = False) -> EnsembleSummary:
    """Run ``num_runs`` independent runs and summarize them step by step.

    Run ``i`` uses ``derive_seed(seed_stream, i)``. Random graphs are rebuilt
    per run unless ``pin_graph`` is set, in which case one topology (drawn
    from a separate derived seed) is shared by every run. Results are ordered
    by run index whatever ``jobs`` is.
    """
    num_runs = check_positive_int(num_runs, "num_runs")
    jobs = check_positive_int(jobs, "jobs")
    seeds = [derive_seed(seed_stream, i) for i in range(num_runs)]
    configs = [config.replace(rng_seed=s) for s in seeds]
    graph = None
    if pin_graph:
        graph_rng = np.random.default_rng(derive_seed(seed_stream, 2 ** 32 - 1))
        graph = config.graph.build(config.node_count, graph_rng)
    tasks = [(c, graph) for c in configs]
    if jobs == 1:
        curves = [_run_pinned(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            curves = list(pool.map(_run_pinned, tasks))
    stalled = sum(not c.saturated for c in curves)
    if stalled:
        logger.info("%d of %d runs hit max_steps before the stop fraction", stalled, num_runs)
    return summarize(curves, seeds, config.stop_fraction)


# -- presets -----------------------------------------------------------------

def _tree(alpha: float) -> SimulationConfig:
    return SimulationConfig(
        GraphSpec("binary_tree"),
        DynamicsParams("networked", alpha, PRESET_BETA, cost_model=CostModel("depth_exponential", 2e6)),
    )


_PRESETS = {
    "independent": lambda: SimulationConfig(
        GraphSpec("clique"),
        DynamicsParams("independent", 1.0, PRESET_BETA, gamma_independent=0.05),
    ),
    "clique": lambda: SimulationConfig(
        GraphSpec("clique"),
        DynamicsParams("networked", 1.25e7, PRESET_BETA, cost_model=CostModel("constant", 1.25e7)),
    ),
    "random_graph": lambda: SimulationConfig(
        GraphSpec("erdos_renyi", edge_prob=0.001),
        DynamicsParams("networked", 10000.0, PRESET_BETA, cost_model=CostModel("degree_linear", 1562.5)),
    ),
    "preferential": lambda: SimulationConfig(
        GraphSpec("barabasi_albert", ring_size=100, m=1),
        DynamicsParams("networked", 3333.0, PRESET_BETA, cost_model=CostModel("degree_linear", 2500.0)),
    ),
    "tree": lambda: _tree(312.5),
    "tree_small_alpha": lambda: _tree(78.0),
    "tree_tiny_alpha": lambda: _tree(39.0),
}

PRESET_NAMES = tuple(_PRESETS)


class UnknownPresetError(ValueError):
    pass


def preset(name: str) -> SimulationConfig:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}"
        ) from None
