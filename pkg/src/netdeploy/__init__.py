"""Stochastic simulation of network-technology deployment on graphs."""
from .analysis import (RateSeries, count_bursts, curve_features, detect_early_flattening,
                       feature_report, growth_rate, saturation_step, smooth)
from .dynamics import (CostModel, DeploymentProcess, DeploymentState, DynamicsParams,
                       adopted_neighbor_count, node_cost, step, transition_probability, utility)
from .graphs import (Graph, degree, make_barabasi_albert, make_binary_tree, make_clique,
                     make_erdos_renyi, read_edge_list, write_edge_list)
from .simulation import (PRESET_NAMES, EnsembleSummary, GraphSpec, GrowthCurve,
                         SimulationConfig, UnknownPresetError, derive_seed, load_config, preset,
                         run, run_ensemble)

__version__ = "0.1.0"
