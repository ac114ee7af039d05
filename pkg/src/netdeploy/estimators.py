"""scikit-learn style wrappers.

``DeploymentSimulator`` runs an ensemble in ``fit`` and exposes the curves;
``GrowthCurveFeatures`` turns curves into a feature matrix. Chained in a
:class:`~sklearn.pipeline.Pipeline`, ``fit_transform(None)`` goes straight
from parameters to per-run shape features.
"""
from __future__ import annotations

import dataclasses

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_curves, check_positive_int
from .analysis import DEFAULT_PROMINENCE, DEFAULT_WINDOW, curve_features
from .simulation import SimulationConfig, preset as get_preset, run_ensemble


class DeploymentSimulator(BaseEstimator):
    """Monte-Carlo ensemble of deployment runs.

    Parameters
    ----------
    preset : str, default="clique"
        Base configuration; ignored when ``config`` is given.
    config : SimulationConfig, optional
        Explicit configuration.
    alpha, beta, gamma : float, optional
        Overrides for the scaling factor, logistic baseline and cost scale
        (``gamma`` is the fixed adoption probability in independent mode).
    node_count, stop_fraction, max_steps : optional
        Overrides for the corresponding config fields.
    n_runs : int, default=1
    random_state : int, default=0
        Seed stream for the ensemble.
    pin_graph : bool, default=False
        Reuse one random topology across all runs.
    n_jobs : int, default=1

    Attributes
    ----------
    config_ : SimulationConfig
    summary_ : EnsembleSummary
    curves_ : list of GrowthCurve
    """

    def __init__(self, preset="clique", config=None, alpha=None, beta=None, gamma=None,
                 node_count=None, stop_fraction=None, max_steps=None, n_runs=1,
                 random_state=0, pin_graph=False, n_jobs=1):
        self.preset = preset
        self.config = config
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.node_count = node_count
        self.stop_fraction = stop_fraction
        self.max_steps = max_steps
        self.n_runs = n_runs
        self.random_state = random_state
        self.pin_graph = pin_graph
        self.n_jobs = n_jobs

    def build_config(self) -> SimulationConfig:
        cfg = self.config if self.config is not None else get_preset(self.preset)
        dyn = cfg.dynamics
        dyn_changes = {}
        if self.alpha is not None:
            dyn_changes["alpha"] = self.alpha
        if self.beta is not None:
            dyn_changes["beta"] = self.beta
        if self.gamma is not None:
            if dyn.mode == "independent":
                dyn_changes["gamma_independent"] = self.gamma
            else:
                dyn_changes["cost_model"] = dataclasses.replace(dyn.cost_model, gamma=self.gamma)
        changes = {k: getattr(self, k) for k in ("node_count", "stop_fraction", "max_steps")
                   if getattr(self, k) is not None}
        if dyn_changes:
            changes["dynamics"] = dataclasses.replace(dyn, **dyn_changes)
        return cfg.replace(**changes) if changes else cfg

    def fit(self, X=None, y=None):
        check_positive_int(self.n_runs, "n_runs")
        self.config_ = self.build_config()
        self.summary_ = run_ensemble(self.config_, self.n_runs, self.random_state,
                                     jobs=self.n_jobs, pin_graph=self.pin_graph)
        self.curves_ = self.summary_.curves
        return self

    def transform(self, X=None):
        check_is_fitted(self, "curves_")
        return list(self.curves_)

    def fit_transform(self, X=None, y=None):
        return self.fit(X, y).transform(X)

    def predict(self, X):
        """Ensemble-mean adopted count at the given step indices."""
        check_is_fitted(self, "summary_")
        steps = np.asarray(X).reshape(-1).astype(np.int64)
        if steps.size and steps.min() < 0:
            raise ValueError("step indices must be non-negative")
        mean = self.summary_.mean
        return mean[np.minimum(steps, mean.size - 1)]


class GrowthCurveFeatures(TransformerMixin, BaseEstimator):
    """Per-curve shape features.

    Output columns: ``burst_count``, ``early_flattening`` (0/1),
    ``saturation_step`` (NaN when the fraction is never reached) and
    ``final_fraction``. Plain count arrays need ``node_count``.
    """

    feature_names = ("burst_count", "early_flattening", "saturation_step", "final_fraction")

    def __init__(self, window=DEFAULT_WINDOW, prominence_fraction=DEFAULT_PROMINENCE,
                 stop_fraction=0.99, node_count=None):
        self.window = window
        self.prominence_fraction = prominence_fraction
        self.stop_fraction = stop_fraction
        self.node_count = node_count

    def fit(self, X, y=None):
        check_curves(X)
        check_positive_int(self.window, "window")
        if self.window % 2 == 0:
            raise ValueError(f"window must be odd, got {self.window}")
        self.n_features_out_ = len(self.feature_names)
        return self

    def _node_count(self, curve) -> int:
        n = getattr(curve, "node_count", None) or self.node_count
        if n is None:
            raise ValueError("node_count is required for plain count arrays")
        return int(n)

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        rows = []
        for curve in check_curves(X):
            n = self._node_count(curve)
            counts = np.asarray(getattr(curve, "counts", curve))
            feats = curve_features(_Counts(counts, n), self.window,
                                   self.prominence_fraction, self.stop_fraction)
            sat = feats["saturation_step"]
            rows.append([feats["burst_count"], float(feats["early_flattening"]),
                         np.nan if sat is None else sat, counts[-1] / n])
        return np.asarray(rows, dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.feature_names, dtype=object)


@dataclasses.dataclass
class _Counts:
    counts: np.ndarray
    node_count: int
