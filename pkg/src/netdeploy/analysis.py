"""Shape features of growth curves: rates, smoothing, bursts, flattening and
saturation timing."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import find_peaks, peak_prominences

from ._validation import check_counts, check_positive_int, check_probability, target_count

DEFAULT_WINDOW = 11
DEFAULT_PROMINENCE = 0.25


@dataclass(frozen=True)
class RateSeries:
    rates: np.ndarray
    window: int = 1

    def __len__(self):
        return len(self.rates)


def _rates(series) -> np.ndarray:
    return np.asarray(getattr(series, "rates", series), dtype=float)


def growth_rate(curve) -> RateSeries:
    counts = check_counts(curve)
    if counts.size < 2:
        raise ValueError("growth_rate needs a curve with at least 2 points")
    return RateSeries(np.diff(counts).astype(float), 1)


def smooth(series, window: int) -> RateSeries:
    """Centered moving average, ends padded by repeating the edge values."""
    x = _rates(series)
    window = check_positive_int(window, "window")
    if window % 2 == 0:
        raise ValueError(f"window must be odd, got {window}")
    if window > x.size:
        raise ValueError(f"window {window} exceeds series length {x.size}")
    half = window // 2
    padded = np.pad(x, half, mode="edge")
    csum = np.concatenate(([0.0], np.cumsum(padded)))
    return RateSeries((csum[window:] - csum[:-window]) / window, window)


def fit_window(window: int, length: int) -> int:
    """Largest odd window not above ``window`` that fits a series of ``length``."""
    w = min(window, length)
    return w if w % 2 else max(w - 1, 1)


def _edge_peak(x: np.ndarray):
    """Prominence of ``x[0]`` as a one-sided local maximum, or None.

    The first sample counts as a peak when it (or a plateau starting at it)
    strictly exceeds the next differing sample. Its only flank runs up to the
    first higher sample, or the far end.
    """
    top = x[0]
    differ = np.flatnonzero(x != top)
    if differ.size == 0 or x[differ[0]] > top:
        return None
    higher = np.flatnonzero(x > top)
    stop = higher[0] if higher.size else x.size
    return float(top - x[differ[0]:stop].min())


def burst_prominences(series) -> tuple:
    """Indices and prominences of every local maximum, including the two ends.

    A peak's prominence is its height above the higher of its two flank
    minima, each flank running to the nearest strictly higher sample or the
    series end. An end sample has a single flank. A global maximum has no
    higher sample on either side, so it is measured from the series minimum;
    this keeps a burst whose descent was cut off by the stop rule from
    losing its prominence.
    """
    x = _rates(series)
    peaks, _ = find_peaks(x)
    prom = peak_prominences(x, peaks)[0] if peaks.size else np.empty(0)
    peaks, prom = list(peaks), list(prom)
    if x.size >= 2:
        head = _edge_peak(x)
        if head is not None:
            peaks.insert(0, 0)
            prom.insert(0, head)
        tail = _edge_peak(x[::-1])
        if tail is not None:
            peaks.append(x.size - 1)
            prom.append(tail)
    peaks = np.asarray(peaks, dtype=np.int64)
    prom = np.asarray(prom, dtype=float)
    if peaks.size:
        top = x[peaks] == x.max()
        prom[top] = x.max() - x.min()
    return peaks, prom


def count_bursts(series, prominence_fraction: float = DEFAULT_PROMINENCE) -> int:
    """Number of local maxima whose prominence exceeds a fraction of the global maximum."""
    prominence_fraction = check_probability(prominence_fraction, "prominence_fraction",
                                            open_low=True, open_high=True)
    x = _rates(series)
    if x.size < 2:
        return 0
    _, prom = burst_prominences(x)
    return int(np.count_nonzero(prom > prominence_fraction * x.max()))


def detect_early_flattening(series) -> bool:
    """True if the rate dips before its peak.

    Requires a local minimum strictly between step 0 and the (first) argmax
    that is below 90% of the initial rate and below half the maximum rate.
    """
    x = _rates(series)
    if x.size < 3:
        return False
    peak = int(np.argmax(x))
    limit = min(0.9 * x[0], 0.5 * x[peak])
    for t in range(1, peak):
        if x[t] <= x[t - 1] and x[t] <= x[t + 1] and x[t] < limit:
            return True
    return False


def saturation_step(curve, fraction: float = 0.99, node_count: Optional[int] = None) -> Optional[int]:
    """First step whose count reaches ``ceil(fraction * node_count)``; None if never."""
    fraction = check_probability(fraction, "fraction")
    if node_count is None:
        node_count = getattr(curve, "node_count", None)
    if node_count is None:
        raise ValueError("node_count is required when curve is a plain sequence")
    counts = check_counts(curve)
    hits = np.flatnonzero(counts >= target_count(fraction, node_count))
    return int(hits[0]) if hits.size else None


def curve_features(curve, window: int = DEFAULT_WINDOW,
                   prominence_fraction: float = DEFAULT_PROMINENCE,
                   fraction: float = 0.99) -> dict:
    """Burst count, early flattening and saturation step of one curve.

    The smoothing window shrinks to the longest odd length that fits when the
    curve is shorter than ``window`` steps.
    """
    counts = check_counts(curve)
    if counts.size < 2:
        return {"burst_count": 0, "early_flattening": False,
                "saturation_step": saturation_step(curve, fraction)}
    rates = growth_rate(counts)
    smoothed = smooth(rates, fit_window(window, len(rates)))
    return {
        "burst_count": count_bursts(smoothed, prominence_fraction),
        "early_flattening": detect_early_flattening(smoothed),
        "saturation_step": saturation_step(curve, fraction),
    }


def feature_report(preset: str, curves: list, window: int = DEFAULT_WINDOW,
                   prominence_fraction: float = DEFAULT_PROMINENCE,
                   fraction: float = 0.99) -> dict:
    feats = [curve_features(c, window, prominence_fraction, fraction) for c in curves]
    bursts = Counter(f["burst_count"] for f in feats)
    sat = [f["saturation_step"] for f in feats if f["saturation_step"] is not None]
    qs = (0.1, 0.25, 0.5, 0.75, 0.9)
    return {
        "preset": preset,
        "runs": len(feats),
        "window": window,
        "prominence_fraction": prominence_fraction,
        "burst_count_distribution": {str(k): bursts[k] for k in sorted(bursts)},
        "flattening_frequency": sum(f["early_flattening"] for f in feats) / len(feats),
        "saturation_step_quantiles": (
            {str(q): float(v) for q, v in zip(qs, np.quantile(sat, qs))} if sat else None
        ),
        "saturated_runs": len(sat),
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False)
