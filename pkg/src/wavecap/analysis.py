"""Aggregation of runs and trial batches: current peaks, the zero-current
window between pulses, KS agreement with the recorded capture curve, and
per-rule batch summaries."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError
from .propagate import ComponentWeights
from .reduction import CAPTURE, CURRENT_JUMP, FLAG_BETWEEN_PULSES, TrialRecord

#: current below this fraction of the peak counts as zero flow
WINDOW_THRESHOLD_RATIO = 1e-6
#: peak detection: local maxima above this fraction of the global max...
PEAK_HEIGHT_RATIO = 0.1
#: ...separated by at least this many samples
PEAK_MIN_SEPARATION = 10

HISTOGRAM_BINS = 100


@dataclass(frozen=True)
class WindowReport:
    """Longest zero-current interval strictly between the two main current
    peaks.  ``exists`` is False for single-pulse records (one peak)."""

    window_start: float
    window_end: float
    peak_current: float
    window_max_current: float
    exists: bool


@dataclass(frozen=True)
class BatchSummary:
    rule: str
    n_trials: int
    capture_fraction: float
    ks_distance: Optional[float]
    flag_counts: dict[str, int]
    collapse_time_histogram: list[tuple[float, float, int]]


def find_current_peaks(weights: ComponentWeights,
                       height_ratio: float = PEAK_HEIGHT_RATIO,
                       min_separation: int = PEAK_MIN_SEPARATION) -> np.ndarray:
    """Indices of local maxima of the current above height_ratio * max,
    keeping the taller of any pair closer than min_separation samples."""
    j = weights.current
    if len(j) < 3 or j.max() <= 0.0:
        return np.array([], dtype=int)
    floor = height_ratio * j.max()
    inner = (j[1:-1] >= j[:-2]) & (j[1:-1] > j[2:]) & (j[1:-1] >= floor)
    candidates = np.flatnonzero(inner) + 1
    kept: list[int] = []
    for idx in candidates:
        if kept and idx - kept[-1] < min_separation:
            if j[idx] > j[kept[-1]]:
                kept[-1] = idx
        else:
            kept.append(idx)
    return np.array(kept, dtype=int)


def detect_zero_current_window(weights: ComponentWeights,
                               threshold_ratio: float = WINDOW_THRESHOLD_RATIO
                               ) -> WindowReport:
    """Locate the quiet interval between the two largest current peaks.

    Returns exists=False when fewer than two peaks are found or no sample
    between them falls below threshold_ratio * peak.
    """
    peaks = find_current_peaks(weights)
    peak_current = float(weights.current.max()) if len(weights.current) else 0.0
    none = WindowReport(window_start=0.0, window_end=0.0,
                        peak_current=peak_current, window_max_current=0.0,
                        exists=False)
    if len(peaks) < 2:
        return none
    order = np.argsort(weights.current[peaks])[::-1]
    i1, i2 = sorted(int(peaks[i]) for i in order[:2])
    j = weights.current[i1 + 1:i2]
    t = weights.times[i1 + 1:i2]
    below = np.flatnonzero(j < threshold_ratio * peak_current)
    if len(below) == 0:
        return none
    runs = np.split(below, np.flatnonzero(np.diff(below) > 1) + 1)
    best = max(runs, key=len)
    if len(best) < 2:
        return none
    return WindowReport(window_start=float(t[best[0]]),
                        window_end=float(t[best[-1]]),
                        peak_current=peak_current,
                        window_max_current=float(j[best].max()),
                        exists=True)


def ks_distance(samples: Sequence[float], weights: ComponentWeights) -> float:
    """Sup-norm distance between the empirical CDF of the samples and the
    recorded capture curve normalized by its final value."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValidationError("ks_distance needs at least one sample")
    total = weights.p_capture[-1]
    if total <= 0.0:
        raise ValidationError("capture curve is identically zero; nothing to compare")
    xs = np.sort(samples)
    n = xs.size
    cdf = np.interp(xs, weights.times, weights.p_capture) / total
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max(), 0.0))


def summarize_batch(records: Sequence[TrialRecord], weights: ComponentWeights,
                    window: Optional[WindowReport] = None,
                    n_bins: int = HISTOGRAM_BINS) -> BatchSummary:
    """Tally one rule's trial batch.

    The between_pulses count is recomputed from collapse times against the
    supplied window (records may have been produced without one); KS is
    reported for current_jump batches with at least one capture.
    """
    if not records:
        raise ValidationError("summarize_batch needs at least one record")
    rules = {r.rule for r in records}
    if len(rules) > 1:
        raise ValidationError(f"mixed rules in one batch: {sorted(rules)}")
    rule = records[0].rule

    n = len(records)
    captures = sum(1 for r in records if r.chosen_component == CAPTURE)
    collapse_times = [r.collapse_time for r in records if r.collapse_time is not None]

    flag_counts: Counter[str] = Counter()
    for r in records:
        flag_counts.update(r.flags - {FLAG_BETWEEN_PULSES})
    if window is not None and window.exists:
        flag_counts[FLAG_BETWEEN_PULSES] = sum(
            1 for t in collapse_times
            if window.window_start <= t <= window.window_end)

    t_lo = float(weights.times[0])
    t_hi = weights.t_final
    edges = np.linspace(t_lo, t_hi, n_bins + 1)
    counts, _ = np.histogram(collapse_times, bins=edges)
    histogram = [(float(edges[i]), float(edges[i + 1]), int(counts[i]))
                 for i in range(n_bins)]

    ks: Optional[float] = None
    if rule == CURRENT_JUMP:
        capture_times = [r.collapse_time for r in records
                         if r.chosen_component == CAPTURE and r.collapse_time is not None]
        if capture_times:
            ks = ks_distance(capture_times, weights)

    return BatchSummary(rule=rule, n_trials=n,
                        capture_fraction=captures / n,
                        ks_distance=ks,
                        flag_counts=dict(sorted(flag_counts.items())),
                        collapse_time_histogram=histogram)
