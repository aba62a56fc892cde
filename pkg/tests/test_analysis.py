import numpy as np
import pytest

import wavecap as wc
from wavecap.errors import ValidationError
from wavecap.reduction import FLAG_BETWEEN_PULSES

from conftest import synthetic_weights


def two_bump_record(t_final=100.0, n=4001, centers=(30.0, 70.0), width=3.0,
                    heights=(1.0, 0.8)):
    """Synthetic two-transit current with known Gaussian bumps."""
    times = np.linspace(0.0, t_final, n)
    current = np.zeros_like(times)
    for c, h in zip(centers, heights):
        current += h * np.exp(-((times - c) ** 2) / (2 * width ** 2))
    p1 = np.concatenate([[0.0], np.cumsum(
        0.5 * (current[1:] + current[:-1]) * np.diff(times))])
    p1 /= p1[-1] * 2.0  # final capture 0.5, irrelevant for window logic
    return wc.ComponentWeights(times=times, p_no_capture=1 - p1,
                               p_capture=p1, current=current)


class TestWindowDetection:
    def test_single_peak_no_window(self, tiny_run):
        report = wc.detect_zero_current_window(tiny_run.weights)
        assert not report.exists

    def test_two_bump_window_matches_tail_oracle(self):
        # oracle: Gaussian bumps fall below ratio*peak at
        # c +/- width*sqrt(2 ln(h/(ratio*peak)))
        rec = two_bump_record()
        report = wc.detect_zero_current_window(rec, threshold_ratio=1e-6)
        assert report.exists
        z1 = 3.0 * np.sqrt(2 * np.log(1.0 / 1e-6))
        z2 = 3.0 * np.sqrt(2 * np.log(0.8 / 1e-6))
        assert report.window_start == pytest.approx(30.0 + z1, abs=0.5)
        assert report.window_end == pytest.approx(70.0 - z2, abs=0.5)
        assert report.window_max_current < 1e-6 * report.peak_current

    def test_threshold_one_spans_between_peaks(self):
        rec = two_bump_record()
        report = wc.detect_zero_current_window(rec, threshold_ratio=1.0)
        assert report.exists
        assert report.window_start < 35.0
        assert report.window_end > 65.0

    def test_scale_invariance(self):
        rec = two_bump_record()
        scaled = wc.ComponentWeights(times=rec.times,
                                     p_no_capture=rec.p_no_capture,
                                     p_capture=rec.p_capture,
                                     current=rec.current * 123.4)
        a = wc.detect_zero_current_window(rec)
        b = wc.detect_zero_current_window(scaled)
        assert a.window_start == b.window_start
        assert a.window_end == b.window_end
        assert a.exists and b.exists

    def test_peak_detection_rules(self):
        rec = two_bump_record(heights=(1.0, 0.05))
        # second bump below the 10% floor: only one peak, no window
        report = wc.detect_zero_current_window(rec)
        assert not report.exists


class TestKSDistance:
    def test_inverse_cdf_quantile_grid(self):
        rec = synthetic_weights()
        n = 500
        q = (np.arange(n) + 0.5) / n
        total = rec.p_capture[-1]
        samples = np.interp(q * total, rec.p_capture, rec.times)
        assert wc.ks_distance(samples, rec) <= 0.5 / n + 1e-3

    def test_degenerate_point_mass(self):
        rec = synthetic_weights()
        t_star = 45.0
        f = rec.p_capture_at(t_star) / rec.p_capture[-1]
        expected = max(f, 1.0 - f)
        assert wc.ks_distance([t_star] * 50, rec) == pytest.approx(expected,
                                                                   abs=1e-9)

    def test_empty_samples_rejected(self):
        rec = synthetic_weights()
        with pytest.raises(ValidationError, match="sample"):
            wc.ks_distance([], rec)

    def test_invariant_under_monotone_reparameterization(self):
        rec = synthetic_weights()
        rng = np.random.default_rng(3)
        samples = np.interp(rng.uniform(0, rec.p_capture[-1], 200),
                            rec.p_capture, rec.times)
        d1 = wc.ks_distance(samples, rec)
        warp = lambda t: t + 0.3 * t ** 1.5 / 10.0
        warped = wc.ComponentWeights(times=warp(rec.times),
                                     p_no_capture=rec.p_no_capture,
                                     p_capture=rec.p_capture,
                                     current=rec.current)
        d2 = wc.ks_distance(warp(samples), warped)
        # exact in the continuum; linear interpolation between samples
        # leaves an O(h^2) wobble
        assert d1 == pytest.approx(d2, abs=1e-5)


class TestSummarizeBatch:
    def test_no_capture_batch(self):
        times = np.linspace(0.0, 10.0, 101)
        zeros = np.zeros_like(times)
        rec = wc.ComponentWeights(times=times, p_no_capture=np.ones_like(times),
                                  p_capture=zeros, current=zeros)
        rule = wc.ReductionRule(kind=wc.CURRENT_JUMP)
        trials = wc.run_trials(rec, rule, 50, 0)
        summary = wc.summarize_batch(trials, rec)
        assert summary.capture_fraction == 0.0
        assert sum(c for _, _, c in summary.collapse_time_histogram) == 0
        assert summary.ks_distance is None

    def test_histogram_counts_collapsed_trials(self):
        rec = synthetic_weights()
        rule = wc.ReductionRule(kind=wc.CURRENT_JUMP)
        trials = wc.run_trials(rec, rule, 400, 1)
        summary = wc.summarize_batch(trials, rec)
        collapsed = sum(1 for t in trials if t.collapse_time is not None)
        assert sum(c for _, _, c in summary.collapse_time_histogram) == collapsed
        assert summary.n_trials == 400

    def test_mixed_rules_rejected(self):
        rec = synthetic_weights()
        a = wc.run_trials(rec, wc.ReductionRule(kind=wc.CURRENT_JUMP), 5, 0)
        b = wc.run_trials(rec, wc.ReductionRule(kind=wc.PENROSE_ENV,
                                                tau_env=20.0), 5, 0)
        with pytest.raises(ValidationError, match="mixed"):
            wc.summarize_batch(a + b, rec)

    def test_permutation_invariance(self):
        rec = synthetic_weights()
        rule = wc.ReductionRule(kind=wc.CURRENT_JUMP)
        trials = wc.run_trials(rec, rule, 200, 4)
        shuffled = list(trials)
        np.random.default_rng(0).shuffle(shuffled)
        a = wc.summarize_batch(trials, rec)
        b = wc.summarize_batch(shuffled, rec)
        assert a == b

    def test_between_pulses_recomputed_against_window(self):
        rec = synthetic_weights()
        rule = wc.ReductionRule(kind=wc.CURRENT_JUMP)
        trials = wc.run_trials(rec, rule, 300, 8)  # no window at trial time
        window = wc.WindowReport(window_start=35.0, window_end=45.0,
                                 peak_current=1.0, window_max_current=0.0,
                                 exists=True)
        summary = wc.summarize_batch(trials, rec, window)
        expected = sum(1 for t in trials if t.collapse_time is not None
                       and 35.0 <= t.collapse_time <= 45.0)
        assert summary.flag_counts.get(FLAG_BETWEEN_PULSES, 0) == expected
        assert expected > 0
