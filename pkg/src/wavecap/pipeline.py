"""Deterministic run orchestration: calibrate, evolve, reduce, analyze,
emit.

Everything written to the output directory is a pure function of
(config, base_seed); wall-clock times appear only in the manifest, which
is written last and carries a checksum for every other emitted file.  On
failure, partially written outputs are removed.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from . import __version__
from .analysis import (WindowReport, detect_zero_current_window,
                       summarize_batch)
from .config import RunConfig, serialize_config
from .csvio import snapshots_to_csv, trials_to_csv, weights_to_csv
from .errors import ValidationError
from .propagate import ComponentWeights
from .reduction import (CURRENT_JUMP, FLAG_BETWEEN_PULSES, FLAG_ZERO_CURRENT,
                        FLAG_ZERO_WEIGHT, PENROSE_ENV, PENROSE_SPREAD,
                        ReductionRule, TrialRecord, collapse_time_spread,
                        run_trials)
from .scenario import TWO_PULSE, build_initial_state, calibrate_strength, run_scenario
from .state import energy_moments

ALL_ARTIFACTS = ("weights", "trials", "summary", "claims", "snapshots", "plots")


@dataclass
class RunResult:
    out_dir: str
    manifest: dict
    claims: list[dict]
    summaries: list[dict]
    window: Optional[WindowReport]
    weights: ComponentWeights


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _trial_chunk(weights_arrays, rule: ReductionRule, start_seed: int,
                 count: int, moments_tuple, window_tuple):
    # module-level so ProcessPoolExecutor can pickle it
    from .propagate import ComponentWeights as CW
    from .state import EnergyMoments as EM
    weights = CW(*[np.asarray(a) for a in weights_arrays])
    moments = EM(*moments_tuple) if moments_tuple else None
    return run_trials(weights, rule, count, start_seed, moments=moments,
                      window=window_tuple)


def _run_batch(weights: ComponentWeights, rule: ReductionRule, n_trials: int,
               base_seed: int, moments, window, threads: int) -> list[TrialRecord]:
    window_tuple = None
    if window is not None and window.exists:
        window_tuple = (window.window_start, window.window_end)
    if threads <= 1 or n_trials < 4 * threads:
        return run_trials(weights, rule, n_trials, base_seed, moments=moments,
                          window=window_tuple)
    bounds = np.linspace(0, n_trials, threads + 1).astype(int)
    weights_arrays = (weights.times, weights.p_no_capture, weights.p_capture,
                      weights.current)
    moments_tuple = (moments.mean_energy, moments.energy_spread) if moments else None
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_trial_chunk, weights_arrays, rule,
                               base_seed + int(lo), int(hi - lo),
                               moments_tuple, window_tuple)
                   for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        records: list[TrialRecord] = []
        for fut in futures:
            records.extend(fut.result())
    return records


def _claim(name: str, description: str, measured, op: str, threshold,
           expected_pass: bool) -> dict:
    if op == "<":
        ok = measured < threshold
    elif op == "<=":
        ok = measured <= threshold
    elif op == ">=":
        ok = measured >= threshold
    elif op == "==":
        ok = measured == threshold
    else:
        raise ValueError(f"unknown claim op {op!r}")
    result = "PASS" if ok else "FAIL"
    expected = "PASS" if expected_pass else "FAIL"
    return {"claim": name, "description": description,
            "measured": measured, "op": op, "threshold": threshold,
            "result": result, "expected": expected,
            "as_expected": result == expected}


def _build_claims(config: RunConfig, weights: ComponentWeights,
                  window: Optional[WindowReport], batches: dict,
                  capture_target: float) -> list[dict]:
    claims = []
    accounting = float(np.abs(weights.p_no_capture + weights.p_capture - 1.0).max())
    claims.append(_claim(
        "weights_accounting", "no-capture and capture weights sum to one",
        accounting, "<", 1e-6, True))
    claims.append(_claim(
        "capture_starts_at_zero", "capture weight is zero at the first sample",
        float(weights.p_capture[0]), "<", 1e-9, True))
    monotone = float(np.diff(weights.p_capture).min()) if len(weights.times) > 1 else 0.0
    claims.append(_claim(
        "capture_monotone", "capture weight never decreases",
        monotone, ">=", -1e-8, True))
    dt_s = np.diff(weights.times)
    integral = np.concatenate(
        [[0.0], np.cumsum(0.5 * (weights.current[1:] + weights.current[:-1]) * dt_s)])
    consistency = float(np.abs(integral - weights.p_capture).max())
    claims.append(_claim(
        "current_consistency",
        "time integral of the capture current reproduces the capture weight",
        consistency, "<", 1e-5, True))
    if config.scenario.detector.strength > 0.0 or config.calibration.enabled:
        claims.append(_claim(
            "capture_complete", "total capture probability reaches the target",
            float(weights.p_capture[-1]), ">=", capture_target, True))

    two_pulse = config.scenario.kind == TWO_PULSE
    if two_pulse:
        ratio = (window.window_max_current / window.peak_current
                 if window is not None and window.exists and window.peak_current > 0
                 else 1.0)
        claims.append(_claim(
            "zero_current_window",
            "a zero-current interval separates the two pulse transits",
            ratio, "<", 1e-6, True))

    for kind, (summary, extras) in batches.items():
        n = summary.n_trials
        if kind == PENROSE_ENV:
            frac = summary.flag_counts.get(FLAG_ZERO_WEIGHT, 0) / n
            claims.append(_claim(
                "penrose_env_zero_weight",
                "environment-deadline reduction fires while the capture "
                "branch is still empty",
                frac, "==", 1.0, True))
        elif kind == PENROSE_SPREAD:
            if two_pulse:
                frac = summary.flag_counts.get(FLAG_BETWEEN_PULSES, 0) / n
                claims.append(_claim(
                    "penrose_spread_between_pulses",
                    "energy-spread deadline reduction fires between the pulses",
                    frac, "==", 1.0, True))
                frac_zc = summary.flag_counts.get(FLAG_ZERO_CURRENT, 0) / n
                claims.append(_claim(
                    "penrose_spread_zero_current",
                    "energy-spread deadline reduction fires with no current flowing",
                    frac_zc, "==", 1.0, True))
            else:
                ratio = extras.get("collapse_current_ratio", 0.0)
                claims.append(_claim(
                    "penrose_spread_in_flow",
                    "energy-spread deadline lands inside the high-current interval",
                    ratio, ">=", 1e-6, True))
                flagged = sum(summary.flag_counts.values())
                claims.append(_claim(
                    "penrose_spread_unflagged",
                    "no anomaly flags on the single-pulse deadline reduction",
                    flagged, "==", 0, True))
        elif kind == CURRENT_JUMP:
            if two_pulse:
                frac = summary.flag_counts.get(FLAG_BETWEEN_PULSES, 0) / n
                claims.append(_claim(
                    "current_jump_between_pulses",
                    "current-driven reduction fires between the pulses",
                    frac, ">=", 0.001, False))
            if summary.ks_distance is not None:
                claims.append(_claim(
                    "current_jump_ks",
                    "jump collapse times follow the recorded capture curve",
                    summary.ks_distance, "<", 0.02, True))
            p = float(weights.p_capture[-1])
            sigma = np.sqrt(max(p * (1.0 - p), 1e-30) / n)
            claims.append(_claim(
                "current_jump_capture_fraction",
                "capture fraction matches the final capture weight (3 sigma)",
                abs(summary.capture_fraction - p), "<=", 3.0 * sigma, True))
    return claims


def _summary_dict(summary) -> dict:
    d = asdict(summary)
    d["collapse_time_histogram"] = [list(b) for b in summary.collapse_time_histogram]
    return d


def run_experiment(config: RunConfig, out_dir: str, threads: int = 1,
                   artifacts=ALL_ARTIFACTS) -> RunResult:
    """Execute the full pipeline for one configuration.

    Emits, per the requested artifact set: the weights time series, per-rule
    trial records, batch summaries, the claim report, optional density
    snapshots and SVG quick-look plots, and (always) the manifest.
    """
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    wall: dict[str, float] = {}

    def emit(name: str, text: str):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)

    def emit_json(name: str, payload: dict):
        emit(name, json.dumps(payload, indent=2) + "\n")

    try:
        spec = config.scenario
        calibration_dict = None
        t0 = time.perf_counter()
        if config.calibration.enabled:
            cal = calibrate_strength(spec, config.grid,
                                     target=config.calibration.target,
                                     tolerance=config.calibration.tolerance,
                                     max_iter=config.calibration.max_iter)
            spec = replace(spec, detector=replace(spec.detector,
                                                  strength=cal.strength))
            calibration_dict = asdict(cal)
            calibration_dict["bracket"] = list(cal.bracket)
        wall["calibrate"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        psi0 = build_initial_state(spec, config.grid)
        moments = energy_moments(psi0)
        result = run_scenario(spec, config.grid,
                              snapshot_stride=config.output.snapshot_stride)
        weights = result.weights
        wall["evolve"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        window = detect_zero_current_window(weights) \
            if spec.kind == TWO_PULSE else None

        batches: dict[str, tuple] = {}
        trials_csv: dict[str, str] = {}
        for rule in config.rules:
            records = _run_batch(weights, rule, config.trials.n_trials,
                                 config.trials.base_seed, moments, window,
                                 threads)
            summary = summarize_batch(records, weights, window)
            extras = {}
            if rule.kind == PENROSE_SPREAD:
                t_c = collapse_time_spread(weights, moments, rule)
                peak = float(weights.current.max())
                extras["collapse_time"] = t_c
                extras["collapse_current_ratio"] = (
                    weights.current_at(t_c) / peak
                    if t_c is not None and peak > 0 else 0.0)
            batches[rule.kind] = (summary, extras)
            trials_csv[rule.kind] = trials_to_csv(records)
        wall["reduce"] = time.perf_counter() - t0

        capture_target = config.calibration.target
        claims = _build_claims(config, weights, window, batches, capture_target)

        t0 = time.perf_counter()
        if "weights" in artifacts:
            emit("weights.csv", weights_to_csv(weights))
        if "trials" in artifacts:
            for kind, text in trials_csv.items():
                emit(f"trials_{kind}.csv", text)
        if "snapshots" in artifacts and result.snapshots:
            emit("snapshots.csv", snapshots_to_csv(result.snapshots, config.grid))
        if "summary" in artifacts:
            payload = {
                "format_version": 1,
                "label": config.label,
                "energy_moments": asdict(moments),
                "window": asdict(window) if window is not None else None,
                "batches": [dict(_summary_dict(s), **e)
                            for s, e in batches.values()],
            }
            emit_json("summary.json", payload)
        if "claims" in artifacts:
            emit_json("claims.json", {"format_version": 1,
                                      "label": config.label,
                                      "claims": claims})
        if "plots" in artifacts and config.output.plots:
            from .svgplot import histogram_svg, weights_svg
            emit("weights.svg", weights_svg(weights, window))
            for kind, (summary, _) in batches.items():
                emit(f"hist_{kind}.svg", histogram_svg(summary, weights))
        wall["emit"] = time.perf_counter() - t0

        manifest = {
            "format_version": 1,
            "code_version": __version__,
            "label": config.label,
            "base_seed": config.trials.base_seed,
            "config": serialize_config(config),
            "calibration": calibration_dict,
            "energy_moments": asdict(moments),
            "final_capture": float(weights.p_capture[-1]),
            "phase_wall_seconds": {k: round(v, 6) for k, v in wall.items()},
            "files": {os.path.basename(p): _sha256(p) for p in sorted(written)},
        }
        emit_json("manifest.json", manifest)
        return RunResult(out_dir=out_dir, manifest=manifest, claims=claims,
                         summaries=[_summary_dict(s) for s, _ in batches.values()],
                         window=window, weights=weights)
    except Exception:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise


def sweep_values(config: RunConfig, key: str, values: list[str]) -> list[RunConfig]:
    """Materialize one config per swept value of a dotted scenario key."""
    configs = []
    for raw in values:
        spec = config.scenario
        if key == "scenario.pulse_gap":
            spec = replace(spec, pulse_gap=float(raw))
        elif key == "scenario.t_final":
            spec = replace(spec, t_final=float(raw))
        elif key == "scenario.dt":
            spec = replace(spec, dt=float(raw))
        elif key == "detector.strength":
            spec = replace(spec, detector=replace(spec.detector, strength=float(raw)))
        elif key == "detector.half_width":
            spec = replace(spec, detector=replace(spec.detector, half_width=float(raw)))
        elif key == "packet.width":
            spec = replace(spec, packet=replace(spec.packet, width=float(raw)))
        elif key == "packet.momentum":
            spec = replace(spec, packet=replace(spec.packet, momentum=float(raw)))
        elif key == "trials.base_seed":
            configs.append(replace(config, trials=replace(config.trials,
                                                          base_seed=int(raw))))
            continue
        else:
            raise ValidationError(f"sweep key {key!r} is not sweepable")
        configs.append(replace(config, scenario=spec,
                               label=f"{config.label}_{key.split('.')[-1]}={raw}"))
    return configs
