"""Competing state-reduction timing rules.

Three rules decide when (and to which component) the superposition
collapses, given a recorded weights history:

* ``penrose_env``  -- an externally supplied deadline ``tau_env`` measured
  from the start of the record: the environment-dominated reading, meant
  to be far shorter than any dynamical timescale ("immediate").
* ``penrose_spread`` -- deadline 1/dE after the capture branch first
  exceeds ``onset_epsilon``, with dE the Heisenberg energy spread of the
  free packet (hbar = 1).
* ``current_jump`` -- a stochastic jump whose hazard is the capture
  current; sampled by inverting the recorded p_capture curve, it
  reproduces Born-rule capture statistics by construction.

Both Penrose-style rules collapse exactly once at a deterministic time
and are stochastic only in which component they select (Born weights at
the collapse instant); the jump rule is stochastic in time.  Every trial
is a pure function of (weights record, rule, seed): trials use a
counter-based generator seeded with ``base_seed + trial_index``, so
batches are order-independent and reproducible bit for bit.

A trial that collapses after the record ends (or never) is reported with
``collapse_time`` None and the no-capture component.  Collapse happens at
most once per trial; nothing is re-evolved afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .propagate import ComponentWeights
from .state import EnergyMoments

PENROSE_ENV = "penrose_env"
PENROSE_SPREAD = "penrose_spread"
CURRENT_JUMP = "current_jump"
RULE_KINDS = (PENROSE_ENV, PENROSE_SPREAD, CURRENT_JUMP)

NO_CAPTURE = "no_capture"
CAPTURE = "capture"

FLAG_ZERO_WEIGHT = "zero_weight_collapse"
FLAG_ZERO_CURRENT = "zero_current_collapse"
FLAG_BETWEEN_PULSES = "between_pulses"

#: collapse current below this fraction of the peak current counts as
#: "no probability current flowing"
ZERO_CURRENT_RATIO = 1e-6


@dataclass(frozen=True)
class ReductionRule:
    """Tagged choice of timing rule plus its parameters.

    ``tau_env`` must be present exactly for ``penrose_env``.
    ``onset_epsilon`` is the p_capture threshold defining the first
    instant a nonzero capture branch exists (clock start for
    ``penrose_spread`` and the zero-weight flag threshold).
    """

    kind: str
    tau_env: Optional[float] = None
    onset_epsilon: float = 1e-9

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ValidationError(f"unknown reduction rule kind {self.kind!r}")
        if self.kind == PENROSE_ENV:
            if self.tau_env is None or not self.tau_env > 0.0:
                raise ValidationError("penrose_env requires tau_env > 0")
        elif self.tau_env is not None:
            raise ValidationError(f"tau_env only applies to penrose_env, not {self.kind}")
        if not self.onset_epsilon > 0.0:
            raise ValidationError("onset_epsilon must be > 0")


@dataclass(frozen=True)
class TrialRecord:
    """One reduction outcome."""

    rule: str
    seed: int
    collapse_time: Optional[float]
    chosen_component: str
    p_capture_at_collapse: Optional[float]
    current_at_collapse: Optional[float]
    flags: frozenset[str]


# window is a (start, end) pair or an analysis.WindowReport; kept duck-typed
# to avoid a circular import.
def _window_interval(window) -> Optional[tuple[float, float]]:
    if window is None:
        return None
    if hasattr(window, "exists"):
        if not window.exists:
            return None
        return (window.window_start, window.window_end)
    return (float(window[0]), float(window[1]))


def _compute_flags(t_collapse: float, p1: float, current: float,
                   rule: ReductionRule, peak_current: float,
                   window) -> frozenset[str]:
    flags = set()
    if min(p1, 1.0 - p1) < rule.onset_epsilon:
        flags.add(FLAG_ZERO_WEIGHT)
    if current < ZERO_CURRENT_RATIO * peak_current:
        flags.add(FLAG_ZERO_CURRENT)
    interval = _window_interval(window)
    if interval is not None and interval[0] <= t_collapse <= interval[1]:
        flags.add(FLAG_BETWEEN_PULSES)
    return frozenset(flags)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def _no_collapse(rule: ReductionRule, seed: int) -> TrialRecord:
    return TrialRecord(rule=rule.kind, seed=int(seed), collapse_time=None,
                       chosen_component=NO_CAPTURE, p_capture_at_collapse=None,
                       current_at_collapse=None, flags=frozenset())


def collapse_time_env(weights: ComponentWeights,
                      rule: ReductionRule) -> Optional[float]:
    """Deterministic collapse time for the environmental deadline.

    Returns t0 + tau_env, clamped to the first sample when tau_env is
    below the sample spacing; None when the deadline falls outside the
    record (the rule degenerates to no collapse).
    """
    if rule.kind != PENROSE_ENV:
        raise ValidationError(f"collapse_time_env needs a penrose_env rule, got {rule.kind}")
    t0 = float(weights.times[0])
    if rule.tau_env > weights.t_final - t0:
        return None
    if len(weights.times) > 1 and rule.tau_env < weights.times[1] - t0:
        return t0
    return t0 + rule.tau_env


def onset_time(weights: ComponentWeights, onset_epsilon: float) -> Optional[float]:
    """First sample time with p_capture above the onset threshold."""
    idx = np.flatnonzero(weights.p_capture > onset_epsilon)
    if len(idx) == 0:
        return None
    return float(weights.times[idx[0]])


def collapse_time_spread(weights: ComponentWeights, moments: EnergyMoments,
                         rule: ReductionRule) -> Optional[float]:
    """Deterministic collapse deadline t_onset + 1/dE (hbar = 1).

    ``moments`` must come from the detector-free packet.  Returns None when
    dE is zero (infinite deadline), when no onset occurs, or when the
    deadline falls past the end of the record.
    """
    if rule.kind != PENROSE_SPREAD:
        raise ValidationError(
            f"collapse_time_spread needs a penrose_spread rule, got {rule.kind}")
    if moments.energy_spread <= 0.0:
        return None
    t_onset = onset_time(weights, rule.onset_epsilon)
    if t_onset is None:
        return None
    t_collapse = t_onset + 1.0 / moments.energy_spread
    if t_collapse > weights.t_final:
        return None
    return t_collapse


def resolve_outcome(collapse_time: float, weights: ComponentWeights,
                    rule: ReductionRule, seed: int,
                    window=None) -> TrialRecord:
    """Select the surviving component at a given collapse time.

    The component is drawn with the Born weights (p_no_capture, p_capture)
    interpolated at the collapse instant; the losing component is driven
    to zero.  Used by the two deterministic-deadline rules.
    """
    p1 = weights.p_capture_at(collapse_time)
    cur = weights.current_at(collapse_time)
    chosen = CAPTURE if _rng(seed).random() < p1 else NO_CAPTURE
    flags = _compute_flags(collapse_time, p1, cur, rule,
                           float(weights.current.max()), window)
    return TrialRecord(rule=rule.kind, seed=int(seed),
                       collapse_time=float(collapse_time),
                       chosen_component=chosen, p_capture_at_collapse=p1,
                       current_at_collapse=cur, flags=flags)


def sample_jump_collapse(weights: ComponentWeights, seed: int,
                         rule: Optional[ReductionRule] = None,
                         window=None) -> TrialRecord:
    """One current-driven jump trial.

    Draws u uniform in (0, 1) and collapses to the capture component at
    the first time with p_capture(t) >= u (linear interpolation between
    samples); u beyond the final capture weight means the particle escapes
    and the trial ends as no-capture with no collapse time.  This inverse-
    CDF sampling is equivalent to a hazard process with rate J(t)/P0(t).
    """
    if rule is None:
        rule = ReductionRule(kind=CURRENT_JUMP)
    if rule.kind != CURRENT_JUMP:
        raise ValidationError(f"sample_jump_collapse needs a current_jump rule, got {rule.kind}")
    u = _rng(seed).random()
    p1 = weights.p_capture
    times = weights.times
    idx = int(np.searchsorted(p1, u, side="left"))
    if idx >= len(times):
        return _no_collapse(rule, seed)
    if idx == 0:
        t_collapse = float(times[0])
    else:
        dp = p1[idx] - p1[idx - 1]
        frac = (u - p1[idx - 1]) / dp if dp > 0.0 else 1.0
        t_collapse = float(times[idx - 1] + frac * (times[idx] - times[idx - 1]))
    cur = weights.current_at(t_collapse)
    flags = _compute_flags(t_collapse, float(u), cur, rule,
                           float(weights.current.max()), window)
    return TrialRecord(rule=rule.kind, seed=int(seed), collapse_time=t_collapse,
                       chosen_component=CAPTURE, p_capture_at_collapse=float(u),
                       current_at_collapse=cur, flags=flags)


def run_trials(weights: ComponentWeights, rule: ReductionRule, n_trials: int,
               base_seed: int, moments: Optional[EnergyMoments] = None,
               window=None) -> list[TrialRecord]:
    """Run a trial batch; trial i uses seed base_seed + i.

    ``moments`` is required for penrose_spread.  Trials are independent
    given their seeds, so results do not depend on execution order.
    """
    if n_trials < 1:
        raise ValidationError(f"n_trials must be >= 1, got {n_trials}")
    seeds = [base_seed + i for i in range(n_trials)]
    if rule.kind == CURRENT_JUMP:
        return [sample_jump_collapse(weights, s, rule, window) for s in seeds]
    if rule.kind == PENROSE_ENV:
        t_collapse = collapse_time_env(weights, rule)
    else:
        if moments is None:
            raise ValidationError("penrose_spread trials need the packet energy moments")
        t_collapse = collapse_time_spread(weights, moments, rule)
    if t_collapse is None:
        return [_no_collapse(rule, s) for s in seeds]
    return [resolve_outcome(t_collapse, weights, rule, s, window) for s in seeds]
