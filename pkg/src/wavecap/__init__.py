"""wavecap: 1D wave-packet capture with competing reduction timing rules.

A Gaussian packet (or two equal delayed pulses) propagates toward an
absorbing detector window; the lost norm is tracked as the capture-branch
weight and its flow rate as the capture current.  Reduction rules --
an environmental deadline, an energy-spread deadline, and a current-driven
stochastic jump -- then decide when each simulated trial collapses, so
their timing statistics can be compared against the Hamiltonian record.
"""

__version__ = "0.1.0"

from .analysis import (BatchSummary, WindowReport, detect_zero_current_window,
                       find_current_peaks, ks_distance, summarize_batch)
from .config import RunConfig, load_config, parse_config, serialize_config
from .errors import (CalibrationError, ConfigError, NumericsError,
                     ValidationError, WavecapError)
from .propagate import (ComponentWeights, DetectorSpec, EvolutionResult,
                        capture_current, detector_window, evolve_step,
                        kinetic_energy_max, run_evolution)
from .reduction import (CAPTURE, CURRENT_JUMP, NO_CAPTURE, PENROSE_ENV,
                        PENROSE_SPREAD, ReductionRule, TrialRecord,
                        collapse_time_env, collapse_time_spread, onset_time,
                        resolve_outcome, run_trials, sample_jump_collapse)
from .scenario import (SINGLE_PULSE, TWO_PULSE, CalibrationResult,
                       ScenarioSpec, build_initial_state, calibrate_strength,
                       run_scenario)
from .state import (EnergyMoments, Grid1D, PacketSpec, WaveFunction,
                    build_grid, energy_moments, gaussian_packet, overlap,
                    position_moments, superpose)

__all__ = [name for name in dir() if not name.startswith("_")]
