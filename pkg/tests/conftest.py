"""Shared small-scale fixtures.

Unit tests run on deliberately small grids (512/1024 points) tuned so the
boundary wrap-around guard stays quiet; the full-size preset runs live in
test_acceptance.py.
"""

import numpy as np
import pytest

import wavecap as wc

TINY = dict(n=512, length=150.0, sigma=4.0, momentum=2.0, center=83.0,
            det_center=118.0, det_hw=6.0, strength=13.0, t_final=40.0,
            dt=0.005)

MINI = dict(n=1024, length=300.0, sigma=5.0, momentum=2.0, center=211.0,
            det_center=255.0, det_hw=8.0, strength=6.0, gap=60.0,
            t_final=80.0, dt=0.005)

# calibration probes include weak strengths that transmit most of the pulse,
# so the detector sits early in the box to leave downstream room
CAL = dict(n=512, length=150.0, sigma=4.0, momentum=2.0, center=37.0,
           det_center=66.0, det_hw=6.0, t_final=30.0, dt=0.005)

MINI_CFG_TEXT = """\
[run]
label = mini

[grid]
n_points = 1024
length = 300.0

[packet]
center = 211.0
width = 5.0
momentum = 2.0

[detector]
center = 255.0
half_width = 8.0
strength = 6.0

[scenario]
kind = two_pulse
pulse_gap = 60.0
t_final = 80.0
dt = 0.005
sample_every = 4

[rule.penrose_env]
tau_env = 1e-06

[rule.penrose_spread]

[rule.current_jump]

[trials]
n_trials = 400
base_seed = 7

[output]
snapshot_stride = 0
plots = false
"""

TINY_CFG_TEXT = """\
[run]
label = tiny

[grid]
n_points = 512
length = 150.0

[packet]
center = 83.0
width = 4.0
momentum = 2.0

[detector]
center = 118.0
half_width = 6.0
strength = 13.0

[scenario]
kind = single_pulse
t_final = 40.0
dt = 0.005
sample_every = 4

[rule.current_jump]

[trials]
n_trials = 300
base_seed = 11

[output]
plots = false
"""


@pytest.fixture(scope="session")
def tiny_grid():
    return wc.build_grid(TINY["n"], TINY["length"], 0.0)


@pytest.fixture(scope="session")
def tiny_packet():
    return wc.PacketSpec(center=TINY["center"], width=TINY["sigma"],
                         momentum=TINY["momentum"])


@pytest.fixture(scope="session")
def tiny_detector():
    return wc.DetectorSpec(center=TINY["det_center"], half_width=TINY["det_hw"],
                           strength=TINY["strength"])


@pytest.fixture(scope="session")
def tiny_spec(tiny_packet, tiny_detector):
    return wc.ScenarioSpec(kind=wc.SINGLE_PULSE, packet=tiny_packet,
                           detector=tiny_detector, t_final=TINY["t_final"],
                           dt=TINY["dt"], sample_every=2)


@pytest.fixture(scope="session")
def tiny_run(tiny_spec, tiny_grid):
    """Absorbing single-pulse run reused across tests."""
    return wc.run_scenario(tiny_spec, tiny_grid)


@pytest.fixture(scope="session")
def mini_spec():
    packet = wc.PacketSpec(center=MINI["center"], width=MINI["sigma"],
                           momentum=MINI["momentum"])
    det = wc.DetectorSpec(center=MINI["det_center"], half_width=MINI["det_hw"],
                          strength=MINI["strength"])
    return wc.ScenarioSpec(kind=wc.TWO_PULSE, packet=packet, detector=det,
                           t_final=MINI["t_final"], dt=MINI["dt"],
                           pulse_gap=MINI["gap"], sample_every=4)


@pytest.fixture(scope="session")
def mini_grid():
    return wc.build_grid(MINI["n"], MINI["length"], 0.0)


@pytest.fixture(scope="session")
def mini_run(mini_spec, mini_grid):
    return wc.run_scenario(mini_spec, mini_grid)


def synthetic_weights(t_final=100.0, n=2001, final_capture=0.8,
                      center=40.0, width=6.0):
    """Analytic capture record: a logistic capture curve and its exact rate.

    Serves as an exact CDF oracle for the sampling rules with no solver in
    the loop.
    """
    times = np.linspace(0.0, t_final, n)
    z = (times - center) / width
    p1 = final_capture / (1.0 + np.exp(-z))
    p1 -= p1[0]
    current = np.gradient(p1, times)
    current[current < 0] = 0.0
    return wc.ComponentWeights(times=times, p_no_capture=1.0 - p1,
                               p_capture=p1, current=current)
