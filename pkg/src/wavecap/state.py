"""Spatial grid, wavefunction storage, Gaussian packets, and observables.

Natural units throughout: hbar = 1 and (by default) mass m = 1, so times,
lengths, momenta and energies are dimensionless simulation units.  The
domain is periodic; every other module builds on the types defined here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import ValidationError

HBAR = 1.0


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic 1D grid.

    ``n_points`` must be a power of two (spectral transform requirement);
    grid coordinates are ``origin + i * spacing`` for i in [0, n_points).
    """

    n_points: int
    length: float
    origin: float
    spacing: float

    def coordinates(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.n_points)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT layout."""
        return 2.0 * np.pi * sfft.fftfreq(self.n_points, d=self.spacing)

    @property
    def nyquist(self) -> float:
        """Largest resolvable wavenumber magnitude, pi / spacing."""
        return np.pi / self.spacing


def build_grid(n_points: int, length: float, origin: float = 0.0) -> Grid1D:
    """Construct a Grid1D, validating the spectral preconditions."""
    if not _is_power_of_two(int(n_points)):
        raise ValidationError(f"n_points must be a power of two, got {n_points}")
    if not length > 0:
        raise ValidationError(f"length must be positive, got {length}")
    n_points = int(n_points)
    return Grid1D(n_points=n_points, length=float(length), origin=float(origin),
                  spacing=float(length) / n_points)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex amplitudes on a grid at a fixed time.

    Amplitudes carry units of length^(-1/2): the squared norm is
    ``sum(|psi_i|^2) * spacing``.  Instances are treated as immutable
    values; operations return new objects.
    """

    grid: Grid1D
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n_points,):
            raise ValidationError(
                f"amplitudes length {amps.shape} does not match grid "
                f"n_points {self.grid.n_points}")
        object.__setattr__(self, "amplitudes", amps)

    def squared_norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.spacing)

    def density(self) -> np.ndarray:
        """Position-space probability density |psi|^2."""
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian packet parameters.

    ``width`` is the position-space standard deviation of |psi|^2;
    ``momentum`` the mean momentum (point it toward the detector);
    ``amplitude_weight`` the squared-norm share carried by this packet.
    """

    center: float
    width: float
    momentum: float
    amplitude_weight: float = 1.0


@dataclass(frozen=True)
class EnergyMoments:
    """Mean and spread of the kinetic energy of a free packet."""

    mean_energy: float
    energy_spread: float


def gaussian_packet(grid: Grid1D, spec: PacketSpec) -> WaveFunction:
    """Sample a Gaussian packet on the grid.

    The amplitudes are exp(-(x-c)^2 / (4 w^2)) * exp(i p x), rescaled so the
    discrete squared norm equals ``spec.amplitude_weight`` exactly.
    """
    if spec.width < 4.0 * grid.spacing:
        raise ValidationError(
            f"packet width {spec.width} unresolvable: needs >= 4 * grid "
            f"spacing ({4.0 * grid.spacing})")
    if abs(spec.momentum) >= grid.nyquist:
        raise ValidationError(
            f"packet momentum {spec.momentum} at or beyond the spectral "
            f"Nyquist limit {grid.nyquist}")
    if not 0.0 < spec.amplitude_weight <= 1.0:
        raise ValidationError(
            f"amplitude_weight must be in (0, 1], got {spec.amplitude_weight}")
    x = grid.coordinates()
    psi = np.exp(-((x - spec.center) ** 2) / (4.0 * spec.width ** 2)) \
        * np.exp(1j * spec.momentum * x)
    nrm2 = np.sum(np.abs(psi) ** 2) * grid.spacing
    psi *= np.sqrt(spec.amplitude_weight / nrm2)
    return WaveFunction(grid=grid, amplitudes=psi, time=0.0)


def superpose(a: WaveFunction, b: WaveFunction) -> WaveFunction:
    """Pointwise sum of two wavefunctions.  No renormalization: the caller
    controls weights."""
    if a.grid != b.grid:
        raise ValidationError("cannot superpose wavefunctions on different grids")
    if a.time != b.time:
        raise ValidationError(
            f"cannot superpose wavefunctions at different times "
            f"({a.time} vs {b.time})")
    return WaveFunction(grid=a.grid, amplitudes=a.amplitudes + b.amplitudes,
                        time=a.time)


def overlap(a: WaveFunction, b: WaveFunction) -> complex:
    """Discrete inner product <a|b> (conjugate-linear in ``a``)."""
    if a.grid != b.grid:
        raise ValidationError("overlap requires a common grid")
    return complex(np.sum(np.conj(a.amplitudes) * b.amplitudes) * a.grid.spacing)


def energy_moments(psi: WaveFunction, mass: float = 1.0) -> EnergyMoments:
    """Kinetic-energy mean and Heisenberg spread of a packet.

    Computed spectrally from the momentum-space density of a normalized
    copy (overall amplitude weights divide out), with the detector-free
    Hamiltonian H = p^2 / 2m.
    """
    dens = np.abs(sfft.fft(psi.amplitudes)) ** 2
    total = dens.sum()
    if total <= 0.0:
        raise ValidationError("energy_moments of a zero-norm wavefunction")
    dens /= total
    energy = psi.grid.wavenumbers() ** 2 / (2.0 * mass)
    m1 = float(np.sum(energy * dens))
    m2 = float(np.sum(energy ** 2 * dens))
    return EnergyMoments(mean_energy=m1,
                         energy_spread=float(np.sqrt(max(m2 - m1 * m1, 0.0))))


def position_moments(psi: WaveFunction) -> tuple[float, float]:
    """Mean and standard deviation of the position density.

    Densities are normalized internally, so the result is weight-independent.
    Meaningful only while the packet is far from the periodic seam.
    """
    x = psi.grid.coordinates()
    dens = psi.density()
    total = dens.sum()
    if total <= 0.0:
        raise ValidationError("position_moments of a zero-norm wavefunction")
    dens = dens / total
    mean = float(np.sum(x * dens))
    var = float(np.sum((x - mean) ** 2 * dens))
    return mean, float(np.sqrt(max(var, 0.0)))
