"""Uniform periodic grid, field containers and representation changes.

Units are dimensionless with hbar = 1 and m = 1/2, so the kinetic operator is
``p**2`` and a plane wave ``exp(i p x)`` travels at speed ``2 p``.

Transform convention
--------------------
The momentum amplitudes follow the continuum pair

    G(p) = (1 / 2 pi) * integral dx psi(x) exp(-i p x)
    psi(x) = integral dp G(p) exp(i p x)

discretised on the lattice as

    G(p_k) = dx / (2 pi) * sum_j psi(x_j) exp(-i p_k x_j)
    psi(x_j) = dp * sum_k G(p_k) exp(i p_k x_j)

which is an exact inverse pair because ``dx * dp * n = 2 pi``.  Parseval then
reads ``sum |psi|^2 dx = 2 pi * sum |G|^2 dp``.  Momentum arrays are stored in
FFT order (``numpy.fft.fftfreq``), so ``grid.p`` is not sorted.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, PreconditionError, UndefinedMeanError

TWO_PI = 2.0 * np.pi


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid ``x_j = x_min + j dx`` with ``j = 0..n-1``."""

    x_min: float
    x_max: float
    n_points: int

    @cached_property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def dp(self) -> float:
        return TWO_PI / self.length

    @cached_property
    def p_max(self) -> float:
        return np.pi / self.dx

    @cached_property
    def x(self) -> np.ndarray:
        return _readonly(self.x_min + self.dx * np.arange(self.n_points))

    @cached_property
    def p(self) -> np.ndarray:
        return _readonly(TWO_PI * sfft.fftfreq(self.n_points, self.dx))

    @cached_property
    def p_sorted(self) -> np.ndarray:
        return _readonly(sfft.fftshift(self.p))

    @cached_property
    def _origin_phase(self) -> np.ndarray:
        # exp(-i p x_min): moves the DFT origin from x_0 to x = 0
        return _readonly(np.exp(-1j * self.p * self.x_min))

    @cached_property
    def _ramp_split(self):
        n = self.n_points
        m1 = 1 << (n.bit_length() // 2)
        m2 = n // m1
        return m1, m2

    def phase_ramp(self, theta: float) -> np.ndarray:
        """Return ``exp(i theta x_j)`` using two short exponential tables.

        Exact to roundoff and roughly an order of magnitude cheaper than a
        full-length ``np.exp`` call; used once per time step by the engines.
        """
        m1, m2 = self._ramp_split
        coarse = np.exp(1j * theta * (self.x_min + self.dx * m2 * np.arange(m1)))
        fine = np.exp(1j * theta * self.dx * np.arange(m2))
        return (coarse[:, None] * fine[None, :]).ravel()

    def fft(self, psi: np.ndarray) -> np.ndarray:
        """Lattice version of ``G(p) = (1/2pi) int psi exp(-ipx) dx``."""
        return (self.dx / TWO_PI) * self._origin_phase * sfft.fft(psi)

    def ifft(self, c: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`fft`."""
        return (TWO_PI / self.dx) * sfft.ifft(c / self._origin_phase)

    def shift_spectrum(self, c: np.ndarray, s: float) -> np.ndarray:
        """Spectrum of ``f(x + s)`` given the spectrum ``c`` of ``f``."""
        return c * np.exp(1j * self.p * s)

    def check_compatible(self, other: "SpatialGrid") -> None:
        if other != self:
            raise ConfigurationError(f"grid mismatch: {self} vs {other}")


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def make_grid(x_min: float, x_max: float, n_points: int) -> SpatialGrid:
    """Build a :class:`SpatialGrid`, validating extent and size."""
    if not (np.isfinite(x_min) and np.isfinite(x_max)) or x_max <= x_min:
        raise ConfigurationError(f"degenerate grid extent [{x_min}, {x_max}]")
    if int(n_points) != n_points or not is_power_of_two(int(n_points)) or n_points < 16:
        raise ConfigurationError(
            f"n_points must be a power of two >= 16, got {n_points}")
    return SpatialGrid(float(x_min), float(x_max), int(n_points))


@dataclass
class WaveFunction:
    """Complex field in position representation at a given time."""

    grid: SpatialGrid
    psi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"field length {self.psi.shape} does not match grid ({self.grid.n_points})")

    def copy(self) -> "WaveFunction":
        return replace(self, psi=self.psi.copy())

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2


@dataclass
class MomentumSpectrum:
    """Momentum amplitudes ``G(p_k)`` or ``c(p_k, t)`` in FFT order."""

    grid: SpatialGrid
    c: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=complex)
        if self.c.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"spectrum length {self.c.shape} does not match grid ({self.grid.n_points})")

    def copy(self) -> "MomentumSpectrum":
        return replace(self, c=self.c.copy())


def to_momentum(wf: WaveFunction) -> MomentumSpectrum:
    return MomentumSpectrum(wf.grid, wf.grid.fft(wf.psi), wf.time)


def from_momentum(spec: MomentumSpectrum) -> WaveFunction:
    return WaveFunction(spec.grid, spec.grid.ifft(spec.c), spec.time)


def gaussian_packet(grid: SpatialGrid, d: float, w: float, p0: float,
                    boundary_tol: float = 1e-12) -> WaveFunction:
    """Unit-norm packet ``N exp[-(x + d)^2 / w^2 + i p0 x]`` centred at ``-d``.

    Raises
    ------
    PreconditionError
        If ``w <= 0`` or the packet is not negligible (``boundary_tol`` of the
        peak) at both grid edges.
    """
    if w <= 0:
        raise PreconditionError(f"packet width must be positive, got {w}")
    x = grid.x
    env = np.exp(-((x + d) ** 2) / w ** 2)
    edge = max(np.exp(-((grid.x_min + d) ** 2) / w ** 2),
               np.exp(-((grid.x_max + d) ** 2) / w ** 2))
    if edge >= boundary_tol * env.max() or not (grid.x_min < -d < grid.x_max):
        raise PreconditionError(
            f"packet (d={d}, w={w}) is clipped by the grid boundary")
    psi = env * np.exp(1j * p0 * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return WaveFunction(grid, psi, 0.0)


def norm(wf: WaveFunction) -> float:
    """L2 norm ``sqrt(sum |psi|^2 dx)``."""
    return float(np.sqrt(np.sum(np.abs(wf.psi) ** 2) * wf.grid.dx))


def _weights(values):
    w = np.abs(values) ** 2
    total = w.sum()
    if not total > 0:
        raise UndefinedMeanError("field has zero norm")
    return w / total


def mean_x(wf: WaveFunction) -> float:
    return float(np.sum(_weights(wf.psi) * wf.grid.x))


def mean_p(wf: WaveFunction) -> float:
    """Mean momentum, evaluated in the momentum representation."""
    c = wf.grid.fft(wf.psi)
    return float(np.sum(_weights(c) * wf.grid.p))


def split_right_left(spec: MomentumSpectrum):
    """Project onto ``p > 0`` (right) and ``p <= 0`` (left) components.

    The single ``p = 0`` lattice point goes to the left part.
    """
    pos = spec.grid.p > 0
    right = MomentumSpectrum(spec.grid, np.where(pos, spec.c, 0), spec.time)
    left = MomentumSpectrum(spec.grid, np.where(pos, 0, spec.c), spec.time)
    return right, left


def negative_momentum_fraction(field) -> float:
    """``sum_{p<=0} |c|^2 / sum |c|^2`` for a WaveFunction or MomentumSpectrum."""
    if isinstance(field, WaveFunction):
        c = field.grid.fft(field.psi)
    else:
        c = field.c
    w = np.abs(c) ** 2
    total = w.sum()
    if not total > 0:
        raise UndefinedMeanError("field has zero norm")
    return float(w[field.grid.p <= 0].sum() / total)


def l2_distance(a, b, dx: float | None = None, relative: bool = True) -> float:
    """L2 distance between two fields (arrays or WaveFunctions)."""
    if isinstance(a, WaveFunction):
        dx = a.grid.dx if dx is None else dx
        a = a.psi
    if isinstance(b, WaveFunction):
        b = b.psi
    dx = 1.0 if dx is None else dx
    diff = float(np.sqrt(np.sum(np.abs(a - b) ** 2) * dx))
    if relative:
        ref = float(np.sqrt(np.sum(np.abs(b) ** 2) * dx))
        return diff / ref if ref > 0 else diff
    return diff
