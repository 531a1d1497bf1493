"""Parametric complex potentials, their lattice spectra and averaging.

Spectra use the same ``1/2pi`` convention as :mod:`kkwave.grid`:
``Vt(q) = (1/2pi) int V(x) exp(-iqx) dx``, so a Kramers-Kronig potential that
is analytic in the upper half plane has ``Vt(q) = 0`` for ``q < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import simpson

from .errors import InvalidSpecError
from .grid import SpatialGrid
from .io import read_columns


@dataclass(frozen=True)
class GaussianBarrier:
    V0: float
    alpha: float


@dataclass(frozen=True)
class SinglePoleKK:
    """``V(x) = V0 / (x + i alpha)``; purely dissipative for ``alpha > 0``."""

    V0: float
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidSpecError(f"SinglePoleKK needs alpha > 0, got {self.alpha}")


@dataclass(frozen=True)
class PoschlTeller:
    """``V(x) = -n(n+1) sech^2(x)``, reflectionless for integer n."""

    n: int = 1


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Samples ``(x, V)``; linearly resampled, zero outside the table."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise InvalidSpecError("tabulated potential needs matching 1D x and V arrays")
        if np.any(np.diff(x) <= 0):
            raise InvalidSpecError("tabulated x must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SuperGaussian:
    """Envelope ``exp[-(x/b)^order]``."""

    b: float = 60.0
    order: int = 4

    def __post_init__(self):
        if not self.b > 0 or self.order <= 0 or self.order % 2:
            raise InvalidSpecError(f"bad super-Gaussian envelope b={self.b}, order={self.order}")

    def __call__(self, x):
        return np.exp(-((x / self.b) ** self.order))

    def derivative(self, x):
        k = self.order
        return -k * x ** (k - 1) / self.b ** k * self(x)


Variant = Union[GaussianBarrier, SinglePoleKK, PoschlTeller, Tabulated]


@dataclass(frozen=True)
class PotentialSpec:
    variant: Variant
    envelope: Optional[SuperGaussian] = None

    @property
    def is_real(self) -> bool:
        v = self.variant
        if isinstance(v, (GaussianBarrier, PoschlTeller)):
            return True
        if isinstance(v, Tabulated):
            return bool(np.all(v.values.imag == 0))
        return False

    @property
    def is_zero(self) -> bool:
        v = self.variant
        return ((isinstance(v, (GaussianBarrier, SinglePoleKK)) and v.V0 == 0)
                or (isinstance(v, PoschlTeller) and v.n == 0)
                or (isinstance(v, Tabulated) and not np.any(v.values)))


def zero_potential() -> PotentialSpec:
    return PotentialSpec(GaussianBarrier(0.0, 1.0))


def load_tabulated(path, envelope: SuperGaussian | None = None) -> PotentialSpec:
    """Read ``x, reV[, imV]`` columns from a CSV file."""
    data = read_columns(path, 2, 3)
    values = data[:, 1] + (1j * data[:, 2] if data.shape[1] == 3 else 0)
    return PotentialSpec(Tabulated(data[:, 0], values), envelope)


def _bare(variant, x):
    x = np.asarray(x, dtype=float)
    if isinstance(variant, GaussianBarrier):
        return variant.V0 * np.exp(-(variant.alpha * x) ** 2) + 0j
    if isinstance(variant, SinglePoleKK):
        return variant.V0 / (x + 1j * variant.alpha)
    if isinstance(variant, PoschlTeller):
        n = variant.n
        return -n * (n + 1) / np.cosh(x) ** 2 + 0j
    if isinstance(variant, Tabulated):
        re = np.interp(x, variant.x, variant.values.real, left=0.0, right=0.0)
        im = np.interp(x, variant.x, variant.values.imag, left=0.0, right=0.0)
        return re + 1j * im
    raise InvalidSpecError(f"unknown potential variant {variant!r}")


def _bare_derivative(variant, x):
    x = np.asarray(x, dtype=float)
    if isinstance(variant, GaussianBarrier):
        a2 = variant.alpha ** 2
        return -2 * a2 * x * variant.V0 * np.exp(-a2 * x ** 2) + 0j
    if isinstance(variant, SinglePoleKK):
        return -variant.V0 / (x + 1j * variant.alpha) ** 2
    if isinstance(variant, PoschlTeller):
        n = variant.n
        return 2 * n * (n + 1) * np.tanh(x) / np.cosh(x) ** 2 + 0j
    if isinstance(variant, Tabulated):
        slope = np.gradient(variant.values, variant.x)
        re = np.interp(x, variant.x, slope.real, left=0.0, right=0.0)
        im = np.interp(x, variant.x, slope.imag, left=0.0, right=0.0)
        return re + 1j * im
    raise InvalidSpecError(f"unknown potential variant {variant!r}")


def evaluate(spec: PotentialSpec, x) -> np.ndarray:
    """Continuum values ``V(x)`` (envelope applied)."""
    v = _bare(spec.variant, x)
    if spec.envelope is not None:
        v = v * spec.envelope(np.asarray(x, dtype=float))
    return v


def derivative(spec: PotentialSpec, x) -> np.ndarray:
    """Analytic ``dV/dx`` (piecewise-linear slope for tabulated data)."""
    x = np.asarray(x, dtype=float)
    dv = _bare_derivative(spec.variant, x)
    if spec.envelope is not None:
        env = spec.envelope
        dv = dv * env(x) + _bare(spec.variant, x) * env.derivative(x)
    return dv


def _tail_radius(spec: PotentialSpec, rel: float) -> float:
    v, env = spec.variant, spec.envelope
    log_r = np.log(1.0 / rel)
    candidates = []
    if env is not None:
        candidates.append(env.b * (log_r + 20) ** (1.0 / env.order))
    if isinstance(v, GaussianBarrier):
        candidates.append(np.sqrt(log_r + 20) / abs(v.alpha))
    elif isinstance(v, PoschlTeller):
        candidates.append(0.5 * (log_r + 20))
    elif isinstance(v, Tabulated):
        candidates.append(max(abs(v.x[0]), abs(v.x[-1])))
    elif isinstance(v, SinglePoleKK):
        candidates.append(2.0 * v.alpha / rel)
    return float(min(candidates))


def truncation_length(spec: PotentialSpec, rel: float = 1e-10) -> float:
    """Smallest ``L`` with ``|V(x)| < rel * max|V|`` for every ``|x| >= L``.

    For the bare single pole (no envelope) the tail is ``V0/|x|`` and the
    returned length is correspondingly huge, flagging a long-range potential.
    """
    if spec.is_zero:
        return 0.0
    v = spec.variant
    if isinstance(v, SinglePoleKK) and spec.envelope is None:
        return float(np.sqrt(max((1.0 / rel) ** 2 - 1.0, 0.0)) * v.alpha)
    R = _tail_radius(spec, rel)
    r = np.linspace(0.0, R, 400_001)
    mag = np.maximum(np.abs(evaluate(spec, r)), np.abs(evaluate(spec, -r)))
    peak = mag.max()
    tail_max = np.maximum.accumulate(mag[::-1])[::-1]
    above = np.nonzero(tail_max >= rel * peak)[0]
    if above.size == 0:
        return 0.0
    i = above[-1]
    return float(r[min(i + 1, r.size - 1)])


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Lattice samples of a potential with its cached spectrum."""

    grid: SpatialGrid
    values: np.ndarray
    spec: Optional[PotentialSpec] = None
    label: str = field(default="")

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @cached_property
    def spectrum(self) -> np.ndarray:
        s = self.grid.fft(self.values)
        s.setflags(write=False)
        return s

    @cached_property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    @cached_property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    def at(self, x) -> np.ndarray:
        """Values off the lattice: analytic when the PotentialSpec is known, else cubic."""
        spec = self.spec
        if spec is not None and isinstance(spec.variant, SinglePoleKK) \
                and spec.envelope is None:
            lam = self.grid.length
            v = spec.variant
            z = np.asarray(x, dtype=float) + 1j * v.alpha
            return v.V0 * (np.pi / lam) / np.tan(np.pi * z / lam)
        if spec is not None:
            return evaluate(spec, x)
        from scipy.interpolate import CubicSpline
        xs = np.append(self.grid.x, self.grid.x_max)
        vs = np.append(self.values, self.values[0])
        cs = CubicSpline(xs, vs, bc_type="periodic")
        xx = self.grid.x_min + np.mod(np.asarray(x, dtype=float) - self.grid.x_min,
                                      self.grid.length)
        return cs(xx)


def pole_spectrum(grid: SpatialGrid, V0: float, alpha: float) -> np.ndarray:
    """Lattice spectrum of the periodized pole ``V0 / (x + i alpha)``.

    The periodic image sum ``V0 (pi/Lambda) cot(pi (x + i alpha) / Lambda)``
    has Fourier coefficients ``-i V0 exp(-alpha q)`` for ``q > 0``,
    ``-i V0 / 2`` at ``q = 0`` and zero for ``q < 0``.  Building the samples
    from these coefficients keeps the lattice spectrum exactly one-sided
    (sampling the cotangent directly would alias the ``q > 0`` tail).
    """
    p = grid.p
    c = np.where(p > 0, -1j * V0 * np.exp(-alpha * np.abs(p)), 0.0)
    c[p == 0] = -0.5j * V0
    return c


def sample(spec: PotentialSpec, grid: SpatialGrid) -> PotentialField:
    """Sample a potential on the lattice.

    Values are plain point samples, exact at every node. A sharp cut of the
    spectrum at ``p_max`` would instead ring at the band edge over the whole
    box and couple a packet far from the potential to ``q ~ p_max``.

    A single pole without an envelope is long-ranged; on the periodic lattice
    it is represented by its periodic image sum, synthesised from the
    one-sided spectrum of :func:`pole_spectrum`.
    """
    v = spec.variant
    if isinstance(v, SinglePoleKK) and spec.envelope is None:
        values = grid.ifft(pole_spectrum(grid, v.V0, v.alpha))
    else:
        values = evaluate(spec, grid.x)
    return PotentialField(grid, values, spec)


def field_from_values(grid: SpatialGrid, values, label: str = "") -> PotentialField:
    return PotentialField(grid, values, None, label)


def kk_one_sidedness(field: PotentialField) -> float:
    """Spectral weight on ``q < 0``: ``sum_{q<0} |Vt|^2 / sum |Vt|^2``.

    Zero for the zero potential.
    """
    s = np.abs(field.spectrum) ** 2
    total = s.sum()
    if total == 0:
        return 0.0
    return float(s[field.grid.p < 0].sum() / total)


def hilbert_transform(grid: SpatialGrid, f: np.ndarray) -> np.ndarray:
    """Periodic Hilbert transform, multiplier ``-i sgn(q)``; kills the q=0 mode."""
    return grid.ifft(-1j * np.sign(grid.p) * grid.fft(f))


def hilbert_pair_check(field: PotentialField) -> float:
    """Relative L2 mismatch between ``Im V`` and the Hilbert transform of ``Re V``.

    The uniform (q = 0) component cannot be produced by a Hilbert transform, so
    it is removed from ``V`` before comparing.
    """
    v = field.values - field.values.mean()
    denom = np.linalg.norm(v)
    if denom == 0:
        return 0.0
    h = hilbert_transform(field.grid, v.real).real
    return float(np.linalg.norm(v.imag - h) / denom)


def cycle_average(source, x0_trajectory: Callable[[np.ndarray], np.ndarray], tau: float,
                  grid: SpatialGrid | None = None, nodes: int = 128) -> PotentialField:
    """Average ``V(x + x0(t))`` over ``t`` in ``[0, tau]``.

    Each shift is applied in the spectrum (exact on the periodic lattice) and
    the time integral uses composite Simpson on ``nodes`` intervals.
    ``source`` is a PotentialSpec (sampled on ``grid``) or a PotentialField.
    """
    if not tau > 0:
        raise InvalidSpecError(f"averaging period must be positive, got {tau}")
    if nodes < 64 or nodes % 2:
        raise InvalidSpecError("cycle_average needs an even number (>= 64) of intervals")
    fld = sample(source, grid) if isinstance(source, PotentialSpec) else source
    g = fld.grid
    t = np.linspace(0.0, tau, nodes + 1)
    shifts = np.asarray(x0_trajectory(t), dtype=float) * np.ones_like(t)
    w = simpson(np.eye(nodes + 1), x=t, axis=1) / tau
    factor = np.zeros(g.n_points, dtype=complex)
    for wk, s in zip(w, shifts):
        factor += wk * np.exp(1j * g.p * s)
    values = g.ifft(fld.spectrum * factor)
    if fld.is_real:
        values = values.real
    return PotentialField(g, values, None, label="cycle-averaged")
