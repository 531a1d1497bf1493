"""Uniform time-dependent forces and the integrals derived from them.

For a force ``F(t)`` switched off at ``t = T`` we track

* ``impulse(t)  = int_0^t F``                      (momentum shift of every mode)
* ``x0(t)       = 2 int_0^t impulse``              (force-only trajectory, m = 1/2)
* ``phase(t)    = int_0^t impulse^2``              (Volkov phase common to all modes)

and the scalars ``delta_p = impulse(T)``, ``phi1 = x0(T)``, ``phi0 = phase(T)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline, PPoly

from .errors import InvalidSpecError, UnsupportedSpecError
from .io import read_columns


@dataclass(frozen=True)
class ForceIntegrals:
    delta_p: float
    phi1: float
    phi0: float
    impulse: Callable
    x0: Callable
    phase: Callable
    T: float

    def displacement(self, t):
        """Alias of ``x0``: position shift produced by the force alone."""
        return self.x0(t)


class Force:
    """Base class; subclasses define ``__call__`` and ``T``."""

    T: float = 0.0

    def __call__(self, t):
        raise NotImplementedError

    def integrals(self) -> ForceIntegrals:
        return self._integrals

    @cached_property
    def _integrals(self) -> ForceIntegrals:
        raise NotImplementedError

    def max_abs(self) -> float:
        if self.T <= 0:
            return 0.0
        t = np.linspace(0.0, self.T, 20001)
        return float(np.max(np.abs(self(t))))


class ZeroForce(Force):
    T = 0.0

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    @cached_property
    def _integrals(self):
        z = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
        return ForceIntegrals(0.0, 0.0, 0.0, z, z, z, 0.0)

    def __repr__(self):
        return "ZeroForce()"


class CosinePulse(Force):
    """``F0 cos(2 pi t / period)`` on ``[0, T]``, zero afterwards.

    ``period`` defaults to ``T`` (a single cycle).  With an integer number of
    cycles both the impulse and the displacement conditions hold.
    """

    def __init__(self, F0: float, T: float, period: float | None = None):
        if not T > 0:
            raise InvalidSpecError(f"CosinePulse needs T > 0, got {T}")
        self.F0 = float(F0)
        self.T = float(T)
        self.period = float(T if period is None else period)
        if not self.period > 0:
            raise InvalidSpecError("CosinePulse period must be positive")

    def __repr__(self):
        return f"CosinePulse(F0={self.F0}, T={self.T}, period={self.period})"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        on = (t >= 0) & (t <= self.T)
        return np.where(on, self.F0 * np.cos(2 * np.pi * t / self.period), 0.0)

    def max_abs(self):
        return abs(self.F0)

    @cached_property
    def _integrals(self):
        F0, T, P = self.F0, self.T, self.period
        w = 2 * np.pi / P
        a = F0 / w

        def clip(t):
            return np.clip(np.asarray(t, dtype=float), 0.0, T)

        def A_on(s):
            return a * np.sin(w * s)

        def S_on(s):
            return a / w * (1 - np.cos(w * s))

        def Q_on(s):
            return a * a * (s / 2 - np.sin(2 * w * s) / (4 * w))

        A_T, S_T, Q_T = float(A_on(T)), float(S_on(T)), float(Q_on(T))

        def impulse(t):
            return A_on(clip(t))

        def x0(t):
            t = np.asarray(t, dtype=float)
            return 2 * (S_on(clip(t)) + A_T * np.clip(t - T, 0, None))

        def phase(t):
            t = np.asarray(t, dtype=float)
            return Q_on(clip(t)) + A_T ** 2 * np.clip(t - T, 0, None)

        return ForceIntegrals(A_T, 2 * S_T, Q_T, impulse, x0, phase, T)


def _square_ppoly(pp: PPoly) -> PPoly:
    c = pp.c
    k = c.shape[0]
    out = np.zeros((2 * k - 1, c.shape[1]))
    for i in range(k):
        for j in range(k):
            out[i + j] += c[i] * c[j]
    return PPoly(out, pp.x)


class SplineForce(Force):
    """Force given by a cubic spline on ``[0, T]``; integrals are exact for it."""

    def __init__(self, t_nodes, values):
        t_nodes = np.asarray(t_nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if t_nodes.ndim != 1 or t_nodes.shape != values.shape or t_nodes.size < 4:
            raise InvalidSpecError("force table needs >= 4 matching (t, F) samples")
        if t_nodes[0] != 0.0 or np.any(np.diff(t_nodes) <= 0):
            raise InvalidSpecError("force table times must start at 0 and increase")
        self.t_nodes = t_nodes
        self.values = values
        self.T = float(t_nodes[-1])
        self._spline = CubicSpline(t_nodes, values)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        on = (t >= 0) & (t <= self.T)
        return np.where(on, self._spline(np.clip(t, 0, self.T)), 0.0)

    def max_abs(self):
        t = np.linspace(0.0, self.T, 8 * self.t_nodes.size)
        return float(max(np.abs(self._spline(t)).max(), np.abs(self.values).max()))

    @cached_property
    def _integrals(self):
        T = self.T
        A = self._spline.antiderivative(1)
        S = self._spline.antiderivative(2)
        Q = _square_ppoly(A).antiderivative(1)
        A_T, S_T, Q_T = float(A(T)), float(S(T)), float(Q(T))

        def clip(t):
            return np.clip(np.asarray(t, dtype=float), 0.0, T)

        def impulse(t):
            return A(clip(t))

        def x0(t):
            t = np.asarray(t, dtype=float)
            return 2 * (S(clip(t)) + A_T * np.clip(t - T, 0, None))

        def phase(t):
            t = np.asarray(t, dtype=float)
            return Q(clip(t)) + A_T ** 2 * np.clip(t - T, 0, None)

        return ForceIntegrals(A_T, 2 * S_T, Q_T, impulse, x0, phase, T)


class TabulatedForce(SplineForce):
    def __repr__(self):
        return f"TabulatedForce(n={self.t_nodes.size}, T={self.T})"


class TailoredForce(SplineForce):
    """``F(t) = V'(x_init + 2 p_init t)``: cancels the potential force on the
    unperturbed ballistic path.  Generally violates the impulse conditions."""

    def __init__(self, t_nodes, values, potential_spec, x_init, p_init):
        super().__init__(t_nodes, values)
        self.potential_spec = potential_spec
        self.x_init = float(x_init)
        self.p_init = float(p_init)

    def __repr__(self):
        return (f"TailoredForce(x_init={self.x_init}, p_init={self.p_init}, "
                f"T={self.T})")


def load_tabulated_force(path) -> TabulatedForce:
    data = read_columns(path, 2, 2)
    return TabulatedForce(data[:, 0], data[:, 1])


def integrals(force: Force) -> ForceIntegrals:
    return force.integrals()


class ConditionCheck(NamedTuple):
    zero_impulse: bool
    zero_displacement: bool

    @property
    def both(self) -> bool:
        return self.zero_impulse and self.zero_displacement


def check_conditions(force: Force, tol: float = 1e-10) -> ConditionCheck:
    """Zero net impulse (``|delta_p| < tol``) and zero net displacement
    (``|phi1| < tol``)."""
    fi = force.integrals()
    return ConditionCheck(bool(abs(fi.delta_p) < tol), bool(abs(fi.phi1) < tol))


def tailored_force(potential_spec, x_init: float, p_init: float, t_final: float,
                   dt_table: float = 0.0025 / 4, grid=None) -> TailoredForce:
    """Tabulate ``F(t) = dV/dx (x_init + 2 p_init t)`` on ``[0, t_final]``.

    With ``grid`` the gradient is taken spectrally on the lattice and
    interpolated with a cubic spline in ``x``; otherwise the analytic
    derivative is used.  The table (step ``dt_table``) is splined in ``t``.
    """
    from . import potentials as pot

    if not potential_spec.is_real:
        raise UnsupportedSpecError("tailored force requires a real potential")
    n = int(np.ceil(t_final / dt_table))
    t = np.linspace(0.0, t_final, n + 1)
    path = x_init + 2.0 * p_init * t
    if grid is None:
        grad = pot.derivative(potential_spec, path).real
    else:
        fld = pot.sample(potential_spec, grid)
        g_lat = grid.ifft(1j * grid.p * fld.spectrum).real
        xs = np.append(grid.x, grid.x_max)
        cs = CubicSpline(xs, np.append(g_lat, g_lat[0]), bc_type="periodic")
        inside = (path >= grid.x_min) & (path <= grid.x_max)
        grad = np.where(inside, cs(np.clip(path, grid.x_min, grid.x_max)), 0.0)
    return TailoredForce(t, grad, potential_spec, x_init, p_init)
