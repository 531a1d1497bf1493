"""Newtonian and Ehrenfest dynamics (m = 1/2, so dx/dt = 2p)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import io
from .errors import ConfigurationError, UnsupportedSpecError
from .forces import Force, ZeroForce
from .grid import SpatialGrid
from .potentials import PotentialSpec, Tabulated, derivative, evaluate, sample


@dataclass
class ClassicalState:
    x: float
    p: float
    t: float


@dataclass
class ClassicalTrajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray

    def __len__(self):
        return self.t.size

    def state(self, i: int) -> ClassicalState:
        return ClassicalState(float(self.x[i]), float(self.p[i]), float(self.t[i]))

    def to_csv(self, path) -> None:
        io.write_rows(path, ["t", "x", "p"], zip(self.t, self.x, self.p))


def _gradient(spec: PotentialSpec, grid: SpatialGrid | None) -> Callable:
    if not spec.is_real:
        raise UnsupportedSpecError("Newtonian dynamics needs a real potential")
    if not isinstance(spec.variant, Tabulated):
        return lambda x: derivative(spec, x).real
    if grid is None:
        raise ConfigurationError("a tabulated potential needs a grid for its gradient")
    fld = sample(spec, grid)
    g_lat = grid.ifft(1j * grid.p * fld.spectrum).real
    cs = CubicSpline(np.append(grid.x, grid.x_max), np.append(g_lat, g_lat[0]),
                     bc_type="periodic")
    return lambda x: cs(x)


def newton_evolve(potential_spec: PotentialSpec, force: Force | None, x_init: float,
                  p_init: float, dt: float, t_final: float,
                  grid: SpatialGrid | None = None) -> ClassicalTrajectory:
    """RK4 for ``dx/dt = 2p``, ``dp/dt = F(t) - V'(x)``.

    Analytic gradients are used for the parametric potentials; a tabulated
    potential is differentiated spectrally on ``grid`` and interpolated with
    a periodic cubic spline.
    """
    if not dt > 0 or not t_final > 0:
        raise ConfigurationError("dt and t_final must be positive")
    grad = _gradient(potential_spec, grid)
    force = force or ZeroForce()
    n = int(round(t_final / dt))
    t = dt * np.arange(n + 1)
    x = np.empty(n + 1)
    p = np.empty(n + 1)
    x[0], p[0] = x_init, p_init

    for k in range(n):
        tk, xk, pk = t[k], x[k], p[k]
        # the force is switched off at T: steps starting there see F = 0
        on = tk < force.T

        def acc(s, xs):
            return (float(force(s)) if on else 0.0) - float(grad(xs))

        k1x, k1p = 2 * pk, acc(tk, xk)
        k2x, k2p = 2 * (pk + 0.5 * dt * k1p), acc(tk + 0.5 * dt, xk + 0.5 * dt * k1x)
        k3x, k3p = 2 * (pk + 0.5 * dt * k2p), acc(tk + 0.5 * dt, xk + 0.5 * dt * k2x)
        k4x, k4p = 2 * (pk + dt * k3p), acc(tk + dt, xk + dt * k3x)
        x[k + 1] = xk + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p[k + 1] = pk + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
    return ClassicalTrajectory(t, x, p)


def classical_energy(traj: ClassicalTrajectory, potential_spec: PotentialSpec) -> np.ndarray:
    """``p^2 + V(x)`` along the trajectory (conserved when F = 0)."""
    return traj.p ** 2 + evaluate(potential_spec, traj.x).real


def force_only_trajectory(force: Force, d: float) -> Callable:
    """``X0(t) = -d + x0(t)``: the centre of a packet driven by the force alone."""
    fi = force.integrals()
    return lambda t: -d + fi.x0(t)


def ehrenfest_residual(trajectory) -> float:
    """``max |d<x>/dt - 2<p>|`` over the strobes of a Hermitian run.

    The time derivative uses second-order finite differences of the strobed
    ``<x>`` values, so the strobe spacing sets the resolution floor.
    """
    meta = trajectory.metadata
    if not meta.get("hermitian", False):
        raise UnsupportedSpecError("Ehrenfest residual needs a run with a real potential")
    rec = np.asarray(trajectory.records, dtype=float)
    if rec.shape[0] < 3:
        raise ConfigurationError("need at least three strobes")
    t, mx, mp = rec[:, 0], rec[:, 2], rec[:, 3]
    dxdt = np.gradient(mx, t, edge_order=2)
    return float(np.max(np.abs(dxdt - 2 * mp)))
