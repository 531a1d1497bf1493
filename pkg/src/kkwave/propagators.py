"""Time-evolution engines for ``i psi_t = -psi_xx + V psi - F(t) x psi``.

Four independent discretisations are provided so they can be checked
against one another:

* :func:`split_step_evolve` -- Strang split-step Fourier in the lab frame;
* :func:`gordon_volkov_evolve` -- exact Volkov solution for ``V = 0``;
* :func:`momentum_space_evolve` -- RK4 on the interaction-picture momentum
  amplitudes ``c(p, t)``;
* :func:`kh_frame_evolve` -- split-step in the accelerated frame, where the
  force is replaced by the rigidly translated potential ``V(x + x0(t))``.

:func:`dilation_evolve` integrates the dilation Hamiltonian
``p^2 + alpha(t) (x p + p x) / 2 + V(x)`` in rescaled momentum variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft
from scipy.integrate import solve_ivp

from . import io
from .errors import (ConfigurationError, ConvergenceError, DomainGuardError,
                     PreconditionError, ResolutionError, StepSizeError)
from .forces import Force, ZeroForce
from .grid import (TWO_PI, MomentumSpectrum, SpatialGrid, WaveFunction, mean_p,
                   mean_x, negative_momentum_fraction, norm)
from .potentials import (PotentialField, PotentialSpec, SinglePoleKK, evaluate,
                         pole_spectrum, sample)

GUARD_BAND = 0.9
GUARD_LEVEL = 1e-8
GUARD_EVERY = 100
EDGE_LEVEL = 1e-10


def _threads() -> int:
    return 1


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Strobed output of a position-space engine.

    ``records`` holds one row per strobe: time, norm, <x>, <p> and the
    negative-momentum fraction of the interaction-frame spectrum (the lab
    spectrum with the force-induced shift ``impulse(t)`` removed).
    """

    grid: SpatialGrid
    snapshots: list = field(default_factory=list)
    records: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([r[0] for r in self.records])

    @property
    def final(self) -> WaveFunction:
        return self.snapshots[-1]

    def at(self, t: float, tol: float = 1e-9) -> WaveFunction:
        for wf in self.snapshots:
            if abs(wf.time - t) <= tol * max(1.0, abs(t)):
                return wf
        raise KeyError(f"no snapshot at t={t}")

    def append(self, wf: WaveFunction, negative_fraction: float, keep: bool = True):
        if self.records and wf.time <= self.records[-1][0]:
            raise ConfigurationError("snapshot times must increase")
        if wf.grid != self.grid:
            raise ConfigurationError("snapshot grid mismatch")
        if keep:
            self.snapshots.append(wf)
        self.records.append((wf.time, norm(wf), mean_x(wf), mean_p(wf), negative_fraction))

    def export(self, directory) -> Path:
        """Write ``snap_XXXXX.kkw`` files and ``index.csv``; returns the index path."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for i, wf in enumerate(self.snapshots):
            io.write_snapshot(d / f"snap_{i:05d}.kkw", wf)
        idx = d / "index.csv"
        io.write_rows(idx, ["t", "norm", "mean_x", "mean_p", "negative_fraction"],
                      self.records)
        return idx


@dataclass
class SpectrumTrajectory:
    """Strobed interaction-picture amplitudes from a momentum-space engine.

    ``amplitudes[i]`` are the engine's internal variables at ``times[i]``;
    ``field(i)`` maps them to the lab-frame wave function.
    """

    grid: SpatialGrid
    times: list
    amplitudes: list
    to_field: Callable
    metadata: dict = field(default_factory=dict)
    max_negative_fraction: float = 0.0

    def field(self, i: int = -1) -> WaveFunction:
        return self.to_field(self.times[i], self.amplitudes[i])

    @property
    def final(self) -> MomentumSpectrum:
        return MomentumSpectrum(self.grid, self.amplitudes[-1], self.times[-1])


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def _strobe_steps(strobe, dt: float, n_steps: int) -> list:
    """Step indices (1-based, inclusive of the last step) at which to record."""
    if strobe is None:
        return [n_steps]
    if np.isscalar(strobe):
        k = strobe / dt
        m = int(round(k))
        if m <= 0 or abs(k - m) > 1e-9 * max(1.0, k):
            raise ConfigurationError(f"strobe interval {strobe} is not a multiple of dt={dt}")
        steps = list(range(m, n_steps + 1, m))
    else:
        steps = []
        for t in strobe:
            k = t / dt
            m = int(round(k))
            if abs(k - m) > 1e-9 * max(1.0, k) or not 0 <= m <= n_steps:
                raise ConfigurationError(f"strobe time {t} is not on the step lattice")
            steps.append(m)
    if not steps or steps[-1] != n_steps:
        steps.append(n_steps)
    return sorted(set(steps))


def _n_steps(dt: float, t_final: float) -> int:
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if not t_final > 0:
        raise ConfigurationError(f"t_final must be positive, got {t_final}")
    k = t_final / dt
    n = int(round(k))
    if abs(k - n) > 1e-9 * k:
        raise ConfigurationError(f"t_final={t_final} is not a multiple of dt={dt}")
    return n


def _check_phase_step(values: np.ndarray, grid: SpatialGrid, fmax: float, dt: float):
    bound = float(np.max(np.abs(values)) + fmax * np.max(np.abs(grid.x)))
    if bound * dt > np.pi:
        raise StepSizeError(
            f"max|V - F x| dt = {bound * dt:.3g} > pi; reduce dt below {np.pi / bound:.3g}")


def _band_mask(grid: SpatialGrid) -> np.ndarray:
    centre = 0.5 * (grid.x_min + grid.x_max)
    return np.abs(grid.x - centre) > 0.5 * GUARD_BAND * grid.length


def _guard(psi: np.ndarray, band: np.ndarray, t: float):
    a = np.abs(psi)
    peak = a.max()
    edge = a[band].max()
    if peak > 0 and edge >= GUARD_LEVEL * peak:
        raise DomainGuardError(
            f"field reached the boundary band at t={t:.6g} "
            f"(|psi| = {edge / peak:.2e} of peak); enlarge the domain")


def _as_field(potential, grid: SpatialGrid) -> PotentialField:
    if potential is None:
        return PotentialField(grid, np.zeros(grid.n_points))
    if isinstance(potential, PotentialSpec):
        return sample(potential, grid)
    grid.check_compatible(potential.grid)
    return potential


# --------------------------------------------------------------------------
# split-step
# --------------------------------------------------------------------------

def split_step_evolve(wf0: WaveFunction, potential_field, force: Force | None,
                      dt: float, t_final: float, strobe=None, keep_fields: bool = True,
                      monitor_every: int = 0, guard: bool = True) -> Trajectory:
    """Strang split-step Fourier propagation in the lab frame.

    Each step applies ``exp[-i (V - F x) dt/2]``, the kinetic factor
    ``exp(-i p^2 dt)`` and the position factor again, with ``F`` sampled at
    the step midpoint.  A scalar phase ``exp(-i F^2 dt^3 / 12)`` removes the
    only splitting error that survives for a uniform force (the position and
    kinetic generators close under commutation), so the scheme is exact for
    ``V = 0`` and constant ``F``.  Adjacent position half-steps are fused
    between strobes.

    Parameters
    ----------
    strobe : float or sequence of float, optional
        Recording interval or explicit recording times (multiples of ``dt``).
        The final time is always recorded.
    keep_fields : bool
        Keep the strobed fields (otherwise only ``records`` are filled).
    monitor_every : int
        If positive, also track the maximum interaction-frame
        negative-momentum fraction every this many steps; stored in
        ``metadata["max_negative_fraction"]``.

    Raises
    ------
    StepSizeError
        If ``max|V - F x| dt > pi``.
    DomainGuardError
        If ``|psi|`` in the outer 10 % band exceeds ``1e-8`` of its peak.
    """
    grid = wf0.grid
    vf = _as_field(potential_field, grid)
    force = force or ZeroForce()
    n = _n_steps(dt, t_final)
    steps = set(_strobe_steps(strobe, dt, n))
    _check_phase_step(vf.values, grid, force.max_abs(), dt)
    fi = force.integrals()

    t0 = wf0.time
    x = grid.x
    kin = np.exp(-1j * grid.p ** 2 * dt)
    v_half = np.exp(-0.5j * vf.values * dt)
    v_full = v_half * v_half
    band = _band_mask(grid)

    def fmid(k):  # force at the midpoint of step k (0-based)
        return float(force(t0 + (k + 0.5) * dt))

    def ramp(theta):
        return grid.phase_ramp(theta) if theta != 0.0 else None

    traj = Trajectory(grid, metadata=dict(
        solver="split-step", dt=dt, t_final=t_final, grid=grid,
        potential=repr(vf.spec) if vf.spec is not None else vf.label,
        force=repr(force), threads=_threads(), hermitian=bool(vf.is_real)))
    max_neg = 0.0

    def interaction_negative(psi, t):
        a = float(fi.impulse(t) - fi.impulse(t0))
        c = sfft.fft(psi * grid.phase_ramp(-a)) if a != 0.0 else sfft.fft(psi)
        w = np.abs(c) ** 2
        return float(w[grid.p <= 0].sum() / w.sum())

    psi = np.array(wf0.psi, dtype=complex)
    f = fmid(0)
    r = ramp(0.5 * f * dt)
    psi *= v_half if r is None else v_half * r
    for k in range(n):
        psi = sfft.ifft(kin * sfft.fft(psi, workers=_threads()), workers=_threads())
        if f != 0.0:
            psi *= np.exp(-1j * f * f * dt ** 3 / 12)
        last = (k + 1) in steps
        if last:
            r = ramp(0.5 * f * dt)
            psi *= v_half if r is None else v_half * r
            t = t0 + (k + 1) * dt
            if guard:
                _guard(psi, band, t)
            negf = interaction_negative(psi, t)
            max_neg = max(max_neg, negf)
            traj.append(WaveFunction(grid, psi.copy(), t), negf, keep_fields)
            if k + 1 < n:
                f = fmid(k + 1)
                r = ramp(0.5 * f * dt)
                psi *= v_half if r is None else v_half * r
        else:
            f_next = fmid(k + 1)
            r = ramp(0.5 * (f + f_next) * dt)
            psi *= v_full if r is None else v_full * r
            f = f_next
            if monitor_every and (k + 1) % monitor_every == 0:
                # bring the field to the full step before measuring
                rr = grid.phase_ramp(-0.5 * f * dt) * np.exp(0.5j * vf.values * dt)
                max_neg = max(max_neg, interaction_negative(psi * rr, t0 + (k + 1) * dt))
            if guard and (k + 1) % GUARD_EVERY == 0:
                _guard(psi, band, t0 + (k + 1) * dt)
    traj.metadata["max_negative_fraction"] = max_neg
    traj.metadata["n_steps"] = n
    return traj


# --------------------------------------------------------------------------
# Gordon-Volkov
# --------------------------------------------------------------------------

def volkov_phases(force: Force, t0: float, t: float):
    """Return ``(a, s, q)`` for evolution from ``t0`` to ``t`` such that a
    lab-frame mode ``p`` at ``t0`` becomes
    ``exp[i (p + a) x - i (p^2 (t - t0) + 2 p s + q)]`` at ``t``."""
    fi = force.integrals()
    A0 = float(fi.impulse(t0))
    a = float(fi.impulse(t)) - A0
    dS = 0.5 * float(fi.x0(t) - fi.x0(t0))
    dQ = float(fi.phase(t) - fi.phase(t0))
    tau = t - t0
    s = dS - A0 * tau
    q = dQ - 2 * A0 * dS + A0 * A0 * tau
    return a, s, q


def gordon_volkov_evolve(G: MomentumSpectrum, force: Force | None, t: float) -> WaveFunction:
    """Exact evolution of the spectrum ``G`` (taken at ``G.time``) to time ``t``
    for ``V = 0``.

    The momentum shift ``impulse(t)`` is applied as the phase ramp
    ``exp(i a x)`` in position space, so it need not be a multiple of ``dp``.
    """
    force = force or ZeroForce()
    grid = G.grid
    a, s, q = volkov_phases(force, G.time, t)
    p = grid.p
    c = G.c * np.exp(-1j * (p * p * (t - G.time) + 2 * p * s + q))
    psi = grid.ifft(c)
    if a != 0.0:
        psi = psi * grid.phase_ramp(a)
    return WaveFunction(grid, psi, t)


# --------------------------------------------------------------------------
# momentum-space engine
# --------------------------------------------------------------------------

class _LinearConvolver:
    """``w(p) = sum_q K(p - q) u(q) dp`` on the momentum lattice without
    wraparound: both operands are zero-padded to ``2N`` modes, so momenta
    leaving ``[-p_max, p_max)`` are dropped rather than folded back."""

    def __init__(self, grid: SpatialGrid):
        n = grid.n_points
        m = np.round(grid.p / grid.dp).astype(int)
        self.idx = np.where(m >= 0, m, m + 2 * n)
        self.n2 = 2 * n
        self.dp = grid.dp
        self.kernel_x = None

    def _pad(self, c):
        out = np.zeros(self.n2, dtype=complex)
        out[self.idx] = c
        return out

    def set_kernel(self, k_spectrum: np.ndarray):
        self.kernel_x = self.n2 * self.dp * sfft.ifft(self._pad(k_spectrum))

    def __call__(self, u: np.ndarray) -> np.ndarray:
        w = sfft.fft(self.kernel_x * sfft.ifft(self._pad(u)))
        return w[self.idx]


def _check_edge(c: np.ndarray, grid: SpatialGrid):
    a = np.abs(c)
    edge = a[np.abs(grid.p) > 0.95 * grid.p_max]
    if a.max() > 0 and edge.size and edge.max() >= EDGE_LEVEL * a.max():
        raise PreconditionError(
            "initial spectrum is not negligible at the lattice edge; refine dx")


def _rk4(rhs, y, t, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _negative_fraction(c, mask):
    w = np.abs(c) ** 2
    total = w.sum()
    return float(w[mask].sum() / total) if total > 0 else 0.0


def _interaction_run(c0, rhs, dt, n, steps, t0, mask):
    c = np.array(c0, dtype=complex)
    times, amps = [], []
    max_neg = _negative_fraction(c, mask)
    for k in range(n):
        c = _rk4(rhs, c, t0 + k * dt, dt)
        max_neg = max(max_neg, _negative_fraction(c, mask))
        if (k + 1) in steps:
            times.append(t0 + (k + 1) * dt)
            amps.append(c.copy())
    return times, amps, max_neg


def momentum_space_evolve(c0: MomentumSpectrum, potential_field, force: Force | None,
                          dt: float, t_final: float, strobe=None,
                          tol: float | None = None) -> SpectrumTrajectory:
    """RK4 integration of the momentum-space scattering equation

        i dc(p)/dt = int dq c(q) Vt(p - q) exp[i phi(p, q, t)],
        phi = (p^2 - q^2) t + 2 (p - q) s(t),     s(t) = x0(t) / 2.

    The kernel factorises, so the ``q`` integral (trapezoidal rule on the
    lattice) is a linear convolution evaluated with zero-padded FFTs.  The
    amplitudes ``c`` are interaction-picture quantities: the lab field is
    ``exp(i A x - i Q) int dp c exp(i p x - i (p^2 t + 2 p s))``.

    Parameters
    ----------
    tol : float, optional
        If given, the run is repeated with ``dt / 2`` and the Richardson
        estimate of the final-time error (relative L2) must stay below
        ``tol``.

    Raises
    ------
    PreconditionError
        If ``|c0|`` near the lattice edge exceeds ``1e-10`` of its peak.
    ConvergenceError
        If the step-halving error estimate exceeds ``tol``.
    """
    grid = c0.grid
    vf = _as_field(potential_field, grid)
    force = force or ZeroForce()
    _check_edge(c0.c, grid)
    if c0.time != 0.0:
        raise ConfigurationError("momentum_space_evolve starts at t = 0")
    n = _n_steps(dt, t_final)
    steps = set(_strobe_steps(strobe, dt, n))
    fi = force.integrals()
    p = grid.p
    p2 = p * p
    conv = _LinearConvolver(grid)
    conv.set_kernel(vf.spectrum)
    mask = p <= 0

    def rhs(t, c):
        e = np.exp(1j * (p2 * t + p * fi.x0(t)))
        return -1j * e * conv(c / e)

    times, amps, max_neg = _interaction_run(c0.c, rhs, dt, n, steps, 0.0, mask)

    if tol is not None:
        _, fine, _ = _interaction_run(c0.c, rhs, dt / 2, 2 * n, {2 * n}, 0.0, mask)
        err = float(np.linalg.norm(amps[-1] - fine[-1]) / np.linalg.norm(fine[-1])) * 16 / 15
        if err > tol:
            suggest = 0.9 * dt * (tol / err) ** 0.25
            raise ConvergenceError(
                f"step-halving error {err:.2e} exceeds {tol:.2e}; try dt <= {suggest:.3g}")

    def to_field(t, c):
        s = 0.5 * float(fi.x0(t))
        psi = grid.ifft(c * np.exp(-1j * (p2 * t + 2 * p * s)))
        a = float(fi.impulse(t))
        if a != 0.0:
            psi = psi * grid.phase_ramp(a)
        return WaveFunction(grid, psi * np.exp(-1j * float(fi.phase(t))), t)

    meta = dict(solver="momentum-space", dt=dt, t_final=t_final, grid=grid,
                potential=repr(vf.spec) if vf.spec is not None else vf.label,
                force=repr(force), threads=_threads(), n_steps=n)
    return SpectrumTrajectory(grid, times, amps, to_field, meta, max_neg)


# --------------------------------------------------------------------------
# accelerated (Kramers-Henneberger) frame
# --------------------------------------------------------------------------

def kh_frame_evolve(wf0: WaveFunction, potential, force: Force | None, dt: float,
                    t_final: float, strobe=None, frame: str = "lab",
                    guard: bool = True) -> Trajectory:
    """Split-step propagation in the accelerated frame ``x' = x - x0(t)``.

    There the force is absent and the potential is ``V(x' + x0(t))``, built
    each step by a spectral shift of the lattice potential (sampled at the
    step midpoint).  With ``frame="lab"`` strobes are mapped back through
    ``psi(x, t) = exp(i A x - i Q) phi(x - x0(t), t)``; with
    ``frame="moving"`` the accelerated-frame field ``phi`` is returned.

    Raises
    ------
    DomainGuardError
        If ``|x0(t)|`` reaches half the domain (the shifted potential would
        wrap) or the field reaches the boundary band.
    """
    if frame not in ("lab", "moving"):
        raise ConfigurationError(f"frame must be 'lab' or 'moving', got {frame!r}")
    grid = wf0.grid
    vf = _as_field(potential, grid)
    force = force or ZeroForce()
    if wf0.time != 0.0:
        raise ConfigurationError("kh_frame_evolve starts at t = 0")
    n = _n_steps(dt, t_final)
    steps = set(_strobe_steps(strobe, dt, n))
    fi = force.integrals()
    tt = np.append(np.linspace(0.0, t_final, 4001), min(force.T, t_final))
    xmax = float(np.max(np.abs(fi.x0(tt))))
    if xmax >= 0.5 * grid.length:
        raise DomainGuardError(
            f"frame displacement {xmax:.4g} exceeds half the domain ({0.5 * grid.length:.4g})")
    _check_phase_step(vf.values, grid, 0.0, dt)

    p = grid.p
    kin = np.exp(-1j * p * p * dt)
    vt = vf.spectrum
    band = _band_mask(grid)
    static = np.exp(-0.5j * vf.values * dt)

    def half_factor(t):
        s = float(fi.x0(t))
        if s == 0.0:
            return static
        return np.exp(-0.5j * dt * grid.ifft(vt * np.exp(1j * p * s)))

    traj = Trajectory(grid, metadata=dict(
        solver="kh-frame", frame=frame, dt=dt, t_final=t_final, grid=grid,
        potential=repr(vf.spec) if vf.spec is not None else vf.label,
        force=repr(force), threads=_threads(), n_steps=n, hermitian=bool(vf.is_real)))

    phi = np.array(wf0.psi, dtype=complex)
    for k in range(n):
        h = half_factor((k + 0.5) * dt)
        phi = h * sfft.ifft(kin * sfft.fft(h * phi))
        t = (k + 1) * dt
        if guard and ((k + 1) % GUARD_EVERY == 0 or (k + 1) in steps):
            _guard(phi, band, t)
        if (k + 1) in steps:
            out = phi.copy() if frame == "moving" else _kh_to_lab(grid, phi, fi, t)
            negf = negative_momentum_fraction(WaveFunction(grid, phi))
            traj.append(WaveFunction(grid, out, t), negf)
    return traj


def _kh_to_lab(grid: SpatialGrid, phi: np.ndarray, fi, t: float) -> np.ndarray:
    s = float(fi.x0(t))
    a = float(fi.impulse(t))
    q = float(fi.phase(t))
    psi = phi if s == 0.0 else grid.ifft(grid.shift_spectrum(grid.fft(phi), -s))
    if a != 0.0:
        psi = psi * grid.phase_ramp(a)
    return psi * np.exp(-1j * q)


# --------------------------------------------------------------------------
# dilation Hamiltonian
# --------------------------------------------------------------------------

def scaled_spectrum(vf: PotentialField, beta: float) -> np.ndarray:
    """Lattice spectrum of ``W(x') = V(beta x')``, i.e. ``Vt(k / beta) / beta``.

    Exact for the bare single pole (``W`` is again a single pole with
    strength ``V0/beta`` and width ``alpha/beta``); otherwise ``V`` is
    evaluated at the scaled lattice points.
    """
    grid = vf.grid
    spec = vf.spec
    if beta == 1.0:
        return np.asarray(vf.spectrum)
    if spec is not None and isinstance(spec.variant, SinglePoleKK) and spec.envelope is None:
        v = spec.variant
        return pole_spectrum(grid, v.V0 / beta, v.alpha / beta)
    return grid.fft(vf.at(beta * grid.x))


def _dilation_profile(alpha_fn, t_nodes: np.ndarray):
    """``log beta(t) = int_0^t alpha`` and ``B(t) = int_0^t beta^-2``."""
    def f(t, y):
        a = float(alpha_fn(t))
        return [a, np.exp(-2 * y[0])]

    sol = solve_ivp(f, (0.0, float(t_nodes[-1])), [0.0, 0.0], method="DOP853",
                    t_eval=t_nodes, rtol=1e-13, atol=1e-15)
    if not sol.success:
        raise ConvergenceError(f"dilation profile integration failed: {sol.message}")
    return np.exp(sol.y[0]), sol.y[1]


def dilation_evolve(c0: MomentumSpectrum, alpha_fn: Callable[[float], float],
                    potential_field, dt: float, t_final: float, strobe=None,
                    beta_range: tuple = (0.5, 2.0)) -> SpectrumTrajectory:
    """Evolve under ``H = p^2 + alpha(t) (x p + p x) / 2 + V(x)``.

    In the co-moving momentum ``q' = beta(t) q`` with
    ``beta = exp(+int_0^t alpha)`` (so that ``q' `` is constant along the
    classical flow ``dq/dt = -alpha q``) the amplitudes ``d(q', t) = c(q, t)``
    obey

        i d_t = [(q'/beta)^2 + i alpha/2] d + int dp' Vt((q' - p')/beta) / beta d(p').

    Writing ``d = beta^(1/2) exp(-i q'^2 B(t)) e`` with ``B = int beta^-2``
    leaves only the coupling term, integrated with RK4 on a fixed step.  The
    coupling is a linear convolution with the spectrum of ``V(beta x')``.
    Strobed ``amplitudes`` are ``e(q')``; :meth:`SpectrumTrajectory.field`
    returns the lab field, resampling onto the fixed lattice by direct
    Fourier interpolation.

    Raises
    ------
    ResolutionError
        If ``beta(t)`` leaves ``beta_range``.
    """
    grid = c0.grid
    vf = _as_field(potential_field, grid)
    _check_edge(c0.c, grid)
    if c0.time != 0.0:
        raise ConfigurationError("dilation_evolve starts at t = 0")
    n = _n_steps(dt, t_final)
    steps = set(_strobe_steps(strobe, dt, n))
    nodes = 0.5 * dt * np.arange(2 * n + 1)
    beta, B = _dilation_profile(alpha_fn, nodes)
    lo, hi = beta_range
    if beta.min() < lo or beta.max() > hi:
        raise ResolutionError(
            f"beta(t) spans [{beta.min():.4g}, {beta.max():.4g}], outside [{lo}, {hi}]")

    p = grid.p
    p2 = p * p
    conv = _LinearConvolver(grid)
    zero = vf.is_zero
    cache = {}

    def kernel(j):
        b = float(beta[j])
        key = round(b, 15)
        if key not in cache:
            if len(cache) > 4:
                cache.clear()
            cache[key] = _LinearConvolver(grid)
            cache[key].set_kernel(scaled_spectrum(vf, b))
        return cache[key]

    def rhs(t, e):
        if zero:
            return np.zeros_like(e)
        j = int(round(t / (0.5 * dt)))
        ph = np.exp(1j * p2 * B[j])
        return -1j * ph * kernel(j)(e / ph)

    times, amps, max_neg = _interaction_run(c0.c, rhs, dt, n, steps, 0.0, p <= 0)

    def to_field(t, e):
        j = int(round(t / (0.5 * dt)))
        b, bb = float(beta[j]), float(B[j])
        qs = b * p                         # q' at the fixed-lattice momenta
        chi = grid.ifft(e)
        # e(q') for off-lattice q' by direct summation of its Fourier series
        ev = (grid.dx / TWO_PI) * np.exp(-1j * np.outer(qs, grid.x)) @ chi
        c = np.sqrt(b) * np.exp(-1j * qs * qs * bb) * ev
        return WaveFunction(grid, grid.ifft(c), t)

    meta = dict(solver="dilation", dt=dt, t_final=t_final, grid=grid,
                potential=repr(vf.spec) if vf.spec is not None else vf.label,
                beta_min=float(beta.min()), beta_max=float(beta.max()),
                threads=_threads(), n_steps=n)
    traj = SpectrumTrajectory(grid, times, amps, to_field, meta, max_neg)
    traj.beta = dict(zip(np.round(nodes, 12), beta))
    return traj


def dilation_characteristics(c0: MomentumSpectrum, alpha: float, t: float,
                             q: np.ndarray) -> np.ndarray:
    """Exact ``V = 0`` solution for constant ``alpha``:
    ``c(q, t) = sqrt(beta) c0(beta q) exp[-i (beta q)^2 B]`` with
    ``beta = exp(alpha t)`` and ``B = (1 - exp(-2 alpha t)) / (2 alpha)``.

    ``c0`` is evaluated off-lattice by direct Fourier interpolation."""
    grid = c0.grid
    b = np.exp(alpha * t)
    bb = t if alpha == 0 else (1 - np.exp(-2 * alpha * t)) / (2 * alpha)
    qs = b * np.asarray(q, dtype=float)
    chi = grid.ifft(c0.c)
    cv = (grid.dx / TWO_PI) * np.exp(-1j * np.outer(qs, grid.x)) @ chi
    return np.sqrt(b) * cv * np.exp(-1j * qs * qs * bb)


# --------------------------------------------------------------------------
# no-scattering conditions for the uniform-force transformation
# --------------------------------------------------------------------------

def uniform_force_coupling(potential_spec: PotentialSpec, force: Force, t: float,
                           p: np.ndarray, q: np.ndarray, x_quad: np.ndarray) -> np.ndarray:
    """Matrix ``M[i, j] = int exp(-i p_i x) U^+ V U exp(i q_j x) dx``.

    ``U(t)`` is the Volkov evolution of the uniform force, so
    ``U exp(iqx) = exp[i (q + A) x - i int (q + A)^2]``; the integral is a
    direct sum over the uniform quadrature nodes ``x_quad``.
    """
    fi = force.integrals()
    a = float(fi.impulse(t))
    s = 0.5 * float(fi.x0(t))
    qq = float(fi.phase(t))
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    h = x_quad[1] - x_quad[0]
    v = evaluate(potential_spec, x_quad)

    def volkov(k):
        return np.exp(1j * np.outer(k + a, x_quad) - 1j * (k * k * t + 2 * k * s + qq)[:, None])

    return h * (np.conj(volkov(p)) * v) @ volkov(q).T


def return_condition(force: Force, grid: SpatialGrid, q_values: Sequence[float]) -> float:
    """Largest weight on ``p <= 0`` of ``U(T) exp(iqx)`` over lattice modes ``q > 0``.

    Each ``q`` is rounded to the nearest lattice momentum."""
    worst = 0.0
    for qv in q_values:
        k = int(np.argmin(np.abs(grid.p - qv)))
        if grid.p[k] <= 0:
            raise ConfigurationError("return_condition needs q > 0")
        c = np.zeros(grid.n_points, dtype=complex)
        c[k] = 1.0
        wf = gordon_volkov_evolve(MomentumSpectrum(grid, c), force, force.T)
        worst = max(worst, negative_momentum_fraction(wf))
    return worst
