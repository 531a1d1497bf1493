"""Static scattering: amplitudes, scattering-state expansion and the
stationary-phase probe amplitude.

Scattering states of ``-psi'' + V psi = p^2 psi`` (``p > 0``)::

    phi1 = exp(ipx) + r_minus exp(-ipx)   (x < -L),   t exp(ipx)                  (x > L)
    phi2 = t exp(-ipx)                    (x < -L),   exp(-ipx) + r_plus exp(ipx) (x > L)
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import io
from .errors import (ConfigurationError, ConvergenceError, PreconditionError,
                     SingularDecompositionError)
from .grid import TWO_PI, MomentumSpectrum, SpatialGrid
from .potentials import PotentialField, PotentialSpec, evaluate, truncation_length

MAX_RANGE = 1e4


@dataclass
class ScatteringAmplitudes:
    p: np.ndarray
    t: np.ndarray
    r_minus: np.ndarray
    r_plus: np.ndarray
    L: float = 0.0

    def to_csv(self, path) -> None:
        rows = zip(self.p, self.t.real, self.t.imag, self.r_minus.real,
                   self.r_minus.imag, self.r_plus.real, self.r_plus.imag)
        io.write_rows(path, ["p", "re_t", "im_t", "re_rm", "im_rm", "re_rp", "im_rp"], rows)

    def interpolate(self, name: str, p) -> np.ndarray:
        """Cubic interpolation of ``t``, ``r_minus`` or ``r_plus`` at ``p``."""
        vals = getattr(self, name)
        return CubicSpline(self.p, vals)(np.asarray(p, dtype=float))

    def flux_defect(self) -> np.ndarray:
        """``|t|^2 + |r_minus|^2 - 1`` (zero for a real potential)."""
        return np.abs(self.t) ** 2 + np.abs(self.r_minus) ** 2 - 1


def default_p_grid(n: int = 512, p_lo: float = 0.05, p_split: float = 1.0,
                   p_hi: float = 10.0) -> np.ndarray:
    """Log-spaced on ``[p_lo, p_split)``, linear on ``[p_split, p_hi]``."""
    n_log = n // 4
    lo = np.geomspace(p_lo, p_split, n_log, endpoint=False)
    hi = np.linspace(p_split, p_hi, n - n_log)
    return np.concatenate([lo, hi])


def _potential_callable(potential):
    if isinstance(potential, PotentialSpec):
        return (lambda x: complex(evaluate(potential, x))), truncation_length(potential)
    if isinstance(potential, PotentialField):
        if potential.spec is not None:
            spec = potential.spec
            return (lambda x: complex(evaluate(spec, x))), truncation_length(spec)
        g = potential.grid
        a = np.abs(potential.values)
        inside = np.nonzero(a >= 1e-10 * a.max())[0] if a.max() > 0 else np.array([0])
        L = float(max(abs(g.x[inside[0]]), abs(g.x[inside[-1]]))) + g.dx
        return (lambda x: complex(potential.at(x))), L
    raise ConfigurationError("potential must be a PotentialSpec or PotentialField")


def _sweep(vfun, p, x_start, x_end, direction, rtol):
    """Integrate from ``x_start`` with pure ``exp(direction i p x)`` data to ``x_end``."""
    k = direction * p
    y0 = np.concatenate([np.exp(1j * k * x_start), 1j * k * np.exp(1j * k * x_start)])
    n = p.size
    p2 = p * p

    def rhs(x, y):
        psi = y[:n]
        return np.concatenate([y[n:], (vfun(x) - p2) * psi])

    sol = solve_ivp(rhs, (x_start, x_end), y0, method="DOP853", rtol=rtol,
                    atol=rtol * 1e-3)
    if not sol.success:
        raise ConvergenceError(f"scattering ODE failed: {sol.message}")
    return sol.y[:n, -1], sol.y[n:, -1]


def solve_scattering(potential, p_grid=None, rtol: float = 1e-12,
                     L: float | None = None) -> ScatteringAmplitudes:
    """Transmission and reflection amplitudes on ``p_grid``.

    For left incidence the equation is integrated from ``x = +L`` (pure
    ``t exp(ipx)``, normalised to ``exp(ipx)``) down to ``-L`` and the result
    decomposed into ``A exp(ipx) + B exp(-ipx)``; then ``t = 1/A`` and
    ``r_minus = B/A``.  ``r_plus`` comes from the mirrored sweep.  All
    momenta are integrated together with an adaptive 8th-order
    Runge-Kutta scheme.

    Raises
    ------
    PreconditionError
        If a momentum is not positive or the potential is not short-ranged.
    """
    p = default_p_grid() if p_grid is None else np.asarray(p_grid, dtype=float)
    if np.any(p <= 0):
        raise PreconditionError("scattering momenta must be positive")
    vfun, L_pot = _potential_callable(potential)
    L = L_pot if L is None else float(L)
    if not np.isfinite(L) or L > MAX_RANGE:
        raise PreconditionError(f"potential is not short-ranged (L = {L:.3g})")
    L = max(L, 1.0)
    if np.any(p * L < 1):
        warnings.warn("p L < 1 for some momenta: amplitudes may be ill-conditioned",
                      RuntimeWarning, stacklevel=2)

    psi, dpsi = _sweep(vfun, p, L, -L, +1, rtol)
    x = -L
    A = (dpsi + 1j * p * psi) / (2j * p) * np.exp(-1j * p * x)
    B = (1j * p * psi - dpsi) / (2j * p) * np.exp(1j * p * x)
    t = 1 / A
    r_minus = B / A

    psi, dpsi = _sweep(vfun, p, -L, L, -1, rtol)
    x = L
    A2 = (1j * p * psi - dpsi) / (2j * p) * np.exp(1j * p * x)    # exp(-ipx) part
    B2 = (dpsi + 1j * p * psi) / (2j * p) * np.exp(-1j * p * x)   # exp(+ipx) part
    r_plus = B2 / A2
    return ScatteringAmplitudes(p, t, r_minus, r_plus, L)


def decompose_G1_G2(G0, amplitudes: ScatteringAmplitudes, d: float, tol: float = 1e-10):
    """Scattering-state amplitudes of a packet centred at ``x = -d``.

    ``G0`` is a callable giving the spectrum of the packet shifted to the
    origin, so that the packet's own spectrum is ``G0(p) exp(ipd)``.

    Returns ``(G1, G2)`` on ``amplitudes.p``.

    Raises
    ------
    SingularDecompositionError
        If ``|r_minus r_plus - t^2| < tol`` at some momentum.
    """
    a = amplitudes
    p = a.p
    den = a.r_minus * a.r_plus - a.t ** 2
    bad = np.nonzero(np.abs(den) < tol)[0]
    if bad.size:
        raise SingularDecompositionError(
            f"vanishing denominator at p = {p[bad[0]]:.6g}", p=float(p[bad[0]]))
    gp = G0(p) * np.exp(1j * p * d)
    gm = G0(-p) * np.exp(-1j * p * d)
    G1 = gp + gm * a.r_plus / den
    G2 = -a.t * gm / den
    return G1, G2


def spectrum_interpolator(spec: MomentumSpectrum, centre: float = 0.0):
    """Band-limited interpolant ``p -> G(p) exp(-i p centre)`` of a lattice
    spectrum, by direct summation of its Fourier series."""
    g = spec.grid
    psi = g.ifft(spec.c)

    def G(p):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        out = np.empty(p.size, dtype=complex)
        for i0 in range(0, p.size, 256):
            blk = p[i0:i0 + 256]
            out[i0:i0 + 256] = (g.dx / TWO_PI) * np.exp(-1j * np.outer(blk, g.x)) @ psi
        return out * np.exp(-1j * p * centre)

    return G


def scattering_state_field(G_spec: MomentumSpectrum, amplitudes: ScatteringAmplitudes,
                           x: np.ndarray, t: float) -> np.ndarray:
    """Evaluate the scattering-state expansion of ``psi(x, t)`` for ``|x| > L``.

    ``G_spec`` is the lattice spectrum of ``psi(x, 0)``; ``amplitudes`` must
    be given on the positive lattice momenta of the same grid, which also
    serve as the quadrature nodes (the lattice sum used by the split-step
    engine).  Points with ``|x| <= L`` are returned as NaN.
    """
    g = G_spec.grid
    a = amplitudes
    idx = np.array([int(round(pk / g.dp)) for pk in a.p])
    if np.any(np.abs(idx * g.dp - a.p) > 1e-9 * g.dp):
        raise ConfigurationError("amplitudes must be given on the lattice momenta")
    n = g.n_points
    gp = G_spec.c[idx % n]
    gm = G_spec.c[(-idx) % n]
    den = a.r_minus * a.r_plus - a.t ** 2
    G1 = gp + gm * a.r_plus / den
    G2 = -a.t * gm / den
    # coefficients of exp(ipx) and exp(-ipx) on each side
    left_pos, left_neg = G1, a.r_minus * gp + gm
    right_pos, right_neg = a.t * gp, G2
    p = a.p
    ph = np.exp(-1j * p * p * t) * g.dp
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.nan, dtype=complex)
    # p = 0 lattice mode: carried as a free mode
    zero = G_spec.c[0] * g.dp
    for mask, cpos, cneg in ((x < -a.L, left_pos, left_neg), (x > a.L, right_pos, right_neg)):
        xs = x[mask]
        if xs.size == 0:
            continue
        e = np.exp(1j * np.outer(xs, p))
        out[mask] = e @ (cpos * ph) + np.conj(e) @ (cneg * ph) + zero
    return out


def asymptotic_probe(G0, amplitudes: ScatteringAmplitudes | None, v_d: float, d: float,
                     t) -> np.ndarray:
    """Leading stationary-phase amplitude on ``x = -d + v_d t`` (``v_d < 0``)::

        [G0(v_d/2) + r_minus(-v_d/2) G0(-v_d/2)] sqrt(pi/t) exp(i t v_d^2/4 - i pi/4)

    ``G0`` is a callable (spectrum of the packet moved to the origin) or a
    :class:`MomentumSpectrum` of the packet itself, interpolated off-lattice.
    Without amplitudes the free-space law is returned.
    """
    if not v_d < 0:
        raise PreconditionError("the probe amplitude formula needs v_d < 0")
    if isinstance(G0, MomentumSpectrum):
        G0 = spectrum_interpolator(G0, centre=-d)
    ps = 0.5 * v_d
    amp = complex(G0(np.array([ps]))[0])
    if amplitudes is not None:
        amp += complex(amplitudes.interpolate("r_minus", -ps)) * complex(G0(np.array([-ps]))[0])
    t = np.asarray(t, dtype=float)
    return amp * np.sqrt(np.pi / t) * np.exp(1j * t * v_d ** 2 / 4 - 1j * np.pi / 4)
