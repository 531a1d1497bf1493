"""Reflection diagnostics: probe-line sampling, the difference indicator
``Delta(x, t) = |psi_free - psi exp(i phi0)|`` and decay-exponent fits."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import io
from .errors import (ConditionsNotMetError, ConfigurationError, InsufficientSignalError,
                     PreconditionError)
from .forces import Force, TailoredForce, check_conditions
from .potentials import PotentialSpec, truncation_length

SIGNAL_FLOOR = 1e-13


@dataclass(frozen=True)
class ProbeLine:
    """The space-time ray ``x = -d + v_d t``."""

    d: float
    v_d: float

    def x(self, t):
        return -self.d + self.v_d * np.asarray(t, dtype=float)


@dataclass
class ProbeSeries:
    t: np.ndarray
    values: np.ndarray
    truncated: bool = False

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def to_csv(self, path) -> None:
        io.write_rows(path, ["t", "re", "im", "abs"],
                      zip(self.t, self.values.real, self.values.imag, self.modulus))


def interpolate_field(wf, x) -> np.ndarray:
    """Four-point (cubic Lagrange) interpolation of ``wf.psi`` at ``x``."""
    g = wf.grid
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = (x - g.x_min) / g.dx
    j = np.floor(s).astype(int)
    u = s - j
    w = np.stack([-u * (u - 1) * (u - 2) / 6, (u + 1) * (u - 1) * (u - 2) / 2,
                  -(u + 1) * u * (u - 2) / 2, (u + 1) * u * (u - 1) / 6])
    idx = (j[None, :] + np.arange(-1, 3)[:, None]) % g.n_points
    return np.sum(w * wf.psi[idx], axis=0)


def sample_probe(trajectory, probe: ProbeLine, t_min: float | None = None,
                 t_max: float | None = None) -> ProbeSeries:
    """``psi(-d + v_d t, t)`` at every strobe in ``[t_min, t_max]``.

    Strobes where the line has left the grid (2 cells of margin) are dropped
    and the series is flagged ``truncated``.
    """
    g = trajectory.grid
    ts, vals = [], []
    truncated = False
    for wf in trajectory.snapshots:
        t = wf.time
        if (t_min is not None and t < t_min) or (t_max is not None and t > t_max):
            continue
        x = float(probe.x(t))
        if not (g.x_min + 2 * g.dx <= x <= g.x_max - 3 * g.dx):
            truncated = True
            continue
        ts.append(t)
        vals.append(interpolate_field(wf, x)[0])
    return ProbeSeries(np.array(ts), np.array(vals, dtype=complex), truncated)


@dataclass
class DecayFit:
    exponent: float
    stderr: float
    ci95: tuple
    amplitude: float
    n_samples: int


def decay_exponent_fit(series: ProbeSeries, t_min: float = 0.0,
                       t_max: float | None = None) -> DecayFit:
    """Least-squares slope of ``log|psi|`` against ``log t``.

    Raises
    ------
    InsufficientSignalError
        With fewer than 20 samples in the window or moduli below ``1e-13``.
    """
    t = np.asarray(series.t, dtype=float)
    m = np.abs(series.values)
    sel = t >= t_min
    if t_max is not None:
        sel &= t <= t_max
    t, m = t[sel], m[sel]
    if t.size < 20:
        raise InsufficientSignalError(f"only {t.size} samples in the fit window (need 20)")
    if np.any(m <= SIGNAL_FLOOR) or np.any(t <= 0):
        raise InsufficientSignalError("probe modulus below the signal floor")
    res = stats.linregress(np.log(t), np.log(m))
    half = stats.t.ppf(0.975, t.size - 2) * res.stderr
    return DecayFit(float(res.slope), float(res.stderr),
                    (float(res.slope - half), float(res.slope + half)),
                    float(np.exp(res.intercept)), int(t.size))


@dataclass
class ReflectionReport:
    delta_max: float
    delta_l2: float
    window: tuple
    phi0: float
    threshold: float | None
    floor: float | None
    verdict: str
    probe: ProbeSeries | None = None
    exponent: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = dict(delta_max=self.delta_max, delta_l2=self.delta_l2,
                 x_w=self.window[0], t_w=self.window[1], phi0=self.phi0,
                 threshold=self.threshold, floor=self.floor, verdict=self.verdict,
                 exponent=self.exponent)
        d.update(self.extra)
        return d

    def write(self, path) -> None:
        """Flat ``key = value`` file; the probe series (if any) goes next to it."""
        path = Path(path)
        with open(path, "w") as fh:
            for k, v in self.as_dict().items():
                fh.write(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n")
        if self.probe is not None:
            self.probe.to_csv(path.with_suffix(".probe.csv"))


def default_window(potential_spec: PotentialSpec | None, d: float, force: Force) -> tuple:
    """``(x_w, t_w) = (max(L, d/2), T + 10)``."""
    L = 0.0 if potential_spec is None or potential_spec.is_zero \
        else truncation_length(potential_spec)
    return max(L, 0.5 * d), max(force.T, 0.0) + 10.0


def _require_conditions(force: Force, tol: float = 1e-8):
    if isinstance(force, TailoredForce):
        raise ConditionsNotMetError("tailored forces do not satisfy the impulse conditions")
    cc = check_conditions(force, tol)
    if not cc.both:
        raise ConditionsNotMetError(
            f"force fails the impulse conditions (zero impulse: {cc.zero_impulse}, "
            f"zero displacement: {cc.zero_displacement})")


def _paired(run, free_run):
    if run.grid != free_run.grid:
        raise ConfigurationError("runs are on different grids")
    fmap = {round(w.time, 9): w for w in free_run.snapshots}
    pairs = [(w, fmap[round(w.time, 9)]) for w in run.snapshots if round(w.time, 9) in fmap]
    if not pairs:
        raise ConfigurationError("runs share no strobe times")
    return pairs


def reflection_indicator(run, free_run, force: Force, window: tuple,
                         floor: float | None = None, factor: float = 10.0,
                         probe: ProbeLine | None = None) -> ReflectionReport:
    """``Delta(x, t)`` on ``{x <= -x_w} x {t >= t_w}``.

    ``phi0`` is taken from ``force``; the verdict is ``reflectionless`` when
    ``delta_max < factor * floor`` (no verdict without a floor).  ``delta_l2``
    is the space-time L2 norm of ``Delta`` over the window (strobe spacing as
    the time weight).

    Raises
    ------
    ConditionsNotMetError
        If the force violates the zero-impulse or zero-displacement condition.
    """
    _require_conditions(force)
    phi0 = force.integrals().phi0
    x_w, t_w = window
    g = run.grid
    mask = g.x <= -x_w
    if not mask.any():
        raise PreconditionError("window excludes the whole grid")
    rot = np.exp(1j * phi0)
    dmax, acc, times = 0.0, [], []
    for w, wf in _paired(run, free_run):
        if w.time < t_w:
            continue
        delta = np.abs(wf.psi[mask] - w.psi[mask] * rot)
        dmax = max(dmax, float(delta.max()))
        acc.append(float(np.sum(delta ** 2) * g.dx))
        times.append(w.time)
    if not times:
        raise PreconditionError(f"no strobes at t >= {t_w}")
    if len(times) > 1:
        dl2 = float(np.sqrt(np.trapezoid(acc, times)))
    else:
        dl2 = float(np.sqrt(acc[0]))
    threshold = None if floor is None else factor * floor
    verdict = "undetermined" if threshold is None else \
        ("reflectionless" if dmax < threshold else "reflective")
    series, expo = None, None
    if probe is not None:
        series = sample_probe(run, probe, t_min=t_w)
        try:
            expo = decay_exponent_fit(series, t_w).exponent
        except InsufficientSignalError:
            expo = None
    return ReflectionReport(dmax, dl2, (x_w, t_w), phi0, threshold, floor, verdict,
                            series, expo, dict(n_strobes=len(times)))


def probe_measure(run, free_run, probe: ProbeLine, t_min: float,
                  t_max: float | None = None) -> float:
    """L2 norm over the probe window of ``|psi_v|^2 - |psi_free_v|^2``."""
    a = sample_probe(run, probe, t_min, t_max)
    b = sample_probe(free_run, probe, t_min, t_max)
    if a.t.size != b.t.size or np.any(np.abs(a.t - b.t) > 1e-9):
        raise ConfigurationError("runs are not strobed identically")
    if a.t.size < 2:
        raise InsufficientSignalError("probe window holds fewer than two strobes")
    diff = np.abs(a.values) ** 2 - np.abs(b.values) ** 2
    return float(np.sqrt(np.trapezoid(diff ** 2, a.t)))


def reflection_strength_curve(runs: dict, free_run, probe: ProbeLine, t_min: float,
                              t_max: float | None = None) -> list:
    """``[(F0, measure), ...]`` sorted by ``F0`` using :func:`probe_measure`."""
    grids = {r.grid for r in runs.values()} | {free_run.grid}
    if len(grids) != 1:
        raise ConfigurationError("runs in a strength curve must share one grid")
    return [(float(f0), probe_measure(runs[f0], free_run, probe, t_min, t_max))
            for f0 in sorted(runs)]
