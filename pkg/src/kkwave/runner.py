"""Build simulation objects from a :class:`RunConfig`, execute runs and
convergence sweeps, and write manifests."""
from __future__ import annotations

import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, diagnostics, io
from . import forces as fm
from . import potentials as pm
from . import propagators as pr
from .config import RunConfig
from .errors import ConvergenceError
from .grid import (SpatialGrid, WaveFunction, from_momentum, gaussian_packet, make_grid,
                   split_right_left, to_momentum)

ROUNDOFF_FLOOR = 1e-13


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def build_grid(cfg: RunConfig) -> SpatialGrid:
    return make_grid(cfg["grid.x_min"], cfg["grid.x_max"], cfg["grid.n"])


def build_packet(cfg: RunConfig, grid: SpatialGrid) -> WaveFunction:
    wf = gaussian_packet(grid, cfg["packet.d"], cfg["packet.w"], cfg["packet.p0"])
    part = cfg["packet.part"]
    if part == "full":
        return wf
    right, left = split_right_left(to_momentum(wf))
    return from_momentum(right if part == "right" else left)


def build_potential(cfg: RunConfig) -> pm.PotentialSpec:
    v = cfg["potential.variant"]
    env = None
    if cfg["potential.envelope_b"]:
        env = pm.SuperGaussian(cfg["potential.envelope_b"], cfg["potential.envelope_order"])
    if v == "zero":
        return pm.zero_potential()
    if v == "gaussian":
        return pm.PotentialSpec(pm.GaussianBarrier(cfg["potential.V0"], cfg["potential.alpha"]), env)
    if v == "single_pole":
        return pm.PotentialSpec(pm.SinglePoleKK(cfg["potential.V0"], cfg["potential.alpha"]), env)
    if v == "poschl_teller":
        return pm.PotentialSpec(pm.PoschlTeller(cfg["potential.n"]), env)
    return pm.load_tabulated(cfg["potential.file"], env)


def build_force(cfg: RunConfig, potential: pm.PotentialSpec,
                grid: SpatialGrid) -> fm.Force:
    v = cfg["force.variant"]
    if v == "zero":
        return fm.ZeroForce()
    if v == "cosine":
        return fm.CosinePulse(cfg["force.F0"], cfg["force.T"], cfg["force.period"])
    if v == "tabulated":
        return fm.load_tabulated_force(cfg["force.file"])
    x_init = cfg["force.x_init"]
    p_init = cfg["force.p_init"]
    x_init = -cfg["packet.d"] if x_init is None else x_init
    p_init = cfg["packet.p0"] if p_init is None else p_init
    lattice = grid if isinstance(potential.variant, pm.Tabulated) else None
    return fm.tailored_force(potential, x_init, p_init, cfg["solver.t_final"],
                             cfg["solver.dt"] / 4, lattice)


def evolve(engine: str, wf0: WaveFunction, potential, force: fm.Force, dt: float,
           t_final: float, strobe: float, tol: float | None = None,
           keep_fields: bool = True) -> pr.Trajectory:
    """Run one engine and return a position-space :class:`Trajectory`."""
    if engine == "split_step":
        return pr.split_step_evolve(wf0, potential, force, dt, t_final, strobe,
                                    keep_fields=keep_fields)
    if engine == "kh_frame":
        return pr.kh_frame_evolve(wf0, potential, force, dt, t_final, strobe)
    grid = wf0.grid
    steps = pr._strobe_steps(strobe, dt, pr._n_steps(dt, t_final))
    traj = pr.Trajectory(grid, metadata=dict(solver=engine, dt=dt, t_final=t_final,
                                             force=repr(force), threads=1))
    fi = force.integrals()
    if engine == "gordon_volkov":
        G = to_momentum(wf0)
        for k in steps:
            wf = pr.gordon_volkov_evolve(G, force, k * dt)
            traj.append(wf, _interaction_negative(wf, float(fi.impulse(k * dt))), keep_fields)
        traj.metadata["hermitian"] = True
        return traj
    st = pr.momentum_space_evolve(to_momentum(wf0), potential, force, dt, t_final,
                                  strobe, tol)
    for i in range(len(st.times)):
        wf = st.field(i)
        traj.append(wf, diagnostics_negative(st.amplitudes[i], grid), keep_fields)
    traj.metadata.update(st.metadata)
    traj.metadata["max_negative_fraction"] = st.max_negative_fraction
    return traj


def diagnostics_negative(c, grid) -> float:
    w = np.abs(c) ** 2
    return float(w[grid.p <= 0].sum() / w.sum())


def _interaction_negative(wf: WaveFunction, a: float) -> float:
    g = wf.grid
    c = g.fft(wf.psi * g.phase_ramp(-a)) if a else g.fft(wf.psi)
    return diagnostics_negative(c, g)


# --------------------------------------------------------------------------
# manifests
# --------------------------------------------------------------------------

def manifest(cfg: RunConfig | None, extra: dict | None = None) -> dict:
    m = dict(package="kkwave", version=__version__, python=platform.python_version(),
             numpy=np.__version__, scipy=scipy.__version__, threads=1,
             command=" ".join(sys.argv), platform=platform.platform())
    if cfg is not None:
        m["config"] = {k: v for k, v in cfg.values.items()}
    if extra:
        m.update(extra)
    return m


def write_manifest(out: Path, cfg: RunConfig | None, extra: dict | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest(cfg, extra), fh, indent=2, sort_keys=True, default=str)
    if cfg is not None:
        cfg.write(out / "config.txt")


# --------------------------------------------------------------------------
# single run
# --------------------------------------------------------------------------

def numerical_floor(delta_v0: float, reference: WaveFunction) -> float:
    """Larger of the measured ``V = 0`` difference and a roundoff guard
    (``1e-13`` of the reference peak)."""
    return max(delta_v0, ROUNDOFF_FLOOR * float(np.abs(reference.psi).max()))


def run_config(cfg: RunConfig, out_dir=None) -> dict:
    """Execute a configured run, writing trajectory, manifest and (optionally)
    a reflection report.  Returns a summary dictionary."""
    t_start = time.time()
    out = Path(out_dir or cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    grid = build_grid(cfg)
    wf0 = build_packet(cfg, grid)
    spec = build_potential(cfg)
    force = build_force(cfg, spec, grid)
    if cfg["diagnostics.enabled"]:
        diagnostics._require_conditions(force)
    field = pm.sample(spec, grid)
    dt, tf, strobe = cfg["solver.dt"], cfg["solver.t_final"], cfg["solver.strobe"]
    engine = cfg["solver.engine"]
    traj = evolve(engine, wf0, field, force, dt, tf, strobe, cfg["solver.tol"])
    summary = dict(final_norm=traj.records[-1][1], final_mean_x=traj.records[-1][2],
                   final_mean_p=traj.records[-1][3],
                   truncation_length=pm.truncation_length(spec) if not spec.is_zero else 0.0)
    if cfg["output.snapshots"]:
        traj.export(out / "trajectory")
    else:
        io.write_rows(out / "index.csv", ["t", "norm", "mean_x", "mean_p", "negative_fraction"],
                      traj.records)
    if cfg["output.field_csv"]:
        io.write_field_csv(out / "final_field.csv", traj.final)
    if isinstance(force, fm.TailoredForce) or force.T > 0:
        tt = np.linspace(0, max(force.T, 1e-12), 2001)
        io.write_rows(out / "force.csv", ["t", "F"], zip(tt, force(tt)))

    if cfg["diagnostics.enabled"]:
        free = evolve("gordon_volkov", wf0, None, fm.ZeroForce(), dt, tf, strobe)
        d = cfg["packet.d"]
        x_w, t_w = diagnostics.default_window(spec, d, force)
        x_w = cfg["diagnostics.x_w"] or x_w
        t_w = cfg["diagnostics.t_w"] if cfg["diagnostics.t_w"] is not None else t_w
        if spec.is_zero:
            v0_delta = 0.0
        else:
            v0 = evolve(engine, wf0, None, force, dt, tf, strobe)
            v0_delta = diagnostics.reflection_indicator(v0, free, force, (x_w, t_w)).delta_max
        floor = numerical_floor(v0_delta, free.snapshots[0])
        probe = diagnostics.ProbeLine(cfg["diagnostics.probe_d"] or d, cfg["diagnostics.v_d"])
        rep = diagnostics.reflection_indicator(traj, free, force, (x_w, t_w), floor,
                                               cfg["diagnostics.factor"], probe)
        rep.write(out / "report.txt")
        summary.update(delta_max=rep.delta_max, floor=floor, verdict=rep.verdict)
    summary["elapsed_s"] = time.time() - t_start
    write_manifest(out, cfg, dict(summary=summary, solver=_meta(traj.metadata)))
    return summary


def _meta(meta: dict) -> dict:
    return {k: (repr(v) if isinstance(v, SpatialGrid) else v) for k, v in meta.items()}


# --------------------------------------------------------------------------
# convergence sweep
# --------------------------------------------------------------------------

def convergence_sweep(cfg: RunConfig, dt_factors, n_factors, out_dir=None) -> list:
    """Final-time errors over a grid of ``(dt, n)`` refinements.

    For ``V = 0`` every run is compared with the exact Volkov solution on its
    own grid; otherwise with the finest run (smallest ``dt``, largest ``n``),
    restricted to the coarse lattice points.  Returns rows
    ``(dt, n, dx, error, resolved, order)`` where ``order`` is the local
    ``dt`` exponent between consecutive ``dt`` levels at the same ``n``.

    Raises
    ------
    ConvergenceError
        If the coarsest level under-resolves the packet (``w < 3 dx``, checked
        before any run) or the error does not decrease towards the finest
        level.
    """
    dt_factors = sorted({float(f) for f in dt_factors}, reverse=True)
    n_factors = sorted({float(f) for f in n_factors})
    for f in n_factors:
        k = f if f >= 1 else 1 / f
        if abs(k - round(k)) > 1e-12 or int(round(k)) & (int(round(k)) - 1):
            raise ConvergenceError(f"n factor {f} must be a power of two")
    dx0 = (cfg["grid.x_max"] - cfg["grid.x_min"]) / cfg["grid.n"]
    coarse = dx0 / n_factors[0]
    if cfg["packet.w"] < 3 * coarse:
        raise ConvergenceError(
            f"packet under-resolved: w = {cfg['packet.w']} < 3 dx = {3 * coarse:.3g} "
            f"at n = {int(round(cfg['grid.n'] * n_factors[0]))}")
    spec = build_potential(cfg)
    engine = cfg["solver.engine"]
    exact = spec.is_zero and engine in ("split_step", "kh_frame", "momentum")
    tf = cfg["solver.t_final"]
    n0 = cfg["grid.n"]
    results = {}
    for fn in n_factors:
        n = int(round(n0 * fn))
        c = cfg.with_overrides({"grid.n": str(n)})
        grid = build_grid(c)
        wf0 = build_packet(c, grid)
        force = build_force(c, spec, grid)
        field = pm.sample(spec, grid)
        for fd in dt_factors:
            dt = cfg["solver.dt"] * fd
            tr = evolve(engine, wf0, field, force, dt, tf, tf)
            ref = pr.gordon_volkov_evolve(to_momentum(wf0), force, tf) if exact else None
            results[(fd, fn)] = (dt, grid, tr.final, ref)
    fine = results[(dt_factors[-1], n_factors[-1])]
    rows = []
    for fn in n_factors:
        prev = None
        for fd in dt_factors:
            dt, grid, wf, ref = results[(fd, fn)]
            if exact:
                err = float(np.linalg.norm(wf.psi - ref.psi) / np.linalg.norm(ref.psi))
            else:
                stride = fine[1].n_points // grid.n_points
                a = wf.psi
                b = fine[2].psi[::stride] if stride >= 1 else None
                err = float(np.linalg.norm(a - b) / np.linalg.norm(b))
            resolved = cfg["packet.w"] >= 3 * grid.dx
            order = None
            if prev is not None and err > 0 and prev[1] > 0:
                order = float(np.log(prev[1] / err) / np.log(prev[0] / dt))
            rows.append((dt, grid.n_points, grid.dx, err, resolved, order))
            prev = (dt, err)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        io.write_rows(out / "convergence.csv", ["dt", "n", "dx", "error", "resolved", "order"],
                      [(r[0], r[1], r[2], r[3], int(r[4]), "" if r[5] is None else r[5])
                       for r in rows])
        write_manifest(out, cfg, dict(dt_factors=dt_factors, n_factors=n_factors,
                                      reference="exact" if exact else "finest"))
    if not exact and len(dt_factors) > 2:
        errs = [r[3] for r in rows if r[1] == fine[1].n_points][:-1]
        if any(b > a for a, b in zip(errs, errs[1:])):
            raise ConvergenceError("error does not decrease under dt refinement")
    return rows
