import numpy as np
import pytest

from kkwave import diagnostics as dg
from kkwave import forces as fm
from kkwave import potentials as pm
from kkwave import propagators as pr
from kkwave.errors import (ConditionsNotMetError, ConfigurationError, InsufficientSignalError,
                           PreconditionError)
from kkwave.grid import WaveFunction, gaussian_packet, make_grid, to_momentum

PULSE = fm.CosinePulse(0.1, 8)


@pytest.fixture(scope="module")
def grid():
    return make_grid(-204.8, 204.8, 2048)


@pytest.fixture(scope="module")
def runs(grid):
    wf = gaussian_packet(grid, 30, 2, 1)
    G = to_momentum(wf)
    times = np.arange(1, 41) * 0.5
    free = pr.Trajectory(grid)
    for t in times:
        free.append(pr.gordon_volkov_evolve(G, None, t), 0.0)
    v0 = pr.split_step_evolve(wf, None, PULSE, 0.005, 20.0, strobe=0.5)
    gauss = pr.split_step_evolve(wf, pm.PotentialSpec(pm.GaussianBarrier(1.0, 0.5)), PULSE,
                                 0.005, 20.0, strobe=0.5)
    return free, v0, gauss


def test_probe_line():
    pl = dg.ProbeLine(100, -0.2)
    assert np.allclose(pl.x([0, 50]), [-100, -110])


def test_interpolation_exact_for_cubics(grid):
    wf = WaveFunction(grid, (grid.x / 50) ** 3 - 2j * grid.x / 50)
    x = np.array([-33.33, 0.017, 12.5, 71.05])
    ref = (x / 50) ** 3 - 2j * x / 50
    assert np.abs(dg.interpolate_field(wf, x) - ref).max() < 1e-13


def test_decay_fit_recovers_exponent():
    t = np.linspace(50, 150, 60)
    series = dg.ProbeSeries(t, 3 * t ** -0.5 * np.exp(1j * t))
    fit = dg.decay_exponent_fit(series)
    assert fit.exponent == pytest.approx(-0.5, abs=1e-12)
    assert fit.amplitude == pytest.approx(3, rel=1e-10)
    assert fit.ci95[0] <= fit.exponent <= fit.ci95[1] and fit.n_samples == 60


def test_decay_fit_needs_signal():
    t = np.linspace(1, 2, 10)
    with pytest.raises(InsufficientSignalError):
        dg.decay_exponent_fit(dg.ProbeSeries(t, np.ones(10)))
    t = np.linspace(1, 2, 30)
    with pytest.raises(InsufficientSignalError):
        dg.decay_exponent_fit(dg.ProbeSeries(t, np.full(30, 1e-14)))


def test_probe_truncation(runs):
    free = runs[0]
    s = dg.sample_probe(free, dg.ProbeLine(30, -12.0))
    assert s.truncated and s.t.max() < 15
    s = dg.sample_probe(free, dg.ProbeLine(30, -0.5), t_min=5, t_max=10)
    assert not s.truncated and s.t.size == 11


def test_default_window():
    gauss = pm.PotentialSpec(pm.GaussianBarrier(1.0, 0.5))
    x_w, t_w = dg.default_window(gauss, 30, PULSE)
    assert x_w == pytest.approx(15) and t_w == pytest.approx(18)
    x_w, _ = dg.default_window(gauss, 10, PULSE)
    assert x_w == pytest.approx(pm.truncation_length(gauss))
    assert dg.default_window(None, 30, fm.ZeroForce()) == (15, 10)


def test_indicator_at_floor_without_potential(runs):
    free, v0, _ = runs
    rep = dg.reflection_indicator(v0, free, PULSE, (15, 18), floor=1e-6)
    assert rep.delta_max < 1e-6 and rep.verdict == "reflectionless"
    assert rep.phi0 == pytest.approx(PULSE.integrals().phi0)
    assert rep.extra["n_strobes"] == 5


def test_indicator_sees_reflection(runs, tmp_path):
    free, v0, gauss = runs
    floor = dg.reflection_indicator(v0, free, PULSE, (15, 18)).delta_max
    rep = dg.reflection_indicator(gauss, free, PULSE, (15, 18), floor=floor,
                                  probe=dg.ProbeLine(30, -0.5))
    assert rep.verdict == "reflective" and rep.delta_max > 1e3 * floor
    rep.write(tmp_path / "r.txt")
    assert "verdict = reflective" in (tmp_path / "r.txt").read_text()
    assert (tmp_path / "r.probe.csv").exists()


def test_indicator_requires_impulse_conditions(runs):
    free, v0, _ = runs
    with pytest.raises(ConditionsNotMetError):
        dg.reflection_indicator(v0, free, fm.CosinePulse(0.1, 6, period=8), (15, 18))
    with pytest.raises(PreconditionError):
        dg.reflection_indicator(v0, free, PULSE, (15, 50))
    with pytest.raises(PreconditionError):
        dg.reflection_indicator(v0, free, PULSE, (500, 18))


def test_probe_measure_and_curve(runs, grid):
    free, v0, gauss = runs
    probe = dg.ProbeLine(30, -0.5)
    assert dg.probe_measure(free, free, probe, 10) == 0.0
    curve = dg.reflection_strength_curve({0.1: gauss, 0.0: v0}, free, probe, 10)
    assert [c[0] for c in curve] == [0.0, 0.1]
    assert curve[0][1] < 1e-6 < curve[1][1]
    other = pr.Trajectory(make_grid(-102.4, 102.4, 1024))
    with pytest.raises(ConfigurationError):
        dg.reflection_strength_curve({0.0: other}, free, probe, 10)
