import numpy as np
import pytest
from scipy.integrate import quad

from kkwave import potentials as pm
from kkwave.errors import InvalidSpecError
from kkwave.grid import make_grid


@pytest.fixture
def grid():
    return make_grid(-102.4, 102.4, 2048)


POLE = pm.PotentialSpec(pm.SinglePoleKK(10.0, 0.2))
ENVELOPED = pm.PotentialSpec(pm.SinglePoleKK(10.0, 0.2), pm.SuperGaussian(60))
GAUSS = pm.PotentialSpec(pm.GaussianBarrier(5.0, 0.5))
PT = pm.PotentialSpec(pm.PoschlTeller(1))


def test_values():
    assert pm.evaluate(GAUSS, 2.0) == pytest.approx(5 * np.exp(-1.0))
    assert pm.evaluate(POLE, 1.0) == pytest.approx(10 / (1 + 0.2j))
    assert pm.evaluate(PT, 0.0) == pytest.approx(-2.0)
    assert pm.evaluate(ENVELOPED, 60.0) == pytest.approx(10 / (60 + 0.2j) * np.exp(-1))


@pytest.mark.parametrize("spec", [GAUSS, ENVELOPED, PT, POLE])
def test_derivative_matches_finite_difference(spec):
    x = np.linspace(-5, 5, 41) + 0.013
    h = 1e-5
    fd = (pm.evaluate(spec, x + h) - pm.evaluate(spec, x - h)) / (2 * h)
    assert np.allclose(pm.derivative(spec, x), fd, rtol=1e-6, atol=1e-7)


def test_truncation_length_gaussian():
    L = pm.truncation_length(GAUSS)
    assert L == pytest.approx(np.sqrt(np.log(1e10)) / 0.5, rel=1e-4)


def test_truncation_length_bare_pole_is_long():
    assert pm.truncation_length(POLE) > 1e8
    assert 100 < pm.truncation_length(ENVELOPED) < 200


def test_bare_pole_is_exactly_one_sided(grid):
    f = pm.sample(POLE, grid)
    assert pm.kk_one_sidedness(f) < 1e-30
    assert pm.hilbert_pair_check(f) < 1e-12


def test_bare_pole_samples_are_periodized_pole(grid):
    f = pm.sample(POLE, grid)
    lam = grid.length
    cot = 10 * (np.pi / lam) / np.tan(np.pi * (grid.x + 0.2j) / lam)
    # the samples omit only the spectral tail beyond p_max, whose sum is
    # V0 exp(-alpha p_max) / alpha
    tail = 10 * np.exp(-0.2 * grid.p_max) / 0.2
    err = np.abs(f.values - cot).max()
    assert 0.9 * tail < err < 1.1 * tail


def test_enveloped_pole_nearly_one_sided(grid):
    r = pm.kk_one_sidedness(pm.sample(ENVELOPED, grid))
    assert 0 < r < 2e-3


def test_gaussian_is_two_sided(grid):
    assert pm.kk_one_sidedness(pm.sample(GAUSS, grid)) == pytest.approx(0.5, abs=0.02)


def test_zero_potential(grid):
    z = pm.zero_potential()
    assert z.is_zero and pm.truncation_length(z) == 0.0
    assert pm.kk_one_sidedness(pm.sample(z, grid)) == 0.0


def test_cycle_average_matches_quadrature(grid):
    a, tau = 0.7, 2.0
    w = 2 * np.pi / tau
    avg = pm.cycle_average(GAUSS, lambda t: a * (1 - np.cos(w * t)), tau, grid)
    for x0 in (-3.0, -0.4, 0.0, 1.1, 2.5):
        j = int(round((x0 - grid.x_min) / grid.dx))
        xj = grid.x[j]
        ref = quad(lambda t: float(pm.evaluate(GAUSS, xj + a * (1 - np.cos(w * t))).real),
                   0, tau, epsabs=1e-13)[0] / tau
        assert avg.values[j] == pytest.approx(ref, abs=1e-10)


def test_cycle_average_keeps_pole_one_sided(grid):
    avg = pm.cycle_average(POLE, lambda t: 2 * np.sin(np.pi * t), 2.0, grid)
    assert pm.kk_one_sidedness(avg) < 1e-25


def test_cycle_average_validation(grid):
    with pytest.raises(InvalidSpecError):
        pm.cycle_average(GAUSS, lambda t: t, 0.0, grid)
    with pytest.raises(InvalidSpecError):
        pm.cycle_average(GAUSS, lambda t: t, 1.0, grid, nodes=65)


def test_invalid_specs():
    with pytest.raises(InvalidSpecError):
        pm.SuperGaussian(b=-1)
    with pytest.raises(InvalidSpecError):
        pm.Tabulated(np.array([0.0, 0.0, 1.0]), np.array([1.0, 2.0, 3.0]))
    with pytest.raises(InvalidSpecError):
        pm.SinglePoleKK(1.0, -0.1)


def test_tabulated_roundtrip(tmp_path):
    x = np.linspace(-5, 5, 101)
    path = tmp_path / "v.csv"
    np.savetxt(path, np.column_stack([x, np.exp(-x ** 2), 0.1 * x]), delimiter=",",
               header="x,re,im", comments="")
    spec = pm.load_tabulated(path)
    assert not spec.is_real
    assert pm.evaluate(spec, 0.5) == pytest.approx(np.exp(-0.25) + 0.05j, abs=2e-3)
