import numpy as np
import pytest

from kkwave import potentials as pm
from kkwave import propagators as pr
from kkwave import stationary as st
from kkwave.errors import PreconditionError, SingularDecompositionError
from kkwave.grid import gaussian_packet, make_grid, to_momentum

GAUSS = pm.PotentialSpec(pm.GaussianBarrier(1.0, 0.5))
PT = pm.PotentialSpec(pm.PoschlTeller(1))


def test_default_p_grid():
    p = st.default_p_grid()
    assert p.size == 512 and p[0] == pytest.approx(0.05) and p[-1] == pytest.approx(10)
    assert np.all(np.diff(p) > 0)


def test_weak_barrier_born_limit():
    # r_minus ~ (1 / 2ip) int V exp(2ipx) dx for a weak Gaussian
    V0, al = 1e-3, 0.5
    spec = pm.PotentialSpec(pm.GaussianBarrier(V0, al))
    p = np.array([0.5, 0.75, 1.0])
    amp = st.solve_scattering(spec, p)
    born = V0 * np.sqrt(np.pi) / al * np.exp(-p ** 2 / al ** 2) / (2 * p)
    assert np.abs(amp.r_minus) == pytest.approx(born, rel=0.02)
    assert np.abs(amp.flux_defect()).max() < 1e-9


def test_poschl_teller_is_reflectionless():
    amp = st.solve_scattering(PT, np.linspace(0.2, 5, 25))
    assert np.abs(amp.r_minus).max() < 1e-6
    assert np.abs(np.abs(amp.t) - 1).max() < 1e-6
    # Jost solution exp(ipx) (ip - tanh x) gives t = (ip - 1) / (ip + 1)
    p = amp.p
    assert np.abs(amp.t - (1j * p - 1) / (1j * p + 1)).max() < 1e-6


def test_kk_pole_reflects_only_from_the_right():
    spec = pm.PotentialSpec(pm.SinglePoleKK(10.0, 0.2), pm.SuperGaussian(120))
    amp = st.solve_scattering(spec, np.linspace(0.5, 5, 10))
    assert np.abs(amp.r_minus).max() < 1e-4
    assert np.abs(amp.r_plus).max() > 1e-2


def test_nonpositive_momentum_rejected():
    with pytest.raises(PreconditionError):
        st.solve_scattering(GAUSS, np.array([0.0, 1.0]))


def test_long_range_rejected():
    with pytest.raises(PreconditionError):
        st.solve_scattering(pm.PotentialSpec(pm.SinglePoleKK(1, 1)), np.array([1.0]))


def test_amplitudes_csv_and_interpolation(tmp_path):
    amp = st.solve_scattering(GAUSS, np.linspace(0.5, 3, 160))
    amp.to_csv(tmp_path / "a.csv")
    assert np.loadtxt(tmp_path / "a.csv", delimiter=",", skiprows=1).shape == (160, 7)
    mid = st.solve_scattering(GAUSS, np.array([1.2345]))
    assert amp.interpolate("t", 1.2345) == pytest.approx(mid.t[0], abs=1e-6)


def test_decompose_for_free_space():
    p = np.linspace(0.5, 2, 5)
    free = st.ScatteringAmplitudes(p, np.ones(5, complex), np.zeros(5, complex),
                                   np.zeros(5, complex))
    G0 = lambda k: np.exp(-k ** 2)  # noqa: E731
    G1, G2 = st.decompose_G1_G2(G0, free, d=3.0)
    assert np.allclose(G1, G0(p) * np.exp(3j * p))
    assert np.allclose(G2, G0(-p) * np.exp(-3j * p))


def test_decompose_singular():
    p = np.array([1.0])
    amp = st.ScatteringAmplitudes(p, np.zeros(1, complex), np.zeros(1, complex),
                                  np.zeros(1, complex))
    with pytest.raises(SingularDecompositionError):
        st.decompose_G1_G2(lambda k: k, amp, 1.0)


def test_scattering_state_expansion_matches_split_step():
    g = make_grid(-204.8, 204.8, 4096)
    wf = gaussian_packet(g, 40, 4, 2)
    G = to_momentum(wf)
    pos = g.p_sorted[(g.p_sorted > 0) & (g.p_sorted < 0.5 * g.p_max)]
    with pytest.warns(RuntimeWarning, match="p L < 1"):
        amp = st.solve_scattering(GAUSS, pos)
    t = 20.0
    ref = pr.split_step_evolve(wf, GAUSS, None, 0.005, t).final
    j = np.nonzero((np.abs(g.x) > 10) & (np.abs(g.x) < 150))[0][::7]
    val = st.scattering_state_field(G, amp, g.x[j], t)
    assert np.abs(val - ref.psi[j]).max() < 1e-5 * np.abs(ref.psi).max()


def test_asymptotic_probe_free_law():
    g = make_grid(-409.6, 409.6, 4096)
    wf = gaussian_packet(g, 50, 2, 1)
    G = to_momentum(wf)
    t = np.array([100.0, 150.0])
    amp = st.asymptotic_probe(G, None, -0.4, 50, t)
    assert np.abs(amp[0] / amp[1]) == pytest.approx(np.sqrt(1.5), rel=1e-12)
    with pytest.raises(PreconditionError):
        st.asymptotic_probe(G, None, 0.2, 50, t)
