"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line with the measured quantity and
its tolerance, then asserts.  The heavy scenario runs are shared through
module-scoped fixtures; the whole module takes roughly half an hour on one
core.
"""
import numpy as np
import pytest

from kkwave import diagnostics as dg
from kkwave import forces as fm
from kkwave import potentials as pm
from kkwave import propagators as pr
from kkwave import stationary as st
from kkwave.grid import (gaussian_packet, l2_distance, make_grid, negative_momentum_fraction,
                         norm, split_right_left, to_momentum, from_momentum)
from kkwave.scenarios import run_scenario

ENVELOPED_POLE = pm.PotentialSpec(pm.SinglePoleKK(10.0, 0.2), pm.SuperGaussian(60))
PULSE = fm.CosinePulse(0.25, 40)


@pytest.fixture
def report(capsys):
    def _report(number: int, title: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{number:02d}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, f"{title}: {detail}"
    return _report


# --------------------------------------------------------------------------
# shared runs
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def broadband():
    g = make_grid(-1802.24, 1802.24, 32768)
    return g, gaussian_packet(g, 100, 1.2, 1)


@pytest.fixture(scope="module")
def volkov_runs(broadband):
    g, wf = broadband
    G = to_momentum(wf)
    exact = pr.gordon_volkov_evolve(G, PULSE, 50.0)
    errs, fine = [], None
    for dt in (0.0025, 0.00125):
        tr = pr.split_step_evolve(wf, None, PULSE, dt, 50.0, strobe=[40.0, 45.0, 50.0])
        errs.append(l2_distance(tr.final, exact) / norm(exact))
        fine = tr
    return errs, fine, G


@pytest.fixture(scope="module")
def fig4_summary(tmp_path_factory):
    return run_scenario("fig4", out_dir=tmp_path_factory.mktemp("fig4"))


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------

def test_01_volkov_exactness(volkov_runs, report):
    errs, _, _ = volkov_runs
    ratio = errs[0] / errs[1]
    ok = errs[0] < 1e-6 and 3.5 <= ratio <= 4.5
    report(1, "split-step vs exact Volkov (V=0, F0=0.25, T=40, t=50)", ok,
           f"rel L2 {errs[0]:.3e} (< 1e-6), halving ratio {ratio:.4f} (in [3.5, 4.5])")


def test_02_post_pulse_free_identity(volkov_runs, report):
    _, fine, G = volkov_runs
    phi0 = PULSE.integrals().phi0
    closed = 0.25 ** 2 * 40 ** 3 / (8 * np.pi ** 2)
    worst = 0.0
    for wf in fine.snapshots:
        free = pr.gordon_volkov_evolve(G, None, wf.time)
        dev = np.abs(wf.psi - free.psi * np.exp(-1j * phi0)).max()
        worst = max(worst, dev / np.abs(free.psi).max())
    ok = worst < 1e-6 and abs(phi0 - closed) < 1e-12 * closed
    report(2, "psi = psi_free exp(-i phi0) after the pulse (t = 40, 45, 50)", ok,
           f"max dev / peak {worst:.3e} (< 1e-6), phi0 {phi0:.12g} vs closed form {closed:.12g}")


def test_03_force_induced_transparency(tmp_path, report):
    s = run_scenario("fig1", out_dir=tmp_path)
    ok = (s["transmission_F0"] < 0.1 and s["transmission_tailored"] > 0.9
          and s["density_distance_tailored"] < 0.05)
    report(3, "Gaussian barrier transparency under the tailored force", ok,
           f"F=0 transmitted {s['transmission_F0']:.4f} (< 0.1), tailored "
           f"{s['transmission_tailored']:.4f} (> 0.9), density distance "
           f"{s['density_distance_tailored']:.4f} (< 0.05)")


def test_04_static_kk_reflectionless(fig4_summary, report):
    s = fig4_summary
    i = s["F0"].index(0.0)
    delta, floor = s["delta_max"][i], s["floor"][i]
    report(4, "static enveloped pole, F=0: Delta below 10x the V=0 floor",
           delta < 10 * floor, f"delta_max {delta:.3e}, 10 x floor {10 * floor:.3e}")


def test_05_breakdown_under_forcing(fig4_summary, report):
    s = fig4_summary
    F0, m = s["F0"], s["probe_measure"]
    i0, i25 = F0.index(0.0), F0.index(0.25)
    at_floor = s["delta_max"][i0] < 10 * s["floor"][i0]
    strong = s["delta_max"][i25] >= 100 * s["floor"][i25]
    ok = s["monotone"] and at_floor and strong
    curve = ", ".join(f"{f:g}: {v:.3e}" for f, v in zip(F0, m))
    report(5, "reflection strength vs F0", ok,
           f"curve {{{curve}}} strictly increasing: {s['monotone']}; F0=0 delta "
           f"{s['delta_max'][i0]:.3e} vs 10 x floor {10 * s['floor'][i0]:.3e}; F0=0.25 delta "
           f"{s['delta_max'][i25]:.3e} vs 100 x floor {100 * s['floor'][i25]:.3e}")


@pytest.fixture(scope="module")
def right_moving_runs():
    # bare pole, exactly one-sided; the enveloped one leaks |r-| ~ 5e-9 at p ~ 3
    # and its spectral weight up to q ~ 40 outruns any affordable box
    pole = pm.PotentialSpec(pm.SinglePoleKK(10.0, 1.0))
    g = make_grid(-819.2, 819.2, 16384)
    right, _ = split_right_left(to_momentum(gaussian_packet(g, 100, 5, 3)))
    wf = from_momentum(right)
    t_final = 54.0
    # x_w = d/2 (the bare pole has no finite range), t_w = T + 10
    window = (50.0, 50.0)
    free = pr.Trajectory(g)
    for t in np.arange(1, 109) * 0.5:
        free.append(pr.gordon_volkov_evolve(right, None, t), 0.0)
    out = []
    for F0 in (0.0, 0.25, 0.5):
        force = fm.CosinePulse(F0, 40) if F0 else fm.ZeroForce()
        ss = pr.split_step_evolve(wf, pole, force, 0.0025, t_final, strobe=0.5,
                                  monitor_every=100)
        delta = dg.reflection_indicator(ss, free, force, window).delta_max
        floor = 1e-13 * np.abs(wf.psi).max()
        if F0:
            v0 = pr.split_step_evolve(wf, None, force, 0.0025, t_final, strobe=0.5)
            floor = max(floor, dg.reflection_indicator(v0, free, force, window).delta_max)
        mo = pr.momentum_space_evolve(right, pole, force, 0.005, t_final)
        out.append((F0, ss.metadata["max_negative_fraction"], mo.max_negative_fraction,
                    delta, floor))
    return negative_momentum_fraction(wf), out


def test_06_positive_momentum_theorem(right_moving_runs, report):
    neg0, rows = right_moving_runs
    ok = neg0 < 1e-12
    parts = []
    for F0, n_ss, n_mo, delta, floor in rows:
        ok &= n_ss < 1e-8 and n_mo < 1e-8 and delta < 10 * floor
        parts.append(f"F0={F0:g}: split-step {n_ss:.1e}, momentum {n_mo:.1e}, "
                     f"delta {delta:.1e} / 10 x floor {10 * floor:.1e}")
    report(6, "right-moving packet stays right-moving (< 1e-8), Delta at floor", ok,
           f"initial {neg0:.1e}; " + "; ".join(parts))


def test_07_stationary_amplitudes(report):
    p = np.linspace(0.2, 5, 97)
    kk = st.solve_scattering(ENVELOPED_POLE, p)
    pt = st.solve_scattering(pm.PotentialSpec(pm.PoschlTeller(1)), p)
    gauss = st.solve_scattering(pm.PotentialSpec(pm.GaussianBarrier(10, 0.5)), p)
    rm = np.abs(kk.r_minus).max()
    r_pt = np.abs(pt.r_minus).max()
    t_pt = np.abs(np.abs(pt.t) - 1).max()
    flux = max(np.abs(pt.flux_defect()).max(), np.abs(gauss.flux_defect()).max())
    ok = rm < 1e-4 and r_pt < 1e-6 and t_pt < 1e-6 and flux < 1e-8
    worst_p = p[np.argmax(np.abs(kk.r_minus))]
    report(7, "stationary amplitudes", ok,
           f"enveloped pole max|r_-| {rm:.3e} at p={worst_p:.2f} (< 1e-4); PT |r| {r_pt:.1e}, "
           f"||t|-1| {t_pt:.1e} (< 1e-6); flux defect {flux:.1e} (< 1e-8)")


def test_08_stationary_phase_law(report):
    g = make_grid(-6553.6, 6553.6, 65536)
    G = to_momentum(gaussian_packet(g, 100, 1.2, 1))
    right, _ = split_right_left(G)
    probe = dg.ProbeLine(100, -0.2)
    t = np.arange(200.0, 400.5, 1.0)

    def series(spec):
        vals = [dg.interpolate_field(pr.gordon_volkov_evolve(spec, None, tk), probe.x(tk))[0]
                for tk in t]
        return dg.ProbeSeries(t, np.array(vals))

    full = series(G)
    fit = dg.decay_exponent_fit(full)
    law = np.abs(st.asymptotic_probe(G, None, -0.2, 100, t))
    amp_dev = np.abs(full.modulus / law - 1).max()
    fit_r = dg.decay_exponent_fit(series(right))
    ok = abs(fit.exponent + 0.5) <= 0.05 and amp_dev < 0.05 and fit_r.exponent < -0.75
    report(8, "free decay on x = -100 - 0.2 t, t in [200, 400]", ok,
           f"exponent {fit.exponent:.4f} (-0.5 +- 0.05), max amplitude deviation "
           f"{amp_dev:.2e} (< 5%), right-moving exponent {fit_r.exponent:.3f} (< -0.75)")


def test_09_high_frequency_averaging(tmp_path, report):
    s = run_scenario("averaging", out_dir=tmp_path)
    dist = ", ".join(f"{tau:g}: {d:.3e}" for tau, d in zip(s["taus"], s["l2_distance"]))
    ok = s["monotone"] and s["kk_closure_max"] < 1e-6
    report(9, "driven vs cycle-averaged static run", ok,
           f"L2 by period {{{dist}}} decreasing: {s['monotone']}; averaged-pole one-sidedness "
           f"residual {s['kk_closure_max']:.1e} (< 1e-6)")


def test_10_cross_engine_equivalence(report):
    g = make_grid(-51.2, 51.2, 512)
    wf = gaussian_packet(g, 10, 3, 2)
    G = to_momentum(wf)
    specs = {"gaussian": pm.PotentialSpec(pm.GaussianBarrier(10, 0.5)),
             "pole": pm.PotentialSpec(pm.SinglePoleKK(5, 2.5), pm.SuperGaussian(15)),
             "poschl-teller": pm.PotentialSpec(pm.PoschlTeller(1))}
    worst, where = 0.0, ""
    for name, spec in specs.items():
        for force in (fm.ZeroForce(), fm.CosinePulse(1.0, 3)):
            ss = pr.split_step_evolve(wf, spec, force, 0.0025, 3.0).final
            mo = pr.momentum_space_evolve(G, spec, force, 0.0025, 3.0).field()
            kh = pr.kh_frame_evolve(wf, spec, force, 0.0025, 3.0).final
            d = max(l2_distance(ss, mo), l2_distance(ss, kh), l2_distance(mo, kh))
            if d >= worst:
                worst, where = d, f"{name}, {force!r}"
    report(10, "split-step / momentum-space / accelerated-frame agreement", worst < 1e-4,
           f"max pairwise L2 {worst:.2e} (< 1e-4) at {where}")


def test_11_dilation_engine(tmp_path, report):
    s = run_scenario("appendixB", out_dir=tmp_path)
    ok = (s["max_negative_fraction"] < 1e-10 and s["alpha_zero_difference"] < 1e-12
          and s["characteristics_error"] < 1e-8)
    report(11, "dilation Hamiltonian", ok,
           f"negative-momentum content {s['max_negative_fraction']:.1e} (< 1e-10); alpha=0 vs "
           f"momentum engine {s['alpha_zero_difference']:.1e} (< 1e-12); constant-alpha "
           f"characteristics {s['characteristics_error']:.1e} (< 1e-8)")


def test_12_uniform_force_conditions(report):
    p = -np.linspace(0.25, 5, 32)
    q = np.linspace(0.25, 5, 32)
    h = 0.025
    x = np.arange(-150, 150 + 0.5 * h, h)
    scale = np.sum(np.abs(pm.evaluate(ENVELOPED_POLE, x))) * h
    worst = 0.0
    for t in (5.0, 17.5, 30.0, 40.0):
        m = pr.uniform_force_coupling(ENVELOPED_POLE, PULSE, t, p, q, x)
        worst = max(worst, np.abs(m).max() / scale)
    g = make_grid(-409.6, 409.6, 8192)
    ret = pr.return_condition(PULSE, g, q)
    ok = worst < 1e-10 and ret < 1e-10
    report(12, "uniform-force coupling p<0 <- q>0 and return condition", ok,
           f"max |M| / int|V| {worst:.1e} (< 1e-10); weight on p <= 0 at T {ret:.1e} (< 1e-10)")
