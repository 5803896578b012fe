import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from cavnet import cmt
from cavnet.cmt import Detunings, DriveTerm, NetworkState, ZERO_DETUNING
from cavnet.errors import ConfigurationError, SingularSystemError
from cavnet.netmodel import FITTED_RATES, CouplingRates

rate = st.floats(10.0, 1000.0)
triples = st.builds(CouplingRates, rate, rate, rate)
cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def hand_derivative(c, k_perp, k_par, k_w, p, det=(0, 0, 0), gamma=0.0):
    cs, ct, cw = c
    ds, dt, dw = det
    return np.array([
        -1j * k_par * cw - (k_perp + gamma) * cs + 1j * ds * cs + p,
        -1j * k_par * cw - (k_perp + gamma) * ct + 1j * dt * ct,
        -1j * k_par * cs - 1j * k_par * ct - k_w * cw + 1j * dw * cw,
    ])


def test_derivative_isolated_decay():
    d = cmt.derivative(NetworkState(1.0), CouplingRates(3.0, 0.0, 0.0))
    assert d.as_array() == pytest.approx([-3.0, 0, 0])


def test_derivative_waveguide_feeds_cavities():
    d = cmt.derivative(NetworkState(0, 0, 1.0), CouplingRates(1.0, 2.0, 0.5))
    assert d.c_s == pytest.approx(-2j)
    assert d.c_t == pytest.approx(-2j)


@given(cplx, cplx, cplx, cplx, triples, st.floats(-50, 50), st.floats(-50, 50))
def test_derivative_matches_hand_expression(cs, ct, cw, p, r, ds, dw):
    det = Detunings(ds, -ds, dw)
    got = cmt.derivative(NetworkState(cs, ct, cw), r, det, DriveTerm.constant(p)).as_array()
    want = hand_derivative((cs, ct, cw), r.kappa_perp, r.kappa_par, r.kappa_w, p, (ds, -ds, dw))
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


def test_evolve_isolated_exponential():
    k = 50.0
    r = CouplingRates(k, 0.0, 0.0)
    traj = cmt.evolve(NetworkState(1.0), r, t_end=3 / k, dt=1e-4)
    want = np.exp(-2 * k * traj.times)
    assert np.allclose(traj.intensities()[:, 0], want, rtol=1e-6, atol=0)


def test_evolve_matches_generic_integrator():
    r = CouplingRates(120.0, 80.0, 60.0, 5.0)
    det = Detunings(10.0, -20.0, 5.0)
    drive = DriveTerm.harmonic(0.7 + 0.2j, 30.0)
    traj = cmt.evolve(NetworkState(0.3j, 0.1, 0), r, det, drive, t_end=0.05, dt=2e-5)

    def rhs(t, y):
        c = y[:3] + 1j * y[3:]
        d = hand_derivative(c, r.kappa_perp, r.kappa_par, r.kappa_w, drive.value(t),
                            det.as_array(), r.gamma_mat)
        return np.r_[d.real, d.imag]

    y0 = np.r_[[0, 0.1, 0], [0.3, 0, 0]]
    sol = solve_ivp(rhs, (0, 0.05), y0, method="DOP853", rtol=1e-12, atol=1e-14,
                    t_eval=traj.times[::100])
    ref = (sol.y[:3] + 1j * sol.y[3:]).T
    assert np.abs(traj.amplitudes[::100] - ref).max() < 1e-8


def test_evolve_constant_drive_reaches_steady_state():
    drive = DriveTerm.constant(1.0)
    traj = cmt.evolve(NetworkState(), FITTED_RATES, drive=drive, t_end=0.3, dt=5e-5,
                      record_every=1000)
    target = cmt.steady_state(FITTED_RATES, drive=drive).as_array()
    assert np.abs(traj.final.as_array() - target).max() < 1e-6 * np.abs(target).max()


@given(triples, st.integers(0, 2 ** 32 - 1))
def test_energy_bookkeeping(r, seed):
    y0 = np.random.default_rng(seed).normal(size=6)
    y0 = (y0[:3] + 1j * y0[3:]) / np.linalg.norm(y0)
    dt = 0.04 / r.max_rate
    traj = cmt.evolve(NetworkState.from_array(y0), r, t_end=1.0 / min(r.kappa_perp, r.kappa_w),
                      dt=dt, record_every=50)
    total = traj.stored() + traj.emitted()
    assert np.abs(total - 1.0).max() < 1e-4
    assert np.all(np.diff(traj.stored()) <= 1e-12)  # passivity
    for v in traj.channels.values():
        assert np.all(np.diff(v) >= -1e-15)


def test_stability_guard():
    with pytest.raises(ConfigurationError):
        cmt.evolve(NetworkState(1.0), FITTED_RATES, t_end=0.01, dt=1e-3)


def test_trajectory_times_strictly_increasing():
    traj = cmt.evolve(NetworkState(1.0), FITTED_RATES, t_end=0.01, dt=5e-5, record_every=7)
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[-1] == pytest.approx(0.01)


def test_steady_state_fitted_ratio():
    ss = cmt.steady_state(FITTED_RATES)
    assert abs(ss.c_s / ss.c_t) == pytest.approx(1 + 455 * 322 / 283 ** 2, rel=1e-12)
    assert abs(ss.c_s / ss.c_t) == pytest.approx(2.829, abs=5e-4)


def test_steady_state_lossless_waveguide():
    ss = cmt.steady_state(CouplingRates(100.0, 50.0, 0.0))
    assert abs(ss.c_s / ss.c_t) == pytest.approx(1.0, abs=1e-12)


def test_steady_state_singular():
    with pytest.raises(SingularSystemError):
        cmt.steady_state(CouplingRates(0.0, 10.0, 0.0))


@given(triples)
def test_steady_state_matches_time_domain(r):
    drive = DriveTerm.constant(1.0)
    slowest = (-np.linalg.eigvals(cmt.system_matrix(r)).real).min()
    traj = cmt.evolve(NetworkState(), r, drive=drive, t_end=20 / min(r.kappa_perp, r.kappa_w,
                                                                     r.kappa_par) + 25 / slowest,
                      dt=0.04 / r.max_rate, record_every=10 ** 9)
    target = cmt.steady_state(r, drive=drive).as_array()
    assert np.abs(traj.final.as_array() - target).max() <= 1e-5 * np.abs(target).max()


def test_harmonic_steady_state_rotates():
    drive = DriveTerm.harmonic(1.0, 40.0)
    r = CouplingRates(200.0, 100.0, 150.0)
    traj = cmt.evolve(NetworkState(), r, drive=drive, t_end=0.3, dt=5e-5, record_every=10 ** 9)
    env = cmt.steady_state(r, drive=drive).as_array()
    assert np.allclose(traj.final.as_array(), env * np.exp(1j * 40.0 * traj.times[-1]),
                       atol=1e-9)


def test_transfer_ratio_fitted_triple():
    tr = cmt.transfer_ratio(FITTED_RATES)
    assert tr.intensity_ratio == pytest.approx(0.125, abs=1e-3)
    one = cmt.transfer_ratio(CouplingRates(0.0, 200.0, 300.0))
    assert one.field_ratio == 1.0 and one.intensity_ratio == 1.0
    with pytest.raises(SingularSystemError):
        cmt.transfer_ratio(CouplingRates(1.0, 0.0, 1.0))


def test_transfer_ratio_increases_with_kappa_par():
    ratios = [cmt.transfer_ratio(CouplingRates(455.0, k, 322.0)).intensity_ratio
              for k in np.geomspace(1, 1e5, 60)]
    assert np.all(np.diff(ratios) > 0)
    assert ratios[-1] == pytest.approx(1.0, abs=1e-4)


@given(triples, st.floats(0, 50))
def test_transfer_ratio_matches_steady_state(r, gamma):
    r = CouplingRates(r.kappa_perp, r.kappa_par, r.kappa_w, gamma)
    ss = cmt.steady_state(r)
    assert abs(ss.c_t / ss.c_s) ** 2 == pytest.approx(cmt.transfer_ratio(r).intensity_ratio,
                                                      rel=1e-10)


def test_frequency_response_lorentzian():
    k = 80.0
    probe = np.linspace(-2000, 2000, 400001)
    resp = cmt.frequency_response(CouplingRates(k, 0.0, 10.0), probe=probe)
    assert cmt.fwhm(probe, resp["s"]) == pytest.approx(2 * k, rel=0.005)


def test_frequency_response_zero_probe_and_transfer():
    resp = cmt.frequency_response(FITTED_RATES, probe=np.array([0.0]))
    ss = cmt.steady_state(FITTED_RATES)
    assert resp["s"][0] == pytest.approx(abs(ss.c_s) ** 2, rel=1e-12)
    assert resp["t"][0] / resp["s"][0] == pytest.approx(0.125, abs=1e-3)


@given(cplx.filter(lambda z: abs(z) > 1e-3))
def test_linearity(a):
    r = CouplingRates(100.0, 60.0, 80.0)
    one = cmt.evolve(NetworkState(), r, drive=DriveTerm.constant(1.0), t_end=0.01, dt=1e-4)
    scaled = cmt.evolve(NetworkState(), r, drive=DriveTerm.constant(a), t_end=0.01, dt=1e-4)
    assert np.allclose(scaled.amplitudes, a * one.amplitudes, rtol=1e-10, atol=1e-14)


@given(triples, cplx, cplx)
def test_symmetry_under_source_target_swap(r, a, b):
    fwd = cmt.evolve(NetworkState(a, b, 0), r, t_end=0.005, dt=0.04 / r.max_rate,
                     record_every=20)
    rev = cmt.evolve(NetworkState(b, a, 0), r, t_end=0.005, dt=0.04 / r.max_rate,
                     record_every=20)
    assert np.allclose(fwd.amplitudes[:, [1, 0, 2]], rev.amplitudes, atol=1e-12)
    probe = np.linspace(-500, 500, 11)
    s = cmt.response_amplitudes(r, ZERO_DETUNING, probe, "s")
    t = cmt.response_amplitudes(r, ZERO_DETUNING, probe, "t")
    assert np.allclose(s[:, [1, 0, 2]], t, atol=1e-14)
