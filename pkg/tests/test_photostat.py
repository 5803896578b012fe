import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavnet import photostat as ps
from cavnet.errors import ConvergenceError, DomainError, InsufficientDataError

TRAIN = ps.PulseTrainSpec(n_pulses=50_000)


def test_single_photon_contract():
    rec = ps.simulate_hbt(TRAIN, seed=3)
    pulse = np.floor(rec.times / TRAIN.rep_period).astype(int)
    assert np.bincount(pulse).max() == 1
    assert len(rec) == TRAIN.n_pulses


@settings(max_examples=10)
@given(st.integers(0, 2 ** 63))
def test_antibunching_any_seed(seed):
    est = ps.measure_g2(ps.PulseTrainSpec(n_pulses=20_000), ps.NO_BACKGROUND, seed)
    assert est.central == 0
    assert est.value == 0.0


def test_poisson_background_only():
    train = ps.PulseTrainSpec(n_pulses=100_000, excitation_prob=0.0)
    bg = ps.BackgroundSpec(mean_photons_per_pulse=0.5)
    est = ps.measure_g2(train, bg, seed=11)
    assert abs(est.value - 1.0) < 3 * est.stderr


def test_correlate_two_events():
    rec = ps.DetectionRecord(np.array([0.0, 5.0]), np.array([ps.D1, ps.D2]))
    hist = ps.correlate(rec, 1.0, 10.0)
    assert hist.total == 1
    assert hist.counts[hist.delays == 5.0][0] == 1
    mirrored = ps.correlate(ps.DetectionRecord(np.array([0.0, 5.0]),
                                               np.array([ps.D2, ps.D1])), 1.0, 10.0)
    assert mirrored.counts[mirrored.delays == -5.0][0] == 1


def test_correlate_needs_two_events():
    with pytest.raises(InsufficientDataError):
        ps.correlate(ps.DetectionRecord(np.array([1.0]), np.array([0])), 1.0, 5.0)


def test_histogram_symmetric_binning():
    hist = ps.correlate(ps.simulate_hbt(TRAIN, seed=1), 0.05, 60.0)
    assert np.allclose(hist.delays, -hist.delays[::-1])
    assert 0.0 in hist.delays


def test_poisson_process_flat_histogram():
    rng = np.random.default_rng(5)
    n = 200_000
    times = np.sort(rng.uniform(0, n * 1.0, n))
    rec = ps.DetectionRecord(times, rng.integers(0, 2, n))
    hist = ps.correlate(rec, 0.5, 20.0)
    expected = hist.counts.mean()
    z = (hist.counts - expected) / np.sqrt(expected)
    assert np.mean(np.abs(z) > 3) < 0.02
    # expected pair density: n1*n2 / T * 2 per unit delay
    n1 = (rec.detectors == 0).sum()
    assert expected == pytest.approx(n1 * (n - n1) / times[-1] * 0.5, rel=0.02)


def test_pulsed_peaks_at_rep_period_multiples():
    hist = ps.correlate(ps.simulate_hbt(TRAIN, seed=2), 0.5, 60.0)
    top = hist.delays[np.argsort(hist.counts)[-8:]]
    k = top / 13.0
    assert np.allclose(k, np.round(k), atol=0.1)
    assert set(np.round(k).astype(int)) <= {-4, -3, -2, -1, 1, 2, 3, 4}


def test_histogram_counts_all_qualifying_pairs():
    rng = np.random.default_rng(9)
    times = np.sort(rng.uniform(0, 200, 300))
    dets = rng.integers(0, 2, 300)
    rec = ps.DetectionRecord(times, dets)
    window = 7.0
    brute = sum(1 for i in range(300) for j in range(i + 1, 300)
                if dets[i] != dets[j] and times[j] - times[i] <= window)
    assert ps.pair_delays(rec, window).size == brute
    # the histogram's outer bins extend half a bin past the window
    edge = window + 0.05
    in_bins = sum(1 for i in range(300) for j in range(i + 1, 300)
                  if dets[i] != dets[j] and times[j] - times[i] < edge)
    assert ps.correlate(rec, 0.1, window).total == in_bins


def test_side_peaks_equal():
    rep = 13.0
    hist = ps.correlate(ps.simulate_hbt(ps.PulseTrainSpec(n_pulses=200_000), seed=4), 0.05,
                        4.5 * rep)
    side = np.array([hist.area(k * rep, rep / 2) for k in (-4, -3, -2, -1, 1, 2, 3, 4)])
    z = (side - side.mean()) / np.sqrt(side.mean())
    assert np.abs(z).max() < 4


def test_g2_zero_requires_side_peaks():
    hist = ps.correlate(ps.simulate_hbt(TRAIN, seed=0), 0.05, 15.0)
    with pytest.raises(InsufficientDataError):
        ps.g2_zero(hist, 13.0)


def test_g2_zero_empty_side_peaks():
    hist = ps.CorrelationHistogram(1.0, np.arange(-60, 61, 1.0), np.zeros(121, dtype=int))
    with pytest.raises(InsufficientDataError):
        ps.g2_zero(hist, 13.0)


def test_determinism():
    bg = ps.BackgroundSpec(0.3, dark_rate=1e5)
    a = ps.simulate_hbt(TRAIN, bg=bg, seed=77)
    b = ps.simulate_hbt(TRAIN, bg=bg, seed=77)
    assert np.array_equal(a.times, b.times) and np.array_equal(a.detectors, b.detectors)
    c = ps.simulate_hbt(TRAIN, bg=bg, seed=78)
    assert not np.array_equal(a.times, c.times)


def test_g2_monotone_in_background():
    train = ps.PulseTrainSpec(n_pulses=100_000)
    ests = [ps.measure_g2(train, ps.BackgroundSpec(mu), seed=21) for mu in
            (0.0, 0.1, 0.2, 0.4, 0.8)]
    for a, b in zip(ests, ests[1:]):
        assert b.value >= a.value - 3 * np.hypot(a.stderr, b.stderr)


def test_g2_matches_poisson_mixture():
    train = ps.PulseTrainSpec(n_pulses=200_000)
    for mu in (0.1, 0.3):
        est = ps.measure_g2(train, ps.BackgroundSpec(mu), seed=8)
        assert abs(est.value - ps.g2_poisson_mixture(mu)) < 4 * est.stderr + 0.01


def test_calibrate_background():
    train = ps.PulseTrainSpec(n_pulses=100_000)
    assert ps.calibrate_background(0.0, train) == 0.0
    mu35 = ps.calibrate_background(0.35, train, seed=1)
    assert mu35 > 0
    check = ps.measure_g2(ps.PulseTrainSpec(n_pulses=300_000), ps.BackgroundSpec(mu35), seed=99)
    assert check.value == pytest.approx(0.35, abs=0.03)
    # closed-form oracle for one photon plus Poisson background: mu = 0.2404
    assert mu35 == pytest.approx(0.2404, rel=0.05)
    mu50 = ps.calibrate_background(0.50, train, seed=1)
    assert mu50 > mu35


def test_calibrate_background_unreachable():
    with pytest.raises(ConvergenceError):
        ps.calibrate_background(0.9, ps.PulseTrainSpec(n_pulses=20_000), upper=0.3)
    with pytest.raises(DomainError):
        ps.calibrate_background(1.2, TRAIN)


def test_filter_pass_fraction():
    bg = ps.BackgroundSpec(1.0, filter_width=20.0, background_width=100.0)
    assert bg.effective_mean == pytest.approx(0.2)
    assert ps.BackgroundSpec(1.0).pass_fraction == 1.0
    with pytest.raises(DomainError):
        ps.BackgroundSpec(1.0, filter_width=20.0)


def test_transfer_count_scaling():
    assert ps.transfer_count_scaling(0.12) == pytest.approx(0.0144)
    assert ps.transfer_count_scaling(1.0) == 1.0
    assert ps.transfer_count_scaling(0.49) == pytest.approx(0.240, abs=5e-4)
    for bad in (0.0, 1.5, -0.1):
        with pytest.raises(DomainError):
            ps.transfer_count_scaling(bad)


def test_pulse_train_validation():
    with pytest.raises(DomainError):
        ps.PulseTrainSpec(rep_period=2.0, pair_separation=2.3)
    with pytest.raises(DomainError):
        ps.PulseTrainSpec(n_pulses=0)


def test_dark_counts_uniform_rate():
    bg = ps.BackgroundSpec(dark_rate=1e6)
    rec = ps.simulate_hbt(ps.PulseTrainSpec(n_pulses=100_000, excitation_prob=0.0), bg=bg, seed=3)
    span = 100_000 * 13e-9
    assert len(rec) == pytest.approx(2 * 1e6 * span, rel=0.05)
