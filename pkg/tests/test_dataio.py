import numpy as np
import pytest

from cavnet import cmt, dataio, hom, photostat, specfit
from cavnet.cmt import NetworkState
from cavnet.errors import DomainError
from cavnet.netmodel import FITTED_RATES


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "sub" / "a.csv"
    dataio.atomic_write(target, "one\n")
    dataio.atomic_write(target, "two\n")
    assert target.read_text() == "two\n"
    assert [p.name for p in target.parent.iterdir()] == ["a.csv"]


def test_header_and_rendering():
    text = dataio.render_table(["x", "y"], [[1, 0.5], [2, 1 / 3]],
                               dataio.header_lines("0.1.0", "abc", 7))
    lines = text.splitlines()
    assert lines[:3] == ["# tool = cavnet 0.1.0", "# config_sha256 = abc", "# seed = 7"]
    assert lines[3] == "x,y"
    assert lines[5] == "2,0.333333333333"


def test_long_format():
    text = dataio.render_table(["t", "a", "b"], [[0.0, 1.0, 2.0]], fmt="long")
    assert text.splitlines() == ["t,variable,value", "0,a,1", "0,b,2"]


def test_trajectory_columns():
    traj = cmt.evolve(NetworkState(1.0), FITTED_RATES, t_end=0.001, dt=5e-5)
    cols, data = dataio.trajectory_table(traj)
    assert cols[:4] == ["time_ns", "c_s_re", "c_s_im", "c_s_intensity"]
    assert data.shape == (len(traj), len(cols))
    assert np.allclose(data[:, 3], np.abs(traj.amplitudes[:, 0]) ** 2)


def test_spectra_table():
    probe = np.linspace(-100, 100, 5)
    cols, data = dataio.spectra_table(FITTED_RATES, cmt.ZERO_DETUNING, probe)
    assert cols[0] == "detuning_ghz" and cols[-1] == "c_w_intensity"
    assert data.shape == (5, 10)


def test_spectrum_set_round_trip(tmp_path):
    data = specfit.synthesize_spectra(FITTED_RATES, grid=np.linspace(-500, 500, 101))
    cols, table = dataio.spectrum_set_table(data)
    path = dataio.write_table(tmp_path / "s.csv", cols, table)
    back = dataio.read_spectrum_set(path)
    assert list(back.curves) == list(data.curves)
    for k in data.curves:
        assert np.allclose(back.curves[k], data.curves[k], rtol=1e-11)


def test_detection_record_round_trip(tmp_path):
    rec = photostat.simulate_hbt(photostat.PulseTrainSpec(n_pulses=200), seed=1)
    path = dataio.write_table(tmp_path / "e.csv", ["time_ns", "detector"],
                              dataio.record_rows(rec))
    back = dataio.read_detection_record(path)
    assert np.allclose(back.times, rec.times, rtol=1e-11)
    assert np.array_equal(back.detectors, rec.detectors)


def test_histogram_and_cluster_round_trip(tmp_path):
    hist = photostat.correlate(photostat.simulate_hbt(photostat.PulseTrainSpec(n_pulses=2000),
                                                      seed=2), 0.5, 30.0)
    path = dataio.write_table(tmp_path / "h.csv", ["delay_ns", "counts"],
                              dataio.histogram_rows(hist))
    back = dataio.read_histogram(path)
    assert np.array_equal(back.counts, hist.counts)
    assert back.bin_width == pytest.approx(0.5)
    cluster = hom.analytic_cluster(0.5, hom.InterferometerSpec())
    path = dataio.write_table(tmp_path / "c.csv", ["delay_ns", "area", "stderr"],
                              hom.cluster_rows(cluster))
    assert np.allclose(dataio.read_cluster(path).areas, cluster.areas)


def test_bad_files(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("# only a comment\n")
    with pytest.raises(DomainError):
        dataio.read_table(p)
    p.write_text("time_ns,detector\n1.0,D3\n")
    with pytest.raises(DomainError):
        dataio.read_detection_record(p)
    p.write_text("detuning_ghz,QQ\n0,1\n")
    with pytest.raises(DomainError):
        dataio.read_spectrum_set(p)
