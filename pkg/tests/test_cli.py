import re
import textwrap

import pytest

from cavnet import cli


def _write(tmp_path, body, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body))
    return path


def _run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_steady_state_summary(tmp_path, capsys):
    cfg = _write(tmp_path, """
        [scenario]
        kind = "steady-state"
        [network]
        kappa_perp_ghz = 455.0
        kappa_par_ghz = 283.0
        kappa_w_ghz = 322.0
        """)
    code, out, _ = _run(["run", cfg, "--out-dir", tmp_path / "o"], capsys)
    assert code == 0
    assert "intensity_ratio=0.125" in out
    head = (tmp_path / "o" / "spectra.csv").read_text().splitlines()[:3]
    assert head[0].startswith("# tool = cavnet")
    assert head[1].startswith("# config_sha256 = ")
    assert head[2] == "# seed = none"


def test_g2_no_background(tmp_path, capsys):
    cfg = _write(tmp_path, """
        [scenario]
        kind = "g2"
        seed = 5
        [g2]
        n_pulses = 50000
        """)
    code, out, _ = _run(["run", cfg, "--out-dir", tmp_path / "o"], capsys)
    assert code == 0 and "g2_zero=0.000" in out


def test_hom_summary(tmp_path, capsys):
    cfg = _write(tmp_path, """
        [scenario]
        kind = "hom"
        [hom]
        n_reps = 1000000
        overlap = 0.67
        visibility = 0.88
        """)
    code, out, _ = _run(["run", cfg, "--seed", 99, "--out-dir", tmp_path / "o"], capsys)
    assert code == 0
    est = float(re.search(r"overlap_est=([0-9.]+)", out).group(1))
    assert abs(est - 0.67) <= 0.05
    assert (tmp_path / "o" / "cluster.csv").exists()
    assert "visibility_exponent" in (tmp_path / "o" / "hom_report.txt").read_text()


def test_byte_identical_reruns(tmp_path, capsys):
    cfg = _write(tmp_path, """
        [scenario]
        kind = "fit"
        seed = 3
        [fit]
        noise_sigma = 0.05
        guess_kappa_perp_ghz = 500.0
        """)
    for d in ("a", "b"):
        assert _run(["run", cfg, "--out-dir", tmp_path / d, "--format", "long"], capsys)[0] == 0
    for name in ("spectra_fit.csv", "fit_report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "spectra_fit.csv").read_text().splitlines()[4] == \
        "detuning_ghz,variable,value"


@pytest.mark.parametrize("kind", ["evolve", "exciton", "drop-filter", "preset-report"])
def test_other_kinds_run(tmp_path, capsys, kind):
    cfg = _write(tmp_path, f"""
        [scenario]
        kind = "{kind}"
        [network]
        preset = "system1"
        """)
    code, out, err = _run(["run", cfg, "--out-dir", tmp_path / "o"], capsys)
    assert code == 0, err
    assert out.startswith(kind)


@pytest.mark.parametrize("body,fragment", [
    ('[scenario]\nkind = "g2"\nseed = 1\n[g2]\nn_pulse = 3\n', "n_pulse"),
    ('[scenario]\nkind = "g2\n', "line 2"),
    ('[scenario]\nkind = "g2"\n', "seed"),
    ('[scenario]\nkind = "warp"\n', "kind"),
    ('[scenario]\nkind = "evolve"\n[network]\nkappa_perp_ghz = "x"\n', "kappa_perp_ghz"),
    ('[scenario]\nkind = "evolve"\n[network]\npreset = "nope"\n', "nope"),
    ('[scenario]\nkind = "evolve"\n[g2]\nseed = 1\n', "exactly one"),
])
def test_validation_errors_exit_2(tmp_path, capsys, body, fragment):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(body)
    code, _, err = _run(["run", cfg, "--out-dir", tmp_path / "o"], capsys)
    assert code == 2
    assert fragment in err


def test_unreadable_config(tmp_path, capsys):
    assert _run(["run", tmp_path / "missing.toml"], capsys)[0] == 2


def test_convergence_error_exit_3(tmp_path, capsys):
    cfg = _write(tmp_path, """
        [scenario]
        kind = "g2"
        seed = 1
        [g2]
        n_pulses = 20000
        calibrate_target = 0.99
        """)
    assert _run(["run", cfg, "--out-dir", tmp_path / "o"], capsys)[0] == 3


def test_fit_not_converged_exit_3(tmp_path, capsys):
    cfg = _write(tmp_path, """
        [scenario]
        kind = "fit"
        [fit]
        max_iter = 1
        guess_kappa_perp_ghz = 700.0
        """)
    code, out, _ = _run(["run", cfg, "--out-dir", tmp_path / "o"], capsys)
    assert code == 3 and "converged=false" in out


def test_reproduce_paper_subset(capsys):
    code, out, _ = _run(["reproduce-paper", "--only", "1,2,3,8"], capsys)
    assert code == 0
    assert out.count("PASS") == 6


def test_reproduce_paper_detects_corrupted_kappa_par(capsys):
    code, out, _ = _run(["reproduce-paper", "--only", "1", "--kappa-par", 141.5], capsys)
    assert code != 0
    assert "FAIL    intensity ratio, closed form" in out


def test_reproduce_paper_empty_list(capsys):
    assert _run(["reproduce-paper", "--only", ""], capsys)[0] == 2
    assert _run(["reproduce-paper", "--only", "42"], capsys)[0] == 2


def test_preset_commands(capsys):
    code, out, _ = _run(["preset", "list"], capsys)
    assert code == 0 and "system1" in out and "theoretical" in out
    code, out, _ = _run(["preset", "show", "system1"], capsys)
    assert code == 0 and "g0_ghz = 50.0" in out
    assert _run(["preset", "show", "nope"], capsys)[0] == 2
