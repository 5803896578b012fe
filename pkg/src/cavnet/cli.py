"""Command-line scenario runner.

    cavnet run scenario.toml [--seed N] [--out-dir DIR] [--format csv|long]
    cavnet reproduce-paper [--only 1,4,7] [--kappa-par 141.5]
    cavnet preset list
    cavnet preset show system1

Exit status: 0 success, 1 a reproduction row failed, 2 invalid configuration,
3 convergence failure or insufficient data.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__, checks, cmt, dataio, emitter, hom, netmodel, photostat, specfit
from .cmt import Detunings, DriveTerm, NetworkState
from .errors import CavnetError, ConvergenceError, InsufficientDataError
from .netmodel import GHZ, CouplingRates

CONFIG_SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAILED_ROW, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
STOCHASTIC = {"g2", "hom"}

_NUM = (int, float)
NETWORK_KEYS = {
    "preset": (str, "fitted"),
    "kappa_perp_ghz": (_NUM, None), "kappa_par_ghz": (_NUM, None),
    "kappa_w_ghz": (_NUM, None), "gamma_mat_ghz": (_NUM, None),
    "g0_ghz": (_NUM, None), "gamma_ghz": (_NUM, None), "tau_bulk_ns": (_NUM, None),
    "f_pc": (_NUM, None), "rise_time_ps": (_NUM, None),
}
DETUNING_KEYS = {f"delta_{m}_ghz": (_NUM, 0.0) for m in "stw"}
BACKGROUND_KEYS = {
    "background_mean": (_NUM, 0.0), "background_decay_ps": (_NUM, 100.0),
    "dark_rate_hz": (_NUM, 0.0), "filter_width_ghz": (_NUM, None),
    "background_width_ghz": (_NUM, None),
}
KIND_KEYS = {
    "steady-state": {
        "drive_amplitude": (_NUM, 1.0), "probe_span_ghz": (_NUM, None),
        "n_points": (int, 2001), "pump": (str, "s"),
    },
    "evolve": {
        "t_end_ns": (_NUM, 0.02), "dt_ns": (_NUM, None), "record_every": (int, 1),
        "drive": (str, "none"), "drive_amplitude": (_NUM, 1.0),
        "drive_detuning_ghz": (_NUM, 0.0),
        "c_s_re": (_NUM, 1.0), "c_s_im": (_NUM, 0.0), "c_t_re": (_NUM, 0.0),
        "c_t_im": (_NUM, 0.0), "c_w_re": (_NUM, 0.0), "c_w_im": (_NUM, 0.0),
    },
    "exciton": {
        "t_end_ns": (_NUM, 0.5), "dt_ns": (_NUM, 2e-5), "record_every": (int, 10),
        "noncavity": (bool, True), "fit_from_ns": (_NUM, 0.02), "fit_to_ns": (_NUM, 0.3),
    },
    "g2": {
        "n_pulses": (int, 100_000), "rep_period_ns": (_NUM, 13.0),
        "excitation_prob": (_NUM, 1.0), "lifetime_ps": (_NUM, 116.0),
        "bin_width_ns": (_NUM, 0.05), "n_side": (int, 4),
        "calibrate_target": (_NUM, None), "write_events": (bool, False),
        **BACKGROUND_KEYS,
    },
    "hom": {
        "n_reps": (int, 100_000), "rep_period_ns": (_NUM, 13.0),
        "path_delay_ns": (_NUM, 2.3), "overlap": (_NUM, 0.67), "visibility": (_NUM, 0.88),
        "splitter_ratio": (_NUM, 0.5), "dark_fraction": (_NUM, 0.0),
        "excitation_prob": (_NUM, 1.0), "lifetime_ps": (_NUM, 116.0),
        "g2_correction": (_NUM, 0.0), "bin_width_ns": (_NUM, 0.05),
        **BACKGROUND_KEYS,
    },
    "fit": {
        "spectra_csv": (str, None), "configurations": (list, list(specfit.DEFAULT_FIT_CURVES)),
        "noise_sigma": (_NUM, 0.0), "guess_kappa_perp_ghz": (_NUM, None),
        "guess_kappa_par_ghz": (_NUM, None), "guess_kappa_w_ghz": (_NUM, None),
        "fit_gamma": (bool, False), "weighting": (str, "relative"), "max_iter": (int, 200),
    },
    "drop-filter": {"bandwidth_ghz": (_NUM, None), "n_points": (int, 20001)},
    "preset-report": {"presets": (list, list(netmodel.PROVENANCES[:4]))},
}
SCENARIO_KEYS = {
    "schema_version": (int, CONFIG_SCHEMA_VERSION), "kind": (str, None),
    "seed": (int, None), "output_dir": (str, None),
}


class ConfigError(ValueError):
    """Invalid scenario configuration; exit status 2."""


@dataclass
class ScenarioConfig:
    kind: str
    seed: int | None
    output_dir: Path
    network: dict
    detunings: dict
    params: dict
    source_hash: str

    @property
    def rates(self) -> CouplingRates:
        return _network(self.network)[0]


def _check_block(block: dict, schema: dict, where: str) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = sorted(set(block) - set(schema))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed {sorted(schema)}")
    out = {}
    for key, (typ, default) in schema.items():
        if key not in block:
            out[key] = default
            continue
        value = block[key]
        ok = isinstance(value, typ) and not (typ is not bool and isinstance(value, bool))
        if typ is bool:
            ok = isinstance(value, bool)
        if not ok:
            name = "number" if typ is _NUM else typ.__name__
            raise ConfigError(f"{where}.{key}: expected {name}, got {value!r}")
        if typ is _NUM and not math.isfinite(value):
            raise ConfigError(f"{where}.{key}: must be finite")
        out[key] = value
    return out


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    allowed = {"scenario", "network", "detunings", *KIND_KEYS}
    stray = sorted(set(doc) - allowed)
    if stray:
        raise ConfigError(f"{source}: unknown top-level table(s) {stray}")
    scen = _check_block(doc.get("scenario", {}), SCENARIO_KEYS, f"{source}: [scenario]")
    if scen["schema_version"] != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"{source}: [scenario].schema_version must be {CONFIG_SCHEMA_VERSION}")
    kind = scen["kind"]
    if kind not in KIND_KEYS:
        raise ConfigError(f"{source}: [scenario].kind must be one of {sorted(KIND_KEYS)}, "
                          f"got {kind!r}")
    others = sorted(k for k in KIND_KEYS if k in doc and k != kind)
    if others:
        raise ConfigError(f"{source}: exactly one scenario block allowed; found {others}")
    cfg = ScenarioConfig(
        kind=kind,
        seed=scen["seed"],
        output_dir=Path(scen["output_dir"] or "out"),
        network=_check_block(doc.get("network", {}), NETWORK_KEYS, f"{source}: [network]"),
        detunings=_check_block(doc.get("detunings", {}), DETUNING_KEYS, f"{source}: [detunings]"),
        params=_check_block(doc.get(kind, {}), KIND_KEYS[kind], f"{source}: [{kind}]"),
        source_hash=dataio.config_hash(text),
    )
    try:
        _network(cfg.network)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{source}: [network]: {exc}") from None
    if cfg.seed is not None and not 0 <= cfg.seed < 2 ** 64:
        raise ConfigError(f"{source}: [scenario].seed must be a 64-bit unsigned integer")
    return cfg


def _network(block: dict):
    preset = netmodel.load_preset(block["preset"])
    r, e = preset.rates, preset.emitter
    rate_keys = {"kappa_perp": "kappa_perp_ghz", "kappa_par": "kappa_par_ghz",
                 "kappa_w": "kappa_w_ghz", "gamma_mat": "gamma_mat_ghz"}
    r = replace(r, **{f: block[k] * GHZ for f, k in rate_keys.items() if block[k] is not None})
    emit_keys = {"g0": ("g0_ghz", GHZ), "gamma_emitter": ("gamma_ghz", GHZ),
                 "tau_bulk": ("tau_bulk_ns", 1.0), "f_pc": ("f_pc", 1.0),
                 "rise_time": ("rise_time_ps", 1.0)}
    e = replace(e, **{f: block[k] * u for f, (k, u) in emit_keys.items() if block[k] is not None})
    return r, e, preset


def _detunings(block: dict) -> Detunings:
    return Detunings(*(block[f"delta_{m}_ghz"] * GHZ for m in "stw"))


def _background(p: dict) -> photostat.BackgroundSpec:
    return photostat.BackgroundSpec(
        mean_photons_per_pulse=p["background_mean"], decay_time=p["background_decay_ps"],
        dark_rate=p["dark_rate_hz"], filter_width=p["filter_width_ghz"],
        background_width=p["background_width_ghz"])


class Outputs:
    """Collects files for one run; everything is written atomically at the end."""

    def __init__(self, cfg: ScenarioConfig, fmt: str):
        self.cfg = cfg
        self.fmt = fmt
        self.files: dict[str, str] = {}

    def header(self, **extra):
        return dataio.header_lines(__version__, self.cfg.source_hash, self.cfg.seed,
                                   scenario=self.cfg.kind, **extra)

    def table(self, name: str, columns, rows, **extra):
        self.files[name] = dataio.render_table(columns, rows, self.header(**extra), self.fmt)

    def text(self, name: str, body: str):
        self.files[name] = "".join(f"# {h}\n" for h in self.header()) + body

    def commit(self) -> list[Path]:
        return [dataio.atomic_write(self.cfg.output_dir / n, t) for n, t in self.files.items()]


def _fmt(x: float) -> str:
    return f"{x:.3f}" if abs(x) >= 1e-3 or x == 0 else f"{x:.3e}"


def run_steady_state(cfg, out):
    p = cfg.params
    rates, det = cfg.rates, _detunings(cfg.detunings)
    drive = DriveTerm.constant(p["drive_amplitude"])
    state = cmt.steady_state(rates, det, drive)
    cols = ["quantity"] + [f"c_{m}_{part}" for m in cmt.MODES for part in ("re", "im", "intensity")]
    vals = []
    for c in (state.c_s, state.c_t, state.c_w):
        vals += [c.real, c.imag, abs(c) ** 2]
    out.table("steady_state.csv", cols, [["steady_state", *vals]])
    span = p["probe_span_ghz"] or float(np.ptp(specfit.default_grid(rates, det))) / 2
    probe = np.linspace(-span, span, p["n_points"])
    cols, data = dataio.spectra_table(rates, det, probe, p["pump"])
    out.table("spectra.csv", cols, data, pump=p["pump"])
    ratio = abs(state.c_t) ** 2 / abs(state.c_s) ** 2 if state.c_s != 0 else float("nan")
    line = f"intensity_ratio={ratio:.3f}"
    if rates.kappa_par > 0:
        line += f" field_ratio_closed_form={cmt.transfer_ratio(rates).field_ratio:.4f}"
    return line


def run_evolve(cfg, out):
    p = cfg.params
    rates, det = cfg.rates, _detunings(cfg.detunings)
    kinds = {"none": DriveTerm(), "constant": DriveTerm.constant(p["drive_amplitude"]),
             "harmonic": DriveTerm.harmonic(p["drive_amplitude"],
                                            p["drive_detuning_ghz"] * GHZ)}
    if p["drive"] not in kinds:
        raise ConfigError(f"[evolve].drive must be one of {sorted(kinds)}")
    drive = kinds[p["drive"]]
    init = NetworkState(complex(p["c_s_re"], p["c_s_im"]), complex(p["c_t_re"], p["c_t_im"]),
                        complex(p["c_w_re"], p["c_w_im"]))
    dt = p["dt_ns"] or 0.8 * cmt.STABILITY_LIMIT / cmt.max_rate(rates, det, drive)
    traj = cmt.evolve(init, rates, det, drive, p["t_end_ns"], dt, p["record_every"])
    cols, data = dataio.trajectory_table(traj)
    out.table("trajectory.csv", cols, data, dt_ns=f"{traj.meta['dt']:.12g}")
    fin = traj.final
    return (f"final_stored={_fmt(traj.stored()[-1])} emitted={_fmt(traj.emitted()[-1])} "
            f"final_t_over_s={_fmt(abs(fin.c_t) ** 2 / abs(fin.c_s) ** 2) if fin.c_s else 'nan'}")


def run_exciton(cfg, out):
    p = cfg.params
    rates, spec, _ = _network(cfg.network)
    det = _detunings(cfg.detunings)
    sim = emitter.noncavity(spec) if p["noncavity"] else spec
    traj = emitter.evolve_exciton(sim, rates, p["t_end_ns"], p["dt_ns"], det,
                                  record_every=p["record_every"])
    cols, data = dataio.trajectory_table(traj)
    out.table("trajectory.csv", cols, data, gamma_used_ghz=f"{sim.gamma_emitter:.12g}")
    pop = np.abs(traj.exciton) ** 2
    regime = emitter.classify_regime(spec, rates)
    try:
        rate = emitter.fit_decay_rate(traj.times, pop, p["fit_from_ns"], p["fit_to_ns"])
        rate_txt = f"{rate:.3f}"
    except ValueError:
        rate_txt = "nan"
    return f"regime={regime} decay_rate_ghz={rate_txt} final_population={_fmt(pop[-1])}"


def _need_seed(cfg):
    if cfg.seed is None:
        raise ConfigError(f"scenario kind {cfg.kind!r} is stochastic: set [scenario].seed or --seed")


def run_g2(cfg, out):
    _need_seed(cfg)
    p = cfg.params
    _, spec, _ = _network(cfg.network)
    train = photostat.PulseTrainSpec(rep_period=p["rep_period_ns"], n_pulses=p["n_pulses"],
                                     excitation_prob=p["excitation_prob"])
    bg = _background(p)
    extra = ""
    if p["calibrate_target"] is not None:
        mu = photostat.calibrate_background(p["calibrate_target"], train, bg, cfg.seed,
                                            p["lifetime_ps"], spec.rise_time)
        bg = replace(bg, mean_photons_per_pulse=mu)
        extra = f" calibrated_background={mu:.4f}"
    record = photostat.simulate_hbt(train, p["lifetime_ps"], spec.rise_time, bg, cfg.seed)
    window = (p["n_side"] + 0.5) * train.rep_period
    hist = photostat.correlate(record, p["bin_width_ns"], window)
    est = photostat.g2_zero(hist, train.rep_period)
    out.table("histogram.csv", ["delay_ns", "counts"], dataio.histogram_rows(hist))
    if p["write_events"]:
        out.table("events.csv", ["time_ns", "detector"], dataio.record_rows(record))
    return (f"g2_zero={est.value:.3f} stderr={est.stderr:.3f} central={est.central} "
            f"side_mean={est.side_mean:.1f}{extra}")


def run_hom(cfg, out):
    _need_seed(cfg)
    p = cfg.params
    _, spec_e, _ = _network(cfg.network)
    spec = hom.InterferometerSpec(p["path_delay_ns"], p["visibility"], p["splitter_ratio"],
                                  p["dark_fraction"])
    train = photostat.PulseTrainSpec(rep_period=p["rep_period_ns"],
                                     pair_separation=p["path_delay_ns"], n_pulses=p["n_reps"],
                                     excitation_prob=p["excitation_prob"])
    record = hom.simulate_hom(train, p["overlap"], spec, p["lifetime_ps"], spec_e.rise_time,
                              _background(p), cfg.seed)
    hist = photostat.correlate(record, p["bin_width_ns"], 2.5 * spec.path_delay)
    cluster = hom.HomCluster.from_histogram(hist, spec.path_delay)
    est = hom.estimate_overlap(cluster, spec, p["g2_correction"])
    out.table("cluster.csv", ["delay_ns", "area", "stderr"], hom.cluster_rows(cluster))
    out.table("histogram.csv", ["delay_ns", "counts"], dataio.histogram_rows(hist))
    out.text("hom_report.txt", est.report())
    return (f"overlap_est={est.overlap:.3f} stderr={est.stderr:.3f} "
            f"injected={p['overlap']:.3f} clamped={str(est.clamped).lower()}")


def run_fit(cfg, out):
    p = cfg.params
    truth = cfg.rates
    det = _detunings(cfg.detunings)
    labels = p["configurations"]
    bad = [c for c in labels if c not in specfit.CONFIGURATIONS]
    if bad:
        raise ConfigError(f"[fit].configurations: unknown labels {bad}")
    if p["spectra_csv"]:
        data = dataio.read_spectrum_set(p["spectra_csv"])
        missing = [c for c in labels if c not in data.curves]
        if missing:
            raise ConfigError(f"[fit].spectra_csv lacks curves {missing}")
    else:
        if p["noise_sigma"] > 0:
            _need_seed(cfg)
        data = specfit.synthesize_spectra(truth, det, tuple(labels), p["noise_sigma"],
                                          cfg.seed or 0)
    if len(labels) < 1:
        raise ConfigError("[fit].configurations is empty")
    guess = CouplingRates(
        (p["guess_kappa_perp_ghz"] or truth.kappa_perp) * GHZ,
        (p["guess_kappa_par_ghz"] or truth.kappa_par) * GHZ,
        (p["guess_kappa_w_ghz"] or truth.kappa_w) * GHZ, truth.gamma_mat)
    res = specfit.fit_rates(data, guess, det, labels, p["fit_gamma"], p["max_iter"],
                            p["weighting"])
    cols, table = dataio.spectrum_set_table(data)
    model = specfit.model_curves(res.rates, res.detunings, data.grid, labels)
    cols = cols + [f"model_{k}" for k in labels]
    table = np.column_stack([table] + [model[k] * res.scales[k] for k in labels])
    out.table("spectra_fit.csv", cols, table)
    out.text("fit_report.txt", res.report())
    line = (f"kappa_perp={res.rates.kappa_perp:.2f} kappa_par={res.rates.kappa_par:.2f} "
            f"kappa_w={res.rates.kappa_w:.2f} residual={res.residual_norm:.3e} "
            f"converged={str(res.converged).lower()}")
    if not res.converged:
        raise _NotConverged(line)
    return line


class _NotConverged(Exception):
    pass


def run_drop_filter(cfg, out):
    p = cfg.params
    res = specfit.drop_filter_response(cfg.rates, _detunings(cfg.detunings),
                                       p["bandwidth_ghz"], p["n_points"])
    names = list(res.branching)
    cols = ["detuning_ghz"] + [f"branch_{k}" for k in names] + ["t_intensity"]
    data = np.column_stack([res.grid] + [res.branching[k] for k in names] + [res.t_spectrum])
    out.table("drop_filter.csv", cols, data)
    fr = " ".join(f"fraction_{k}={v:.4f}" for k, v in res.fractions.items())
    return f"{fr} t_fwhm_ghz={res.t_fwhm:.1f}"


def run_preset_report(cfg, out):
    names = cfg.params["presets"]
    presets = {}
    for n in names:
        try:
            presets[n] = netmodel.load_preset(n)
        except KeyError as exc:
            raise ConfigError(f"[preset-report].presets: {exc.args[0]}") from None
    out.text("presets.toml", netmodel.dump_presets(presets))
    rows = []
    for n, pr in presets.items():
        r = pr.rates
        ratio = cmt.transfer_ratio(r).intensity_ratio if r.kappa_par > 0 else float("nan")
        rows.append([n, r.kappa_perp, r.kappa_par, r.kappa_w, r.total,
                     r.kappa_par / r.kappa_perp if r.kappa_perp else float("inf"),
                     pr.emitter.g0, pr.emitter.gamma_emitter, ratio,
                     emitter.classify_regime(pr.emitter, r)])
    cols = ["preset", "kappa_perp_ghz", "kappa_par_ghz", "kappa_w_ghz", "kappa_total_ghz",
            "par_over_perp", "g0_ghz", "gamma_ghz", "intensity_ratio", "regime"]
    out.table("preset_report.csv", cols, rows)
    return " ".join(f"{row[0]}:{row[-1]}" for row in rows)


RUNNERS = {
    "steady-state": run_steady_state, "evolve": run_evolve, "exciton": run_exciton,
    "g2": run_g2, "hom": run_hom, "fit": run_fit, "drop-filter": run_drop_filter,
    "preset-report": run_preset_report,
}


def cmd_run(args) -> int:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = parse_config(text, str(path))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            print("error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
            return EXIT_INVALID
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.output_dir = Path(args.out_dir)
    out = Outputs(cfg, args.format)
    try:
        summary = RUNNERS[cfg.kind](cfg, out)
    except ConfigError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _NotConverged as exc:
        out.commit()
        print(f"{cfg.kind} {exc}")
        return EXIT_NUMERIC
    except (ConvergenceError, InsufficientDataError, ArithmeticError) as exc:
        print(f"error: {cfg.kind}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CavnetError, ValueError, KeyError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out.commit()
    print(f"{cfg.kind} {summary}")
    return EXIT_OK


def _parse_only(text: str) -> list[int]:
    items = [s for s in text.replace(",", " ").split() if s]
    if not items:
        raise ValueError("empty criterion list")
    return [int(s) for s in items]


def cmd_reproduce(args) -> int:
    only = None
    if args.only is not None:
        try:
            only = _parse_only(args.only)
        except ValueError as exc:
            print(f"error: --only: {exc}", file=sys.stderr)
            return EXIT_INVALID
        unknown = [c for c in only if c not in checks.CRITERIA]
        if unknown:
            print(f"error: --only: unknown criteria {unknown}", file=sys.stderr)
            return EXIT_INVALID
    rates = netmodel.FITTED_RATES
    try:
        rates = replace(rates, **{k: getattr(args, k) * GHZ for k in
                                  ("kappa_perp", "kappa_par", "kappa_w")
                                  if getattr(args, k) is not None})
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    rows = checks.reproduce(only, rates)
    table = checks.render(rows)
    print(table, end="")
    if args.out_dir:
        header = dataio.header_lines(__version__, seed=checks.CHECK_SEED)
        data = [[r.criterion, r.name, r.reference, r.computed, r.tolerance,
                 "PASS" if r.passed else "FAIL"] for r in rows]
        dataio.write_table(Path(args.out_dir) / "reproduce.csv",
                           ["criterion", "check", "reference", "computed", "tolerance",
                            "status"], data, header)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAILED_ROW


def cmd_preset(args) -> int:
    presets = netmodel.bundled_presets()
    if args.action == "list":
        for name, p in presets.items():
            print(f"{name:<14} provenance={p.provenance:<13} kappa_total={p.rates.total:.1f} "
                  f"g0={p.emitter.g0:g} gamma={p.emitter.gamma_emitter:g}")
        return EXIT_OK
    if not args.name:
        print("error: preset show needs a name", file=sys.stderr)
        return EXIT_INVALID
    if args.name not in presets:
        print(f"error: unknown preset {args.name!r}; available {sorted(presets)}",
              file=sys.stderr)
        return EXIT_INVALID
    print(netmodel.dump_presets({args.name: presets[args.name]}), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cavnet", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"cavnet {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a TOML config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="master seed (overrides the config)")
    run.add_argument("--out-dir", help="output directory (overrides the config)")
    run.add_argument("--format", choices=dataio.FORMATS, default="csv")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("reproduce-paper", help="run the headline-number checks")
    rep.add_argument("--only", help="comma-separated criterion numbers (1-9)")
    rep.add_argument("--kappa-perp", type=float, help="override kappa_perp (GHz)")
    rep.add_argument("--kappa-par", type=float, help="override kappa_par (GHz)")
    rep.add_argument("--kappa-w", type=float, help="override kappa_w (GHz)")
    rep.add_argument("--out-dir", help="also write reproduce.csv here")
    rep.set_defaults(func=cmd_reproduce)

    pre = sub.add_parser("preset", help="list or show bundled presets")
    pre.add_argument("action", choices=("list", "show"))
    pre.add_argument("name", nargs="?")
    pre.set_defaults(func=cmd_preset)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
