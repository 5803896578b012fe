"""CSV import/export for trajectories, spectra, detection records, histograms and
HOM clusters.

Every file starts with ``#`` comment lines (tool version, config hash, seed)
followed by a header row. Numbers are written with a fixed format so reruns
with the same inputs are byte-identical. ``long`` format writes one
(key, variable, value) row per cell for script-friendly consumption.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .cmt import MODES, Trajectory, response_amplitudes
from .errors import ConfigurationError, DomainError
from .hom import HomCluster, PEAK_ORDERS
from .photostat import D1, D2, DETECTOR_LABELS, CorrelationHistogram, DetectionRecord
from .specfit import CONFIGURATIONS, SpectrumSet

FORMATS = ("csv", "long")
FLOAT_FORMAT = "{:.12g}"


def config_hash(text: str | bytes) -> str:
    data = text.encode() if isinstance(text, str) else text
    return hashlib.sha256(data).hexdigest()


def header_lines(version: str, config_sha256: str = "", seed: int | None = None,
                 **extra) -> list[str]:
    lines = [f"tool = cavnet {version}", f"config_sha256 = {config_sha256 or 'none'}",
             f"seed = {'none' if seed is None else seed}"]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    return lines


def atomic_write(path, text: str) -> Path:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _cell(v) -> str:
    if isinstance(v, (str, np.str_)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FLOAT_FORMAT.format(float(v))


def render_table(columns, rows, header=(), fmt: str = "csv") -> str:
    """Serialize ``rows`` (sequence of sequences) under ``columns``."""
    if fmt not in FORMATS:
        raise ConfigurationError(f"format must be one of {FORMATS}")
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if fmt == "csv":
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    else:
        writer.writerow([columns[0], "variable", "value"])
        for row in rows:
            key = _cell(row[0])
            for name, v in zip(columns[1:], row[1:]):
                writer.writerow([key, name, _cell(v)])
    return buf.getvalue()


def read_table(path) -> tuple[list[str], list[list[str]]]:
    """Header row and data rows of a CSV file, skipping ``#`` comments."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    if not lines:
        raise DomainError(f"{path}: no header row")
    reader = csv.reader(lines)
    columns = next(reader)
    return columns, [row for row in reader]


def _float_columns(path, expected_first: str):
    columns, rows = read_table(path)
    if columns[0] != expected_first:
        raise DomainError(f"{path}: first column must be {expected_first!r}, got {columns[0]!r}")
    try:
        data = np.array([[float(v) for v in row] for row in rows], dtype=float)
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None
    return columns, data.reshape(len(rows), len(columns))


# trajectories and spectra

def _complex_columns(names, amps):
    cols, values = [], []
    for name, a in zip(names, amps.T):
        cols += [f"{name}_re", f"{name}_im", f"{name}_intensity"]
        values += [a.real, a.imag, np.abs(a) ** 2]
    return cols, values


def trajectory_table(traj: Trajectory):
    amps = traj.amplitudes
    names = [f"c_{m}" for m in MODES]
    if traj.exciton is not None:
        amps = np.column_stack([amps, traj.exciton])
        names.append("e")
    cols, values = _complex_columns(names, amps)
    chan = sorted(traj.channels)
    cols = ["time_ns"] + cols + [f"emitted_{k}" for k in chan]
    data = np.column_stack([traj.times] + values + [traj.channels[k] for k in chan])
    return cols, data


def spectra_table(rates, detunings, probe, pump: str = "s"):
    """Steady-state amplitudes of all modes versus probe detuning."""
    amps = response_amplitudes(rates, detunings, probe, pump)
    cols, values = _complex_columns([f"c_{m}" for m in MODES], amps)
    return ["detuning_ghz"] + cols, np.column_stack([probe] + values)


# spectrum sets

def spectrum_set_table(data: SpectrumSet):
    labels = list(data.curves)
    return ["detuning_ghz"] + labels, np.column_stack([data.grid] + [data.curves[k]
                                                                    for k in labels])


def read_spectrum_set(path, noise_sigma: float = 0.0) -> SpectrumSet:
    columns, data = _float_columns(path, "detuning_ghz")
    unknown = [c for c in columns[1:] if c not in CONFIGURATIONS]
    if unknown:
        raise DomainError(f"{path}: unknown configuration columns {unknown}")
    return SpectrumSet(data[:, 0], {c: data[:, i + 1] for i, c in enumerate(columns[1:])},
                       noise_sigma)


# detection records, histograms and clusters

def record_rows(record: DetectionRecord):
    return [(float(t), DETECTOR_LABELS[d]) for t, d in zip(record.times, record.detectors)]


def read_detection_record(path) -> DetectionRecord:
    columns, rows = read_table(path)
    if columns[:2] != ["time_ns", "detector"]:
        raise DomainError(f"{path}: expected columns time_ns, detector")
    lookup = {"D1": D1, "D2": D2}
    try:
        times = [float(r[0]) for r in rows]
        dets = [lookup[r[1]] for r in rows]
    except (KeyError, ValueError, IndexError) as exc:
        raise DomainError(f"{path}: bad row ({exc})") from None
    return DetectionRecord(np.array(times), np.array(dets, dtype=np.int8))


def histogram_rows(hist: CorrelationHistogram):
    return [(float(d), int(c)) for d, c in zip(hist.delays, hist.counts)]


def read_histogram(path) -> CorrelationHistogram:
    _, data = _float_columns(path, "delay_ns")
    delays = data[:, 0]
    width = float(np.median(np.diff(delays))) if len(delays) > 1 else 1.0
    return CorrelationHistogram(width, delays, data[:, 1].astype(np.int64))


def read_cluster(path) -> HomCluster:
    _, data = _float_columns(path, "delay_ns")
    if data.shape != (len(PEAK_ORDERS), 3):
        raise DomainError(f"{path}: a cluster file has five rows of delay_ns, area, stderr")
    path_delay = float(data[-1, 0]) / PEAK_ORDERS[-1]
    return HomCluster(path_delay, data[:, 1], data[:, 2])


def write_table(path, columns, rows, header=(), fmt: str = "csv") -> Path:
    return atomic_write(path, render_table(columns, rows, header, fmt))
