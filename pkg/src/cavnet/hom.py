"""Hong-Ou-Mandel interference of consecutive photons in an unbalanced interferometer.

Photon a is emitted at t0 and photon b at t0 + dt. Each takes the short (S,
probability R) or long (L, probability T = 1 - R, extra delay dt) arm and then
meets the output splitter. The pair (a via L, b via S) collides; the other
three arm combinations give the side peaks at +/-dt and +/-2dt. A photon from
arm S reaches D1 with probability R, a photon from arm L with probability T.
For colliding photons the coincidence probability is
R^2 + T^2 - 2RT * I * V**VISIBILITY_EXPONENT.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .emitter import sample_emission_time
from .errors import ConfigurationError, DomainError, InsufficientDataError
from .photostat import (D1, D2, NO_BACKGROUND, BackgroundSpec, CorrelationHistogram,
                        DetectionRecord, PulseTrainSpec, background_photons, block_seeds,
                        correlate, dark_counts)

VISIBILITY_EXPONENT = 2
PEAK_ORDERS = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class InterferometerSpec:
    path_delay: float = 2.3  # ns
    visibility: float = 0.88
    splitter_ratio: float = 0.5  # R
    dark_fraction: float = 0.0  # flat accidentals per peak, relative to the +/-dt peaks

    def __post_init__(self):
        if not self.path_delay > 0:
            raise DomainError("path_delay must be positive")
        if not 0 <= self.visibility <= 1 or not 0 <= self.splitter_ratio <= 1:
            raise DomainError("visibility and splitter_ratio must be in [0, 1]")
        if self.dark_fraction < 0:
            raise DomainError("dark_fraction must be >= 0")

    @property
    def interference(self) -> float:
        return self.visibility ** VISIBILITY_EXPONENT


@dataclass
class HomCluster:
    """Peak areas at delays k*path_delay, k = -2..2."""

    path_delay: float
    areas: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        self.areas = np.asarray(self.areas, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if self.areas.shape != (5,) or np.any(self.areas < 0):
            raise DomainError("a cluster has five non-negative peak areas")

    @property
    def delays(self) -> np.ndarray:
        return np.array(PEAK_ORDERS) * self.path_delay

    @property
    def central(self) -> float:
        return float(self.areas[2])

    def relative(self) -> np.ndarray:
        """Areas normalized to the mean of the outer (+/-2dt) peaks."""
        outer = 0.5 * (self.areas[0] + self.areas[4])
        return self.areas / outer

    @classmethod
    def from_histogram(cls, hist: CorrelationHistogram, path_delay: float) -> HomCluster:
        areas = np.array([hist.area(k * path_delay, path_delay / 2) for k in PEAK_ORDERS],
                         dtype=float)
        return cls(path_delay, areas, np.sqrt(areas))


def _arm_to_d1(arm: str, r: float) -> float:
    return r if arm == "S" else 1.0 - r


def _signed_peak_areas(r: float, coinc_collide: float) -> np.ndarray:
    """Path enumeration for one photon pair per repetition."""
    t = 1.0 - r
    p_arm = {"S": r, "L": t}
    offset = {"S": 0, "L": 1}
    areas = np.zeros(5)
    for arm_a in "SL":
        for arm_b in "SL":
            weight = p_arm[arm_a] * p_arm[arm_b]
            order = 1 + offset[arm_b] - offset[arm_a]
            if order == 0:
                areas[2] += weight * coinc_collide
                continue
            a1 = _arm_to_d1(arm_a, r)
            b1 = _arm_to_d1(arm_b, r)
            areas[2 + order] += weight * a1 * (1 - b1)
            areas[2 - order] += weight * (1 - a1) * b1
    return areas


def collision_coincidence(overlap: float, spec: InterferometerSpec) -> float:
    r = spec.splitter_ratio
    t = 1.0 - r
    return r * r + t * t - 2 * r * t * overlap * spec.interference


def analytic_cluster(overlap: float, spec: InterferometerSpec) -> HomCluster:
    """Expected coincidence areas per repetition (both photons emitted).

    For R = 1/2 the areas are (1, 2, 2(1 - I V^2), 2, 1) / 16.
    """
    if not 0 <= overlap <= 1:
        raise DomainError("overlap must be in [0, 1]")
    areas = _signed_peak_areas(spec.splitter_ratio, collision_coincidence(overlap, spec))
    dark = spec.dark_fraction * 0.5 * (areas[1] + areas[3])
    return HomCluster(spec.path_delay, areas + dark, np.zeros(5))


@dataclass(frozen=True)
class OverlapEstimate:
    overlap: float
    stderr: float
    clamped: bool
    raw: float
    peak_ratio: float
    dark_subtracted: float
    visibility: float
    g2_correction: float

    def report(self) -> str:
        lines = [
            "# HOM mean wavepacket overlap",
            f"overlap = {self.overlap:.6f}",
            f"stderr = {self.stderr:.6f}",
            f"clamped = {str(self.clamped).lower()}",
            f"unclamped_overlap = {self.raw:.6f}",
            "",
            "[corrections]",
            f"central_over_dt_peaks = {self.peak_ratio:.6f}",
            f"dark_area_subtracted = {self.dark_subtracted:.6g}",
            f"visibility = {self.visibility:.4f}",
            f"visibility_exponent = {VISIBILITY_EXPONENT}",
            f"g2_correction = {self.g2_correction:.6f}",
        ]
        return "\n".join(lines) + "\n"


def estimate_overlap(cluster: HomCluster, spec: InterferometerSpec,
                     g2_correction: float = 0.0) -> OverlapEstimate:
    """Invert the cluster: I = ((1 - r/r0)(R^2+T^2)/(2RT) + g2_correction) / V^2.

    r is the central area over the mean +/-dt area after removing the flat
    ``dark_fraction`` accidentals; r0 is the same ratio for distinguishable
    photons (1 for a balanced splitter).
    """
    r_split = spec.splitter_ratio
    t_split = 1.0 - r_split
    if spec.visibility <= 0 or r_split in (0.0, 1.0):
        raise DomainError("need visibility > 0 and 0 < splitter_ratio < 1")
    side_raw = 0.5 * (cluster.areas[1] + cluster.areas[3])
    if side_raw <= 0:
        raise InsufficientDataError("the +/-dt peaks are empty")
    dark = spec.dark_fraction / (1.0 + spec.dark_fraction) * side_raw
    side = side_raw - dark
    central = max(cluster.central - dark, 0.0)
    ratio = central / side
    ref = _signed_peak_areas(r_split, r_split ** 2 + t_split ** 2)
    ratio0 = ref[2] / (0.5 * (ref[1] + ref[3]))
    gain = (r_split ** 2 + t_split ** 2) / (2 * r_split * t_split)
    raw = ((1.0 - ratio / ratio0) * gain + g2_correction) / spec.interference
    s_side = 0.5 * np.hypot(cluster.stderr[1], cluster.stderr[3])
    rel_c = cluster.stderr[2] / central if central > 0 else 0.0
    s_ratio = ratio * np.hypot(rel_c, s_side / side)
    stderr = s_ratio / ratio0 * gain / spec.interference
    raw = float(raw)
    overlap = min(max(raw, 0.0), 1.0)
    return OverlapEstimate(overlap, float(stderr), overlap != raw, raw, float(ratio),
                           float(dark), spec.visibility, g2_correction)


def _route(rng, arms_short: np.ndarray, r: float) -> np.ndarray:
    p_d1 = np.where(arms_short, r, 1.0 - r)
    return np.where(rng.random(arms_short.size) < p_d1, D1, D2).astype(np.int8)


def simulate_hom(train: PulseTrainSpec, overlap: float, spec: InterferometerSpec,
                 lifetime: float = 116.0, rise_time: float = 23.0,
                 bg: BackgroundSpec = NO_BACKGROUND, seed: int = 0) -> DetectionRecord:
    """Monte Carlo of the two-pulse HOM experiment, ``train.n_pulses`` repetitions.

    ``lifetime`` and ``rise_time`` in ps. Background photons follow each of the
    two excitation pulses and take random arms; dark counts are uniform.
    """
    if not np.isclose(train.pair_separation, spec.path_delay):
        raise ConfigurationError("pair_separation must equal the interferometer path_delay")
    if not 0 <= overlap <= 1:
        raise DomainError("overlap must be in [0, 1]")
    r = spec.splitter_ratio
    dt = spec.path_delay
    p_collide = collision_coincidence(overlap, spec)
    p_dist = r * r + (1 - r) ** 2
    parts = []
    for start, n, rng in block_seeds(seed, train.n_pulses):
        t0 = (start + np.arange(n)) * train.rep_period
        has_a = rng.random(n) < train.excitation_prob
        has_b = rng.random(n) < train.excitation_prob
        ta = t0 + 1e-3 * sample_emission_time(rng, rise_time, lifetime, n)
        tb = t0 + dt + 1e-3 * sample_emission_time(rng, rise_time, lifetime, n)
        short_a = rng.random(n) < r
        short_b = rng.random(n) < r
        ta = ta + np.where(short_a, 0.0, dt)
        tb = tb + np.where(short_b, 0.0, dt)
        da = _route(rng, short_a, r)
        db = _route(rng, short_b, r)

        collide = has_a & has_b & ~short_a & short_b
        nc = int(collide.sum())
        coinc = rng.random(nc) < p_collide
        # given coincidence: a (from L) -> D1 with b -> D2 has weight T^2, reverse R^2
        a_first = rng.random(nc) < ((1 - r) ** 2 / p_dist if p_dist > 0 else 0.5)
        bunch_d1 = rng.random(nc) < 0.5
        da_c = np.where(coinc, np.where(a_first, D1, D2), np.where(bunch_d1, D1, D2))
        db_c = np.where(coinc, np.where(a_first, D2, D1), np.where(bunch_d1, D1, D2))
        da[collide] = da_c
        db[collide] = db_c

        times = [ta[has_a], tb[has_b]]
        dets = [da[has_a], db[has_b]]
        for pulse in (t0, t0 + dt):
            back = background_photons(rng, pulse, bg)
            short = rng.random(back.size) < r
            times.append(back + np.where(short, 0.0, dt))
            dets.append(_route(rng, short, r))
        parts.append(DetectionRecord(np.concatenate(times), np.concatenate(dets)))
        parts.append(dark_counts(rng, t0[0], n * train.rep_period, bg))
    return DetectionRecord.concatenate(parts)


def measure_cluster(record: DetectionRecord, path_delay: float,
                    bin_width: float = 0.05) -> HomCluster:
    hist = correlate(record, bin_width, 2.5 * path_delay)
    return HomCluster.from_histogram(hist, path_delay)


def cluster_rows(cluster: HomCluster):
    """(delay_ns, area, stderr) rows for CSV export."""
    return [(float(d), float(a), float(s))
            for d, a, s in zip(cluster.delays, cluster.areas, cluster.stderr)]
