"""Pulsed photodetection Monte Carlo: HBT event streams, correlation histograms
and g2(0) estimation.

Times are in ns throughout, except emitter/background timing constants which
are given in ps as in the emitter module.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .emitter import sample_emission_time
from .errors import ConvergenceError, DomainError, InsufficientDataError

D1, D2 = 0, 1
DETECTOR_LABELS = ("D1", "D2")
BLOCK_PULSES = 100_000


@dataclass(frozen=True)
class PulseTrainSpec:
    rep_period: float = 13.0  # ns
    pair_separation: float = 0.0  # ns, HOM only
    n_pulses: int = 100_000
    excitation_prob: float = 1.0

    def __post_init__(self):
        if not self.rep_period > self.pair_separation >= 0:
            raise DomainError("need rep_period > pair_separation >= 0")
        if self.n_pulses < 1:
            raise DomainError("n_pulses must be >= 1")
        if not 0 <= self.excitation_prob <= 1:
            raise DomainError("excitation_prob must be in [0, 1]")


@dataclass(frozen=True)
class BackgroundSpec:
    """Broadband background and detector dark counts.

    With a filter, the background mean is multiplied by
    min(1, filter_width / background_width).
    """

    mean_photons_per_pulse: float = 0.0
    decay_time: float = 100.0  # ps
    dark_rate: float = 0.0  # counts/s per detector
    filter_width: float | None = None  # GHz
    background_width: float | None = None  # GHz

    def __post_init__(self):
        for name in ("mean_photons_per_pulse", "decay_time", "dark_rate"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.filter_width is not None:
            if self.filter_width < 0:
                raise DomainError("filter_width must be >= 0")
            if not self.background_width or self.background_width <= 0:
                raise DomainError("a filter needs a positive background_width")

    @property
    def pass_fraction(self) -> float:
        if self.filter_width is None:
            return 1.0
        return min(1.0, self.filter_width / self.background_width)

    @property
    def effective_mean(self) -> float:
        return self.mean_photons_per_pulse * self.pass_fraction


NO_BACKGROUND = BackgroundSpec()


@dataclass
class DetectionRecord:
    """Detector clicks; ``detectors`` holds 0 for D1 and 1 for D2."""

    times: np.ndarray
    detectors: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        dets = np.asarray(self.detectors, dtype=np.int8)
        if times.shape != dets.shape:
            raise DomainError("times and detectors differ in length")
        if dets.size and not np.isin(dets, (D1, D2)).all():
            raise DomainError("detector labels must be D1 or D2")
        order = np.argsort(times, kind="stable")
        self.times = times[order]
        self.detectors = dets[order]

    def __len__(self):
        return len(self.times)

    @classmethod
    def concatenate(cls, records) -> DetectionRecord:
        records = list(records)
        if not records:
            return cls(np.empty(0), np.empty(0, dtype=np.int8))
        return cls(np.concatenate([r.times for r in records]),
                   np.concatenate([r.detectors for r in records]))


@dataclass
class CorrelationHistogram:
    """Coincidence counts versus delay t(D2) - t(D1); bins centered on k*bin_width."""

    bin_width: float
    delays: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def area(self, center: float, half_width: float) -> int:
        """Counts in bins whose centers satisfy |delay - center| < half_width."""
        mask = np.abs(self.delays - center) < half_width - 1e-9 * self.bin_width
        return int(self.counts[mask].sum())


@dataclass(frozen=True)
class G2Estimate:
    value: float
    stderr: float
    central: int
    side_mean: float
    n_side: int


def block_seeds(seed: int, n_items: int, block: int = BLOCK_PULSES):
    """Deterministic per-block generators derived from one master seed."""
    n_blocks = max(1, -(-n_items // block))
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    for i, child in enumerate(children):
        start = i * block
        yield start, min(block, n_items - start), np.random.default_rng(child)


def background_photons(rng, pulse_times: np.ndarray, bg: BackgroundSpec, efficiency=1.0):
    """Poisson background photons with an exponential envelope after each pulse."""
    mean = bg.effective_mean * efficiency
    if mean == 0 or len(pulse_times) == 0:
        return np.empty(0)
    counts = rng.poisson(mean, len(pulse_times))
    starts = np.repeat(pulse_times, counts)
    return starts + rng.exponential(bg.decay_time * 1e-3, starts.size)


def dark_counts(rng, t0: float, span: float, bg: BackgroundSpec) -> DetectionRecord:
    """Uniform dark clicks on each detector over [t0, t0 + span)."""
    rate = bg.dark_rate * 1e-9  # per ns
    if rate == 0 or span <= 0:
        return DetectionRecord(np.empty(0), np.empty(0, dtype=np.int8))
    n = rng.poisson(rate * span, 2)
    times = t0 + rng.uniform(0.0, span, n.sum())
    dets = np.repeat(np.array([D1, D2], dtype=np.int8), n)
    return DetectionRecord(times, dets)


def simulate_hbt(train: PulseTrainSpec, lifetime: float = 116.0, rise_time: float = 23.0,
                 bg: BackgroundSpec = NO_BACKGROUND, seed: int = 0,
                 efficiency: float = 1.0) -> DetectionRecord:
    """Pulsed HBT measurement of a single two-level emitter plus background.

    Each pulse gives at most one signal photon. Every photon is routed to D1 or D2
    with probability 1/2. ``lifetime`` and ``rise_time`` in ps.
    """
    if not 0 <= efficiency <= 1:
        raise DomainError("efficiency must be in [0, 1]")
    parts = []
    for start, n, rng in block_seeds(seed, train.n_pulses):
        pulses = (start + np.arange(n)) * train.rep_period
        emitted = rng.random(n) < train.excitation_prob * efficiency
        sig = pulses[emitted] + 1e-3 * sample_emission_time(
            rng, rise_time, lifetime, int(emitted.sum()))
        back = background_photons(rng, pulses, bg, efficiency)
        photons = np.concatenate([sig, back])
        dets = (rng.random(photons.size) < 0.5).astype(np.int8)
        parts.append(DetectionRecord(photons, dets))
        parts.append(dark_counts(rng, start * train.rep_period, n * train.rep_period, bg))
    return DetectionRecord.concatenate(parts)


def pair_delays(record: DetectionRecord, window: float) -> np.ndarray:
    """All D1-D2 delays t(D2) - t(D1) with |delay| <= window."""
    t = record.times
    d = record.detectors
    out = []
    for lag in range(1, len(t)):
        dt = t[lag:] - t[:-lag]
        ok = dt <= window
        if not ok.any():
            break
        first = d[:-lag][ok]
        second = d[lag:][ok]
        sel = first != second
        sign = np.where(first[sel] == D1, 1.0, -1.0)
        out.append(sign * dt[ok][sel])
    return np.concatenate(out) if out else np.empty(0)


def correlate(record: DetectionRecord, bin_width: float, window: float) -> CorrelationHistogram:
    """Histogram of D1-D2 delays; bins of ``bin_width`` centered on multiples of
    it, covering +/- ``window`` (outer bins are filled out to their edges)."""
    if len(record) < 2:
        raise InsufficientDataError("need at least two events to correlate")
    if not (bin_width > 0 and window > 0):
        raise DomainError("bin_width and window must be positive")
    n_half = int(np.ceil(window / bin_width - 1e-9))
    centers = np.arange(-n_half, n_half + 1) * bin_width
    edges = np.arange(-n_half - 0.5, n_half + 1.5) * bin_width
    delays = pair_delays(record, edges[-1])
    counts, _ = np.histogram(delays[np.abs(delays) < edges[-1]], bins=edges)
    return CorrelationHistogram(bin_width, centers, counts.astype(np.int64))


def g2_zero(hist: CorrelationHistogram, rep_period: float, min_side: int = 3) -> G2Estimate:
    """Pulsed g2(0): central peak area over mean side-peak area.

    Each peak integrates +/- rep_period/2 around k*rep_period; only peaks that
    lie fully inside the histogram are used.
    """
    half = rep_period / 2.0
    reach = hist.delays.max() + hist.bin_width / 2.0
    k_max = int(np.floor((reach - half) / rep_period + 1e-9))
    side = [hist.area(k * rep_period, half) for k in range(-k_max, k_max + 1) if k != 0]
    if len(side) < min_side:
        raise InsufficientDataError(f"histogram spans only {len(side)} side peaks")
    side_mean = float(np.mean(side))
    if side_mean == 0:
        raise InsufficientDataError("side peaks are empty")
    central = hist.area(0.0, half)
    value = central / side_mean
    n_side_total = sum(side)
    rel = np.sqrt(1.0 / max(central, 1) + 1.0 / n_side_total)
    stderr = value * rel if central > 0 else 1.0 / side_mean
    return G2Estimate(value, float(stderr), central, side_mean, len(side))


def measure_g2(train: PulseTrainSpec, bg: BackgroundSpec, seed: int,
               lifetime: float = 116.0, rise_time: float = 23.0,
               n_side: int = 4, bin_width: float = 0.05) -> G2Estimate:
    """simulate_hbt -> correlate -> g2_zero with a window spanning ``n_side`` peaks."""
    record = simulate_hbt(train, lifetime, rise_time, bg, seed)
    window = (n_side + 0.5) * train.rep_period
    return g2_zero(correlate(record, bin_width, window), train.rep_period)


def g2_poisson_mixture(mean_background: float, excitation_prob: float = 1.0) -> float:
    """Expected pulsed g2(0) for one Bernoulli signal photon plus Poisson background."""
    p, mu = excitation_prob, mean_background
    if p + mu == 0:
        return float("nan")
    return (2 * p * mu + mu ** 2) / (p + mu) ** 2


def calibrate_background(target_g2: float, train: PulseTrainSpec,
                         bg: BackgroundSpec = NO_BACKGROUND, seed: int = 0,
                         lifetime: float = 116.0, rise_time: float = 23.0,
                         tol: float = 0.005, max_iter: int = 40,
                         upper: float = 10.0) -> float:
    """Background mean photons/pulse at which the simulated g2(0) hits ``target_g2``.

    Bisection with common random numbers (same seed at every point). Raises
    ConvergenceError if the target is not bracketed, the sweep is visibly
    non-monotonic, or ``max_iter`` is exhausted.
    """
    if not 0 <= target_g2 < 1:
        raise DomainError("target_g2 must be in [0, 1)")
    if target_g2 == 0:
        return 0.0

    history: list[tuple[float, G2Estimate]] = []

    def g2_at(mu):
        trial = replace(bg, mean_photons_per_pulse=mu)
        est = measure_g2(train, trial, seed, lifetime, rise_time)
        history.append((mu, est))
        return est

    lo, hi = 0.0, 0.05
    while g2_at(hi).value < target_g2:
        lo, hi = hi, hi * 2
        if hi > upper:
            raise ConvergenceError(f"g2 target {target_g2} not reached below mean {upper}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        est = g2_at(mid)
        if abs(est.value - target_g2) < tol:
            _check_monotone(history)
            return mid
        if est.value < target_g2:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"bisection did not reach g2={target_g2} +/- {tol}")


def _check_monotone(history):
    pts = sorted(history, key=lambda p: p[0])
    for (_, a), (_, b) in zip(pts, pts[1:]):
        if b.value < a.value - 3 * np.hypot(a.stderr, b.stderr):
            raise ConvergenceError("simulated g2(0) is not monotonic in background level")


def transfer_count_scaling(intensity_ratio: float) -> float:
    """Two-photon coincidence rate factor for collection after transfer: ratio**2."""
    if not 0 < intensity_ratio <= 1:
        raise DomainError("intensity_ratio must be in (0, 1]")
    return intensity_ratio ** 2
