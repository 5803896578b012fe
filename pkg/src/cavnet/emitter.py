"""Quantum-dot exciton coupled to the source cavity, Purcell/beta arithmetic,
coupling-regime classification and emission-time sampling.

The exciton amplitude e(t) drives the source cavity with p(t) = -i*g0*e(t) and
obeys de/dt = -(Gamma/2) e - i*g0*c_s in the single-excitation manifold, so
the network plus emitter is one closed linear system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import cmt
from .cmt import DriveTerm, NetworkState, Trajectory, ZERO_DETUNING, Detunings
from .errors import DomainError
from .netmodel import CouplingRates, EmitterSpec

# classify_regime thresholds (all rates in the same angular units)
STRONG_KAPPA_FRACTION = 0.25
STRONG_GAMMA_FRACTION = 0.25
WEAK_PURCELL_FRACTION = 0.1
PURCELL_PREFACTOR = 3.0 / (4.0 * math.pi ** 2)


@dataclass(frozen=True)
class ExcitonState:
    e_amp: complex = 1.0
    time: float = 0.0

    def __post_init__(self):
        if abs(self.e_amp) > 1.0 + 1e-9:
            raise DomainError("|e_amp| must not exceed 1")


@dataclass(frozen=True)
class PurcellResult:
    f: float
    beta: float
    tau_cav: float  # ps
    tau_bulk: float  # ns


def coupled_derivative(exciton: ExcitonState, network: NetworkState, spec: EmitterSpec,
                       rates: CouplingRates, detunings: Detunings = ZERO_DETUNING):
    """Joint derivative (de/dt, d network/dt) with decay ``spec.gamma_emitter``."""
    p = -1j * spec.g0 * exciton.e_amp
    dnet = cmt.derivative(network, rates, detunings, DriveTerm.constant(p))
    de = -0.5 * spec.gamma_emitter * exciton.e_amp - 1j * spec.g0 * network.c_s
    return de, dnet


def noncavity(spec: EmitterSpec) -> EmitterSpec:
    """Copy of ``spec`` whose decay is only the leaky-mode rate F_PC / tau_bulk.

    Use this when the cavity channel is simulated explicitly, so the
    Purcell-enhanced emission is not counted twice.
    """
    return replace(spec, gamma_emitter=spec.gamma_leak)


def evolve_exciton(spec: EmitterSpec, rates: CouplingRates, t_end: float, dt: float,
                   detunings: Detunings = ZERO_DETUNING, e0: complex = 1.0,
                   initial: NetworkState | None = None, record_every: int = 1) -> Trajectory:
    """Integrate exciton plus network from e(0) = ``e0``.

    The trajectory carries an ``emitter`` channel (Gamma*|e|^2 integrated) in
    addition to the cavity and waveguide channels.
    """
    ExcitonState(e0)
    drive = DriveTerm.emitter(spec.g0, spec.gamma_emitter, e0)
    return cmt.evolve(initial or NetworkState(), rates, detunings, drive,
                      t_end=t_end, dt=dt, record_every=record_every)


def fit_decay_rate(times: np.ndarray, population: np.ndarray,
                   t_min: float | None = None, t_max: float | None = None) -> float:
    """Exponential rate from a straight-line fit of log(population)."""
    times = np.asarray(times, dtype=float)
    population = np.asarray(population, dtype=float)
    mask = population > 0
    if t_min is not None:
        mask &= times >= t_min
    if t_max is not None:
        mask &= times <= t_max
    if mask.sum() < 2:
        raise DomainError("need at least two positive samples to fit a decay")
    slope = np.polyfit(times[mask], np.log(population[mask]), 1)[0]
    return float(-slope)


def effective_cavity_decay(rates: CouplingRates, detunings: Detunings = ZERO_DETUNING) -> float:
    """Real part of the source cavity's self-energy at zero probe detuning.

    Includes the waveguide and target cavity loading seen from S.
    """
    amps = cmt.response_amplitudes(rates, detunings, np.array([0.0]), pump="s")
    return float((1.0 / amps[0, 0]).real)


def purcell_rate(g0: float, kappa: float) -> float:
    """Weak-coupling cavity emission rate of |e|^2 for field decay ``kappa``: 2*g0^2/kappa."""
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    return 2.0 * g0 ** 2 / kappa


def purcell_measured(tau_bulk: float, tau_cav: float) -> float:
    """Lifetime ratio; ``tau_bulk`` in ns, ``tau_cav`` in ps."""
    if not (tau_bulk > 0 and tau_cav > 0):
        raise DomainError("lifetimes must be positive")
    return tau_bulk * 1e3 / tau_cav


def beta_factor(f: float, f_pc: float) -> float:
    if not f > 0 or f_pc < 0:
        raise DomainError("need f > 0 and f_pc >= 0")
    return f / (f + f_pc)


def purcell_theoretical(q: float, v_mode: float) -> float:
    """(3 / 4 pi^2) Q / V with V in units of (lambda/n)^3."""
    if not (q > 0 and v_mode > 0):
        raise DomainError("q and v_mode must be positive")
    return PURCELL_PREFACTOR * q / v_mode


def purcell_result(tau_bulk: float, tau_cav: float, f_pc: float) -> PurcellResult:
    f = purcell_measured(tau_bulk, tau_cav)
    return PurcellResult(f, beta_factor(f, f_pc), tau_cav, tau_bulk)


def classify_regime(spec: EmitterSpec, rates: CouplingRates) -> str:
    """'strong', 'weak' or 'onset'.

    strong: g0 > kappa/4 + Gamma/4
    weak:   4*g0^2/kappa < kappa/10
    """
    kappa = rates.total
    if spec.g0 == 0:
        return "weak"
    if kappa <= 0:
        return "strong"
    if spec.g0 > STRONG_KAPPA_FRACTION * kappa + STRONG_GAMMA_FRACTION * spec.gamma_emitter:
        return "strong"
    if 4.0 * spec.g0 ** 2 / kappa < WEAK_PURCELL_FRACTION * kappa:
        return "weak"
    return "onset"


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_emission_time(seed, rise_time: float, lifetime: float, size=None):
    """Emission delay (ps) after excitation: Exp(rise_time) + Exp(lifetime)."""
    if not lifetime > 0:
        raise DomainError("lifetime must be positive")
    if rise_time < 0:
        raise DomainError("rise_time must be >= 0")
    rng = _rng(seed)
    decay = rng.exponential(lifetime, size)
    if rise_time == 0:
        return decay
    return rng.exponential(rise_time, size) + decay


def sample_emission_times_dynamics(seed, trajectory: Trajectory, channel: str, size=None):
    """Slow path: emission times (ps) drawn from a simulated channel's outflux.

    The cumulative channel integral, normalized, is used as the CDF.
    """
    cum = trajectory.channels[channel]
    if cum[-1] <= 0:
        raise DomainError(f"channel {channel!r} carries no flux")
    u = _rng(seed).uniform(0.0, cum[-1], size)
    t = np.interp(u, cum, trajectory.times - trajectory.times[0])
    return t * 1e3
