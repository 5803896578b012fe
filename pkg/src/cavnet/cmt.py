"""Coupled-mode dynamics of the source cavity / waveguide / target cavity network.

Mode order is (s, t, w). In the frame rotating at the common reference
frequency the amplitudes obey

    dc_s/dt = (i*d_s - k_perp - gamma) c_s - i*k_par c_w + p(t)
    dc_t/dt = (i*d_t - k_perp - gamma) c_t - i*k_par c_w
    dc_w/dt = -i*k_par (c_s + c_t) + (i*d_w - k_w) c_w

A harmonic drive is p(t) = A exp(i*Delta*t); its steady state is the rotating
envelope C with c(t) = C exp(i*Delta*t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SingularSystemError
from .netmodel import CouplingRates

MODES = ("s", "t", "w")
STABILITY_LIMIT = 0.05  # max dt * rate
DRIVE_KINDS = ("none", "constant", "harmonic", "emitter")


@dataclass(frozen=True)
class Detunings:
    delta_s: float = 0.0
    delta_t: float = 0.0
    delta_w: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(d) for d in (self.delta_s, self.delta_t, self.delta_w)):
            raise ConfigurationError("detunings must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.delta_s, self.delta_t, self.delta_w])


ZERO_DETUNING = Detunings()


@dataclass(frozen=True)
class DriveTerm:
    """Source-cavity drive.

    For ``kind="emitter"`` the drive is -i*g0*e(t) from a two-level emitter whose
    initial amplitude is ``amplitude`` and whose non-cavity decay rate is ``gamma``.
    """

    kind: str = "none"
    amplitude: complex = 0j
    detuning: float = 0.0
    g0: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in DRIVE_KINDS:
            raise ConfigurationError(f"unknown drive kind {self.kind!r}")
        if not (math.isfinite(self.detuning) and np.isfinite(self.amplitude)):
            raise ConfigurationError("drive amplitude and detuning must be finite")

    @classmethod
    def constant(cls, amplitude: complex = 1.0) -> DriveTerm:
        return cls("constant", complex(amplitude))

    @classmethod
    def harmonic(cls, amplitude: complex, detuning: float) -> DriveTerm:
        return cls("harmonic", complex(amplitude), float(detuning))

    @classmethod
    def emitter(cls, g0: float, gamma: float, e0: complex = 1.0) -> DriveTerm:
        return cls("emitter", complex(e0), g0=float(g0), gamma=float(gamma))

    def value(self, t: float) -> complex:
        """p(t) for the externally prescribed kinds."""
        if self.kind == "none":
            return 0j
        if self.kind == "constant":
            return self.amplitude
        if self.kind == "harmonic":
            return self.amplitude * np.exp(1j * self.detuning * t)
        raise ConfigurationError("emitter drive depends on the exciton state; "
                                 "use emitter.coupled_derivative")


@dataclass(frozen=True)
class NetworkState:
    c_s: complex = 0j
    c_t: complex = 0j
    c_w: complex = 0j
    time: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.c_s, self.c_t, self.c_w], dtype=complex)

    @classmethod
    def from_array(cls, y, time: float = 0.0) -> NetworkState:
        return cls(complex(y[0]), complex(y[1]), complex(y[2]), float(time))

    @property
    def intensity(self) -> float:
        return abs(self.c_s) ** 2 + abs(self.c_t) ** 2 + abs(self.c_w) ** 2


@dataclass
class Trajectory:
    """Sampled solution. ``amplitudes`` has shape (n, 3) in mode order (s, t, w)."""

    times: np.ndarray
    amplitudes: np.ndarray
    channels: dict[str, np.ndarray]
    exciton: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> NetworkState:
        return NetworkState.from_array(self.amplitudes[i], self.times[i])

    @property
    def final(self) -> NetworkState:
        return self.state(-1)

    def intensities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def stored(self) -> np.ndarray:
        """Total excitation still in the modes (and emitter, if present)."""
        total = self.intensities().sum(axis=1)
        if self.exciton is not None:
            total = total + np.abs(self.exciton) ** 2
        return total

    def emitted(self) -> np.ndarray:
        return sum(self.channels.values())


def system_matrix(rates: CouplingRates, detunings: Detunings = ZERO_DETUNING) -> np.ndarray:
    k_cav = rates.kappa_perp + rates.gamma_mat
    kp = rates.kappa_par
    return np.array([
        [1j * detunings.delta_s - k_cav, 0, -1j * kp],
        [0, 1j * detunings.delta_t - k_cav, -1j * kp],
        [-1j * kp, -1j * kp, 1j * detunings.delta_w - rates.kappa_w],
    ], dtype=complex)


def derivative(state: NetworkState, rates: CouplingRates,
               detunings: Detunings = ZERO_DETUNING,
               drive: DriveTerm = DriveTerm()) -> NetworkState:
    """Time derivative of the field amplitudes (returned as a NetworkState)."""
    dy = system_matrix(rates, detunings) @ state.as_array()
    dy[0] += drive.value(state.time)
    return NetworkState.from_array(dy, state.time)


def _channel_weights(rates: CouplingRates, n: int) -> dict[str, np.ndarray]:
    """Diagonal flux weights: channel flux = sum_k w_k |y_k|^2."""
    def diag(*vals):
        w = np.zeros(n)
        w[:len(vals)] = vals
        return w

    k2 = 2.0 * rates.kappa_perp
    g2 = 2.0 * rates.gamma_mat
    return {
        "vertical_s": diag(k2),
        "vertical_t": diag(0.0, k2),
        "waveguide": diag(0.0, 0.0, 2.0 * rates.kappa_w),
        "material": diag(g2, g2),
    }


def augmented_system(rates: CouplingRates, detunings: Detunings, drive: DriveTerm):
    """Autonomous linear form y' = M y of the network plus its drive.

    Returns (M, drive initial value, channel weights). A fourth component carries
    the drive: constant (d' = 0), harmonic (d' = i*Delta*d) or exciton amplitude.
    """
    a = system_matrix(rates, detunings)
    if drive.kind == "none":
        return a, None, _channel_weights(rates, 3)
    m = np.zeros((4, 4), dtype=complex)
    m[:3, :3] = a
    if drive.kind == "emitter":
        m[0, 3] = -1j * drive.g0
        m[3, 0] = -1j * drive.g0
        m[3, 3] = -0.5 * drive.gamma
    else:
        m[0, 3] = 1.0
        m[3, 3] = 1j * drive.detuning if drive.kind == "harmonic" else 0.0
    weights = _channel_weights(rates, 4)
    if drive.kind == "emitter":
        w = np.zeros(4)
        w[3] = drive.gamma
        weights["emitter"] = w
    return m, drive.amplitude, weights


def rk4_propagator(m: np.ndarray, h: float, weights: dict[str, np.ndarray]):
    """One classical RK4 step for y' = M y, as a matrix, plus per-step flux forms.

    The flux integral over a step, accumulated with the same RK4 stage weights,
    is the Hermitian form y^H W y.
    """
    n = m.shape[0]
    eye = np.eye(n, dtype=complex)
    s1 = eye
    s2 = eye + 0.5 * h * m @ s1
    s3 = eye + 0.5 * h * m @ s2
    s4 = eye + h * m @ s3
    step = eye + (h / 6.0) * m @ (s1 + 2 * s2 + 2 * s3 + s4)
    forms = {}
    for name, w in weights.items():
        q = np.diag(w).astype(complex)
        forms[name] = (h / 6.0) * (s1.conj().T @ q @ s1 + 2 * s2.conj().T @ q @ s2
                                   + 2 * s3.conj().T @ q @ s3 + s4.conj().T @ q @ s4)
    return step, forms


def _run_linear(m, y0, h, n_steps, weights, block=256):
    step, forms = rk4_propagator(m, h, weights)
    n = m.shape[0]
    block = max(1, min(block, n_steps))
    powers = np.empty((block, n, n), dtype=complex)
    powers[0] = step
    for j in range(1, block):
        powers[j] = step @ powers[j - 1]
    ys = np.empty((n_steps + 1, n), dtype=complex)
    ys[0] = y0
    done = 0
    while done < n_steps:
        k = min(block, n_steps - done)
        ys[done + 1:done + 1 + k] = powers[:k] @ ys[done]
        done += k
    pre = ys[:-1]
    fluxes = {}
    for name, f in forms.items():
        inc = np.einsum("ni,ij,nj->n", pre.conj(), f, pre).real
        fluxes[name] = np.concatenate([[0.0], np.cumsum(inc)])
    return ys, fluxes


def max_rate(rates: CouplingRates, detunings: Detunings, drive: DriveTerm) -> float:
    return max(rates.max_rate, *np.abs(detunings.as_array()), abs(drive.detuning),
               drive.g0, drive.gamma)


def evolve(initial: NetworkState, rates: CouplingRates,
           detunings: Detunings = ZERO_DETUNING, drive: DriveTerm = DriveTerm(),
           t_end: float = 1.0, dt: float = 1e-3, record_every: int = 1) -> Trajectory:
    """Fixed-step RK4 integration from ``initial.time`` to ``initial.time + t_end``.

    The step is shortened slightly, if needed, so that an integer number of steps
    lands on ``t_end``. Channel integrals accumulate 2*kappa*|c|^2 per loss channel.
    """
    if not dt > 0 or not t_end > 0:
        raise ConfigurationError("dt and t_end must be positive")
    fastest = max_rate(rates, detunings, drive)
    if dt * fastest > STABILITY_LIMIT:
        raise ConfigurationError(
            f"dt={dt} too large: dt*max_rate={dt * fastest:.3g} > {STABILITY_LIMIT}")
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / n_steps
    m, d0, weights = augmented_system(rates, detunings, drive)
    y0 = initial.as_array()
    if d0 is not None:
        y0 = np.append(y0, d0)
    ys, fluxes = _run_linear(m, y0, h, n_steps, weights)
    idx = np.arange(0, n_steps + 1, max(1, int(record_every)))
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    times = initial.time + h * idx
    return Trajectory(
        times=times,
        amplitudes=ys[idx, :3].copy(),
        channels={k: v[idx] for k, v in fluxes.items()},
        exciton=ys[idx, 3].copy() if drive.kind == "emitter" else None,
        meta={"dt": h, "n_steps": n_steps, "drive": drive.kind},
    )


def _solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if np.linalg.cond(mat) > 1e12:
        raise SingularSystemError("steady state undefined: an undamped mode is driven")
    return np.linalg.solve(mat, rhs)


def steady_state(rates: CouplingRates, detunings: Detunings = ZERO_DETUNING,
                 drive: DriveTerm = DriveTerm.constant(1.0)) -> NetworkState:
    """Fixed point for a constant drive, or the rotating envelope for a harmonic one."""
    a = system_matrix(rates, detunings)
    b = np.array([drive.amplitude, 0, 0], dtype=complex)
    if drive.kind == "constant":
        return NetworkState.from_array(_solve(-a, b))
    if drive.kind == "harmonic":
        return NetworkState.from_array(_solve(1j * drive.detuning * np.eye(3) - a, b))
    raise ConfigurationError("steady_state needs a constant or harmonic drive")


@dataclass(frozen=True)
class TransferRatio:
    field_ratio: float  # |c_s / c_t|
    intensity_ratio: float  # |c_t / c_s|^2


def transfer_ratio(rates: CouplingRates) -> TransferRatio:
    """Closed-form S/T ratio at common resonance: |c_s/c_t| = 1 + k_perp*k_w/k_par^2.

    Material loss, when present, adds to the cavity's vertical decay.
    """
    if rates.kappa_par == 0:
        raise SingularSystemError("kappa_par = 0: target cavity is decoupled")
    field_ratio = 1.0 + (rates.kappa_perp + rates.gamma_mat) * rates.kappa_w / rates.kappa_par ** 2
    return TransferRatio(field_ratio, field_ratio ** -2)


def response_amplitudes(rates: CouplingRates, detunings: Detunings, probe: np.ndarray,
                        pump: str = "s", amplitude: complex = 1.0) -> np.ndarray:
    """Complex steady-state envelopes, shape (len(probe), 3), for a harmonic drive
    applied to mode ``pump`` at each probe detuning."""
    probe = np.asarray(probe, dtype=float)
    a = system_matrix(rates, detunings)
    mats = 1j * probe[:, None, None] * np.eye(3) - a
    b = np.zeros(3, dtype=complex)
    b[MODES.index(pump)] = amplitude
    rhs = np.broadcast_to(b, (len(probe), 3))[..., None]
    return np.linalg.solve(mats, rhs)[..., 0]


def frequency_response(rates: CouplingRates, detunings: Detunings = ZERO_DETUNING,
                       probe=None, pump: str = "s") -> dict[str, np.ndarray]:
    """Per-mode |amplitude|^2 versus probe detuning for a unit drive on ``pump``."""
    amps = response_amplitudes(rates, detunings, probe, pump)
    return {mode: np.abs(amps[:, i]) ** 2 for i, mode in enumerate(MODES)}


def fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum of a single-peaked curve, linear interpolation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.argmax(y))
    half = y[i] / 2.0
    left = i
    while left > 0 and y[left] > half:
        left -= 1
    right = i
    while right < len(y) - 1 and y[right] > half:
        right += 1
    if y[left] > half or y[right] > half:
        raise ValueError("curve does not fall below half maximum inside the grid")
    xl = np.interp(half, [y[left], y[left + 1]], [x[left], x[left + 1]])
    xr = np.interp(half, [y[right], y[right - 1]], [x[right], x[right - 1]])
    return float(xr - xl)
