"""Domain types, unit conversions, loss bookkeeping, mode volumes and presets.

Rates are angular field-decay rates in rad/ns. The CLI and preset files label
them "GHz"; one GHz label equals one rad/ns (no factor of 2*pi is applied).
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Mapping

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DegenerateInputError, DomainError

C_LIGHT = 299_792_458.0  # m/s
GHZ = 1.0  # rad/ns per "GHz" label
PRESET_SCHEMA_VERSION = 1
PROVENANCES = ("system1", "best_observed", "theoretical", "fitted", "custom")


def _check_rate(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class CouplingRates:
    """Field decay/coupling rates of the source-waveguide-target network."""

    kappa_perp: float
    kappa_par: float
    kappa_w: float
    gamma_mat: float = 0.0

    def __post_init__(self):
        for name in ("kappa_perp", "kappa_par", "kappa_w", "gamma_mat"):
            value = float(getattr(self, name))
            _check_rate(name, value)
            object.__setattr__(self, name, value)

    @property
    def total(self) -> float:
        """Total cavity decay kappa_perp + kappa_par + gamma_mat."""
        return self.kappa_perp + self.kappa_par + self.gamma_mat

    @property
    def max_rate(self) -> float:
        return max(self.kappa_perp, self.kappa_par, self.kappa_w, self.gamma_mat)

    @classmethod
    def from_total(cls, total: float, par_over_perp: float, kappa_w: float = 0.0,
                   gamma_mat: float = 0.0) -> CouplingRates:
        """Split a total cavity decay using the in-plane/vertical ratio."""
        if par_over_perp < 0:
            raise DomainError("par_over_perp must be >= 0")
        radiative = total - gamma_mat
        if radiative < 0:
            raise DomainError("gamma_mat exceeds total decay")
        kappa_perp = radiative / (1.0 + par_over_perp)
        return cls(kappa_perp, par_over_perp * kappa_perp, kappa_w, gamma_mat)

    def scaled(self, factor: float) -> CouplingRates:
        return CouplingRates(self.kappa_perp * factor, self.kappa_par * factor,
                             self.kappa_w * factor, self.gamma_mat * factor)


FITTED_RATES = CouplingRates(kappa_perp=455.0, kappa_par=283.0, kappa_w=322.0)


def q_to_kappa(q: float, omega0: float) -> float:
    """Decay rate for quality factor ``q`` using kappa = 2*omega0/q."""
    if not q > 0 or not omega0 > 0:
        raise DomainError("q and omega0 must be positive")
    return 2.0 * omega0 / q


def kappa_to_q(kappa: float, omega0: float) -> float:
    if not kappa > 0 or not omega0 > 0:
        raise DomainError("kappa and omega0 must be positive")
    return 2.0 * omega0 / kappa


def wavelength_to_omega(wavelength_nm: float) -> float:
    """Angular optical frequency in rad/s."""
    if not wavelength_nm > 0:
        raise DomainError("wavelength must be positive")
    return 2.0 * math.pi * C_LIGHT / (wavelength_nm * 1e-9)


def cavity_lifetime(q: float, omega0: float) -> float:
    """Photon relaxation time Q/omega0 (seconds when omega0 is in rad/s)."""
    if not q > 0 or not omega0 > 0:
        raise DomainError("q and omega0 must be positive")
    return q / omega0


@dataclass(frozen=True)
class CavitySpec:
    wavelength: float  # nm
    refractive_index: float
    q_perp: float
    q_par: float
    v_mode: float  # (lambda/n)^3

    def __post_init__(self):
        if not (self.wavelength > 0 and self.refractive_index > 0):
            raise DomainError("wavelength and refractive_index must be positive")
        if not (self.q_perp > 0 and self.q_par > 0):
            raise DomainError("Q values must be positive")
        if not self.v_mode > 0:
            raise DomainError("v_mode must be positive")

    @property
    def omega0(self) -> float:
        return wavelength_to_omega(self.wavelength)

    @property
    def kappa_perp(self) -> float:
        """rad/s"""
        return q_to_kappa(self.q_perp, self.omega0)

    @property
    def kappa_par(self) -> float:
        return q_to_kappa(self.q_par, self.omega0)

    @property
    def par_over_perp(self) -> float:
        return self.kappa_par / self.kappa_perp


@dataclass(frozen=True)
class EmitterSpec:
    """Quantum-dot parameters. ``g0`` and ``gamma_emitter`` in rad/ns."""

    g0: float
    gamma_emitter: float
    tau_bulk: float = 1.4  # ns
    f_pc: float = 0.3
    rise_time: float = 23.0  # ps

    def __post_init__(self):
        if not (math.isfinite(self.g0) and self.g0 >= 0):
            raise DomainError("g0 must be >= 0")
        if not (math.isfinite(self.gamma_emitter) and self.gamma_emitter > 0):
            raise DomainError("gamma_emitter must be > 0")
        if not self.tau_bulk > 0:
            raise DomainError("tau_bulk must be > 0")
        if self.f_pc < 0 or self.rise_time < 0:
            raise DomainError("f_pc and rise_time must be >= 0")

    @property
    def gamma_leak(self) -> float:
        """Decay rate into non-cavity modes, F_PC / tau_bulk (rad/ns)."""
        return self.f_pc / self.tau_bulk


@dataclass(frozen=True)
class FieldGrid:
    cell_volume: float
    epsilon: np.ndarray
    field_sq: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.epsilon, dtype=float).ravel()
        e2 = np.asarray(self.field_sq, dtype=float).ravel()
        if eps.size == 1 and e2.size > 1:
            eps = np.full_like(e2, eps.item())
        if eps.shape != e2.shape:
            raise DomainError("epsilon and field_sq must have the same length")
        if not self.cell_volume > 0:
            raise DomainError("cell_volume must be positive")
        if np.any(eps <= 0):
            raise DomainError("epsilon must be positive everywhere")
        if np.any(e2 < 0):
            raise DomainError("field_sq must be non-negative")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "field_sq", e2)


@dataclass(frozen=True)
class ModeVolume:
    absolute: float
    normalized: float | None  # units of (lambda/n)^3, when wavelength is known


def mode_volume(grid: FieldGrid, wavelength: float | None = None,
                refractive_index: float | None = None) -> ModeVolume:
    """Effective mode volume: sum(eps*|E|^2) * dV / max(eps*|E|^2).

    ``wavelength`` must be in the same length unit as ``cell_volume``**(1/3)
    for the normalized value to be meaningful.
    """
    density = grid.epsilon * grid.field_sq
    peak = density.max()
    if peak <= 0:
        raise DegenerateInputError("field is identically zero")
    absolute = grid.cell_volume * float(density.sum() / peak)
    normalized = None
    if wavelength is not None:
        n = 1.0 if refractive_index is None else refractive_index
        normalized = absolute / (wavelength / n) ** 3
    return ModeVolume(absolute, normalized)


@dataclass(frozen=True)
class LossBudget:
    vertical: float
    waveguide: float
    material: float


def loss_budget(rates: CouplingRates) -> LossBudget:
    """Fraction of cavity decay going to each channel."""
    total = rates.total
    if total <= 0:
        raise DegenerateInputError("all cavity loss rates are zero")
    return LossBudget(rates.kappa_perp / total, rates.kappa_par / total,
                      rates.gamma_mat / total)


@dataclass(frozen=True)
class ParameterPreset:
    name: str
    rates: CouplingRates
    emitter: EmitterSpec
    provenance: str
    indistinguishability: float | None = None
    notes: str = field(default="", compare=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")


def _preset_from_table(name: str, table: Mapping) -> ParameterPreset:
    try:
        if "kappa_total_ghz" in table:
            rates = CouplingRates.from_total(
                table["kappa_total_ghz"] * GHZ,
                table["kappa_par_over_perp"],
                kappa_w=table.get("kappa_w_ghz", 0.0) * GHZ,
                gamma_mat=table.get("gamma_mat_ghz", 0.0) * GHZ,
            )
        else:
            rates = CouplingRates(
                table["kappa_perp_ghz"] * GHZ,
                table["kappa_par_ghz"] * GHZ,
                table.get("kappa_w_ghz", 0.0) * GHZ,
                table.get("gamma_mat_ghz", 0.0) * GHZ,
            )
        emitter = EmitterSpec(
            g0=table["g0_ghz"] * GHZ,
            gamma_emitter=table["gamma_ghz"] * GHZ,
            tau_bulk=table.get("tau_bulk_ns", 1.4),
            f_pc=table.get("f_pc", 0.3),
            rise_time=table.get("rise_time_ps", 23.0),
        )
    except KeyError as exc:
        raise DomainError(f"preset {name!r} is missing key {exc.args[0]!r}") from None
    return ParameterPreset(name, rates, emitter, table.get("provenance", "custom"),
                           table.get("indistinguishability"), table.get("notes", ""))


def parse_presets(text: str) -> dict[str, ParameterPreset]:
    """Parse a preset document (TOML, ``schema_version`` + ``[presets.<name>]``)."""
    doc = tomllib.loads(text)
    version = doc.get("schema_version")
    if version != PRESET_SCHEMA_VERSION:
        raise DomainError(f"unsupported preset schema_version {version!r}")
    return {name: _preset_from_table(name, table)
            for name, table in doc.get("presets", {}).items()}


def dump_presets(presets: Mapping[str, ParameterPreset]) -> str:
    """Serialize presets with explicit per-channel rates."""
    out = {}
    for name, p in presets.items():
        table = {
            "provenance": p.provenance,
            "kappa_perp_ghz": p.rates.kappa_perp / GHZ,
            "kappa_par_ghz": p.rates.kappa_par / GHZ,
            "kappa_w_ghz": p.rates.kappa_w / GHZ,
            "gamma_mat_ghz": p.rates.gamma_mat / GHZ,
            "g0_ghz": p.emitter.g0 / GHZ,
            "gamma_ghz": p.emitter.gamma_emitter / GHZ,
            "tau_bulk_ns": p.emitter.tau_bulk,
            "f_pc": p.emitter.f_pc,
            "rise_time_ps": p.emitter.rise_time,
        }
        if p.indistinguishability is not None:
            table["indistinguishability"] = p.indistinguishability
        if p.notes:
            table["notes"] = p.notes
        out[name] = table
    return tomli_w.dumps({"schema_version": PRESET_SCHEMA_VERSION, "presets": out})


def bundled_presets() -> dict[str, ParameterPreset]:
    text = resources.files("cavnet").joinpath("presets.toml").read_text()
    return parse_presets(text)


def load_preset(name: str) -> ParameterPreset:
    presets = bundled_presets()
    try:
        return presets[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(presets)}") from None


def preset_summary(preset: ParameterPreset) -> dict:
    d = asdict(preset)
    d["kappa_total_ghz"] = preset.rates.total / GHZ
    d["kappa_par_over_perp"] = (preset.rates.kappa_par / preset.rates.kappa_perp
                                if preset.rates.kappa_perp else math.inf)
    return d
