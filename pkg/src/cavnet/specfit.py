"""Pump/collect spectra of the coupled system and least-squares extraction of
the coupling rates from them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .cmt import ZERO_DETUNING, Detunings, fwhm, response_amplitudes, MODES
from .errors import DomainError, InsufficientDataError
from .netmodel import CouplingRates

# label -> (pumped mode, collected mode)
CONFIGURATIONS = {
    "SS": ("s", "s"),
    "TT": ("t", "t"),
    "ST": ("s", "t"),
    "TS": ("t", "s"),
    "WG-T": ("w", "t"),
    "WG-WG": ("w", "w"),
}
DEFAULT_FIT_CURVES = ("SS", "ST", "WG-T")
RATE_BOUND = 1e4  # GHz
JAC_STEP = 1e-6
LOG_FLOOR = 1e-8  # smallest fitted rate, relative to the smallest guess
COLLAPSE_RATIO = 1e-3
RESTART_FACTORS = (2.0, 4.0)
WEIGHTINGS = ("relative", "absolute")
MODEL_FLOOR = 1e-12


@dataclass
class SpectrumSet:
    grid: np.ndarray  # probe detuning, GHz
    curves: dict[str, np.ndarray]
    noise_sigma: float = 0.0

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        for label, curve in list(self.curves.items()):
            if label not in CONFIGURATIONS:
                raise DomainError(f"unknown configuration {label!r}")
            curve = np.asarray(curve, dtype=float)
            if curve.shape != self.grid.shape:
                raise DomainError(f"curve {label} does not match the grid")
            if np.any(curve < 0):
                raise DomainError(f"curve {label} has negative intensities")
            self.curves[label] = curve

    def subset(self, labels) -> SpectrumSet:
        return SpectrumSet(self.grid, {k: self.curves[k] for k in labels}, self.noise_sigma)

    def scaled(self, label: str, factor: float) -> SpectrumSet:
        curves = dict(self.curves)
        curves[label] = curves[label] * factor
        return SpectrumSet(self.grid, curves, self.noise_sigma)


@dataclass
class FitResult:
    rates: CouplingRates
    detunings: Detunings
    scales: dict[str, float]
    residual_norm: float
    stderr: dict[str, float]
    converged: bool
    iterations: int
    message: str = ""
    restarts: int = 0

    def report(self) -> str:
        rows = [
            ("kappa_perp_ghz", self.rates.kappa_perp),
            ("kappa_par_ghz", self.rates.kappa_par),
            ("kappa_w_ghz", self.rates.kappa_w),
            ("gamma_mat_ghz", self.rates.gamma_mat),
            ("delta_s_ghz", self.detunings.delta_s),
            ("delta_t_ghz", self.detunings.delta_t),
            ("delta_w_ghz", self.detunings.delta_w),
        ]
        out = ["# coupling-rate fit", f"converged = {str(self.converged).lower()}",
               f"iterations = {self.iterations}", f"restarts = {self.restarts}",
               f"residual_norm = {self.residual_norm:.6e}",
               f"message = \"{self.message}\"", "", "[parameters]",
               f"# {'name':<16} {'value':>14} {'stderr':>14}"]
        for name, value in rows:
            key = name.rsplit("_ghz", 1)[0]
            err = self.stderr.get(key, float("nan"))
            out.append(f"{name:<18} = {value:14.6f}  # stderr {err:.3e}")
        out += ["", "[scales]"]
        out += [f"\"{k}\" = {v:.9e}" for k, v in self.scales.items()]
        return "\n".join(out) + "\n"


def default_grid(rates: CouplingRates, detunings: Detunings = ZERO_DETUNING,
                 points_per_linewidth: float = 5.0, max_points: int = 200_001) -> np.ndarray:
    """Symmetric probe grid spanning all supermodes with step (narrowest decay)/5."""
    decays = [d for d in (rates.kappa_perp + rates.gamma_mat, rates.kappa_w) if d > 0]
    if not decays:
        raise DomainError("lossless network has no finite linewidth")
    half = 6.0 * (rates.kappa_perp + rates.gamma_mat + rates.kappa_par + rates.kappa_w) \
        + np.abs(detunings.as_array()).max()
    step = min(decays) / points_per_linewidth
    n = int(np.ceil(half / step))
    if 2 * n + 1 > max_points:
        n = (max_points - 1) // 2
    return np.linspace(-half, half, 2 * n + 1)


def model_curves(rates: CouplingRates, detunings: Detunings, grid: np.ndarray,
                 labels) -> dict[str, np.ndarray]:
    out = {}
    by_pump: dict[str, np.ndarray] = {}
    for label in labels:
        pump, collect = CONFIGURATIONS[label]
        if pump not in by_pump:
            by_pump[pump] = response_amplitudes(rates, detunings, grid, pump)
        out[label] = np.abs(by_pump[pump][:, MODES.index(collect)]) ** 2
    return out


def synthesize_spectra(rates: CouplingRates, detunings: Detunings = ZERO_DETUNING,
                       configurations=DEFAULT_FIT_CURVES, noise_sigma: float = 0.0,
                       seed: int = 0, grid=None) -> SpectrumSet:
    """Spectrally flat drive on the pumped mode, |collected amplitude|^2 recorded,
    with multiplicative Gaussian noise of relative size ``noise_sigma``."""
    grid = default_grid(rates, detunings) if grid is None else np.asarray(grid, dtype=float)
    curves = model_curves(rates, detunings, grid, configurations)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        for label in configurations:
            noisy = curves[label] * (1.0 + noise_sigma * rng.standard_normal(grid.size))
            curves[label] = np.clip(noisy, 0.0, None)
    return SpectrumSet(grid, curves, noise_sigma)


def _unpack(x, fit_gamma):
    i = 4 if fit_gamma else 3
    rates = CouplingRates(x[0], x[1], x[2], x[3] if fit_gamma else 0.0)
    return rates, Detunings(x[i], x[i + 1], x[i + 2])


def fit_rates(data: SpectrumSet, initial_guess: CouplingRates,
              initial_detunings: Detunings = ZERO_DETUNING, labels=None,
              fit_gamma: bool = False, max_iter: int = 200,
              weighting: str = "relative") -> FitResult:
    """Damped least squares over rates, mode detunings and per-curve scales.

    The scales enter linearly and are solved for exactly at every evaluation.
    A first pass fits differences of peak-normalized curves, which has the
    widest basin of attraction. With ``weighting="relative"`` (the default) the
    result is then polished with residuals relative to the model, the
    likelihood-matched choice for multiplicative noise; ``"absolute"`` stops
    after the first pass.

    Independent scales hide the absolute transfer level, which leaves a
    spurious valley where a small rate collapses toward zero. A first pass that
    ends there is restarted with that rate raised, and the lowest residual wins.
    Non-convergence is reported in the result, not raised.
    """
    if weighting not in WEIGHTINGS:
        raise DomainError(f"weighting must be one of {WEIGHTINGS}")
    args = (initial_detunings, labels, fit_gamma, max_iter)
    best = _fit_once(data, initial_guess, *args, "absolute")
    names = ("kappa_perp", "kappa_par", "kappa_w")
    collapsed = [n for n in names
                 if getattr(best.rates, n) < COLLAPSE_RATIO * getattr(initial_guess, n)]
    for name in collapsed:
        for factor in RESTART_FACTORS:
            guess = replace(initial_guess, **{name: getattr(initial_guess, name) * factor})
            trial = _fit_once(data, guess, *args, "absolute")
            if trial.residual_norm < best.residual_norm:
                best = trial
    restarts = len(collapsed) * len(RESTART_FACTORS)
    if weighting == "relative":
        first = best
        rates = first.rates if fit_gamma else replace(first.rates, gamma_mat=0.0)
        best = _fit_once(data, rates, first.detunings, labels, fit_gamma, max_iter, "relative")
        best.iterations += first.iterations
    best.restarts = restarts
    return best


def _fit_once(data, initial_guess, initial_detunings, labels, fit_gamma, max_iter,
              weighting):
    labels = tuple(labels or [k for k in DEFAULT_FIT_CURVES if k in data.curves]
                   or data.curves)
    if len(labels) < 1:
        raise InsufficientDataError("no curves to fit")
    grid = data.grid
    peaks = {k: data.curves[k].max() for k in labels}
    if any(p <= 0 for p in peaks.values()):
        raise InsufficientDataError("a curve is identically zero")
    span = float(np.ptp(grid))

    rate0 = [initial_guess.kappa_perp, initial_guess.kappa_par, initial_guess.kappa_w]
    if fit_gamma:
        rate0.append(initial_guess.gamma_mat)
    n_rates = len(rate0)
    scale = max(min(r for r in rate0 if r > 0) if any(r > 0 for r in rate0) else 1.0, 1e-3)
    # rates are optimized as log(kappa): positivity holds without an active bound,
    # and a step of JAC_STEP in log space is a relative step in kappa
    floor = scale * LOG_FLOOR
    u0 = np.log(np.clip(rate0, floor, RATE_BOUND))
    x0 = np.r_[u0, initial_detunings.as_array()]
    lower = np.r_[np.full(n_rates, np.log(floor)), -span * np.ones(3)]
    upper = np.r_[np.full(n_rates, np.log(RATE_BOUND)), span * np.ones(3)]
    x0 = np.clip(x0, lower, upper)
    steps = np.r_[np.full(n_rates, JAC_STEP), np.full(3, JAC_STEP * scale)]
    data_n = {k: data.curves[k] / peaks[k] for k in labels}

    def to_params(x):
        return np.r_[np.exp(x[:n_rates]), x[n_rates:]]

    def project(x):
        # optimal per-curve scales are linear, so they are eliminated exactly
        rates, det = _unpack(to_params(x), fit_gamma)
        model = model_curves(rates, det, grid, labels)
        parts, scales = [], {}
        for k in labels:
            m, d = model[k], data_n[k]
            if weighting == "relative":
                # residual 1 - d / (s m); solved for a = 1/s
                q = d / np.maximum(m, MODEL_FLOOR * max(m.max(), MODEL_FLOOR))
                qq = q @ q
                a = q.sum() / qq if qq > 0 else 0.0
                scales[k] = peaks[k] / a if a > 0 else 0.0
                parts.append(1.0 - a * q)
            else:
                mm = m @ m
                s_k = (m @ d) / mm if mm > 0 else 0.0
                scales[k] = s_k * peaks[k]
                parts.append(s_k * m - d)
        return np.concatenate(parts), scales, model

    def residuals(x):
        return project(x)[0]

    x, info = damped_least_squares(residuals, x0, lower, upper, max_iter=max_iter,
                                   steps=steps)
    params = to_params(x)
    rates, det = _unpack(params, fit_gamma)
    fun, scales, model = project(x)
    names = (["kappa_perp", "kappa_par", "kappa_w"] + (["gamma_mat"] if fit_gamma else [])
             + ["delta_s", "delta_t", "delta_w"])
    # chain rule back to linear rate units: d kappa = kappa * d u
    err = _stderr(info["jac"], fun, extra_dof=len(labels))
    err[:n_rates] *= params[:n_rates]
    stderr = dict(zip(names, err))
    return FitResult(rates, det, {k: float(v) for k, v in scales.items()},
                     float(np.linalg.norm(fun)), stderr, info["converged"],
                     info["iterations"], info["message"])


def numeric_jacobian(fun, x, h, lower, upper):
    """Central differences with absolute steps ``h``; one-sided at the bounds."""
    f0 = None
    cols = []
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] = min(x[j] + h[j], upper[j])
        xm[j] = max(x[j] - h[j], lower[j])
        if xp[j] == x[j] or xm[j] == x[j]:
            f0 = fun(x) if f0 is None else f0
        fp = f0 if xp[j] == x[j] else fun(xp)
        fm = f0 if xm[j] == x[j] else fun(xm)
        cols.append((fp - fm) / (xp[j] - xm[j]))
    return np.column_stack(cols)


def damped_least_squares(fun, x0, lower, upper, max_iter=200, xtol=1e-8,
                         lam0=1e-3, lam_max=1e12, steps=None):
    """Levenberg-Marquardt with Marquardt scaling; steps are projected onto the box.

    Converged when an accepted step is smaller than ``xtol`` relative to x, or when
    no damping up to ``lam_max`` lowers the cost (a stationary residual).
    """
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    if steps is None:
        steps = JAC_STEP * np.where(np.abs(x) > 0, np.abs(x), 1.0)
    r = fun(x)
    cost = r @ r
    lam = lam0
    message = "maximum iterations reached"
    converged = False
    it = 0
    jac = numeric_jacobian(fun, x, steps, lower, upper)
    for it in range(1, max_iter + 1):
        g = jac.T @ r
        a = jac.T @ jac
        d = np.diag(a).copy()
        d[d == 0] = 1.0
        accepted = False
        while lam <= lam_max:
            try:
                step = np.linalg.solve(a + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            x_new = np.clip(x + step, lower, upper)
            r_new = fun(x_new)
            cost_new = r_new @ r_new
            if cost_new <= cost:
                accepted = True
                break
            lam *= 10
        if not accepted:
            converged, message = True, "residual stationary"
            break
        dx = np.linalg.norm(x_new - x)
        x, r, cost = x_new, r_new, cost_new
        lam = max(lam / 10, 1e-12)
        if dx <= xtol * (np.linalg.norm(x) + xtol) or cost == 0:
            converged, message = True, "relative step below tolerance"
            break
        jac = numeric_jacobian(fun, x, steps, lower, upper)
    else:
        it = max_iter
    return x, {"jac": jac, "fun": r, "converged": converged, "iterations": it,
               "message": message}


def _stderr(jac, fun, extra_dof=0):
    n, p = jac.shape
    dof = max(n - p - extra_dof, 1)
    s2 = float(fun @ fun) / dof
    _, sv, vt = np.linalg.svd(jac, full_matrices=False)
    tiny = sv.max() * np.finfo(float).eps * max(n, p)
    keep = sv > tiny
    inv_sq = np.zeros_like(sv)
    inv_sq[keep] = 1.0 / sv[keep] ** 2
    var = (vt[keep].T ** 2 * inv_sq[keep]).sum(axis=1) * s2
    # directions in the null space are unconstrained
    null = (vt[~keep] ** 2).sum(axis=0) > 1e-12
    return np.where(null, np.inf, np.sqrt(var))


@dataclass
class DropFilterResult:
    grid: np.ndarray
    branching: dict[str, np.ndarray]  # per-frequency outflux fraction per channel
    fractions: dict[str, float]  # band average of the branching ratios
    t_spectrum: np.ndarray  # |c_t|^2 with the waveguide pumped
    t_fwhm: float  # width of the T branching curve


def drop_filter_response(rates: CouplingRates, detunings: Detunings = ZERO_DETUNING,
                         bandwidth: float | None = None, n_points: int = 20001) -> DropFilterResult:
    """Broadband light inside the waveguide, split among exit channels.

    ``fractions["T"]`` is the share of a flat input over ``bandwidth`` that leaves
    through cavity T's vertical channel; "WG" is the waveguide terminus and "S"
    the source cavity.
    """
    linewidth = 2.0 * (rates.kappa_perp + rates.gamma_mat)
    if bandwidth is None:
        bandwidth = 20.0 * max(linewidth, rates.kappa_w, rates.kappa_par)
    if not bandwidth > linewidth:
        raise DomainError("bandwidth must exceed the cavity linewidth")
    grid = np.linspace(-bandwidth / 2, bandwidth / 2, n_points)
    amps = response_amplitudes(rates, detunings, grid, pump="w")
    pwr = np.abs(amps) ** 2
    k_cav = rates.kappa_perp
    flux = {
        "S": 2 * k_cav * pwr[:, 0],
        "T": 2 * k_cav * pwr[:, 1],
        "WG": 2 * rates.kappa_w * pwr[:, 2],
        "material": 2 * rates.gamma_mat * (pwr[:, 0] + pwr[:, 1]),
    }
    total = sum(flux.values())
    total = np.where(total > 0, total, 1.0)
    branching = {k: v / total for k, v in flux.items()}
    fractions = {k: float(np.trapezoid(v, grid) / bandwidth) for k, v in branching.items()}
    t_spec = pwr[:, 1]
    t_width = fwhm(grid, branching["T"]) if t_spec.max() > 0 else 0.0
    return DropFilterResult(grid, branching, fractions, t_spec, t_width)
