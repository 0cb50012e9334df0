"""Relaxation and echo-dephasing models versus flux.

Every ``gamma_*`` function returns a depolarization rate in 1/us for the
transition between ``levels`` (default g, e). Thermal factors use the bath
temperature ``params.noise.t_bath_diel`` unless one is passed explicitly.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import constants as const

from . import circuit, coupled
from .errors import LabelingError, UnsupportedConfigurationError
from .params import CircuitParams

PHI0 = const.h / (2 * const.e)
R_Q = const.h / const.e ** 2
ECHO_W = {3: 4 * math.log(2) - 9 / 4 * math.log(3)}
FLUX_STEP = 1e-5

CHANNELS = ("dielectric", "flux_line", "one_over_f", "charge_line", "inductive", "purcell")


def thermal_ratio(freq_ghz: float, temperature_mk: float) -> float:
    """hbar omega / k_B T."""
    return const.h * abs(freq_ghz) * 1e9 / (const.k * temperature_mk * 1e-3)


def coth_factor(freq_ghz: float, temperature_mk: float) -> float:
    x = thermal_ratio(freq_ghz, temperature_mk)
    return 1.0 / math.tanh(x / 2) if x > 0 else math.inf


def n_thermal(freq_ghz: float, temperature_mk: float) -> float:
    x = thermal_ratio(freq_ghz, temperature_mk)
    if x <= 0:
        return math.inf
    return math.exp(-x) / -math.expm1(-x)  # no overflow for a cold bath


def _transition(spec: circuit.Spectrum, levels):
    i, j = levels
    return abs(spec.freq(i, j)), abs(spec.phi_elements[i, j]) ** 2, abs(spec.n_elements[i, j]) ** 2


def _temperature(params: CircuitParams, temperature: Optional[float]) -> float:
    return params.noise.t_bath_diel if temperature is None else temperature


def gamma_dielectric(spec, params: CircuitParams, levels=(0, 1), temperature=None) -> float:
    """Capacitor loss with a frequency-independent loss tangent 1/Q_cap.

    Gamma = hbar w^2 / (8 E_C Q_cap) coth(hbar w / 2kT) |<phi>|^2. The w^2
    prefactor beats the coth pole, so the w -> 0 limit is 0.
    """
    f, phi2, _ = _transition(spec, levels)
    if f == 0:
        return 0.0
    t = _temperature(params, temperature)
    rate_per_ns = 2 * math.pi * f ** 2 / (8 * params.e_c * params.noise.q_cap) * coth_factor(f, t) * phi2
    return rate_per_ns * 1e3


def gamma_flux_line(spec, params: CircuitParams, levels=(0, 1), temperature=None) -> float:
    """Johnson-Nyquist current noise of the flux-bias attenuator."""
    f, phi2, _ = _transition(spec, levels)
    if f == 0:
        return 0.0
    t = _temperature(params, temperature)
    omega = 2 * math.pi * f * 1e9
    mutual = params.noise.mutual_m * PHI0 / 1e-3  # henry
    # inductance in the E_L = Phi0^2 / 2L convention the pi^3 prefactor assumes
    inductance = PHI0 ** 2 / (2 * const.h * params.e_l * 1e9)
    rate = (
        math.pi ** 3 * (R_Q / params.noise.r_fluxline) * (mutual / inductance) ** 2
        * phi2 * omega * coth_factor(f, t)
    )
    return rate * 1e-6


def gamma_one_over_f(spec, params: CircuitParams, levels=(0, 1)) -> float:
    f, phi2, _ = _transition(spec, levels)
    if f == 0:
        return math.inf
    e_l = 2 * math.pi * params.e_l * 1e9  # E_L / hbar in rad/s
    eta = params.noise.eta_1f * 1e-6
    omega = 2 * math.pi * f * 1e9
    return 8 * math.pi ** 3 * e_l ** 2 * eta ** 2 * phi2 / omega * 1e-6


def gamma_charge_line(spec, params: CircuitParams, levels=(0, 1), temperature=None) -> float:
    """Radiative loss through spurious charge coupling, Gamma = w/Q_c coth |<n>|^2."""
    f, _, n2 = _transition(spec, levels)
    if f == 0:
        return 0.0
    t = _temperature(params, temperature)
    omega = 2 * math.pi * f * 1e9
    return omega / params.noise.q_c * coth_factor(f, t) * n2 * 1e-6


def gamma_inductive(spec, params: CircuitParams, levels=(0, 1), temperature=None) -> float:
    f, phi2, _ = _transition(spec, levels)
    if f == 0:
        return 0.0
    t = _temperature(params, temperature)
    e_l = 2 * math.pi * params.e_l * 1e9
    return e_l / params.noise.q_ind * coth_factor(f, t) * phi2 * 1e-6


@dataclass(frozen=True)
class PurcellRates:
    """Fluxonium-level Purcell rates (1/us); entry [l, l'] is l -> l'."""

    up: np.ndarray
    down: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.up + self.down


def purcell_transition_rates(ds: coupled.DressedSystem, kappa: float, t_bath: float):
    """Golden-rule rates between individual dressed states (1/us).

    Returns ``(up, down)`` dense matrices over dressed indices; ``up[i, f]``
    is kappa n_th |<f|a^dag|i>|^2 for E_f > E_i and ``down[i, f]`` is
    kappa (n_th + 1) |<f|a|i>|^2 for E_f < E_i.
    """
    e = ds.energies
    a = ds.a_elements
    dim = len(e)
    up = np.zeros((dim, dim))
    down = np.zeros((dim, dim))
    for i in range(dim):
        for f in range(dim):
            w = e[f] - e[i]
            if i == f or w == 0:
                continue
            if w > 0:
                up[i, f] = kappa * n_thermal(w, t_bath) * abs(a[i, f]) ** 2
            else:
                down[i, f] = kappa * (n_thermal(-w, t_bath) + 1) * abs(a[f, i]) ** 2
    return up * 1e3, down * 1e3


def purcell_rates(ds: coupled.DressedSystem, kappa: float, t_bath: float) -> PurcellRates:
    """Purcell rates between fluxonium levels, summed over resonator photon
    numbers with thermal weights P_res(n) on the initial photon number.

    ``kappa`` in 1/ns (omega_r / Q), ``t_bath`` in mK.
    """
    n_fl, n_ph = ds.trunc
    x = thermal_ratio(ds.resonator_freq, t_bath)
    p_res = (1 - math.exp(-x)) * np.exp(-x * np.arange(n_ph))
    if p_res[-1] > 1e-4:
        warnings.warn(
            f"photon cutoff {n_ph} too small: thermal weight of top level is {p_res[-1]:.2e}",
            RuntimeWarning,
        )
    up_t, down_t = purcell_transition_rates(ds, kappa, t_bath)
    up = np.zeros((n_fl, n_fl))
    down = np.zeros((n_fl, n_fl))
    for i, (l, n) in ds.labels.items():
        for f, (lp, _) in ds.labels.items():
            if l == lp:
                continue
            up[l, lp] += p_res[n] * up_t[i, f]
            down[l, lp] += p_res[n] * down_t[i, f]
    return PurcellRates(up=up, down=down)


def qubit_rates(params: CircuitParams, flux: float, trunc=coupled.DEFAULT_TRUNC) -> Dict[str, float]:
    """All channel rates (1/us) for the g-e transition at one flux point.

    The Purcell entry is NaN when dressed labeling is ambiguous there.
    """
    spec = circuit.spectrum(params, flux, n_levels=max(trunc[0], 10))
    rates = {
        "dielectric": gamma_dielectric(spec, params),
        "flux_line": gamma_flux_line(spec, params),
        "one_over_f": gamma_one_over_f(spec, params),
        "charge_line": gamma_charge_line(spec, params),
        "inductive": gamma_inductive(spec, params),
    }
    if params.coupling_g == 0:
        rates["purcell"] = 0.0
    else:
        try:
            ds = coupled.build_dressed(params, flux, trunc, bare=spec)
        except LabelingError:
            rates["purcell"] = math.nan
        else:
            pr = purcell_rates(ds, params.kappa, params.noise.t_bath_purcell).total
            rates["purcell"] = float(pr[1, 0] + pr[0, 1])
    return rates


@dataclass
class T1Curve:
    fluxes: np.ndarray
    t1_us: Dict[str, np.ndarray]
    total_us: np.ndarray
    flagged: List[float] = field(default_factory=list)

    def rows(self):
        for k, f in enumerate(self.fluxes):
            yield {"flux": float(f), **{f"t1_{c}_us": float(self.t1_us[c][k]) for c in CHANNELS},
                   "t1_total_us": float(self.total_us[k])}


def _inverse(rate):
    if rate == 0:
        return math.inf
    return 1.0 / rate


def total_t1_curve(params: CircuitParams, flux_grid: Sequence[float], threads: int = 1,
                   trunc=coupled.DEFAULT_TRUNC) -> T1Curve:
    """Per-channel and combined T1 (us) over a flux grid.

    Points where dressed labeling collides get a NaN Purcell and total and are
    listed in ``flagged``.
    """
    fluxes = np.asarray(flux_grid, dtype=float)

    def one(f):
        return qubit_rates(params, float(f), trunc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_point = list(pool.map(one, fluxes))
    else:
        per_point = [one(f) for f in fluxes]
    t1 = {c: np.array([_inverse(r[c]) if not math.isnan(r[c]) else math.nan for r in per_point])
          for c in CHANNELS}
    totals = np.array([_inverse(sum(r.values())) for r in per_point])
    flagged = [float(f) for f, r in zip(fluxes, per_point) if math.isnan(r["purcell"])]
    return T1Curve(fluxes=fluxes, t1_us=t1, total_us=totals, flagged=flagged)


def echo_weight(n_pi: int) -> float:
    if n_pi not in ECHO_W:
        raise UnsupportedConfigurationError(
            f"echo weight known only for n_pi in {sorted(ECHO_W)}, got {n_pi}"
        )
    return ECHO_W[n_pi]


def flux_slope(params: CircuitParams, flux: float, step: float = FLUX_STEP) -> float:
    """d f_ge / d flux in GHz per flux quantum, central difference."""
    up = circuit.spectrum(params, flux + step, n_levels=2 * 1 + 2).qubit_freq
    dn = circuit.spectrum(params, flux - step, n_levels=2 * 1 + 2).qubit_freq
    return (up - dn) / (2 * step)


def echo_tphi(params: CircuitParams, flux: float, n_pi: int = 3) -> float:
    """1/f-limited echo dephasing time (us); infinite where the slope vanishes."""
    w = echo_weight(n_pi)
    slope = 2 * math.pi * 1e9 * abs(flux_slope(params, flux))  # rad/s per flux quantum
    rate = math.sqrt(w) * params.noise.eta_1f * 1e-6 * slope
    return math.inf if rate == 0 else 1e6 / rate


def t2e_from_times(t_c: float, t_phi: float) -> float:
    """Solve exp(-T/T_C - T^2/T_phi^2) = 1/e for T.

    Rationalized form of (sqrt(1/T_C^2 + 4/T_phi^2) - 1/T_C) / (2/T_phi^2),
    exact at T_phi = inf.
    """
    ratio = 0.0 if math.isinf(t_phi) else (t_c / t_phi) ** 2
    return 2 * t_c / (1 + math.sqrt(1 + 4 * ratio))


@dataclass
class T2Curve:
    fluxes: np.ndarray
    t_phi_us: np.ndarray
    t2e_us: np.ndarray


def t2e_curve(params: CircuitParams, flux_grid: Sequence[float], n_pi: int = 3, threads: int = 1) -> T2Curve:
    echo_weight(n_pi)
    fluxes = np.asarray(flux_grid, dtype=float)

    def one(f):
        return echo_tphi(params, float(f), n_pi)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            t_phi = np.array(list(pool.map(one, fluxes)))
    else:
        t_phi = np.array([one(f) for f in fluxes])
    t2e = np.array([t2e_from_times(params.noise.t_c, tp) for tp in t_phi])
    return T2Curve(fluxes=fluxes, t_phi_us=t_phi, t2e_us=t2e)


def ramsey_tphi(params: CircuitParams, flux: float, t_us: Optional[float] = None) -> float:
    """Gaussian Ramsey dephasing time (us) with the sqrt(ln(omega_ir t)) factor.

    Needs ``params.noise.omega_ir``. Without ``t_us`` the time is solved
    self-consistently, T = T_phi(T).
    """
    omega_ir = params.noise.omega_ir
    if omega_ir is None:
        raise UnsupportedConfigurationError("Ramsey dephasing needs an explicit omega_ir")
    slope = 2 * math.pi * 1e9 * abs(flux_slope(params, flux))
    if slope == 0:
        return math.inf
    base = math.sqrt(2) * params.noise.eta_1f * 1e-6 * slope

    def tphi(t):
        log_term = math.log(omega_ir * t * 1e-6)
        if log_term <= 0:
            raise UnsupportedConfigurationError("omega_ir * t must exceed 1 for the Ramsey formula")
        return 1e6 / (base * math.sqrt(log_term))

    if t_us is not None:
        return tphi(t_us)
    t = 1e6 / base
    for _ in range(200):
        nxt = tphi(t)
        if abs(nxt - t) < 1e-12 * t:
            break
        t = nxt
    return t
