"""Fluxonium coupled to its readout resonator: dressed states, dispersive
shifts, coupling calibration and drive-rate tables."""

from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from . import circuit
from .errors import CalibrationError, LabelingError, ParameterDomainError
from .params import CircuitParams

DEFAULT_TRUNC = (15, 5)
LEVEL_NAMES = "gefh"
TABLE_STATES = ((0, 0), (1, 0), (2, 0), (3, 0), (0, 1), (1, 1))
REFERENCE_NORMALIZATION = 0.258  # GHz


def state_name(label: Tuple[int, int]) -> str:
    level, photons = label
    head = LEVEL_NAMES[level] if level < len(LEVEL_NAMES) else f"L{level}"
    return f"{head}{photons}"


@dataclass(frozen=True)
class DressedSystem:
    """Eigenstates of fluxonium (x) resonator, labeled by (level, photons).

    ``drive_elements`` hold the drive operator in the dressed basis. The
    default drive is the resonator field a + a^dag (the charge line feeds the
    qubit through the resonator); ``charge_elements`` hold the bare qubit
    charge n (x) 1 for reference.
    """

    flux: float
    coupling_g: float
    resonator_freq: float
    trunc: Tuple[int, int]
    energies: np.ndarray
    vectors: np.ndarray
    labels: Dict[int, Tuple[int, int]]
    a_elements: np.ndarray
    drive_elements: np.ndarray
    charge_elements: np.ndarray
    bare: circuit.Spectrum

    def index(self, level: int, photons: int) -> int:
        return self._lookup[(level, photons)]

    @cached_property
    def _lookup(self) -> Dict[Tuple[int, int], int]:
        return {lab: k for k, lab in self.labels.items()}

    def energy(self, level: int, photons: int) -> float:
        return float(self.energies[self.index(level, photons)])

    def freq(self, a: Tuple[int, int], b: Tuple[int, int]) -> float:
        """Transition frequency E(b) - E(a), GHz."""
        return self.energy(*b) - self.energy(*a)


def _dressed_hamiltonian(bare: circuit.Spectrum, n_fl: int, n_ph: int, omega_r: float, g: float):
    energies = bare.energies[:n_fl] - bare.energies[0]
    lower = np.diag(np.sqrt(np.arange(1, n_ph, dtype=float)), 1)
    eye_f, eye_r = np.eye(n_fl), np.eye(n_ph)
    h = np.kron(np.diag(energies), eye_r) + omega_r * np.kron(eye_f, lower.T @ lower)
    h = h + g * np.kron(bare.n_elements[:n_fl, :n_fl], lower + lower.T)
    return h, lower


def _assign_labels(vectors: np.ndarray, n_ph: int) -> Dict[int, Tuple[int, int]]:
    weights = np.abs(vectors) ** 2
    best = np.argmax(weights, axis=0)
    claimed: Dict[int, list] = {}
    for k, b in enumerate(best):
        claimed.setdefault(int(b), []).append(k)
    collisions = [(b, ks) for b, ks in claimed.items() if len(ks) > 1]
    if collisions:
        lines = []
        for b, ks in collisions:
            label = (b // n_ph, b % n_ph)
            overlaps = ", ".join(f"dressed {k}: {weights[b, k]:.4f}" for k in ks)
            lines.append(f"bare {label} claimed by [{overlaps}]")
        raise LabelingError("ambiguous dressed labels; " + "; ".join(lines), collisions)
    return {k: (int(b) // n_ph, int(b) % n_ph) for k, b in enumerate(best)}


def build_dressed(
    params: CircuitParams,
    flux: float,
    trunc: Tuple[int, int] = DEFAULT_TRUNC,
    g: Optional[float] = None,
    basis_size: int = circuit.DEFAULT_BASIS,
    bare: Optional[circuit.Spectrum] = None,
) -> DressedSystem:
    """Diagonalize H_f (x) 1 + 1 (x) w_r a^dag a + g n (x) (a + a^dag).

    ``g`` defaults to ``params.coupling_g``. Labels are assigned by maximum
    overlap with bare product states; a collision raises LabelingError.
    """
    n_fl, n_ph = trunc
    if n_fl < 6 or n_ph < 3:
        raise ParameterDomainError(f"truncation {trunc} below minimum (6 levels, 3 photons)")
    g = params.coupling_g if g is None else g
    if bare is None or bare.n_levels < n_fl:
        bare = circuit.spectrum(params, flux, n_levels=max(n_fl, 10), basis_size=basis_size)
    h, lower = _dressed_hamiltonian(bare, n_fl, n_ph, params.resonator_freq, g)
    energies, vectors = np.linalg.eigh(h)
    labels = _assign_labels(vectors, n_ph)
    # phase convention: the component on the labeled bare state is real positive
    for k, (lvl, ph) in labels.items():
        c = vectors[lvl * n_ph + ph, k]
        vectors[:, k] *= abs(c) / c
    eye_f = np.eye(n_fl)
    a_full = np.kron(eye_f, lower)
    a_el = vectors.conj().T @ a_full @ vectors
    charge = np.kron(bare.n_elements[:n_fl, :n_fl], np.eye(n_ph))
    return DressedSystem(
        flux=flux,
        coupling_g=g,
        resonator_freq=params.resonator_freq,
        trunc=(n_fl, n_ph),
        energies=energies,
        vectors=vectors,
        labels=labels,
        a_elements=a_el,
        drive_elements=a_el + a_el.conj().T,
        charge_elements=vectors.conj().T @ charge @ vectors,
        bare=bare,
    )


def dispersive_shifts(ds: DressedSystem, levels: Optional[Sequence[int]] = None) -> Dict[int, float]:
    """Exact shifts chi_l = [E(l,1)-E(l,0)] - [E(g,1)-E(g,0)] in kHz."""
    if ds.trunc[1] < 2:
        raise ParameterDomainError("photon cutoff must be at least 2 to define dispersive shifts")
    levels = range(min(4, ds.trunc[0])) if levels is None else levels
    ref = ds.energy(0, 1) - ds.energy(0, 0)
    return {l: (ds.energy(l, 1) - ds.energy(l, 0) - ref) * 1e6 for l in levels}


def perturbative_shifts(
    bare: circuit.Spectrum, resonator_freq: float, g: float, levels: Sequence[int] = (0, 1, 2, 3), n_levels: Optional[int] = None
) -> Dict[int, float]:
    """Second-order dispersive shifts (kHz, relative to g) from bare matrix elements.

    chi_l = sum_m g^2 |n_lm|^2 2 w_lm / (w_r^2 - w_lm^2); only a cross-check,
    unreliable when some w_lm approaches w_r.
    """
    n_levels = bare.n_levels if n_levels is None else n_levels
    raw = {}
    for l in levels:
        total = 0.0
        for m in range(n_levels):
            if m == l:
                continue
            w = bare.energies[m] - bare.energies[l]
            total += g ** 2 * abs(bare.n_elements[l, m]) ** 2 * 2 * w / (resonator_freq ** 2 - w ** 2)
        raw[l] = total
    return {l: (raw[l] - raw[levels[0]]) * 1e6 for l in levels}


def calibrate_coupling(
    params: CircuitParams,
    target_chi: float,
    flux: float = 0.5,
    trunc: Tuple[int, int] = DEFAULT_TRUNC,
    g_max: float = 1.0,
) -> float:
    """Coupling g (GHz) for which |chi_e - chi_g| equals ``target_chi`` (kHz).

    Use ``params.with_coupling(g)`` to store the result.
    """
    if target_chi < 0:
        raise CalibrationError(f"target_chi must be non-negative, got {target_chi}")
    if target_chi == 0:
        return 0.0
    bare = circuit.spectrum(params, flux, n_levels=max(trunc[0], 10))

    def residual(g):
        ds = build_dressed(params, flux, trunc, g=g, bare=bare)
        return abs(dispersive_shifts(ds, (0, 1))[1]) - target_chi

    lo, hi = 0.0, 0.01
    while residual(hi) < 0:
        lo, hi = hi, hi * 2
        if hi > g_max:
            raise CalibrationError(f"no sign change for g in [0, {g_max}] GHz at target {target_chi} kHz")
    g = brentq(residual, lo, hi, xtol=1e-12, rtol=1e-12)
    if abs(residual(g)) > 0.01 * target_chi:
        raise CalibrationError(f"calibration converged to g={g} but residual exceeds 1%")
    return float(g)


def _table_indices(ds: DressedSystem, states):
    return [ds.index(*s) for s in states]


def _rabi_scale(ds: DressedSystem, normalization: float) -> float:
    """MHz per unit drive matrix element."""
    if not normalization > 0:
        raise ParameterDomainError("normalization must be positive")
    ref = abs(ds.drive_elements[ds.index(0, 0), ds.index(0, 1)])
    return normalization * 1e3 / ref


def drive_rate_table(
    ds: DressedSystem, normalization: float = REFERENCE_NORMALIZATION, states=TABLE_STATES
) -> np.ndarray:
    """One-photon Rabi rates (MHz) between labeled states.

    entry(i, j) = normalization |<i|D|j>| / |<g0|D|g1>| with D the drive
    operator, so the g0-g1 entry reads the normalization itself. A pi pulse on
    i<->j then takes 1/(2 entry).
    """
    idx = _table_indices(ds, states)
    table = _rabi_scale(ds, normalization) * np.abs(ds.drive_elements[np.ix_(idx, idx)])
    np.fill_diagonal(table, 0.0)
    return table


def two_photon_rate_table(
    ds: DressedSystem,
    normalization: float = REFERENCE_NORMALIZATION,
    states=TABLE_STATES,
    min_detuning: float = 1.0,
) -> np.ndarray:
    """Effective two-photon rates (MHz) with the drive at half the i->f frequency.

    Sums Omega_im Omega_mf / (2 (w_m - w_i - w_d)) over every retained dressed
    state m. Entries whose smallest denominator is below ``min_detuning`` MHz
    are returned as NaN (divergent).
    """
    rabi = _rabi_scale(ds, normalization) * ds.drive_elements  # MHz, signed
    energies = ds.energies * 1e3  # MHz
    idx = _table_indices(ds, states)
    out = np.zeros((len(idx), len(idx)))
    for a, i in enumerate(idx):
        for b, f in enumerate(idx):
            if a == b:
                continue
            lo, hi = (i, f) if energies[f] > energies[i] else (f, i)
            w_drive = (energies[hi] - energies[lo]) / 2
            mask = np.ones(len(energies), bool)
            mask[[lo, hi]] = False
            denom = energies[mask] - energies[lo] - w_drive
            if np.min(np.abs(denom)) < min_detuning:
                out[a, b] = math.nan
                continue
            out[a, b] = abs(np.sum(rabi[lo, mask] * rabi[mask, hi] / (2 * denom)))
    return out
