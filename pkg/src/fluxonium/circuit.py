"""Fluxonium Hamiltonian in the harmonic-oscillator basis and its spectrum."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NumericError, ParameterDomainError
from .params import CircuitParams

DEFAULT_BASIS = 120
FRUSTRATION = 0.5


def oscillator_length(params: CircuitParams) -> float:
    return (8 * params.e_c / params.e_l) ** 0.25


def oscillator_operators(params: CircuitParams, basis_size: int):
    """Phase and charge operators of the L-C oscillator, truncated to ``basis_size``.

    Returns ``(phi, n)`` with phi real symmetric and n imaginary antisymmetric,
    normalised so that [phi, n] = i away from the truncation edge.
    """
    ell = oscillator_length(params)
    lower = np.diag(np.sqrt(np.arange(1, basis_size, dtype=float)), 1)
    phi = ell / math.sqrt(2) * (lower + lower.T)
    n = 1j / (math.sqrt(2) * ell) * (lower.T - lower)
    return phi, n


def build_hamiltonian(params: CircuitParams, flux: float, basis_size: int = DEFAULT_BASIS) -> np.ndarray:
    """Dense fluxonium Hamiltonian (GHz) at external flux ``flux`` (flux quanta).

    The quadratic part is diagonal in the oscillator basis; the junction term
    -E_J cos(phi - 2 pi flux) is evaluated through the eigendecomposition of
    the truncated phase operator.
    """
    if basis_size < 20:
        raise ParameterDomainError(f"basis_size must be >= 20, got {basis_size}")
    if not math.isfinite(flux):
        raise ParameterDomainError(f"flux must be finite, got {flux}")
    phi, _ = oscillator_operators(params, basis_size)
    x, u = np.linalg.eigh(phi)
    cos_term = (u * np.cos(x - 2 * math.pi * flux)) @ u.T
    quadratic = params.plasma_freq * np.diag(np.arange(basis_size) + 0.5)
    h = quadratic - params.e_j * cos_term
    return 0.5 * (h + h.T)


@dataclass(frozen=True)
class Spectrum:
    """Lowest eigenpairs at one flux point with phase and charge matrix elements."""

    flux: float
    energies: np.ndarray
    basis_size: int
    phi_elements: np.ndarray
    n_elements: np.ndarray
    vectors: np.ndarray

    @property
    def n_levels(self) -> int:
        return len(self.energies)

    @property
    def qubit_freq(self) -> float:
        return float(self.energies[1] - self.energies[0])

    def freq(self, i: int, j: int) -> float:
        """Transition frequency E_j - E_i in GHz."""
        return float(self.energies[j] - self.energies[i])

    def to_dict(self, n_levels: Optional[int] = None) -> dict:
        k = self.n_levels if n_levels is None else min(n_levels, self.n_levels)
        return {
            "flux": self.flux,
            "basis_size": self.basis_size,
            "energies_ghz": [float(e) for e in self.energies[:k]],
            "transition_ghz": [float(e - self.energies[0]) for e in self.energies[:k]],
            "phi_elements": self.phi_elements[:k, :k].real.tolist(),
            "n_elements_abs": np.abs(self.n_elements[:k, :k]).tolist(),
        }


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigensolve(
    h: np.ndarray,
    n_levels: int,
    phi_op: Optional[np.ndarray] = None,
    n_op: Optional[np.ndarray] = None,
    flux: float = math.nan,
) -> Spectrum:
    """Sorted lowest ``n_levels`` eigenpairs of a Hermitian matrix.

    Each eigenvector is signed so its largest-magnitude component is positive,
    which makes the returned matrix elements reproducible bit-for-bit.
    """
    basis_size = h.shape[0]
    if n_levels < 1 or n_levels > basis_size // 4:
        raise ParameterDomainError(
            f"n_levels={n_levels} must be in [1, basis_size/4 = {basis_size // 4}]"
        )
    try:
        energies, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"eigensolver failed ({exc}); try a different basis_size than {basis_size}"
        ) from exc
    energies = energies[:n_levels]
    vectors = _fix_signs(vectors[:, :n_levels])
    phi_el = vectors.conj().T @ phi_op @ vectors if phi_op is not None else np.zeros((n_levels,) * 2)
    n_el = vectors.conj().T @ n_op @ vectors if n_op is not None else np.zeros((n_levels,) * 2)
    return Spectrum(
        flux=flux,
        energies=energies,
        basis_size=basis_size,
        phi_elements=phi_el,
        n_elements=n_el,
        vectors=vectors,
    )


def spectrum(
    params: CircuitParams,
    flux: float,
    n_levels: int = 10,
    basis_size: int = DEFAULT_BASIS,
) -> Spectrum:
    """Build and diagonalize in one call."""
    h = build_hamiltonian(params, flux, basis_size)
    phi, n = oscillator_operators(params, basis_size)
    return eigensolve(h, n_levels, phi, n, flux=flux)


def sweep(
    params: CircuitParams,
    fluxes: Sequence[float],
    n_levels: int = 10,
    basis_size: int = DEFAULT_BASIS,
    threads: int = 1,
) -> list:
    """Spectra over a flux grid, returned in grid order."""
    def one(f):
        return spectrum(params, float(f), n_levels, basis_size)

    if threads <= 1:
        return [one(f) for f in fluxes]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, fluxes))


def two_level_reduction(spec: Spectrum, params: CircuitParams, delta_flux: float):
    """Spin-1/2 idealization near frustration.

    Returns ``(delta, amplitude)`` in GHz: the g-e splitting and the sigma_x
    coefficient 4 pi |<g|phi|e>| E_L delta_flux.
    """
    if not abs(spec.flux - FRUSTRATION) < 1e-9:
        raise ParameterDomainError(f"spectrum must be computed at flux 0.5, got {spec.flux}")
    phi_ge = abs(spec.phi_elements[0, 1])
    return spec.qubit_freq, 4 * math.pi * phi_ge * params.e_l * delta_flux
