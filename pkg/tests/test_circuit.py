import math
import time

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from fluxonium import CircuitParams, circuit
from fluxonium.errors import ParameterDomainError


@pytest.fixture(scope="module")
def half(device):
    return circuit.spectrum(device, 0.5, n_levels=10)


def test_qubit_splitting(device):
    t0 = time.perf_counter()
    s = circuit.spectrum(device, 0.5)
    assert time.perf_counter() - t0 < 1.0
    assert s.qubit_freq == pytest.approx(0.014, abs=0.0015)


def test_harmonic_limit():
    # with the junction removed the quadratic part is an oscillator at sqrt(8 E_C E_L)
    p = CircuitParams(e_c=0.5, e_j=0.2, e_l=0.1)
    phi, n = circuit.oscillator_operators(p, 120)
    h0 = (4 * p.e_c * n @ n + 0.5 * p.e_l * phi @ phi).real
    e = np.linalg.eigvalsh(h0)[:6]
    assert np.allclose(np.diff(e), math.sqrt(8 * p.e_c * p.e_l), rtol=1e-9)


@pytest.mark.parametrize("flux", [0.0, 0.31, 0.5])
def test_hamiltonian_against_matrix_functions(device, flux):
    size = 60
    phi, n = circuit.oscillator_operators(device, size)
    a = 2 * math.pi * flux
    oracle = (4 * device.e_c * n @ n + 0.5 * device.e_l * phi @ phi).real
    oracle -= device.e_j * (scipy.linalg.cosm(phi) * math.cos(a) + scipy.linalg.sinm(phi) * math.sin(a))
    h = circuit.build_hamiltonian(device, flux, size)
    k = size - 2  # the squared truncated operators differ only in the last row/column
    assert np.allclose(h[:k, :k], oracle[:k, :k], atol=1e-9)
    assert np.allclose(h, h.T)


def test_basis_convergence(device):
    a = circuit.spectrum(device, 0.5, n_levels=6, basis_size=120).energies
    b = circuit.spectrum(device, 0.5, n_levels=6, basis_size=240).energies
    assert np.allclose(a, b, rtol=1e-9, atol=0)


def test_parity_selection_rule(half):
    for i, j in [(0, 2), (1, 3), (0, 4), (1, 5)]:
        assert abs(half.n_elements[i, j]) < 1e-8
        assert abs(half.phi_elements[i, j]) < 1e-8


def test_plasmon_ordering(half):
    # fluxon pair far below the plasmon pair
    assert half.freq(0, 1) < 0.1
    assert half.freq(0, 2) > 1.0
    assert half.freq(1, 3) > 1.0


def test_eigenvectors_orthonormal_and_projector(half):
    v = half.vectors
    assert np.allclose(v.conj().T @ v, np.eye(v.shape[1]), atol=1e-10)
    proj = v @ v.conj().T
    assert np.allclose(proj @ proj, proj, atol=1e-10)


def test_sign_convention_reproducible(device):
    a = circuit.spectrum(device, 0.47)
    b = circuit.spectrum(device, 0.47)
    assert np.array_equal(a.phi_elements, b.phi_elements)
    big = np.argmax(np.abs(a.vectors), axis=0)
    assert np.all(a.vectors[big, np.arange(a.vectors.shape[1])].real > 0)


def test_matrix_elements_hermitian(half):
    assert np.allclose(half.phi_elements, half.phi_elements.conj().T)
    assert np.allclose(half.n_elements, half.n_elements.conj().T)


@pytest.mark.parametrize("flux", np.linspace(0.35, 0.5, 21))
def test_n_phi_identity(device, flux):
    s = circuit.spectrum(device, flux, n_levels=6)
    for i in range(6):
        for j in range(i + 1, 6):
            lhs = abs(s.n_elements[i, j])
            rhs = abs(s.freq(i, j)) / (8 * device.e_c) * abs(s.phi_elements[i, j])
            if rhs < 1e-8:
                assert lhs < 1e-8
            else:
                assert lhs == pytest.approx(rhs, rel=1e-6)


@given(st.floats(0.001, 0.2))
def test_reflection_symmetry(delta):
    from fluxonium import REFERENCE_DEVICE
    a = circuit.spectrum(REFERENCE_DEVICE, 0.5 + delta, n_levels=6).energies
    b = circuit.spectrum(REFERENCE_DEVICE, 0.5 - delta, n_levels=6).energies
    assert np.allclose(a, b, atol=1e-10, rtol=0)


@given(st.floats(-1.0, 1.0))
def test_flux_periodicity(flux):
    from fluxonium import REFERENCE_DEVICE
    a = circuit.spectrum(REFERENCE_DEVICE, flux, n_levels=4).energies
    b = circuit.spectrum(REFERENCE_DEVICE, flux + 1.0, n_levels=4).energies
    assert np.allclose(a, b, atol=1e-8)


def test_eigensolve_level_limit(device):
    h = circuit.build_hamiltonian(device, 0.5, 40)
    with pytest.raises(ParameterDomainError):
        circuit.eigensolve(h, 11)


def test_small_basis_rejected(device):
    with pytest.raises(ParameterDomainError):
        circuit.build_hamiltonian(device, 0.5, 10)


def test_two_level_reduction(device, half):
    delta, a0 = circuit.two_level_reduction(half, device, 0.0)
    assert delta == pytest.approx(half.qubit_freq)
    assert a0 == 0.0
    _, a6 = circuit.two_level_reduction(half, device, 0.06)
    _, a3 = circuit.two_level_reduction(half, device, 0.03)
    assert a6 == pytest.approx(0.300, rel=0.15)
    assert a3 == pytest.approx(a6 / 2, rel=1e-12)


def test_two_level_reduction_needs_frustration(device):
    s = circuit.spectrum(device, 0.45)
    with pytest.raises(ParameterDomainError):
        circuit.two_level_reduction(s, device, 0.01)


def test_sweep_matches_pointwise(device):
    fluxes = [0.4, 0.45, 0.5]
    serial = circuit.sweep(device, fluxes, n_levels=4)
    threaded = circuit.sweep(device, fluxes, n_levels=4, threads=3)
    for s, t, f in zip(serial, threaded, fluxes):
        assert np.array_equal(s.energies, t.energies)
        assert s.flux == f


def test_spectrum_json(half):
    d = half.to_dict(n_levels=4)
    assert len(d["energies_ghz"]) == 4
    assert d["transition_ghz"][1] == pytest.approx(half.qubit_freq)
    assert np.asarray(d["phi_elements"]).shape == (4, 4)
