import dataclasses

import numpy as np
import pytest

from fluxonium import coupled
from fluxonium.errors import CalibrationError, LabelingError, ParameterDomainError

# one-photon rates (MHz) of the reference drive table, same normalization
REF_ONE_PHOTON = {("g0", "h0"): 6.2577, ("e0", "f0"): 5.8679, ("f0", "h0"): 1.2475}
REF_TWO_PHOTON_G0F0 = 1.9213


def _entry(table, a, b):
    names = [coupled.state_name(s) for s in coupled.TABLE_STATES]
    return table[names.index(a), names.index(b)]


def test_decoupled_limit(device):
    ds = coupled.build_dressed(device, 0.5, g=0.0)
    bare = ds.bare.energies - ds.bare.energies[0]
    for k, (l, n) in ds.labels.items():
        assert ds.energies[k] == pytest.approx(bare[l] + n * device.resonator_freq, abs=1e-12)
    assert all(abs(v) < 1e-9 for v in coupled.dispersive_shifts(ds).values())


def test_labels_are_bijection(dressed):
    n_fl, n_ph = dressed.trunc
    assert sorted(dressed.labels.values()) == [(l, n) for l in range(n_fl) for n in range(n_ph)]


def test_continuity_at_tiny_coupling(device):
    a = coupled.build_dressed(device, 0.5, g=0.0).energies
    b = coupled.build_dressed(device, 0.5, g=1e-6).energies
    assert np.max(np.abs(a - b)) < 1e-6  # 1 kHz


def test_calibration_fixed_point(dressed):
    chi = coupled.dispersive_shifts(dressed)
    assert chi[1] - chi[0] == pytest.approx(60.0, rel=0.01)


def test_calibration_zero_target(device):
    assert coupled.calibrate_coupling(device, 0.0) == 0.0


def test_calibration_no_bracket(device):
    with pytest.raises(CalibrationError):
        coupled.calibrate_coupling(device, 60.0, g_max=0.02)


def test_exact_vs_perturbative(dressed, g_star):
    exact = coupled.dispersive_shifts(dressed)
    pert = coupled.perturbative_shifts(dressed.bare, dressed.resonator_freq, g_star)
    for level in (1, 2, 3):
        assert exact[level] == pytest.approx(pert[level], rel=0.10)


def test_second_order_scaling(coupled_device, g_star, dressed):
    doubled = coupled.build_dressed(coupled_device, 0.5, g=2 * g_star)
    ratio = coupled.dispersive_shifts(doubled)[1] / coupled.dispersive_shifts(dressed)[1]
    pert = coupled.perturbative_shifts(dressed.bare, dressed.resonator_freq, 2 * g_star)[1] / \
        coupled.perturbative_shifts(dressed.bare, dressed.resonator_freq, g_star)[1]
    assert pert == pytest.approx(4.0)
    assert ratio == pytest.approx(pert, rel=0.05)


def test_dispersive_ordering(dressed):
    chi = coupled.dispersive_shifts(dressed)
    # reference ordering chi_e < chi_g < chi_h < chi_f; see notes for why this model disagrees
    assert chi[1] < chi[0] < chi[3] < chi[2], chi


def test_dispersive_ratio(dressed):
    chi = coupled.dispersive_shifts(dressed)
    ratio = (chi[2] - chi[0]) / (chi[1] - chi[0])
    assert ratio == pytest.approx(5.0, rel=0.30), ratio


def test_labeling_collision_is_reported(device):
    p = dataclasses.replace(device, resonator_freq=2.963, coupling_g=0.3)
    with pytest.raises(LabelingError) as info:
        coupled.build_dressed(p, 0.5)
    assert info.value.collisions
    assert "claimed by" in str(info.value)


def test_truncation_minimum(device):
    with pytest.raises(ParameterDomainError):
        coupled.build_dressed(device, 0.5, trunc=(5, 3))


def test_drive_table_structure(dressed):
    table = coupled.drive_rate_table(dressed)
    assert np.allclose(table, table.T)
    assert np.all(np.diag(table) == 0)
    assert _entry(table, "g0", "g1") == pytest.approx(258.0)


@pytest.mark.parametrize("pair,ref", sorted(REF_ONE_PHOTON.items()))
def test_drive_table_values(dressed, pair, ref):
    assert _entry(coupled.drive_rate_table(dressed), *pair) == pytest.approx(ref, rel=0.25)


def test_drive_table_ratios(dressed):
    table = coupled.drive_rate_table(dressed)
    gh, ef, fh = (_entry(table, *p) for p in (("g0", "h0"), ("e0", "f0"), ("f0", "h0")))
    assert gh / ef == pytest.approx(6.2577 / 5.8679, rel=0.25)
    assert fh / gh == pytest.approx(1.2475 / 6.2577, rel=0.25)


def test_normalization_must_be_positive(dressed):
    with pytest.raises(ParameterDomainError):
        coupled.drive_rate_table(dressed, normalization=0.0)


def test_two_photon_parity(dressed):
    table = coupled.two_photon_rate_table(dressed)
    assert np.nan_to_num(_entry(table, "g0", "e0")) < 1e-6 * _entry(table, "g0", "f0")
    assert _entry(table, "g0", "f0") > 0


def test_two_photon_pattern(dressed):
    # relative pattern of the allowed entries follows the reference table
    table = coupled.two_photon_rate_table(dressed)
    assert _entry(table, "e0", "h0") / _entry(table, "g0", "f0") == pytest.approx(1.6489 / 1.9213, rel=0.25)
    assert _entry(table, "g0", "e1") / _entry(table, "g0", "f0") == pytest.approx(0.9177 / 1.9213, rel=0.25)


def test_two_photon_magnitude(dressed):
    table = coupled.two_photon_rate_table(dressed)
    value = _entry(table, "g0", "f0")
    assert REF_TWO_PHOTON_G0F0 / 2 <= value <= REF_TWO_PHOTON_G0F0 * 2, value


def test_two_photon_decoupled_self(device):
    ds = coupled.build_dressed(device, 0.5, g=0.0)
    table = coupled.two_photon_rate_table(ds)
    assert np.all(np.diag(table) == 0)
