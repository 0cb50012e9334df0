import dataclasses

import pytest

from fluxonium import CircuitParams, NoiseParams, REFERENCE_DEVICE, load_config, parse_config
from fluxonium.errors import ConfigError, ParameterDomainError
from fluxonium.params import format_config

MINIMAL = "e_c = 0.479\ne_j = 3.395\ne_l = 0.132\n"


def test_minimal_config_matches_device():
    assert parse_config(MINIMAL) == REFERENCE_DEVICE


def test_comments_and_noise_keys():
    p = parse_config(MINIMAL + "# bath\nt_bath_diel = 30  # mK\nq_cap = 1e5\n")
    assert p.noise.t_bath_diel == 30.0
    assert p.noise.q_cap == 1e5


def test_roundtrip_format():
    p = REFERENCE_DEVICE.with_coupling(0.07)
    assert parse_config(format_config(p)) == p


@pytest.mark.parametrize("text", [
    "e_c = 0.4\ne_j = 3\n",                 # missing e_l
    MINIMAL + "bogus = 1\n",                # unknown key
    MINIMAL.replace("0.479", "abc"),        # non-numeric
    "not a config line at all [",           # unparsable
    "e_c = 0.4\ne_j = 0.1\ne_l = 0.2\n",    # e_j < e_l
    MINIMAL + "t_bath_diel = 5000\n",       # temperature out of range
])
def test_bad_configs_raise_config_error(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


@pytest.mark.parametrize("field,value", [("e_c", 0.0), ("e_l", -1.0), ("resonator_q", 0.0), ("coupling_g", -0.1)])
def test_domain_checks(field, value):
    with pytest.raises(ParameterDomainError):
        dataclasses.replace(REFERENCE_DEVICE, **{field: value})


def test_double_well_required():
    with pytest.raises(ParameterDomainError):
        CircuitParams(e_c=0.5, e_j=0.1, e_l=0.2)


def test_noise_domain():
    with pytest.raises(ParameterDomainError):
        NoiseParams(omega_ir=-1.0)
    with pytest.raises(ParameterDomainError):
        NoiseParams(t_bath_purcell=0.5)


def test_kappa_and_digest():
    # omega_r / Q = 2 pi 5.7 GHz / 600
    assert REFERENCE_DEVICE.kappa == pytest.approx(0.059690, rel=1e-4)
    assert REFERENCE_DEVICE.digest() == parse_config(MINIMAL).digest()
    assert REFERENCE_DEVICE.digest() != REFERENCE_DEVICE.with_coupling(0.01).digest()
