"""Helpers shared by the experiment scripts: config loading and figure setup."""

from pathlib import Path

from fluxonium import REFERENCE_DEVICE, coupled, load_config

HERE = Path(__file__).resolve().parent
DEFAULT_CONFIG = HERE / "configs" / "device.cfg"


def device(config=None, chi_khz=60.0):
    """Load a device and calibrate its coupling when the config leaves it at zero."""
    params = load_config(config) if config else REFERENCE_DEVICE
    if params.coupling_g == 0:
        params = params.with_coupling(coupled.calibrate_coupling(params, chi_khz))
    return params


def pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt
