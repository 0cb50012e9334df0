"""Heavy-fluxonium simulation and calibration toolkit."""

__version__ = "0.1.0"

from .params import CircuitParams, NoiseParams, REFERENCE_DEVICE, load_config, parse_config

__all__ = ["CircuitParams", "NoiseParams", "REFERENCE_DEVICE", "load_config", "parse_config", "__version__"]
