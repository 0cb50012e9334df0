"""Device parameters and flat key-value config ingestion.

Units throughout the package: energies as frequencies E/h in GHz, times in
ns unless a name says otherwise (``_us``, ``_ms``), flux in units of the flux
quantum.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError, ParameterDomainError


@dataclass(frozen=True)
class NoiseParams:
    q_cap: float = 1 / 8e-6
    q_ind: float = 5e9
    q_c: float = 7.4e4
    r_fluxline: float = 26.0  # ohm
    mutual_m: float = 1 / 1.6  # flux quanta per mA
    eta_1f: float = 5.21  # micro flux quanta
    t_bath_diel: float = 42.0  # mK
    t_bath_purcell: float = 60.0  # mK
    t_c: float = 300.0  # us, white-noise echo time at frustration
    omega_ir: Optional[float] = None  # rad/s; no default on purpose

    def __post_init__(self):
        for name in ("q_cap", "q_ind", "q_c", "r_fluxline", "mutual_m", "eta_1f", "t_c"):
            value = getattr(self, name)
            if not value > 0:
                raise ParameterDomainError(f"{name} must be positive, got {value}")
        for name in ("t_bath_diel", "t_bath_purcell"):
            value = getattr(self, name)
            if not 1.0 < value < 1000.0:
                raise ParameterDomainError(f"{name} must lie in (1, 1000) mK, got {value}")
        if self.omega_ir is not None and not self.omega_ir > 0:
            raise ParameterDomainError(f"omega_ir must be positive, got {self.omega_ir}")


@dataclass(frozen=True)
class CircuitParams:
    e_c: float
    e_j: float
    e_l: float
    resonator_freq: float = 5.7
    resonator_q: float = 600.0
    coupling_g: float = 0.0
    noise: NoiseParams = field(default_factory=NoiseParams)

    def __post_init__(self):
        for name in ("e_c", "e_j", "e_l", "resonator_freq", "resonator_q"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterDomainError(f"{name} must be positive, got {value}")
        if not self.e_j > self.e_l:
            raise ParameterDomainError(
                f"e_j ({self.e_j}) must exceed e_l ({self.e_l}) for a double-well potential"
            )
        if self.coupling_g < 0 or not math.isfinite(self.coupling_g):
            raise ParameterDomainError(f"coupling_g must be non-negative, got {self.coupling_g}")

    @property
    def kappa(self) -> float:
        """Resonator energy decay rate omega_r/Q in 1/ns."""
        return 2 * math.pi * self.resonator_freq / self.resonator_q

    @property
    def plasma_freq(self) -> float:
        return math.sqrt(8 * self.e_c * self.e_l)

    def with_coupling(self, g: float) -> "CircuitParams":
        return dataclasses.replace(self, coupling_g=g)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """Stable short hash of the full parameter set."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


REFERENCE_DEVICE = CircuitParams(e_c=0.479, e_j=3.395, e_l=0.132)

_CIRCUIT_KEYS = {"e_c", "e_j", "e_l", "resonator_freq", "resonator_q", "coupling_g"}
_NOISE_KEYS = {f.name for f in dataclasses.fields(NoiseParams)}


def parse_config(text: str) -> CircuitParams:
    """Parse ``key = value`` lines (``#`` comments allowed) into CircuitParams."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string("[device]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    raw = dict(parser["device"])
    unknown = set(raw) - _CIRCUIT_KEYS - _NOISE_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"e_c", "e_j", "e_l"} - set(raw)
    if missing:
        raise ConfigError(f"missing required config keys: {sorted(missing)}")
    try:
        values = {k: float(v) for k, v in raw.items()}
    except ValueError as exc:
        raise ConfigError(f"non-numeric config value: {exc}") from exc
    try:
        noise = NoiseParams(**{k: v for k, v in values.items() if k in _NOISE_KEYS})
        return CircuitParams(noise=noise, **{k: v for k, v in values.items() if k in _CIRCUIT_KEYS})
    except ParameterDomainError as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc


def load_config(path) -> CircuitParams:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())


def format_config(params: CircuitParams) -> str:
    lines = [f"{k} = {getattr(params, k)!r}" for k in sorted(_CIRCUIT_KEYS)]
    for k in sorted(_NOISE_KEYS):
        v = getattr(params.noise, k)
        if v is not None:
            lines.append(f"{k} = {v!r}")
    return "\n".join(lines) + "\n"
