"""Net-zero flux pulses on the lab-frame two-level model.

The qubit Hamiltonian is H/h = A(t)/2 sigma_x + Delta/2 sigma_z with A(t) a
train of triangular spikes and idles; U = T exp(-2 pi i int H dt). Times in ns,
frequencies in GHz. Basis order is (+z, -z), i.e. the standard Pauli matrices.

A spike of peak A and width dt_p turns the Bloch vector about x by
theta = pi A dt_p (its area times 2 pi), and about z by 2 pi Delta dt_p, so
lambda = 2 pi Delta dt_p / |theta|.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import CalibrationError, ParameterDomainError

DEFAULT_DELTA = 0.014  # GHz
DEFAULT_DT_P = 4.76  # ns
MAX_STEP = 0.01  # ns
Y2_LAMBDA_MAX = math.sqrt(2) - 1
Y_LAMBDA_MAX = 1.0

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
PAULIS = (SX, SY, SZ)

# +z is the upper level of Delta/2 sigma_z, i.e. the qubit |e>
EXCITED = np.array([1, 0], dtype=complex)
GROUND = np.array([0, 1], dtype=complex)

CARDINAL_STATES = {
    "+z": np.array([1, 0], dtype=complex),
    "-z": np.array([0, 1], dtype=complex),
    "+x": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-x": np.array([1, -1], dtype=complex) / math.sqrt(2),
    "+y": np.array([1, 1j], dtype=complex) / math.sqrt(2),
    "-y": np.array([1, -1j], dtype=complex) / math.sqrt(2),
}


# --- SU(2) helpers -----------------------------------------------------------

def su2(vec) -> np.ndarray:
    """exp(-i v . sigma) for real vectors of shape (..., 3)."""
    v = np.asarray(vec, dtype=float)
    norm = np.linalg.norm(v, axis=-1)
    c = np.cos(norm)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(norm > 0, np.sin(norm) / np.where(norm > 0, norm, 1), 1.0)
    x, y, z = (v[..., k] * s for k in range(3))
    out = np.empty(v.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = c - 1j * z
    out[..., 0, 1] = -1j * x - y
    out[..., 1, 0] = -1j * x + y
    out[..., 1, 1] = c + 1j * z
    return out


def rz(theta: float) -> np.ndarray:
    return su2([0, 0, theta / 2])


def rx(theta: float) -> np.ndarray:
    return su2([theta / 2, 0, 0])


def ry(theta: float) -> np.ndarray:
    return su2([0, theta / 2, 0])


def rxz(theta: float, lam: float) -> np.ndarray:
    """exp(-i (theta sigma_x + lam |theta| sigma_z) / 2)."""
    return su2([theta / 2, 0, lam * abs(theta) / 2])


def trace_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(U^dag V)| / d, blind to global phase."""
    return float(abs(np.trace(u.conj().T @ v)) / u.shape[0])


def bloch_vector(psi: np.ndarray) -> np.ndarray:
    return np.array([np.real(np.vdot(psi, p @ psi)) for p in PAULIS])


# --- pulse programs ----------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """One piece of a flux pulse: a triangular spike or an idle."""

    kind: str
    amplitude: float
    duration: float

    def __post_init__(self):
        if self.kind not in ("spike", "idle"):
            raise ParameterDomainError(f"segment kind must be 'spike' or 'idle', got {self.kind!r}")
        if not self.duration > 0:
            raise ParameterDomainError(f"segment duration must be positive, got {self.duration}")
        if self.kind == "idle" and self.amplitude != 0:
            raise ParameterDomainError("idle segments carry no amplitude")

    @property
    def area(self) -> float:
        """Signed flux area in GHz ns (A dt_p / 2 for a spike)."""
        return self.amplitude * self.duration / 2 if self.kind == "spike" else 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "amplitude_ghz": self.amplitude, "duration_ns": self.duration}


def spike(amplitude: float, duration: float) -> Segment:
    return Segment("spike", float(amplitude), float(duration))


def idle(duration: float) -> Segment:
    return Segment("idle", 0.0, float(duration))


@dataclass(frozen=True)
class PulseProgram:
    segments: Tuple[Segment, ...]
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not self.delta >= 0:
            raise ParameterDomainError(f"delta must be non-negative, got {self.delta}")
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    @property
    def net_area(self) -> float:
        return sum(s.area for s in self.segments)

    @property
    def n_spikes(self) -> int:
        return sum(s.kind == "spike" for s in self.segments)

    def then(self, other: "PulseProgram") -> "PulseProgram":
        """Play ``self`` first, then ``other``."""
        if other.delta != self.delta:
            raise ParameterDomainError("cannot concatenate programs with different delta")
        return PulseProgram(self.segments + other.segments, self.delta)

    def scaled(self, k: float) -> "PulseProgram":
        """Spike amplitudes times k, spike widths over k (areas unchanged)."""
        segs = [spike(s.amplitude * k, s.duration / k) if s.kind == "spike" else s for s in self.segments]
        return PulseProgram(tuple(segs), self.delta)

    def breakpoints(self) -> List[float]:
        """Segment edges and spike apexes, where A(t) has kinks (ns)."""
        pts, t = [0.0], 0.0
        for s in self.segments:
            if s.kind == "spike":
                pts.append(t + s.duration / 2)
            t += s.duration
            pts.append(t)
        return pts

    def amplitude(self, t: float) -> float:
        """A(t) in GHz; zero outside the program."""
        start = 0.0
        for s in self.segments:
            if start <= t <= start + s.duration:
                return float(_triangle(t - start, s.amplitude, s.duration)) if s.kind == "spike" else 0.0
            start += s.duration
        return 0.0

    def hamiltonian(self, t: float) -> np.ndarray:
        """H(t)/h in GHz."""
        return 0.5 * self.amplitude(t) * SX + 0.5 * self.delta * SZ

    def to_dict(self) -> dict:
        return {
            "delta_ghz": self.delta,
            "length_ns": self.duration,
            "segments": [s.to_dict() for s in self.segments],
        }


# --- exact propagation -------------------------------------------------------

_GAUSS = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)


def _spike_steps(duration: float, max_step: float) -> int:
    n = max(2, math.ceil(duration / max_step))
    return n + (n % 2)  # apex on a step boundary


def _triangle(t, amplitude, duration):
    return amplitude * (1 - np.abs(2 * t / duration - 1))


def spike_step_unitaries(amplitude, duration: float, delta: float, max_step: float = MAX_STEP):
    """Fourth-order Magnus step propagators across one triangular spike.

    ``amplitude`` may be an array; returns shape (n_amp, n_steps, 2, 2) and the
    step edges.
    """
    amps = np.atleast_1d(np.asarray(amplitude, dtype=float))
    n = _spike_steps(duration, max_step)
    h = duration / n
    t0 = np.arange(n) * h
    a1 = _triangle(t0 + _GAUSS[0] * h, amps[:, None], duration)
    a2 = _triangle(t0 + _GAUSS[1] * h, amps[:, None], duration)
    # H = (A/2, 0, Delta/2).sigma; Omega = -i v.sigma with
    # v = pi h (h1 + h2) + (2 sqrt3 / 3) pi^2 h^2 (h2 x h1)
    v = np.zeros(a1.shape + (3,))
    v[..., 0] = math.pi * h * (a1 + a2) / 2
    v[..., 1] = 2 * math.sqrt(3) / 3 * math.pi ** 2 * h ** 2 * delta * (a1 - a2) / 4
    v[..., 2] = math.pi * h * delta
    return su2(v), np.linspace(0.0, duration, n + 1)


def _chain(steps: np.ndarray) -> np.ndarray:
    """Time-ordered product over axis -3 (first step rightmost)."""
    u = np.broadcast_to(I2, steps.shape[:-3] + (2, 2)).copy()
    for k in range(steps.shape[-3]):
        u = steps[..., k, :, :] @ u
    return u


def spike_unitary(amplitude, duration: float, delta: float, max_step: float = MAX_STEP) -> np.ndarray:
    steps, _ = spike_step_unitaries(amplitude, duration, delta, max_step)
    u = _chain(steps)
    return u[0] if np.ndim(amplitude) == 0 else u


def idle_unitary(duration, delta: float) -> np.ndarray:
    """Free precession, R_z(2 pi Delta t); vectorized over ``duration``."""
    t = np.asarray(duration, dtype=float)
    v = np.zeros(t.shape + (3,))
    v[..., 2] = math.pi * delta * t
    return su2(v)


def area_model_unitary(seg: Segment, delta: float) -> np.ndarray:
    """Spike replaced by a constant-rate R_xz with the same area (the closed-form model)."""
    if seg.kind == "idle":
        return idle_unitary(seg.duration, delta)
    theta = 2 * math.pi * seg.area
    return su2([theta / 2, 0, math.pi * delta * seg.duration])


def segment_unitary(seg: Segment, delta: float, max_step: float = MAX_STEP, model: str = "exact") -> np.ndarray:
    if model == "area":
        return area_model_unitary(seg, delta)
    if model != "exact":
        raise ParameterDomainError(f"unknown spike model {model!r}")
    if seg.kind == "idle":
        return idle_unitary(seg.duration, delta)
    return spike_unitary(seg.amplitude, seg.duration, delta, max_step)


def program_unitary(pulse: PulseProgram, max_step: float = MAX_STEP, model: str = "exact") -> np.ndarray:
    u = I2.copy()
    for seg in pulse.segments:
        u = segment_unitary(seg, pulse.delta, max_step, model) @ u
    return u


@dataclass
class Propagation:
    final: np.ndarray
    times: np.ndarray
    bloch: np.ndarray  # shape (n_times, 3)


def propagate(pulse: PulseProgram, initial, max_step: float = MAX_STEP, idle_sample: float = 0.1) -> Propagation:
    """Time-ordered evolution of a pure state with its Bloch trajectory.

    ``initial`` is a 2-vector or a key of CARDINAL_STATES. Spikes are sampled at
    every Magnus step, idles (solved in closed form) every ``idle_sample`` ns.
    """
    psi = CARDINAL_STATES[initial] if isinstance(initial, str) else np.asarray(initial, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    times, states = [0.0], [psi]
    t = 0.0
    for seg in pulse.segments:
        if seg.kind == "spike":
            steps, edges = spike_step_unitaries(seg.amplitude, seg.duration, pulse.delta, max_step)
            for k in range(steps.shape[1]):
                psi = steps[0, k] @ psi
                times.append(t + edges[k + 1])
                states.append(psi)
        else:
            n = max(1, math.ceil(seg.duration / idle_sample))
            ts = np.linspace(0, seg.duration, n + 1)[1:]
            us = idle_unitary(ts, pulse.delta)
            for tk, uk in zip(ts, us):
                times.append(t + tk)
                states.append(uk @ psi)
            psi = states[-1]
        t += seg.duration
    bloch = np.array([bloch_vector(s) for s in states])
    return Propagation(final=psi, times=np.array(times), bloch=bloch)


# --- Rabi maps ---------------------------------------------------------------

@dataclass
class RabiMap:
    initial: str
    amplitudes: np.ndarray
    idle_times: np.ndarray
    sx: np.ndarray  # shape (n_amp, n_idle)
    sy: np.ndarray
    sz: np.ndarray

    def rows(self):
        for i, a in enumerate(self.amplitudes):
            for j, t in enumerate(self.idle_times):
                yield {"initial": self.initial, "amplitude_ghz": float(a), "idle_ns": float(t),
                       "sx": float(self.sx[i, j]), "sy": float(self.sy[i, j]), "sz": float(self.sz[i, j])}


def rabi2d(
    delta: float,
    dt_p: float,
    a_grid: Sequence[float],
    dtz_grid: Sequence[float],
    initial_states: Sequence[str] = ("+z",),
    max_step: float = MAX_STEP,
    threads: int = 1,
) -> List[RabiMap]:
    """Expectation maps after spike(A), idle(dt_z), spike(-A) for each grid cell.

    Idle times of 0 are allowed here (the two spikes then abut).
    """
    amps = np.asarray(a_grid, dtype=float)
    dtz = np.asarray(dtz_grid, dtype=float)
    if amps.size == 0 or dtz.size == 0:
        raise ParameterDomainError("rabi2d grids must be non-empty")
    if np.any(dtz < 0):
        raise ParameterDomainError("idle times must be non-negative")

    def spikes(chunk):
        return spike_unitary(np.concatenate([chunk, -chunk]), dt_p, delta, max_step)

    if threads > 1 and amps.size > 1:
        chunks = np.array_split(amps, min(threads, amps.size))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(spikes, chunks))
        first = np.concatenate([p[: len(c)] for p, c in zip(parts, chunks)])
        second = np.concatenate([p[len(c):] for p, c in zip(parts, chunks)])
    else:
        both = spikes(amps)
        first, second = both[: amps.size], both[amps.size:]
    idles = idle_unitary(dtz, delta)  # (n_idle, 2, 2)
    total = second[:, None] @ idles[None, :] @ first[:, None]  # (n_amp, n_idle, 2, 2)
    maps = []
    for name in initial_states:
        psi = CARDINAL_STATES[name]
        out = total @ psi
        ev = [np.real(np.einsum("...i,ij,...j->...", out.conj(), p, out)) for p in PAULIS]
        maps.append(RabiMap(name, amps, dtz, *ev))
    return maps


# --- closed-form synthesis ---------------------------------------------------

@dataclass(frozen=True)
class GateAngles:
    theta_x: float
    theta_z: float
    lam: float

    def model_unitary(self) -> np.ndarray:
        """R_xz(-theta_x) R_z(theta_z) R_xz(theta_x)."""
        return rxz(-self.theta_x, self.lam) @ rz(self.theta_z) @ rxz(self.theta_x, self.lam)


def _y2_angles(lam):
    arg = max(-1.0, lam * (1 + lam) / -(1 - lam))  # reaches -1 at the upper bound
    theta_x = math.acos(arg) / math.sqrt(1 + lam ** 2)
    radicand = max(0.0, 1 - 2 * lam - 2 * lam ** 3 - lam ** 4)
    theta_z = 2 * math.atan(math.sqrt(radicand) / ((1 + lam) * math.sqrt(1 + lam ** 2)))
    return theta_x, theta_z


def _y_angles(lam):
    # the arccos argument is -lam^2; with +lam^2 the composition is not R_y(pi) for lam > 0
    theta_x = math.acos(-lam ** 2) / math.sqrt(1 + lam ** 2)
    theta_z = math.pi - 2 * math.atan2(lam, math.sqrt(max(0.0, 1 - lam ** 2)))
    return theta_x, theta_z


_SYNTH = {"Y/2": (_y2_angles, Y2_LAMBDA_MAX), "Y": (_y_angles, Y_LAMBDA_MAX)}
TARGETS = {"Y/2": ry(math.pi / 2), "Y": ry(math.pi)}


def synthesize(target: str, lam: float) -> GateAngles:
    """Spike and idle angles realizing ``target`` ("Y/2" or "Y") at ratio ``lam``."""
    if target not in _SYNTH:
        raise ParameterDomainError(f"closed-form synthesis exists for {sorted(_SYNTH)}, not {target!r}")
    fn, lam_max = _SYNTH[target]
    if not 0 <= lam <= lam_max:
        raise ParameterDomainError(f"lambda={lam} outside [0, {lam_max:.6f}] for {target}")
    return GateAngles(*fn(lam), lam)


def device_lambda(target: str, delta: float = DEFAULT_DELTA, dt_p: float = DEFAULT_DT_P) -> float:
    """Self-consistent lambda with lambda * theta_x(lambda) = 2 pi Delta dt_p."""
    if target not in _SYNTH:
        raise ParameterDomainError(f"closed-form synthesis exists for {sorted(_SYNTH)}, not {target!r}")
    fn, lam_max = _SYNTH[target]
    phase = 2 * math.pi * delta * dt_p
    if phase == 0:
        return 0.0
    f = lambda lam: lam * fn(lam)[0] - phase
    if f(lam_max) < 0:
        raise CalibrationError(
            f"2 pi Delta dt_p = {phase:.4f} rad exceeds what {target} synthesis allows ({f(lam_max) + phase:.4f})"
        )
    return brentq(f, 0.0, lam_max, xtol=1e-15, rtol=1e-15)


def angles_to_pulse(angles: GateAngles, delta: float = DEFAULT_DELTA, dt_p: float = DEFAULT_DT_P,
                    rtol: float = 1e-6) -> PulseProgram:
    """Spike(+A), idle, spike(-A) with pi A dt_p = theta_x and idle = theta_z / (2 pi Delta)."""
    if not dt_p > 0:
        raise ParameterDomainError(f"dt_p must be positive, got {dt_p}")
    segs = []
    if angles.theta_x != 0:
        implied = 2 * math.pi * delta * dt_p / abs(angles.theta_x)
        if not math.isclose(implied, angles.lam, rel_tol=rtol, abs_tol=1e-12):
            raise CalibrationError(
                f"inconsistent pulse: Delta={delta}, dt_p={dt_p}, theta_x={angles.theta_x} imply "
                f"lambda={implied:.8f}, angles carry {angles.lam:.8f}"
            )
        segs.append(spike(angles.theta_x / (math.pi * dt_p), dt_p))
    theta_z = angles.theta_z % (2 * math.pi)  # precession only runs one way
    if theta_z > 0:
        if delta == 0:
            raise CalibrationError("a z rotation needs delta > 0")
        segs.append(idle(theta_z / (2 * math.pi * delta)))
    if angles.theta_x != 0:
        segs.append(spike(-angles.theta_x / (math.pi * dt_p), dt_p))
    return PulseProgram(tuple(segs), delta)


def native_gate(name: str, delta: float = DEFAULT_DELTA, dt_p: float = DEFAULT_DT_P) -> PulseProgram:
    """Y/2, -Y/2 and Y from synthesis; Z/2 and -Z/2 from idling."""
    if name in ("Y/2", "-Y/2", "Y"):
        target = name.lstrip("-")
        lam = device_lambda(target, delta, dt_p)
        angles = synthesize(target, lam)
        if name.startswith("-"):
            angles = GateAngles(-angles.theta_x, angles.theta_z, lam)
        return angles_to_pulse(angles, delta, dt_p)
    if name == "Z/2":
        return z_rotation(math.pi / 2, delta)
    if name == "-Z/2":
        return z_rotation(-math.pi / 2, delta)
    raise ParameterDomainError(f"unknown native gate {name!r}")


def z_rotation(theta: float, delta: float = DEFAULT_DELTA) -> PulseProgram:
    """Idle for (theta mod 2 pi) / (2 pi Delta); -pi/2 therefore costs 3/(4 Delta)."""
    t = (theta % (2 * math.pi)) / (2 * math.pi * delta)
    return PulseProgram((idle(t),) if t > 0 else (), delta)


# time order (first played first); the operator product reads right to left
COMPOSITIONS: Dict[str, Tuple[str, ...]] = {
    "I": (),
    "Y/2": ("Y/2",),
    "-Y/2": ("-Y/2",),
    "Z/2": ("Z/2",),
    "-Z/2": ("-Z/2",),
    "Y": ("Y/2", "Y/2"),
    "-Y": ("-Y/2", "-Y/2"),
    "Z": ("Z/2", "Z/2"),
    "X/2": ("-Y/2", "Z/2", "Y/2"),
    "-X/2": ("Y/2", "Z/2", "-Y/2"),
    "X": ("-Y/2", "Z/2", "Z/2", "Y/2"),
}

GATE_TARGETS = {
    "I": I2,
    "Y/2": ry(math.pi / 2),
    "-Y/2": ry(-math.pi / 2),
    "Z/2": rz(math.pi / 2),
    "-Z/2": rz(-math.pi / 2),
    "Y": ry(math.pi),
    "-Y": ry(-math.pi),
    "Z": rz(math.pi),
    "X/2": rx(math.pi / 2),
    "-X/2": rx(-math.pi / 2),
    "X": rx(math.pi),
}

COMPUTATIONAL_GATES = ("Y/2", "-Y/2", "X/2", "-X/2", "Z/2")


def composition(name: str) -> Tuple[str, ...]:
    """Native gates of ``name`` in operator-product order (leftmost acts last)."""
    return tuple(reversed(COMPOSITIONS[name]))


def compose_gate(name: str, delta: float = DEFAULT_DELTA, dt_p: float = DEFAULT_DT_P,
                 theta: Optional[float] = None) -> PulseProgram:
    """Pulse program for a named gate, or an arbitrary Z(theta) with name "Rz"."""
    if name == "Rz":
        if theta is None:
            raise ParameterDomainError("Rz needs theta")
        return z_rotation(theta, delta)
    if name not in COMPOSITIONS:
        raise ParameterDomainError(f"unknown gate {name!r}; supported: {sorted(COMPOSITIONS)} and Rz")
    natives = {n: native_gate(n, delta, dt_p) for n in set(COMPOSITIONS[name])}
    prog = PulseProgram((), delta)
    for n in COMPOSITIONS[name]:
        prog = prog.then(natives[n])
    return prog


def gate_table(delta: float = DEFAULT_DELTA, dt_p: float = DEFAULT_DT_P, names=None) -> List[dict]:
    """JSON-ready list of composed gates with segments and lengths."""
    names = sorted(COMPOSITIONS) if names is None else names
    out = []
    for n in names:
        prog = compose_gate(n, delta, dt_p)
        out.append({"name": n, "composition": list(composition(n)), **prog.to_dict()})
    return out
