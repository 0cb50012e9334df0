"""Lindblad master-equation engine: reset pumping on the dressed
fluxonium-resonator system and decoherence-limited gate errors.

Internal time unit is ns, Hamiltonians in GHz (H/h); collapse rates are given
in 1/us and converted on entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from . import coupled, gates, noise
from .errors import NumericError, ParameterDomainError
from .params import CircuitParams

TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8

Hamiltonian = Union[np.ndarray, Callable[[float], np.ndarray]]


@dataclass
class LindbladSpec:
    """Everything needed for one master-equation run.

    ``hamiltonian`` is a constant matrix or a callable of time (ns) returning
    H/h in GHz. ``collapse`` pairs an operator with its rate in 1/us.
    ``breakpoints`` (ns) mark kinks in H(t); the integrator restarts there.
    """

    hamiltonian: Hamiltonian
    collapse: Sequence[Tuple[np.ndarray, float]]
    rho0: np.ndarray
    t_final_us: float
    sample_ns: float
    breakpoints: Sequence[float] = ()

    def __post_init__(self):
        rho = np.asarray(self.rho0, dtype=complex)
        self.rho0 = rho
        for _, rate in self.collapse:
            if not rate >= 0:
                raise ParameterDomainError(f"collapse rates must be non-negative, got {rate}")
        if not self.t_final_us > 0 or not self.sample_ns > 0:
            raise ParameterDomainError("t_final_us and sample_ns must be positive")
        check_density_matrix(rho, 1e-10)


def check_density_matrix(rho: np.ndarray, tol: float) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ParameterDomainError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ParameterDomainError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise ParameterDomainError(f"density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise ParameterDomainError("density matrix is not positive semidefinite")


@dataclass
class Evolution:
    times_ns: np.ndarray
    rhos: np.ndarray  # (n_samples, d, d)
    max_trace_error: float
    min_eigenvalue: float

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.einsum("tii->ti", self.rhos))

    @property
    def final(self) -> np.ndarray:
        return self.rhos[-1]


def _dissipator(jumps, dim: int) -> np.ndarray:
    """Sum of L rho L^dag as a row-major superoperator, vec(A rho B) = (A kron B^T) vec(rho)."""
    out = np.zeros((dim * dim, dim * dim), complex)
    for j in jumps:
        out += np.kron(j, j.conj())
    return out


def _generator(hamiltonian: Hamiltonian, collapse, dim: int):
    ops = [(np.asarray(l, dtype=complex), rate * 1e-3) for l, rate in collapse if rate > 0]
    k = sum((r * l.conj().T @ l for l, r in ops), np.zeros((dim, dim), complex))
    jumps = [(math.sqrt(r) * l) for l, r in ops]
    # many jump operators: one dense superoperator beats a Python loop
    sandwich = _dissipator(jumps, dim) if len(jumps) > 3 else None
    jumps_dag = [j.conj().T for j in jumps]
    const_h = None if callable(hamiltonian) else np.asarray(hamiltonian, dtype=complex)

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        h = const_h if const_h is not None else hamiltonian(t)
        g = -2j * math.pi * h - 0.5 * k
        out = g @ rho + rho @ g.conj().T
        if sandwich is not None:
            return out.ravel() + sandwich @ y
        for j, jd in zip(jumps, jumps_dag):
            out += j @ rho @ jd
        return out.ravel()

    return rhs


def integrate(hamiltonian: Hamiltonian, collapse, rho0: np.ndarray, t_eval: np.ndarray,
              breakpoints: Sequence[float] = (), rtol: float = 1e-10, atol: float = 1e-12,
              method: str = "DOP853") -> np.ndarray:
    """Raw integration of the master equation, no physicality checks.

    Works for any initial operator (used to build superoperators). Returns the
    operator at each ``t_eval`` (ns, sorted, starting at 0).
    """
    rho0 = np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    rhs = _generator(hamiltonian, collapse, dim)
    t_eval = np.asarray(t_eval, dtype=float)
    t_end = float(t_eval[-1])
    edges = sorted({0.0, t_end, *[b for b in breakpoints if 0 < b < t_end]})
    out = np.empty((len(t_eval), dim, dim), dtype=complex)
    y = rho0.ravel()
    out[t_eval == 0] = rho0
    for a, b in zip(edges[:-1], edges[1:]):
        idx = np.nonzero((t_eval > a) & (t_eval <= b))[0]
        pts = np.unique(np.append(t_eval[idx], b))
        sol = solve_ivp(rhs, (a, b), y, method=method, rtol=rtol, atol=atol, t_eval=pts)
        if not sol.success:
            raise NumericError(
                f"master-equation integration failed on [{a}, {b}] ns after {sol.nfev} evaluations: {sol.message}"
            )
        states = sol.y.T.reshape(-1, dim, dim)
        out[idx] = states[np.searchsorted(pts, t_eval[idx])]
        y = sol.y[:, -1]
    return out


def evolve(spec: LindbladSpec, rtol: float = 1e-10, atol: float = 1e-12, method: str = "DOP853") -> Evolution:
    """Integrate the master equation and check trace and positivity at every sample."""
    t_final = spec.t_final_us * 1e3
    n = max(1, int(round(t_final / spec.sample_ns)))
    t_eval = np.linspace(0.0, t_final, n + 1)
    rhos = integrate(spec.hamiltonian, spec.collapse, spec.rho0, t_eval, spec.breakpoints, rtol, atol, method)
    traces = np.real(np.einsum("tii->t", rhos))
    trace_err = float(np.abs(traces - 1).max())
    herm = 0.5 * (rhos + np.conj(np.swapaxes(rhos, 1, 2)))
    min_eig = float(np.linalg.eigvalsh(herm).min())
    if trace_err > TRACE_TOL:
        raise NumericError(f"trace drifted by {trace_err:.2e}; tighten rtol (now {rtol})")
    if min_eig < -POSITIVITY_TOL:
        raise NumericError(f"density matrix lost positivity (min eigenvalue {min_eig:.2e})")
    return Evolution(times_ns=t_eval, rhos=rhos, max_trace_error=trace_err, min_eigenvalue=min_eig)


# --- two-level gate channels -------------------------------------------------

SIGMA_MINUS = np.outer(gates.GROUND, gates.EXCITED.conj())


def qubit_collapse(t1_us: float, t2_us: float) -> List[Tuple[np.ndarray, float]]:
    """Relaxation at 1/T1 and pure dephasing at 1/T_phi = 1/T2 - 1/(2 T1).

    Dephasing enters as sigma_z with rate 1/(2 T_phi), which damps coherences
    at 1/T_phi. Infinite times switch a channel off.
    """
    if not (t1_us > 0 and t2_us > 0):
        raise ParameterDomainError("T1 and T2 must be positive")
    if t2_us > 2 * t1_us:
        raise ParameterDomainError(f"T2 = {t2_us} us exceeds 2 T1 = {2 * t1_us} us")
    gamma1 = 0.0 if math.isinf(t1_us) else 1 / t1_us
    gamma_phi = (0.0 if math.isinf(t2_us) else 1 / t2_us) - gamma1 / 2
    return [(SIGMA_MINUS, gamma1), (gates.SZ, max(gamma_phi, 0.0) / 2)]


def _basis_ops(dim: int):
    for k in range(dim * dim):
        e = np.zeros(dim * dim, complex)
        e[k] = 1
        yield e.reshape(dim, dim)


def gate_superoperator(pulse: gates.PulseProgram, t1_us: float = math.inf, t2_us: float = math.inf,
                       rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """4x4 channel S with vec(out) = S vec(rho), vec = row-major ravel.

    An empty program is the identity channel.
    """
    if pulse.duration == 0:
        return np.eye(4, dtype=complex)
    collapse = qubit_collapse(t1_us, t2_us)
    t_eval = np.array([0.0, pulse.duration])
    cols = [integrate(pulse.hamiltonian, collapse, e, t_eval, pulse.breakpoints(), rtol, atol)[-1].ravel()
            for e in _basis_ops(2)]
    return np.array(cols).T


def unitary_superoperator(u: np.ndarray) -> np.ndarray:
    """Row-major vec: vec(U rho U^dag) = (U kron U*) vec(rho)."""
    return np.kron(u, u.conj())


def decoherence_limited_error(gate: gates.PulseProgram, t1_us: float, t2_us: float) -> float:
    """Average infidelity over the six cardinal states against the noiseless
    evolution of the same pulse."""
    s = gate_superoperator(gate, t1_us, t2_us)
    u = gates.program_unitary(gate)
    fids = []
    for psi in gates.CARDINAL_STATES.values():
        rho = np.outer(psi, psi.conj())
        out = (s @ rho.ravel()).reshape(2, 2)
        ideal = u @ psi
        fids.append(np.real(np.vdot(ideal, out @ ideal)))
    return float(1 - np.mean(fids))


# --- reset pumping -----------------------------------------------------------

RESET_TRUNC = (6, 3)
RESET_TARGET = (1, 0)  # e0
RESET_THRESHOLD = 0.95


@dataclass
class ResetResult:
    times_us: np.ndarray
    populations: Dict[str, np.ndarray]
    tones_ghz: Tuple[float, float]
    drive_ghz: Tuple[float, float]
    threshold: float = RESET_THRESHOLD

    @property
    def p_e0(self) -> np.ndarray:
        return self.populations["e0"]

    @property
    def steady_state(self) -> float:
        """Mean e0 population over the last 10% of the run."""
        tail = max(1, len(self.p_e0) // 10)
        return float(np.mean(self.p_e0[-tail:]))

    @property
    def crossing_us(self) -> Optional[float]:
        """First time after which P(e0) stays at or above the threshold."""
        below = np.nonzero(self.p_e0 < self.threshold)[0]
        if below.size == 0:
            return float(self.times_us[0])
        if below[-1] == len(self.p_e0) - 1:
            return None
        return float(self.times_us[below[-1] + 1])

    @property
    def latched(self) -> bool:
        return self.crossing_us is not None

    def rows(self):
        names = list(self.populations)
        for k, t in enumerate(self.times_us):
            yield {"time_us": float(t), **{f"p_{n}": float(self.populations[n][k]) for n in names}}


def _reset_collapse(ds: coupled.DressedSystem, kappa: float, t_bath: float, group_tol: float):
    """Photon-loss channels in the dressed basis, one per resolvable frequency.

    Dressed transitions whose frequencies differ by less than ``group_tol``
    (GHz) share a jump operator. Each group gets a down channel
    kappa (n_th + 1) and an up channel kappa n_th at its mean frequency.
    """
    e, a = ds.energies, ds.a_elements
    dim = len(e)
    terms = []
    for k in range(dim):
        for l in range(dim):
            if e[l] > e[k] and abs(a[k, l]) > 1e-8:
                terms.append((e[l] - e[k], k, l))
    terms.sort()
    groups: List[list] = []
    for term in terms:
        if groups and term[0] - groups[-1][0][0] < group_tol:
            groups[-1].append(term)
        else:
            groups.append([term])
    out = []
    for grp in groups:
        op = np.zeros((dim, dim), complex)
        for _, k, l in grp:
            op[k, l] = a[k, l]
        w = float(np.mean([t[0] for t in grp]))
        nth = noise.n_thermal(w, t_bath)
        out.append((op, kappa * 1e3 * (nth + 1)))
        if nth > 0:
            out.append((op.conj().T, kappa * 1e3 * nth))
    return out


def reset_hamiltonian(ds: coupled.DressedSystem, tones, amplitudes, cutoff: float):
    """Interaction-picture drive Hamiltonian H_I(t) (GHz) for tones 2 eps_j cos(w_j t) D.

    Only terms rotating slower than ``cutoff`` GHz are kept, for every tone on
    every dressed transition; faster (counter-rotating) terms are dropped.
    """
    e = ds.energies
    w_kl = e[:, None] - e[None, :]
    d_op = ds.drive_elements
    coefs, freqs = [], []
    for w_j, eps in zip(tones, amplitudes):
        if eps == 0:
            continue
        for sign in (-1, 1):
            f = w_kl + sign * w_j
            mask = (np.abs(f) < cutoff) & (np.abs(d_op) > 1e-12)
            if mask.any():
                coefs.append(np.where(mask, eps * d_op, 0))
                freqs.append(np.where(mask, f, 0.0))
    if not coefs:
        return np.zeros_like(d_op)
    coefs, freqs = np.array(coefs), np.array(freqs)

    def h(t):
        return np.sum(coefs * np.exp(2j * math.pi * freqs * t), axis=0)

    return h


def restricted_dressed(params: CircuitParams, flux: float, keep: Tuple[int, int] = RESET_TRUNC,
                       solve_trunc: Tuple[int, int] = coupled.DEFAULT_TRUNC) -> coupled.DressedSystem:
    """Dressed system diagonalized at ``solve_trunc`` and restricted to the
    states labeled (level < keep[0], photons < keep[1]).

    Small-truncation diagonalization misses the interference that sets weak
    elements such as <h0|a + a^dag|e1>; restricting a converged solve keeps
    them while the master equation stays small.
    """
    full = coupled.build_dressed(params, flux, solve_trunc)
    chosen = sorted(
        (k for k, (l, n) in full.labels.items() if l < keep[0] and n < keep[1]),
        key=lambda k: full.labels[k],
    )
    if len(chosen) != keep[0] * keep[1]:
        raise ParameterDomainError(f"keep={keep} exceeds solve truncation {solve_trunc}")
    sel = np.ix_(chosen, chosen)
    return coupled.DressedSystem(
        flux=full.flux,
        coupling_g=full.coupling_g,
        resonator_freq=full.resonator_freq,
        trunc=keep,
        energies=full.energies[chosen],
        vectors=full.vectors[:, chosen],
        labels={i: full.labels[k] for i, k in enumerate(chosen)},
        a_elements=full.a_elements[sel],
        drive_elements=full.drive_elements[sel],
        charge_elements=full.charge_elements[sel],
        bare=full.bare,
    )


def simulate_reset(
    params: CircuitParams,
    rabi_mhz: Tuple[float, float] = (6.25, 1.2),
    duration_us: float = 10.0,
    flux: float = 0.5,
    trunc: Tuple[int, int] = RESET_TRUNC,
    initial: str = "mixed",
    kappa: Optional[float] = None,
    t_bath: Optional[float] = None,
    cutoff: float = 1.0,
    sample_ns: float = 20.0,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> ResetResult:
    """Two-tone pumping g0 -> h0 -> e1 -> (photon loss) -> e0.

    ``rabi_mhz`` are the Rabi rates on the two addressed transitions, in the
    drive-table convention (a pi pulse lasts 1/(2 rate)). ``kappa`` in 1/ns
    defaults to omega_r/Q; ``t_bath`` in mK defaults to the Purcell bath
    temperature. ``params.coupling_g`` must be set (see calibrate_coupling).
    """
    if params.coupling_g <= 0:
        raise ParameterDomainError("reset needs a calibrated coupling_g > 0")
    if initial not in ("mixed", "g0"):
        raise ParameterDomainError(f"initial must be 'mixed' or 'g0', got {initial!r}")
    if any(r < 0 for r in rabi_mhz):
        raise ParameterDomainError("drive Rabi rates must be non-negative")
    kappa = params.kappa if kappa is None else kappa
    t_bath = params.noise.t_bath_purcell if t_bath is None else t_bath
    ds = restricted_dressed(params, flux, trunc)
    g0, e0, h0, e1 = (ds.index(*s) for s in ((0, 0), (1, 0), (3, 0), (1, 1)))
    tones = (ds.energies[h0] - ds.energies[g0], ds.energies[e1] - ds.energies[h0])
    d_op = ds.drive_elements
    eps = (rabi_mhz[0] * 1e-3 / (2 * abs(d_op[g0, h0])), rabi_mhz[1] * 1e-3 / (2 * abs(d_op[h0, e1])))
    dim = len(ds.energies)
    rho0 = np.zeros((dim, dim), complex)
    if initial == "mixed":
        rho0[g0, g0] = rho0[e0, e0] = 0.5
    else:
        rho0[g0, g0] = 1.0
    collapse = _reset_collapse(ds, kappa, t_bath, group_tol=kappa / (2 * math.pi)) if kappa > 0 else []
    spec = LindbladSpec(
        hamiltonian=reset_hamiltonian(ds, tones, eps, cutoff),
        collapse=collapse,
        rho0=rho0,
        t_final_us=duration_us,
        sample_ns=sample_ns,
    )
    ev = evolve(spec, rtol=rtol, atol=atol)
    pops = ev.populations
    named = {}
    for k, lab in sorted(ds.labels.items(), key=lambda kv: kv[1]):
        if lab[0] < 4 and lab[1] < 2:
            named[coupled.state_name(lab)] = pops[:, k]
    return ResetResult(
        times_us=ev.times_ns * 1e-3,
        populations=named,
        tones_ghz=tuple(float(t) for t in tones),
        drive_ghz=tuple(float(x) for x in eps),
    )
