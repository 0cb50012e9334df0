"""Session-wide cache of the expensive simulations shared by several test modules."""

import functools
import time

from fluxonium import REFERENCE_DEVICE, benchmarking, coupled, lindblad


@functools.lru_cache(maxsize=None)
def calibrated_device():
    return REFERENCE_DEVICE.with_coupling(coupled.calibrate_coupling(REFERENCE_DEVICE, 60.0))


@functools.lru_cache(maxsize=None)
def reset_run(kappa_zero: bool = False, initial: str = "mixed"):
    """(ResetResult, wall seconds) for the default two-tone reset."""
    t0 = time.perf_counter()
    res = lindblad.simulate_reset(calibrated_device(), kappa=0.0 if kappa_zero else None, initial=initial)
    return res, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def clifford_table():
    return benchmarking.build_clifford_table()


@functools.lru_cache(maxsize=None)
def lindblad_rb(interleaved=None, seed=2024, n_seq=benchmarking.DEFAULT_N_SEQ):
    """RB with T1 = T2 = 300 us; full size (75 sequences x 10 lengths) by default."""
    t0 = time.perf_counter()
    model = benchmarking.NoiseModel("lindblad", t1_us=300.0, t2_us=300.0)
    res = benchmarking.run_rb(noise=model, seed=seed, table=clifford_table(),
                              interleaved=interleaved, n_seq=n_seq)
    return res, time.perf_counter() - t0
