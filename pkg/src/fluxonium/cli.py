"""Command-line entry point.

Exit codes:
  0  success
  1  configuration or usage error
  2  physics/numerics error (domain, labeling collision, calibration, solver)
  3  decay-fit failure
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, benchmarking, circuit, coupled, gates, io, lindblad, noise
from .errors import ConfigError, FitError, FluxoniumError
from .params import CircuitParams, load_config

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_FIT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _grid(lo: float, hi: float, n: int, name: str) -> np.ndarray:
    if n < 1:
        raise ConfigError(f"{name} grid needs at least one point")
    if n == 1:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def _summary(title: str, rows: Sequence[tuple]) -> None:
    width = max(len(k) for k, _ in rows) if rows else 0
    print(title)
    print("-" * max(len(title), width + 20))
    for k, v in rows:
        print(f"{k:<{width}}  {v}")


def _write_table(args, stem: str, rows, header) -> Path:
    out = Path(args.out)
    if args.format == "json":
        return io.write_json(out / f"{stem}.json", list(rows), header)
    return io.write_csv(out / f"{stem}.csv", rows, header)


def _coupled_params(params: CircuitParams, chi_khz: float) -> CircuitParams:
    """Config coupling if given, otherwise calibrated to the dispersive shift."""
    if params.coupling_g > 0:
        return params
    return params.with_coupling(coupled.calibrate_coupling(params, chi_khz))


def _delta(params: CircuitParams) -> float:
    return circuit.spectrum(params, circuit.FRUSTRATION, n_levels=4).qubit_freq


# --- commands ----------------------------------------------------------------

def cmd_spectrum(args, params: CircuitParams) -> int:
    fluxes = _grid(args.flux_min, args.flux_max, args.flux_points, "flux")
    specs = circuit.sweep(params, fluxes, n_levels=args.levels, basis_size=args.basis, threads=args.threads)
    rows = []
    for s in specs:
        row = {"flux": s.flux}
        for k in range(1, args.levels):
            row[f"f0{k}_ghz"] = s.freq(0, k)
        row["phi_ge"] = abs(s.phi_elements[0, 1])
        row["n_ge"] = abs(s.n_elements[0, 1])
        rows.append(row)
    header = io.make_header("spectrum", params, vars(args) | {"config": str(args.config)})
    path = _write_table(args, "spectrum", rows, header)
    at_half = circuit.spectrum(params, 0.5, n_levels=max(args.levels, 4), basis_size=args.basis)
    _summary("spectrum", [
        ("qubit splitting at 0.5 (MHz)", f"{at_half.qubit_freq * 1e3:.3f}"),
        ("g-h plasmon at 0.5 (GHz)", f"{at_half.freq(0, 3):.4f}"),
        ("|<g|phi|e>| at 0.5", f"{abs(at_half.phi_elements[0, 1]):.4f}"),
        ("flux points", str(len(fluxes))),
        ("output", str(path)),
    ])
    return EXIT_OK


def cmd_coherence(args, params: CircuitParams) -> int:
    params = _coupled_params(params, args.chi_khz)
    fluxes = _grid(args.flux_min, args.flux_max, args.flux_points, "flux")
    t1 = noise.total_t1_curve(params, fluxes, threads=args.threads)
    t2 = noise.t2e_curve(params, fluxes, n_pi=args.n_pi, threads=args.threads)
    rows = []
    for k, row in enumerate(t1.rows()):
        row["t_phi_us"] = t2.t_phi_us[k]
        row["t2e_us"] = t2.t2e_us[k]
        row["flagged"] = int(row["flux"] in t1.flagged)
        rows.append(row)
    header = io.make_header("coherence", params, vars(args) | {"config": str(args.config)})
    path = _write_table(args, "coherence", rows, header)
    k = int(np.argmin(np.abs(fluxes - 0.5)))
    _summary("coherence", [
        ("coupling g (GHz)", f"{params.coupling_g:.6f}"),
        (f"T1 total at {fluxes[k]:.4f} (us)", f"{t1.total_us[k]:.1f}"),
        (f"T1 dielectric at {fluxes[k]:.4f} (us)", f"{t1.t1_us['dielectric'][k]:.1f}"),
        (f"T2e at {fluxes[k]:.4f} (us)", f"{t2.t2e_us[k]:.1f}"),
        ("flagged points", str(len(t1.flagged))),
        ("output", str(path)),
    ])
    return EXIT_OK


def cmd_rabi2d(args, params: CircuitParams) -> int:
    delta = _delta(params)
    amps = _grid(args.amp_min, args.amp_max, args.amp_points, "amplitude")
    idles = _grid(args.idle_min, args.idle_max, args.idle_points, "idle")
    maps = gates.rabi2d(delta, args.dt_p, amps, idles, args.initial, threads=args.threads)
    rows = [r for m in maps for r in m.rows()]
    header = io.make_header("rabi2d", params, vars(args) | {"config": str(args.config), "delta_ghz": delta})
    path = _write_table(args, "rabi2d", rows, header)
    _summary("rabi2d", [
        ("delta (MHz)", f"{delta * 1e3:.3f}"),
        ("grid", f"{len(amps)} x {len(idles)} x {len(maps)} initial states"),
        ("output", str(path)),
    ])
    return EXIT_OK


def cmd_calibrate(args, params: CircuitParams) -> int:
    g = coupled.calibrate_coupling(params, args.chi_khz)
    params_g = params.with_coupling(g)
    ds = coupled.build_dressed(params_g, 0.5)
    chi = coupled.dispersive_shifts(ds)
    delta = _delta(params)
    table = gates.gate_table(delta, args.dt_p)
    names = [coupled.state_name(s) for s in coupled.TABLE_STATES]
    data = {
        "coupling_g_ghz": g,
        "delta_ghz": delta,
        "dt_p_ns": args.dt_p,
        "lambda_y2": gates.device_lambda("Y/2", delta, args.dt_p),
        "dispersive_shift_khz": {coupled.LEVEL_NAMES[l]: v for l, v in chi.items()},
        "states": names,
        "drive_rates_mhz": coupled.drive_rate_table(ds),
        "two_photon_rates_mhz": coupled.two_photon_rate_table(ds),
        "gates": table,
    }
    header = io.make_header("calibrate", params, vars(args) | {"config": str(args.config)})
    out = Path(args.out)
    if args.format == "json":
        path = io.write_json(out / "calibration.json", data, header)
    else:
        rows = [{"name": t["name"], "composition": " ".join(t["composition"]), "length_ns": t["length_ns"],
                 "segments": len(t["segments"])} for t in table]
        path = io.write_csv(out / "gates.csv", rows, header)
    lengths = {t["name"]: t["length_ns"] for t in table}
    _summary("calibrate", [
        ("coupling g (GHz)", f"{g:.6f}"),
        ("chi_e - chi_g (kHz)", f"{chi[1] - chi[0]:.3f}"),
        ("delta (MHz)", f"{delta * 1e3:.3f}"),
        *[(f"{n} length (ns)", f"{lengths[n]:.2f}") for n in ("Y/2", "Z/2", "X/2", "Y", "Z", "X")],
        ("output", str(path)),
    ])
    return EXIT_OK


def cmd_reset(args, params: CircuitParams) -> int:
    params = _coupled_params(params, args.chi_khz)
    res = lindblad.simulate_reset(params, (args.rabi_gh, args.rabi_he1), duration_us=args.duration_us,
                                  sample_ns=args.sample_ns, initial=args.initial)
    header = io.make_header("reset", params, vars(args) | {"config": str(args.config)})
    path = _write_table(args, "reset", res.rows(), header)
    crossing = res.crossing_us
    _summary("reset", [
        ("steady-state P(e0)", f"{res.steady_state:.4f}"),
        (f"time to stay above {res.threshold:.0%} (us)", "never" if crossing is None else f"{crossing:.2f}"),
        ("tones (GHz)", ", ".join(f"{t:.5f}" for t in res.tones_ghz)),
        ("output", str(path)),
    ])
    return EXIT_OK


def _noise_model(args) -> benchmarking.NoiseModel:
    if args.noise == "depolarizing":
        return benchmarking.NoiseModel("depolarizing", epsilon=args.epsilon)
    if args.noise == "lindblad":
        return benchmarking.NoiseModel("lindblad", t1_us=args.t1_us, t2_us=args.t2_us)
    return benchmarking.NoiseModel()


def cmd_rb(args, params: CircuitParams) -> int:
    if args.seed is None:
        raise ConfigError("rb needs --seed")
    delta = _delta(params)
    table = benchmarking.build_clifford_table(delta, args.dt_p)
    model = _noise_model(args)
    lengths = [int(x) for x in args.lengths.split(",")] if args.lengths else list(benchmarking.DEFAULT_LENGTHS)
    rb = benchmarking.run_rb(lengths, args.n_seq, model, args.seed, shots=args.shots, table=table,
                             threads=args.threads)
    data = {"rb": rb.to_dict(), "delta_ghz": delta}
    rows = [dict(r, run="rb") for r in rb.raw_rows()]
    summary = [("p", f"{rb.p:.6f} +- {rb.fit.p_err:.1e}"), ("average Clifford fidelity", f"{rb.fidelity:.6f}")]
    if args.interleave:
        irb = benchmarking.run_rb(lengths, args.n_seq, model, args.seed, interleaved=args.interleave,
                                  shots=args.shots, table=table, threads=args.threads)
        gate = benchmarking.irb_fidelity(rb, irb)
        data["irb"] = irb.to_dict()
        data["gate"] = {"name": args.interleave, **gate.to_dict()}
        rows += [dict(r, run="irb") for r in irb.raw_rows()]
        summary.append((f"{args.interleave} fidelity", f"{gate.fidelity:.6f}" + (" (unphysical)" if gate.unphysical else "")))
    header = io.make_header("rb", params, vars(args) | {"config": str(args.config)})
    out = Path(args.out)
    path = io.write_json(out / "rb.json", data, header)
    io.write_csv(out / "rb_raw.csv", rows, header)
    _summary("rb", summary + [("output", str(path))])
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "coherence": cmd_coherence,
    "rabi2d": cmd_rabi2d,
    "calibrate": cmd_calibrate,
    "reset": cmd_reset,
    "rb": cmd_rb,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="flat key = value device file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=None, help="master seed (required for rb)")
    common.add_argument("--threads", type=int, default=1)

    parser = _Parser(
        prog="fluxonium",
        description="Heavy-fluxonium spectrum, coherence, flux-gate and benchmarking simulations.",
        epilog="exit codes: 0 ok, 1 config/usage, 2 physics or numerics, 3 fit failure",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def flux_args(p, lo, hi, n):
        p.add_argument("--flux-min", type=float, default=lo)
        p.add_argument("--flux-max", type=float, default=hi)
        p.add_argument("--flux-points", type=int, default=n)

    p = sub.add_parser("spectrum", parents=[common], help="energy levels and matrix elements vs flux")
    flux_args(p, 0.5, 0.5, 1)
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--basis", type=int, default=circuit.DEFAULT_BASIS)

    p = sub.add_parser("coherence", parents=[common], help="T1 channels and T2e vs flux")
    flux_args(p, 0.3, 0.5, 50)
    p.add_argument("--n-pi", type=int, default=3)
    p.add_argument("--chi-khz", type=float, default=60.0, help="dispersive shift used when coupling_g is unset")

    p = sub.add_parser("rabi2d", parents=[common], help="spike-idle-antispike expectation maps")
    p.add_argument("--dt-p", type=float, default=gates.DEFAULT_DT_P)
    p.add_argument("--amp-min", type=float, default=0.0)
    p.add_argument("--amp-max", type=float, default=0.3)
    p.add_argument("--amp-points", type=int, default=61)
    p.add_argument("--idle-min", type=float, default=0.0)
    p.add_argument("--idle-max", type=float, default=80.0)
    p.add_argument("--idle-points", type=int, default=161)
    p.add_argument("--initial", nargs="+", default=["+z", "-z"], choices=sorted(gates.CARDINAL_STATES))

    p = sub.add_parser("calibrate", parents=[common], help="coupling, drive tables and gate table")
    p.add_argument("--chi-khz", type=float, default=60.0)
    p.add_argument("--dt-p", type=float, default=gates.DEFAULT_DT_P)

    p = sub.add_parser("reset", parents=[common], help="two-tone reset master equation")
    p.add_argument("--chi-khz", type=float, default=60.0)
    p.add_argument("--rabi-gh", type=float, default=6.25, help="g0-h0 Rabi rate, MHz")
    p.add_argument("--rabi-he1", type=float, default=1.2, help="h0-e1 Rabi rate, MHz")
    p.add_argument("--duration-us", type=float, default=10.0)
    p.add_argument("--sample-ns", type=float, default=20.0)
    p.add_argument("--initial", choices=("mixed", "g0"), default="mixed")

    p = sub.add_parser("rb", parents=[common], help="randomized benchmarking, optionally interleaved")
    p.add_argument("--lengths", default=None, help="comma-separated sequence lengths (default 1,2,4,...,512)")
    p.add_argument("--n-seq", type=int, default=benchmarking.DEFAULT_N_SEQ)
    p.add_argument("--noise", choices=("none", "depolarizing", "lindblad"), default="lindblad")
    p.add_argument("--epsilon", type=float, default=4e-3)
    p.add_argument("--t1-us", type=float, default=300.0)
    p.add_argument("--t2-us", type=float, default=300.0)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--interleave", default=None, choices=sorted(gates.COMPOSITIONS))
    p.add_argument("--dt-p", type=float, default=gates.DEFAULT_DT_P)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return COMMANDS[args.command](args, params)
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        if exc.data is not None:
            print(f"raw data: {exc.data}", file=sys.stderr)
        return EXIT_FIT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FluxoniumError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
