"""Two-dimensional Rabi maps: spike(A), idle(dt_z), spike(-A) from several
initial states, with the calibrated Y/2 pulse marked on each panel.

Writes the raw maps as CSV and a PNG figure.

    python3 scripts/rabi_maps.py --out results/rabi
"""

import argparse
from pathlib import Path

import numpy as np

from fluxonium import gates, io

DEFAULT_INITIAL = ("+z", "-z", "+x")


def compute(delta=gates.DEFAULT_DELTA, dt_p=gates.DEFAULT_DT_P, n_amp=121, n_idle=161,
            amp_max=0.3, idle_max=80.0, initial=DEFAULT_INITIAL):
    amps = np.linspace(-amp_max, amp_max, n_amp)
    idles = np.linspace(0.0, idle_max, n_idle)
    return gates.rabi2d(delta, dt_p, amps, idles, initial)


def y2_point(delta=gates.DEFAULT_DELTA, dt_p=gates.DEFAULT_DT_P):
    """(amplitude GHz, idle ns) of the native Y/2 pulse."""
    first, wait, _ = gates.native_gate("Y/2", delta, dt_p).segments
    return first.amplitude, wait.duration


def plot(maps, path, y2=None, title=None):
    """Save one row of <sigma_z> panels and one row of <sigma_x> panels."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, len(maps), figsize=(3.6 * len(maps), 6.4), sharex=True, sharey=True,
                             squeeze=False)
    extent = None
    for col, m in enumerate(maps):
        extent = (m.idle_times[0], m.idle_times[-1], m.amplitudes[0] * 1e3, m.amplitudes[-1] * 1e3)
        for row, (label, data) in enumerate((("<sz>", m.sz), ("<sx>", m.sx))):
            ax = axes[row, col]
            im = ax.imshow(data, origin="lower", aspect="auto", extent=extent, cmap="RdBu_r", vmin=-1, vmax=1)
            if y2 is not None:
                ax.plot(y2[1], y2[0] * 1e3, marker="o", mfc="none", mec="k", ms=8)
            ax.set_title(f"{label}, start {m.initial}", fontsize=9)
            if row == 1:
                ax.set_xlabel("idle dt_z (ns)")
            if col == 0:
                ax.set_ylabel("spike amplitude A (MHz)")
    fig.colorbar(im, ax=axes, shrink=0.8)
    if title:
        fig.suptitle(title)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/rabi")
    ap.add_argument("--delta", type=float, default=gates.DEFAULT_DELTA, help="qubit splitting, GHz")
    ap.add_argument("--dt-p", type=float, default=gates.DEFAULT_DT_P)
    args = ap.parse_args(argv)
    out = Path(args.out)
    maps = compute(args.delta, args.dt_p)
    header = io.make_header("rabi_maps.py", None, {"delta_ghz": args.delta, "dt_p_ns": args.dt_p})
    io.write_csv(out / "rabi_maps.csv", [r for m in maps for r in m.rows()], header)
    png = plot(maps, out / "rabi_maps.png", y2_point(args.delta, args.dt_p),
               f"delta = {args.delta * 1e3:.2f} MHz, dt_p = {args.dt_p} ns")
    print(f"wrote {out / 'rabi_maps.csv'} and {png}")


if __name__ == "__main__":
    main()
