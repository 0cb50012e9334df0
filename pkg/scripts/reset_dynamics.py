"""Two-tone reset populations versus time, with and without resonator loss.

    python3 scripts/reset_dynamics.py --out results/reset
"""

import argparse
from pathlib import Path

from _common import DEFAULT_CONFIG, device, pyplot
from fluxonium import io, lindblad


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--out", default="results/reset")
    ap.add_argument("--rabi-mhz", type=float, nargs=2, default=(6.25, 1.2), metavar=("G0H0", "H0E1"))
    ap.add_argument("--duration-us", type=float, default=10.0)
    args = ap.parse_args(argv)

    params = device(args.config)
    out = Path(args.out)
    runs = {}
    for label, kappa in (("driven", None), ("no_loss", 0.0)):
        res = lindblad.simulate_reset(params, tuple(args.rabi_mhz), args.duration_us, kappa=kappa)
        runs[label] = res
        header = io.make_header("reset_dynamics.py", params, {"rabi_mhz": args.rabi_mhz, "kappa": kappa})
        io.write_csv(out / f"reset_{label}.csv", res.rows(), header)
        print(f"{label}: final P(e0) {res.steady_state:.3f}, crossing {res.crossing_us}")

    plt = pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, (label, res) in zip(axes, runs.items()):
        for name, pop in res.populations.items():
            if pop.max() > 0.01:
                ax.plot(res.times_us, pop, label=name)
        ax.axhline(res.threshold, color="k", ls=":")
        ax.set(title=label, xlabel="time (us)")
        ax.legend(fontsize=8)
    axes[0].set_ylabel("population")
    fig.tight_layout()
    fig.savefig(out / "reset.png", dpi=110)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
