"""T1 channel budget and echo T2 across flux, written as CSV plus a figure.

    python3 scripts/coherence_curves.py --out results/coherence
"""

import argparse
from pathlib import Path

import numpy as np

from _common import DEFAULT_CONFIG, device, pyplot
from fluxonium import io, noise


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--out", default="results/coherence")
    ap.add_argument("--flux-min", type=float, default=0.3)
    ap.add_argument("--points", type=int, default=101)
    args = ap.parse_args(argv)

    params = device(args.config)
    fluxes = np.linspace(args.flux_min, 0.5, args.points)
    t1 = noise.total_t1_curve(params, fluxes)
    t2 = noise.t2e_curve(params, fluxes)
    rows = [dict(r, t_phi_us=float(tp), t2e_us=float(te)) for r, tp, te in zip(t1.rows(), t2.t_phi_us, t2.t2e_us)]
    out = Path(args.out)
    io.write_csv(out / "coherence.csv", rows, io.make_header("coherence_curves.py", params, {"points": args.points}))

    plt = pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for name in noise.CHANNELS:
        ax1.semilogy(fluxes, t1.t1_us[name], label=name)
    ax1.semilogy(fluxes, t1.total_us, "k", lw=2, label="total")
    ax1.set(xlabel="external flux (flux quanta)", ylabel="T1 (us)", ylim=(10, 1e6))
    ax1.legend(fontsize=8)
    ax2.semilogy(fluxes, t2.t2e_us, "k")
    ax2.set(xlabel="external flux (flux quanta)", ylabel="echo T2 (us)")
    fig.tight_layout()
    fig.savefig(out / "coherence.png", dpi=110)
    print(f"wrote {out / 'coherence.csv'} and {out / 'coherence.png'}")
    if t1.flagged:
        print(f"labeling collisions at flux {t1.flagged}")


if __name__ == "__main__":
    main()
