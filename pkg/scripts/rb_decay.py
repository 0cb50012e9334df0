"""Reference and interleaved RB under T1/T2 decoherence for the native gates.

    python3 scripts/rb_decay.py --seed 2024 --n-seq 300 --out results/rb
"""

import argparse
import json
from pathlib import Path

import numpy as np

from _common import pyplot
from fluxonium import benchmarking as bm


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--n-seq", type=int, default=bm.DEFAULT_N_SEQ)
    ap.add_argument("--t1-us", type=float, default=300.0)
    ap.add_argument("--t2-us", type=float, default=300.0)
    ap.add_argument("--gates", nargs="*", default=["Y/2", "X/2", "Z/2"])
    ap.add_argument("--out", default="results/rb")
    args = ap.parse_args(argv)

    table = bm.build_clifford_table()
    model = bm.NoiseModel("lindblad", t1_us=args.t1_us, t2_us=args.t2_us)
    ref = bm.run_rb(n_seq=args.n_seq, noise=model, seed=args.seed, table=table)
    summary = {"reference": ref.to_dict()}
    curves = {"reference": ref}
    for gate in args.gates:
        irb = bm.run_rb(n_seq=args.n_seq, noise=model, seed=args.seed, table=table, interleaved=gate)
        est = bm.irb_fidelity(ref, irb)
        summary[gate] = {"fidelity": est.fidelity, "r_gate": est.r_gate, "unphysical": est.unphysical}
        curves[gate] = irb
        print(f"{gate}: interleaved fidelity {est.fidelity:.6f}")
    print(f"reference: F_avg {ref.fidelity:.5f} (p = {ref.p:.6f} +/- {ref.fit.p_err:.1e})")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "rb_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n")

    plt = pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    m = np.geomspace(1, max(ref.lengths), 200)
    for label, res in curves.items():
        pts = ax.semilogx(res.lengths, res.survival, "o", ms=4, label=label)
        ax.semilogx(m, res.fit.a * res.fit.p ** m + res.fit.b, color=pts[0].get_color())
    ax.set(xlabel="sequence length (Cliffords)", ylabel="survival")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "rb.png", dpi=110)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
