#!/usr/bin/env python3
"""Reference benchmark sweep.

Generates the desk-scale two-regime stream, runs each algorithm over it,
and writes one metrics CSV per (algorithm, sketch size) into --outdir,
plus a merged comparison CSV.  These files feed the plots frontend:

    node plots/dist/plot.js --in "out/*.csv" --x sketch_cols \
        --y corr_err_avg --out out/error_vs_size.svg
"""

import argparse
import os

from slidewin.bench import RunConfig, compare, run, write_csv
from slidewin.streams import StreamConfig


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="out")
    ap.add_argument("--seed", type=int, default=101)
    ap.add_argument("--ells", default="5,10,20,40")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    stream = StreamConfig(
        m_x=40, m_y=60, n=5000, N=1000, R=64, seed=args.seed,
        regime_schedule=((1, 0.25), (2501, 1.0)),
    )
    ells = [int(v) for v in args.ells.split(",")]

    for algo in ("hds", "ads", "cod", "naive"):
        for ell in ells:
            out = os.path.join(args.outdir, f"{algo}_l{ell}.csv")
            rows = run(RunConfig(
                algorithm=algo, stream=stream, ell=ell,
                query_every=200, out=out,
            ))
            worst = max(r.corr_err for r in rows if isinstance(r.step, int))
            print(f"{algo} ell={ell}: max corr_err {worst:.4f} -> {out}")

    merged = compare([
        RunConfig(algorithm=a, stream=stream, eps=0.1, query_every=200)
        for a in ("hds", "ads")
    ])
    out = os.path.join(args.outdir, "compare_hds_ads.csv")
    write_csv(out, merged)
    print(f"merged comparison -> {out}")


if __name__ == "__main__":
    main()
