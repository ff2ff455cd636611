"""Aggregate throughput versus number of SBSs for SLA and the genie baselines.

    python scripts/scale_sweep.py --n 10 15 20 25 30
"""

import argparse

from spectrum_game.harness import (
    ExperimentConfig,
    SweepPoint,
    TopologySpec,
    aggregate_table,
    emit_tables,
    sweep,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 15, 20, 25, 30])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="results/scale_sweep")
    args = ap.parse_args()

    cfg = ExperimentConfig(topology=TopologySpec(seed=args.seed), algorithms=("sla", "sap_nc", "s_logit"),
                           max_iterations=5000, trials=args.trials, master_seed=args.seed, workers=args.workers,
                           sweep_axis="n", sweep_points=tuple(SweepPoint(f"N={n}", n=n) for n in args.n),
                           label="scale")
    results = sweep(cfg)
    ok = [r for r in results if not isinstance(r, Exception)]
    for r in results:
        if isinstance(r, Exception):
            print(f"a sweep point failed: {r}")
    emit_tables(ok, args.out_dir)
    print(aggregate_table(ok), end="")


if __name__ == "__main__":
    main()
