"""Mixed-strategy trajectories of a few SBSs during one learning run.

Writes one CSV row per (iteration, SBS) with the probability of each channel.

    python scripts/convergence_traces.py --out results/convergence.csv
"""

import argparse
import csv
from pathlib import Path

from spectrum_game import (
    GameInstance,
    LearningConfig,
    build_graph,
    generate_deployment,
    preset_hiperlan2,
    run_trial,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=15)
    ap.add_argument("--channels", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=0.25)
    ap.add_argument("--max-iters", type=int, default=5000)
    ap.add_argument("--topology-seed", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sbs", type=int, nargs="+", default=[0, 1, 2], help="SBS indices to trace")
    ap.add_argument("--out", default="results/convergence.csv")
    args = ap.parse_args()

    graph = build_graph(generate_deployment(args.n, (1000.0, 1000.0), args.topology_seed), 300.0)
    game = GameInstance(graph, preset_hiperlan2(args.channels))
    rec = run_trial(game, LearningConfig(step_size=args.alpha, max_iterations=args.max_iters,
                                         seed=args.seed, snapshot_every=1))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "sbs"] + [f"q_{m}" for m in range(args.channels)])
        for it, q in zip(rec.snapshot_iterations, rec.snapshots):
            for n in args.sbs:
                w.writerow([int(it), n] + [f"{p:.6f}" for p in q[n]])
    state = "converged" if rec.converged else "did not converge"
    print(f"{state} after {rec.iterations} iterations; final profile {rec.final_profile}; wrote {out}")


if __name__ == "__main__":
    main()
