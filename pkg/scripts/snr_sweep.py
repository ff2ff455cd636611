"""Aggregate throughput of SLA and the genie baselines across channel-quality presets.

Only the 6 dB HIPERLAN/2 distribution ships with the package. Other SNR
levels are given as extra JSON channel configs via --preset LABEL=PATH.

    python scripts/snr_sweep.py --preset 10dB=configs/my_10db.json
"""

import argparse
import json
from pathlib import Path

from spectrum_game.harness import (
    ChannelSpec,
    ExperimentConfig,
    SweepPoint,
    TopologySpec,
    aggregate_table,
    emit_tables,
    sweep,
)


def _spec(path: str) -> ChannelSpec:
    d = json.loads(Path(path).read_text())
    if "rates" in d:
        d["rates"] = tuple(d["rates"])
        d.setdefault("preset", None)
    return ChannelSpec(**d)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", action="append", default=[], metavar="LABEL=PATH")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="results/snr_sweep")
    args = ap.parse_args()

    points = [SweepPoint("6dB", channels=ChannelSpec(n_channels=3))]
    for item in args.preset:
        label, _, path = item.partition("=")
        points.append(SweepPoint(label, channels=_spec(path)))
    cfg = ExperimentConfig(topology=TopologySpec(seed=args.seed), algorithms=("sla", "sap_nc", "s_logit"),
                           max_iterations=5000, trials=args.trials, master_seed=args.seed, workers=args.workers,
                           sweep_axis="snr", sweep_points=tuple(points), label="snr")
    results = sweep(cfg)
    for p, r in zip(points, results):
        if isinstance(r, Exception):
            print(f"point {p.label} failed: {r}")
    ok = [r for r in results if not isinstance(r, Exception)]
    emit_tables(ok, args.out_dir)
    print(aggregate_table(ok), end="")


if __name__ == "__main__":
    main()
