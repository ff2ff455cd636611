"""Command-line entry point: ``spectrum-game <subcommand> ...``.

On failure a single JSON line ``{"error": ..., "message": ...}`` goes to
stderr and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channel import channels_from_dict
from .game import (
    DEFAULT_CAP,
    GameInstance,
    enumerate_equilibria,
    throughput_lower_bound,
)
from .harness import (
    SLA,
    ChannelSpec,
    ExperimentConfig,
    TopologySpec,
    _csv_text,
    _fmt,
    _write,
    aggregate_table,
    emit_tables,
    resolve_graph,
    run_point,
    sweep,
)
from .topology import (
    DEFAULT_RADIUS,
    build_graph,
    generate_deployment,
    load_topology,
    save_topology,
)


def _global_flags(default) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=default, help="master seed")
    p.add_argument("--workers", type=int, default=default, help="parallel trial workers")
    p.add_argument("--out-dir", default=default, help="directory for emitted tables")
    return p


def _game_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", help="topology JSON written by gen-topology")
    p.add_argument("--channels", help="channel config JSON (default: built-in HIPERLAN/2 preset)")
    p.add_argument("--n-channels", type=int, default=None,
                   help="M for presets and single-template configs (default 3)")


def _trial_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--threshold", type=float, default=0.99)
    p.add_argument("--out", help="per-trial CSV path")


def build_parser() -> argparse.ArgumentParser:
    # accepted before or after the subcommand; the subcommand copy must not clobber the first
    glob = _global_flags(argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="spectrum-game", parents=[_global_flags(None)],
                                     description="Distributed spectrum access game simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-topology", parents=[glob], help="random deployment + interference graph")
    p.add_argument("--n", type=int, default=15)
    p.add_argument("--area", type=float, nargs=2, default=(1000.0, 1000.0), metavar=("W", "H"))
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze", parents=[glob], help="enumerate pure Nash equilibria")
    _game_flags(p)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out", help="NE report JSON path")

    p = sub.add_parser("bound", parents=[glob], help="equilibrium throughput lower bound")
    _game_flags(p)

    p = sub.add_parser("run", parents=[glob], help="run the learning automata for many trials")
    _game_flags(p)
    _trial_flags(p)

    p = sub.add_parser("compare", parents=[glob], help="learning automata vs genie-aided baselines")
    _game_flags(p)
    _trial_flags(p)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--update-prob", type=float, default=0.1)
    p.add_argument("--baseline-iters", type=int, default=5000)

    p = sub.add_parser("sweep", parents=[glob], help="run an experiment config with a sweep axis")
    p.add_argument("--config", required=True)
    return parser


def _channel_dict(args) -> dict:
    if not args.channels:
        return {"preset": "hiperlan2", "n_channels": args.n_channels or 3}
    d = json.loads(Path(args.channels).read_text())
    if "preset" in d or np.ndim(d.get("probabilities")) == 1:
        d.setdefault("n_channels", args.n_channels or 3)
    elif args.n_channels is not None:
        d.setdefault("n_channels", args.n_channels)
    return d


def _game(args) -> GameInstance:
    if args.topology is None:
        raise ValueError("--topology is required")
    return GameInstance(load_topology(args.topology), channels_from_dict(_channel_dict(args)))


def _config(args, algorithms) -> ExperimentConfig:
    kw = _channel_dict(args)
    if isinstance(kw.get("rates"), list):
        kw["rates"] = tuple(kw["rates"])
        kw.setdefault("preset", None)
    return ExperimentConfig(
        topology=TopologySpec(file=args.topology),
        channels=ChannelSpec(**kw),
        algorithms=algorithms,
        alpha=args.alpha,
        max_iterations=args.max_iters,
        threshold=args.threshold,
        beta=getattr(args, "beta", 10.0),
        update_prob=getattr(args, "update_prob", 0.1),
        baseline_iterations=getattr(args, "baseline_iters", 5000),
        trials=args.trials,
        master_seed=args.seed or 0,
        workers=args.workers or 1,
        label="cli",
    )


def cmd_gen_topology(args) -> None:
    g = build_graph(generate_deployment(args.n, args.area, args.seed or 0), args.radius)
    save_topology(g, args.out)
    print(f"wrote {args.out}: n={g.n_nodes} edges={len(g.edges)}")


def cmd_analyze(args) -> None:
    game = _game(args)
    report = enumerate_equilibria(game, cap=args.cap)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    print(f"ne_count={report.ne_count}, min_U={_fmt(report.min_aggregate)}, bound={_fmt(report.bound)}")


def cmd_bound(args) -> None:
    print(_fmt(throughput_lower_bound(_game(args))))


def cmd_run(args) -> None:
    res = run_point(_game(args), _config(args, (SLA,)), 0, "cli")
    header = ["trial_id", "converged", "iterations", "final_profile", "final_U", "is_ne"]
    rows = [[_fmt(x) for x in (t.trial_id, t.converged, t.iterations, "-".join(map(str, t.final_profile)),
                               t.final_U, t.is_ne)] for t in res.trials]
    _emit(args, res, header, rows)


def cmd_compare(args) -> None:
    res = run_point(_game(args), _config(args, ("sla", "sap_nc", "s_logit")), 0, "cli")
    header = ["algorithm", "trial_id", "final_U", "is_ne", "iterations"]
    rows = [[_fmt(x) for x in (t.algorithm, t.trial_id, t.final_U, t.is_ne, t.iterations)] for t in res.trials]
    _emit(args, res, header, rows)


def _emit(args, res, header, rows) -> None:
    text = _csv_text(header, rows)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    if args.out_dir:
        emit_tables([res], args.out_dir)
    sys.stderr.write(aggregate_table([res]))


def cmd_sweep(args) -> None:
    cfg = ExperimentConfig.load(args.config)
    over = {}
    if args.seed is not None:
        over["master_seed"] = args.seed
    if args.workers is not None:
        over["workers"] = args.workers
    if args.out_dir is not None:
        over["out_dir"] = args.out_dir
    cfg = replace(cfg, **over)
    results = sweep(cfg) if cfg.sweep_axis else [run_point(
        GameInstance(resolve_graph(cfg.topology, cfg.master_seed), cfg.channels.build()), cfg, 0, cfg.label)]
    ok = [r for r in results if not isinstance(r, Exception)]
    out_dir = cfg.out_dir or "results"
    paths = emit_tables(ok, out_dir)
    sys.stdout.write(aggregate_table(ok))
    print(f"tables written to {paths['aggregate'].parent}", file=sys.stderr)
    failed = [(p.label, r) for p, r in zip(cfg.sweep_points, results) if isinstance(r, Exception)]
    if failed:
        label, err = failed[0]
        raise RuntimeError(f"{len(failed)} sweep point(s) failed; first {label!r}: {err}")


COMMANDS = {
    "gen-topology": cmd_gen_topology,
    "analyze": cmd_analyze,
    "bound": cmd_bound,
    "run": cmd_run,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except Exception as e:  # noqa: BLE001 - converted to the machine-readable error line
        print(json.dumps({"error": type(e).__name__, "message": str(e), "command": args.command}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
