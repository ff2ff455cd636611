"""Seeded multi-trial experiments, sweeps, and CSV tables.

Trial seeds come from ``numpy.random.SeedSequence`` keyed on
``(master_seed, point_index, trial_index[, stream])``; any single trial can be
re-run in isolation. Outputs are sorted by (algorithm, trial) before
aggregation, so completion order never changes a byte of output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .baselines import ALGORITHMS as BASELINES
from .baselines import BaselineConfig, GenieGame, run_baseline
from .channel import ChannelModel, channels_from_dict
from .game import GameInstance, aggregate_throughput, is_nash, throughput_lower_bound
from .learning import LearningConfig, run_trial
from .topology import (
    DEFAULT_AREA,
    DEFAULT_RADIUS,
    InterferenceGraph,
    build_graph,
    generate_deployment,
    load_topology,
)

SLA = "sla"
ALGORITHMS = (SLA, *BASELINES)
STREAMS = {SLA: 0, "sap_nc": 1, "s_logit": 2}
AGGREGATE_COLUMNS = ["point_label", "algorithm", "trials", "mean_U", "std_U", "conv_rate", "mean_iters",
                     "ne_rate", "bound"]
TRIAL_COLUMNS = ["point_label", "algorithm", "trial_id", "seed", "converged", "iterations", "final_profile",
                 "final_U", "is_ne", "failed", "error"]


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def derive_seed(master_seed: int, point: int, trial: int, stream: int = 0) -> int:
    key = [int(master_seed), int(point), int(trial)] + ([int(stream)] if stream else [])
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])


def _fmt(x: Any) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return "nan" if math.isnan(x) else format(x, ".12g")
    return str(x)


# --- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class TopologySpec:
    file: str | None = None
    n: int = 15
    area: tuple[float, float] = DEFAULT_AREA
    radius: float = DEFAULT_RADIUS
    seed: int | None = None


@dataclass(frozen=True)
class ChannelSpec:
    preset: str | None = "hiperlan2"
    rates: tuple[float, ...] | None = None
    probabilities: Any = None
    n_channels: int | None = None
    allow_unequal_means: bool = False
    label: str = ""

    def build(self) -> ChannelModel:
        d: dict = {"n_channels": self.n_channels, "allow_unequal_means": self.allow_unequal_means}
        if self.rates is not None or self.probabilities is not None:
            d.update(rates=self.rates, probabilities=self.probabilities, label=self.label)
        elif self.preset is not None:
            d["preset"] = self.preset
        try:
            return channels_from_dict(d)
        except ValueError as e:
            raise ConfigError("channels", str(e)) from e


@dataclass(frozen=True)
class SweepPoint:
    label: str
    channels: ChannelSpec | None = None
    n: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologySpec = TopologySpec()
    channels: ChannelSpec = ChannelSpec()
    algorithms: tuple[str, ...] = (SLA,)
    alpha: float = 0.25
    max_iterations: int = 20000
    threshold: float = 0.99
    beta: float = 10.0
    update_prob: float = 0.1
    baseline_iterations: int = 5000
    trials: int = 1000
    master_seed: int = 0
    out_dir: str | None = None
    sweep_axis: str | None = None
    sweep_points: tuple[SweepPoint, ...] = ()
    workers: int = 1
    label: str = "base"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be >= 1, got {self.workers}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError("algorithms", f"unknown algorithm {a!r}; expected {ALGORITHMS}")
        if not self.algorithms:
            raise ConfigError("algorithms", "at least one algorithm required")
        if self.sweep_axis not in (None, "snr", "n"):
            raise ConfigError("sweep.axis", f"expected 'snr' or 'n', got {self.sweep_axis!r}")
        labels = [p.label for p in self.sweep_points]
        if len(set(labels)) != len(labels):
            raise ConfigError("sweep.points", f"labels must be unique, got {labels}")
        for p in self.sweep_points:
            if self.sweep_axis == "snr" and p.channels is None:
                raise ConfigError("sweep.points", f"snr point {p.label!r} needs a channel config")
            if self.sweep_axis == "n" and (p.n is None or p.n < 1):
                raise ConfigError("sweep.points", f"scale point {p.label!r} needs n >= 1")
        try:
            LearningConfig(step_size=self.alpha, max_iterations=self.max_iterations,
                           convergence_threshold=self.threshold)
            BaselineConfig(beta=self.beta, update_prob=self.update_prob, iterations=self.baseline_iterations)
        except ValueError as e:
            raise ConfigError("algorithm parameters", str(e)) from e

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)} | {"sweep"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config key")
        topo = d.pop("topology", {}) or {}
        chan = d.pop("channels", {}) or {}
        if isinstance(topo, str):
            topo = {"file": topo}
        try:
            topo_spec = TopologySpec(**{k: tuple(v) if k == "area" else v for k, v in topo.items()})
        except TypeError as e:
            raise ConfigError("topology", str(e)) from e
        chan_spec = _channel_spec(chan, "channels")
        sweep = d.pop("sweep", None) or {}
        axis = sweep.get("axis")
        points = []
        for i, p in enumerate(sweep.get("points", [])):
            if "label" not in p:
                raise ConfigError(f"sweep.points[{i}].label", "missing")
            ch = p.get("channels")
            points.append(SweepPoint(str(p["label"]), _channel_spec(ch, f"sweep.points[{i}].channels")
                                     if ch is not None else None, p.get("n")))
        if "algorithms" in d:
            d["algorithms"] = tuple(d["algorithms"])
        return cls(topology=topo_spec, channels=chan_spec, sweep_axis=axis, sweep_points=tuple(points), **d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as e:
            raise ConfigError(str(path), f"invalid JSON: {e}") from e


def _channel_spec(d: dict | str, where: str) -> ChannelSpec:
    if isinstance(d, str):
        d = {"preset": d}
    d = dict(d)
    if "rates" in d:
        d["rates"] = tuple(d["rates"])
        d.setdefault("preset", None)
    try:
        return ChannelSpec(**d)
    except TypeError as e:
        raise ConfigError(where, str(e)) from e


# --- results -------------------------------------------------------------------


@dataclass
class TrialRow:
    point_label: str
    algorithm: str
    trial_id: int
    seed: int
    converged: bool = False
    iterations: int = 0
    final_profile: tuple[int, ...] = ()
    final_U: float = float("nan")
    is_ne: bool = False
    failed: bool = False
    error: str = ""

    def cells(self) -> list[str]:
        d = asdict(self)
        d["final_profile"] = "-".join(str(x) for x in self.final_profile)
        return [_fmt(d[c]) for c in TRIAL_COLUMNS]


@dataclass
class AggregateRow:
    point_label: str
    algorithm: str
    trials: int
    mean_U: float
    std_U: float
    conv_rate: float
    mean_iters: float
    ne_rate: float
    bound: float
    n_failed: int = 0

    def cells(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in AGGREGATE_COLUMNS]


@dataclass
class ExperimentResult:
    point_label: str
    point_index: int
    bound: float
    aggregates: list[AggregateRow]
    trials: list[TrialRow]
    warning: str | None = None
    trial_csv: str | None = None
    graph: InterferenceGraph | None = field(default=None, repr=False)

    def aggregate(self, algorithm: str) -> AggregateRow:
        for row in self.aggregates:
            if row.algorithm == algorithm:
                return row
        raise KeyError(algorithm)

    def to_json(self) -> str:
        return json.dumps({
            "point_label": self.point_label,
            "point_index": self.point_index,
            "bound": _fmt(self.bound),
            "warning": self.warning,
            "aggregates": [dict(zip(AGGREGATE_COLUMNS, r.cells()), n_failed=r.n_failed) for r in self.aggregates],
            "trials": [r.cells() for r in self.trials],
        }, sort_keys=True)


def aggregate(rows: list[TrialRow], point_label: str, algorithm: str, bound: float) -> AggregateRow:
    """Cross-trial summary; insensitive to the order of ``rows``."""
    rows = sorted((r for r in rows if r.algorithm == algorithm), key=lambda r: r.trial_id)
    ok = [r for r in rows if not r.failed]
    u = np.array([r.final_U for r in ok], dtype=float)
    n = len(ok)
    return AggregateRow(
        point_label=point_label,
        algorithm=algorithm,
        trials=n,
        mean_U=float(u.mean()) if n else float("nan"),
        std_U=float(u.std(ddof=1)) if n > 1 else 0.0,
        conv_rate=float(np.mean([r.converged for r in ok])) if n else float("nan"),
        mean_iters=float(np.mean([r.iterations for r in ok])) if n else float("nan"),
        ne_rate=float(np.mean([r.is_ne for r in ok])) if n else float("nan"),
        bound=bound,
        n_failed=len(rows) - n,
    )


# --- execution -----------------------------------------------------------------


def _run_one(job: tuple) -> TrialRow:
    game, algorithm, params, point_label, trial_id, seed = job
    row = TrialRow(point_label, algorithm, trial_id, seed)
    try:
        if algorithm == SLA:
            rec = run_trial(game, LearningConfig(step_size=params["alpha"], max_iterations=params["max_iterations"],
                                                 convergence_threshold=params["threshold"], seed=seed,
                                                 snapshot_every=0))
        else:
            rec = run_baseline(GenieGame(game), algorithm,
                               BaselineConfig(beta=params["beta"], update_prob=params["update_prob"],
                                              iterations=params["baseline_iterations"], seed=seed))
        row.converged = rec.converged
        row.iterations = rec.iterations
        row.final_profile = rec.final_profile
        row.final_U = aggregate_throughput(game, rec.final_profile)
        row.is_ne = is_nash(game, rec.final_profile)[0]
    except Exception as e:  # noqa: BLE001 - a failing trial must not abort the batch
        row.failed = True
        row.error = f"{type(e).__name__}: {e}"
    return row


def _params(cfg: ExperimentConfig) -> dict:
    return {"alpha": cfg.alpha, "max_iterations": cfg.max_iterations, "threshold": cfg.threshold,
            "beta": cfg.beta, "update_prob": cfg.update_prob, "baseline_iterations": cfg.baseline_iterations}


def resolve_graph(spec: TopologySpec, master_seed: int, n: int | None = None) -> InterferenceGraph:
    if spec.file is not None and n is None:
        try:
            return load_topology(spec.file)
        except (OSError, ValueError, KeyError) as e:
            raise ConfigError("topology.file", f"{spec.file}: {e}") from e
    seed = master_seed if spec.seed is None else spec.seed
    if n is not None:
        seed = int(np.random.SeedSequence([seed, n]).generate_state(1, np.uint64)[0])
    try:
        return build_graph(generate_deployment(n or spec.n, spec.area, seed), spec.radius)
    except ValueError as e:
        raise ConfigError("topology", str(e)) from e


def run_point(game: GameInstance, cfg: ExperimentConfig, point_index: int = 0,
              label: str | None = None) -> ExperimentResult:
    label = cfg.label if label is None else label
    params = _params(cfg)
    jobs = [
        (game, alg, params, label, t, derive_seed(cfg.master_seed, point_index, t, STREAMS[alg]))
        for alg in cfg.algorithms for t in range(cfg.trials)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (8 * cfg.workers))))
    else:
        rows = [_run_one(j) for j in jobs]
    order = {a: i for i, a in enumerate(cfg.algorithms)}
    rows.sort(key=lambda r: (order[r.algorithm], r.trial_id))
    bound = throughput_lower_bound(game)
    return ExperimentResult(
        point_label=label,
        point_index=point_index,
        bound=bound,
        aggregates=[aggregate(rows, label, a, bound) for a in cfg.algorithms],
        trials=rows,
        warning=game.channels.warning,
        graph=game.graph,
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """All trials of every configured algorithm on the base topology and channels."""
    game = GameInstance(resolve_graph(cfg.topology, cfg.master_seed), cfg.channels.build())
    return run_point(game, cfg, 0, cfg.label)


def sweep(cfg: ExperimentConfig) -> list[ExperimentResult | Exception]:
    """One result per sweep point; a failing point is returned as its exception."""
    if not cfg.sweep_points:
        raise ConfigError("sweep.points", "sweep axis is empty")
    out: list[ExperimentResult | Exception] = []
    shared = resolve_graph(cfg.topology, cfg.master_seed) if cfg.sweep_axis == "snr" else None
    for i, p in enumerate(cfg.sweep_points):
        try:
            if cfg.sweep_axis == "snr":
                game = GameInstance(shared, p.channels.build())
            else:
                game = GameInstance(resolve_graph(cfg.topology, cfg.master_seed, p.n), cfg.channels.build())
            out.append(run_point(game, cfg, i, p.label))
        except Exception as e:  # noqa: BLE001 - remaining points still run
            out.append(e)
    return out


# --- tables --------------------------------------------------------------------


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def aggregate_table(results: list[ExperimentResult]) -> str:
    return _csv_text(AGGREGATE_COLUMNS, [r.cells() for res in results for r in res.aggregates])


def long_table(results: list[ExperimentResult]) -> str:
    """Plot-ready long format: one (point, algorithm, metric, value, trials) row per number."""
    metrics = ["mean_U", "std_U", "conv_rate", "mean_iters", "ne_rate", "bound"]
    rows = [[r.point_label, r.algorithm, m, _fmt(getattr(r, m)), str(r.trials)]
            for res in results for r in res.aggregates for m in metrics]
    return _csv_text(["point_label", "algorithm", "metric", "value", "trials"], rows)


def trial_table(results: list[ExperimentResult]) -> str:
    return _csv_text(TRIAL_COLUMNS, [t.cells() for res in results for t in res.trials])


def emit_tables(results: list[ExperimentResult], out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    paths = {"aggregate": out / "aggregate.csv", "long": out / "long.csv", "trials": out / "trials.csv"}
    _write(paths["aggregate"], aggregate_table(results))
    _write(paths["long"], long_table(results))
    _write(paths["trials"], trial_table(results))
    for res in results:
        res.trial_csv = str(paths["trials"])
    return paths
