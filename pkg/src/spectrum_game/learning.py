"""Stochastic-learning-automata channel selection.

Each SBS keeps a mixed strategy over channels. Every slot all SBSs sample a
channel, transmit, and reinforce the chosen channel in proportion to their own
normalized realized rate. No SBS observes anything but its own payoff.

Random-stream layout per slot (shared by both engines): N uniforms for channel
selection, M uniforms for the channel states, N uniforms for contention gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .channel import ChannelModel, sample_slot
from .game import GameInstance, sample_instant_rate

_CHUNK = 512


@dataclass(frozen=True)
class LearningConfig:
    step_size: float | tuple[float, ...] = 0.25
    max_iterations: int = 20000
    convergence_threshold: float = 0.99
    seed: int = 0
    snapshot_every: int = 10
    full_trace: bool = False
    engine: str = "numba"

    def __post_init__(self):
        steps = np.atleast_1d(np.asarray(self.step_size, dtype=float))
        if np.any(steps <= 0) or np.any(steps >= 1):
            raise ValueError(f"step size must lie in (0, 1), got {self.step_size}")
        if not 0.5 < self.convergence_threshold <= 1:
            raise ValueError(f"convergence threshold must lie in (0.5, 1], got {self.convergence_threshold}")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.engine not in ("numba", "python"):
            raise ValueError(f"unknown engine {self.engine!r}")

    def step_sizes(self, n: int) -> np.ndarray:
        steps = np.atleast_1d(np.asarray(self.step_size, dtype=float))
        if steps.size == 1:
            return np.full(n, steps[0])
        if steps.size != n:
            raise ValueError(f"{steps.size} per-SBS step sizes for {n} SBSs")
        return steps.copy()


@dataclass(eq=False)
class TrialRecord:
    converged: bool
    iterations: int
    final_profile: tuple[int, ...]
    final_strategies: np.ndarray | None = None
    snapshot_iterations: np.ndarray | None = None
    snapshots: np.ndarray | None = None
    realized_total: np.ndarray | None = None
    realized_rates: np.ndarray | None = None
    seed: int | None = None
    algorithm: str = "sla"
    extra: dict = field(default_factory=dict)

    def same_as(self, other: "TrialRecord") -> bool:
        def eq(x, y):
            if x is None or y is None:
                return x is y
            return np.array_equal(x, y)

        return (
            self.converged == other.converged
            and self.iterations == other.iterations
            and self.final_profile == other.final_profile
            and all(eq(getattr(self, k), getattr(other, k)) for k in
                    ("final_strategies", "snapshot_iterations", "snapshots", "realized_total", "realized_rates"))
        )


def normalize_payoff(r: float, cm: ChannelModel) -> float:
    if r < 0 or r > cm.max_rate:
        raise ValueError(f"rate {r} outside [0, {cm.max_rate}]")
    return r / cm.max_rate if cm.max_rate > 0 else 0.0


def sla_update(q: np.ndarray, chosen: int, payoff: float, alpha: float) -> np.ndarray:
    """One automaton update; pure strategies and zero payoffs are fixed points."""
    q = np.asarray(q, dtype=float)
    out = q - alpha * payoff * q
    out[chosen] = q[chosen] + alpha * payoff * (1.0 - q[chosen])
    return out


def detect_convergence(q: np.ndarray, threshold: float = 0.99) -> tuple[bool, tuple[int, ...]]:
    q = np.asarray(q, dtype=float)
    return bool((q.max(axis=1) >= threshold).all()), tuple(int(m) for m in q.argmax(axis=1))


def select_channel(q_n: np.ndarray, u: float) -> int:
    """Inverse-CDF draw from a mixed strategy with a running sum."""
    acc = 0.0
    last = len(q_n) - 1
    for m in range(last):
        acc += q_n[m]
        if u < acc:
            return m
    return last


@njit(cache=True)
def _all_converged(q, threshold):
    for n in range(q.shape[0]):
        best = q[n, 0]
        for m in range(1, q.shape[1]):
            if q[n, m] > best:
                best = q[n, m]
        if best < threshold:
            return False
    return True


@njit(cache=True)
def _sla_chunk(q, indptr, indices, rates, cum, alpha, threshold, max_rate, uniforms, k0, k_max,
               snap_every, snaps, snap_iters, n_snap, realized_total, realized, keep_per_sbs):
    """Run slots k0.. until convergence, k_max, or the chunk is exhausted.

    Returns (slots_done, converged, n_snap).
    """
    n_sbs, m_ch = q.shape
    k_rates = rates.shape[0]
    a = np.empty(n_sbs, dtype=np.int64)
    slot = np.empty(m_ch)
    r = np.empty(n_sbs)
    done = 0
    for row in range(uniforms.shape[0]):
        k = k0 + row
        if k >= k_max:
            return done, False, n_snap
        u = uniforms[row]
        for n in range(n_sbs):
            acc = 0.0
            a[n] = m_ch - 1
            for m in range(m_ch - 1):
                acc += q[n, m]
                if u[n] < acc:
                    a[n] = m
                    break
        for m in range(m_ch):
            idx = 0
            for kk in range(k_rates):
                if u[n_sbs + m] >= cum[m, kk]:
                    idx += 1
            if idx > k_rates - 1:
                idx = k_rates - 1
            slot[m] = rates[idx]
        for n in range(n_sbs):
            c = 0
            for p in range(indptr[n], indptr[n + 1]):
                if a[indices[p]] == a[n]:
                    c += 1
            if u[n_sbs + m_ch + n] < 1.0 / (1 + c):
                r[n] = slot[a[n]]
            else:
                r[n] = 0.0
        total = 0.0
        for n in range(n_sbs):
            total += r[n]
            pay = r[n] / max_rate if max_rate > 0 else 0.0
            step = alpha[n] * pay
            for m in range(m_ch):
                if m == a[n]:
                    q[n, m] = q[n, m] + step * (1.0 - q[n, m])
                else:
                    q[n, m] = q[n, m] - step * q[n, m]
        realized_total[k] = total
        if keep_per_sbs:
            for n in range(n_sbs):
                realized[k, n] = r[n]
        done += 1
        if snap_every > 0 and (k + 1) % snap_every == 0:
            snaps[n_snap] = q
            snap_iters[n_snap] = k + 1
            n_snap += 1
        if _all_converged(q, threshold):
            return done, True, n_snap
    return done, False, n_snap


def _run_python(g: GameInstance, q: np.ndarray, alpha: np.ndarray, cfg: LearningConfig,
                rng: np.random.Generator, trace: dict) -> tuple[bool, int]:
    """Reference slot loop built from the per-step operations; same stream layout as the kernel."""
    n_sbs, m_ch = q.shape
    cm = g.channels
    every = trace["snap_every"]
    for k in range(cfg.max_iterations):
        sel = rng.random(n_sbs)
        a = [select_channel(q[n], sel[n]) for n in range(n_sbs)]
        slot = sample_slot(cm, rng)
        r = [sample_instant_rate(g, a, slot, n, rng) for n in range(n_sbs)]
        for n in range(n_sbs):
            q[n] = sla_update(q[n], a[n], normalize_payoff(r[n], cm), alpha[n])
        trace["total"][k] = sum(r)
        if trace["per_sbs"] is not None:
            trace["per_sbs"][k] = r
        if every > 0 and (k + 1) % every == 0:
            trace["snaps"].append(q.copy())
            trace["iters"].append(k + 1)
        if detect_convergence(q, cfg.convergence_threshold)[0]:
            return True, k + 1
    return False, cfg.max_iterations


def run_trial(g: GameInstance, cfg: LearningConfig) -> TrialRecord:
    """Run the automata from uniform strategies until every SBS is near-pure or the budget is spent."""
    n_sbs, m_ch = g.n_players, g.n_channels
    cm = g.channels
    q = np.full((n_sbs, m_ch), 1.0 / m_ch)
    alpha = cfg.step_sizes(n_sbs)
    rng = np.random.default_rng(cfg.seed)
    every = 1 if cfg.full_trace else cfg.snapshot_every
    k_max = cfg.max_iterations
    realized_total = np.zeros(k_max)
    realized = np.zeros((k_max, n_sbs)) if cfg.full_trace else None

    converged, iters = detect_convergence(q, cfg.convergence_threshold)[0], 0
    if converged:
        snaps_out = np.empty((0, n_sbs, m_ch))
        iters_out = np.empty(0, dtype=np.int64)
    elif cfg.engine == "python":
        trace = {"snap_every": every, "total": realized_total, "per_sbs": realized, "snaps": [], "iters": []}
        converged, iters = _run_python(g, q, alpha, cfg, rng, trace)
        snaps_out = np.array(trace["snaps"]).reshape(-1, n_sbs, m_ch)
        iters_out = np.array(trace["iters"], dtype=np.int64)
    else:
        indptr, indices = g.graph.csr()
        n_cap = k_max // every if every > 0 else 0
        snaps = np.empty((n_cap, n_sbs, m_ch))
        snap_iters = np.empty(n_cap, dtype=np.int64)
        per_sbs = realized if realized is not None else np.empty((0, n_sbs))
        width = 2 * n_sbs + m_ch
        n_snap = 0
        while iters < k_max and not converged:
            u = rng.random((min(_CHUNK, k_max - iters), width))
            done, converged, n_snap = _sla_chunk(
                q, indptr, indices, cm.rates, cm.cumulative, alpha, cfg.convergence_threshold, cm.max_rate,
                u, iters, k_max, every, snaps, snap_iters, n_snap, realized_total, per_sbs, realized is not None)
            iters += done
        snaps_out = snaps[:n_snap].copy()
        iters_out = snap_iters[:n_snap].copy()

    return TrialRecord(
        converged=bool(converged),
        iterations=int(iters),
        final_profile=tuple(int(m) for m in q.argmax(axis=1)),
        final_strategies=q,
        snapshot_iterations=iters_out,
        snapshots=snaps_out,
        realized_total=realized_total[:iters].copy(),
        realized_rates=None if realized is None else realized[:iters].copy(),
        seed=cfg.seed,
    )
