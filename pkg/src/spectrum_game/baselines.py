"""Genie-aided comparison algorithms on the static expected-rate game.

Both baselines see each channel as a fixed rate equal to its mean, which is
information the SBSs do not have in the time-varying setting. They serve as
near-optimal yardsticks only.

* SAP-NC: spatial adaptive play with neighbouring cooperation. One uniformly
  chosen player resamples its channel from a Boltzmann distribution over its
  local welfare (own utility plus its neighbours' utilities).
* S-logit: simultaneous log-linear learning. Each player independently
  revises with probability ``p`` from a Boltzmann distribution over its own
  utility, all against the previous profile.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .game import GameInstance
from .learning import TrialRecord

SAP_NC = "sap_nc"
S_LOGIT = "s_logit"
ALGORITHMS = (SAP_NC, S_LOGIT)


@dataclass(frozen=True)
class GenieGame:
    game: GameInstance

    @property
    def mean_rates(self) -> np.ndarray:
        return self.game.mean_rates

    def arrays(self):
        indptr, indices = self.game.graph.csr()
        return indptr, indices, np.ascontiguousarray(self.mean_rates, dtype=float)


@dataclass(frozen=True)
class BaselineConfig:
    beta: float = 10.0
    update_prob: float = 0.1
    iterations: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not 0 <= self.update_prob <= 1:
            raise ValueError(f"update probability must lie in [0, 1], got {self.update_prob}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@njit(cache=True)
def _count(a, indptr, indices, n, channel, skip):
    c = 0
    for p in range(indptr[n], indptr[n + 1]):
        j = indices[p]
        if j != skip and a[j] == channel:
            c += 1
    return c


@njit(cache=True)
def _boltzmann(logits, u):
    top = logits.max()
    w = np.exp(logits - top)
    target = u * w.sum()
    acc = 0.0
    for m in range(w.size - 1):
        acc += w[m]
        if target < acc:
            return m
    return w.size - 1


@njit(cache=True)
def _sap_nc_logits(a, indptr, indices, means, beta, n):
    """beta * local welfare of player ``n`` for every candidate channel, others fixed."""
    m_ch = means.size
    logits = np.empty(m_ch)
    for m in range(m_ch):
        w = means[m] / (1 + _count(a, indptr, indices, n, m, -1))
        for p in range(indptr[n], indptr[n + 1]):
            j = indices[p]
            cj = _count(a, indptr, indices, j, a[j], n)
            if a[j] == m:
                cj += 1
            w += means[a[j]] / (1 + cj)
        logits[m] = beta * w
    return logits


@njit(cache=True)
def _s_logit_logits(a, indptr, indices, means, beta, n):
    logits = np.empty(means.size)
    for m in range(means.size):
        logits[m] = beta * means[m] / (1 + _count(a, indptr, indices, n, m, -1))
    return logits


@njit(cache=True)
def _sap_nc_update(a, indptr, indices, means, beta, u_player, u_choice):
    n_players = a.size
    n = min(int(u_player * n_players), n_players - 1)
    a[n] = _boltzmann(_sap_nc_logits(a, indptr, indices, means, beta, n), u_choice)


@njit(cache=True)
def _s_logit_update(a, indptr, indices, means, beta, p_update, u):
    new = a.copy()
    for n in range(a.size):
        if u[2 * n] < p_update:
            new[n] = _boltzmann(_s_logit_logits(a, indptr, indices, means, beta, n), u[2 * n + 1])
    return new


@njit(cache=True)
def _run_sap_nc(a, indptr, indices, means, beta, uniforms):
    last_change = 0
    for t in range(uniforms.shape[0]):
        before = a.copy()
        _sap_nc_update(a, indptr, indices, means, beta, uniforms[t, 0], uniforms[t, 1])
        if (before != a).any():
            last_change = t + 1
    return last_change


@njit(cache=True)
def _run_s_logit(a, indptr, indices, means, beta, p_update, uniforms):
    last_change = 0
    for t in range(uniforms.shape[0]):
        new = _s_logit_update(a, indptr, indices, means, beta, p_update, uniforms[t])
        if (new != a).any():
            last_change = t + 1
        a[:] = new
    return last_change


def choice_probabilities(gg: GenieGame, a: Sequence[int], n: int, which: str, beta: float) -> np.ndarray:
    """Revision distribution of player ``n`` under either baseline."""
    prof = np.array(gg.game.check_profile(a), dtype=np.int64)
    kernel = _sap_nc_logits if which == SAP_NC else _s_logit_logits
    logits = kernel(prof, *gg.arrays(), float(beta), int(n))
    w = np.exp(logits - logits.max())
    return w / w.sum()


def sap_nc_step(gg: GenieGame, a: Sequence[int], cfg: BaselineConfig, rng: np.random.Generator) -> tuple[int, ...]:
    """One SAP-NC revision; consumes two uniforms (player, channel)."""
    prof = np.array(gg.game.check_profile(a), dtype=np.int64)
    u = rng.random(2)
    _sap_nc_update(prof, *gg.arrays(), float(cfg.beta), u[0], u[1])
    return tuple(int(x) for x in prof)


def s_logit_step(gg: GenieGame, a: Sequence[int], cfg: BaselineConfig, rng: np.random.Generator) -> tuple[int, ...]:
    """One simultaneous log-linear round; consumes two uniforms per player."""
    prof = np.array(gg.game.check_profile(a), dtype=np.int64)
    u = rng.random(2 * prof.size)
    new = _s_logit_update(prof, *gg.arrays(), float(cfg.beta), float(cfg.update_prob), u)
    return tuple(int(x) for x in new)


def initial_profile(gg: GenieGame, rng: np.random.Generator) -> np.ndarray:
    m = gg.game.n_channels
    return np.minimum((rng.random(gg.game.n_players) * m).astype(np.int64), m - 1)


def run_baseline(gg: GenieGame, which: str, cfg: BaselineConfig) -> TrialRecord:
    """Iterate one baseline from a uniformly random profile for ``cfg.iterations`` steps.

    ``converged`` flags a profile that did not change during the last tenth of
    the horizon; the baselines themselves have no stopping rule.
    """
    if which not in ALGORITHMS:
        raise ValueError(f"unknown baseline {which!r}; expected one of {ALGORITHMS}")
    rng = np.random.default_rng(cfg.seed)
    a = initial_profile(gg, rng)
    indptr, indices, means = gg.arrays()
    t = cfg.iterations
    if which == SAP_NC:
        last = _run_sap_nc(a, indptr, indices, means, float(cfg.beta), rng.random((t, 2)))
    else:
        last = _run_s_logit(a, indptr, indices, means, float(cfg.beta), float(cfg.update_prob),
                            rng.random((t, 2 * a.size)))
    window = max(1, t // 10)
    return TrialRecord(
        converged=bool(t > 0 and last <= t - window),
        iterations=t,
        final_profile=tuple(int(x) for x in a),
        seed=cfg.seed,
        algorithm=which,
        extra={"last_change": int(last)},
    )
