"""The robust graphical channel-selection game.

Player ``n`` picks channel ``a[n]``; its utility is the expected rate of that
channel shared with the ``c_n`` neighbours on the same channel,
``sbar / (1 + c_n)``. The potential is the negated total interference count.
Brute-force oracles enumerate all ``M**N`` profiles in lexicographic order
(node 0 is the most significant digit).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channel import ChannelModel, ChannelStateSlot
from .topology import InterferenceGraph

DEFAULT_CAP = 10**7
UTILITY_ATOL = 1e-12
_CHUNK = 1 << 15


class EnumerationCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class GameInstance:
    graph: InterferenceGraph
    channels: ChannelModel

    @property
    def n_players(self) -> int:
        return self.graph.n_nodes

    @property
    def n_channels(self) -> int:
        return self.channels.n_channels

    @property
    def mean_rates(self) -> np.ndarray:
        return self.channels.mean_rates

    @property
    def sbar(self) -> float:
        """Common expected rate; only meaningful when channel means are equal."""
        return float(self.mean_rates[0])

    def check_profile(self, a: Sequence[int]) -> tuple[int, ...]:
        a = tuple(int(x) for x in a)
        if len(a) != self.n_players:
            raise ValueError(f"profile length {len(a)} != N={self.n_players}")
        if any(not 0 <= x < self.n_channels for x in a):
            raise ValueError(f"profile {a} has channels outside 0..{self.n_channels - 1}")
        return a


ActionProfile = tuple[int, ...]


def interference_count(g: GameInstance, a: Sequence[int], n: int) -> int:
    return sum(1 for j in g.graph.neighbor_sets[n] if a[j] == a[n])


def interference_counts(g: GameInstance, a: Sequence[int]) -> np.ndarray:
    return np.array([interference_count(g, a, n) for n in range(g.n_players)], dtype=np.int64)


def utility(g: GameInstance, a: Sequence[int], n: int) -> float:
    return float(g.mean_rates[a[n]]) / (1 + interference_count(g, a, n))


def aggregate_throughput(g: GameInstance, a: Sequence[int]) -> float:
    means = g.mean_rates
    return float(sum(means[a[n]] / (1 + c) for n, c in enumerate(interference_counts(g, a))))


def throughput_units(g: GameInstance, a: Sequence[int]) -> Fraction:
    """Aggregate throughput in units of the common expected rate, exactly."""
    return sum((Fraction(1, 1 + int(c)) for c in interference_counts(g, a)), Fraction(0))


def potential(g: GameInstance, a: Sequence[int]) -> int:
    return -int(interference_counts(g, a).sum())


def _better(g: GameInstance, c_new: int, m_new: int, c_old: int, m_old: int) -> int:
    """Sign of u(new) - u(old) for one player; integer comparison under equal means."""
    if g.channels.equal_means:
        return (c_new < c_old) - (c_new > c_old)
    means = g.mean_rates
    d = means[m_new] / (1 + c_new) - means[m_old] / (1 + c_old)
    return 0 if abs(d) <= UTILITY_ATOL else (1 if d > 0 else -1)


def is_nash(g: GameInstance, a: Sequence[int]) -> tuple[bool, tuple[int, int] | None]:
    """Pure-NE test. Returns ``(False, (player, better_channel))`` on the first strict improvement."""
    a = g.check_profile(a)
    for n in range(g.n_players):
        counts = np.zeros(g.n_channels, dtype=np.int64)
        for j in g.graph.neighbor_sets[n]:
            counts[a[j]] += 1
        for m in range(g.n_channels):
            if m != a[n] and _better(g, int(counts[m]), m, int(counts[a[n]]), a[n]) > 0:
                return False, (n, m)
    return True, None


def throughput_lower_bound(g: GameInstance) -> float:
    m = g.n_channels
    return float(sum(g.sbar * m / (m + d) for d in g.graph.degrees))


def bound_units(g: GameInstance) -> Fraction:
    m = g.n_channels
    return sum((Fraction(m, m + int(d)) for d in g.graph.degrees), Fraction(0))


def sample_instant_rate(g: GameInstance, a: Sequence[int], slot: ChannelStateSlot, n: int,
                        rng: np.random.Generator) -> float:
    """Realized rate of player ``n``: the slot rate with probability ``1/(1+c_n)``, else 0.

    Consumes exactly one uniform from ``rng``.
    """
    c = interference_count(g, a, n)
    win = rng.random() < 1.0 / (1 + c)
    return float(slot[a[n]]) if win else 0.0


# --- brute-force oracles -------------------------------------------------------


def _profiles(n: int, m: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        out[:, pos] = idx % m
        idx //= m
    return out


def _neighbor_counts(adj: np.ndarray, prof: np.ndarray, m: int) -> np.ndarray:
    """counts[p, n, k] = number of neighbours of n on channel k in profile p."""
    onehot = (prof[:, :, None] == np.arange(m)).astype(np.int64)
    return np.einsum("nj,pjk->pnk", adj, onehot)


def _check_cap(total: int, cap: int, what: str) -> None:
    if total > cap:
        raise EnumerationCapExceeded(f"{what} = {total} exceeds enumeration cap {cap}")


def _ne_mask(g: GameInstance, prof: np.ndarray, counts: np.ndarray) -> np.ndarray:
    own = np.take_along_axis(counts, prof[:, :, None], axis=2)[:, :, 0]
    if g.channels.equal_means:
        return (counts.min(axis=2) >= own).all(axis=1)
    means = g.mean_rates
    u_all = means[None, None, :] / (1 + counts)
    u_own = means[prof] / (1 + own)
    return (u_all <= u_own[:, :, None] + UTILITY_ATOL).all(axis=(1, 2))


def potential_table(g: GameInstance, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Potential of every profile, indexed by lexicographic profile number."""
    n, m = g.n_players, g.n_channels
    total = m**n
    _check_cap(total, cap, "M^N")
    edges = np.array(g.graph.edges, dtype=np.int64).reshape(-1, 2)
    out = np.empty(total, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        prof = _profiles(n, m, start, min(total, start + _CHUNK))
        mono = (prof[:, edges[:, 0]] == prof[:, edges[:, 1]]).sum(axis=1)
        out[start:start + prof.shape[0]] = -2 * mono
    return out


def potential_maximizers(g: GameInstance, cap: int = DEFAULT_CAP) -> list[ActionProfile]:
    phi = potential_table(g, cap)
    best = np.flatnonzero(phi == phi.max())
    return [tuple(int(x) for x in p) for p in _profiles(g.n_players, g.n_channels, 0, phi.size)[best]]


@dataclass
class NeReport:
    ne_profiles: list[ActionProfile]
    utilities: list[tuple[float, ...]]
    aggregate: list[float]
    potentials: list[int]
    bound: float
    aggregate_units: list[Fraction] = field(default_factory=list)
    bound_units: Fraction | None = None
    warning: str | None = None

    @property
    def ne_count(self) -> int:
        return len(self.ne_profiles)

    @property
    def min_aggregate(self) -> float:
        return min(self.aggregate) if self.aggregate else float("nan")

    def to_dict(self) -> dict:
        rows = [
            {"profile": list(p), "U": u, "phi": phi, "bound": self.bound, "utilities": list(ut)}
            for p, u, phi, ut in zip(self.ne_profiles, self.aggregate, self.potentials, self.utilities)
        ]
        return {
            "equilibria": rows,
            "summary": {"ne_count": self.ne_count, "min_U": self.min_aggregate, "bound": self.bound},
            "warning": self.warning,
        }


def enumerate_equilibria(g: GameInstance, cap: int = DEFAULT_CAP) -> NeReport:
    """Exact set of pure Nash equilibria by exhaustive search over ``M**N`` profiles."""
    n, m = g.n_players, g.n_channels
    total = m**n
    _check_cap(total, cap, "M^N")
    adj = g.graph.adjacency()
    found: list[np.ndarray] = []
    for start in range(0, total, _CHUNK):
        prof = _profiles(n, m, start, min(total, start + _CHUNK))
        found.append(prof[_ne_mask(g, prof, _neighbor_counts(adj, prof, m))])
    ne = np.concatenate(found) if found else np.empty((0, n), dtype=np.int64)
    profiles = [tuple(int(x) for x in p) for p in ne]
    equal = g.channels.equal_means
    return NeReport(
        ne_profiles=profiles,
        utilities=[tuple(utility(g, p, k) for k in range(n)) for p in profiles],
        aggregate=[aggregate_throughput(g, p) for p in profiles],
        potentials=[potential(g, p) for p in profiles],
        bound=throughput_lower_bound(g),
        aggregate_units=[throughput_units(g, p) for p in profiles] if equal else [],
        bound_units=bound_units(g) if equal else None,
        warning=g.channels.warning,
    )


def verify_ordinal_potential(g: GameInstance, cap: int = DEFAULT_CAP) -> tuple[bool, dict | None]:
    """Check sign(du) == sign(dPhi) for every profile and every unilateral deviation.

    The potential change is read from an exhaustive potential table, not from
    interference counts, so the check is independent of the closed form.
    """
    n, m = g.n_players, g.n_channels
    total = m**n
    _check_cap(total * n * m, cap, "M^N*N*M")
    phi = potential_table(g, cap)
    adj = g.graph.adjacency()
    weights = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    means = g.mean_rates
    equal = g.channels.equal_means
    for start in range(0, total, _CHUNK):
        prof = _profiles(n, m, start, min(total, start + _CHUNK))
        idx = np.arange(start, start + prof.shape[0], dtype=np.int64)
        counts = _neighbor_counts(adj, prof, m)
        own = np.take_along_axis(counts, prof[:, :, None], axis=2)
        # dev_idx[p, n, k]: profile number after player n switches to channel k
        dev_idx = idx[:, None, None] + (np.arange(m)[None, None, :] - prof[:, :, None]) * weights[None, :, None]
        d_phi = phi[dev_idx] - phi[idx][:, None, None]
        if equal:
            du_sign = np.sign(own - counts)
        else:
            du = means[None, None, :] / (1 + counts) - means[prof][:, :, None] / (1 + own)
            du_sign = np.where(np.abs(du) <= UTILITY_ATOL, 0, np.sign(du)).astype(np.int64)
        bad = du_sign != np.sign(d_phi)
        if bad.any():
            p, player, k = (int(v) for v in np.argwhere(bad)[0])
            return False, {
                "profile": tuple(int(x) for x in prof[p]),
                "player": player,
                "new_channel": k,
                "delta_u_sign": int(du_sign[p, player, k]),
                "delta_phi": int(d_phi[p, player, k]),
            }
    return True, None
