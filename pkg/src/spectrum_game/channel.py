"""Finite-rate time-varying channels.

Every channel draws its per-slot rate independently from a categorical
distribution over one shared, ascending rate set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

HIPERLAN2_RATES = (0.0, 1.0, 2.0, 3.0, 6.0)
# average SNR 6 dB, packet error rate 1e-3; published vector sums to 1.0001
HIPERLAN2_PROBS_6DB = (0.2791, 0.2117, 0.2514, 0.2566, 0.0013)

SUM_TOLERANCE = 2e-3
MEAN_RTOL = 1e-9

UNEQUAL_MEANS_WARNING = (
    "channels have unequal expected rates; the ordinal-potential and "
    "equilibrium-existence guarantees no longer apply"
)

# per-channel realized rates for one slot, shape (M,)
ChannelStateSlot = np.ndarray


@dataclass(frozen=True, eq=False)
class ChannelModel:
    rates: np.ndarray
    probabilities: np.ndarray
    label: str = ""
    allow_unequal_means: bool = False
    raw_probabilities: np.ndarray = field(init=False, repr=False)
    cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        probs = np.atleast_2d(np.asarray(self.probabilities, dtype=float))
        if rates.ndim != 1 or rates.size < 1:
            raise ValueError("rates must be a non-empty 1-D sequence")
        if np.any(rates < 0) or np.any(np.diff(rates) <= 0):
            raise ValueError(f"rates must be non-negative and strictly increasing, got {rates}")
        if probs.shape[1] != rates.size or probs.shape[0] < 1:
            raise ValueError(f"probabilities shape {probs.shape} does not match {rates.size} rates")
        if np.any(probs < 0):
            raise ValueError("probabilities must be non-negative")
        sums = probs.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > SUM_TOLERANCE):
            raise ValueError(f"probability rows must sum to 1 within {SUM_TOLERANCE}, got {sums}")
        normed = probs / sums[:, None]
        means = normed @ rates
        if not self.allow_unequal_means and not np.allclose(means, means[0], rtol=MEAN_RTOL, atol=0):
            raise ValueError(f"channel expected rates differ ({means}); set allow_unequal_means to override")
        rates.setflags(write=False)
        normed.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "probabilities", normed)
        object.__setattr__(self, "raw_probabilities", probs)
        cum = np.cumsum(normed, axis=1)
        cum[:, -1] = 1.0
        cum.setflags(write=False)
        object.__setattr__(self, "cumulative", cum)

    @classmethod
    def from_template(cls, rates: Sequence[float], probabilities: Sequence[float], n_channels: int,
                      label: str = "") -> "ChannelModel":
        if n_channels < 1:
            raise ValueError(f"n_channels must be >= 1, got {n_channels}")
        row = np.asarray(probabilities, dtype=float)
        return cls(np.asarray(rates, dtype=float), np.tile(row, (n_channels, 1)), label)

    @property
    def n_channels(self) -> int:
        return self.probabilities.shape[0]

    @property
    def max_rate(self) -> float:
        return float(self.rates[-1])

    @property
    def mean_rates(self) -> np.ndarray:
        return self.probabilities @ self.rates

    @property
    def equal_means(self) -> bool:
        m = self.mean_rates
        return bool(np.allclose(m, m[0], rtol=MEAN_RTOL, atol=0))

    @property
    def warning(self) -> str | None:
        return None if self.equal_means else UNEQUAL_MEANS_WARNING

    def with_channels(self, n_channels: int) -> "ChannelModel":
        """Same template replicated over ``n_channels`` channels (first row is the template)."""
        return ChannelModel(self.rates, np.tile(self.raw_probabilities[0], (n_channels, 1)),
                            self.label, self.allow_unequal_means)

    def to_dict(self) -> dict:
        return {
            "rates": self.rates.tolist(),
            "probabilities": self.raw_probabilities.tolist(),
            "allow_unequal_means": self.allow_unequal_means,
            "label": self.label,
        }


def expected_rate(cm: ChannelModel, m: int) -> float:
    if not 0 <= m < cm.n_channels:
        raise IndexError(f"channel {m} out of range for M={cm.n_channels}")
    return float(cm.probabilities[m] @ cm.rates)


def rate_indices(cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF rate index per channel for uniforms ``u`` of shape (M,)."""
    idx = (u[:, None] >= cumulative).sum(axis=1)
    return np.minimum(idx, cumulative.shape[1] - 1)


def sample_slot(cm: ChannelModel, rng: np.random.Generator) -> ChannelStateSlot:
    """Draw one slot of realized rates; consumes exactly M uniforms from ``rng``."""
    u = rng.random(cm.n_channels)
    return cm.rates[rate_indices(cm.cumulative, u)]


def sample_slots(cm: ChannelModel, rng: np.random.Generator, n_slots: int) -> np.ndarray:
    """``n_slots`` consecutive slots, shape (n_slots, M); same stream as repeated :func:`sample_slot`."""
    u = rng.random((n_slots, cm.n_channels))
    idx = (u[:, :, None] >= cm.cumulative[None, :, :]).sum(axis=2)
    return cm.rates[np.minimum(idx, cm.rates.size - 1)]


def preset_hiperlan2(n_channels: int = 3) -> ChannelModel:
    return ChannelModel.from_template(HIPERLAN2_RATES, HIPERLAN2_PROBS_6DB, n_channels,
                                      label="hiperlan2,gamma=6dB,pe=1e-3")


PRESETS = {"hiperlan2": preset_hiperlan2}


def channels_from_dict(d: dict, n_channels: int | None = None) -> ChannelModel:
    """Channel config: ``preset`` or ``rates`` + ``probabilities`` (template or per-channel rows)."""
    m = d.get("n_channels")
    m = n_channels if m is None else m
    if "preset" in d:
        name = d["preset"]
        if name not in PRESETS:
            raise ValueError(f"unknown channel preset {name!r}; known: {sorted(PRESETS)}")
        return PRESETS[name](int(m) if m is not None else 3)
    if "rates" not in d or "probabilities" not in d:
        raise ValueError("channel config needs 'preset' or both 'rates' and 'probabilities'")
    probs = np.asarray(d["probabilities"], dtype=float)
    if probs.ndim == 1:
        if m is None:
            raise ValueError("a single probability template needs 'n_channels'")
        probs = np.tile(probs, (int(m), 1))
    elif m is not None and probs.shape[0] != int(m):
        raise ValueError(f"n_channels={m} but {probs.shape[0]} probability rows given")
    return ChannelModel(np.asarray(d["rates"], dtype=float), probs, str(d.get("label", "")),
                        bool(d.get("allow_unequal_means", False)))


def load_channels(path: str | Path, n_channels: int | None = None) -> ChannelModel:
    return channels_from_dict(json.loads(Path(path).read_text()), n_channels)
