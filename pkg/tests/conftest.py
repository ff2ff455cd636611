import numpy as np
import pytest

from spectrum_game.channel import ChannelModel, preset_hiperlan2
from spectrum_game.game import GameInstance
from spectrum_game.topology import load_graph

# dot product of the published HIPERLAN/2 vector, renormalized from its raw sum 1.0001
SBAR = float(np.dot([0, 1, 2, 3, 6], [0.2791, 0.2117, 0.2514, 0.2566, 0.0013]) / 1.0001)


def ring(n):
    return load_graph([(i, (i + 1) % n) for i in range(n)], n)


def star(leaves):
    return load_graph([(0, i) for i in range(1, leaves + 1)], leaves + 1)


def make_game(graph, m=3, channels=None):
    return GameInstance(graph, channels if channels is not None else preset_hiperlan2(m))


def unequal_channels(means=(3.0, 1.0)):
    # two-point rate set {0, 6}; P(6) = mean / 6
    rows = [[1 - mu / 6, mu / 6] for mu in means]
    return ChannelModel(np.array([0.0, 6.0]), np.array(rows), allow_unequal_means=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
