import numpy as np
import pytest

from matdist.jets import Jet, random_jet


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def composable_pair(rng, n):
    f = random_jet(rng, n)
    g = random_jet(rng, n, x=f.y)
    return g, f


def realize(g):
    """The jet as an explicit bundle map: base map and frame field of x'."""
    def base(xp):
        return g.y + g.yB @ (xp - g.x)

    def frame(xp):
        return g.yA + np.einsum("jik,k->ji", g.yC, xp - g.x)

    return base, frame


def read_jet(base, frame, x, h=1e-3):
    """Jet coordinates of a bundle map at x by central differences."""
    n = len(x)
    yB = np.empty((n, n))
    yC = np.empty((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        yB[:, k] = (base(x + e) - base(x - e)) / (2 * h)
        yC[:, :, k] = (frame(x + e) - frame(x - e)) / (2 * h)
    return Jet(x, base(x), frame(x), yB, yC)
