import numpy as np
import pytest

from e2vts.imgcore import Frame
from e2vts.synth import textured_gray


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def texture():
    return textured_gray(96, 128, seed=7)


def make_rgb_frame(pixels, index=0):
    return Frame(index=index, pixels=np.asarray(pixels, dtype=np.uint8))


def separable_points(n, seed, margin=0.5):
    """2-D linearly separable points with the given margin around a fixed
    separating direction."""
    gen = np.random.default_rng(seed)
    normal = np.array([1.0, -0.7])
    normal /= np.linalg.norm(normal)
    pts, labels = [], []
    while len(pts) < n:
        p = gen.uniform(-3, 3, 2)
        d = p @ normal
        if abs(d) >= margin / 2:
            pts.append(p)
            labels.append(1 if d > 0 else -1)
    return np.array(pts), np.array(labels)
