import numpy as np
import pytest

from pyrtone.image import ColorSpace, Image


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_image(rng, h, w, c=3, space=ColorSpace.LINEAR_RGB):
    return Image(rng.random((h, w, c)), space)


def smooth_image(rng, h, w, c=1, passes=4):
    """Low-frequency random image: repeated box blur of noise, rescaled to [0,1]."""
    data = rng.random((h, w, c))
    for _ in range(passes):
        data = (
            data
            + np.roll(data, 1, axis=0)
            + np.roll(data, -1, axis=0)
            + np.roll(data, 1, axis=1)
            + np.roll(data, -1, axis=1)
        ) / 5.0
    lo, hi = data.min(), data.max()
    return Image((data - lo) / (hi - lo))
