import numpy as np
import pytest

from glyphforge.raster import BinaryRaster


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bits_from_strings(rows):
    """'#' = ink, anything else background."""
    return BinaryRaster(np.array([[c == "#" for c in row] for row in rows], dtype=bool))
