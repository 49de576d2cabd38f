"""Shared fixtures."""
import logging
import math

import numpy as np
import pytest

from dualvol.core.sphere import Arc, make_grid
from dualvol.core.starset import cone
from dualvol.utils.logging import ROOT_LOGGER


@pytest.fixture(autouse=True)
def reset_dmv_logger():
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def circle_grid():
    return make_grid(2, m=8)


@pytest.fixture
def sphere_grid():
    return make_grid(3, bands=2, sectors=4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def half_cones():
    """``2·st[0, π)`` and ``3·st[π/2, 3π/2)`` in the plane; their dual mixed volume is ``3π/2``."""
    return [cone(2.0, Arc(0.0, math.pi)), cone(3.0, Arc(math.pi / 2, 3 * math.pi / 2))]
