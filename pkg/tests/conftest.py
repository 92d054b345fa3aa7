import numpy as np
import pytest

from waistlab.optimize import OptimizerConfig


@pytest.fixture(scope="session")
def opt_small():
    """Cheap optimizer config for anchors with known optima."""
    return OptimizerConfig(restarts=16, iters=60, seed=0)


@pytest.fixture(scope="session")
def opt_tight():
    """Higher-effort config for checks with tight tolerances."""
    return OptimizerConfig(restarts=40, iters=120, seed=0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260808)
