import os
import sys

import numpy as np
import pytest

# Modules live at the repository root
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from function_models import FunctionModel, catalog, make_random_3convex  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def x3() -> FunctionModel:
    return catalog("x3")


@pytest.fixture
def sqrt_model() -> FunctionModel:
    return catalog("sqrt")


@pytest.fixture
def random_models():
    """Seeded random 3-convex building-block models on [0, 1]."""
    def build(count: int, max_knots: int = 4):
        return [make_random_3convex(seed, 1 + seed % max_knots) for seed in range(count)]
    return build
