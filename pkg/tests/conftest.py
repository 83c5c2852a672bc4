"""Shared fixtures: the default grid and the branch traces reused across files.

Branch traces are session-scoped because they are the most expensive objects
in the suite and several files assert different properties of the same curve.
"""

import numpy as np
import pytest

from fucik_branch.config import SolverConfig
from fucik_branch.continuation import BranchSeed, trace_branch
from fucik_branch.grid import Field, Grid


@pytest.fixture(scope="session")
def grid() -> Grid:
    return Grid()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


def random_field(grid: Grid, rng: np.random.Generator, scale: float = 1.0) -> Field:
    return Field(grid, scale * rng.standard_normal(grid.n_interior))


@pytest.fixture(scope="session")
def branch_p3_w1():
    return trace_branch(BranchSeed(k=2, which=1, gamma=0.5, p=3.0))


@pytest.fixture(scope="session")
def branch_p3_w2():
    return trace_branch(BranchSeed(k=2, which=2, gamma=0.5, p=3.0))


@pytest.fixture(scope="session")
def branch_p15():
    return trace_branch(BranchSeed(k=2, which=1, gamma=0.5, p=1.5))


@pytest.fixture(scope="session")
def quiet_config() -> SolverConfig:
    return SolverConfig()
