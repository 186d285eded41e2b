"""Shared fixtures for the besynth test suite."""

import matplotlib
import pytest

from besynth.ltlf import Partition

matplotlib.use("Agg")


@pytest.fixture
def xy() -> Partition:
    """One environment variable x and one agent variable y."""
    return Partition(("x",), ("y",))


@pytest.fixture
def abc() -> Partition:
    return Partition(("a", "b"), ("c",))
