"""Test fixtures."""
import os
from datetime import timedelta
from math import sqrt

import numpy as np
import pytest
from hypothesis import Verbosity, settings

from app.schemas.geometry import MetricSpaceSpec
from worker.geometry import PointCloud

# register test flags for hypothesis; allows e.g. extended deadlines on CI
settings.register_profile("ci", deadline=timedelta(milliseconds=2000), max_examples=50)
settings.register_profile("dev", max_examples=10, deadline=None)
settings.register_profile("debug", max_examples=10, verbosity=Verbosity.verbose, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))

PLANE = MetricSpaceSpec.euclidean(2)


def plane_cloud(rows) -> PointCloud:
    return PointCloud.from_rows(rows, PLANE)


@pytest.fixture
def unit_square():
    """Corners of the unit square, counterclockwise from the origin."""
    return plane_cloud([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])


@pytest.fixture
def equilateral():
    """Unit equilateral triangle."""
    return plane_cloud([(0.0, 0.0), (1.0, 0.0), (0.5, sqrt(3.0) / 2.0)])


@pytest.fixture
def random_plane():
    """Seeded uniform clouds in the unit square."""

    def make(n: int, seed: int = 0) -> PointCloud:
        rng = np.random.default_rng(seed)
        return PointCloud(PLANE, rng.random((n, 2)))

    return make
