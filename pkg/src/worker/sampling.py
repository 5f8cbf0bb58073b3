"""
Seeded i.i.d. samplers for the measure families.

Generators are numpy `PCG64` bit generators seeded with a 64-bit integer, so
identical (measure, n, seed) triples give bit-identical clouds on every
platform numpy supports. Per-trial seeds come from `derive_seed`, a
SplitMix64-style mix of (master seed XOR n) followed by XOR with the trial
index; generator state is never shared between trials.
"""

from __future__ import annotations

import logging
from math import factorial
from typing import List, Tuple

import numpy as np

from app.errors import DegenerateInputError, InputError
from app.schemas.measure import (
    LocallyBoundedMixture,
    MeasureSpec,
    SimplicialComplexUniform,
    UniformBall,
    UniformCube,
    UniformSphere,
)

from .geometry import PointCloud

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
DEGENERATE_RTOL = 1e-12


def mix64(x: int) -> int:
    """SplitMix64 finalizer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, n: int, trial: int) -> int:
    _check_seed(master)
    return mix64(mix64((master ^ n) & MASK64) ^ (trial & MASK64))


def _check_seed(seed: int) -> None:
    if not 0 <= int(seed) <= MASK64:
        raise InputError(f"seed must be an unsigned 64-bit integer, got {seed}")


def make_rng(seed: int) -> np.random.Generator:
    _check_seed(seed)
    return np.random.Generator(np.random.PCG64(int(seed)))


def complex_volumes(spec: SimplicialComplexUniform) -> np.ndarray:
    """m-volume of every simplex via the Gram determinant sqrt(det(E E^T)) / m!."""
    vertices = np.asarray(spec.vertices, dtype=float)
    k = spec.intrinsic_dim
    volumes = np.empty(len(spec.simplices))
    for idx, simplex in enumerate(spec.simplices):
        edges = vertices[simplex[1:]] - vertices[simplex[0]]
        det = float(np.linalg.det(edges @ edges.T))
        scale = float(np.prod(np.linalg.norm(edges, axis=1)))
        if scale <= 0 or det <= (DEGENERATE_RTOL * scale) ** 2:
            raise DegenerateInputError(f"simplex {simplex} has zero {k}-volume")
        volumes[idx] = np.sqrt(det) / factorial(k)
    return volumes


def complex_volume_table(spec: SimplicialComplexUniform) -> List[float]:
    """Per-simplex selection weights, proportional to m-volume and summing to 1."""
    volumes = complex_volumes(spec)
    return (volumes / volumes.sum()).tolist()


def local_bound_constants(spec: LocallyBoundedMixture) -> Tuple[float, float]:
    """(a0, a1) with a0 vol(B) <= mu(B) <= a1 vol(B) for Borel B inside the box A."""
    volume = float(np.prod(np.subtract(spec.box_hi, spec.box_lo)))
    density = spec.p / volume
    return density, density


def _uniform_directions(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    g = rng.standard_normal((n, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms


def _sample_complex(spec: SimplicialComplexUniform, n: int, rng: np.random.Generator) -> np.ndarray:
    weights = np.asarray(complex_volume_table(spec))
    vertices = np.asarray(spec.vertices, dtype=float)
    simplices = np.asarray(spec.simplices, dtype=int)
    k = spec.intrinsic_dim

    chosen = rng.choice(len(weights), size=n, p=weights)
    # sorted-uniform spacings are uniform on the simplex
    cuts = np.sort(rng.random((n, k)), axis=1)
    bary = np.diff(np.concatenate([np.zeros((n, 1)), cuts, np.ones((n, 1))], axis=1), axis=1)
    corners = vertices[simplices[chosen]]
    return np.einsum("ij,ijk->ik", bary, corners)


def _sample_mixture(spec: LocallyBoundedMixture, n: int, rng: np.random.Generator) -> np.ndarray:
    lo = np.asarray(spec.box_lo, dtype=float)
    hi = np.asarray(spec.box_hi, dtype=float)
    atoms = np.asarray(spec.atoms, dtype=float)

    regular = rng.random(n) < spec.p
    box_points = lo + (hi - lo) * rng.random((n, len(lo)))
    picks = rng.integers(0, len(atoms), size=n)
    return np.where(regular[:, None], box_points, atoms[picks])


def sample(measure: MeasureSpec, n: int, seed: int) -> PointCloud:
    """n i.i.d. points from `measure`, reproducible from `seed`."""
    if n < 0:
        raise InputError(f"sample count must be >= 0, got {n}")
    rng = make_rng(seed)

    if isinstance(measure, UniformCube):
        points = rng.uniform(0.0, measure.side, size=(n, measure.m))
    elif isinstance(measure, UniformBall):
        directions = _uniform_directions(rng, n, measure.m)
        radii = measure.radius * rng.random(n) ** (1.0 / measure.m)
        points = directions * radii[:, None]
    elif isinstance(measure, UniformSphere):
        points = _uniform_directions(rng, n, measure.m + 1)
    elif isinstance(measure, SimplicialComplexUniform):
        points = _sample_complex(measure, n, rng)
    elif isinstance(measure, LocallyBoundedMixture):
        points = _sample_mixture(measure, n, rng)
    else:
        raise InputError(f"Unsupported measure: {type(measure).__name__}")

    return PointCloud(measure.space, points)
