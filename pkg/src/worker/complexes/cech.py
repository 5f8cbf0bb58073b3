"""
Exhaustive Čech filtration for small clouds.

Every subset of at most max_dim + 1 points enters at the radius of its
minimal enclosing ball. Only meant as a reference for the faster builders.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from app.config import settings
from app.errors import InputError, SizeLimitError

from ..filtration import Filtration, entry_value, facets, subsets_up_to
from ..geometry import PointCloud

logger = logging.getLogger(__name__)

BALL_TOL = 1e-12


def circumsphere(points: np.ndarray) -> Tuple[np.ndarray, float]:
    """Centre and radius of the smallest sphere through all `points`, taken in their affine hull."""
    base = points[0]
    if len(points) == 1:
        return base.copy(), 0.0
    spans = points[1:] - base
    gram = spans @ spans.T
    rhs = 0.5 * np.einsum("ij,ij->i", spans, spans)
    coeffs = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    centre = base + coeffs @ spans
    radius = float(np.linalg.norm(points - centre, axis=1).max())
    return centre, radius


def _contains(ball: Tuple[np.ndarray, float], point: np.ndarray) -> bool:
    centre, radius = ball
    return float(np.linalg.norm(point - centre)) <= radius + BALL_TOL * max(1.0, radius)


def _welzl(points: np.ndarray, inside: List[int], support: List[int]) -> Tuple[np.ndarray, float]:
    if not inside or len(support) == points.shape[1] + 1:
        if not support:
            return np.zeros(points.shape[1]), 0.0
        return circumsphere(points[support])
    last, rest = inside[-1], inside[:-1]
    ball = _welzl(points, rest, support)
    if _contains(ball, points[last]):
        return ball
    return _welzl(points, rest, support + [last])


def miniball(points: Sequence[Sequence[float]]) -> Tuple[np.ndarray, float]:
    """Minimal enclosing ball (centre, radius) by Welzl's recursion."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise InputError("miniball needs a nonempty (k, d) point array")
    return _welzl(pts, list(range(len(pts))), [])


def build_cech_oracle(cloud: PointCloud, max_dim: int) -> Filtration:
    if cloud.space.kind != "euclidean":
        raise InputError("the Čech oracle works on Euclidean clouds only")
    if max_dim < 0:
        raise InputError("max_dim must be >= 0")
    n = cloud.n
    if n > settings.cech_oracle_max_points:
        raise SizeLimitError(
            f"Čech oracle enumerates all subsets; n={n} exceeds the guard of {settings.cech_oracle_max_points}"
        )

    pts = cloud.points
    half = squareform(pdist(pts)) / 2.0 if n > 1 else np.zeros((n, n))
    values = {}
    for simplex in subsets_up_to(n, max_dim):
        if len(simplex) == 1:
            values[simplex] = 0.0
        elif len(simplex) == 2:
            values[simplex] = float(half[simplex[0], simplex[1]])
        else:
            radius = miniball(pts[list(simplex)])[1]
            values[simplex] = entry_value(radius, max(values[f] for f in facets(simplex)))
    logger.debug("Čech oracle: %d points, %d simplices up to dim %d", n, len(values), max_dim)
    return Filtration.from_pairs(values.items())
