import logging
from math import log
from typing import List

import numpy as np

from app.errors import InputError

from ..filtration import Filtration, Simplex
from ..geometry import DistanceMatrix

logger = logging.getLogger(__name__)


def auto_scale(n: int, m: int, diameter: float, factor: float) -> float:
    """factor * (log n / n)^(1/m) * diameter, the default truncation radius."""
    n = max(n, 2)
    return factor * (log(n) / n) ** (1.0 / m) * diameter


def build_rips(d: DistanceMatrix, max_dim: int, max_scale: float) -> Filtration:
    """Vietoris-Rips filtration in radius units: a simplex enters at half its longest edge.

    Only simplices whose edges are all <= 2 * max_scale are emitted.
    """
    if max_dim < 0:
        raise InputError("max_dim must be >= 0")
    if not max_scale > 0:
        raise InputError("max_scale must be > 0")

    n = d.n
    half = d.entries / 2.0
    neighbours: List[np.ndarray] = []
    for i in range(n):
        row = half[i, i + 1 :]
        neighbours.append(i + 1 + np.nonzero(row <= max_scale)[0])

    entries = [((i,), 0.0) for i in range(n)]
    if max_dim == 0:
        return Filtration.from_pairs(entries)

    neighbour_sets = [set(nb.tolist()) for nb in neighbours]

    def extend(simplex: Simplex, value: float, candidates: List[int]):
        entries.append((simplex, value))
        if len(simplex) > max_dim:
            return
        for pos, v in enumerate(candidates):
            new_value = max(value, max(half[u, v] for u in simplex))
            shared = [w for w in candidates[pos + 1 :] if w in neighbour_sets[v]]
            extend(simplex + (v,), float(new_value), shared)

    for i in range(n):
        row = neighbours[i].tolist()
        for pos, j in enumerate(row):
            shared = [w for w in row[pos + 1 :] if w in neighbour_sets[j]]
            extend((i, j), float(half[i, j]), shared)

    filtration = Filtration.from_pairs(entries)
    logger.debug("Rips: %d points, %d simplices, scale %.4g", n, len(filtration), max_scale)
    return filtration
