"""
Incremental Bowyer-Watson Delaunay triangulation with ghost triangles.

Points are inserted in index order. The hull is closed off by ghost triangles
(u, v, GHOST), one per hull edge u -> v, with the exterior on the left of
u -> v. A real triangle conflicts with a new point p when p lies strictly
inside its circumcircle; a ghost conflicts when p is strictly left of its hull
edge or in the open hull edge. Because the in-circle test is strict, a point
cocircular with an existing triangle never breaks it, so on cocircular ties
the triangle formed by lower-index points is kept.

Exact duplicates are not inserted; `duplicates` maps each one to the first
point with the same coordinates.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.errors import DegenerateInputError, InputError

from ..geometry import PointCloud
from .predicates import incircle, orient2d, strictly_between

logger = logging.getLogger(__name__)

GHOST = -1
Triangle = Tuple[int, int, int]
Edge = Tuple[int, int]


def _normalize(a: int, b: int, c: int) -> Triangle:
    """Rotate so a ghost vertex, if present, comes last."""
    if a == GHOST:
        return b, c, a
    if b == GHOST:
        return c, a, b
    return a, b, c


class _Mesh:
    def __init__(self, points: List[Tuple[float, float]]):
        self.points = points
        self.triangles: Dict[int, Triangle] = {}
        self.edges: Dict[Edge, int] = {}
        self._next_id = 0
        self.last_real: Optional[int] = None

    def add(self, a: int, b: int, c: int) -> int:
        tri = _normalize(a, b, c)
        tid = self._next_id
        self._next_id += 1
        self.triangles[tid] = tri
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            self.edges[(u, v)] = tid
        if tri[2] != GHOST:
            self.last_real = tid
        return tid

    def remove(self, tid: int) -> None:
        a, b, c = self.triangles.pop(tid)
        for u, v in ((a, b), (b, c), (c, a)):
            if self.edges.get((u, v)) == tid:
                del self.edges[(u, v)]

    def conflicts(self, tid: int, p: int) -> bool:
        a, b, c = self.triangles[tid]
        P = self.points
        if c == GHOST:
            side = orient2d(P[a], P[b], P[p])
            return side > 0 or (side == 0 and strictly_between(P[a], P[b], P[p]))
        return incircle(P[a], P[b], P[c], P[p]) > 0

    def locate(self, p: int) -> int:
        """A triangle in conflict with p: the real triangle containing it, or a visible ghost."""
        P = self.points
        tid = self.last_real
        for _ in range(4 * len(self.triangles) + 16):
            a, b, c = self.triangles[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                if orient2d(P[u], P[v], P[p]) < 0:
                    tid = self.edges[(v, u)]
                    break
            else:
                return tid
            if self.triangles[tid][2] == GHOST:
                return tid
        logger.warning("Visibility walk did not terminate for point %d; scanning all triangles", p)
        for tid in self.triangles:
            if self.conflicts(tid, p):
                return tid
        raise DegenerateInputError(f"could not locate point {p} in the triangulation")

    def insert(self, p: int) -> None:
        start = self.locate(p)
        bad = {start}
        queue = deque([start])
        boundary: List[Edge] = []
        while queue:
            tid = queue.popleft()
            a, b, c = self.triangles[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                nid = self.edges[(v, u)]
                if nid in bad:
                    continue
                if self.conflicts(nid, p):
                    bad.add(nid)
                    queue.append(nid)
                else:
                    boundary.append((u, v))
        for tid in sorted(bad):
            self.remove(tid)
        for u, v in boundary:
            self.add(u, v, p)


@dataclass(frozen=True, eq=False)
class Triangulation2D:
    points: np.ndarray
    triangles: np.ndarray  # (k, 3), counterclockwise
    hull: Tuple[int, ...]
    duplicates: Dict[int, int] = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return int(self.points.shape[0]) - len(self.duplicates)

    @property
    def hull_size(self) -> int:
        return len(self.hull)

    def edges(self) -> List[Edge]:
        out = set()
        for a, b, c in self.triangles.tolist():
            for u, v in ((a, b), (b, c), (c, a)):
                out.add((min(u, v), max(u, v)))
        return sorted(out)

    def edge_opposites(self) -> Dict[Edge, List[int]]:
        """Each edge mapped to the opposite vertex of every incident triangle (one or two)."""
        out: Dict[Edge, List[int]] = {}
        for a, b, c in self.triangles.tolist():
            for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
                out.setdefault((min(u, v), max(u, v)), []).append(w)
        return out


def delaunay_2d(cloud: PointCloud) -> Triangulation2D:
    if cloud.space.kind != "euclidean" or cloud.space.ambient_dim != 2:
        raise InputError("delaunay_2d needs a cloud in R^2")
    coords = [(float(x), float(y)) for x, y in cloud.points]
    n = len(coords)

    first_seen: Dict[Tuple[float, float], int] = {}
    duplicates: Dict[int, int] = {}
    order: List[int] = []
    for idx, xy in enumerate(coords):
        if xy in first_seen:
            duplicates[idx] = first_seen[xy]
        else:
            first_seen[xy] = idx
            order.append(idx)
    if len(order) < 3:
        raise DegenerateInputError(f"Delaunay triangulation needs >= 3 distinct points, got {len(order)}")

    i0, i1 = order[0], order[1]
    i2 = next((k for k in order[2:] if orient2d(coords[i0], coords[i1], coords[k]) != 0), None)
    if i2 is None:
        raise DegenerateInputError("all points are collinear")
    if orient2d(coords[i0], coords[i1], coords[i2]) < 0:
        i1, i2 = i2, i1

    mesh = _Mesh(coords)
    mesh.add(i0, i1, i2)
    mesh.add(i1, i0, GHOST)
    mesh.add(i2, i1, GHOST)
    mesh.add(i0, i2, GHOST)
    seeded = {i0, i1, i2}
    for idx in order:
        if idx not in seeded:
            mesh.insert(idx)

    real = sorted(t for t in mesh.triangles.values() if t[2] != GHOST)
    hull = tuple(sorted({t[0] for t in mesh.triangles.values() if t[2] == GHOST}))
    logger.debug("Delaunay: %d points, %d triangles, hull %d", n, len(real), len(hull))
    return Triangulation2D(
        points=cloud.points,
        triangles=np.asarray(real, dtype=int).reshape(-1, 3),
        hull=hull,
        duplicates=duplicates,
    )


def count_delaunay_simplices(tri: Triangulation2D) -> Tuple[int, int, int]:
    """(vertices, edges, triangles); the sum is |DT|."""
    return tri.n_vertices, len(tri.edges()), int(tri.triangles.shape[0])
