"""
Reduced persistent homology over Z/2.

Degree 0 runs through union-find (elder rule); higher degrees use the standard
column reduction, processed from the top dimension down so that every column
paired as a pivot is cleared before it would be reduced. All values are radii.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from math import inf
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, TextIO, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from app.errors import InputError

from .filtration import Filtration, facets
from .geometry import DistanceMatrix, PointCloud

logger = logging.getLogger(__name__)

# below this size the complete graph is cheaper than a Qhull call
COMPLETE_GRAPH_MAX_POINTS = 64


class Interval(NamedTuple):
    birth: float
    death: float

    @property
    def length(self) -> float:
        return self.death - self.birth


def _as_intervals(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float).reshape(-1, 2)
    if len(arr):
        arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
    return arr


@dataclass(frozen=True, eq=False)
class Barcode:
    """Finite intervals per degree as (k, 2) arrays of (birth, death), sorted.

    Essential classes in degree >= 1 are kept apart as arrays of births; the
    single everlasting degree-0 class is removed (reduced homology) and the
    number of final components is recorded instead.
    """

    intervals: Dict[int, np.ndarray]
    max_dim: int = 0
    essential: Dict[int, np.ndarray] = field(default_factory=dict)
    n_components: int = 1

    @classmethod
    def from_intervals(
        cls,
        intervals: Dict[int, List[Tuple[float, float]]],
        essential: Optional[Dict[int, List[float]]] = None,
        n_components: int = 1,
    ) -> "Barcode":
        """Build without validation; see `violations`."""
        max_dim = max(list(intervals) + list(essential or {}) + [0])
        return cls(
            intervals={i: _as_intervals(rows) for i, rows in intervals.items()},
            max_dim=max_dim,
            essential={i: np.sort(np.asarray(b, dtype=float)) for i, b in (essential or {}).items()},
            n_components=n_components,
        )

    def degree(self, i: int) -> np.ndarray:
        if i < 0:
            raise InputError(f"homology degree must be >= 0, got {i}")
        return self.intervals.get(i, np.zeros((0, 2)))

    def lengths(self, i: int) -> np.ndarray:
        arr = self.degree(i)
        return arr[:, 1] - arr[:, 0]

    def count(self, i: int) -> int:
        return int(self.degree(i).shape[0])

    def essential_count(self, i: Optional[int] = None) -> int:
        if i is None:
            return sum(len(b) for b in self.essential.values())
        return len(self.essential.get(i, ()))

    def intervals_of(self, i: int) -> List[Interval]:
        return [Interval(float(b), float(d)) for b, d in self.degree(i)]

    def max_death(self) -> float:
        deaths = [arr[:, 1].max() for arr in self.intervals.values() if len(arr)]
        return float(max(deaths)) if deaths else 0.0

    def scaled(self, factor: float) -> "Barcode":
        if not factor > 0:
            raise InputError("scale factor must be positive")
        return Barcode(
            intervals={i: arr * factor for i, arr in self.intervals.items()},
            max_dim=self.max_dim,
            essential={i: b * factor for i, b in self.essential.items()},
            n_components=self.n_components,
        )

    def violations(self) -> List[str]:
        """Descriptions of intervals breaking 0 <= b < d < inf; empty when the barcode is sound."""
        problems = []
        for i in sorted(self.intervals):
            for b, d in self.intervals[i]:
                if not (np.isfinite(b) and np.isfinite(d)):
                    problems.append(f"degree {i}: non-finite interval ({b}, {d})")
                elif b < 0:
                    problems.append(f"degree {i}: negative birth ({b}, {d})")
                elif not b < d:
                    problems.append(f"degree {i}: birth not before death ({b}, {d})")
        return problems

    def rows(self) -> List[Tuple[int, float, float]]:
        out = [(i, float(b), float(d)) for i, arr in self.intervals.items() for b, d in arr]
        out += [(i, float(b), inf) for i, births in self.essential.items() if i >= 1 for b in births]
        return sorted(out)

    def write_csv(self, target: Union[str, Path, TextIO]) -> None:
        """`degree,birth,death` rows; essential classes have death `inf`."""
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="") as fh:
                self.write_csv(fh)
            return
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["degree", "birth", "death"])
        for i, b, d in self.rows():
            writer.writerow([i, repr(b), "inf" if d == inf else repr(d)])

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    @classmethod
    def read_csv(cls, source: Union[str, Path, TextIO]) -> "Barcode":
        """Inverse of `write_csv`; rows with death `inf` become essential classes."""
        if isinstance(source, (str, Path)):
            try:
                with open(source, newline="") as fh:
                    return cls.read_csv(fh)
            except OSError as e:
                raise InputError(f"Cannot read barcode {source}: {e}")
        intervals: Dict[int, List[Tuple[float, float]]] = {}
        essential: Dict[int, List[float]] = {}
        for lineno, rec in enumerate(csv.DictReader(source), start=2):
            try:
                i, b, d = int(rec["degree"]), float(rec["birth"]), float(rec["death"])
            except (KeyError, TypeError, ValueError):
                raise InputError(f"line {lineno}: expected degree,birth,death, got {rec}")
            if d == inf:
                essential.setdefault(i, []).append(b)
            else:
                intervals.setdefault(i, []).append((b, d))
        return cls.from_intervals(intervals, essential)


@dataclass(frozen=True, eq=False)
class MstResult:
    n: int
    pairs: np.ndarray  # (n - 1, 2), i < j
    lengths: np.ndarray

    @property
    def edges(self) -> List[Tuple[int, int, float]]:
        return [(int(i), int(j), float(w)) for (i, j), w in zip(self.pairs, self.lengths)]

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        return True


def _kruskal(n: int, i: np.ndarray, j: np.ndarray, w: np.ndarray) -> MstResult:
    order = np.lexsort((j, i, w))
    uf = UnionFind(n)
    chosen = []
    for k in order.tolist():
        if uf.union(int(i[k]), int(j[k])):
            chosen.append(k)
            if len(chosen) == n - 1:
                break
    if len(chosen) != max(n - 1, 0):
        raise InputError("candidate edge set does not span the cloud")
    chosen = np.asarray(chosen, dtype=int)
    return MstResult(n=n, pairs=np.stack([i[chosen], j[chosen]], axis=1).reshape(-1, 2), lengths=w[chosen])


def mst(d: DistanceMatrix) -> MstResult:
    """Kruskal on the complete graph, ties broken by (length, i, j)."""
    n = d.n
    if n < 1:
        raise InputError("MST needs at least one point")
    i, j = np.triu_indices(n, k=1)
    return _kruskal(n, i, j, d.entries[i, j])


def _candidate_edges(cloud: PointCloud) -> Optional[np.ndarray]:
    """Edges of the Delaunay complex (a superset of every MST), or None when Qhull cannot help."""
    pts = cloud.points
    dim = pts.shape[1]
    if dim == 1:
        order = np.argsort(pts[:, 0], kind="stable")
        return np.stack([order[:-1], order[1:]], axis=1)
    try:
        if cloud.space.kind == "sphere":
            simplices = ConvexHull(pts).simplices
        else:
            simplices = Delaunay(pts).simplices
    except QhullError as e:
        logger.warning(f"Qhull failed ({e.__class__.__name__}); using the complete graph")
        return None

    k = simplices.shape[1]
    pairs = np.concatenate([simplices[:, [a, b]] for a in range(k) for b in range(a + 1, k)])
    pairs.sort(axis=1)
    covered = np.zeros(cloud.n, dtype=bool)
    covered[pairs.ravel()] = True
    # Qhull leaves out coincident and coplanar points: a copy of a covered point
    # joins it at length 0, anything else is attached to every point
    missing = np.nonzero(~covered)[0]
    if len(missing):
        seen = {tuple(pts[k]): k for k in np.nonzero(covered)[0].tolist()}
        others = np.arange(cloud.n)
        extra = []
        for m in missing.tolist():
            twin = seen.get(tuple(pts[m]))
            if twin is not None:
                extra.append(np.asarray([[m, twin]]))
            else:
                extra.append(np.stack([np.full(cloud.n, m), others], axis=1))
        extra = np.concatenate(extra)
        extra = extra[extra[:, 0] != extra[:, 1]]
        extra.sort(axis=1)
        pairs = np.concatenate([pairs, extra])
    return np.unique(pairs, axis=0)


def _edge_lengths(cloud: PointCloud, pairs: np.ndarray) -> np.ndarray:
    a, b = cloud.points[pairs[:, 0]], cloud.points[pairs[:, 1]]
    if cloud.space.kind == "sphere":
        return np.arccos(np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0))
    return np.linalg.norm(a - b, axis=1)


def mst_from_cloud(cloud: PointCloud) -> MstResult:
    """Exact MST without the n x n matrix: Kruskal restricted to Delaunay (or hull) edges."""
    n = cloud.n
    if n < 1:
        raise InputError("MST needs at least one point")
    pairs = None
    if n > COMPLETE_GRAPH_MAX_POINTS:
        pairs = _candidate_edges(cloud)
    if pairs is None:
        i, j = np.triu_indices(n, k=1)
        pairs = np.stack([i, j], axis=1)
    return _kruskal(n, pairs[:, 0], pairs[:, 1], _edge_lengths(cloud, pairs))


def ph0_from_mst(tree: MstResult) -> Barcode:
    deaths = tree.lengths / 2.0
    deaths = deaths[deaths > 0]
    rows = np.stack([np.zeros_like(deaths), deaths], axis=1)
    return Barcode(intervals={0: _as_intervals(rows)}, max_dim=0, n_components=1 if tree.n else 0)


def ph0_reduced(d: DistanceMatrix) -> Barcode:
    """Degree-0 barcode {(0, |e| / 2) : e in MST}."""
    return ph0_from_mst(mst(d))


@dataclass(frozen=True)
class PersistencePairs:
    """Index pairs (birth simplex, death simplex) into the filtration, plus unpaired simplices."""

    pairs: List[Tuple[int, int]]
    essential: List[int]


def reduce_pairs(f: Filtration) -> PersistencePairs:
    index = {s: k for k, s in enumerate(f.simplices)}
    by_dim: Dict[int, List[int]] = {}
    for k, s in enumerate(f.simplices):
        by_dim.setdefault(len(s) - 1, []).append(k)

    pairs: List[Tuple[int, int]] = []
    essential: List[int] = []
    cleared = set()
    top = f.max_dim

    for dim in range(top, 1, -1):
        pivots: Dict[int, set] = {}
        for k in by_dim.get(dim, []):
            if k in cleared:
                continue
            column = {index[face] for face in facets(f.simplices[k])}
            while column:
                low = max(column)
                other = pivots.get(low)
                if other is None:
                    break
                column ^= other
            if column:
                low = max(column)
                pivots[low] = column
                pairs.append((low, k))
                cleared.add(low)
            elif dim < top:
                essential.append(k)

    vertex_index = {s[0]: k for k, s in enumerate(f.simplices) if len(s) == 1}
    uf = UnionFind(len(f.simplices))
    for k in by_dim.get(1, []):
        if k in cleared:
            continue
        u, v = f.simplices[k]
        ru, rv = uf.find(vertex_index[u]), uf.find(vertex_index[v])
        if ru == rv:
            if top > 1:
                essential.append(k)
            continue
        # the representative of a component is its oldest vertex; the younger one dies
        elder, younger = (ru, rv) if ru < rv else (rv, ru)
        pairs.append((younger, k))
        uf.parent[younger] = elder
    essential.extend(k for k in vertex_index.values() if uf.find(k) == k)

    pairs.sort(key=lambda p: p[1])
    essential.sort()
    return PersistencePairs(pairs=pairs, essential=essential)


def reduce(f: Filtration) -> Barcode:
    """Barcode of a face-monotone filtration; zero-length pairs are dropped."""
    f.check_monotone()
    result = reduce_pairs(f)
    values = f.values
    dims = [len(s) - 1 for s in f.simplices]

    rows: Dict[int, List[Tuple[float, float]]] = {}
    for b, d in result.pairs:
        if values[d] > values[b]:
            rows.setdefault(dims[b], []).append((values[b], values[d]))
    max_degree = max(f.max_dim - 1, 0)
    for i in range(max_degree + 1):
        rows.setdefault(i, [])

    essential: Dict[int, List[float]] = {}
    n_components = 0
    for k in result.essential:
        if dims[k] == 0:
            n_components += 1
        else:
            essential.setdefault(dims[k], []).append(values[k])
    if essential:
        logger.debug("Essential classes beyond degree 0: %s", {i: len(b) for i, b in essential.items()})

    return Barcode(
        intervals={i: _as_intervals(r) for i, r in rows.items()},
        max_dim=max_degree,
        essential={i: np.sort(np.asarray(b, dtype=float)) for i, b in essential.items()},
        n_components=n_components,
    )


def count_spanning(bc: Barcode, i: int, b: float, d: float) -> int:
    """N(b, d): degree-i intervals born before b and dying after d."""
    if not b < d:
        raise InputError(f"count_spanning needs b < d, got b={b}, d={d}")
    arr = bc.degree(i)
    return int(np.count_nonzero((arr[:, 0] < b) & (arr[:, 1] > d)))


def count_longer(bc: Barcode, i: int, delta: float) -> int:
    if not delta > 0:
        raise InputError(f"count_longer needs delta > 0, got {delta}")
    return int(np.count_nonzero(bc.lengths(i) > delta))
