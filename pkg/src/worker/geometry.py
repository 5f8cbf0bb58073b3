"""
Point clouds, distance matrices and bi-Lipschitz maps.

All coordinates are dimensionless lengths. Sphere clouds live on the unit
m-sphere in R^(m+1) and are measured with the intrinsic (geodesic) metric.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Tuple, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import special_ortho_group

from app.errors import InputError
from app.schemas.geometry import BiLipschitzMapSpec, MetricSpaceSpec

logger = logging.getLogger(__name__)

SPHERE_NORM_TOL = 1e-12


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered sample points; the row index identifies the sample."""

    space: MetricSpaceSpec
    points: np.ndarray

    def __post_init__(self):
        dim = self.space.ambient_dim
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, dim)
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise InputError(f"expected points of shape (n, {dim}), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError("point coordinates must be finite")
        if self.space.kind == "sphere" and len(pts):
            err = np.abs(np.linalg.norm(pts, axis=1) - 1.0).max()
            if err > SPHERE_NORM_TOL:
                raise InputError(f"sphere points must have unit norm (max deviation {err:.3e})")
        object.__setattr__(self, "points", _readonly(pts))

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]], space: MetricSpaceSpec) -> "PointCloud":
        rows = [list(r) for r in rows]
        lengths = {len(r) for r in rows}
        if len(lengths) > 1:
            raise InputError(f"dimension mismatch among points: lengths {sorted(lengths)}")
        return cls(space, np.asarray(rows, dtype=float))

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.n

    def with_points(self, points: np.ndarray) -> "PointCloud":
        return PointCloud(self.space, points)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric n x n matrix of pairwise distances with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.entries, dtype=float)
        if d.size == 0:
            d = d.reshape(0, 0)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InputError(f"distance matrix must be square, got {d.shape}")
        object.__setattr__(self, "entries", _readonly(d))

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    def condensed(self) -> np.ndarray:
        """Upper-triangle entries in row-major (i < j) order."""
        if self.n < 2:
            return np.zeros(0)
        return squareform(self.entries, checks=False)

    def diameter(self) -> float:
        return float(self.entries.max()) if self.n else 0.0


def pairwise_distances(cloud: PointCloud) -> DistanceMatrix:
    """Euclidean distances, or geodesic arccos(<x, y>) distances on the sphere."""
    pts = cloud.points
    n = cloud.n
    if n < 2:
        return DistanceMatrix(np.zeros((n, n)))
    if cloud.space.kind == "euclidean":
        return DistanceMatrix(squareform(pdist(pts, metric="euclidean")))

    iu = np.triu_indices(n, k=1)
    dots = np.einsum("ij,ij->i", pts[iu[0]], pts[iu[1]])
    geodesic = np.arccos(np.clip(dots, -1.0, 1.0))
    d = np.zeros((n, n))
    d[iu] = geodesic
    d[(iu[1], iu[0])] = geodesic
    return DistanceMatrix(d)


def _piecewise_linear(t: np.ndarray, knots: Sequence[float], slopes: Sequence[float]) -> np.ndarray:
    """t -> integral_0^t s(u) du for the step function s with the given knots and slopes."""
    edges = np.concatenate(([-np.inf], np.asarray(knots, dtype=float), [np.inf]))
    out = np.zeros_like(t)
    for slope, lo, hi in zip(slopes, edges[:-1], edges[1:]):
        out += slope * (np.clip(t, lo, hi) - np.clip(0.0, lo, hi))
    return out


def apply_bilipschitz(spec: BiLipschitzMapSpec, cloud: PointCloud) -> PointCloud:
    """Image of a Euclidean cloud under the map; point count and order are preserved."""
    if cloud.space.kind != "euclidean":
        raise InputError(f"bi-Lipschitz map {spec.kind!r} is not applicable to {cloud.space.kind} clouds")
    if spec.dim is not None and spec.dim != cloud.space.ambient_dim:
        raise InputError(f"map dimension {spec.dim} != cloud dimension {cloud.space.ambient_dim}")

    pts = cloud.points
    if spec.kind == "identity":
        return cloud
    if spec.kind == "uniform_scale":
        return cloud.with_points(pts * spec.scale)
    if spec.kind == "linear":
        return cloud.with_points(pts @ np.asarray(spec.matrix, dtype=float).T)

    image = np.empty_like(pts)
    for axis, (knots, slopes) in enumerate(zip(spec.knots, spec.slopes)):
        image[:, axis] = _piecewise_linear(pts[:, axis], knots, slopes)
    return cloud.with_points(image)


def random_coordinatewise_map(dim: int, lipschitz: float, seed: int, n_knots: int = 4) -> BiLipschitzMapSpec:
    """Random monotone piecewise-linear map with every slope in [1/L, L]."""
    if lipschitz < 1:
        raise InputError("Lipschitz constant must be >= 1")
    rng = np.random.default_rng(seed)
    log_l = np.log(lipschitz)
    knots = [sorted(rng.uniform(0.0, 1.0, size=n_knots).tolist()) for _ in range(dim)]
    slopes = [np.exp(rng.uniform(-log_l, log_l, size=n_knots + 1)).tolist() for _ in range(dim)]
    return BiLipschitzMapSpec(kind="coordinatewise", knots=knots, slopes=slopes)


def random_rotation(dim: int, seed: int) -> np.ndarray:
    return special_ortho_group.rvs(dim, random_state=seed)


def distance_distortion(before: DistanceMatrix, after: DistanceMatrix) -> Tuple[float, float]:
    """(min, max) of after/before over pairs with nonzero original distance."""
    a, b = before.condensed(), after.condensed()
    mask = a > 0
    if not mask.any():
        return 1.0, 1.0
    ratio = b[mask] / a[mask]
    return float(ratio.min()), float(ratio.max())


def write_cloud_csv(cloud: PointCloud, target: Union[str, Path, TextIO]) -> None:
    """Header `x0,x1,...`, one row per point, floats written with repr (exact round-trip)."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as fh:
            write_cloud_csv(cloud, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow([f"x{k}" for k in range(cloud.space.ambient_dim)])
    for row in cloud.points:
        writer.writerow([repr(float(x)) for x in row])


def read_cloud_csv(source: Union[str, Path, TextIO], space: MetricSpaceSpec) -> PointCloud:
    if isinstance(source, (str, Path)):
        try:
            with open(source, newline="") as fh:
                return read_cloud_csv(fh, space)
        except OSError as e:
            raise InputError(f"Cannot read point cloud {source}: {e}")
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None:
        return PointCloud(space, np.zeros((0, space.ambient_dim)))
    if len(header) != space.ambient_dim:
        raise InputError(f"CSV has {len(header)} columns, space needs {space.ambient_dim}")
    try:
        rows = [[float(x) for x in row] for row in reader if row]
    except ValueError as e:
        raise InputError(f"Invalid coordinate in point CSV: {e}")
    return PointCloud.from_rows(rows, space)


def cloud_to_csv_text(cloud: PointCloud) -> str:
    buf = io.StringIO()
    write_cloud_csv(cloud, buf)
    return buf.getvalue()
