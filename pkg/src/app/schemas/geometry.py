from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class MetricSpaceSpec(BaseModel):
    """Ambient metric space of a point cloud.

    `euclidean`: R^m with the Euclidean metric.
    `sphere`: the unit m-sphere embedded in R^(m+1) with the intrinsic (geodesic) metric.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["euclidean", "sphere"] = "euclidean"
    m: int = Field(ge=1)

    @property
    def ambient_dim(self) -> int:
        return self.m + 1 if self.kind == "sphere" else self.m

    @classmethod
    def euclidean(cls, m: int) -> "MetricSpaceSpec":
        return cls(kind="euclidean", m=m)

    @classmethod
    def sphere(cls, m: int) -> "MetricSpaceSpec":
        return cls(kind="sphere", m=m)

    @classmethod
    def parse(cls, text: str) -> "MetricSpaceSpec":
        """Parse `euclidean:2` / `sphere:2`."""
        kind, _, dim = (text or "").strip().partition(":")
        if not dim:
            raise ValueError(f"Metric space must look like 'euclidean:2' or 'sphere:2', got {text!r}")
        return cls(kind=kind, m=int(dim))


class BiLipschitzMapSpec(BaseModel):
    """A bi-Lipschitz self-map of R^d applied to Euclidean clouds.

    coordinatewise: axis k is the monotone piecewise-linear map t -> integral_0^t s_k(u) du,
    where s_k is constant on the pieces cut by `knots[k]` (len(slopes[k]) == len(knots[k]) + 1).
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["identity", "uniform_scale", "linear", "coordinatewise"] = "identity"
    scale: Optional[float] = None
    matrix: Optional[List[List[float]]] = None
    knots: Optional[List[List[float]]] = None
    slopes: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "BiLipschitzMapSpec":
        if self.kind == "uniform_scale":
            if self.scale is None or not self.scale > 0:
                raise ValueError("uniform_scale requires scale > 0")
        elif self.kind == "linear":
            if not self.matrix:
                raise ValueError("linear map requires a square matrix")
            arr = np.asarray(self.matrix, dtype=float)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError(f"linear map matrix must be square, got shape {arr.shape}")
            if np.linalg.svd(arr, compute_uv=False).min() <= 0:
                raise ValueError("linear map matrix must be nonsingular")
        elif self.kind == "coordinatewise":
            if not self.slopes or self.knots is None or len(self.knots) != len(self.slopes):
                raise ValueError("coordinatewise map requires per-axis knots and slopes")
            for axis, (knots, slopes) in enumerate(zip(self.knots, self.slopes)):
                if len(slopes) != len(knots) + 1:
                    raise ValueError(f"axis {axis}: expected {len(knots) + 1} slopes, got {len(slopes)}")
                if any(s <= 0 for s in slopes):
                    raise ValueError(f"axis {axis}: slopes must be positive")
                if any(b <= a for a, b in zip(knots, knots[1:])):
                    raise ValueError(f"axis {axis}: knots must be strictly increasing")
        return self

    @property
    def dim(self) -> Optional[int]:
        """Domain dimension, or None when the map applies to any dimension."""
        if self.kind == "linear":
            return len(self.matrix)
        if self.kind == "coordinatewise":
            return len(self.slopes)
        return None

    @property
    def lipschitz_constant(self) -> float:
        """L = max(largest stretch, 1 / smallest stretch); always >= 1."""
        if self.kind == "identity":
            return 1.0
        if self.kind == "uniform_scale":
            return max(self.scale, 1.0 / self.scale)
        if self.kind == "linear":
            sv = np.linalg.svd(np.asarray(self.matrix, dtype=float), compute_uv=False)
            return float(max(sv.max(), 1.0 / sv.min(), 1.0))
        flat = [s for axis in self.slopes for s in axis]
        return float(max(max(flat), 1.0 / min(flat), 1.0))
