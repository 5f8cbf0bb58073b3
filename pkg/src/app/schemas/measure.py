from typing import Annotated, List, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from .geometry import MetricSpaceSpec


class _Measure(BaseModel):
    model_config = ConfigDict(frozen=True)

    @property
    def intrinsic_dim(self) -> int:
        raise NotImplementedError

    @property
    def space(self) -> MetricSpaceSpec:
        return MetricSpaceSpec.euclidean(self.ambient_dim)

    @property
    def ambient_dim(self) -> int:
        return self.intrinsic_dim


class UniformCube(_Measure):
    """Uniform on [0, side]^m."""

    kind: Literal["uniform_cube"] = "uniform_cube"
    m: int = Field(ge=1)
    side: float = Field(1.0, gt=0)

    @property
    def intrinsic_dim(self) -> int:
        return self.m


class UniformBall(_Measure):
    """Uniform on the closed ball of the given radius centred at the origin."""

    kind: Literal["uniform_ball"] = "uniform_ball"
    m: int = Field(ge=1)
    radius: float = Field(1.0, gt=0)

    @property
    def intrinsic_dim(self) -> int:
        return self.m


class UniformSphere(_Measure):
    """Uniform on the unit m-sphere in R^(m+1)."""

    kind: Literal["uniform_sphere"] = "uniform_sphere"
    m: int = Field(ge=1)

    @property
    def intrinsic_dim(self) -> int:
        return self.m

    @property
    def ambient_dim(self) -> int:
        return self.m + 1

    @property
    def space(self) -> MetricSpaceSpec:
        return MetricSpaceSpec.sphere(self.m)


class SimplicialComplexUniform(_Measure):
    """Uniform (volume-weighted) on a pure Euclidean simplicial complex.

    `vertices` are coordinates in R^d, `simplices` index lists of m+1 vertices each.
    Degeneracy (zero m-volume) is detected when weights are computed.
    """

    kind: Literal["simplicial_complex"] = "simplicial_complex"
    vertices: List[List[float]]
    simplices: List[List[int]]

    @model_validator(mode="after")
    def _check_tables(self) -> "SimplicialComplexUniform":
        if not self.vertices:
            raise ValueError("simplicial complex needs at least one vertex")
        dims = {len(v) for v in self.vertices}
        if len(dims) != 1:
            raise ValueError(f"vertex coordinates have mixed dimensions {sorted(dims)}")
        if not self.simplices:
            raise ValueError("simplicial complex needs a nonempty simplex list")
        sizes = {len(s) for s in self.simplices}
        if len(sizes) != 1:
            raise ValueError("all simplices must have the same dimension")
        size = sizes.pop()
        if size < 2:
            raise ValueError("simplices must have dimension >= 1")
        if size - 1 > len(self.vertices[0]):
            raise ValueError("simplex dimension exceeds the ambient dimension")
        for simplex in self.simplices:
            if len(set(simplex)) != len(simplex):
                raise ValueError(f"simplex {simplex} repeats a vertex")
            if min(simplex) < 0 or max(simplex) >= len(self.vertices):
                raise ValueError(f"simplex {simplex} references a missing vertex")
        return self

    @property
    def intrinsic_dim(self) -> int:
        return len(self.simplices[0]) - 1

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0])


class LocallyBoundedMixture(_Measure):
    """p * Uniform(A) + (1 - p) * (uniform pick from `atoms`), A = [box_lo, box_hi].

    Atoms must lie outside the closed box A so that a0 vol(B) <= mu(B) <= a1 vol(B) on A.
    """

    kind: Literal["locally_bounded_mixture"] = "locally_bounded_mixture"
    p: float = Field(gt=0, lt=1)
    box_lo: List[float]
    box_hi: List[float]
    atoms: List[List[float]]

    @model_validator(mode="after")
    def _check_box(self) -> "LocallyBoundedMixture":
        if not self.box_lo or len(self.box_lo) != len(self.box_hi):
            raise ValueError("box_lo and box_hi must have the same nonzero length")
        if any(hi <= lo for lo, hi in zip(self.box_lo, self.box_hi)):
            raise ValueError("box A must have positive volume")
        if not self.atoms:
            raise ValueError("mixture needs at least one atom")
        for atom in self.atoms:
            if len(atom) != len(self.box_lo):
                raise ValueError(f"atom {atom} has the wrong dimension")
            if all(lo <= x <= hi for x, lo, hi in zip(atom, self.box_lo, self.box_hi)):
                raise ValueError(f"atom {atom} lies inside box A")
        return self

    @property
    def intrinsic_dim(self) -> int:
        return len(self.box_lo)


MeasureSpec = Annotated[
    Union[UniformCube, UniformBall, UniformSphere, SimplicialComplexUniform, LocallyBoundedMixture],
    Field(discriminator="kind"),
]

measure_adapter = TypeAdapter(MeasureSpec)
