from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config import settings
from .geometry import BiLipschitzMapSpec
from .measure import MeasureSpec
from .statistics import DimensionEstimate, RegressionResult


def _default_grid() -> List[int]:
    return [2 ** k for k in range(8, 14)]


class ComplexSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["alpha2d", "rips", "cech_oracle"] = "alpha2d"
    max_dim: Optional[int] = Field(None, ge=0)  # defaults to degree + 1
    scale_rule: Literal["auto", "fixed"] = "auto"
    scale_factor: Optional[float] = Field(None, gt=0)
    radius: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_rule(self) -> "ComplexSpec":
        if self.scale_rule == "fixed" and self.radius is None:
            raise ValueError("scale_rule 'fixed' requires radius")
        return self


class LowerWindow(BaseModel):
    """Window (b0, d0) rescaled by (n0 / n)^(1/m) for the interval-count lower bound."""

    model_config = ConfigDict(frozen=True)

    b0: float = Field(default_factory=lambda: settings.window_birth)
    d0: float = Field(default_factory=lambda: settings.window_death)
    n0: int = Field(default_factory=lambda: settings.window_n0, ge=1)

    @model_validator(mode="after")
    def _check_order(self) -> "LowerWindow":
        if not 0 < self.b0 < self.d0 < 1.0 / 6.0:
            raise ValueError(f"window needs 0 < b0 < d0 < 1/6, got ({self.b0}, {self.d0})")
        return self


class ExperimentConfig(BaseModel):
    measure: MeasureSpec
    complex: ComplexSpec = Field(default_factory=ComplexSpec)
    degree: int = Field(0, ge=0)
    alpha: float = Field(1.0, gt=0)
    n_grid: List[int] = Field(default_factory=_default_grid)
    trials: int = Field(20, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    bilipschitz: Optional[BiLipschitzMapSpec] = None
    output_dir: str = Field(default_factory=lambda: settings.output_dir)
    jobs: int = Field(default_factory=lambda: settings.jobs)

    slope_tolerance: float = Field(default_factory=lambda: settings.slope_tolerance, gt=0)
    band_factor: float = Field(default_factory=lambda: settings.band_factor, gt=1)
    quorum: float = Field(default_factory=lambda: settings.quorum, gt=0, le=1)
    quorum_band: float = Field(default_factory=lambda: settings.quorum_band, gt=0)
    window: LowerWindow = Field(default_factory=LowerWindow)
    alpha_scan: List[float] = Field(default_factory=list)
    dimension_tolerance: float = Field(0.1, gt=0)

    @field_validator("n_grid")
    @classmethod
    def _check_grid(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("n_grid must not be empty")
        if any(n < 1 for n in value):
            raise ValueError("n_grid entries must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("n_grid must be strictly increasing")
        return value

    @field_validator("alpha_scan")
    @classmethod
    def _check_scan(cls, value: List[float]) -> List[float]:
        if any(a <= 0 for a in value):
            raise ValueError("alpha_scan entries must be positive")
        return value

    @model_validator(mode="after")
    def _check_hypotheses(self) -> "ExperimentConfig":
        m = self.measure.intrinsic_dim
        if self.degree >= m:
            raise ValueError(f"degree {self.degree} must be < intrinsic dimension {m}")
        if self.bilipschitz is not None:
            if self.measure.space.kind != "euclidean":
                raise ValueError("bi-Lipschitz maps apply to Euclidean measures only")
            dim = self.bilipschitz.dim
            if dim is not None and dim != self.measure.ambient_dim:
                raise ValueError(f"map dimension {dim} != ambient dimension {self.measure.ambient_dim}")
        return self

    @property
    def intrinsic_dim(self) -> int:
        return self.measure.intrinsic_dim

    @property
    def regime(self) -> Literal["power", "log", "bounded"]:
        m = self.intrinsic_dim
        if self.alpha < m:
            return "power"
        if self.alpha == m:
            return "log"
        return "bounded"

    @property
    def expected_slope(self) -> float:
        m = self.intrinsic_dim
        return (m - self.alpha) / m


class Verdict(BaseModel):
    """Outcome of one property check; names the claim tested and the tolerance used."""

    name: str
    claim: str
    tolerance: str
    status: Literal["pass", "fail", "skipped"]
    observed: Optional[Any] = None
    detail: str = ""


class RunReport(BaseModel):
    command: str
    config: Optional[Dict[str, Any]] = None
    table_path: Optional[str] = None
    regression: Optional[RegressionResult] = None
    dimension: Optional[DimensionEstimate] = None
    dimension_scan: List[DimensionEstimate] = Field(default_factory=list)
    verdicts: List[Verdict] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    wall_clock_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(v.status != "fail" for v in self.verdicts)

    def failures(self) -> List[Verdict]:
        return [v for v in self.verdicts if v.status == "fail"]
