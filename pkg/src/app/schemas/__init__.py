# Schemas package
from .experiment import ComplexSpec, ExperimentConfig, LowerWindow, RunReport, Verdict
from .geometry import BiLipschitzMapSpec, MetricSpaceSpec
from .measure import (
    LocallyBoundedMixture,
    MeasureSpec,
    SimplicialComplexUniform,
    UniformBall,
    UniformCube,
    UniformSphere,
    measure_adapter,
)
from .statistics import DimensionEstimate, RegressionResult, ScalingRow

__all__ = [
    "BiLipschitzMapSpec",
    "ComplexSpec",
    "DimensionEstimate",
    "ExperimentConfig",
    "LocallyBoundedMixture",
    "LowerWindow",
    "MeasureSpec",
    "MetricSpaceSpec",
    "RegressionResult",
    "RunReport",
    "ScalingRow",
    "SimplicialComplexUniform",
    "UniformBall",
    "UniformCube",
    "UniformSphere",
    "Verdict",
    "measure_adapter",
]
