import math
from typing import List, Literal, Optional

from pydantic import BaseModel


class ScalingRow(BaseModel):
    """One Monte Carlo trial at sample size n."""

    n: int
    trial: int
    e_alpha: float
    ph_count: int
    n_spanning: int
    elapsed: float = 0.0
    tail_statistic: Optional[float] = None
    upper_bound_ratio: Optional[float] = None
    ph_total: Optional[int] = None  # |PH_0| + |PH_1| (alpha2d only)
    delaunay_simplices: Optional[int] = None
    essential_count: int = 0


class RegressionResult(BaseModel):
    response: str
    fit: Literal["loglog", "semilog"] = "loglog"  # semilog: raw means against log n
    n_values: List[int]
    means: List[float]
    slope: float
    intercept: float
    r_squared: float
    residuals: List[float]
    stderr: float = 0.0
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None

    def predict(self, n: float) -> float:
        """Fitted mean response at n."""
        if self.fit == "loglog":
            return math.exp(self.intercept + self.slope * math.log(n))
        return self.intercept + self.slope * math.log(n)


class DimensionEstimate(BaseModel):
    alpha_used: float
    slope: float
    m_hat: float
