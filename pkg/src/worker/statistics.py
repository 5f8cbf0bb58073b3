"""
Weighted persistence sums, scaling fits and the boundedness probes.

Every check here returns numbers or small report objects; deciding pass/fail
against tolerances is left to the harness.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from math import floor, log
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from app.config import settings
from app.errors import InputError, InsufficientDataError, UndefinedDimensionError
from app.schemas.statistics import DimensionEstimate, RegressionResult, ScalingRow

from .geometry import PointCloud
from .persistence import Barcode, MstResult, count_spanning

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 3
MAX_OCCUPANCY_BOXES = 20

TABLE_COLUMNS = [
    "n",
    "trial",
    "e_alpha",
    "ph_count",
    "n_spanning",
    "tail_statistic",
    "upper_bound_ratio",
    "ph_total",
    "delaunay_simplices",
    "essential_count",
]


# Weighted sums


def e_alpha_sum(bc: Barcode, i: int, alpha: float) -> float:
    """E_alpha^i = sum of (d - b)^alpha over the finite degree-i intervals."""
    if not alpha > 0:
        raise InputError(f"alpha must be > 0, got {alpha}")
    lengths = bc.lengths(i)
    return float(np.sum(lengths ** alpha))


def mst_alpha_weight(tree: MstResult, alpha: float) -> float:
    """2^(-alpha) * sum |e|^alpha over the tree edges."""
    if not alpha > 0:
        raise InputError(f"alpha must be > 0, got {alpha}")
    return float(np.sum((tree.lengths / 2.0) ** alpha))


# Scaling tables


@dataclass
class ScalingTable:
    rows: List[ScalingRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def sorted(self) -> "ScalingTable":
        return ScalingTable(sorted(self.rows, key=lambda r: (r.n, r.trial)))

    def n_values(self) -> List[int]:
        return sorted({r.n for r in self.rows})

    def column(self, response: str, n: Optional[int] = None) -> np.ndarray:
        rows = self.rows if n is None else [r for r in self.rows if r.n == n]
        values = [getattr(r, response) for r in rows]
        return np.asarray([np.nan if v is None else v for v in values], dtype=float)

    def trials_per_n(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for r in self.rows:
            counts[r.n] = counts.get(r.n, 0) + 1
        return counts

    def group_means(self, response: str, positive_only: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """Per-n means of `response`; with positive_only, rows <= 0 are left out first."""
        ns, means = [], []
        for n in self.n_values():
            values = self.column(response, n)
            values = values[np.isfinite(values)]
            if positive_only:
                dropped = int(np.count_nonzero(values <= 0))
                if dropped:
                    logger.warning(f"{response}: excluding {dropped} non-positive value(s) at n={n}")
                values = values[values > 0]
            if len(values):
                ns.append(n)
                means.append(float(values.mean()))
        return np.asarray(ns, dtype=float), np.asarray(means, dtype=float)

    def write_csv(self, target: Union[str, Path]) -> None:
        """Deterministic columns only; wall-clock goes to `write_timings_csv`."""
        with open(target, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TABLE_COLUMNS)
            for row in self.sorted().rows:
                writer.writerow([_cell(getattr(row, col)) for col in TABLE_COLUMNS])

    def write_timings_csv(self, target: Union[str, Path]) -> None:
        with open(target, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "trial", "elapsed"])
            for row in self.sorted().rows:
                writer.writerow([row.n, row.trial, f"{row.elapsed:.6f}"])

    @classmethod
    def read_csv(cls, source: Union[str, Path]) -> "ScalingTable":
        with open(source, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = [ScalingRow(**{k: v for k, v in rec.items() if v != ""}) for rec in reader]
        return cls(rows)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


# Regressions


def _ols(x: np.ndarray, y: np.ndarray):
    fit = stats.linregress(x, y)
    residuals = y - (fit.intercept + fit.slope * x)
    r_squared = float(fit.rvalue ** 2) if np.isfinite(fit.rvalue) else 0.0
    stderr = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    if len(x) > 2:
        half_width = float(stats.t.ppf(0.975, len(x) - 2)) * stderr
    else:
        half_width = float("nan")
    return fit, residuals, min(max(r_squared, 0.0), 1.0), stderr, half_width


def _fit(response: str, kind: str, ns: np.ndarray, means: np.ndarray) -> RegressionResult:
    if len(ns) < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"{response}: need >= {MIN_FIT_POINTS} distinct n with positive responses, got {len(ns)}"
        )
    x = np.log(ns)
    y = np.log(means) if kind == "loglog" else means
    fit, residuals, r_squared, stderr, half_width = _ols(x, y)
    return RegressionResult(
        response=response,
        fit=kind,
        n_values=[int(n) for n in ns],
        means=means.tolist(),
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=r_squared,
        residuals=residuals.tolist(),
        stderr=stderr,
        ci_low=float(fit.slope - half_width),
        ci_high=float(fit.slope + half_width),
    )


def fit_loglog(table: ScalingTable, response: str = "e_alpha") -> RegressionResult:
    """OLS of log(mean response per n) against log n."""
    _check_table(table)
    ns, means = table.group_means(response, positive_only=True)
    return _fit(response, "loglog", ns, means)


def fit_against_log_n(table: ScalingTable, response: str = "e_alpha") -> RegressionResult:
    """OLS of the mean response per n against log n, for the alpha = m regime."""
    _check_table(table)
    ns, means = table.group_means(response)
    return _fit(response, "semilog", ns, means)


def fit_variance_loglog(table: ScalingTable, response: str = "ph_count") -> RegressionResult:
    """Log-log fit of the per-n sample variance, for the linear-variance probe."""
    ns, variances = [], []
    for n in table.n_values():
        values = table.column(response, n)
        values = values[np.isfinite(values)]
        if len(values) >= 2:
            var = float(values.var(ddof=1))
            if var > 0:
                ns.append(n)
                variances.append(var)
    return _fit(f"var({response})", "loglog", np.asarray(ns, dtype=float), np.asarray(variances))


def _check_table(table: ScalingTable) -> None:
    for n, count in sorted(table.trials_per_n().items()):
        if count < settings.min_trials_per_n:
            logger.warning(f"only {count} trial(s) at n={n}; fewer than {settings.min_trials_per_n}")


def dimension_from_slope(slope: float, alpha: float) -> DimensionEstimate:
    """m_hat = alpha / (1 - slope), from E ~ n^((m - alpha) / m)."""
    if not alpha > 0:
        raise InputError(f"alpha must be > 0, got {alpha}")
    if not slope < 1:
        raise UndefinedDimensionError(f"slope {slope:.4f} >= 1; the dimension estimate is undefined")
    return DimensionEstimate(alpha_used=alpha, slope=slope, m_hat=alpha / (1.0 - slope))


def estimate_dimension(
    table: Union[ScalingTable, RegressionResult], alpha: float
) -> DimensionEstimate:
    fit = table if isinstance(table, RegressionResult) else fit_loglog(table, "e_alpha")
    return dimension_from_slope(fit.slope, alpha)


# Boundedness probes


def tail_statistic(bc: Barcode, i: int, m: int) -> float:
    """max over interval lengths l of |{lengths >= l}| * l^m."""
    lengths = np.sort(bc.lengths(i))
    if not len(lengths):
        raise InputError(f"tail statistic needs a nonempty degree-{i} barcode")
    at_least = len(lengths) - np.searchsorted(lengths, lengths, side="left")
    return float(np.max(at_least * lengths ** m))


def upper_bound_check(bc: Barcode, i: int, m: int, alpha: float) -> float:
    """E / |PH_i|^((m - alpha) / m), or E / log|PH_i| when alpha = m.

    The barcode is first shrunk so its largest death is at most 1. For
    alpha > m the sum itself is returned, since it stays bounded.
    """
    if not alpha > 0:
        raise InputError(f"alpha must be > 0, got {alpha}")
    top = bc.max_death()
    normalized = bc.scaled(1.0 / top) if top > 1 else bc
    count = normalized.count(i)
    total = e_alpha_sum(normalized, i, alpha)
    if alpha == m:
        if count < 2:
            raise InputError(f"log bound needs |PH_{i}| >= 2, got {count}")
        return total / log(count)
    if alpha > m:
        return total
    if count == 0:
        return 0.0
    return total / count ** ((m - alpha) / m)


@dataclass(frozen=True)
class AveragedBound:
    """mean(E) against C * mean(|PH|)^((m - alpha) / m), with C the largest per-instance ratio."""

    mean_e: float
    mean_count: float
    constant: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.mean_e <= self.bound * (1.0 + 1e-12)


def averaged_bound_check(
    e_values: Sequence[float], counts: Sequence[int], m: int, alpha: float
) -> AveragedBound:
    e = np.asarray(e_values, dtype=float)
    c = np.asarray(counts, dtype=float)
    if len(e) == 0 or len(e) != len(c):
        raise InputError("need matching, nonempty E and |PH| samples")
    if not 0 < alpha < m:
        raise InputError("the averaged bound is stated for 0 < alpha < m")
    exponent = (m - alpha) / m
    live = c > 0
    ratios = np.zeros_like(e)
    ratios[live] = e[live] / c[live] ** exponent
    constant = float(ratios.max())
    bound = constant * float(c.mean()) ** exponent
    return AveragedBound(mean_e=float(e.mean()), mean_count=float(c.mean()), constant=constant, bound=bound)


# Interleaving under bi-Lipschitz maps


@dataclass(frozen=True)
class ProbeResult:
    degree: int
    b: float
    d: float
    lower: int  # N_X(b / L, L d)
    middle: int  # N_psi(X)(b, d)
    upper: int  # N_X(L b, d / L)

    @property
    def holds(self) -> bool:
        return self.lower <= self.middle <= self.upper


@dataclass
class InterleavingReport:
    lipschitz: float
    probes: List[ProbeResult] = field(default_factory=list)
    skipped: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def failures(self) -> List[ProbeResult]:
        return [p for p in self.probes if not p.holds]

    @property
    def passed(self) -> bool:
        return not self.failures


def interleaving_check(
    bc_x: Barcode,
    bc_psi: Barcode,
    lipschitz: float,
    probes: Iterable[Tuple[float, float]],
    degrees: Optional[Sequence[int]] = None,
) -> InterleavingReport:
    """N_X(b/L, L d) <= N_psi(X)(b, d) <= N_X(L b, d/L) for every probe and degree."""
    L = float(lipschitz)
    if not L >= 1:
        raise InputError(f"Lipschitz constant must be >= 1, got {L}")
    if degrees is None:
        degrees = range(min(bc_x.max_dim, bc_psi.max_dim) + 1)

    report = InterleavingReport(lipschitz=L)
    for b, d in probes:
        if not L * b < d / L:
            logger.warning(f"skipping probe ({b}, {d}): L*b >= d/L for L={L}")
            report.skipped.append((b, d))
            continue
        for i in degrees:
            report.probes.append(
                ProbeResult(
                    degree=i,
                    b=b,
                    d=d,
                    lower=count_spanning(bc_x, i, b / L, L * d),
                    middle=count_spanning(bc_psi, i, b, d),
                    upper=count_spanning(bc_x, i, L * b, d / L),
                )
            )
    return report


# Occupancy events


@dataclass(frozen=True)
class Box:
    """Axis-aligned half-open box [lo, hi)."""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or not self.lo:
            raise InputError("box corners must have the same nonzero dimension")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise InputError(f"box [{self.lo}, {self.hi}) has empty interior")

    @classmethod
    def cube(cls, corner: Sequence[float], width: float) -> "Box":
        return cls(tuple(float(c) for c in corner), tuple(float(c) + width for c in corner))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def contains(self, points: np.ndarray) -> np.ndarray:
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.all((points >= lo) & (points < hi), axis=1)

    def overlaps(self, other: "Box") -> bool:
        return all(a_lo < b_hi and b_lo < a_hi for a_lo, a_hi, b_lo, b_hi in zip(self.lo, self.hi, other.lo, other.hi))

    def intersection_volume(self, lo: Sequence[float], hi: Sequence[float]) -> float:
        widths = np.minimum(self.hi, hi) - np.maximum(self.lo, lo)
        return float(np.prod(np.clip(widths, 0.0, None)))


def _check_disjoint(boxes: Sequence[Box]) -> None:
    for a, b in combinations(boxes, 2):
        if a.dim != b.dim:
            raise InputError("boxes have different dimensions")
        if a.overlaps(b):
            raise InputError(f"boxes {a} and {b} overlap")


def occupancy_xi(cloud: PointCloud, a_boxes: Sequence[Box], b_boxes: Sequence[Box]) -> int:
    """1 iff every A-box is empty of cloud points and every B-box holds at least one."""
    boxes = list(a_boxes) + list(b_boxes)
    _check_disjoint(boxes)
    pts = cloud.points
    for box in boxes:
        if box.dim != pts.shape[1]:
            raise InputError(f"box dimension {box.dim} != cloud dimension {pts.shape[1]}")
    if any(box.contains(pts).any() for box in a_boxes):
        return 0
    return int(all(box.contains(pts).any() for box in b_boxes))


def occupancy_probability(n: int, a_masses: Sequence[float], b_masses: Sequence[float]) -> float:
    """P(xi = 1) for n i.i.d. points, by inclusion-exclusion over the B-boxes."""
    if len(b_masses) > MAX_OCCUPANCY_BOXES:
        raise InputError(f"inclusion-exclusion over {len(b_masses)} boxes is too large")
    empty_a = 1.0 - float(sum(a_masses))
    total = 0.0
    for size in range(len(b_masses) + 1):
        sign = -1.0 if size % 2 else 1.0
        for subset in combinations(b_masses, size):
            total += sign * max(empty_a - sum(subset), 0.0) ** n
    return total


def uniform_cube_mass(box: Box, side: float = 1.0) -> float:
    m = box.dim
    return box.intersection_volume([0.0] * m, [side] * m) / side ** m


def sphere_occupancy_template(m: int, i: int, width: float) -> Tuple[List[Box], List[Box]]:
    """Sub-cubes of width `width` tiling the centred cube of width width * floor(1 / width).

    The i-sphere of radius 1/6 (first i + 1 coordinates) splits them into A
    (missing the sphere) and B (meeting it). When every B-cube is occupied and
    every A-cube empty, the cloud carries a degree-i interval of the sphere's
    (0, 1/6), up to the cube diagonal.
    """
    if not 0 <= i < m:
        raise InputError(f"need 0 <= i < m, got i={i}, m={m}")
    if not 0 < width < 1:
        raise InputError("sub-cube width must be in (0, 1)")
    k = floor(1.0 / width)
    start = -width * k / 2.0
    radius = 1.0 / 6.0

    a_boxes, b_boxes = [], []
    for cell in product(range(k), repeat=m):
        lo = np.asarray([start + c * width for c in cell])
        hi = lo + width
        flat = all(lo[j] <= 0.0 <= hi[j] for j in range(i + 1, m))
        near = np.linalg.norm(np.clip(0.0, lo[: i + 1], hi[: i + 1]))
        far = np.linalg.norm(np.maximum(np.abs(lo[: i + 1]), np.abs(hi[: i + 1])))
        box = Box(tuple(lo.tolist()), tuple(hi.tolist()))
        if flat and near <= radius <= far:
            b_boxes.append(box)
        else:
            a_boxes.append(box)
    return a_boxes, b_boxes


def lower_window(n: int, m: int, b0: float, d0: float, n0: int) -> Tuple[float, float]:
    """(omega b0, omega d0) with omega = (n0 / n)^(1/m)."""
    omega = (n0 / n) ** (1.0 / m)
    return omega * b0, omega * d0
