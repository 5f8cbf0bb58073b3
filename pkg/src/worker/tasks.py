"""
Monte Carlo trial tasks and the bounded worker pool.

This module contains the per-trial pipeline:
- sample -> optional bi-Lipschitz map -> barcode -> statistics
- degree 0 goes through the Euclidean/geodesic MST, skipping complex construction
- degree >= 1 builds the configured complex and reduces it

Trials are pure functions of (config, n, trial); the pool only decides where
they run. Results are returned sorted by (n, trial).
"""

import logging
import time
from typing import Callable, Iterable, List, Optional, Tuple

from joblib import Parallel, delayed

from app.config import settings
from app.schemas.experiment import ComplexSpec, ExperimentConfig
from app.schemas.statistics import ScalingRow

from .complexes.alpha import alpha_filtration
from .complexes.cech import build_cech_oracle
from .complexes.delaunay import count_delaunay_simplices, delaunay_2d
from .complexes.rips import auto_scale, build_rips
from .geometry import PointCloud, apply_bilipschitz, pairwise_distances
from .persistence import Barcode, count_spanning, mst_from_cloud, ph0_from_mst, reduce
from .sampling import derive_seed, sample
from .statistics import e_alpha_sum, lower_window, tail_statistic, upper_bound_check

logger = logging.getLogger(__name__)


def trial_cloud(config: ExperimentConfig, n: int, trial: int) -> PointCloud:
    """The (optionally mapped) sample of one trial."""
    cloud = sample(config.measure, n, derive_seed(config.seed, n, trial))
    if config.bilipschitz is not None:
        cloud = apply_bilipschitz(config.bilipschitz, cloud)
    return cloud


def rips_scale(spec: ComplexSpec, n: int, m: int, diameter: float) -> float:
    if spec.scale_rule == "fixed":
        return spec.radius
    factor = spec.scale_factor if spec.scale_factor is not None else settings.rips_scale_factor
    return auto_scale(n, m, diameter, factor)


def build_barcode(cloud: PointCloud, spec: ComplexSpec, degree: int, m: int) -> Tuple[Barcode, dict]:
    """
    Barcode of one cloud, through the MST for degree 0 and the given complex otherwise.

    Args:
        cloud: Sample points
        spec: Complex kind and its truncation
        degree: Highest homology degree needed
        m: Intrinsic dimension, used by the automatic Rips radius

    Returns:
        (barcode, extras) where extras carries the Delaunay total for alpha2d
        and the Rips truncation radius.
    """
    extras = {}
    if degree == 0:
        return ph0_from_mst(mst_from_cloud(cloud)), extras

    max_dim = max(spec.max_dim or 0, degree + 1)
    if spec.kind == "alpha2d":
        tri = delaunay_2d(cloud)
        bc = reduce(alpha_filtration(tri))
        extras["delaunay_simplices"] = sum(count_delaunay_simplices(tri))
    elif spec.kind == "rips":
        d = pairwise_distances(cloud)
        scale = rips_scale(spec, cloud.n, m, d.diameter())
        bc = reduce(build_rips(d, max_dim, scale))
        extras["rips_scale"] = scale
    else:
        bc = reduce(build_cech_oracle(cloud, max_dim))
    return bc, extras


def compute_barcode(config: ExperimentConfig, cloud: PointCloud) -> Tuple[Barcode, dict]:
    """Barcode of one cloud under the configured complex."""
    return build_barcode(cloud, config.complex, config.degree, config.intrinsic_dim)


def run_trial(config: ExperimentConfig, n: int, trial: int) -> ScalingRow:
    """
    One Monte Carlo trial.

    Pipeline:
    1. Derive the trial seed from (seed, n, trial) and sample n points
    2. Apply the configured bi-Lipschitz map, if any
    3. Build the barcode (MST path for degree 0)
    4. Record E_alpha^i, |PH_i|, the lower-window count and the bound probes
    """
    started = time.perf_counter()
    i, m, alpha = config.degree, config.intrinsic_dim, config.alpha

    cloud = trial_cloud(config, n, trial)
    bc, extras = compute_barcode(config, cloud)

    count = bc.count(i)
    window = config.window
    b, d = lower_window(n, m, window.b0, window.d0, window.n0)
    essential = bc.essential_count()
    if essential:
        logger.warning(
            f"n={n} trial={trial}: {essential} essential class(es) above degree 0 "
            f"(truncated complex); excluded from E_alpha"
        )

    row = ScalingRow(
        n=n,
        trial=trial,
        e_alpha=e_alpha_sum(bc, i, alpha),
        ph_count=count,
        n_spanning=count_spanning(bc, i, b, d),
        tail_statistic=tail_statistic(bc, i, m) if count else None,
        upper_bound_ratio=upper_bound_check(bc, i, m, alpha) if (alpha != m or count >= 2) else None,
        ph_total=bc.count(0) + bc.count(1) if "delaunay_simplices" in extras else None,
        delaunay_simplices=extras.get("delaunay_simplices"),
        essential_count=essential,
        elapsed=time.perf_counter() - started,
    )
    logger.debug("n=%d trial=%d: E=%.6g |PH|=%d in %.3fs", n, trial, row.e_alpha, count, row.elapsed)
    return row


def run_trials(
    config: ExperimentConfig,
    items: Iterable[Tuple[int, int]],
    jobs: int = 1,
    on_result: Optional[Callable[[ScalingRow], None]] = None,
) -> List[ScalingRow]:
    """
    Run (n, trial) items on a pool of `jobs` workers.

    Args:
        config: Experiment config shared read-only by all trials
        items: (n, trial) pairs to compute
        jobs: Worker count; 1 runs inline, -1 uses every core
        on_result: Called in the parent for every finished row (e.g. to store it)

    Returns:
        Rows sorted by (n, trial)
    """
    items = sorted(set(items))
    if not items:
        return []
    logger.info(f"Running {len(items)} trial(s) with jobs={jobs}")

    rows: List[ScalingRow] = []
    parallel = Parallel(n_jobs=jobs, return_as="generator")
    for row in parallel(delayed(run_trial)(config, n, trial) for n, trial in items):
        if on_result is not None:
            on_result(row)
        rows.append(row)
    return sorted(rows, key=lambda r: (r.n, r.trial))
