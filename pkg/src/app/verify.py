"""
Oracle battery run by `phsums verify`.

Each check compares two independent computations (or a computation and an
analytic value) and turns the comparison into a Verdict. Nothing here raises
on a failed comparison; a check that crashes is reported as a failed verdict.
"""

import logging
import time
from math import sqrt
from typing import Callable, List, Optional, Sequence

import numpy as np

from worker.complexes import (
    build_alpha_2d,
    build_cech_oracle,
    build_rips,
    count_delaunay_simplices,
    delaunay_2d,
)
from worker.complexes.predicates import incircle
from worker.geometry import PointCloud, apply_bilipschitz, pairwise_distances, random_coordinatewise_map
from worker.persistence import Barcode, mst, mst_from_cloud, reduce, reduce_pairs
from worker.sampling import derive_seed, make_rng, sample
from worker.statistics import ScalingTable, e_alpha_sum, interleaving_check, mst_alpha_weight
from worker.tasks import run_trials

from .config import settings
from .errors import PhSumsError
from .harness import averaged_bound_verdict, band_verdict, count_verdicts, delaunay_verdict, make_verdict, validate_config
from .schemas.experiment import RunReport, Verdict
from .schemas.geometry import MetricSpaceSpec
from .schemas.measure import UniformCube
from .storage import RunStorage

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (256, 512, 1024, 2048)
MST_CLOUDS = 100
ALPHA_CECH_CLOUDS = 50
INTERLEAVING_CLOUDS = 50
INTERLEAVING_POINTS = 30
INTERLEAVING_PROBES = 20
INTERLEAVING_LIPSCHITZ = 1.5
BARCODE_TOL = 1e-9
FIXTURE_TOL = 1e-12

# keeps the per-check seed streams apart from each other and from experiment trials
_STREAMS = {
    "mst": 1,
    "alpha_cech": 2,
    "interleaving": 3,
    "pairing": 4,
    "scale": 5,
    "delaunay": 6,
    "monotone": 7,
}


def _seed(master: int, stream: str, k: int) -> int:
    return derive_seed(master, _STREAMS[stream], k)


def _square(n: int, seed: int) -> PointCloud:
    return sample(UniformCube(m=2), n, seed)


def _same_intervals(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    return a.shape == b.shape and bool(np.allclose(a, b, rtol=0.0, atol=tol))


# Checks


def check_mst_identity(seed: int) -> Verdict:
    """Degree-0 deaths of the Rips 1-skeleton equal half the MST edge lengths."""
    rng = make_rng(_seed(seed, "mst", 0))
    alphas = (0.5, 1.0, 2.0)
    failures = []
    for k in range(MST_CLOUDS):
        m = 2 if k % 2 == 0 else 3
        n = int(rng.integers(2, 51))
        cloud = sample(UniformCube(m=m), n, _seed(seed, "mst", k + 1))
        d = pairwise_distances(cloud)

        bc = reduce(build_rips(d, 1, max(d.diameter(), 1.0)))
        tree = mst(d)
        deaths = np.sort(bc.degree(0)[:, 1])
        expected = np.sort(tree.lengths / 2.0)
        if not _same_intervals(deaths, expected, BARCODE_TOL):
            failures.append(f"cloud {k}: degree-0 deaths differ from MST half-lengths")
            continue
        if abs(mst_from_cloud(cloud).total_length - tree.total_length) > BARCODE_TOL:
            failures.append(f"cloud {k}: restricted MST differs from the complete-graph MST")
        for alpha in alphas:
            e, w = e_alpha_sum(bc, 0, alpha), mst_alpha_weight(tree, alpha)
            if abs(e - w) > FIXTURE_TOL * max(1.0, abs(w)):
                failures.append(f"cloud {k}, alpha={alpha}: E={e!r} vs 2^-alpha sum |e|^alpha={w!r}")
    return make_verdict(
        "mst_ph0_identity",
        "PH_0 deaths are the MST edge lengths halved; E_alpha^0 = 2^-alpha sum |e|^alpha",
        f"deaths within {BARCODE_TOL:g}, sums within {FIXTURE_TOL:g} relative",
        not failures,
        observed=MST_CLOUDS,
        detail="; ".join(failures[:3]),
    )


def check_alpha_cech(seed: int) -> Verdict:
    """Alpha and exhaustive Čech filtrations give the same degree-0 and degree-1 barcodes."""
    rng = make_rng(_seed(seed, "alpha_cech", 0))
    failures = []
    for k in range(ALPHA_CECH_CLOUDS):
        n = int(rng.integers(3, min(20, settings.cech_oracle_max_points) + 1))
        cloud = _square(n, _seed(seed, "alpha_cech", k + 1))
        alpha = reduce(build_alpha_2d(cloud))
        cech = reduce(build_cech_oracle(cloud, 2))
        for i in (0, 1):
            if not _same_intervals(alpha.degree(i), cech.degree(i), BARCODE_TOL):
                failures.append(f"cloud {k} (n={n}): degree {i} differs")
    return make_verdict(
        "alpha_cech_equivalence",
        "alpha and Čech barcodes agree in degrees 0 and 1",
        f"multisets equal within {BARCODE_TOL:g}",
        not failures,
        observed=ALPHA_CECH_CLOUDS,
        detail="; ".join(failures[:3]),
    )


def check_fixtures() -> Verdict:
    """Unit square corners and the unit equilateral triangle, under both planar builders."""
    plane = MetricSpaceSpec.euclidean(2)
    fixtures = {
        "unit_square": ([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], (0.5, sqrt(2.0) / 2.0)),
        "equilateral": ([(0.0, 0.0), (1.0, 0.0), (0.5, sqrt(3.0) / 2.0)], (0.5, 1.0 / sqrt(3.0))),
    }
    failures = []
    for name, (rows, interval) in fixtures.items():
        cloud = PointCloud.from_rows(rows, plane)
        expected = np.asarray([interval])
        for builder, build in (("alpha", build_alpha_2d), ("cech", lambda c: build_cech_oracle(c, 2))):
            got = reduce(build(cloud)).degree(1)
            if not _same_intervals(got, expected, FIXTURE_TOL):
                failures.append(f"{name}/{builder}: PH_1 = {got.tolist()}")
    return make_verdict(
        "exact_fixtures",
        "square corners give PH_1 = {(1/2, sqrt2/2)}; equilateral triangle gives {(1/2, 1/sqrt3)}",
        f"within {FIXTURE_TOL:g}",
        not failures,
        detail="; ".join(failures),
    )


def check_interleaving(seed: int) -> Verdict:
    """Interval counts of a cloud and its bi-Lipschitz image interleave at factor L."""
    L = INTERLEAVING_LIPSCHITZ
    rng = make_rng(_seed(seed, "interleaving", 0))
    failures, checked, skipped = [], 0, 0
    for k in range(INTERLEAVING_CLOUDS):
        cloud = _square(INTERLEAVING_POINTS, _seed(seed, "interleaving", k + 1))
        spec = random_coordinatewise_map(2, L, _seed(seed, "interleaving", INTERLEAVING_CLOUDS + k + 1))
        bc_x = reduce(build_alpha_2d(cloud))
        bc_psi = reduce(build_alpha_2d(apply_bilipschitz(spec, cloud)))

        births = rng.uniform(0.01, 0.15, size=INTERLEAVING_PROBES)
        deaths = L * L * births * rng.uniform(1.0, 4.0, size=INTERLEAVING_PROBES)
        report = interleaving_check(bc_x, bc_psi, spec.lipschitz_constant, zip(births, deaths), degrees=(0, 1))
        checked += len(report.probes)
        skipped += len(report.skipped)
        failures.extend(
            f"cloud {k}, degree {p.degree}, (b, d)=({p.b:.4f}, {p.d:.4f}): {p.lower} <= {p.middle} <= {p.upper} fails"
            for p in report.failures
        )
    return make_verdict(
        "interleaving",
        "N_X(b/L, L d) <= N_psi(X)(b, d) <= N_X(L b, d/L) for bi-Lipschitz psi",
        f"exact integer counts, L = {L}",
        not failures,
        observed=checked,
        detail="; ".join(failures[:3]) + (f" ({skipped} probe(s) skipped)" if skipped else ""),
    )


def check_pairing(seed: int, clouds: int = 10, n: int = 60) -> Verdict:
    """Every simplex of a planar alpha filtration is paired once or is the single essential vertex."""
    failures = []
    for k in range(clouds):
        f = build_alpha_2d(_square(n, _seed(seed, "pairing", k)))
        result = reduce_pairs(f)
        seen = [b for b, _ in result.pairs] + [d for _, d in result.pairs] + result.essential
        if len(seen) != len(set(seen)):
            failures.append(f"cloud {k}: a simplex is paired twice")
        if len(seen) != len(f):
            failures.append(f"cloud {k}: {len(f) - len(seen)} simplex(es) left unpaired")
        if len(result.essential) != 1:
            failures.append(f"cloud {k}: {len(result.essential)} essential simplex(es), expected 1")
        for b, d in result.pairs:
            if not (b < d and len(f.simplices[d]) == len(f.simplices[b]) + 1 and f.values[b] <= f.values[d]):
                failures.append(f"cloud {k}: bad pair {f.simplices[b]} -> {f.simplices[d]}")
                break
    return make_verdict(
        "pairing_soundness",
        "reduction pairs each simplex at most once with a coface one dimension up; one component survives",
        "exact",
        not failures,
        observed=clouds,
        detail="; ".join(failures[:3]),
    )


def check_scale_equivariance(seed: int, factor: float = 2.5, clouds: int = 10, n: int = 80) -> Verdict:
    """Scaling a cloud by c scales its barcode by c and E_alpha by c^alpha."""
    failures = []
    for k in range(clouds):
        cloud = _square(n, _seed(seed, "scale", k))
        bc = reduce(build_alpha_2d(cloud))
        scaled = reduce(build_alpha_2d(cloud.with_points(cloud.points * factor)))
        expected = bc.scaled(factor)
        for i in (0, 1):
            tol = BARCODE_TOL * max(1.0, factor)
            if not _same_intervals(scaled.degree(i), expected.degree(i), tol):
                failures.append(f"cloud {k}: degree {i} not equivariant")
        e, e_scaled = e_alpha_sum(bc, 1, 1.5), e_alpha_sum(scaled, 1, 1.5)
        if abs(e_scaled - factor ** 1.5 * e) > BARCODE_TOL * max(1.0, e_scaled):
            failures.append(f"cloud {k}: E_1.5 scaled to {e_scaled!r}, expected {factor ** 1.5 * e!r}")
    return make_verdict(
        "scale_equivariance",
        "PH(cX) = c PH(X) and E_alpha(cX) = c^alpha E_alpha(X)",
        f"within {BARCODE_TOL:g} relative",
        not failures,
        observed=clouds,
        detail="; ".join(failures[:3]),
    )


def check_delaunay(seed: int, clouds: int = 5, n: int = 60) -> Verdict:
    """Brute-force empty-circumdisc test and Euler characteristic of the planar triangulation."""
    failures = []
    for k in range(clouds):
        tri = delaunay_2d(_square(n, _seed(seed, "delaunay", k)))
        pts = [tuple(p) for p in tri.points.tolist()]
        for a, b, c in tri.triangles.tolist():
            for p in range(len(pts)):
                if p in (a, b, c) or p in tri.duplicates:
                    continue
                if incircle(pts[a], pts[b], pts[c], pts[p]) > 0:
                    failures.append(f"cloud {k}: point {p} inside the circumdisc of ({a}, {b}, {c})")
                    break
        v, e, t = count_delaunay_simplices(tri)
        if v - e + t != 1:
            failures.append(f"cloud {k}: V - E + T = {v - e + t}, expected 1")
    return make_verdict(
        "delaunay_empty_circle",
        "no input point lies strictly inside a Delaunay circumdisc; V - E + T = 1",
        "exact predicates",
        not failures,
        observed=clouds,
        detail="; ".join(failures[:3]),
    )


def check_monotone(seed: int, n: int = 15) -> Verdict:
    """Every builder yields face-monotone filtrations."""
    cloud = _square(n, _seed(seed, "monotone", 0))
    d = pairwise_distances(cloud)
    builders = {
        "alpha2d": lambda: build_alpha_2d(cloud),
        "cech_oracle": lambda: build_cech_oracle(cloud, 3),
        "rips": lambda: build_rips(d, 3, d.diameter()),
    }
    failures = []
    for name, build in builders.items():
        try:
            build().check_monotone()
        except PhSumsError as e:
            failures.append(f"{name}: {e}")
    return make_verdict(
        "face_monotonicity",
        "every face enters no later than its cofaces",
        "exact (1e-12 slack)",
        not failures,
        detail="; ".join(failures),
    )


def check_barcodes(barcodes: Sequence[Barcode]) -> Verdict:
    problems = [p for bc in barcodes for p in bc.violations()]
    return make_verdict(
        "barcode_invariants",
        "every interval satisfies 0 <= b < d < inf",
        "exact",
        not problems,
        observed=len(barcodes),
        detail="; ".join(problems[:3]),
    )


def planted_fault() -> Barcode:
    """A barcode with an interval born after it dies."""
    return Barcode.from_intervals({1: [(0.3, 0.2)]})


def square_experiment(seed: int, sizes: Sequence[int], trials: int, jobs: int, output_dir: Optional[str]):
    """Planar PH_1 runs on the unit square backing the boundedness and count probes."""
    config = validate_config(
        {
            "measure": {"kind": "uniform_cube", "m": 2},
            "complex": {"kind": "alpha2d"},
            "degree": 1,
            "alpha": 1.0,
            "n_grid": sorted(set(sizes)),
            "trials": trials,
            "seed": seed,
            "jobs": jobs,
            **({"output_dir": output_dir} if output_dir else {}),
        }
    )
    items = [(n, t) for n in config.n_grid for t in range(config.trials)]
    table = ScalingTable(run_trials(config, items, jobs=jobs)).sorted()

    verdicts = [
        band_verdict(
            "tail_statistic",
            "|{d - b > delta}| <= C0 delta^(-m) (tail statistic bounded)",
            table,
            "tail_statistic",
            config.band_factor,
        ),
        band_verdict(
            "upper_bound_ratio",
            "E_alpha^i <= C1 |PH_i|^((m-alpha)/m)",
            table,
            "upper_bound_ratio",
            config.band_factor,
        ),
        averaged_bound_verdict(table, config),
    ]
    delaunay = delaunay_verdict(table)
    if delaunay is not None:
        verdicts.append(delaunay)
    verdicts.extend(count_verdicts(table))
    return table, verdicts


def _guarded(name: str, check: Callable[[], Verdict]) -> Verdict:
    try:
        return check()
    except PhSumsError as e:
        logger.error(f"Check {name} raised {e.__class__.__name__}: {e}")
        return make_verdict(name, "check ran to completion", "no errors", False, detail=str(e))


def run_verify(
    seed: int = 0,
    sizes: Sequence[int] = DEFAULT_SIZES,
    inject_fault: bool = False,
    jobs: int = 1,
    trials: Optional[int] = None,
    output_dir: Optional[str] = None,
) -> RunReport:
    """
    Run the whole oracle battery

    Args:
        seed: Master seed for every check
        sizes: Sample sizes of the square PH_1 experiment
        inject_fault: Add a barcode with b > d to the invariant check
        jobs: Worker count for the square experiment
        trials: Trials per size (default: settings.min_trials_per_n)
        output_dir: When given, scaling.csv and report.json are written there

    Returns:
        RunReport whose verdicts cover every check
    """
    started = time.perf_counter()
    trials = trials or settings.min_trials_per_n

    verdicts: List[Verdict] = [
        _guarded("mst_ph0_identity", lambda: check_mst_identity(seed)),
        _guarded("alpha_cech_equivalence", lambda: check_alpha_cech(seed)),
        _guarded("exact_fixtures", check_fixtures),
        _guarded("interleaving", lambda: check_interleaving(seed)),
        _guarded("pairing_soundness", lambda: check_pairing(seed)),
        _guarded("scale_equivariance", lambda: check_scale_equivariance(seed)),
        _guarded("delaunay_empty_circle", lambda: check_delaunay(seed)),
        _guarded("face_monotonicity", lambda: check_monotone(seed)),
    ]
    logger.info(f"Structural checks done in {time.perf_counter() - started:.1f}s")

    table, experiment = square_experiment(seed, sizes, trials, jobs, output_dir)
    verdicts.extend(experiment)

    barcodes = [reduce(build_alpha_2d(_square(n, _seed(seed, "pairing", 100 + k)))) for k, n in enumerate((20, 50, 100))]
    if inject_fault:
        barcodes.append(planted_fault())
    verdicts.append(check_barcodes(barcodes))

    report = RunReport(
        command="verify",
        config={"seed": seed, "sizes": sorted(set(sizes)), "trials": trials, "inject_fault": inject_fault},
        verdicts=verdicts,
        notes=["the square PH_1 experiment uses the planar alpha complex (same barcode as Čech)"],
        wall_clock_seconds=time.perf_counter() - started,
    )
    if output_dir:
        storage = RunStorage(output_dir)
        table.write_csv(storage.path("scaling.csv"))
        report = report.model_copy(update={"table_path": str(storage.path("scaling.csv"))})
        storage.write_model("report.json", report)
    logger.info(f"Verify finished: {len(report.failures())} failure(s) out of {len(verdicts)} verdict(s)")
    return report
