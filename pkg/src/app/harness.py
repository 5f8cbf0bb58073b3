"""
Scaling and dimension experiments: config loading, feasibility, verdicts.
"""

import logging
import time
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import yaml
from pydantic import ValidationError

from worker.statistics import (
    ScalingTable,
    averaged_bound_check,
    estimate_dimension,
    fit_against_log_n,
    fit_loglog,
    fit_variance_loglog,
)
from worker.tasks import run_trials

from .config import settings
from .errors import ConfigError, InsufficientDataError
from .schemas.experiment import ExperimentConfig, RunReport, Verdict
from .schemas.statistics import DimensionEstimate, RegressionResult
from .storage import RunStorage

logger = logging.getLogger(__name__)

COUNT_SLOPE_TOLERANCE = 0.1
VARIANCE_SLOPE_MAX = 1.5


def load_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Read an experiment config (.toml, .yaml or .yml) and apply CLI overrides

    Args:
        path: Config file path
        overrides: Top-level keys replacing file values (None values are ignored)

    Returns:
        Validated ExperimentConfig
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}")

    try:
        if path.suffix == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        elif path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(raw) or {}
        else:
            raise ConfigError(f"Unsupported config format {path.suffix!r}; use .toml or .yaml")
    except (tomllib.TOMLDecodeError, yaml.YAMLError, UnicodeDecodeError) as e:
        raise ConfigError(f"Cannot parse config {path}: {e}")

    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must be a mapping at the top level")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return validate_config(data)


def validate_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config: {e}")


def size_cap(config: ExperimentConfig) -> int:
    if config.degree == 0:
        return settings.mst_max_points
    return {
        "alpha2d": settings.alpha2d_max_points,
        "rips": settings.rips_max_points,
        "cech_oracle": settings.cech_oracle_max_points,
    }[config.complex.kind]


def check_feasibility(config: ExperimentConfig) -> None:
    """Raise ConfigError when the complex cannot be built for this measure or grid"""
    space = config.measure.space
    kind = config.complex.kind
    if config.degree >= 1:
        if kind == "alpha2d" and (space.kind != "euclidean" or space.ambient_dim != 2):
            raise ConfigError(
                f"alpha2d needs a measure in R^2, got {space.kind} with ambient dimension {space.ambient_dim}"
            )
        if kind == "cech_oracle" and space.kind != "euclidean":
            raise ConfigError("the Čech oracle needs a Euclidean measure")
        if space.kind == "sphere" and kind != "rips":
            raise ConfigError("sphere measures with degree >= 1 use the geodesic Rips complex")
    cap = size_cap(config)
    largest = max(config.n_grid)
    if largest > cap:
        path = "MST" if config.degree == 0 else kind
        raise ConfigError(f"n={largest} exceeds the {path} cap of {cap} points")


# Verdicts


def make_verdict(name: str, claim: str, tolerance: str, ok: Optional[bool], observed=None, detail: str = "") -> Verdict:
    status = "skipped" if ok is None else ("pass" if ok else "fail")
    return Verdict(name=name, claim=claim, tolerance=tolerance, status=status, observed=observed, detail=detail)


def _largest_n_quorum(table: ScalingTable, fit: RegressionResult, config: ExperimentConfig) -> Verdict:
    claim = "E_alpha^i / n^((m-alpha)/m) converges in probability (trial values cluster around the fit)"
    tolerance = f">= {config.quorum:.0%} of largest-n trials within +/-{config.quorum_band:.0%} of the fit"
    n = max(table.n_values())
    values = table.column("e_alpha", n)
    if len(values) < settings.min_trials_per_n:
        return make_verdict("quorum", claim, tolerance, None, detail=f"only {len(values)} trial(s) at n={n}")
    centre = fit.predict(n)
    inside = np.abs(values - centre) <= config.quorum_band * centre
    fraction = float(inside.mean())
    return make_verdict("quorum", claim, tolerance, fraction >= config.quorum, observed=fraction)


def band_verdict(name: str, claim: str, table: ScalingTable, response: str, factor: float) -> Verdict:
    """Per-n means stay below factor x the smallest-n mean."""
    tolerance = f"within {factor:g}x of the smallest-n value"
    ns, means = table.group_means(response)
    if len(ns) < 2:
        return make_verdict(name, claim, tolerance, None, detail="needs at least two sample sizes")
    base = means[0]
    if not base > 0:
        return make_verdict(name, claim, tolerance, False, observed=means.tolist(), detail="smallest-n value is 0")
    ratios = means / base
    ok = bool(np.all(ratios <= factor))
    return make_verdict(name, claim, tolerance, ok, observed=[round(float(r), 6) for r in ratios])


def _log_regime_verdict(table: ScalingTable, factor: float) -> Verdict:
    claim = "E_m^i / log n stays bounded"
    tolerance = f"within {factor:g}x of the smallest-n value"
    ns, means = table.group_means("e_alpha")
    if len(ns) < 2:
        return make_verdict("log_regime_band", claim, tolerance, None, detail="needs at least two sample sizes")
    ratios = means / np.log(ns)
    base = ratios[0]
    ok = bool(base > 0 and np.all(ratios <= factor * base) and np.all(ratios >= base / factor))
    return make_verdict("log_regime_band", claim, tolerance, ok, observed=[float(r) for r in ratios])


def count_verdicts(table: ScalingTable, variance_min_trials: Optional[int] = None) -> List[Verdict]:
    """
    Linear growth of E|PH_i| and of Var|PH_i|.
    The variance fit is only judged when every n has variance_min_trials trials.
    """
    if variance_min_trials is None:
        variance_min_trials = settings.variance_min_trials
    out = []
    claim = "E|PH_i| grows linearly in n"
    tolerance = f"log-log slope 1 +/- {COUNT_SLOPE_TOLERANCE}"
    try:
        fit = fit_loglog(table, "ph_count")
        out.append(
            make_verdict("linear_ph_count", claim, tolerance, abs(fit.slope - 1.0) <= COUNT_SLOPE_TOLERANCE, fit.slope)
        )
    except InsufficientDataError as e:
        out.append(make_verdict("linear_ph_count", claim, tolerance, None, detail=str(e)))

    claim = "Var|PH_i| grows at most linearly in n"
    tolerance = f"log-log slope of the variance <= {VARIANCE_SLOPE_MAX}, >= {variance_min_trials} trials per n"
    fewest = min(table.trials_per_n().values(), default=0)
    if fewest < variance_min_trials:
        out.append(
            make_verdict(
                "linear_ph_variance", claim, tolerance, None, observed=fewest, detail=f"only {fewest} trial(s) at some n"
            )
        )
        return out
    try:
        fit = fit_variance_loglog(table, "ph_count")
        out.append(make_verdict("linear_ph_variance", claim, tolerance, fit.slope <= VARIANCE_SLOPE_MAX, fit.slope))
    except InsufficientDataError as e:
        out.append(make_verdict("linear_ph_variance", claim, tolerance, None, detail=str(e)))
    return out


def delaunay_verdict(table: ScalingTable) -> Optional[Verdict]:
    rows = [r for r in table.rows if r.ph_total is not None and r.delaunay_simplices is not None]
    if not rows:
        return None
    bad = [(r.n, r.trial) for r in rows if r.ph_total > r.delaunay_simplices]
    return make_verdict(
        "delaunay_count",
        "|PH_0| + |PH_1| <= number of Delaunay simplices",
        "exact (integer counts), every trial",
        not bad,
        observed=len(rows) - len(bad),
        detail=f"violations at {bad[:5]}" if bad else "",
    )


def averaged_bound_verdict(table: ScalingTable, config: ExperimentConfig) -> Verdict:
    claim = "E(E_alpha^i) <= C E(|PH_i|)^((m-alpha)/m) with C the per-instance bound"
    tolerance = "exact up to 1e-12 relative, every n"
    m = config.intrinsic_dim
    failures = []
    for n in table.n_values():
        check = averaged_bound_check(table.column("e_alpha", n), table.column("ph_count", n), m, config.alpha)
        if not check.holds:
            failures.append(n)
    return make_verdict("averaged_bound", claim, tolerance, not failures, detail=f"fails at n={failures}" if failures else "")


def _lower_window_verdict(table: ScalingTable, config: ExperimentConfig) -> Verdict:
    w = config.window
    claim = "N(omega b0, omega d0) / n is bounded below, omega = (n0/n)^(1/m)"
    tolerance = f"every n within 1/{config.band_factor:g} of the smallest-n value (b0={w.b0}, d0={w.d0}, n0={w.n0})"
    ns, means = table.group_means("n_spanning")
    if len(ns) < 2:
        return make_verdict("lower_window", claim, tolerance, None, detail="needs at least two sample sizes")
    per_point = means / ns
    base = per_point[0]
    if not base > 0:
        return make_verdict(
            "lower_window",
            claim,
            tolerance,
            None,
            observed=[float(v) for v in per_point],
            detail=f"no window events observed at n={int(ns[0])}; raise n0 or trials",
        )
    ok = bool(np.all(per_point >= base / config.band_factor))
    return make_verdict("lower_window", claim, tolerance, ok, observed=[float(v) for v in per_point])


def scaling_verdicts(
    table: ScalingTable, config: ExperimentConfig
) -> "tuple[Optional[RegressionResult], List[Verdict]]":
    """Fit the table and build every verdict the regime supports"""
    verdicts: List[Verdict] = []
    regression: Optional[RegressionResult] = None
    m = config.intrinsic_dim
    regime = config.regime

    if len(table.n_values()) < 3:
        verdicts.append(
            make_verdict(
                "insufficient_n",
                "scaling fits need at least three sample sizes",
                ">= 3 distinct n",
                None,
                observed=len(table.n_values()),
                detail="no regression fitted",
            )
        )
        return None, verdicts

    if regime == "power":
        regression = fit_loglog(table, "e_alpha")
        expected = config.expected_slope
        verdicts.append(
            make_verdict(
                "exponent",
                f"E_alpha^i grows like n^((m-alpha)/m) = n^{expected:.4g}",
                f"|slope - {expected:.4g}| <= {config.slope_tolerance}",
                abs(regression.slope - expected) <= config.slope_tolerance,
                observed=regression.slope,
                detail=f"r^2 = {regression.r_squared:.4f}",
            )
        )
        verdicts.append(_largest_n_quorum(table, regression, config))
        verdicts.append(averaged_bound_verdict(table, config))
    elif regime == "log":
        regression = fit_against_log_n(table, "e_alpha")
        verdicts.append(_log_regime_verdict(table, config.band_factor))
    else:
        regression = fit_loglog(table, "e_alpha")
        verdicts.append(
            band_verdict(
                "bounded_regime", f"E_alpha^i stays bounded for alpha > m = {m}", table, "e_alpha", config.band_factor
            )
        )

    verdicts.extend(count_verdicts(table))
    verdicts.append(
        band_verdict(
            "tail_statistic",
            "|{d - b > delta}| <= C0 delta^(-m) (tail statistic bounded)",
            table,
            "tail_statistic",
            config.band_factor,
        )
    )
    verdicts.append(
        band_verdict(
            "upper_bound_ratio",
            "E_alpha^i <= C1 |PH_i|^((m-alpha)/m) (or D1 log|PH_i| when alpha = m)",
            table,
            "upper_bound_ratio",
            config.band_factor,
        )
    )
    verdicts.append(_lower_window_verdict(table, config))
    delaunay = delaunay_verdict(table)
    if delaunay is not None:
        verdicts.append(delaunay)
    return regression, verdicts


def _notes(config: ExperimentConfig, table: ScalingTable) -> List[str]:
    notes = [
        "intervals with birth == death are dropped; E_alpha sums finite intervals only",
    ]
    if config.measure.space.kind == "sphere" and config.degree >= 1:
        notes.append("sphere runs use the geodesic Rips complex as a stand-in for the intrinsic Čech complex")
    essential = sum(r.essential_count for r in table.rows)
    if essential:
        notes.append(f"{essential} essential class(es) above degree 0 from truncation were excluded")
    return notes


def run_scaling(config: ExperimentConfig) -> RunReport:
    """
    Run every (n, trial) of the grid, resuming stored trials, then fit and judge

    Outputs (under config.output_dir):
        trials/*.json, scaling.csv, timings.csv, regression.json, report.json
    """
    check_feasibility(config)
    started = time.perf_counter()
    storage = RunStorage(config.output_dir)
    storage.bind_config(config.model_dump(mode="json"))

    rows = []
    pending = []
    for n in config.n_grid:
        for trial in range(config.trials):
            row = storage.load_trial(n, trial)
            if row is None:
                pending.append((n, trial))
            else:
                rows.append(row)
    if rows:
        logger.info(f"Resuming: {len(rows)} stored trial(s), {len(pending)} to run")

    rows.extend(run_trials(config, pending, jobs=config.jobs, on_result=storage.save_trial))
    table = ScalingTable(rows).sorted()
    table.write_csv(storage.path("scaling.csv"))
    table.write_timings_csv(storage.path("timings.csv"))

    regression, verdicts = scaling_verdicts(table, config)
    if regression is not None:
        storage.write_model("regression.json", regression)

    report = RunReport(
        command="scaling",
        config=config.model_dump(mode="json"),
        table_path=str(storage.path("scaling.csv")),
        regression=regression,
        verdicts=verdicts,
        notes=_notes(config, table),
        wall_clock_seconds=time.perf_counter() - started,
    )
    storage.write_model("report.json", report)
    logger.info(f"Scaling run finished: {len(verdicts)} verdict(s), passed={report.passed}")
    return report


def _dimension_verdict(estimate: DimensionEstimate, config: ExperimentConfig) -> Verdict:
    m = config.intrinsic_dim
    tol = config.dimension_tolerance * m
    return make_verdict(
        "dimension",
        f"the PH_{config.degree}-dimension of the measure equals m = {m}",
        f"|m_hat - {m}| <= {tol:.3g}",
        abs(estimate.m_hat - m) <= tol,
        observed=estimate.m_hat,
    )


def scan_dimension(config: ExperimentConfig, alphas: List[float]) -> List[DimensionEstimate]:
    """Dimension estimates at several alpha, each from its own scaling run in a sub-directory"""
    estimates = []
    for alpha in alphas:
        sub = config.model_copy(update={"alpha": alpha, "output_dir": str(Path(config.output_dir) / f"alpha_{alpha:g}")})
        report = run_scaling(sub)
        if report.regression is None:
            raise InsufficientDataError("dimension scan needs at least three sample sizes")
        estimates.append(estimate_dimension(report.regression, alpha))
    return estimates


def run_dimension(config: ExperimentConfig) -> RunReport:
    """run_scaling, then m_hat = alpha / (1 - slope); optionally scanned over config.alpha_scan"""
    m = config.intrinsic_dim
    bad = [a for a in [config.alpha] + config.alpha_scan if not a < m]
    if bad:
        raise ConfigError(f"dimension estimation needs alpha < m = {m}, got {bad}")
    if len(config.n_grid) < 3:
        raise InsufficientDataError("dimension estimation needs at least three sample sizes")

    started = time.perf_counter()
    report = run_scaling(config)
    if report.regression is None:
        raise InsufficientDataError("no regression could be fitted")

    estimate = estimate_dimension(report.regression, config.alpha)
    verdicts = list(report.verdicts) + [_dimension_verdict(estimate, config)]

    scan: List[DimensionEstimate] = []
    if config.alpha_scan:
        scan = scan_dimension(config, config.alpha_scan)
        spread = max(e.m_hat for e in scan) - min(e.m_hat for e in scan)
        tol = 2 * config.dimension_tolerance * config.intrinsic_dim
        verdicts.append(
            make_verdict(
                "dimension_scan",
                "m_hat does not depend on the alpha used",
                f"max - min over alpha <= {tol:.3g}",
                spread <= tol,
                observed=spread,
            )
        )

    result = report.model_copy(
        update={
            "command": "dimension",
            "dimension": estimate,
            "dimension_scan": scan,
            "verdicts": verdicts,
            "wall_clock_seconds": time.perf_counter() - started,
        }
    )
    RunStorage(config.output_dir).write_model("report.json", result)
    return result
