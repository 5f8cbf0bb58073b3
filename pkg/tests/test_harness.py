import json

import pytest

import app.harness
from app.errors import ConfigError, InsufficientDataError
from app.harness import (
    band_verdict,
    check_feasibility,
    count_verdicts,
    delaunay_verdict,
    load_config,
    run_dimension,
    run_scaling,
    scaling_verdicts,
    validate_config,
)
from app.schemas.statistics import ScalingRow
from worker.statistics import ScalingTable

SQUARE_TOML = """\
degree = 0
alpha = 1.0
n_grid = [16, 32, 64]
trials = 2
seed = 11

[measure]
kind = "uniform_cube"
m = 2
"""


def write_config(tmp_path, text=SQUARE_TOML, name="square.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def square(tmp_path, **changes):
    data = {
        "measure": {"kind": "uniform_cube", "m": 2},
        "degree": 0,
        "n_grid": [16, 32, 64],
        "trials": 2,
        "seed": 11,
        "output_dir": str(tmp_path / "run"),
    }
    data.update(changes)
    return validate_config(data)


# Config files


def test_load_toml_with_overrides(tmp_path):
    config = load_config(write_config(tmp_path), {"seed": 99, "jobs": None})
    assert config.seed == 99
    assert config.n_grid == [16, 32, 64]
    assert config.regime == "power"
    assert config.expected_slope == 0.5


def test_load_yaml(tmp_path):
    text = "measure: {kind: uniform_sphere, m: 2}\ndegree: 1\nalpha: 2.0\ncomplex: {kind: rips}\n"
    config = load_config(write_config(tmp_path, text, "sphere.yaml"))
    assert config.measure.space.kind == "sphere"
    assert config.regime == "log"


@pytest.mark.parametrize(
    "name,text",
    [
        ("square.json", "{}"),
        ("bad.toml", "degree = "),
        ("list.yaml", "- 1\n- 2\n"),
        # degree must stay below the intrinsic dimension
        ("deep.toml", SQUARE_TOML.replace("degree = 0", "degree = 2")),
    ],
)
def test_bad_configs(tmp_path, name, text):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, text, name))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.toml")


def test_feasibility(tmp_path):
    with pytest.raises(ConfigError):
        check_feasibility(square(tmp_path, measure={"kind": "uniform_cube", "m": 3}, degree=1))
    with pytest.raises(ConfigError):
        check_feasibility(square(tmp_path, measure={"kind": "uniform_sphere", "m": 2}, degree=1))
    with pytest.raises(ConfigError):
        check_feasibility(square(tmp_path, degree=1, complex={"kind": "cech_oracle"}, n_grid=[16, 64]))
    check_feasibility(square(tmp_path, degree=1, complex={"kind": "cech_oracle"}, n_grid=[8, 16, 32]))
    check_feasibility(square(tmp_path, measure={"kind": "uniform_sphere", "m": 2}, degree=1, complex={"kind": "rips"}))


# Verdict builders


def rows(values, field="e_alpha"):
    out = []
    for n, per_trial in values.items():
        for t, v in enumerate(per_trial):
            data = {"n": n, "trial": t, "e_alpha": 1.0, "ph_count": n, "n_spanning": 0}
            data[field] = v
            out.append(ScalingRow(**data))
    return ScalingTable(out)


def test_band_verdict_is_an_upper_bound():
    table = rows({16: [2.0], 32: [1.0], 64: [5.0]}, "tail_statistic")
    assert band_verdict("tail", "claim", table, "tail_statistic", 3.0).status == "pass"
    table = rows({16: [1.0], 32: [1.0], 64: [5.0]}, "tail_statistic")
    verdict = band_verdict("tail", "claim", table, "tail_statistic", 3.0)
    assert verdict.status == "fail"
    assert verdict.observed == [1.0, 1.0, 5.0]


def test_band_verdict_skips_single_size():
    assert band_verdict("tail", "claim", rows({16: [1.0]}, "tail_statistic"), "tail_statistic", 3.0).status == "skipped"


def test_count_verdicts_on_linear_counts():
    table = ScalingTable(
        [ScalingRow(n=n, trial=t, e_alpha=1.0, ph_count=n + t, n_spanning=0) for n in (16, 32, 64, 128) for t in range(3)]
    )
    by_name = {v.name: v for v in count_verdicts(table, variance_min_trials=3)}
    assert by_name["linear_ph_count"].status == "pass"
    assert by_name["linear_ph_variance"].status == "pass"


def test_variance_verdict_waits_for_enough_trials():
    # variance grows like n^2 here, but five trials per n are too few to judge
    table = ScalingTable(
        [ScalingRow(n=n, trial=t, e_alpha=1.0, ph_count=n * (1 + t), n_spanning=0) for n in (16, 32, 64) for t in range(5)]
    )
    verdict = {v.name: v for v in count_verdicts(table)}["linear_ph_variance"]
    assert verdict.status == "skipped"
    assert verdict.observed == 5
    assert {v.name: v for v in count_verdicts(table, variance_min_trials=5)}["linear_ph_variance"].status == "fail"


def test_lower_window_without_events_is_skipped(tmp_path):
    _, verdicts = scaling_verdicts(rows({16: [0, 0], 32: [0, 0], 64: [0, 0]}, "n_spanning"), square(tmp_path))
    verdict = {v.name: v for v in verdicts}["lower_window"]
    assert verdict.status == "skipped"
    assert "no window events" in verdict.detail


def test_lower_window_per_point_band(tmp_path):
    config = square(tmp_path)
    _, verdicts = scaling_verdicts(rows({16: [2, 2], 32: [3, 3], 64: [6, 6]}, "n_spanning"), config)
    assert {v.name: v for v in verdicts}["lower_window"].status == "pass"
    _, verdicts = scaling_verdicts(rows({16: [4, 4], 32: [1, 1], 64: [1, 1]}, "n_spanning"), config)
    assert {v.name: v for v in verdicts}["lower_window"].status == "fail"


def test_delaunay_verdict_only_for_alpha_rows():
    assert delaunay_verdict(rows({16: [1.0]})) is None
    table = ScalingTable([ScalingRow(n=8, trial=0, e_alpha=1.0, ph_count=3, n_spanning=0, ph_total=9, delaunay_simplices=8)])
    assert delaunay_verdict(table).status == "fail"


# Runs


def test_single_size_run_skips_the_fits(tmp_path):
    report = run_scaling(square(tmp_path, n_grid=[16], trials=1))
    assert report.regression is None
    assert [(v.name, v.status) for v in report.verdicts] == [("insufficient_n", "skipped")]
    lines = (tmp_path / "run" / "scaling.csv").read_text().splitlines()
    assert len(lines) == 2
    assert (tmp_path / "run" / "report.json").exists()


def test_runs_are_reproducible(tmp_path):
    a = run_scaling(square(tmp_path, output_dir=str(tmp_path / "a")))
    b = run_scaling(square(tmp_path, output_dir=str(tmp_path / "b"), jobs=2))
    assert (tmp_path / "a" / "scaling.csv").read_bytes() == (tmp_path / "b" / "scaling.csv").read_bytes()
    assert a.regression.slope == b.regression.slope
    assert {v.name for v in a.verdicts} >= {"exponent", "quorum", "averaged_bound", "lower_window"}


def test_resume_skips_stored_trials(tmp_path, monkeypatch):
    config = square(tmp_path)
    first = run_scaling(config)

    def no_pending(config, items, jobs=1, on_result=None):
        assert list(items) == []
        return []

    monkeypatch.setattr(app.harness, "run_trials", no_pending)
    second = run_scaling(config.model_copy(update={"slope_tolerance": 0.2}))
    assert second.regression.slope == first.regression.slope
    saved = json.loads((tmp_path / "run" / "report.json").read_text())
    assert saved["command"] == "scaling"


def test_a_run_directory_holds_one_experiment(tmp_path):
    run_scaling(square(tmp_path, n_grid=[16], trials=1))
    with pytest.raises(ConfigError):
        run_scaling(square(tmp_path, n_grid=[16], trials=1, seed=12))


def test_dimension_preconditions(tmp_path):
    with pytest.raises(ConfigError):
        run_dimension(square(tmp_path, alpha=2.0))
    with pytest.raises(ConfigError):
        run_dimension(square(tmp_path, alpha_scan=[0.5, 3.0]))
    with pytest.raises(InsufficientDataError):
        run_dimension(square(tmp_path, n_grid=[16, 32]))
    # nothing was run
    assert not (tmp_path / "run").exists()


def test_dimension_run_with_scan(tmp_path):
    report = run_dimension(square(tmp_path, alpha_scan=[0.5, 1.0]))
    assert report.command == "dimension"
    assert report.dimension.alpha_used == 1.0
    assert len(report.dimension_scan) == 2
    assert {"dimension", "dimension_scan"} <= {v.name for v in report.verdicts}
    assert (tmp_path / "run" / "alpha_0.5" / "scaling.csv").exists()
    saved = json.loads((tmp_path / "run" / "report.json").read_text())
    assert saved["command"] == "dimension"
