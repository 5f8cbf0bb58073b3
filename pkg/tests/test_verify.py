import json

import pytest

from app.main import main
from app.verify import check_barcodes, check_fixtures, planted_fault, run_verify


@pytest.fixture(scope="module")
def small_report():
    return run_verify(seed=0, sizes=[64], trials=2)


def test_structural_checks_pass(small_report):
    by_name = {v.name: v for v in small_report.verdicts}
    for name in [
        "mst_ph0_identity",
        "alpha_cech_equivalence",
        "exact_fixtures",
        "interleaving",
        "pairing_soundness",
        "scale_equivariance",
        "delaunay_empty_circle",
        "face_monotonicity",
        "barcode_invariants",
        "delaunay_count",
        "averaged_bound",
    ]:
        assert by_name[name].status == "pass", by_name[name]
    assert small_report.passed


def test_single_size_skips_the_count_slopes(small_report):
    by_name = {v.name: v for v in small_report.verdicts}
    assert by_name["linear_ph_count"].status == "skipped"
    assert by_name["tail_statistic"].status == "skipped"


def test_every_verdict_names_its_claim(small_report):
    for v in small_report.verdicts:
        assert v.claim
        assert v.tolerance


def test_planted_fault_is_caught():
    verdict = check_barcodes([planted_fault()])
    assert verdict.status == "fail"
    assert "birth not before death" in verdict.detail


def test_fixtures_alone():
    assert check_fixtures().status == "pass"


def test_verify_command_exit_code_with_fault(tmp_path, capsys):
    code = main(
        ["verify", "--sizes", "32", "--trials", "2", "--inject-fault", "--out", str(tmp_path), "--format", "json"]
    )
    assert code == 1
    report = json.loads(capsys.readouterr().out)
    failed = {v["name"] for v in report["verdicts"] if v["status"] == "fail"}
    assert "barcode_invariants" in failed
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "scaling.csv").exists()
