"""Verification runners: verdict algebra, determinism, serialization."""

import csv
import io
import json

import pytest

from uniset.errors import DomainError
from uniset.reports import (
    THEOREM_IDS,
    Check,
    Report,
    _fail_verdict,
    _match,
    all_confirmed,
    reports_to_csv,
    reports_to_json,
    reports_to_text,
    run_formula_suite,
    run_verify_theorem,
)


def _check(verdict):
    return Check("x", verdict, "1", "1")


def test_report_verdict_precedence():
    base = [_check("confirmed")]
    assert Report("r", {}, tuple(base)).verdict == "confirmed"
    assert Report("r", {}, tuple(base + [_check("exploratory")])).verdict == "exploratory"
    assert Report(
        "r", {}, tuple(base + [_check("exploratory"), _check("inconclusive")])
    ).verdict == "inconclusive"
    assert Report(
        "r", {}, tuple(base + [_check("inconclusive"), _check("refuted")])
    ).verdict == "refuted"


def test_match_and_fail_verdict():
    assert _fail_verdict(True) == "refuted"
    assert _fail_verdict(False) == "exploratory"
    ok = _match("a", 3, 3, False)
    assert ok.verdict == "confirmed" and ok.observed == "3"
    bad_in = _match("a", 3, 4, True, counterexample={"w": "1"})
    assert bad_in.verdict == "refuted" and bad_in.counterexample == {"w": "1"}
    bad_out = _match("a", 3, 4, False)
    assert bad_out.verdict == "exploratory" and bad_out.counterexample is None


def test_unknown_theorem_id():
    with pytest.raises(DomainError):
        run_verify_theorem("fermat")
    with pytest.raises(DomainError):
        run_verify_theorem("sporadic", 2, 4, 1)  # needs k = t+2
    with pytest.raises(DomainError):
        run_verify_theorem("product", 3, 3, 0)


def test_theorem_catalog_runs_confirmed(tmp_path):
    # defaults: product/sum at (3,3,1), sporadic at (2,3,1), hm at (6,5,1)
    for tid in THEOREM_IDS:
        report = run_verify_theorem(tid, samples=400)
        assert report.verdict == "confirmed", (tid, report.checks)
        assert report.runtime_ms is None


def test_product_out_of_hypothesis_is_exploratory(u23):
    report = run_verify_theorem("product", 2, 3, 1, method="exhaustive")
    assert report.params["hypothesis_ok"] == "false"
    assert report.verdict == "exploratory"
    by_id = {c.check_id: c.verdict for c in report.checks}
    # the value bound still matches; only the optima shapes stray (C52 ties)
    assert by_id["max-product-value"] == "confirmed"
    assert by_id["optima-all-star"] == "exploratory"


def test_sum_out_of_hypothesis_still_matches(u23):
    report = run_verify_theorem("sum", 2, 3, 1, method="exhaustive")
    assert report.params["hypothesis_ok"] == "false"
    assert report.verdict == "confirmed"


def test_sporadic_evidence_frozen():
    report = run_verify_theorem("sporadic")
    assert report.verdict == "confirmed"
    assert report.evidence["concepts"] == "67"
    assert report.evidence["filtered"] == "25"
    assert report.evidence["classes"] == {"C52": "10", "SingletonBall": "15"}
    assert report.evidence["anchor-systems"] == "0"


def test_inequalities_evidence_frozen():
    report = run_verify_theorem("inequalities")
    assert report.verdict == "confirmed"
    assert report.evidence["total"] == "16356"
    assert report.evidence["instances"]["6.1i"] == "11065"
    assert report.evidence["instances"]["6.4iii"] == "66"
    by_id = {c.check_id: c for c in report.checks}
    eq = by_id["equality-cases-6.4iii"]
    assert eq.verdict == "confirmed"
    assert eq.observed == "k=4,t=1; k=5,t=1; k=5,t=2"


def test_json_deterministic_and_stringly():
    a = run_verify_theorem("class-identity")
    b = run_verify_theorem("class-identity")
    ja, jb = reports_to_json([a]), reports_to_json([b])
    assert ja == jb
    doc = json.loads(ja)
    assert doc["schema"] == "uniset-report/1"
    (rep,) = doc["reports"]
    assert rep["verdict"] == "confirmed"
    for check in rep["checks"]:
        assert isinstance(check["observed"], str)
        assert "runtime_ms" not in rep


def test_csv_matches_checks():
    report = run_verify_theorem("construction-sizes")
    rows = list(csv.reader(io.StringIO(reports_to_csv([report]))))
    assert rows[0] == ["kind", "params", "check", "verdict", "observed", "expected", "detail"]
    assert len(rows) == 1 + len(report.checks)
    for row, check in zip(rows[1:], report.checks):
        assert row[2] == check.check_id
        assert row[3] == check.verdict
        assert row[4] == check.observed


def test_text_rendering_and_all_confirmed():
    report = run_verify_theorem("class-identity")
    text = reports_to_text([report])
    assert text.startswith("class-identity")
    assert "[confirmed]" in text
    assert all_confirmed([report])
    downer = Report("r", {}, (_check("inconclusive"),))
    assert not all_confirmed([report, downer])


def test_hm_sampling_is_seeded():
    a = run_verify_theorem("hm", samples=200, seed=9)
    b = run_verify_theorem("hm", samples=200, seed=9)
    assert reports_to_json([a]) == reports_to_json([b])
    assert a.evidence["samples"] == {"N1": "68", "N2": "66", "N3": "66"}


def test_formula_suite_kinds():
    reports = run_formula_suite()
    assert [r.kind for r in reports] == [
        "theta-enumeration",
        "class-identity",
        "inequalities",
        "construction-sizes",
    ]
    assert all_confirmed(reports)
