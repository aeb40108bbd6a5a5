import json

import jsonschema
import pytest

from conftest import FIXTURES, ROOT, write_project
from mutest.change_analysis import (
    CoverageFormatError,
    FindingsReport,
    UnknownMutant,
    analyze_change,
    apply_feedback,
    changed_covered_lines,
    load_coverage,
)
from mutest.diff import diff_trees, parse_unified_diff
from mutest.execution import BaselineFailure, evaluate_mutant
from mutest.minilang import Verdict, load_project
from mutest.mutagen import MutantStatus, NodeKind, OperatorKind, SuppressionConfig, candidate_mutants
from mutest.selection import ALL_KEYS, ContextKey, FeedbackVerdict, OperatorStats

DEMO = FIXTURES / "demo"
SCHEMA = json.loads((ROOT / "schemas" / "findings_report.schema.json").read_text())


def demo_report(stats=None, cfg=SuppressionConfig()):
    diff = parse_unified_diff((DEMO / "change.diff").read_text())
    return analyze_change(DEMO / "base", DEMO / "head", diff, load_coverage(DEMO / "coverage.csv"),
                          stats if stats is not None else OperatorStats(), cfg, change_id="demo")


def make_change(tmp_path, base_src, head_src, tests):
    base = write_project(tmp_path / "base", {"m.mini": base_src}, {"m_test.mini": tests})
    head = write_project(tmp_path / "head", {"m.mini": head_src}, {"m_test.mini": tests})
    diff = parse_unified_diff(diff_trees(base, head))
    cov = set()
    load_project(head).run_tests(coverage=cov)
    cov_map = {}
    for p, n in cov:
        cov_map.setdefault(p, set()).add(n)
    return base, head, diff, cov_map


def test_load_coverage(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("file,line\nsrc/a.mini,3\nsrc/a.mini,4\nsrc/b.mini,1\n")
    assert load_coverage(p) == {"src/a.mini": {3, 4}, "src/b.mini": {1}}
    for bad in ("path,line\n", "file,line\nsrc/a.mini,x\n", "file,line\nsrc/a.mini,0\n", ""):
        p.write_text(bad)
        with pytest.raises(CoverageFormatError):
            load_coverage(p)


def _cs(files):
    return parse_unified_diff("".join(
        f"--- a/{path}\n+++ b/{path}\n@@ -0,0 +{lines[0]},{len(lines)} @@\n" + "+x\n" * len(lines)
        for path, lines in files.items()))


def test_changed_covered_lines():
    assert changed_covered_lines(_cs({"a": [10, 11, 12]}), {"a": {11, 12, 50}}) == {"a": {11, 12}}
    assert changed_covered_lines(_cs({"a": [5]}), {}) == {}
    assert changed_covered_lines(_cs({"a": [1], "b": [1]}), {"b": {1}}) == {"b": {1}}


def test_demo_report_invariants():
    report = demo_report()
    d = report.to_dict()
    jsonschema.validate(d, SCHEMA)
    assert report.generated == report.killed + report.live
    lines = [(e.mutant.path, e.mutant.line) for e in report.evaluations]
    assert len(lines) == len(set(lines))
    for path, findings in report.findings.items():
        assert len(findings) <= 7
        assert [f.surfaced_rank for f in findings] == list(range(1, len(findings) + 1))
        assert all(f.mutant.status is MutantStatus.LIVE for f in findings)
        assert all(f.line in report.eligible_lines[path] for f in findings)
    assert sum(len(v) for v in report.eligible_lines.values()) >= 12
    assert len(report.findings["src/stats.mini"]) == 7


def test_demo_never_mutates_logging_lines():
    report = demo_report()
    head = load_project(DEMO / "head")
    for e in report.evaluations:
        line = head.module(e.mutant.path).source_text.splitlines()[e.mutant.line - 1]
        assert "log(" not in line and "print(" not in line
    assert report.suppressed > 0


def test_demo_findings_are_live_against_full_suite():
    report = demo_report()
    head = load_project(DEMO / "head")
    tests = [o.test_name for o in head.run_tests()]
    for f in report.all_findings():
        ev = evaluate_mutant(head, _rebuild(head, f.mutant), tests, fail_fast=False)
        assert [o.test_name for o in ev.outcomes] == tests
        assert not ev.killed


def _rebuild(project, mutant):
    module = project.module(mutant.path)
    return next(m for m in candidate_mutants(module, mutant.line) if m.id == mutant.id)


def test_demo_killing_tests_are_sound():
    report = demo_report()
    head = load_project(DEMO / "head")
    for e in report.evaluations:
        if e.mutant.status is not MutantStatus.KILLED:
            continue
        assert len(e.killing_tests) == 1
        test = e.killing_tests[0]
        base = head.run_tests(select=[test])
        assert base[0].verdict is Verdict.PASS
        mutated = head.with_module(_rebuild(head, e.mutant).mutated_module()).run_tests(select=[test])
        assert mutated[0].verdict.failed


def test_demo_is_deterministic_and_updates_stats():
    s1, s2 = OperatorStats(), OperatorStats()
    a, b = demo_report(s1), demo_report(s2)
    assert a.to_dict() == b.to_dict()
    assert s1 == s2
    assert sum(s1.get(k).generated for k in ALL_KEYS) == a.generated
    assert sum(s1.get(k).survived for k in ALL_KEYS) == a.live
    assert sum(s1.get(k).killed for k in ALL_KEYS) == a.killed


def test_report_round_trip():
    d = demo_report().to_dict()
    assert FindingsReport.from_dict(d).to_dict() == d


def test_single_line_change_with_untested_operand(tmp_path):
    base, head, diff, cov = make_change(
        tmp_path, "fn add(a, b) {\n    return 0;\n}\n", "fn add(a, b) {\n    return a + b;\n}\n",
        "fn test_add() {\n    assert_eq(add(2, 0), 2);\n}\n")
    report = analyze_change(base, head, diff, cov, OperatorStats())
    assert report.eligible_lines == {"src/m.mini": [2]}
    assert report.generated == 1
    assert len(report.all_findings()) == 1
    f = report.all_findings()[0]
    assert (f.line, f.mutant.operator) == (2, OperatorKind.AOR)


def test_cap_at_seven(tmp_path):
    body = "".join(f"    let x{k} = a + {k + 1};\n" for k in range(12))
    head_src = "fn f(a) {\n" + body + "    return 0;\n}\n"
    base, head, diff, cov = make_change(tmp_path, "fn f(a) {\n    return 0;\n}\n", head_src,
                                        "fn test_f() {\n    f(1);\n}\n")
    report = analyze_change(base, head, diff, cov, OperatorStats())
    assert len(report.eligible_lines["src/m.mini"]) == 12
    assert report.live == 12
    findings = report.findings["src/m.mini"]
    assert len(findings) == 7
    assert [f.line for f in findings] == list(range(2, 9))


def test_all_killed_gives_no_findings(tmp_path):
    base, head, diff, cov = make_change(
        tmp_path, "fn f(a) {\n    return a;\n}\n", "fn f(a) {\n    return a * 3;\n}\n",
        "fn test_f() {\n    assert_eq(f(2), 6);\n    assert_eq(f(5), 15);\n}\n")
    report = analyze_change(base, head, diff, cov, OperatorStats())
    assert report.generated == report.killed == 1
    assert report.all_findings() == []


def test_uncovered_lines_are_skipped_unless_configured(tmp_path):
    base, head, diff, cov = make_change(
        tmp_path, "fn f(a) {\n    return a;\n}\n",
        "fn f(a) {\n    if (a > 100) {\n        a = a - 1;\n    }\n    return a;\n}\n",
        "fn test_f() {\n    assert_eq(f(2), 2);\n}\n")
    covered = analyze_change(base, head, diff, cov, OperatorStats())
    assert covered.eligible_lines == {"src/m.mini": [2]}
    everything = analyze_change(base, head, diff, cov, OperatorStats(),
                                SuppressionConfig(suppress_uncovered=False))
    assert everything.eligible_lines == {"src/m.mini": [2, 3, 4]}


def test_broken_baseline_aborts(tmp_path):
    base, head, diff, cov = make_change(
        tmp_path, "fn f() {\n    return 1;\n}\n", "fn f() {\n    return 2;\n}\n",
        "fn test_f() {\n    assert_eq(f(), 1);\n}\n")
    with pytest.raises(BaselineFailure):
        analyze_change(base, head, diff, cov, OperatorStats())


def test_feedback():
    stats = OperatorStats()
    report = demo_report(stats)
    ror = next(f for f in report.all_findings() if f.mutant.operator is OperatorKind.ROR)
    key = ContextKey(OperatorKind.ROR, NodeKind.BINARY_RELATIONAL)
    apply_feedback(report, ror.mutant.id, FeedbackVerdict.PLEASE_FIX, stats)
    assert stats.get(key).please_fix == 1
    apply_feedback(report, ror.mutant.id, FeedbackVerdict.NOT_USEFUL, stats)
    assert stats.get(key).not_useful == 1
    with pytest.raises(UnknownMutant):
        apply_feedback(report, "0" * 16, FeedbackVerdict.NOT_USEFUL, stats)


def test_feedback_on_sbr_finding(tmp_path):
    base, head, diff, cov = make_change(
        tmp_path, "fn f(a) {\n    return a;\n}\n",
        "fn noop() {\n    return 0;\n}\n\nfn f(a) {\n    noop();\n    return a;\n}\n",
        "fn test_f() {\n    assert_eq(f(2), 2);\n}\n")
    stats = OperatorStats()
    report = analyze_change(base, head, diff, cov, stats)
    sbr = [f for f in report.all_findings() if f.mutant.operator is OperatorKind.SBR]
    assert len(sbr) == 1
    apply_feedback(report, sbr[0].mutant.id, FeedbackVerdict.NOT_USEFUL, stats)
    assert stats.get(ContextKey(OperatorKind.SBR, NodeKind.STATEMENT)).not_useful == 1
