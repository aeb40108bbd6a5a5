"""Code-review flow: diff -> covered changed lines -> one mutant per line ->
evaluation -> at most seven live findings per file."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .diff import ChangeSet
from .execution import MutantEvaluation, evaluate_mutants, require_green_baseline
from .minilang.interp import DEFAULT_STEP_BUDGET
from .minilang.project import load_project
from .minilang.syntax import Span
from .mutagen import (
    Mutant,
    MutantStatus,
    MutationPoint,
    NodeKind,
    OperatorKind,
    SuppressionConfig,
    candidate_mutants,
    suppressed_points,
)
from .reports import SCHEMA_VERSION
from .selection import (
    ContextKey,
    Event,
    FeedbackVerdict,
    OperatorStats,
    score_operator,
    select_mutant_for_line,
)

MAX_FINDINGS_PER_FILE = 7


class CoverageFormatError(Exception):
    pass


class UnknownMutant(KeyError):
    def __str__(self) -> str:
        return f"mutant {self.args[0]!r} is not a finding in this report"


CoverageMap = dict[str, set[int]]


def load_coverage(path: str | Path) -> CoverageMap:
    """Read a ``file,line`` CSV of covered head-version lines."""
    cov: CoverageMap = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["file", "line"]:
            raise CoverageFormatError(f"{path}: expected header 'file,line'")
        for row in reader:
            if not row:
                continue
            try:
                file, line = row[0].strip(), int(row[1])
            except (IndexError, ValueError) as e:
                raise CoverageFormatError(f"{path}:{reader.line_num}: bad record {row!r}") from e
            if line < 1:
                raise CoverageFormatError(f"{path}:{reader.line_num}: line numbers start at 1")
            cov.setdefault(file, set()).add(line)
    return cov


def changed_covered_lines(cs: ChangeSet, cov: CoverageMap) -> dict[str, set[int]]:
    """Added or edited head lines that tests cover, per file."""
    result = {}
    for f in cs.files:
        lines = f.added_lines & cov.get(f.path, set())
        if lines:
            result[f.path] = lines
    return result


@dataclass
class Finding:
    mutant: Mutant
    file: str
    line: int
    surfaced_rank: int
    score: float

    def to_dict(self) -> dict:
        return {
            "surfaced_rank": self.surfaced_rank,
            "file": self.file,
            "line": self.line,
            "score": round(self.score, 12),
            "mutant": self.mutant.to_dict(),
        }


@dataclass
class EvaluationRecord:
    mutant: Mutant
    score: float
    tests_run: list[str]
    killing_tests: list[str]

    def to_dict(self) -> dict:
        return {
            "mutant": self.mutant.to_dict(),
            "score": round(self.score, 12),
            "tests_run": self.tests_run,
            "killing_tests": self.killing_tests,
        }


@dataclass
class FindingsReport:
    change_id: str
    base: str
    head: str
    findings: dict[str, list[Finding]] = field(default_factory=dict)
    evaluations: list[EvaluationRecord] = field(default_factory=list)
    eligible_lines: dict[str, list[int]] = field(default_factory=dict)
    suppressed: int = 0

    @property
    def generated(self) -> int:
        return len(self.evaluations)

    @property
    def killed(self) -> int:
        return sum(1 for e in self.evaluations if e.mutant.status is MutantStatus.KILLED)

    @property
    def live(self) -> int:
        return sum(1 for e in self.evaluations if e.mutant.status is MutantStatus.LIVE)

    @property
    def unevaluated(self) -> int:
        return self.generated - self.killed - self.live

    def all_findings(self) -> list[Finding]:
        return [f for path in sorted(self.findings) for f in self.findings[path]]

    def summary(self) -> dict:
        return {
            "generated": self.generated,
            "killed": self.killed,
            "live": self.live,
            "unevaluated": self.unevaluated,
            "suppressed": self.suppressed,
            "findings": len(self.all_findings()),
            "eligible_lines": sum(len(v) for v in self.eligible_lines.values()),
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "findings_report",
            "change_id": self.change_id,
            "base": self.base,
            "head": self.head,
            "summary": self.summary(),
            "files": [
                {
                    "path": path,
                    "eligible_lines": self.eligible_lines.get(path, []),
                    "findings": [f.to_dict() for f in self.findings.get(path, [])],
                }
                for path in sorted(set(self.findings) | set(self.eligible_lines))
            ],
            "evaluations": [e.to_dict() for e in self.evaluations],
        }

    @classmethod
    def from_dict(cls, data: dict) -> FindingsReport:
        report = cls(data["change_id"], data.get("base", ""), data.get("head", ""))
        for entry in data.get("files", []):
            path = entry["path"]
            report.eligible_lines[path] = list(entry.get("eligible_lines", []))
            report.findings[path] = [
                Finding(_mutant_from_dict(f["mutant"]), f["file"], f["line"], f["surfaced_rank"], f["score"])
                for f in entry.get("findings", [])
            ]
        for e in data.get("evaluations", []):
            report.evaluations.append(EvaluationRecord(_mutant_from_dict(e["mutant"]), e["score"],
                                                       list(e["tests_run"]), list(e["killing_tests"])))
        report.suppressed = data.get("summary", {}).get("suppressed", 0)
        return report


def _mutant_from_dict(d: dict) -> Mutant:
    point = MutationPoint(
        path=d["path"],
        line=d["line"],
        span=Span.from_dict(d["span"]),
        node_kind=NodeKind(d["node_kind"]),
        original_snippet=d["original_snippet"],
        locator=(),
    )
    return Mutant(
        id=d["id"],
        point=point,
        operator=OperatorKind(d["operator"]),
        variant=d["variant"],
        replacement_snippet=d["replacement_snippet"],
        mutated_source="",
        status=MutantStatus(d["status"]),
    )


def change_id_for(diff_text: str) -> str:
    return hashlib.sha256(diff_text.encode("utf-8")).hexdigest()[:12]


def analyze_change(base: str | Path, head: str | Path, diff: ChangeSet, cov: CoverageMap,
                   stats: OperatorStats, cfg: SuppressionConfig = SuppressionConfig(),
                   step_budget: int = DEFAULT_STEP_BUDGET, jobs: int = 1,
                   change_id: str = "", survival_weight: float = 0.5) -> FindingsReport:
    """Run mutation analysis on a change and return the findings report.

    ``stats`` is updated in place with Generated and Survived/Killed events.
    ``survival_weight`` blends survival history against reviewer feedback.
    """
    load_project(base)
    head_project = load_project(head)
    passing = require_green_baseline(head_project, step_budget)

    report = FindingsReport(change_id, str(base), str(head))
    selected: list[tuple[Mutant, float]] = []
    for f in sorted(diff.files, key=lambda f: f.path):
        module = head_project.module(f.path)
        if module is None:
            continue  # tests, deleted files, non-program files
        changed = f.added_lines
        eligible = changed & cov.get(f.path, set()) if cfg.suppress_uncovered else set(changed)
        if not eligible:
            continue
        report.eligible_lines[f.path] = sorted(eligible)
        report.suppressed += len(suppressed_points(module, eligible, cfg))
        for line in sorted(eligible):
            choice = select_mutant_for_line(candidate_mutants(module, line, cfg), stats, survival_weight)
            if choice is not None:
                selected.append((choice, score_operator(stats, ContextKey.of(choice), survival_weight)))

    for mutant, _ in selected:
        stats.record(ContextKey.of(mutant), Event.GENERATED)

    evaluations: list[MutantEvaluation] = evaluate_mutants(
        head_project, [m for m, _ in selected], passing, step_budget, fail_fast=True, jobs=jobs)

    live: dict[str, list[tuple[Mutant, float]]] = {}
    for (mutant, score), ev in zip(selected, evaluations):
        status = MutantStatus.KILLED if ev.killed else MutantStatus.LIVE
        mutant = Mutant(mutant.id, mutant.point, mutant.operator, mutant.variant,
                        mutant.replacement_snippet, mutant.mutated_source, status, mutant.module)
        stats.record(ContextKey.of(mutant), Event.KILLED if ev.killed else Event.SURVIVED)
        report.evaluations.append(EvaluationRecord(mutant, score, ev.tests_run, ev.killing_tests[:1]))
        if status is MutantStatus.LIVE:
            live.setdefault(mutant.path, []).append((mutant, score))

    for path, items in live.items():
        items.sort(key=lambda ms: (-ms[1], ms[0].line))
        report.findings[path] = [
            Finding(m, path, m.line, rank, score)
            for rank, (m, score) in enumerate(items[:MAX_FINDINGS_PER_FILE], start=1)
        ]
    return report


def apply_feedback(report: FindingsReport, mutant_id: str, verdict: FeedbackVerdict,
                   stats: OperatorStats) -> OperatorStats:
    for finding in report.all_findings():
        if finding.mutant.id == mutant_id:
            key = ContextKey(finding.mutant.operator, finding.mutant.point.node_kind)
            return stats.record(key, FeedbackVerdict(verdict).event)
    raise UnknownMutant(mutant_id)


def find_mutant(report: FindingsReport, mutant_id: str) -> Optional[Mutant]:
    for e in report.evaluations:
        if e.mutant.id == mutant_id:
            return e.mutant
    return None
