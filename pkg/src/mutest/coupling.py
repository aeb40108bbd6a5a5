"""Fault coupling between mutants and real bugs, and per-line mutant redundancy.

A mutant is fault-coupled when it exists in both the buggy and the fixed
version, survives the buggy version's own tests, and is killed in the fixed
version. Strict coupling additionally requires every killing test to be a
triggering test (fails on the buggy code, passes on the fixed code).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .diff import ChangeSet, DiffFormatError, is_test_path, parse_unified_diff
from .execution import KillMatrix, build_kill_matrix, baseline_passing
from .minilang.interp import DEFAULT_STEP_BUDGET, LinkError, Verdict, run_test_suite
from .minilang.project import Project, ProjectLoadError, load_project
from .mutagen import Mutant, Rejection, SuppressionConfig, enumerate_all_mutants
from .reports import SCHEMA_VERSION


class BugCaseError(Exception):
    pass


class NoTriggeringTest(Exception):
    pass


class NoEligibleLines(Exception):
    pass


class CouplingMode(str, Enum):
    STRICT = "strict"
    RELAXED = "relaxed"


@dataclass
class BugCase:
    id: str
    buggy: Project
    fixed: Project
    fix_diff: ChangeSet


def load_bug_case(root: str | Path) -> BugCase:
    """Load ``<root>/buggy``, ``<root>/fixed`` and ``<root>/fix.diff``."""
    root = Path(root)
    if not root.is_dir():
        raise BugCaseError(f"bug directory not found: {root}")
    diff_path = root / "fix.diff"
    if not diff_path.is_file():
        raise BugCaseError(f"{root}: missing fix.diff")
    try:
        buggy = load_project(root / "buggy")
        fixed = load_project(root / "fixed")
        fix_diff = parse_unified_diff(diff_path.read_text(encoding="utf-8"))
    except (ProjectLoadError, DiffFormatError) as e:
        raise BugCaseError(f"{root}: {e}") from e
    return BugCase(root.name, buggy, fixed, fix_diff)


def triggering_tests(bug: BugCase, step_budget: int = DEFAULT_STEP_BUDGET) -> list[str]:
    """Fixed-suite tests that pass on the fixed code and fail on the buggy code."""
    fixed_outcomes = bug.fixed.run_tests(step_budget)
    broken = [o.test_name for o in fixed_outcomes if o.verdict.failed]
    if broken:
        raise BugCaseError(f"{bug.id}: fixed tests fail on fixed code: {', '.join(broken)}")
    try:
        on_buggy = run_test_suite(bug.buggy.program, bug.fixed.tests, step_budget)
    except LinkError as e:
        raise BugCaseError(f"{bug.id}: {e}") from e
    triggering = [o.test_name for o in on_buggy if o.verdict is not Verdict.PASS]
    if not triggering:
        raise NoTriggeringTest(f"{bug.id}: no fixed-suite test fails on the buggy code")
    return triggering


@dataclass
class AffectedLines:
    buggy: dict[str, set[int]]
    fixed: dict[str, set[int]]


def affected_lines(bug: BugCase) -> AffectedLines:
    """Full hunk windows of the fix in source (non-test) files, per version."""
    buggy: dict[str, set[int]] = {}
    fixed: dict[str, set[int]] = {}
    for f in bug.fix_diff.files:
        for h in f.hunks:
            if f.old_path != "/dev/null" and not is_test_path(f.old_path) and h.old_count:
                buggy.setdefault(f.old_path, set()).update(h.old_range)
            if f.new_path != "/dev/null" and not is_test_path(f.new_path) and h.new_count:
                fixed.setdefault(f.new_path, set()).update(h.new_range)
    return AffectedLines(buggy, fixed)


def _match_key(m: Mutant, path: str, line: int) -> tuple:
    return (path, line, m.operator, m.variant, m.point.original_snippet, m.replacement_snippet)


def match_mutants(buggy_mutants: Sequence[Mutant], fixed_mutants: Sequence[Mutant],
                  alignment: ChangeSet) -> list[tuple[Mutant, Mutant]]:
    """Pair mutants that are the same mutation of the same unchanged line.

    Lines are aligned through the diff; unaligned (edited) lines never match.
    Matching is one-to-one, first come first served in enumeration order.
    """
    pool: dict[tuple, list[Mutant]] = defaultdict(list)
    for mf in fixed_mutants:
        pool[_match_key(mf, mf.path, mf.line)].append(mf)
    pairs = []
    for mb in buggy_mutants:
        fd = next((f for f in alignment.files if f.old_path == mb.path), None)
        if fd is None:
            path, line = mb.path, mb.line
        else:
            path, line = fd.new_path, fd.old_to_new(mb.line)
            if line is None:
                continue
        bucket = pool.get(_match_key(mb, path, line))
        if bucket:
            pairs.append((mb, bucket.pop(0)))
    return pairs


@dataclass
class MutantCoupling:
    buggy_mutant: Mutant
    fixed_mutant: Mutant
    live_in_buggy: bool
    killed_in_fixed: bool
    killing_tests: list[str]
    coupled_strict: bool
    coupled_relaxed: bool
    exists_in_both: bool = True

    def to_dict(self) -> dict:
        mf = self.fixed_mutant
        return {
            "buggy_mutant_id": self.buggy_mutant.id,
            "fixed_mutant_id": mf.id,
            "path": mf.path,
            "buggy_line": self.buggy_mutant.line,
            "fixed_line": mf.line,
            "operator": mf.operator.value,
            "variant": mf.variant,
            "node_kind": mf.point.node_kind.value,
            "original_snippet": mf.point.original_snippet,
            "replacement_snippet": mf.replacement_snippet,
            "exists_in_both": self.exists_in_both,
            "live_in_buggy": self.live_in_buggy,
            "killed_in_fixed": self.killed_in_fixed,
            "killing_tests": self.killing_tests,
            "coupled_strict": self.coupled_strict,
            "coupled_relaxed": self.coupled_relaxed,
        }


@dataclass
class CouplingResult:
    bug_id: str
    mode: CouplingMode
    triggering_tests: list[str]
    mutants: list[MutantCoupling] = field(default_factory=list)
    buggy_only: int = 0
    fixed_only: int = 0
    rejected_buggy: list[Rejection] = field(default_factory=list)
    rejected_fixed: list[Rejection] = field(default_factory=list)

    @property
    def coupled_strict(self) -> bool:
        return any(m.coupled_strict for m in self.mutants)

    @property
    def coupled_relaxed(self) -> bool:
        return any(m.coupled_relaxed for m in self.mutants)

    @property
    def bug_coupled(self) -> bool:
        return self.coupled_strict if self.mode is CouplingMode.STRICT else self.coupled_relaxed

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "coupling_result",
            "bug_id": self.bug_id,
            "mode": self.mode.value,
            "bug_coupled": self.bug_coupled,
            "bug_coupled_strict": self.coupled_strict,
            "bug_coupled_relaxed": self.coupled_relaxed,
            "triggering_tests": self.triggering_tests,
            "summary": {
                "matched": len(self.mutants),
                "buggy_only": self.buggy_only,
                "fixed_only": self.fixed_only,
                "live_in_buggy": sum(m.live_in_buggy for m in self.mutants),
                "coupled_strict": sum(m.coupled_strict for m in self.mutants),
                "coupled_relaxed": sum(m.coupled_relaxed for m in self.mutants),
            },
            "mutants": [m.to_dict() for m in self.mutants],
            "not_applicable": {
                "buggy": [r.to_dict() for r in self.rejected_buggy],
                "fixed": [r.to_dict() for r in self.rejected_fixed],
            },
        }


def _enumerate(project: Project, lines: dict[str, set[int]], cfg: SuppressionConfig,
               rejected: list[Rejection]) -> list[Mutant]:
    mutants = []
    for path in sorted(lines):
        module = project.module(path)
        if module is not None and lines[path]:
            mutants.extend(enumerate_all_mutants(module, lines[path], cfg, rejected))
    return mutants


def coupling_analysis(bug: BugCase, mode: CouplingMode | str = CouplingMode.STRICT,
                      step_budget: int = DEFAULT_STEP_BUDGET,
                      cfg: SuppressionConfig = SuppressionConfig(), jobs: int = 1) -> CouplingResult:
    mode = CouplingMode(mode)
    triggering = triggering_tests(bug, step_budget)
    lines = affected_lines(bug)
    result = CouplingResult(bug.id, mode, triggering)
    buggy_mutants = _enumerate(bug.buggy, lines.buggy, cfg, result.rejected_buggy)
    fixed_mutants = _enumerate(bug.fixed, lines.fixed, cfg, result.rejected_fixed)
    pairs = match_mutants(buggy_mutants, fixed_mutants, bug.fix_diff)
    result.buggy_only = len(buggy_mutants) - len(pairs)
    result.fixed_only = len(fixed_mutants) - len(pairs)
    if not pairs:
        return result

    buggy_matrix = build_kill_matrix(bug.buggy, [mb for mb, _ in pairs], step_budget, jobs)
    fixed_matrix = build_kill_matrix(bug.fixed, [mf for _, mf in pairs], step_budget, jobs)
    trig = set(triggering)
    for mb, mf in pairs:
        live_in_buggy = not buggy_matrix.killed(mb.id)
        killers = fixed_matrix.killing_tests(mf.id)
        relaxed = live_in_buggy and bool(killers)
        strict = relaxed and set(killers) <= trig
        result.mutants.append(MutantCoupling(mb, mf, live_in_buggy, bool(killers), killers, strict, relaxed))
    return result


# -- redundancy -------------------------------------------------------------


HISTOGRAM_BINS = ("[0.5,0.6)", "[0.6,0.7)", "[0.7,0.8)", "[0.8,0.9)", "[0.9,1.0)", "1.0")


@dataclass(frozen=True)
class LineFate:
    path: str
    line: int
    total: int
    killed: int

    @property
    def majority_ratio(self) -> Fraction:
        return Fraction(max(self.killed, self.total - self.killed), self.total)

    def to_dict(self) -> dict:
        r = self.majority_ratio
        return {
            "path": self.path,
            "line": self.line,
            "total": self.total,
            "killed": self.killed,
            "live": self.total - self.killed,
            "majority_ratio": float(r),
            "majority_ratio_exact": f"{r.numerator}/{r.denominator}",
        }


def _bin(ratio: Fraction) -> str:
    if ratio == 1:
        return "1.0"
    tenth = min(int(ratio * 10), 9)
    return HISTOGRAM_BINS[tenth - 5]


@dataclass
class MajorityFateStats:
    lines: list[LineFate]

    @property
    def histogram(self) -> dict[str, int]:
        hist = {b: 0 for b in HISTOGRAM_BINS}
        for lf in self.lines:
            hist[_bin(lf.majority_ratio)] += 1
        return hist

    @property
    def fraction_at_100(self) -> float:
        if not self.lines:
            return 0.0
        return sum(1 for lf in self.lines if lf.majority_ratio == 1) / len(self.lines)

    def to_dict(self, source: str = "") -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "majority_fate",
            "source": source,
            "lines_considered": len(self.lines),
            "fraction_at_100": self.fraction_at_100,
            "histogram": self.histogram,
            "lines": [lf.to_dict() for lf in self.lines],
        }


def majority_fate(matrix: KillMatrix) -> MajorityFateStats:
    """Majority-fate ratio for every line holding two or more mutants."""
    groups: dict[tuple[str, int], list[Mutant]] = defaultdict(list)
    for m in matrix.mutants:
        groups[(m.path, m.line)].append(m)
    lines = []
    for (path, line), ms in sorted(groups.items()):
        if len(ms) < 2:
            continue
        lines.append(LineFate(path, line, len(ms), sum(1 for m in ms if matrix.killed(m.id))))
    return MajorityFateStats(lines)


def all_lines(project: Project) -> dict[str, set[int]]:
    return {m.path: set(range(1, m.source_text.count("\n") + 2)) for m in project.program}


def redundancy_analysis(project: Project, lines: Optional[dict[str, set[int]]] = None,
                        cfg: SuppressionConfig = SuppressionConfig(),
                        step_budget: int = DEFAULT_STEP_BUDGET,
                        jobs: int = 1) -> tuple[MajorityFateStats, KillMatrix]:
    if lines is None:
        lines = all_lines(project)
    mutants = _enumerate(project, lines, cfg, [])
    passing = baseline_passing(project, step_budget)
    matrix = build_kill_matrix(project, mutants, step_budget, jobs, passing)
    stats = majority_fate(matrix)
    if not stats.lines:
        raise NoEligibleLines("no lines with ≥2 mutants")
    return stats, matrix


def load_redundancy_target(root: str | Path) -> tuple[Project, Optional[dict[str, set[int]]]]:
    """A bug directory yields its fixed version restricted to the fix's
    hunk windows; anything else is loaded as a plain project."""
    root = Path(root)
    if (root / "fix.diff").exists() or (root / "fixed").is_dir():
        bug = load_bug_case(root)
        return bug.fixed, affected_lines(bug).fixed
    return load_project(root), None


def iter_bug_dirs(corpus: str | Path) -> Iterable[Path]:
    return sorted(p for p in Path(corpus).iterdir() if p.is_dir())
