"""Mutant evaluation against a project's test suite, and kill matrices."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .minilang.interp import DEFAULT_STEP_BUDGET, TestOutcome, Verdict
from .minilang.project import Project
from .mutagen import Mutant


class Fate(str, Enum):
    KILLED_BY = "Killed-by"
    NOT_KILLED_BY = "Not-killed-by"
    NOT_RUN = "Not-run"


class BaselineFailure(Exception):
    """The unmutated project does not pass its own tests."""

    def __init__(self, failing: Sequence[TestOutcome]):
        self.failing = list(failing)
        names = ", ".join(f"{o.test_name} ({o.verdict.value})" for o in self.failing)
        super().__init__(f"baseline tests fail on unmutated code: {names}")


@dataclass
class MutantEvaluation:
    mutant_id: str
    outcomes: list[TestOutcome]
    killing_tests: list[str]

    @property
    def killed(self) -> bool:
        return bool(self.killing_tests)

    @property
    def tests_run(self) -> list[str]:
        return [o.test_name for o in self.outcomes]


def baseline_passing(project: Project, step_budget: int = DEFAULT_STEP_BUDGET) -> list[str]:
    return [o.test_name for o in project.run_tests(step_budget) if o.verdict is Verdict.PASS]


def require_green_baseline(project: Project, step_budget: int = DEFAULT_STEP_BUDGET) -> list[str]:
    outcomes = project.run_tests(step_budget)
    failing = [o for o in outcomes if o.verdict.failed]
    if failing:
        raise BaselineFailure(failing)
    return [o.test_name for o in outcomes]


def evaluate_mutant(project: Project, mutant: Mutant, passing: Sequence[str],
                    step_budget: int = DEFAULT_STEP_BUDGET, fail_fast: bool = False) -> MutantEvaluation:
    """Run the tests in ``passing`` (tests green on the unmutated project)
    against the mutant. A test kills the mutant when it does not pass."""
    mutated = project.with_module(mutant.mutated_module())
    outcomes = mutated.run_tests(step_budget, select=passing, fail_fast=fail_fast)
    killing = [o.test_name for o in outcomes if o.verdict.failed]
    return MutantEvaluation(mutant.id, outcomes, killing)


def _evaluate_job(args: tuple) -> MutantEvaluation:
    return evaluate_mutant(*args)


def resolve_jobs(jobs: Optional[int]) -> int:
    env = os.environ.get("MUTEST_JOBS")
    if env:
        jobs = int(env)
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ValueError("parallelism must be >= 1")
    return jobs


def evaluate_mutants(project: Project, mutants: Sequence[Mutant], passing: Sequence[str],
                     step_budget: int = DEFAULT_STEP_BUDGET, fail_fast: bool = False,
                     jobs: int = 1) -> list[MutantEvaluation]:
    """Evaluate each mutant independently; results come back in input order."""
    work = [(project, m, list(passing), step_budget, fail_fast) for m in mutants]
    if jobs <= 1 or len(work) <= 1:
        return [_evaluate_job(w) for w in work]
    with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
        return list(pool.map(_evaluate_job, work))


@dataclass
class KillMatrix:
    mutants: list[Mutant]
    tests: list[str]
    outcome: dict[tuple[str, str], Fate] = field(default_factory=dict)

    @classmethod
    def from_evaluations(cls, mutants: Sequence[Mutant], tests: Sequence[str],
                         evaluations: Sequence[MutantEvaluation]) -> KillMatrix:
        matrix = cls(list(mutants), list(tests))
        for ev in evaluations:
            ran = {o.test_name: o for o in ev.outcomes}
            for t in tests:
                if t not in ran:
                    fate = Fate.NOT_RUN
                elif ran[t].verdict.failed:
                    fate = Fate.KILLED_BY
                else:
                    fate = Fate.NOT_KILLED_BY
                matrix.outcome[(ev.mutant_id, t)] = fate
        return matrix

    def row(self, mutant_id: str) -> dict[str, Fate]:
        return {t: self.outcome.get((mutant_id, t), Fate.NOT_RUN) for t in self.tests}

    def killed(self, mutant_id: str) -> bool:
        return any(f is Fate.KILLED_BY for f in self.row(mutant_id).values())

    def killing_tests(self, mutant_id: str) -> list[str]:
        return [t for t, f in self.row(mutant_id).items() if f is Fate.KILLED_BY]

    def to_dict(self) -> dict:
        return {
            "tests": list(self.tests),
            "rows": [
                {
                    "mutant_id": m.id,
                    "path": m.path,
                    "line": m.line,
                    "operator": m.operator.value,
                    "outcomes": {t: f.value for t, f in self.row(m.id).items()},
                }
                for m in self.mutants
            ],
        }


def build_kill_matrix(project: Project, mutants: Sequence[Mutant],
                      step_budget: int = DEFAULT_STEP_BUDGET, jobs: int = 1,
                      passing: Optional[Sequence[str]] = None) -> KillMatrix:
    """Full (no early exit) mutant x test matrix over baseline-passing tests."""
    if passing is None:
        passing = baseline_passing(project, step_budget)
    evaluations = evaluate_mutants(project, mutants, passing, step_budget, fail_fast=False, jobs=jobs)
    return KillMatrix.from_evaluations(mutants, passing, evaluations)
