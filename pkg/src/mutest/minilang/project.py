"""On-disk subject projects: ``src/*.mini`` program files, ``tests/*.mini`` tests."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .interp import DEFAULT_STEP_BUDGET, TestOutcome, run_test_suite
from .parser import ParseError, parse_source
from .syntax import SubjectModule


class ProjectLoadError(Exception):
    pass


@dataclass(frozen=True)
class Project:
    root: str
    program: tuple[SubjectModule, ...]
    tests: tuple[SubjectModule, ...]

    def module(self, path: str) -> Optional[SubjectModule]:
        for m in self.program:
            if m.path == path:
                return m
        return None

    def with_module(self, module: SubjectModule) -> Project:
        """Copy of the project with the program file at ``module.path`` swapped out."""
        program = tuple(module if m.path == module.path else m for m in self.program)
        return replace(self, program=program)

    def run_tests(self, step_budget: int = DEFAULT_STEP_BUDGET, **kwargs) -> list[TestOutcome]:
        return run_test_suite(self.program, self.tests, step_budget, **kwargs)


def _load_dir(root: Path, sub: str) -> tuple[SubjectModule, ...]:
    modules = []
    directory = root / sub
    if not directory.is_dir():
        return ()
    for path in sorted(directory.glob("*.mini")):
        rel = f"{sub}/{path.name}"
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ProjectLoadError(f"cannot read {path}: {e}") from e
        try:
            modules.append(parse_source(text, rel))
        except ParseError as e:
            raise ProjectLoadError(f"{root}: {e}") from e
    return tuple(modules)


def load_project(root: str | Path) -> Project:
    root = Path(root)
    if not root.is_dir():
        raise ProjectLoadError(f"project directory not found: {root}")
    program = _load_dir(root, "src")
    if not program:
        raise ProjectLoadError(f"{root}: no src/*.mini files")
    return Project(str(root), program, _load_dir(root, "tests"))
