"""MiniLang: the small imperative subject language that mutants are made of."""

from .interp import (
    DEFAULT_STEP_BUDGET,
    Interpreter,
    LinkError,
    TestOutcome,
    Verdict,
    discover_tests,
    run_test_suite,
)
from .parser import ParseError, StructureError, parse_expression, parse_source, parse_statement
from .project import Project, ProjectLoadError, load_project
from .render import render_node, render_source
from .syntax import SubjectModule

__all__ = [
    "DEFAULT_STEP_BUDGET",
    "Interpreter",
    "LinkError",
    "ParseError",
    "Project",
    "ProjectLoadError",
    "StructureError",
    "SubjectModule",
    "TestOutcome",
    "Verdict",
    "discover_tests",
    "load_project",
    "parse_expression",
    "parse_source",
    "parse_statement",
    "render_node",
    "render_source",
    "run_test_suite",
]
