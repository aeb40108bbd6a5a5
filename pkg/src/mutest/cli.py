"""mutest command line.

Exit codes: 0 clean, 1 findings (or bug not coupled, or failing tests), 2 error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import fcntl
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .change_analysis import (
    CoverageFormatError,
    FindingsReport,
    UnknownMutant,
    analyze_change,
    apply_feedback,
    change_id_for,
    load_coverage,
)
from .coupling import (
    BugCaseError,
    CouplingMode,
    NoEligibleLines,
    NoTriggeringTest,
    coupling_analysis,
    load_bug_case,
    load_redundancy_target,
    redundancy_analysis,
)
from .diff import DiffFormatError, parse_unified_diff
from .execution import BaselineFailure, resolve_jobs
from .metrics import DegenerateInput, RecordFormatError, UnknownChange, load_history, metrics_report
from .minilang import DEFAULT_STEP_BUDGET, LinkError, ParseError, ProjectLoadError, Verdict, load_project
from .mutagen import DEFAULT_DENYLIST, SuppressionConfig
from .reports import atomic_write, dumps, read_json
from .selection import FeedbackVerdict, InvariantViolation, OperatorStats, StatsFormatError

EXIT_OK, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2


class ConfigError(Exception):
    pass


_ERRORS = (
    BaselineFailure, BugCaseError, ConfigError, CoverageFormatError, DegenerateInput, DiffFormatError,
    InvariantViolation, LinkError, NoEligibleLines, NoTriggeringTest, OSError, ParseError,
    ProjectLoadError, RecordFormatError, StatsFormatError, UnknownChange, UnknownMutant,
    UnicodeDecodeError, json.JSONDecodeError,
)


@dataclass
class RunConfig:
    step_budget: int = DEFAULT_STEP_BUDGET
    jobs: Optional[int] = None
    stats: Optional[str] = None
    out: Optional[str] = None
    suppress: list[str] = field(default_factory=list)
    suppress_uncovered: bool = True
    mode: str = CouplingMode.STRICT.value
    survival_weight: float = 0.5

    def validate(self) -> RunConfig:
        if not isinstance(self.step_budget, int) or self.step_budget < 1:
            raise ConfigError("step_budget must be an integer >= 1")
        try:
            self.jobs = resolve_jobs(self.jobs)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if not isinstance(self.survival_weight, (int, float)) or not 0 <= self.survival_weight <= 1:
            raise ConfigError("survival_weight must be a number in [0, 1]")
        if self.mode not in {m.value for m in CouplingMode}:
            raise ConfigError(f"mode must be strict or relaxed, not {self.mode!r}")
        return self

    @property
    def suppression(self) -> SuppressionConfig:
        patterns = tuple(dict.fromkeys(DEFAULT_DENYLIST + tuple(self.suppress)))
        return SuppressionConfig(patterns, self.suppress_uncovered)


def load_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = RunConfig()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        known = set(RunConfig.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"{args.config}: unknown keys {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, list(v) if k == "suppress" else v)
    if args.step_budget is not None:
        cfg.step_budget = args.step_budget
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.stats is not None:
        cfg.stats = args.stats
    if args.out is not None:
        cfg.out = args.out
    if args.suppress:
        cfg.suppress = cfg.suppress + list(args.suppress)
    if args.include_uncovered:
        cfg.suppress_uncovered = False
    if args.mode is not None:
        cfg.mode = args.mode
    return cfg.validate()


def emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write(Path(out), text)
    else:
        sys.stdout.write(text)


@contextlib.contextmanager
def stats_lock(path: Optional[str]):
    """Exclusive lock on a sidecar file for the duration of a stats update."""
    if not path:
        yield
        return
    lock_path = Path(str(path) + ".lock")
    lock_path.parent.mkdir(parents=True, exist_ok=True)
    with open(lock_path, "a") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def _require(path: str, kind: str = "file") -> Path:
    p = Path(path)
    ok = p.is_dir() if kind == "directory" else p.is_file()
    if not ok:
        raise ConfigError(f"{kind} not found: {path}")
    return p


# -- subcommands ------------------------------------------------------------


def cmd_change(args, cfg: RunConfig) -> int:
    _require(args.base, "directory")
    _require(args.head, "directory")
    diff_text = _require(args.diff).read_text(encoding="utf-8")
    diff = parse_unified_diff(diff_text)
    cov = load_coverage(_require(args.coverage))
    with stats_lock(cfg.stats):
        stats = OperatorStats.load(cfg.stats) if cfg.stats else OperatorStats()
        report = analyze_change(args.base, args.head, diff, cov, stats, cfg.suppression,
                                cfg.step_budget, cfg.jobs, args.change_id or change_id_for(diff_text),
                                cfg.survival_weight)
        emit(dumps(report.to_dict()), cfg.out)
        if cfg.stats:
            stats.save(cfg.stats)
    for f in report.all_findings():
        m = f.mutant
        print(f"{f.file}:{f.line}: [{m.operator.value}] {m.point.original_snippet!r} -> "
              f"{m.replacement_snippet!r} survived ({m.id})", file=sys.stderr)
    s = report.summary()
    print(f"{s['generated']} mutants, {s['killed']} killed, {s['live']} live, "
          f"{s['findings']} findings", file=sys.stderr)
    return EXIT_FINDINGS if s["findings"] else EXIT_OK


def cmd_feedback(args, cfg: RunConfig) -> int:
    if not cfg.stats:
        raise ConfigError("feedback needs --stats")
    try:
        verdict = FeedbackVerdict.parse(args.verdict)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    report = FindingsReport.from_dict(read_json(_require(args.report)))
    with stats_lock(cfg.stats):
        stats = OperatorStats.load(cfg.stats)
        apply_feedback(report, args.mutant_id, verdict, stats)
        stats.save(cfg.stats)
    return EXIT_OK


def cmd_coupling(args, cfg: RunConfig) -> int:
    bug = load_bug_case(args.bug)
    result = coupling_analysis(bug, cfg.mode, cfg.step_budget, cfg.suppression, cfg.jobs)
    emit(dumps(result.to_dict()), cfg.out)
    print(f"{bug.id}: {'coupled' if result.bug_coupled else 'not coupled'} ({cfg.mode})", file=sys.stderr)
    return EXIT_OK if result.bug_coupled else EXIT_FINDINGS


def cmd_redundancy(args, cfg: RunConfig) -> int:
    project, lines = load_redundancy_target(args.target)
    stats, _ = redundancy_analysis(project, lines, cfg.suppression, cfg.step_budget, cfg.jobs)
    emit(dumps(stats.to_dict(Path(args.target).name)), cfg.out)
    print(f"{len(stats.lines)} lines, fraction at 100%: {stats.fraction_at_100:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_metrics(args, cfg: RunConfig) -> int:
    report = metrics_report(load_history(args.history))
    emit(dumps(report), cfg.out)
    r = report["correlations"]["test_hunks_per_file_all"]["r_s"]
    print(f"{report['changes']} changes, r_s(exposure, test hunks per file) = {r:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_run_tests(args, cfg: RunConfig) -> int:
    project = load_project(_require(args.project, "directory"))
    coverage: Optional[set] = set() if args.coverage_out else None
    outcomes = project.run_tests(cfg.step_budget, coverage=coverage)
    emit(dumps({"kind": "test_run", "outcomes": [o.to_dict() for o in outcomes]}), cfg.out)
    for o in outcomes:
        print(f"{o.verdict.value:<12} {o.test_name}" + (f"  {o.message}" if o.message else ""), file=sys.stderr)
    if args.coverage_out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["file", "line"])
        w.writerows(sorted(c for c in coverage if not c[0].startswith("tests/")))
        atomic_write(Path(args.coverage_out), buf.getvalue())
    return EXIT_OK if all(o.verdict is Verdict.PASS for o in outcomes) else EXIT_FINDINGS


# -- parser -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--step-budget", type=int, help=f"interpreter steps per test (default {DEFAULT_STEP_BUDGET})")
    g.add_argument("--jobs", type=int, help="parallel mutant evaluations (default: CPU count; MUTEST_JOBS overrides)")
    g.add_argument("--stats", help="operator statistics store (CSV)")
    g.add_argument("--out", help="write the report here instead of stdout")
    g.add_argument("--suppress", action="append", default=[], metavar="PATTERN",
                   help="extra callee pattern whose arguments are never mutated (repeatable)")
    g.add_argument("--include-uncovered", action="store_true", help="do not gate mutants on coverage")
    g.add_argument("--mode", choices=[m.value for m in CouplingMode], help="coupling definition (default strict)")
    g.add_argument("--config", help="JSON file with defaults for the options above")
    g.add_argument("--seed", type=int, help="reserved; runs are deterministic")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="mutest", description="Diff-aware mutation testing for MiniLang projects.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("change", parents=[common], help="analyze one change and report live mutants")
    p.add_argument("base", help="project directory before the change")
    p.add_argument("head", help="project directory after the change")
    p.add_argument("diff", help="unified diff from base to head")
    p.add_argument("coverage", help="CSV of covered head lines (file,line)")
    p.add_argument("--change-id", help="identifier recorded in the report (default: diff hash)")
    p.set_defaults(func=cmd_change)

    p = sub.add_parser("feedback", parents=[common], help="record reviewer feedback on a finding")
    p.add_argument("report", help="findings report written by 'change'")
    p.add_argument("mutant_id")
    p.add_argument("verdict", help="please-fix or not-useful")
    p.set_defaults(func=cmd_feedback)

    p = sub.add_parser("coupling", parents=[common], help="check whether a bug is coupled to mutants")
    p.add_argument("bug", help="bug directory with buggy/, fixed/ and fix.diff")
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("redundancy", parents=[common], help="per-line majority fate of mutants")
    p.add_argument("target", help="bug directory or project directory")
    p.set_defaults(func=cmd_redundancy)

    p = sub.add_parser("metrics", parents=[common], help="exposure and test-hunk correlations over a history")
    p.add_argument("history", help="directory of change records (*.json)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("run-tests", parents=[common], help="run a project's test suite")
    p.add_argument("project")
    p.add_argument("--coverage-out", help="write covered program lines as CSV")
    p.set_defaults(func=cmd_run_tests)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except _ERRORS as e:
        print(f"mutest: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except KeyError as e:  # malformed report structure
        print(f"mutest: error: missing field {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
