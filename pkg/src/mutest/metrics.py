"""Test-hunk counting, exposure, survivability and rank correlation over a
history of change records."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .diff import ChangeSet, DiffFormatError, is_test_path, parse_unified_diff
from .reports import SCHEMA_VERSION


class DegenerateInput(ValueError):
    pass


class UnknownChange(KeyError):
    def __str__(self) -> str:
        return f"change {self.args[0]!r} is not in this history"


class RecordFormatError(Exception):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class FileOutcome:
    had_findings: bool
    findings_count: int = 0
    generated: int = 0
    survived: int = 0

    def __post_init__(self):
        if min(self.findings_count, self.generated, self.survived) < 0:
            raise ValueError("counts must be non-negative")
        if self.survived > self.generated:
            raise ValueError("survived exceeds generated")


@dataclass
class ChangeRecord:
    change_id: str
    order: int
    files: dict[str, FileOutcome]
    diff: ChangeSet = field(default_factory=ChangeSet)

    @classmethod
    def from_dict(cls, data: dict) -> ChangeRecord:
        files = {
            path: FileOutcome(bool(v["had_findings"]), int(v.get("findings_count", 0)),
                              int(v.get("generated", 0)), int(v.get("survived", 0)))
            for path, v in data["files"].items()
        }
        return cls(str(data["change_id"]), int(data["order"]), files, parse_unified_diff(data.get("diff", "")))


def load_history(directory: str | Path) -> list[ChangeRecord]:
    """Read every ``*.json`` record in a directory, ordered by (order, change id)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise RecordFormatError(str(directory), "history directory not found")
    records = []
    for p in sorted(directory.glob("*.json")):
        try:
            records.append(ChangeRecord.from_dict(json.loads(p.read_text(encoding="utf-8"))))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError, DiffFormatError) as e:
            raise RecordFormatError(str(p), f"malformed change record: {e}") from e
    if not records:
        raise RecordFormatError(str(directory), "no change records")
    ids = [r.change_id for r in records]
    if len(set(ids)) != len(ids):
        raise RecordFormatError(str(directory), "duplicate change ids")
    records.sort(key=lambda r: (r.order, r.change_id))
    return records


def count_test_hunks(diff: ChangeSet, test_classifier: Callable[[str], bool] = is_test_path) -> int:
    """Runs of differing lines inside test files.

    A run that only removes lines is not a hunk of testing; an edit (removed
    lines followed by added lines) counts once.
    """
    total = 0
    for f in diff.files:
        if f.new_path == "/dev/null" or not test_classifier(f.path):
            continue
        for h in f.hunks:
            total += sum(1 for run in h.runs() if any(hl.tag == "+" for hl in run))
    return total


def file_history(history: Sequence[ChangeRecord], path: str) -> list[ChangeRecord]:
    return [r for r in history if path in r.files]


def exposure(history: Sequence[ChangeRecord], upto: str, path: Optional[str] = None) -> int:
    """Number of records before ``upto`` that reported findings (for ``path``
    if given, else for any file)."""
    count = 0
    for r in history:
        if r.change_id == upto:
            return count
        if path is None:
            count += any(o.had_findings for o in r.files.values())
        elif path in r.files:
            count += r.files[path].had_findings
    raise UnknownChange(upto)


def survivability(record: ChangeRecord, path: str) -> Optional[float]:
    o = record.files.get(path)
    if o is None or o.generated == 0:
        return None
    return o.survived / o.generated


def average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mean
        i = j + 1
    return ranks


def _pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    mx, my = math.fsum(xs) / n, math.fsum(ys) / n
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = math.fsum((x - mx) ** 2 for x in xs)
    vy = math.fsum((y - my) ** 2 for y in ys)
    r = cov / math.sqrt(vx * vy)
    return max(-1.0, min(1.0, r))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of average ranks."""
    if len(xs) != len(ys):
        raise DegenerateInput("sequences differ in length")
    if len(xs) < 2:
        raise DegenerateInput("need at least two observations")
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        raise DegenerateInput("a sequence is constant")
    return _pearson(average_ranks(xs), average_ranks(ys))


# -- batch report -----------------------------------------------------------


@dataclass
class SeriesPoint:
    change_id: str
    exposure: int
    test_hunks: int
    hunks_per_file_all: float
    hunks_per_file_analyzed: float
    survivability: Optional[float]

    def to_dict(self) -> dict:
        return vars(self).copy()


def exposure_series(history: Sequence[ChangeRecord],
                    test_classifier: Callable[[str], bool] = is_test_path) -> dict[str, list[SeriesPoint]]:
    """Per analyzed file, one point per change that touched it."""
    series: dict[str, list[SeriesPoint]] = {}
    seen: dict[str, int] = defaultdict(int)
    for r in history:
        hunks = count_test_hunks(r.diff, test_classifier)
        n_all = len(r.diff.files) or len(r.files)
        n_analyzed = len(r.files)
        for path in sorted(r.files):
            series.setdefault(path, []).append(SeriesPoint(
                r.change_id, seen[path], hunks, hunks / n_all, hunks / n_analyzed, survivability(r, path)))
        for path, o in r.files.items():
            seen[path] += o.had_findings
    return series


def _by_exposure(series: dict[str, list[SeriesPoint]], attr: str) -> tuple[list[int], list[float]]:
    buckets: dict[int, list[float]] = defaultdict(list)
    for points in series.values():
        for p in points:
            v = getattr(p, attr)
            if v is not None:
                buckets[p.exposure].append(v)
    levels = sorted(buckets)
    return levels, [math.fsum(buckets[e]) / len(buckets[e]) for e in levels]


def _corr(levels: list[int], values: list[float]) -> Optional[float]:
    try:
        return spearman(levels, values)
    except DegenerateInput:
        return None


def metrics_report(history: Sequence[ChangeRecord],
                   test_classifier: Callable[[str], bool] = is_test_path) -> dict:
    """Exposure series plus exposure-vs-observable rank correlations.

    Observables are averaged per exposure level before correlating. Raises
    DegenerateInput when the primary correlation (test hunks normalized over
    all files in the change) is undefined.
    """
    series = exposure_series(history, test_classifier)
    correlations = {}
    for name, attr in (("test_hunks_per_file_all", "hunks_per_file_all"),
                       ("test_hunks_per_file_analyzed", "hunks_per_file_analyzed"),
                       ("test_hunks_raw", "test_hunks"),
                       ("survivability", "survivability")):
        levels, values = _by_exposure(series, attr)
        correlations[name] = {
            "exposure_levels": levels,
            "mean_values": values,
            "r_s": _corr(levels, values),
        }
    if correlations["test_hunks_per_file_all"]["r_s"] is None:
        levels, values = _by_exposure(series, "hunks_per_file_all")
        spearman(levels, values)  # raises with the specific reason
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "metrics_report",
        "changes": len(history),
        "correlations": correlations,
        "series": {path: [p.to_dict() for p in pts] for path, pts in sorted(series.items())},
    }
