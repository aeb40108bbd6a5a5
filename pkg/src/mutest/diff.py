"""Unified diff parsing with old/new line alignment."""

from __future__ import annotations

import difflib
import re
from pathlib import Path
from dataclasses import dataclass, field
from typing import Iterator, Optional

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@(.*)$")
DEV_NULL = "/dev/null"


class DiffFormatError(Exception):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"diff line {line}: {message}")


@dataclass(frozen=True)
class HunkLine:
    tag: str  # " ", "-", "+"
    text: str
    old_line: Optional[int]
    new_line: Optional[int]


@dataclass
class Hunk:
    old_start: int
    old_count: int
    new_start: int
    new_count: int
    lines: list[HunkLine] = field(default_factory=list)

    @property
    def old_range(self) -> range:
        return range(self.old_start, self.old_start + self.old_count)

    @property
    def new_range(self) -> range:
        return range(self.new_start, self.new_start + self.new_count)

    @property
    def old_first(self) -> int:
        """First old line the hunk covers; an empty range sits after ``old_start``."""
        return self.old_start if self.old_count else self.old_start + 1

    @property
    def new_first(self) -> int:
        return self.new_start if self.new_count else self.new_start + 1

    @property
    def removed(self) -> list[tuple[int, str]]:
        return [(hl.old_line, hl.text) for hl in self.lines if hl.tag == "-"]

    @property
    def added(self) -> list[tuple[int, str]]:
        return [(hl.new_line, hl.text) for hl in self.lines if hl.tag == "+"]

    def runs(self) -> Iterator[list[HunkLine]]:
        """Maximal runs of differing lines, separated by context lines."""
        run: list[HunkLine] = []
        for hl in self.lines:
            if hl.tag == " ":
                if run:
                    yield run
                run = []
            else:
                run.append(hl)
        if run:
            yield run


@dataclass
class FileDiff:
    old_path: str
    new_path: str
    hunks: list[Hunk] = field(default_factory=list)

    @property
    def path(self) -> str:
        return self.old_path if self.new_path == DEV_NULL else self.new_path

    @property
    def added_lines(self) -> set[int]:
        """New-version line numbers that were added or edited."""
        return {n for h in self.hunks for n, _ in h.added}

    @property
    def removed_lines(self) -> set[int]:
        return {n for h in self.hunks for n, _ in h.removed}

    def old_to_new(self, line: int) -> Optional[int]:
        """New line number for an unchanged old line, None if it was removed."""
        return self._align(line, old_side=True)

    def new_to_old(self, line: int) -> Optional[int]:
        """Old line number for an unchanged new line, None if it was added."""
        return self._align(line, old_side=False)

    def _align(self, line: int, old_side: bool) -> Optional[int]:
        delta = 0
        for h in self.hunks:
            src_first, src_count = (h.old_first, h.old_count) if old_side else (h.new_first, h.new_count)
            dst_first, dst_count = (h.new_first, h.new_count) if old_side else (h.old_first, h.old_count)
            if line < src_first:
                break
            if line < src_first + src_count:
                for hl in h.lines:
                    if (hl.old_line if old_side else hl.new_line) == line:
                        return hl.new_line if old_side else hl.old_line
            delta = (dst_first + dst_count) - (src_first + src_count)
        return line + delta


@dataclass
class ChangeSet:
    files: list[FileDiff] = field(default_factory=list)

    def file(self, path: str) -> Optional[FileDiff]:
        for f in self.files:
            if f.path == path:
                return f
        return None

    @property
    def paths(self) -> list[str]:
        return [f.path for f in self.files]


def is_test_path(path: str) -> bool:
    """Default test-file classifier: a ``tests/`` path segment or a ``_test.mini`` name."""
    parts = path.split("/")
    return "tests" in parts[:-1] or parts[-1].endswith("_test.mini")


def _strip_prefix(raw: str) -> str:
    path = raw.split("\t", 1)[0].strip()
    if path == DEV_NULL:
        return path
    if path.startswith(("a/", "b/")):
        return path[2:]
    return path


def parse_unified_diff(text: str) -> ChangeSet:
    """Parse ``diff -u`` / ``git diff`` output."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    cs = ChangeSet()
    current: Optional[FileDiff] = None
    i = 0
    while i < len(lines):
        line = lines[i]
        lineno = i + 1
        if line.startswith("--- "):
            if i + 1 >= len(lines) or not lines[i + 1].startswith("+++ "):
                raise DiffFormatError("'---' header not followed by '+++'", lineno + 1)
            current = FileDiff(_strip_prefix(line[4:]), _strip_prefix(lines[i + 1][4:]))
            cs.files.append(current)
            i += 2
            continue
        if line.startswith("@@"):
            m = _HUNK_RE.match(line)
            if m is None:
                raise DiffFormatError(f"malformed hunk header {line!r}", lineno)
            if current is None:
                raise DiffFormatError("hunk before any file header", lineno)
            old_start, new_start = int(m.group(1)), int(m.group(3))
            old_count = 1 if m.group(2) is None else int(m.group(2))
            new_count = 1 if m.group(4) is None else int(m.group(4))
            hunk = Hunk(old_start, old_count, new_start, new_count)
            if current.hunks:
                prev = current.hunks[-1]
                if old_start < prev.old_start + prev.old_count or new_start < prev.new_start + prev.new_count:
                    raise DiffFormatError("hunks overlap or are out of order", lineno)
            i = _read_hunk(lines, i + 1, hunk)
            current.hunks.append(hunk)
            continue
        # git extended headers, "diff ..." lines, "\ No newline" markers, preamble text.
        i += 1
    return cs


def _read_hunk(lines: list[str], i: int, hunk: Hunk) -> int:
    old_no = hunk.old_start if hunk.old_count else hunk.old_start + 1
    new_no = hunk.new_start if hunk.new_count else hunk.new_start + 1
    old_left, new_left = hunk.old_count, hunk.new_count
    while old_left > 0 or new_left > 0:
        if i >= len(lines):
            raise DiffFormatError("hunk is shorter than its header says", i + 1)
        line = lines[i]
        if line.startswith("\\"):
            i += 1
            continue
        tag = line[:1] or " "
        body = line[1:]
        if tag == " ":
            if old_left <= 0 or new_left <= 0:
                raise DiffFormatError("context line exceeds hunk size", i + 1)
            hunk.lines.append(HunkLine(" ", body, old_no, new_no))
            old_no += 1
            new_no += 1
            old_left -= 1
            new_left -= 1
        elif tag == "-":
            if old_left <= 0:
                raise DiffFormatError("removed line exceeds hunk size", i + 1)
            hunk.lines.append(HunkLine("-", body, old_no, None))
            old_no += 1
            old_left -= 1
        elif tag == "+":
            if new_left <= 0:
                raise DiffFormatError("added line exceeds hunk size", i + 1)
            hunk.lines.append(HunkLine("+", body, None, new_no))
            new_no += 1
            new_left -= 1
        else:
            raise DiffFormatError(f"unexpected line in hunk: {line!r}", i + 1)
        i += 1
    while i < len(lines) and lines[i].startswith("\\"):
        i += 1
    return i


def unified_diff(files: dict[str, tuple[str, str]], context: int = 3) -> str:
    """Render a unified diff for ``{path: (old_text, new_text)}``."""
    out = []
    for path in sorted(files):
        old, new = files[path]
        chunk = list(difflib.unified_diff(old.splitlines(keepends=True), new.splitlines(keepends=True),
                                          f"a/{path}", f"b/{path}", n=context))
        for line in chunk:
            out.append(line if line.endswith("\n") else line + "\n")
    return "".join(out)


def diff_trees(old_root: str, new_root: str, context: int = 3, pattern: str = "**/*.mini") -> str:
    """Unified diff between two directory trees, with root-relative paths."""
    old_root_p, new_root_p = Path(old_root), Path(new_root)
    rels = {p.relative_to(old_root_p).as_posix() for p in old_root_p.glob(pattern)}
    rels |= {p.relative_to(new_root_p).as_posix() for p in new_root_p.glob(pattern)}
    files = {}
    for rel in rels:
        old = old_root_p / rel
        new = new_root_p / rel
        old_text = old.read_text(encoding="utf-8") if old.exists() else ""
        new_text = new.read_text(encoding="utf-8") if new.exists() else ""
        if old_text != new_text:
            files[rel] = (old_text, new_text)
    return unified_diff(files, context)
