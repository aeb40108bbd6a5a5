"""Per-context operator productivity statistics and single-mutant selection."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .mutagen import Mutant, NodeKind, OperatorKind
from .reports import atomic_write


class Event(str, Enum):
    GENERATED = "Generated"
    SURVIVED = "Survived"
    KILLED = "Killed"
    PLEASE_FIX = "PleaseFix"
    NOT_USEFUL = "NotUseful"


class FeedbackVerdict(str, Enum):
    PLEASE_FIX = "PleaseFix"
    NOT_USEFUL = "NotUseful"

    @classmethod
    def parse(cls, text: str) -> FeedbackVerdict:
        norm = text.replace("-", "").replace("_", "").lower()
        for v in cls:
            if v.value.lower() == norm:
                return v
        raise ValueError(f"unknown feedback verdict {text!r} (use please-fix or not-useful)")

    @property
    def event(self) -> Event:
        return Event(self.value)


class InvariantViolation(Exception):
    pass


class StatsFormatError(Exception):
    pass


@dataclass(frozen=True, order=True)
class ContextKey:
    operator: OperatorKind
    node_kind: NodeKind

    @classmethod
    def of(cls, mutant: Mutant) -> ContextKey:
        return cls(mutant.operator, mutant.point.node_kind)


ALL_KEYS = tuple(ContextKey(op, kind) for op in OperatorKind for kind in NodeKind)


@dataclass
class Counters:
    generated: int = 0
    survived: int = 0
    killed: int = 0
    please_fix: int = 0
    not_useful: int = 0


_EVENT_FIELD = {
    Event.GENERATED: "generated",
    Event.SURVIVED: "survived",
    Event.KILLED: "killed",
    Event.PLEASE_FIX: "please_fix",
    Event.NOT_USEFUL: "not_useful",
}

STATS_FIELDS = ("operator", "node_kind", "generated", "survived", "killed", "please_fix", "not_useful")


class OperatorStats:
    """Counters keyed by (operator, node kind).

    Mutation goes through :meth:`record`; a single writer is assumed.
    """

    def __init__(self, counters: Optional[dict[ContextKey, Counters]] = None):
        self._counters: dict[ContextKey, Counters] = dict(counters or {})

    def get(self, key: ContextKey) -> Counters:
        return self._counters.get(key, Counters())

    def record(self, key: ContextKey, event: Event) -> OperatorStats:
        c = self._counters.setdefault(key, Counters())
        attr = _EVENT_FIELD[Event(event)]
        setattr(c, attr, getattr(c, attr) + 1)
        if c.survived + c.killed > c.generated or c.please_fix + c.not_useful > c.generated:
            setattr(c, attr, getattr(c, attr) - 1)
            raise InvariantViolation(
                f"{Event(event).value} on {key.operator.value}/{key.node_kind.value} would exceed "
                f"generated={c.generated}")
        return self

    def copy(self) -> OperatorStats:
        return OperatorStats({k: Counters(**vars(v)) for k, v in self._counters.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorStats):
            return NotImplemented
        return all(self.get(k) == other.get(k) for k in ALL_KEYS)

    # -- persistence --------------------------------------------------------

    def dumps(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(STATS_FIELDS)
        for key in ALL_KEYS:
            c = self.get(key)
            writer.writerow([key.operator.value, key.node_kind.value, c.generated, c.survived,
                             c.killed, c.please_fix, c.not_useful])
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> OperatorStats:
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or tuple(reader.fieldnames) != STATS_FIELDS:
            raise StatsFormatError(f"expected header {','.join(STATS_FIELDS)}")
        counters = {}
        for row in reader:
            try:
                key = ContextKey(OperatorKind(row["operator"]), NodeKind(row["node_kind"]))
                c = Counters(**{f.name: int(row[f.name]) for f in fields(Counters)})
            except (ValueError, TypeError) as e:
                raise StatsFormatError(f"line {reader.line_num}: {e}") from e
            if min(vars(c).values()) < 0:
                raise StatsFormatError(f"line {reader.line_num}: negative counter")
            counters[key] = c
        return cls(counters)

    @classmethod
    def load(cls, path: str | Path) -> OperatorStats:
        path = Path(path)
        if not path.exists():
            return cls()
        return cls.loads(path.read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        atomic_write(Path(path), self.dumps())


def record_outcome(stats: OperatorStats, key: ContextKey, event: Event) -> OperatorStats:
    return stats.record(key, event)


def score_operator(stats: OperatorStats, key: ContextKey, survival_weight: float = 0.5) -> float:
    """Laplace-smoothed survival rate blended with smoothed reviewer approval."""
    c = stats.get(key)
    survival = (c.survived + 1) / (c.survived + c.killed + 2)
    productivity = (c.please_fix + 1) / (c.please_fix + c.not_useful + 2)
    return survival_weight * survival + (1 - survival_weight) * productivity


def select_mutant_for_line(candidates: Iterable[Mutant], stats: OperatorStats,
                           survival_weight: float = 0.5) -> Optional[Mutant]:
    """Highest-scoring candidate; ties go to operator order, then variant index."""
    best: Optional[tuple] = None
    line = None
    for position, m in enumerate(candidates):
        if line is None:
            line = (m.path, m.line)
        elif (m.path, m.line) != line:
            raise ValueError("candidates must all sit on the same line")
        key = (-score_operator(stats, ContextKey.of(m), survival_weight), m.operator.rank,
               m.variant, position)
        if best is None or key < best[0]:
            best = (key, m)
    return None if best is None else best[1]
