"""Interval geometry, conflict classification and instance statistics.

Intervals occupy half-open segments ``[start, finish)``.  Coordinates are
compared exactly, so generators only emit values with an exact binary
representation (integers, halves) or :class:`fractions.Fraction` objects.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence, Union

Number = Union[int, float, Fraction]


class ConflictKind(enum.Enum):
    DISJOINT = "disjoint"
    PARTIAL = "partial"
    FIRST_CONTAINS_SECOND = "first_contains_second"
    SECOND_CONTAINS_FIRST = "second_contains_first"
    IDENTICAL = "identical"

    def swapped(self) -> "ConflictKind":
        if self is ConflictKind.FIRST_CONTAINS_SECOND:
            return ConflictKind.SECOND_CONTAINS_FIRST
        if self is ConflictKind.SECOND_CONTAINS_FIRST:
            return ConflictKind.FIRST_CONTAINS_SECOND
        return self


@dataclass(frozen=True)
class Interval:
    id: int
    start: Number
    finish: Number
    weight: Number = 1
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not self.start < self.finish:
            raise ValueError(f"interval {self.id}: start {self.start} must be < finish {self.finish}")
        if self.weight < 0:
            raise ValueError(f"interval {self.id}: negative weight {self.weight}")

    @property
    def length(self) -> Number:
        return self.finish - self.start

    @property
    def span(self) -> tuple[Number, Number]:
        return (self.start, self.finish)

    def overlaps(self, other: "Interval") -> bool:
        return self.start < other.finish and other.start < self.finish

    def strictly_contains(self, other: "Interval") -> bool:
        """True when ``other`` is a proper subset of ``self``."""
        return (
            self.start <= other.start
            and other.finish <= self.finish
            and (self.start != other.start or self.finish != other.finish)
        )

    def vector(self) -> tuple[Number, Number, Number]:
        """Item vector ``(start, finish, weight)`` used for lexicographic ordering."""
        return (self.start, self.finish, self.weight)

    def name(self) -> str:
        return self.label or f"#{self.id}"


def classify_conflict(a: Interval, b: Interval) -> ConflictKind:
    if a.finish <= b.start or b.finish <= a.start:
        return ConflictKind.DISJOINT
    if a.start == b.start and a.finish == b.finish:
        return ConflictKind.IDENTICAL
    if a.start <= b.start and b.finish <= a.finish:
        return ConflictKind.FIRST_CONTAINS_SECOND
    if b.start <= a.start and a.finish <= b.finish:
        return ConflictKind.SECOND_CONTAINS_FIRST
    return ConflictKind.PARTIAL


def is_feasible_set(intervals: Iterable[Interval]) -> bool:
    """True iff the intervals are pairwise disjoint."""
    ordered = sorted(intervals, key=lambda iv: (iv.start, iv.finish))
    return all(prev.finish <= nxt.start for prev, nxt in zip(ordered, ordered[1:]))


@dataclass(frozen=True)
class InstanceStats:
    n: int
    k: int
    nesting_depth: int


@dataclass(frozen=True)
class Instance:
    intervals: tuple[Interval, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervals", tuple(self.intervals))
        ids = [iv.id for iv in self.intervals]
        if len(set(ids)) != len(ids):
            raise ValueError("interval ids must be unique within an instance")

    @classmethod
    def from_spans(
        cls,
        spans: Sequence[tuple[Number, Number]],
        weights: Sequence[Number] | None = None,
        labels: Sequence[str] | None = None,
        name: str = "",
    ) -> "Instance":
        weights = weights if weights is not None else [1] * len(spans)
        labels = labels if labels is not None else [""] * len(spans)
        return cls(
            tuple(
                Interval(i, s, f, w, lab)
                for i, ((s, f), w, lab) in enumerate(zip(spans, weights, labels))
            ),
            name=name,
        )

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @cached_property
    def by_id(self) -> dict[int, Interval]:
        return {iv.id: iv for iv in self.intervals}

    @cached_property
    def ids(self) -> tuple[int, ...]:
        return tuple(iv.id for iv in self.intervals)

    @cached_property
    def by_label(self) -> dict[str, Interval]:
        return {iv.label: iv for iv in self.intervals if iv.label}

    @property
    def n(self) -> int:
        return len(self.intervals)

    @cached_property
    def lengths(self) -> tuple[Number, ...]:
        return tuple(sorted({iv.length for iv in self.intervals}))

    @property
    def k(self) -> int:
        return len(self.lengths)

    @cached_property
    def nesting_depth(self) -> int:
        # longest chain of strict containments, visited from the longest interval down
        ordered = sorted(self.intervals, key=lambda iv: iv.length, reverse=True)
        chain = [1] * len(ordered)
        for i, inner in enumerate(ordered):
            for j in range(i):
                if ordered[j].strictly_contains(inner):
                    chain[i] = max(chain[i], chain[j] + 1)
        return max(chain, default=1) - 1

    def subset(self, ids: Iterable[int], name: str = "") -> "Instance":
        keep = set(ids)
        return Instance(tuple(iv for iv in self.intervals if iv.id in keep), name=name)

    def ids_labelled(self, *labels: str) -> list[int]:
        return [self.by_label[lab].id for lab in labels]


def instance_stats(inst: Instance) -> InstanceStats:
    return InstanceStats(n=inst.n, k=inst.k, nesting_depth=inst.nesting_depth)


def conflict_pattern(inst: Instance) -> dict[tuple[str, str], ConflictKind]:
    """Pairwise conflict kinds keyed by interval names, in instance order."""
    return {
        (a.name(), b.name()): classify_conflict(a, b)
        for a, b in combinations(inst.intervals, 2)
    }


# -- text format ------------------------------------------------------------


def parse_number(token: str) -> Number:
    try:
        return int(token)
    except ValueError:
        return Fraction(token)


def format_number(x: Number) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else str(x)
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)


def parse_instance(text: str, name: str = "") -> Instance:
    """Parse ``start finish [weight]`` lines; ``#`` starts a comment.

    Ids follow line order.  A trailing comment on an interval line becomes
    that interval's label, so generated instances round-trip.
    """
    intervals = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, _, comment = raw.partition("#")
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 'start finish [weight]', got {raw!r}")
        start, finish = parse_number(parts[0]), parse_number(parts[1])
        weight = parse_number(parts[2]) if len(parts) == 3 else 1
        intervals.append(Interval(len(intervals), start, finish, weight, comment.strip()))
    return Instance(tuple(intervals), name=name)


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(), name=path.stem)


def format_instance(inst: Instance) -> str:
    lines = [f"# {inst.name}" if inst.name else "# instance"]
    for iv in inst.intervals:
        row = f"{format_number(iv.start)} {format_number(iv.finish)}"
        if iv.weight != 1:
            row += f" {format_number(iv.weight)}"
        if iv.label:
            row += f"  # {iv.label}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def instance_cache(inst: Instance, key: str, factory):
    """Memoise a derived value on ``inst`` (same storage as ``cached_property``)."""
    store = inst.__dict__
    try:
        return store[key]
    except KeyError:
        value = store[key] = factory(inst)
        return value
