"""Exact offline optima: competitive-ratio denominators and test oracles."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InstanceTooLarge
from .intervals import Instance, Interval, Number

BRUTE_FORCE_LIMIT = 20
KNAPSACK_LIMIT = 25


@dataclass(frozen=True)
class OptResult:
    value: Number
    witness: frozenset[int]


def opt_unweighted(inst: Instance) -> OptResult:
    """Maximum number of pairwise disjoint intervals (earliest-finish greedy)."""
    chosen = []
    last_finish = None
    for iv in sorted(inst.intervals, key=lambda iv: (iv.finish, iv.start, iv.id)):
        if last_finish is None or iv.start >= last_finish:
            chosen.append(iv.id)
            last_finish = iv.finish
    return OptResult(len(chosen), frozenset(chosen))


def _max_weight(intervals: Sequence[Interval]) -> Number:
    """Classical weighted interval scheduling over intervals sorted by finish."""
    ordered = sorted(intervals, key=lambda iv: iv.finish)
    finishes = [iv.finish for iv in ordered]
    best = [0] * (len(ordered) + 1)
    for i, iv in enumerate(ordered, 1):
        # number of intervals finishing no later than iv starts
        p = bisect_right(finishes, iv.start, 0, i - 1)
        best[i] = max(best[i - 1], best[p] + iv.weight)
    return best[-1]


def _constrained_max(inst: Instance, forced: set[int], banned: set[int]) -> Number | None:
    chosen = [inst.by_id[i] for i in forced]
    free = [
        iv
        for iv in inst.intervals
        if iv.id not in forced
        and iv.id not in banned
        and not any(iv.overlaps(c) for c in chosen)
    ]
    if any(a.overlaps(b) for i, a in enumerate(chosen) for b in chosen[i + 1:]):
        return None
    return sum(c.weight for c in chosen) + _max_weight(free)


def opt_weighted(inst: Instance) -> OptResult:
    """Maximum total weight of a feasible subset.

    Among equal-weight optima the witness is the lexicographically smallest
    sorted id tuple.  It is built one id at a time: at each step either the
    current prefix is already optimal (shortest tuple wins) or we add the
    smallest next id that still admits an optimum avoiding every skipped id.
    """
    best = _max_weight(inst.intervals)
    ids = sorted(inst.ids)
    chosen: set[int] = set()
    banned: set[int] = set()
    pos = 0
    while sum(inst.by_id[i].weight for i in chosen) != best:
        while True:
            x = ids[pos]
            pos += 1
            value = _constrained_max(inst, chosen | {x}, banned)
            if value is not None and value == best:
                chosen.add(x)
                break
            banned.add(x)
    return OptResult(best, frozenset(chosen))


def brute_force_opt(inst: Instance, weighted: bool = False) -> Number:
    """Exact optimum by enumerating every feasible subset (n <= 20)."""
    if inst.n > BRUTE_FORCE_LIMIT:
        raise InstanceTooLarge(f"brute force is limited to {BRUTE_FORCE_LIMIT} intervals, got {inst.n}")
    ordered = sorted(inst.intervals, key=lambda iv: (iv.start, iv.finish))
    best = 0

    def extend(i: int, last_finish, total) -> None:
        nonlocal best
        if total > best:
            best = total
        for j in range(i, len(ordered)):
            iv = ordered[j]
            if last_finish is None or iv.start >= last_finish:
                extend(j + 1, iv.finish, total + (iv.weight if weighted else 1))

    extend(0, None, 0)
    return best


def _size_value(item) -> tuple[Number, Number]:
    if hasattr(item, "size"):
        return item.size, item.value
    size, value = item
    return size, value


def knapsack_opt(items: Iterable, capacity: Number) -> Number:
    """Best total value of a subset fitting in ``capacity``; depth-first with pruning.

    ``items`` holds ``(size, value)`` pairs or objects with ``size``/``value``.
    """
    pairs = [_size_value(it) for it in items]
    if len(pairs) > KNAPSACK_LIMIT:
        raise InstanceTooLarge(f"knapsack enumeration is limited to {KNAPSACK_LIMIT} items, got {len(pairs)}")
    pairs.sort(key=lambda p: p[1], reverse=True)
    suffix = [0] * (len(pairs) + 1)
    for i in range(len(pairs) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + pairs[i][1]
    best = 0

    def visit(i: int, room, total) -> None:
        nonlocal best
        if total > best:
            best = total
        if i == len(pairs) or total + suffix[i] <= best:
            return
        size, value = pairs[i]
        if size <= room:
            visit(i + 1, room - size, total + value)
        visit(i + 1, room, total)

    visit(0, capacity, 0)
    return best
