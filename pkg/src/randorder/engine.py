"""Execution of deterministic online algorithms with revoking.

An algorithm is supplied as a zero-argument factory (a class works) so every
run gets fresh private state.  The engine never tells an algorithm how many
items the instance holds.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Protocol, Sequence

from .errors import IllegalDecision, InstanceTooLarge, InvalidOrder
from .intervals import Instance, Interval, Number

EXACT_LIMIT = 8

#: Version tag of the seed -> permutation mapping implemented by ``shuffled``.
PERMUTATION_STREAM_VERSION = 1


class DecisionKind(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    REPLACE = "replace"


@dataclass(frozen=True)
class Decision:
    kind: DecisionKind
    victim: int | None = None

    def __str__(self) -> str:
        if self.kind is DecisionKind.REPLACE:
            return f"replace({self.victim})"
        return self.kind.value


ACCEPT = Decision(DecisionKind.ACCEPT)
REJECT = Decision(DecisionKind.REJECT)


def replace(victim: int) -> Decision:
    return Decision(DecisionKind.REPLACE, victim)


class OnlineAlgorithm(Protocol):
    def decide(self, held: Mapping[int, Interval], interval: Interval) -> Decision:
        ...


AlgorithmFactory = Callable[[], OnlineAlgorithm]


class Algorithm1:
    """Greedy acceptance; a conflicting arrival may only replace an interval
    that strictly contains it."""

    name = "algorithm1"

    def decide(self, held: Mapping[int, Interval], interval: Interval) -> Decision:
        s, f = interval.start, interval.finish
        container = None
        conflicted = False
        for h in held.values():
            if h.start < f and s < h.finish:
                conflicted = True
                if h.start <= s and f <= h.finish and (h.start != s or h.finish != f):
                    # held intervals are disjoint, so at most one can contain the arrival
                    assert container is None, "two held intervals contain one arrival"
                    container = h
        if not conflicted:
            return ACCEPT
        if container is not None:
            return Decision(DecisionKind.REPLACE, container.id)
        return REJECT


@dataclass(frozen=True)
class RunTrace:
    instance: Instance
    order: tuple[int, ...]
    events: tuple[tuple[int, Decision], ...]
    final: frozenset[int]
    snapshots: tuple[frozenset[int], ...] | None = None

    def final_intervals(self) -> list[Interval]:
        by_id = self.instance.by_id
        return [by_id[i] for i in sorted(self.final)]


def check_order(inst: Instance, order: Sequence[int]) -> tuple[int, ...]:
    order = tuple(order)
    if len(order) != inst.n or set(order) != set(inst.ids):
        raise InvalidOrder(f"order {order} is not a permutation of the instance ids")
    return order


def run(
    alg: AlgorithmFactory,
    inst: Instance,
    order: Sequence[int],
    snapshots: bool = False,
) -> RunTrace:
    order = check_order(inst, order)
    by_id = inst.by_id
    algorithm = alg()
    held: dict[int, Interval] = {}
    view = MappingProxyType(held)
    events = []
    shots = [] if snapshots else None
    for i in order:
        iv = by_id[i]
        decision = algorithm.decide(view, iv)
        kind = decision.kind
        if kind is DecisionKind.ACCEPT:
            for h in held.values():
                if h.start < iv.finish and iv.start < h.finish:
                    raise IllegalDecision(f"accepting {i} conflicts with held {h.id}")
            held[i] = iv
        elif kind is DecisionKind.REPLACE:
            victim = held.get(decision.victim)
            if victim is None:
                raise IllegalDecision(f"replace victim {decision.victim} is not held")
            if not victim.overlaps(iv):
                raise IllegalDecision(f"replace victim {victim.id} does not conflict with {i}")
            del held[victim.id]
            for h in held.values():
                if h.start < iv.finish and iv.start < h.finish:
                    raise IllegalDecision(f"replacing with {i} still conflicts with held {h.id}")
            held[i] = iv
        elif kind is not DecisionKind.REJECT:
            raise IllegalDecision(f"unknown decision {decision!r}")
        events.append((i, decision))
        if shots is not None:
            shots.append(frozenset(held))
    return RunTrace(
        instance=inst,
        order=order,
        events=tuple(events),
        final=frozenset(held),
        snapshots=tuple(shots) if shots is not None else None,
    )


# -- metrics ----------------------------------------------------------------

Metric = Callable[[RunTrace], Number]


def size(trace: RunTrace) -> int:
    return len(trace.final)


def weight(trace: RunTrace) -> Number:
    by_id = trace.instance.by_id
    return sum(by_id[i].weight for i in trace.final)


# -- orders -----------------------------------------------------------------


def all_orders(inst: Instance, limit: int = EXACT_LIMIT) -> Iterator[tuple[int, ...]]:
    if inst.n > limit:
        raise InstanceTooLarge(f"exact enumeration is limited to {limit} items, got {inst.n}")
    return permutations(inst.ids)


def copy_class_orders(inst: Instance, limit: int = EXACT_LIMIT) -> Iterator[tuple[int, ...]]:
    """One representative order per arrangement of identical intervals.

    Intervals with equal (start, finish, weight) are interchangeable.  Each
    distinct sequence of copy classes is yielded once, with the copies of a
    class taking their ids in increasing order.  Every representative stands
    for the same number of full orders, so the mean of any metric that does
    not depend on which copy is which is unchanged.
    """
    if inst.n > limit:
        raise InstanceTooLarge(f"exact enumeration is limited to {limit} items, got {inst.n}")
    classes: dict[tuple, list[int]] = {}
    for iv in inst.intervals:
        classes.setdefault(iv.vector(), []).append(iv.id)
    members = list(classes.values())
    seq = sorted(c for c, ids in enumerate(members) for _ in ids)
    while True:
        taken = [0] * len(members)
        order = []
        for c in seq:
            order.append(members[c][taken[c]])
            taken[c] += 1
        yield tuple(order)
        # next lexicographic arrangement of the class sequence
        i = len(seq) - 2
        while i >= 0 and seq[i] >= seq[i + 1]:
            i -= 1
        if i < 0:
            return
        j = len(seq) - 1
        while seq[j] <= seq[i]:
            j -= 1
        seq[i], seq[j] = seq[j], seq[i]
        seq[i + 1:] = reversed(seq[i + 1:])


def shuffled(items: Sequence, rng: random.Random) -> list:
    """Fisher-Yates shuffle driven only by ``rng.random()``.

    ``random.Random.random`` is the one stream CPython promises to keep
    reproducible, so the seed -> permutation mapping (stream version 1) is
    stable across interpreter releases.  The float-to-index step has a bias
    below 2**-50, far beneath Monte Carlo resolution.
    """
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = int(rng.random() * (i + 1))
        out[i], out[j] = out[j], out[i]
    return out


def random_orders(ids: Sequence[int], trials: int, seed: int) -> Iterator[list[int]]:
    rng = random.Random(seed)
    for _ in range(trials):
        yield shuffled(ids, rng)


# -- expectations -----------------------------------------------------------


def exact_expectation(
    alg: AlgorithmFactory,
    inst: Instance,
    metric: Metric = size,
    limit: int = EXACT_LIMIT,
) -> Fraction:
    """Average of ``metric`` over all n! arrival orders, as an exact fraction."""
    total = Fraction(0)
    count = 0
    for order in all_orders(inst, limit):
        total += Fraction(metric(run(alg, inst, order)))
        count += 1
    if count == 0:
        return Fraction(0)
    return total / count


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    trials: int


class RunningStats:
    """Welford accumulator for sample mean and standard error."""

    def __init__(self) -> None:
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def add(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (x - self.mean)

    def estimate(self) -> Estimate:
        if self.count < 2:
            return Estimate(self.mean, 0.0, self.count)
        var = self._m2 / (self.count - 1)
        return Estimate(self.mean, math.sqrt(max(var, 0.0) / self.count), self.count)


def estimate(values: Iterable[float]) -> Estimate:
    stats = RunningStats()
    for v in values:
        stats.add(float(v))
    return stats.estimate()


def monte_carlo(
    alg: AlgorithmFactory,
    inst: Instance,
    trials: int,
    seed: int,
    metric: Metric = size,
) -> Estimate:
    if trials < 1:
        raise ValueError("trials must be positive")
    return estimate(metric(run(alg, inst, order)) for order in random_orders(inst.ids, trials, seed))
