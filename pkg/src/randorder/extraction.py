"""One-bit extraction from arrival order, plus pairwise multi-bit extraction.

Items are vectors compared lexicographically (plain tuple order); two items
share a type when they are equal.  Numbers are promoted to 1-vectors.  Every
extractor is an incremental state machine fed one arrival at a time, so it
can ride along an online algorithm without lookahead; the ``process1``,
``process2`` and ``combine`` helpers pull from an iterable and stop reading
as soon as the bit is known.

Bit conventions:

* Process 1 returns 1 iff the first arrival of a new type has an even index.
* Process 2 returns 1 iff the first item is smaller than the second.
* COMBINE returns 1 iff the second item is smaller than the first when the
  two differ.  When they are identical it runs Process 1 with indices
  counted from the second item, so the earliest possible new type (the
  third item) yields 1.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .engine import EXACT_LIMIT, shuffled
from .errors import DomainError, ExtractionFailed, InstanceTooLarge

TypeKey = Callable[[tuple], object]


class Failure(enum.Enum):
    NO_SECOND_TYPE = "no_second_type"
    TOO_FEW_ITEMS = "too_few_items"
    IDENTICAL_FIRST_PAIR = "identical_first_pair"
    ALL_IDENTICAL = "all_identical"


@dataclass(frozen=True)
class ExtractionOutcome:
    bit: int | None = None
    resolved_at: int | None = None
    failure: Failure | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def as_item(x) -> tuple:
    return tuple(x) if isinstance(x, (tuple, list)) else (x,)


def _identity(item: tuple):
    return item


class Process1:
    """Parity of the arrival index at which a second type first shows up."""

    def __init__(self, type_key: TypeKey | None = None, offset: int = 0) -> None:
        # ``offset`` items were seen before this process started counting
        self.type_key = type_key or _identity
        self.offset = offset
        self.count = 0
        self.first_type = None
        self.outcome: ExtractionOutcome | None = None

    def push(self, item) -> ExtractionOutcome | None:
        if self.outcome is not None:
            raise RuntimeError("process already resolved")
        self.count += 1
        t = self.type_key(as_item(item))
        if self.count == 1:
            self.first_type = t
        elif t != self.first_type:
            self.outcome = ExtractionOutcome(1 - self.count % 2, self.offset + self.count)
        return self.outcome

    def close(self) -> ExtractionOutcome:
        if self.outcome is not None:
            return self.outcome
        return ExtractionOutcome(failure=Failure.TOO_FEW_ITEMS if self.count == 0 else Failure.NO_SECOND_TYPE)


class Process2:
    """Order of the first two items; they must differ."""

    def __init__(self) -> None:
        self.first = None
        self.count = 0
        self.outcome: ExtractionOutcome | None = None

    def push(self, item) -> ExtractionOutcome | None:
        if self.outcome is not None:
            raise RuntimeError("process already resolved")
        self.count += 1
        item = as_item(item)
        if self.count == 1:
            self.first = item
        elif item == self.first:
            self.outcome = ExtractionOutcome(failure=Failure.IDENTICAL_FIRST_PAIR)
        else:
            self.outcome = ExtractionOutcome(int(self.first < item), 2)
        return self.outcome

    def close(self) -> ExtractionOutcome:
        return self.outcome or ExtractionOutcome(failure=Failure.TOO_FEW_ITEMS)


class Combine:
    """Order of the first two items if they differ, else Process 1 from item two on.

    ``type_key`` only affects the Process 1 branch (e.g. slot parity); the
    first-pair test and comparison always use the full item vector.
    """

    def __init__(self, type_key: TypeKey | None = None) -> None:
        self.type_key = type_key
        self.count = 0
        self.first = None
        self.fallback: Process1 | None = None
        self.outcome: ExtractionOutcome | None = None

    def push(self, item) -> ExtractionOutcome | None:
        if self.outcome is not None:
            raise RuntimeError("process already resolved")
        self.count += 1
        item = as_item(item)
        if self.count == 1:
            self.first = item
        elif self.count == 2 and item != self.first:
            self.outcome = ExtractionOutcome(int(item < self.first), 2)
        else:
            if self.fallback is None:
                self.fallback = Process1(self.type_key, offset=1)
            self.outcome = self.fallback.push(item)
        return self.outcome

    def close(self) -> ExtractionOutcome:
        if self.outcome is not None:
            return self.outcome
        return ExtractionOutcome(failure=Failure.TOO_FEW_ITEMS if self.count < 2 else Failure.ALL_IDENTICAL)


def _drive(extractor, stream: Iterable) -> ExtractionOutcome:
    for item in stream:
        out = extractor.push(item)
        if out is not None:
            return out
    return extractor.close()


def process1(stream: Iterable, type_key: TypeKey | None = None) -> ExtractionOutcome:
    return _drive(Process1(type_key), stream)


def process2(stream: Iterable) -> ExtractionOutcome:
    return _drive(Process2(), stream)


def combine(stream: Iterable, type_key: TypeKey | None = None) -> ExtractionOutcome:
    return _drive(Combine(type_key), stream)


EXTRACTORS: dict[str, Callable[[], object]] = {
    "process1": Process1,
    "process2": Process2,
    "combine": Combine,
}


def pair_bits(stream: Iterable, count: int) -> list[int]:
    """``count`` bits, each from Process 2 on the next two items."""
    it = iter(stream)
    bits = []
    for j in range(1, count + 1):
        out = _drive(Process2(), _take(it, 2))
        if not out.ok:
            raise ExtractionFailed(out.failure, j)
        bits.append(out.bit)
    return bits


def _take(it: Iterator, n: int) -> Iterator:
    for _ in range(n):
        try:
            yield next(it)
        except StopIteration:
            return


# -- analytic bias ----------------------------------------------------------


def bias_process1(alpha):
    """Pr(bit = 1) for Process 1 with two types, the first at frequency ``alpha``."""
    return (2 * alpha**2 - 2 * alpha - 1) / ((alpha + 1) * (alpha - 2))


def bias_combine(r):
    """Pr(bit = 1) for COMBINE when the first arrival has frequency ``r``."""
    return (1 - r) / 2 + r / (1 + r)


ANALYTIC = {"process1": bias_process1, "combine": bias_combine}


def analytic_bias(model: str, p):
    """Infinite-population Pr(bit = 1); exact when ``p`` is a Fraction or int."""
    if model not in ANALYTIC:
        raise DomainError(f"no closed form for model {model!r}")
    if isinstance(p, int):
        p = Fraction(p)
    if not 0 < p < 1:
        raise DomainError(f"parameter must lie in (0, 1), got {p}")
    return ANALYTIC[model](p)


def bias_curve(model: str, resolution: int = 999) -> list[tuple[Fraction, Fraction]]:
    """Exact curve on the grid i / (resolution + 1), i = 1..resolution."""
    step = Fraction(1, resolution + 1)
    return [(i * step, analytic_bias(model, i * step)) for i in range(1, resolution + 1)]


def curve_argmax(curve: Sequence[tuple]) -> tuple:
    return max(curve, key=lambda pv: pv[1])


# -- populations and empirical bias -----------------------------------------

WITH_REPLACEMENT = "with_replacement"
PERMUTATION = "permutation"


@dataclass(frozen=True)
class PopulationSpec:
    """Items with frequency weights.

    In ``with_replacement`` mode items are drawn i.i.d. in proportion to the
    weights.  In ``permutation`` mode the weights are integer multiplicities
    and each trial is a uniform shuffle of the resulting multiset.  ``first``
    optionally pins the first arrival to ``items[first]``, which conditions
    on the first item's type.
    """

    items: tuple
    weights: tuple
    mode: str = WITH_REPLACEMENT
    first: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(as_item(x) for x in self.items))
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.items) != len(self.weights) or not self.items:
            raise ValueError("items and weights must be non-empty and of equal length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if self.mode not in (WITH_REPLACEMENT, PERMUTATION):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.mode == PERMUTATION and any(int(w) != w for w in self.weights):
            raise ValueError("permutation mode needs integer multiplicities")
        if self.first is not None and not 0 <= self.first < len(self.items):
            raise ValueError("first must index an item")


def two_type_population(alpha: float) -> PopulationSpec:
    return PopulationSpec(items=((0,), (1,)), weights=(alpha, 1 - alpha))


def continuum_population(r: float, singletons: int = 100_000) -> PopulationSpec:
    """One item of frequency ``r`` among many equally likely distinct items.

    The heavy item sits at the median of the others and is pinned as the
    first arrival, so ``r`` is the frequency of the first arrival.
    """
    items = [(i,) for i in range(singletons)] + [(singletons / 2 - 0.5,)]
    weights = [(1 - r) / singletons] * singletons + [r]
    return PopulationSpec(items=tuple(items), weights=tuple(weights), first=singletons)


@dataclass(frozen=True)
class BiasEstimate:
    p_hat: float
    stderr: float
    failure_rate: float
    trials: int
    failures: int
    mode: str


def _ranks(items: Sequence[tuple]) -> np.ndarray:
    # equal vectors share a rank, so rank order and type equality match the items
    order = {v: i for i, v in enumerate(sorted(set(items)))}
    return np.array([order[v] for v in items], dtype=np.int64)


def _draw_stream(rng: np.random.Generator, cdf: np.ndarray, ranks: np.ndarray,
                 first: int | None, limit: int, chunk: int = 32) -> Iterator[int]:
    produced = 0
    if first is not None:
        produced += 1
        yield int(ranks[first])
    while produced < limit:
        idx = np.minimum(cdf.searchsorted(rng.random(chunk), side="right"), len(cdf) - 1)
        for i in idx:
            produced += 1
            yield int(ranks[i])
            if produced >= limit:
                return


def empirical_bias(
    process: str,
    population: PopulationSpec,
    trials: int,
    seed: int,
    max_stream: int = 10_000,
) -> BiasEstimate:
    """Monte Carlo Pr(bit = 1) over resolved trials; failures are counted apart.

    With-replacement streams are cut at ``max_stream`` items, after which an
    unresolved trial counts as a failure.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    make = EXTRACTORS[process]
    ranks = _ranks(population.items)
    ones = resolved = 0
    if population.mode == WITH_REPLACEMENT:
        rng = np.random.default_rng(seed)
        w = np.asarray(population.weights, dtype=float)
        cdf = np.cumsum(w) / w.sum()
        for _ in range(trials):
            out = _drive(make(), _draw_stream(rng, cdf, ranks, population.first, max_stream))
            if out.ok:
                resolved += 1
                ones += out.bit
    else:
        pyrng = random.Random(seed)
        pool = [int(r) for r, m in zip(ranks, population.weights) for _ in range(int(m))]
        lead = []
        if population.first is not None:
            lead = [int(ranks[population.first])]
            pool.remove(lead[0])
        for _ in range(trials):
            out = _drive(make(), lead + shuffled(pool, pyrng))
            if out.ok:
                resolved += 1
                ones += out.bit
    failures = trials - resolved
    if resolved == 0:
        return BiasEstimate(math.nan, math.nan, 1.0, trials, failures, population.mode)
    p = ones / resolved
    se = math.sqrt(p * (1 - p) / resolved) if resolved > 1 else 0.0
    return BiasEstimate(p, se, failures / trials, trials, failures, population.mode)


# -- exact enumeration over finite multisets --------------------------------


@dataclass(frozen=True)
class ExactBias:
    p_one: Fraction | None  # over resolved orders; None if nothing resolves
    failure_rate: Fraction
    orders: int


def _orders(items: Sequence, limit: int) -> Iterator[tuple]:
    if len(items) > limit:
        raise InstanceTooLarge(f"exact enumeration is limited to {limit} items, got {len(items)}")
    return permutations([as_item(x) for x in items])


def exact_bias(process: str, items: Sequence, limit: int = EXACT_LIMIT) -> ExactBias:
    """Pr(bit = 1) over all n! equally likely arrival orders of ``items``."""
    make = EXTRACTORS[process]
    ones = resolved = total = 0
    for order in _orders(items, limit):
        total += 1
        out = _drive(make(), order)
        if out.ok:
            resolved += 1
            ones += out.bit
    p = Fraction(ones, resolved) if resolved else None
    return ExactBias(p, Fraction(total - resolved, total) if total else Fraction(0), total)


def second_below_first_given_distinct(items: Sequence, limit: int = EXACT_LIMIT) -> Fraction | None:
    """Pr(second < first | first two distinct) over all arrival orders."""
    if len(items) < 2:
        return None
    below = distinct = 0
    for order in _orders(items, limit):
        a, b = order[0], order[1]
        if a != b:
            distinct += 1
            below += b < a
    return Fraction(below, distinct) if distinct else None
