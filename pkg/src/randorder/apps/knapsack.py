"""Online knapsack with removal: density greedy vs value greedy, chosen by one bit."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

from ..errors import VerificationFailed
from ..extraction import Combine
from ..intervals import Number, parse_number


def _ratio(a: Number, b: Number) -> Number:
    if isinstance(a, Rational) and isinstance(b, Rational):
        return Fraction(a) / Fraction(b)
    return a / b


@dataclass(frozen=True)
class KnapsackItem:
    id: int
    size: Number
    value: Number

    def __post_init__(self) -> None:
        if not (self.size > 0 and self.value > 0):
            raise ValueError(f"item {self.id}: size and value must be positive")

    @property
    def density(self) -> Number:
        return _ratio(self.value, self.size)

    def vector(self) -> tuple:
        """Ordering vector: density, then value, then size."""
        return (self.density, self.value, self.size)


def by_density(item: KnapsackItem) -> tuple:
    return (item.density, item.value, item.size)


def by_value(item: KnapsackItem) -> tuple:
    return (item.value, item.density, item.size)


@dataclass(frozen=True)
class Offer:
    accepted: bool
    evicted: tuple[int, ...] = ()


class RemovalGreedy:
    """Keeps the best items under ``key``.

    An arrival that fits is added.  Otherwise held items ranked strictly
    below it are evicted, lowest first, until it fits; the swap happens only
    if it fits then and the evicted value is below the arrival's value.
    """

    def __init__(self, capacity: Number, key: Callable[[KnapsackItem], tuple]) -> None:
        self.capacity = capacity
        self.key = key
        self.held: dict[int, KnapsackItem] = {}
        self.load: Number = 0

    @property
    def value(self) -> Number:
        return sum(it.value for it in self.held.values())

    def offer(self, item: KnapsackItem) -> Offer:
        if item.size > self.capacity:
            return Offer(False)
        if self.load + item.size <= self.capacity:
            self._add(item)
            return Offer(True)
        k = self.key(item)
        room = self.capacity - self.load
        lost = 0
        evict = []
        for h in sorted(self.held.values(), key=lambda h: (self.key(h), h.id)):
            if room >= item.size or not self.key(h) < k:
                break
            evict.append(h)
            room += h.size
            lost += h.value
        if room >= item.size and lost < item.value:
            for h in evict:
                del self.held[h.id]
                self.load -= h.size
            self._add(item)
            return Offer(True, tuple(h.id for h in evict))
        return Offer(False)

    def _add(self, item: KnapsackItem) -> None:
        self.held[item.id] = item
        self.load += item.size


SUB_ALGORITHMS = (by_density, by_value)


@dataclass(frozen=True)
class KnapsackResult:
    value: Number
    value_a0: Number
    value_a1: Number
    bit: int | None
    resolved_at: int | None
    held: frozenset[int]
    trace: tuple[tuple[int, Offer], ...] = field(repr=False)


def _ordered(items: Sequence[KnapsackItem], order: Sequence[int] | None) -> list[KnapsackItem]:
    if order is None:
        return list(items)
    by_id = {it.id: it for it in items}
    if sorted(order) != sorted(by_id):
        raise ValueError("order must be a permutation of the item ids")
    return [by_id[i] for i in order]


def run_sub(which: int, items: Sequence[KnapsackItem], capacity: Number,
            order: Sequence[int] | None = None) -> RemovalGreedy:
    alg = RemovalGreedy(capacity, SUB_ALGORITHMS[which])
    for it in _ordered(items, order):
        alg.offer(it)
    return alg


def knapsack_online(items: Sequence[KnapsackItem], capacity: Number,
                    order: Sequence[int] | None = None) -> KnapsackResult:
    """Run both greedy rules in lockstep until COMBINE resolves, then follow one.

    Bit 0 follows the density rule, bit 1 the value rule.
    """
    seq = _ordered(items, order)
    subs = [RemovalGreedy(capacity, key) for key in SUB_ALGORITHMS]
    extractor = Combine()
    chosen: RemovalGreedy | None = None
    bit = resolved_at = None
    trace = []
    for it in seq:
        if chosen is None:
            out = extractor.push(it.vector())
            if out is not None and out.ok:
                bit, resolved_at = out.bit, out.resolved_at
                chosen = subs[bit]
        if chosen is None:
            d0, d1 = subs[0].offer(it), subs[1].offer(it)
            if d0 != d1:
                raise VerificationFailed(f"sub-algorithms disagree on item {it.id} before the bit resolved")
            trace.append((it.id, d0))
        else:
            trace.append((it.id, chosen.offer(it)))
    final = chosen or subs[0]
    return KnapsackResult(
        value=final.value,
        value_a0=run_sub(0, items, capacity, order).value,
        value_a1=run_sub(1, items, capacity, order).value,
        bit=bit,
        resolved_at=resolved_at,
        held=frozenset(final.held),
        trace=tuple(trace),
    )


def check_knapsack_equivalence(items, capacity, order=None) -> KnapsackResult:
    res = knapsack_online(items, capacity, order)
    alone = run_sub(res.bit or 0, items, capacity, order)
    if frozenset(alone.held) != res.held:
        raise VerificationFailed("combined knapsack differs from the selected sub-algorithm")
    return res


def parse_knapsack(text: str) -> tuple[list[KnapsackItem], Number]:
    """``capacity C`` on one line, then one ``size value`` pair per line; ``#`` comments."""
    capacity = None
    items: list[KnapsackItem] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.partition("#")[0].split()
        if not parts:
            continue
        if parts[0] == "capacity" and len(parts) == 2:
            capacity = parse_number(parts[1])
        elif len(parts) == 2:
            items.append(KnapsackItem(len(items), parse_number(parts[0]), parse_number(parts[1])))
        else:
            raise ValueError(f"line {lineno}: expected 'size value' or 'capacity C', got {raw!r}")
    if capacity is None or capacity <= 0:
        raise ValueError("a positive 'capacity C' line is required")
    return items, capacity
