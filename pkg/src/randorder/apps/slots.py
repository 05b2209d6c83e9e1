"""Weighted interval selection by slot parity, with the class picked from arrival order.

For length ``ell`` the line is cut at the multiples of ``ell``; every
length-``ell`` interval covers exactly one grid point ``k * ell`` and the
parity of ``k`` is its slot type.  Intervals of one parity on distinct grid
points never overlap, so keeping the heaviest interval per grid point is
optimal within a parity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..engine import check_order
from ..errors import DuplicateItems, MixedLengths, NotTwoLengths, VerificationFailed
from ..extraction import Combine, Process1, Process2
from ..intervals import Instance, Interval, Number


@dataclass(frozen=True)
class SlotKey:
    grid: int
    parity: int


def slot_key(iv: Interval, length: Number) -> SlotKey:
    """The unique k with k * length in [start, start + length)."""
    k = math.ceil(Fraction(iv.start) / Fraction(length))
    return SlotKey(k, k % 2)


def _parity_type(length: Number):
    # extractor type key over (start, finish, weight) vectors
    return lambda v: math.ceil(Fraction(v[0]) / Fraction(length)) % 2


class ParityServer:
    """Heaviest interval per grid point among intervals of one parity."""

    def __init__(self, length: Number, parity: int) -> None:
        self.length = length
        self.parity = parity
        self.held: dict[int, Interval] = {}

    def offer(self, iv: Interval) -> str:
        key = slot_key(iv, self.length)
        if key.parity != self.parity:
            return "skip"
        cur = self.held.get(key.grid)
        if cur is None:
            self.held[key.grid] = iv
            return "accept"
        if iv.weight > cur.weight:
            self.held[key.grid] = iv
            return f"replace({cur.id})"
        return "reject"

    @property
    def weight(self) -> Number:
        return sum(iv.weight for iv in self.held.values())

    def final(self) -> frozenset[int]:
        return frozenset(iv.id for iv in self.held.values())


@dataclass(frozen=True)
class SelectionResult:
    weight: Number
    final: frozenset[int]
    bit: int | None
    resolved_at: int | None
    served: tuple  # parity, or (length, parity) for two lengths
    trace: tuple = field(default=(), repr=False)


def _only_length(inst: Instance) -> Number | None:
    if inst.k > 1:
        raise MixedLengths(f"expected one interval length, got {list(inst.lengths)}")
    return inst.lengths[0] if inst.lengths else None


def serve_parity(inst: Instance, parity: int, order: Sequence[int] | None = None) -> ParityServer:
    """One parity served from the start, ignoring the other."""
    length = _only_length(inst)
    server = ParityServer(length, parity)
    for i in check_order(inst, order if order is not None else inst.ids):
        server.offer(inst.by_id[i])
    return server


def select_single_length(inst: Instance, order: Sequence[int] | None = None) -> SelectionResult:
    """Serve the first arrival's parity until COMBINE names the other one.

    The extracted bit names the parity to serve.  The switch, if any, happens
    at the first arrival of that parity and drops the whole held solution.
    """
    length = _only_length(inst)
    order = check_order(inst, order if order is not None else inst.ids)
    if not order:
        return SelectionResult(0, frozenset(), None, None, ())
    by_id = inst.by_id
    extractor = Combine(type_key=_parity_type(length))
    bit = resolved_at = None
    server: ParityServer | None = None
    trace = []
    for i in order:
        iv = by_id[i]
        key = slot_key(iv, length)
        if server is None:
            server = ParityServer(length, key.parity)
        if bit is None:
            out = extractor.push(iv.vector())
            if out is not None and out.ok:
                bit, resolved_at = out.bit, out.resolved_at
        if bit is not None and server.parity != bit and key.parity == bit:
            trace.append((i, f"switch(parity {server.parity} -> {bit}, dropped {sorted(server.final())})"))
            server = ParityServer(length, bit)
        trace.append((i, server.offer(iv)))
    return SelectionResult(server.weight, server.final(), bit, resolved_at, (server.parity,), tuple(trace))


def check_single_length_equivalence(inst: Instance, order: Sequence[int] | None = None) -> SelectionResult:
    res = select_single_length(inst, order)
    if res.served:
        alone = serve_parity(inst, res.served[0], order)
        if alone.final() != res.final:
            raise VerificationFailed(f"combined selection differs from parity {res.served[0]} alone")
    return res


# -- two lengths ------------------------------------------------------------


class LengthClassServer:
    """Slot-parity selection inside one length class.

    Process 1 runs on the class's own sub-stream with slot parity as the
    type.  The parity of the class's first arrival is served until the
    second parity shows up; bit 1 then switches to it and bit 0 stays.
    """

    def __init__(self, length: Number) -> None:
        self.length = length
        self.extractor = Process1(type_key=_parity_type(length))
        self.server: ParityServer | None = None
        self.bit: int | None = None

    def offer(self, iv: Interval) -> str:
        key = slot_key(iv, self.length)
        if self.server is None:
            self.server = ParityServer(self.length, key.parity)
        if self.bit is None:
            out = self.extractor.push(iv.vector())
            if out is not None:
                # resolution happens on the first arrival of the other parity
                self.bit = out.bit
                if self.bit == 1:
                    self.server = ParityServer(self.length, key.parity)
        return self.server.offer(iv)

    @property
    def parity(self) -> int | None:
        return self.server.parity if self.server else None

    @property
    def weight(self) -> Number:
        return self.server.weight if self.server else 0

    def final(self) -> frozenset[int]:
        return self.server.final() if self.server else frozenset()


def _two_lengths(inst: Instance) -> tuple:
    if inst.k > 2:
        raise NotTwoLengths(f"expected at most two interval lengths, got {list(inst.lengths)}")
    return inst.lengths


def serve_length(inst: Instance, length: Number, order: Sequence[int] | None = None) -> LengthClassServer:
    """One length class served from the start, ignoring the other class."""
    _two_lengths(inst)
    server = LengthClassServer(length)
    for i in check_order(inst, order if order is not None else inst.ids):
        iv = inst.by_id[i]
        if iv.length == length:
            server.offer(iv)
    return server


def select_two_length(inst: Instance, order: Sequence[int] | None = None) -> SelectionResult:
    """Process 2 on the first two arrivals picks the class: bit 1 -> shorter length.

    The first arrival's class is served provisionally.  The choice is made
    at the first arrival of a second length, the only point where both
    lengths are known; switching drops everything held.
    """
    _two_lengths(inst)
    order = check_order(inst, order if order is not None else inst.ids)
    if not order:
        return SelectionResult(0, frozenset(), None, None, ())
    by_id = inst.by_id
    extractor = Process2()
    bit = resolved_at = None
    decided = False
    cls: LengthClassServer | None = None
    trace = []
    for i in order:
        iv = by_id[i]
        if cls is None:
            cls = LengthClassServer(iv.length)
        if extractor.outcome is None:
            out = extractor.push(iv.vector())
            if out is not None:
                if not out.ok:
                    raise DuplicateItems(f"the first two arrivals are identical: {iv.span}")
                bit, resolved_at = out.bit, out.resolved_at
        if not decided and iv.length != cls.length:
            # the bit is always known here: a second length needs a second arrival
            decided = True
            chosen = min(iv.length, cls.length) if bit == 1 else max(iv.length, cls.length)
            if chosen != cls.length:
                trace.append((i, f"switch(length {cls.length} -> {chosen}, dropped {sorted(cls.final())})"))
                cls = LengthClassServer(chosen)
        if iv.length == cls.length:
            trace.append((i, cls.offer(iv)))
        else:
            trace.append((i, "skip"))
    return SelectionResult(cls.weight, cls.final(), bit, resolved_at, (cls.length, cls.parity), tuple(trace))


def check_two_length_equivalence(inst: Instance, order: Sequence[int] | None = None) -> SelectionResult:
    res = select_two_length(inst, order)
    if res.served:
        alone = serve_length(inst, res.served[0], order)
        if alone.final() != res.final:
            raise VerificationFailed(f"combined selection differs from length {res.served[0]} alone")
    return res
