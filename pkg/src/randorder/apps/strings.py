"""Binary string guessing with a bit pulled from the arrival order."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import VerificationFailed
from ..extraction import Combine


class PrefixThenConstant:
    """Guess 0 first, then the first revealed bit until it is contradicted, then ``c``."""

    def __init__(self, c: int) -> None:
        self.c = c
        self.first: int | None = None
        self.settled = False

    def guess(self) -> int:
        if self.first is None:
            return 0
        return self.c if self.settled else self.first

    def reveal(self, b: int) -> None:
        if self.first is None:
            self.first = b
        elif b != self.first:
            self.settled = True


@dataclass(frozen=True)
class GuessResult:
    correct: int
    guesses: tuple[int, ...]
    revealed: tuple[int, ...]
    bit: int | None
    resolved_at: int | None

    @property
    def n(self) -> int:
        return len(self.revealed)


def _arrivals(bits: Sequence[int], order: Sequence[int] | None) -> list[int]:
    seq = [bits[i] for i in order] if order is not None else list(bits)
    if len(seq) != len(bits) or any(b not in (0, 1) for b in seq):
        raise ValueError("bits must be 0/1 and order a permutation of their positions")
    return seq


def guess_string(bits: Sequence[int], order: Sequence[int] | None = None) -> GuessResult:
    """Guess each bit before it is revealed, committing to a COMBINE bit at the first miss."""
    seq = _arrivals(bits, order)
    subs = (PrefixThenConstant(0), PrefixThenConstant(1))
    extractor = Combine()
    chosen: PrefixThenConstant | None = None
    bit = resolved_at = None
    guesses = []
    for b in seq:
        if chosen is None:
            g0, g1 = subs[0].guess(), subs[1].guess()
            if g0 != g1:
                raise VerificationFailed(f"sub-guessers disagree before the bit resolved: {g0} vs {g1}")
            guesses.append(g0)
            for s in subs:
                s.reveal(b)
            out = extractor.push((b,))
            if out is not None and out.ok:
                bit, resolved_at = out.bit, out.resolved_at
                chosen = subs[bit]
        else:
            guesses.append(chosen.guess())
            chosen.reveal(b)
    correct = sum(g == b for g, b in zip(guesses, seq))
    return GuessResult(correct, tuple(guesses), tuple(seq), bit, resolved_at)


def run_guesser(c: int, bits: Sequence[int], order: Sequence[int] | None = None) -> tuple[int, ...]:
    """Guesses of one sub-guesser run alone."""
    g = PrefixThenConstant(c)
    out = []
    for b in _arrivals(bits, order):
        out.append(g.guess())
        g.reveal(b)
    return tuple(out)


def check_string_equivalence(bits: Sequence[int], order: Sequence[int] | None = None) -> GuessResult:
    res = guess_string(bits, order)
    c = res.bit if res.bit is not None else 0
    if run_guesser(c, bits, order) != res.guesses:
        raise VerificationFailed(f"combined guesses differ from the constant-{c} guesser")
    return res


def parse_bits(text: str) -> list[int]:
    """Bits as 0/1 characters; whitespace is ignored and ``#`` starts a comment."""
    bits = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        for ch in raw.partition("#")[0]:
            if ch in "01":
                bits.append(int(ch))
            elif not ch.isspace():
                raise ValueError(f"line {lineno}: unexpected character {ch!r}")
    return bits
