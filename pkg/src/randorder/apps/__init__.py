"""Deterministic random-order algorithms that replace one coin flip by an extracted bit."""

from .knapsack import KnapsackItem, KnapsackResult, check_knapsack_equivalence, knapsack_online, parse_knapsack
from .slots import (
    SelectionResult,
    SlotKey,
    check_single_length_equivalence,
    check_two_length_equivalence,
    select_single_length,
    select_two_length,
    serve_length,
    serve_parity,
    slot_key,
)
from .strings import GuessResult, check_string_equivalence, guess_string, parse_bits

__all__ = [
    "GuessResult",
    "KnapsackItem",
    "KnapsackResult",
    "SelectionResult",
    "SlotKey",
    "check_knapsack_equivalence",
    "check_single_length_equivalence",
    "check_string_equivalence",
    "check_two_length_equivalence",
    "guess_string",
    "knapsack_online",
    "parse_bits",
    "parse_knapsack",
    "select_single_length",
    "select_two_length",
    "serve_length",
    "serve_parity",
    "slot_key",
]
