from fractions import Fraction
import pytest
from hypothesis import given, settings, strategies as st

from randorder.engine import (
    ACCEPT,
    REJECT,
    Algorithm1,
    DecisionKind,
    exact_expectation,
    monte_carlo,
    random_orders,
    replace,
    run,
    shuffled,
    size,
    weight,
)
from randorder.errors import IllegalDecision, InstanceTooLarge, InvalidOrder
from randorder.generators import fig2, lb1, random_instance
from randorder.intervals import ConflictKind, Instance, Interval, classify_conflict, is_feasible_set
from randorder.oracles import opt_unweighted


def test_step_rules():
    alg = Algorithm1()
    m = Interval(0, 0, 10)
    assert alg.decide({0: m}, Interval(1, 2, 3)) == replace(0)
    left = Interval(2, -0.5, 0.5)
    assert alg.decide({2: left}, m) == REJECT
    assert alg.decide({}, m) == ACCEPT
    # identical spans are not strict containment
    assert alg.decide({0: m}, Interval(3, 0, 10)) == REJECT


def test_fig2_orders():
    inst = fig2(6)
    middles = [iv.id for iv in inst if iv.label.startswith("I1")]
    i2, i3 = inst.ids_labelled("I2", "I3")
    for first in middles:
        rest = [i for i in inst.ids if i != first]
        assert size(run(Algorithm1, inst, [first] + rest)) == 1
    trace = run(Algorithm1, inst, [i2, i3] + middles)
    assert trace.final == {i2, i3}
    assert [d.kind for _, d in trace.events] == [DecisionKind.ACCEPT] * 2 + [DecisionKind.REJECT] * 4


def test_empty_run():
    trace = run(Algorithm1, Instance(()), [])
    assert trace.events == () and trace.final == frozenset()


def test_invalid_order():
    inst = lb1()
    with pytest.raises(InvalidOrder):
        run(Algorithm1, inst, [0, 1])
    with pytest.raises(InvalidOrder):
        run(Algorithm1, inst, [0, 1, 1])


class Greedy:
    """Accepts everything: breaks feasibility on the first conflict."""

    def decide(self, held, interval):
        return ACCEPT


class BadReplace:
    def decide(self, held, interval):
        return replace(next(iter(held))) if held else ACCEPT


def test_illegal_decisions():
    inst = Instance.from_spans([(0, 2), (1, 3)])
    with pytest.raises(IllegalDecision):
        run(Greedy, inst, [0, 1])
    disjoint = Instance.from_spans([(0, 1), (5, 6)])
    with pytest.raises(IllegalDecision):
        run(BadReplace, disjoint, [0, 1])


def test_exact_expectation_examples():
    assert exact_expectation(Algorithm1, fig2(4)) == Fraction(3, 2)
    assert 2 / exact_expectation(Algorithm1, fig2(4)) == Fraction(4, 3)
    assert exact_expectation(Algorithm1, lb1()) == Fraction(5, 3)
    assert exact_expectation(Algorithm1, Instance.from_spans([(0, 1)])) == 1
    with pytest.raises(InstanceTooLarge):
        exact_expectation(Algorithm1, fig2(9))


def test_exact_expectation_weight_metric():
    inst = Instance.from_spans([(0, 2), (1, 3)], weights=[2, 5])
    # whichever arrives first is kept
    assert exact_expectation(Algorithm1, inst, weight) == Fraction(7, 2)


def test_shuffle_is_deterministic_and_uniform():
    ids = list(range(4))
    a = list(random_orders(ids, 5, seed=11))
    b = list(random_orders(ids, 5, seed=11))
    assert a == b
    assert all(sorted(o) == ids for o in a)
    counts = {}
    for o in random_orders(ids, 24_000, seed=3):
        counts[tuple(o)] = counts.get(tuple(o), 0) + 1
    assert len(counts) == 24
    # each of 24 cells expects 1000; 5 sigma is about 156
    assert all(abs(c - 1000) < 160 for c in counts.values())


def test_shuffle_stream_is_pinned():
    import random

    # version-1 seed -> permutation mapping; changing it breaks reproducibility
    assert shuffled(range(8), random.Random(2024)) == [7, 0, 2, 6, 4, 1, 5, 3]


def test_monte_carlo_single_trial_matches_run():
    inst = lb1()
    est = monte_carlo(Algorithm1, inst, 1, seed=99)
    order = next(iter(random_orders(inst.ids, 1, 99)))
    assert est.mean == size(run(Algorithm1, inst, order))
    assert est.stderr == 0


def test_monte_carlo_constant_metric_has_zero_error():
    inst = Instance.from_spans([(0, 1), (2, 3), (4, 5)])
    est = monte_carlo(Algorithm1, inst, 200, seed=1)
    assert est.mean == 3 and est.stderr == 0


def test_monte_carlo_fig2_large():
    n = 100
    est = monte_carlo(Algorithm1, fig2(n), 100_000, seed=7)
    assert abs(est.mean - (n + 2) / n) <= 3 * est.stderr


@pytest.mark.parametrize("inst", [fig2(4), lb1(), random_instance(6, k=2, seed=2)], ids=["fig2-4", "lb1", "rand6"])
def test_monte_carlo_converges_to_exact(inst):
    exact = exact_expectation(Algorithm1, inst)
    est = monte_carlo(Algorithm1, inst, 1_000_000, seed=5)
    assert abs(est.mean - float(exact)) <= 4 * est.stderr


instances = st.builds(
    lambda n, k, seed: random_instance(n, k=k, seed=seed),
    st.integers(0, 7), st.integers(1, 3), st.integers(0, 10_000),
)


@settings(max_examples=200, deadline=None)
@given(instances, st.randoms(use_true_random=False))
def test_algorithm1_trace_invariants(inst, rnd):
    order = list(inst.ids)
    rnd.shuffle(order)
    trace = run(Algorithm1, inst, order, snapshots=True)
    held: set[int] = set()
    gone: set[int] = set()
    by_id = inst.by_id
    for (i, d), snap in zip(trace.events, trace.snapshots):
        conflicts = [h for h in held if by_id[h].overlaps(by_id[i])]
        if not conflicts:
            assert d.kind is DecisionKind.ACCEPT
        if d.kind is DecisionKind.REPLACE:
            assert classify_conflict(by_id[d.victim], by_id[i]) is ConflictKind.FIRST_CONTAINS_SECOND
            held.discard(d.victim)
            gone.add(d.victim)
        if d.kind is DecisionKind.REJECT:
            gone.add(i)
        else:
            held.add(i)
        assert held == snap
        assert not (held & gone)
    assert held == trace.final
    assert is_feasible_set(by_id[i] for i in trace.final)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_single_length_never_replaces(n, seed, rnd):
    inst = random_instance(n, k=1, seed=seed)
    order = list(inst.ids)
    rnd.shuffle(order)
    trace = run(Algorithm1, inst, order)
    assert all(d.kind is not DecisionKind.REPLACE for _, d in trace.events)
    opt = opt_unweighted(inst).value
    assert opt <= 2 * len(trace.final) and len(trace.final) <= opt


def test_copy_class_orders():
    from math import factorial
    from randorder.engine import copy_class_orders

    inst = fig2(6)
    orders = list(copy_class_orders(inst))
    assert len(orders) == factorial(6) // factorial(4) == len(set(orders))
    middles = [iv.id for iv in inst if iv.label.startswith("I1_")]
    for order in orders:
        assert sorted(order) == list(inst.ids)
        assert [i for i in order if i in middles] == middles
    distinct = random_instance(5, k=2, seed=1)
    assert len(list(copy_class_orders(distinct))) == factorial(distinct.n) // _copies_product(distinct)
    assert exact_expectation(Algorithm1, inst, size) == sum(
        Fraction(size(run(Algorithm1, inst, o))) for o in orders) / len(orders)
    with pytest.raises(InstanceTooLarge):
        next(copy_class_orders(fig2(9)))


def _copies_product(inst):
    from collections import Counter
    from math import factorial, prod

    return prod(factorial(c) for c in Counter(iv.vector() for iv in inst).values())
