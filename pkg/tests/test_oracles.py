import random

import pytest

from randorder.charging import BaseInstanceSpec, base_instance
from randorder.errors import InstanceTooLarge
from randorder.generators import fig2, random_instance
from randorder.intervals import Instance, is_feasible_set
from randorder.oracles import brute_force_opt, knapsack_opt, opt_unweighted, opt_weighted


def _subset_max_weight(inst):
    # plain 2^n enumeration, independent of the pruned brute force
    best, best_sets = 0, []
    items = list(inst.intervals)
    for mask in range(1 << len(items)):
        chosen = [items[i] for i in range(len(items)) if mask >> i & 1]
        if is_feasible_set(chosen):
            w = sum(c.weight for c in chosen)
            key = tuple(sorted(c.id for c in chosen))
            if w > best:
                best, best_sets = w, [key]
            elif w == best:
                best_sets.append(key)
    return best, min(best_sets) if best_sets else ()


def test_fig2_opt():
    inst = fig2(6)
    res = opt_unweighted(inst)
    assert res.value == 2
    assert {inst.by_id[i].label for i in res.witness} == {"I2", "I3"}
    assert brute_force_opt(inst) == 2


def test_trivial_optima():
    empty = Instance(())
    assert opt_unweighted(empty).value == 0
    assert opt_weighted(empty).value == 0
    chain = Instance.from_spans([(0, 2), (1, 3), (1.5, 3.5)])
    assert brute_force_opt(chain) == 1
    assert opt_weighted(Instance.from_spans([(0, 1)], weights=[7])).value == 7
    twins = Instance.from_spans([(0, 1), (0, 1)], weights=[3, 5])
    res = opt_weighted(twins)
    assert res.value == 5 and res.witness == {1}


def test_base_opt():
    inst = base_instance(BaseInstanceSpec(1, 1, 1, 3))
    assert brute_force_opt(inst) == 5
    assert {inst.by_id[i].label for i in opt_unweighted(inst).witness} == {"L1", "R1", "S1", "S2", "S3"}


@pytest.mark.parametrize("seed", range(100))
def test_unweighted_matches_brute_force(seed):
    inst = random_instance(8, k=3, seed=seed)
    res = opt_unweighted(inst)
    assert res.value == brute_force_opt(inst) == _subset_max_weight(inst)[0]
    assert is_feasible_set(inst.by_id[i] for i in res.witness)


@pytest.mark.parametrize("seed", range(100))
def test_weighted_matches_enumeration(seed):
    inst = random_instance(8, k=3, weights="int", seed=seed)
    best, smallest = _subset_max_weight(inst)
    res = opt_weighted(inst)
    assert res.value == best == brute_force_opt(inst, weighted=True)
    assert tuple(sorted(res.witness)) == smallest


@pytest.mark.parametrize("seed", range(30))
def test_weighted_equals_unweighted_on_unit_weights(seed):
    inst = random_instance(10, k=2, seed=seed)
    assert opt_weighted(inst).value == opt_unweighted(inst).value


def test_brute_force_guard():
    inst = Instance.from_spans([(i, i + 1) for i in range(21)])
    with pytest.raises(InstanceTooLarge):
        brute_force_opt(inst)


def _knapsack_enumerate(items, capacity):
    best = 0
    for mask in range(1 << len(items)):
        size = sum(items[i][0] for i in range(len(items)) if mask >> i & 1)
        if size <= capacity:
            best = max(best, sum(items[i][1] for i in range(len(items)) if mask >> i & 1))
    return best


def test_knapsack_examples():
    assert knapsack_opt([(6, 6), (5, 5), (5, 5)], 10) == 10
    assert knapsack_opt([], 10) == 0
    assert knapsack_opt([(11, 4)], 10) == 0
    with pytest.raises(InstanceTooLarge):
        knapsack_opt([(1, 1)] * 26, 10)


@pytest.mark.parametrize("seed", range(50))
def test_knapsack_matches_enumeration(seed):
    rng = random.Random(seed)
    items = [(rng.uniform(0.5, 6), rng.uniform(0.5, 9)) for _ in range(rng.randint(1, 10))]
    cap = rng.uniform(3, 15)
    assert knapsack_opt(items, cap) == pytest.approx(_knapsack_enumerate(items, cap), abs=1e-12)
