"""Direct/transfer charging for Algorithm 1 and the closed forms that bound it.

Every optimal interval is mapped to one interval currently held by the
algorithm.  An accepted optimal interval maps to itself; a rejected one maps
to a conflicting held interval (direct charge).  When a held interval is
replaced, everything mapped to it moves to the replacer (transfer charge).
All probabilities here are exact fractions.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Mapping, Sequence

from .engine import (
    Algorithm1,
    DecisionKind,
    RunTrace,
    RunningStats,
    all_orders,
    copy_class_orders,
    random_orders,
    run,
)
from .errors import InvalidOptWitness, ProfileInfeasible, VerificationFailed
from .intervals import Instance, Interval, instance_cache, is_feasible_set
from .oracles import opt_unweighted

OptPolicy = Callable[[Instance, Sequence[int]], frozenset]


# -- base instances ---------------------------------------------------------


@dataclass(frozen=True)
class BaseInstanceSpec:
    L: int
    R: int
    M: int
    S: int

    def __post_init__(self) -> None:
        if min(self.L, self.R, self.M, self.S) < 1:
            raise ValueError(f"base instance multiplicities must be >= 1, got {self}")

    @property
    def N(self) -> int:
        return self.L + self.R + self.M + self.S


S_SLOTS = ((2, 3), (4, 5), (6, 7))


def base_instance(spec: BaseInstanceSpec) -> Instance:
    """Canonical two-length geometry for the base construction.

    M copies are ``[0,10)``; L copies ``[-0.5,0.5)`` and R copies
    ``[9.5,10.5)`` cut its two ends; S intervals sit strictly inside M at
    ``[2,3), [4,5), [6,7)``, with any extras stacked on ``[2,3)``.
    """
    spans, labels = [], []
    for role, count, span in (("L", spec.L, (-0.5, 0.5)), ("R", spec.R, (9.5, 10.5)), ("M", spec.M, (0, 10))):
        for j in range(count):
            spans.append(span)
            labels.append(f"{role}{j + 1}")
    for j in range(spec.S):
        spans.append(S_SLOTS[j] if j < len(S_SLOTS) else S_SLOTS[0])
        labels.append(f"S{j + 1}")
    name = f"base({spec.L},{spec.R},{spec.M},{spec.S})"
    return Instance.from_spans(spans, labels=labels, name=name)


# -- OPT policies -----------------------------------------------------------


def canonical_opt(inst: Instance, order: Sequence[int] = ()) -> frozenset:
    """Earliest-finish optimum; ignores the arrival order."""
    return instance_cache(inst, "_canonical_opt", lambda i: opt_unweighted(i).witness)


def _copy_groups(inst: Instance) -> tuple[tuple[int, ...], ...]:
    opt = canonical_opt(inst)
    groups = []
    for i in sorted(opt):
        span = inst.by_id[i].span
        groups.append(tuple(iv.id for iv in inst.intervals if iv.span == span))
    return tuple(groups)


def latest_arrival_opt(inst: Instance, order: Sequence[int]) -> frozenset:
    """Canonical optimum with each member swapped for its last-arriving identical copy.

    On base instances this picks the last L copy and the last R copy, which
    is the choice the transfer-charge analysis conditions on.
    """
    groups = instance_cache(inst, "_copy_groups", _copy_groups)
    position = {x: p for p, x in enumerate(order)}
    return frozenset(max(g, key=position.__getitem__) for g in groups)


OPT_POLICIES: dict[str, OptPolicy] = {
    "canonical": canonical_opt,
    "latest_arrival": latest_arrival_opt,
}


def check_opt_witness(inst: Instance, opt: frozenset) -> None:
    verified = instance_cache(inst, "_verified_witnesses", lambda i: set())
    if opt in verified:
        return
    by_id = inst.by_id
    if not opt <= by_id.keys():
        raise InvalidOptWitness(f"witness {sorted(opt)} names unknown ids")
    if not is_feasible_set(by_id[i] for i in opt):
        raise InvalidOptWitness(f"witness {sorted(opt)} is not feasible")
    best = instance_cache(inst, "_opt_size", lambda i: opt_unweighted(i).value)
    if len(opt) != best:
        raise InvalidOptWitness(f"witness has {len(opt)} intervals, optimum is {best}")
    verified.add(opt)


# -- charging traces --------------------------------------------------------


@dataclass(frozen=True)
class ChargeEvent:
    kind: str  # "direct" or "transfer"
    arrival: int
    target: int
    amount: int
    source: int | None = None  # victim for transfers, charged OPT id for direct


@dataclass
class ChargingTrace:
    run: RunTrace
    opt: frozenset
    mapping: dict[int, int] = field(default_factory=dict)
    phi: dict[int, int] = field(default_factory=dict)
    dc: dict[int, int] = field(default_factory=dict)
    tc: dict[int, int] = field(default_factory=dict)
    predecessors: dict[int, tuple[int, ...]] = field(default_factory=dict)
    log: list[ChargeEvent] = field(default_factory=list)

    @property
    def final(self) -> frozenset:
        return self.run.final

    @property
    def total_transfer(self) -> int:
        return sum(self.tc[i] for i in self.run.final)

    def transfers_from(self, victim_label: str) -> int:
        by_id = self.run.instance.by_id
        return sum(
            e.amount for e in self.log
            if e.kind == "transfer" and by_id[e.source].label == victim_label
        )

    def violations(self) -> list[str]:
        problems = []
        final = self.run.final
        if sum(self.phi[i] for i in final) != len(self.opt):
            problems.append("sum of final charges differs from |OPT|")
        if set(self.mapping) != set(self.opt) or not set(self.mapping.values()) <= final:
            problems.append("some OPT interval is not mapped to a final interval")
        for i in final:
            if self.phi[i] != self.dc[i] + self.tc[i]:
                problems.append(f"charge on {i} is not direct + transfer")
        for i, d in self.dc.items():
            if d > 2:
                problems.append(f"interval {i} was directly charged {d} times")
        received = [e.target for e in self.log if e.kind == "transfer"]
        if len(received) != len(set(received)):
            problems.append("an interval received transfer charge twice")
        return problems

    def to_dict(self) -> dict:
        inst = self.run.instance
        name = lambda i: inst.by_id[i].name()  # noqa: E731
        return {
            "instance": inst.name,
            "order": [name(i) for i in self.run.order],
            "opt": sorted(name(i) for i in self.opt),
            "final": sorted(name(i) for i in self.run.final),
            "mapping": {name(o): name(a) for o, a in sorted(self.mapping.items())},
            "charges": {
                name(i): {"phi": self.phi[i], "dc": self.dc[i], "tc": self.tc[i]}
                for i in sorted(self.phi)
            },
            "predecessor_traces": {
                name(i): [name(p) for p in self.predecessors[i]] for i in sorted(self.run.final)
            },
            "events": [
                {"kind": e.kind, "arrival": name(e.arrival), "target": name(e.target),
                 "amount": e.amount, "source": name(e.source) if e.source is not None else None}
                for e in self.log
            ],
        }


def _direct_target(held: Mapping[int, Interval], iv: Interval) -> Interval:
    # largest overlap, then smaller start, then smaller id
    best = None
    best_key = None
    for h in held.values():
        if h.start < iv.finish and iv.start < h.finish:
            overlap = min(h.finish, iv.finish) - max(h.start, iv.start)
            key = (-overlap, h.start, h.id)
            if best_key is None or key < best_key:
                best, best_key = h, key
    if best is None:
        raise VerificationFailed(f"rejected OPT interval {iv.id} conflicts with nothing held")
    return best


def charge(trace: RunTrace, opt: frozenset) -> ChargingTrace:
    """Replay a run's event log and build the charging map for ``opt``."""
    by_id = trace.instance.by_id
    ct = ChargingTrace(run=trace, opt=opt)
    held: dict[int, Interval] = {}
    owned: dict[int, list[int]] = defaultdict(list)  # held id -> OPT ids mapped to it
    phi, dc, tc, pred, log = ct.phi, ct.dc, ct.tc, ct.predecessors, ct.log
    for i, decision in trace.events:
        iv = by_id[i]
        kind = decision.kind
        if kind is DecisionKind.REJECT:
            if i in opt:
                target = _direct_target(held, iv)
                owned[target.id].append(i)
                phi[target.id] += 1
                dc[target.id] += 1
                log.append(ChargeEvent("direct", i, target.id, 1, i))
            continue
        tc[i] = dc[i] = phi[i] = 0
        if kind is DecisionKind.REPLACE:
            v = decision.victim
            del held[v]
            moved = owned.pop(v, [])
            owned[i] = moved
            tc[i] = phi[i] = len(moved)
            pred[i] = pred[v] + (i,)
            log.append(ChargeEvent("transfer", i, i, len(moved), v))
        else:
            pred[i] = (i,)
        held[i] = iv
        if i in opt:
            owned[i].append(i)
            phi[i] += 1
            dc[i] += 1
            log.append(ChargeEvent("direct", i, i, 1, i))
    for holder in held:
        for o in owned.get(holder, ()):
            ct.mapping[o] = holder
    for i in list(pred):
        if i not in held:
            del pred[i]
    return ct


def simulate_charging(
    inst: Instance,
    order: Sequence[int],
    opt_policy: OptPolicy = latest_arrival_opt,
    check: bool = True,
) -> ChargingTrace:
    """Run Algorithm 1 on ``order`` and charge the policy's optimum to it."""
    opt = frozenset(opt_policy(inst, order))
    check_opt_witness(inst, opt)
    ct = charge(run(Algorithm1, inst, order), opt)
    if check:
        problems = ct.violations()
        if problems:
            raise VerificationFailed(f"{inst.name} order {list(order)}: {'; '.join(problems)}")
    return ct


def transfer_metric(opt_policy: OptPolicy = latest_arrival_opt):
    """Metric over a run trace: total transfer charge held by the final solution."""

    def metric(trace: RunTrace) -> int:
        opt = frozenset(opt_policy(trace.instance, trace.order))
        return charge(trace, opt).total_transfer

    return metric


# -- closed forms -----------------------------------------------------------


def _inv_binom(a: int, b: int) -> Fraction:
    """a! b! / (a + b)!"""
    return Fraction(1, comb(a + b, a))


@dataclass(frozen=True)
class BaseChargeAnalytics:
    pr_tc2: Fraction
    pr_tc1: Fraction
    e_tc: Fraction


def base_charge_analytics(spec: BaseInstanceSpec) -> BaseChargeAnalytics:
    L, R, M, S = spec.L, spec.R, spec.M, spec.S
    first_m = Fraction(M, spec.N)
    both = _inv_binom(L + R, S)
    left, right = _inv_binom(L, S), _inv_binom(R, S)
    pr_tc2 = first_m * both
    pr_tc1 = first_m * (left + right - 2 * both)
    return BaseChargeAnalytics(pr_tc2=pr_tc2, pr_tc1=pr_tc1, e_tc=pr_tc1 + 2 * pr_tc2)


@dataclass(frozen=True)
class Stage:
    M: int
    L: int
    R: int
    S: int

    @property
    def N(self) -> int:
        return self.M + self.L + self.R + self.S


@dataclass(frozen=True)
class TraceProfile:
    stages: tuple[Stage, ...]

    @classmethod
    def of(cls, *rows: tuple[int, int, int, int]) -> "TraceProfile":
        return cls(tuple(Stage(*r) for r in rows))

    @property
    def d(self) -> int:
        return len(self.stages)

    def infeasible_stage(self) -> int | None:
        """Index of the first stage breaking the pending-set inequality, if any."""
        stages = self.stages
        last_s = stages[-1].S
        pending = 0
        for i in range(len(stages) - 1, -1, -1):
            if stages[i].S < last_s + pending:
                return i
            st = stages[i]
            pending += st.M + st.L + st.R
        return None


def nested_charge_bound(xs: Sequence[int], last_s: int = 3) -> Fraction:
    """F^d(x_1..x_d) with s_d = ``last_s`` and s_i = x_{i+1} + 2 + s_{i+1}."""
    total = Fraction(0)
    s = last_s
    for i in range(len(xs) - 1, -1, -1):
        x = xs[i]
        total += Fraction(x, (x + 2 + s) * (s + 1))
        s = x + 2 + s
    return total


@dataclass(frozen=True)
class TraceBound:
    bound: Fraction
    nested: Fraction


def trace_tc_bound(profile: TraceProfile) -> TraceBound:
    """Expected transfer charge along a predecessor trace with the given pending sets.

    Also evaluates the nested bound on the middle counts and raises
    :class:`VerificationFailed` if it exceeds 1/4.
    """
    if not profile.stages:
        raise ProfileInfeasible("a trace profile needs at least one stage")
    bad = profile.infeasible_stage()
    if bad is not None:
        raise ProfileInfeasible(f"stage {bad + 1} has too few pending S intervals")
    bound = Fraction(0)
    for st in profile.stages:
        if st.M:
            bound += Fraction(st.M, st.N) * (_inv_binom(st.L, st.S) + _inv_binom(st.R, st.S))
    nested = nested_charge_bound([st.M for st in profile.stages])
    if nested > Fraction(1, 4):
        raise VerificationFailed(f"nested bound {nested} exceeds 1/4 for {profile}")
    return TraceBound(bound=bound, nested=nested)


# -- expected charge per interval -------------------------------------------


@dataclass(frozen=True)
class ChargeTable:
    values: dict[int, Fraction | float | None]
    maximum: Fraction | float | None
    argmax: int | None
    runs: int

    def undefined(self) -> list[int]:
        return [i for i, v in self.values.items() if v is None]


def max_expected_charge(
    inst: Instance,
    opt_policy: OptPolicy = latest_arrival_opt,
    mode: str = "exact",
    trials: int = 10_000,
    seed: int = 0,
) -> ChargeTable:
    """E[phi(I) | I in ALG] for every interval, and the largest of them.

    Intervals that never end in the final solution report ``None`` and are
    left out of the maximum.  Every run is checked for conservation.
    """
    if mode == "exact":
        orders = all_orders(inst)
        sums: dict[int, int] = defaultdict(int)
        counts: dict[int, int] = defaultdict(int)
        runs = 0
        for order in orders:
            ct = simulate_charging(inst, order, opt_policy)
            runs += 1
            for i in ct.final:
                sums[i] += ct.phi[i]
                counts[i] += 1
        values = {i: (Fraction(sums[i], counts[i]) if counts[i] else None) for i in inst.ids}
    elif mode == "mc":
        stats: dict[int, RunningStats] = defaultdict(RunningStats)
        runs = 0
        for order in random_orders(inst.ids, trials, seed):
            ct = simulate_charging(inst, order, opt_policy)
            runs += 1
            for i in ct.final:
                stats[i].add(ct.phi[i])
        values = {i: (stats[i].mean if i in stats else None) for i in inst.ids}
    else:
        raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")
    defined = [(v, i) for i, v in values.items() if v is not None]
    if defined:
        maximum, argmax = max(defined, key=lambda t: (t[0], -t[1]))
    else:
        maximum, argmax = None, None
    return ChargeTable(values=values, maximum=maximum, argmax=argmax, runs=runs)


def transfer_distribution(
    inst: Instance,
    opt_policy: OptPolicy = latest_arrival_opt,
    collapse_copies: bool = False,
) -> dict[int, Fraction]:
    """Exact distribution of the total transfer charge over all arrival orders.

    ``collapse_copies`` enumerates one order per arrangement of identical
    intervals.  That is exact only for policies that treat identical copies
    alike, such as ``latest_arrival_opt``.
    """
    counts: dict[int, int] = defaultdict(int)
    total = 0
    for order in (copy_class_orders(inst) if collapse_copies else all_orders(inst)):
        counts[simulate_charging(inst, order, opt_policy).total_transfer] += 1
        total += 1
    return {t: Fraction(c, total) for t, c in sorted(counts.items())}
