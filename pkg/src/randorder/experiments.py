"""Experiment pipeline: generate, enumerate or sample orders, aggregate, report."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from itertools import permutations
from pathlib import Path
from typing import Callable, Sequence

from . import apps
from .charging import OPT_POLICIES, max_expected_charge, transfer_metric
from .engine import EXACT_LIMIT, Algorithm1, RunningStats, all_orders, estimate, exact_expectation, monte_carlo, random_orders, size, weight
from .errors import BadSpec, InstanceTooLarge, RandOrderError
from .extraction import analytic_bias, bias_curve, continuum_population, empirical_bias, two_type_population
from .generators import generate
from .intervals import Instance, load_instance
from .oracles import knapsack_opt, opt_unweighted, opt_weighted

MODES = ("exact", "mc")
METRICS = ("size", "weight", "tc", "max_phi")


@dataclass(frozen=True)
class ExperimentConfig:
    instance: str
    algorithm: str = "algorithm1"
    mode: str = "exact"
    metric: str = "size"
    trials: int = 10_000
    seed: int = 0
    opt_policy: str = "latest_arrival"


@dataclass(frozen=True)
class ReportRow:
    label: str
    algorithm: str
    mode: str
    metric: str
    value: str
    stderr: str
    opt: str
    ratio: str
    seed: str
    trials: str


def render(x) -> str:
    """Exact values as p/q, floats with full repr, missing values empty."""
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def resolve_instance(text: str) -> Instance:
    """A file path if one exists, otherwise a generator spec."""
    path = Path(text)
    if path.is_file():
        return load_instance(path)
    return generate(text)


APP_ALGORITHMS: dict[str, Callable[[Instance, Sequence[int]], object]] = {
    "single_length": lambda inst, order: apps.select_single_length(inst, order).weight,
    "two_length": lambda inst, order: apps.select_two_length(inst, order).weight,
}

ALGORITHMS = ("algorithm1",) + tuple(APP_ALGORITHMS)


def _order_mean(fn, inst: Instance, cfg: ExperimentConfig):
    if cfg.mode == "exact":
        total, count = Fraction(0), 0
        for order in all_orders(inst):
            total += Fraction(fn(inst, order))
            count += 1
        return (total / count if count else Fraction(0)), Fraction(0)
    est = estimate(fn(inst, o) for o in random_orders(inst.ids, cfg.trials, cfg.seed))
    return est.mean, est.stderr


def experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    if cfg.mode not in MODES:
        raise BadSpec(f"mode must be one of {MODES}")
    if cfg.metric not in METRICS:
        raise BadSpec(f"metric must be one of {METRICS}")
    if cfg.algorithm not in ALGORITHMS:
        raise BadSpec(f"algorithm must be one of {ALGORITHMS}")
    if cfg.opt_policy not in OPT_POLICIES:
        raise BadSpec(f"opt policy must be one of {tuple(OPT_POLICIES)}")
    inst = resolve_instance(cfg.instance)
    label = inst.name or cfg.instance
    try:
        value, stderr, opt = _measure(inst, cfg)
    except RandOrderError as exc:
        raise type(exc)(f"{label}: {exc}") from exc
    ratio = None
    if opt is not None and value:
        ratio = Fraction(opt) / value if cfg.mode == "exact" else opt / value
    trials = "" if cfg.mode == "exact" else str(cfg.trials)
    seed = "" if cfg.mode == "exact" else str(cfg.seed)
    return [ReportRow(label, cfg.algorithm, cfg.mode, cfg.metric, render(value), render(stderr),
                      render(opt), render(ratio), seed, trials)]


def _measure(inst: Instance, cfg: ExperimentConfig):
    policy = OPT_POLICIES[cfg.opt_policy]
    if cfg.metric == "max_phi":
        if cfg.algorithm != "algorithm1":
            raise BadSpec("max_phi is defined for algorithm1 only")
        table = max_expected_charge(inst, policy, cfg.mode, cfg.trials, cfg.seed)
        return table.maximum, (Fraction(0) if cfg.mode == "exact" else None), None
    if cfg.algorithm == "algorithm1":
        metric = {"size": size, "weight": weight, "tc": transfer_metric(policy)}[cfg.metric]
        if cfg.mode == "exact":
            value, stderr = exact_expectation(Algorithm1, inst, metric), Fraction(0)
        else:
            est = monte_carlo(Algorithm1, inst, cfg.trials, cfg.seed, metric)
            value, stderr = est.mean, est.stderr
    else:
        if cfg.metric != "weight":
            raise BadSpec(f"{cfg.algorithm} reports the weight metric only")
        value, stderr = _order_mean(APP_ALGORITHMS[cfg.algorithm], inst, cfg)
    opt = {"size": lambda: opt_unweighted(inst).value,
           "weight": lambda: opt_weighted(inst).value,
           "tc": lambda: None}[cfg.metric]()
    return value, stderr, opt


# -- curves and bias tables -------------------------------------------------

CURVES = {"f_alpha": "process1", "combine_r": "combine"}


@dataclass(frozen=True)
class CurveRow:
    parameter: str
    analytic: str
    empirical: str = ""
    stderr: str = ""


def curves(which: str, resolution: int = 999, trials: int = 0, seed: int = 0) -> list[CurveRow]:
    """Analytic bias on the grid i/(resolution+1); optional Monte Carlo column."""
    if which not in CURVES:
        raise BadSpec(f"curve must be one of {tuple(CURVES)}")
    if resolution < 2:
        raise BadSpec("resolution must be at least 2")
    model = CURVES[which]
    rows = []
    for p, value in bias_curve(model, resolution):
        emp = se = ""
        if trials:
            est = empirical_bias(model, _population(model, float(p)), trials, seed)
            emp, se = render(est.p_hat), render(est.stderr)
        rows.append(CurveRow(render(float(p)), render(float(value)), emp, se))
    return rows


def _population(model: str, p: float):
    return continuum_population(p) if model == "combine" else two_type_population(p)


@dataclass(frozen=True)
class BiasRow:
    model: str
    parameter: str
    analytic: str
    empirical: str
    stderr: str
    trials: str
    seed: str
    sampling: str


def bias_table(model: str, params: Sequence[float], trials: int, seed: int) -> list[BiasRow]:
    """Analytic vs with-replacement Monte Carlo bias for process1 or combine."""
    if model not in CURVES.values():
        raise BadSpec("bias tables cover process1 and combine")
    rows = []
    for p in params:
        est = empirical_bias(model, _population(model, p), trials, seed)
        rows.append(BiasRow(model, render(p), render(float(analytic_bias(model, p))),
                            render(est.p_hat), render(est.stderr), str(trials), str(seed), est.mode))
    return rows


# -- derandomized apps ------------------------------------------------------

APPS = ("string", "knapsack", "single-length", "two-length")


@dataclass(frozen=True)
class AppRow:
    app: str
    instance: str
    orders: str
    value: str
    stderr: str
    opt: str
    ratio: str
    seed: str
    trials: str


def _app_runner(app: str, source: str):
    """(label, ids, run(order) -> (value, trace dict), OPT) for one app input."""
    if app == "string":
        bits = apps.parse_bits(Path(source).read_text())

        def go(order):
            res = apps.check_string_equivalence(bits, order)
            return res.correct, {"correct": res.correct, "bit": res.bit, "resolved_at": res.resolved_at}

        return Path(source).stem, list(range(len(bits))), go, len(bits)
    if app == "knapsack":
        items, capacity = apps.parse_knapsack(Path(source).read_text())

        def go(order):
            res = apps.check_knapsack_equivalence(items, capacity, order)
            return res.value, {"value": render(res.value), "a0": render(res.value_a0),
                               "a1": render(res.value_a1), "bit": res.bit, "resolved_at": res.resolved_at,
                               "held": sorted(res.held)}

        try:
            opt = knapsack_opt(items, capacity)
        except InstanceTooLarge:
            opt = None
        return Path(source).stem, [it.id for it in items], go, opt
    if app in ("single-length", "two-length"):
        inst = resolve_instance(source)
        check = apps.check_single_length_equivalence if app == "single-length" else apps.check_two_length_equivalence

        def go(order):
            res = check(inst, order)
            return res.weight, {"weight": render(res.weight), "bit": res.bit, "resolved_at": res.resolved_at,
                                "served": [render(x) for x in res.served], "final": sorted(res.final)}

        return inst.name or source, list(inst.ids), go, opt_weighted(inst).value
    raise BadSpec(f"app must be one of {APPS}")


def app_experiment(app: str, source: str, orders: str = "exact", trials: int = 1000, seed: int = 0,
                   trace_sink: Callable[[dict], None] | None = None) -> list[AppRow]:
    """Mean value of an app over arrival orders; every run is checked for trace equivalence."""
    if orders not in MODES:
        raise BadSpec(f"orders must be one of {MODES}")
    label, ids, go, opt = _app_runner(app, source)
    if orders == "exact":
        if len(ids) > EXACT_LIMIT:
            raise InstanceTooLarge(f"exact enumeration is limited to {EXACT_LIMIT} items, got {len(ids)}")
        stream = permutations(ids)
    else:
        stream = random_orders(ids, trials, seed)
    stats = RunningStats()
    total, count = Fraction(0), 0
    for order in stream:
        value, trace = go(order)
        if trace_sink is not None:
            trace_sink({"order": list(order), **trace})
        if orders == "exact":
            total += Fraction(value)
            count += 1
        else:
            stats.add(float(value))
    if orders == "exact":
        value = total / count if count else Fraction(0)
        stderr = Fraction(0)
    else:
        est = stats.estimate()
        value, stderr = est.mean, est.stderr
    ratio = None
    if opt is not None and value:
        ratio = Fraction(opt) / value if orders == "exact" else opt / value
    exact = orders == "exact"
    return [AppRow(app, label, orders, render(value), render(stderr), render(opt), render(ratio),
                   "" if exact else str(seed), "" if exact else str(trials))]


# -- rendering --------------------------------------------------------------


def to_csv(rows: Sequence) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    names = [f.name for f in fields(rows[0])]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow([getattr(row, n) for n in names])
    return buf.getvalue()


def to_json(rows: Sequence) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2) + "\n"


def render_rows(rows: Sequence, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "json":
        return to_json(rows)
    raise BadSpec(f"unknown format {fmt!r}")
