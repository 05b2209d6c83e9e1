"""Command-line front end.

Exit codes: 0 on success, 1 on usage or input errors, 2 when a verification
or runtime assertion fails.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import experiments as ex
from .charging import (
    OPT_POLICIES,
    BaseInstanceSpec,
    base_charge_analytics,
    max_expected_charge,
    simulate_charging,
    trace_tc_bound,
    transfer_distribution,
)
from .engine import EXACT_LIMIT, Algorithm1, check_order, run
from .errors import IllegalDecision, InvalidOptWitness, RandOrderError, VerificationFailed
from .extraction import exact_bias
from .generators import generate, parse_spec, random_profile
from .intervals import format_instance

FAILURE_EXIT = 2
USAGE_EXIT = 1


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """Reports usage errors with exit code 1 instead of argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # the same flags are accepted before and after the subcommand
    default = argparse.SUPPRESS if suppress else None
    p = Parser(add_help=False)
    p.add_argument("--seed", type=int, default=default, help="RNG seed (default 0)")
    p.add_argument("--trials", type=int, default=default, help="Monte Carlo trials (default 10000)")
    p.add_argument("--out", default=default, help="write output to this file instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=default, help="report format (default csv)")
    p.add_argument("--config", default=default, help="flat key=value file; command-line flags win")
    return p


GLOBAL_DEFAULTS = {"seed": 0, "trials": 10_000, "format": "csv"}


def build_parser() -> Parser:
    parser = Parser(prog="randorder", description=__doc__.splitlines()[0], parents=[_global_flags(False)])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)
    flags = _global_flags(True)

    p = sub.add_parser("gen", parents=[flags], help="print a generated instance")
    p.add_argument("spec", nargs="?", help="generator spec, e.g. fig2(6) or base(1,1,2,3)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", parents=[flags], help="run Algorithm 1 on one arrival order")
    p.add_argument("--instance", help="generator spec or instance file")
    p.add_argument("--order", help="comma-separated ids; default is a seeded random order")
    p.add_argument("--charge", action="store_true", help="emit the charging trace as JSON")
    p.add_argument("--opt-policy", choices=sorted(OPT_POLICIES), help="default latest_arrival")
    p.set_defaults(func=cmd_run)

    for name, helptext in (("exact", "expectation over all arrival orders"), ("mc", "Monte Carlo estimate")):
        p = sub.add_parser(name, parents=[flags], help=helptext)
        p.add_argument("--instance", help="generator spec or instance file")
        p.add_argument("--algorithm", choices=ex.ALGORITHMS, help="default algorithm1")
        p.add_argument("--metric", choices=ex.METRICS, help="default size")
        p.add_argument("--opt-policy", choices=sorted(OPT_POLICIES), help="default latest_arrival")
        p.set_defaults(func=cmd_expectation, mode=name)

    p = sub.add_parser("bias", parents=[flags], help="analytic vs empirical bias of an extractor")
    p.add_argument("--model", choices=("process1", "combine", "process2"), help="default combine")
    p.add_argument("--param", type=float, action="append",
                   help="alpha or r in (0,1); for process2 the number of distinct items (repeatable)")
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("curves", parents=[flags], help="bias curve data on a uniform grid")
    p.add_argument("--which", choices=tuple(ex.CURVES), help="default combine_r")
    p.add_argument("--resolution", type=int, help="grid points (default 999)")
    p.add_argument("--empirical-trials", type=int, help="add a Monte Carlo column (default 0: off)")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("verify", parents=[flags], help="check the charging invariants and bounds")
    p.add_argument("target", nargs="?", choices=("charging", "profiles"), help="default charging")
    p.add_argument("--instance", help="instance for the charging check")
    p.add_argument("--mode", choices=ex.MODES, help="order enumeration for charging (default exact)")
    p.add_argument("--count", type=int, help="number of random profiles (default 10000)")
    p.add_argument("--opt-policy", choices=sorted(OPT_POLICIES), help="default latest_arrival")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("app", parents=[flags], help="run a derandomized application over arrival orders")
    p.add_argument("app", nargs="?", choices=ex.APPS)
    p.add_argument("--instance", help="input file (or generator spec for the interval apps)")
    p.add_argument("--orders", choices=ex.MODES, help="default exact")
    p.add_argument("--traces", help="write one JSON line per run to this file")
    p.set_defaults(func=cmd_app)
    return parser


# -- config -----------------------------------------------------------------


def read_config(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.partition("#")[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def apply_config(parser: Parser, args: argparse.Namespace) -> None:
    """Fill options left unset on the command line from the config file, then defaults."""
    config = read_config(args.config) if getattr(args, "config", None) else {}
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in parser._actions + sub._actions}
    for key, raw in config.items():
        action = actions.get(key)
        if action is None or key in ("config", "help", "command"):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key, None) is not None:
            continue
        value = action.type(raw) if action.type else raw
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config {key}={raw!r}: expected one of {list(action.choices)}")
        setattr(args, key, value)
    for key, value in GLOBAL_DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _need(args, name: str):
    value = getattr(args, name, None)
    if value is None:
        raise UsageError(f"--{name.replace('_', '-')} is required (flag or config key)")
    return value


def _or(value, default):
    return default if value is None else value


def emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    spec = args.spec or _need(args, "instance")
    inst = generate(spec)
    if args.format == "json":
        data = [{"id": iv.id, "start": ex.render(iv.start), "finish": ex.render(iv.finish),
                 "weight": ex.render(iv.weight), "label": iv.label} for iv in inst]
        emit(args, json.dumps({"name": inst.name, "intervals": data}, indent=2) + "\n")
    else:
        emit(args, format_instance(inst))
    return 0


def _parse_order(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise UsageError(f"--order must be comma-separated integers, got {text!r}") from None


def cmd_run(args) -> int:
    inst = ex.resolve_instance(_need(args, "instance"))
    if args.order:
        order = check_order(inst, _parse_order(args.order))
    else:
        order = list(inst.ids)
        random.Random(args.seed).shuffle(order)
    if args.charge:
        policy = OPT_POLICIES[_or(args.opt_policy, "latest_arrival")]
        ct = simulate_charging(inst, order, policy)
        emit(args, json.dumps(ct.to_dict(), indent=2) + "\n")
        return 0
    trace = run(Algorithm1, inst, order, snapshots=True)
    rows = []
    for step, ((i, decision), held) in enumerate(zip(trace.events, trace.snapshots), 1):
        names = sorted(inst.by_id[h].name() for h in held)
        rows.append({"step": step, "arrival": inst.by_id[i].name(), "decision": str(decision),
                     "held": " ".join(names)})
    if args.format == "json":
        emit(args, json.dumps({"instance": inst.name, "events": rows,
                               "final": sorted(inst.by_id[i].name() for i in trace.final)}, indent=2) + "\n")
    else:
        lines = ["step,arrival,decision,held"] + [f"{r['step']},{r['arrival']},{r['decision']},{r['held']}" for r in rows]
        emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_expectation(args) -> int:
    cfg = ex.ExperimentConfig(
        instance=_need(args, "instance"),
        algorithm=_or(args.algorithm, "algorithm1"),
        mode=args.mode,
        metric=_or(args.metric, "size"),
        trials=args.trials,
        seed=args.seed,
        opt_policy=_or(args.opt_policy, "latest_arrival"),
    )
    emit(args, ex.render_rows(ex.experiment(cfg), args.format))
    return 0


def cmd_bias(args) -> int:
    model = _or(args.model, "combine")
    params = args.param or ([5] if model == "process2" else [0.5 if model == "process1" else 2**0.5 - 1])
    if model == "process2":
        rows = []
        for n in params:
            if n != int(n) or not 2 <= n <= EXACT_LIMIT:
                raise UsageError(f"process2 takes an item count in 2..{EXACT_LIMIT}, got {n}")
            got = exact_bias("process2", list(range(int(n))))
            rows.append(ex.BiasRow("process2", str(int(n)), "1/2", ex.render(got.p_one), "0", "", "", "permutation"))
    else:
        rows = ex.bias_table(model, params, args.trials, args.seed)
    emit(args, ex.render_rows(rows, args.format))
    return 0


def cmd_curves(args) -> int:
    rows = ex.curves(_or(args.which, "combine_r"), _or(args.resolution, 999),
                     _or(args.empirical_trials, 0), args.seed)
    emit(args, ex.render_rows(rows, args.format))
    return 0


def cmd_verify(args) -> int:
    target = _or(args.target, "charging")
    report: dict = {"target": target}
    problems: list[str] = []
    if target == "profiles":
        count = _or(args.count, 10_000)
        rng = random.Random(args.seed)
        worst_bound, worst_nested = Fraction(0), Fraction(0)
        for _ in range(count):
            got = trace_tc_bound(random_profile(rng))
            worst_bound = max(worst_bound, got.bound)
            worst_nested = max(worst_nested, got.nested)
        if worst_bound > Fraction(1, 2):
            problems.append(f"trace bound {worst_bound} exceeds 1/2")
        report.update(count=count, seed=args.seed, max_bound=str(worst_bound), max_nested=str(worst_nested))
    else:
        inst = ex.resolve_instance(_need(args, "instance"))
        mode = _or(args.mode, "exact")
        policy = OPT_POLICIES[_or(args.opt_policy, "latest_arrival")]
        table = max_expected_charge(inst, policy, mode, args.trials, args.seed)
        report.update(instance=inst.name, mode=mode, runs=table.runs,
                      max_expected_charge=ex.render(table.maximum),
                      undefined=[inst.by_id[i].name() for i in table.undefined()])
        if table.maximum is not None and table.maximum > Fraction(5, 2):
            problems.append(f"max expected charge {table.maximum} exceeds 5/2")
        spec = parse_spec(inst.name) if inst.name.startswith("base(") else None
        if spec is not None and mode == "exact":
            want = base_charge_analytics(BaseInstanceSpec(*spec.args, **spec.kwargs))
            dist = transfer_distribution(inst, policy)
            got = sum(t * p for t, p in dist.items())
            report.update(e_tc=str(got), e_tc_closed_form=str(want.e_tc))
            if got != want.e_tc:
                problems.append(f"mean transfer charge {got} differs from closed form {want.e_tc}")
    report["problems"] = problems
    report["ok"] = not problems
    emit(args, json.dumps(report, indent=2) + "\n")
    return FAILURE_EXIT if problems else 0


def cmd_app(args) -> int:
    app = args.app or _need(args, "app")
    source = _need(args, "instance")
    sink = None
    handle = None
    if args.traces:
        handle = open(args.traces, "w")
        sink = lambda rec: handle.write(json.dumps(rec) + "\n")  # noqa: E731
    try:
        rows = ex.app_experiment(app, source, _or(args.orders, "exact"), args.trials, args.seed, sink)
    finally:
        if handle:
            handle.close()
    emit(args, ex.render_rows(rows, args.format))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        apply_config(parser, args)
        return args.func(args)
    except (VerificationFailed, IllegalDecision, InvalidOptWitness, AssertionError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return FAILURE_EXIT
    except (UsageError, RandOrderError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
