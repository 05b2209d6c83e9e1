"""Instance generators for the named benchmark constructions.

Specs are written as ``name`` or ``name(arg, key=value, ...)``, e.g.
``fig2(6)``, ``base(1,1,2,3)``, ``composed(parts=23)``,
``composed(parts=12, drop=J2)``, ``lb1``, ``random(n=7, k=3, seed=4)``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from .charging import BaseInstanceSpec, Stage, TraceProfile, base_instance
from .errors import BadSpec
from .intervals import Instance

FIG4_INTERVALS = {
    # x10 integer coordinates of the three-construction example
    "J1": (-97, -73),
    "J2": (-82, -58),
    "J3": (-67, -43),
    "M1": (-100, 0),
    "I1": (-7, 17),
    "M2": (10, 110),
    "I2": (33, 57),
    "J4": (58, 82),
    "I3": (103, 127),
    "M3": (50, 150),
    "I4": (143, 167),
}

#: (L, R, M, S) labels of each construction in the three-construction example.
FIG4_CONSTRUCTIONS = {
    1: ((), ("I1",), ("M1",), ("J1", "J2", "J3")),
    2: (("I1",), ("I3",), ("M2",), ("I2", "J4")),
    3: (("I2",), ("I4",), ("M3",), ("J4", "I3")),
}


@dataclass(frozen=True)
class GeneratorSpec:
    variant: str
    args: tuple = ()
    kwargs: dict = field(default_factory=dict)

    def __str__(self) -> str:
        parts = [str(a) for a in self.args] + [f"{k}={v}" for k, v in self.kwargs.items()]
        return f"{self.variant}({','.join(parts)})" if parts else self.variant


_SPEC_RE = re.compile(r"^\s*([a-z_][a-z0-9_]*)\s*(?:\((.*)\))?\s*$", re.I)


def _atom(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def parse_spec(text: str) -> GeneratorSpec:
    m = _SPEC_RE.match(text)
    if not m:
        raise BadSpec(f"cannot parse generator spec {text!r}")
    variant, body = m.group(1).lower(), m.group(2)
    args, kwargs = [], {}
    if body and body.strip():
        for token in body.split(","):
            token = token.strip()
            if "=" in token:
                key, value = token.split("=", 1)
                kwargs[key.strip()] = _atom(value.strip())
            else:
                args.append(_atom(token))
    return GeneratorSpec(variant, tuple(args), kwargs)


def fig2(n: int) -> Instance:
    """n-2 identical middle copies flanked by two disjoint, slightly longer intervals.

    Each flank partially overlaps every middle copy; nothing is nested.
    """
    if n < 3:
        raise BadSpec("fig2 needs n >= 3")
    spans = [(-5, 2), (4, 11)] + [(0, 6)] * (n - 2)
    labels = ["I2", "I3"] + [f"I1_{j + 1}" for j in range(n - 2)]
    return Instance.from_spans(spans, labels=labels, name=f"fig2({n})")


def lb1() -> Instance:
    spans = [(-13, -7), (-18, -12), (-8, -2)]
    return Instance.from_spans(spans, labels=["I1", "I2", "I3"], name="lb1")


def lb2() -> Instance:
    spans = [(-18, -12), (-13, -7), (-8, -2)]
    return Instance.from_spans(spans, labels=["I1", "I3", "I4"], name="lb2")


def composed(parts=(1, 2, 3), drop=()) -> Instance:
    """Union of the selected constructions of the three-construction example.

    Neighbouring constructions share their boundary optimal intervals
    (I1 is right of C1 and left of C2, and so on).  ``drop`` removes named
    intervals to keep exact enumeration within reach.
    """
    parts = tuple(sorted(set(parts)))
    if not parts or any(p not in FIG4_CONSTRUCTIONS for p in parts):
        raise BadSpec(f"composed parts must be drawn from 1, 2, 3; got {parts}")
    members = []
    for p in parts:
        for group in FIG4_CONSTRUCTIONS[p]:
            members.extend(g for g in group if g not in members)
    members = [m for m in FIG4_INTERVALS if m in members and m not in drop]
    name = f"composed({''.join(map(str, parts))}" + (f",drop={'+'.join(drop)}" if drop else "") + ")"
    return Instance.from_spans([FIG4_INTERVALS[m] for m in members], labels=members, name=name)


def construction(inst: Instance, part: int) -> Instance:
    """The members of one construction present in ``inst``, as a standalone instance."""
    labels = {lab for group in FIG4_CONSTRUCTIONS[part] for lab in group}
    keep = [iv.id for iv in inst.intervals if iv.label in labels]
    return inst.subset(keep, name=f"{inst.name}/C{part}")


def random_instance(n: int, k: int = 2, weights: str = "unit", seed: int = 0, span: int | None = None) -> Instance:
    """Seeded integer intervals using exactly min(n, k) distinct lengths."""
    if n < 0 or k < 1:
        raise BadSpec("random needs n >= 0 and k >= 1")
    rng = random.Random(seed)
    lengths = rng.sample(range(1, 3 * k + 3), k)
    span = span if span is not None else max(2 * n, 4) + max(lengths)
    spans, ws = [], []
    for j in range(n):
        ell = lengths[j] if j < k else rng.choice(lengths)
        start = rng.randrange(0, span)
        spans.append((start, start + ell))
        if weights == "unit":
            ws.append(1)
        elif weights == "int":
            ws.append(rng.randint(1, 9))
        else:
            raise BadSpec(f"unknown weight mode {weights!r}")
    return Instance.from_spans(spans, weights=ws, name=f"random(n={n},k={k},weights={weights},seed={seed})")


def random_profile(rng: random.Random, max_d: int = 6, max_x: int = 50) -> TraceProfile:
    """A random trace profile satisfying the pending-set inequality.

    Pending L and R sets are non-empty and the last stage keeps at least
    three S intervals, as in the setting the 1/2 bound is stated for.
    """
    d = rng.randint(1, max_d)
    rows = [[rng.randint(1, max_x), rng.randint(1, 4), rng.randint(1, 4), 0] for _ in range(d)]
    rows[-1][3] = rng.randint(3, 8)
    pending = 0
    for i in range(d - 2, -1, -1):
        nxt = rows[i + 1]
        pending += nxt[0] + nxt[1] + nxt[2]
        rows[i][3] = rows[-1][3] + pending + rng.randint(0, 5)
    return TraceProfile(tuple(Stage(*r) for r in rows))


def generate(spec: str | GeneratorSpec) -> Instance:
    if isinstance(spec, str):
        spec = parse_spec(spec)
    a, kw = spec.args, spec.kwargs
    try:
        if spec.variant == "fig2":
            return fig2(*a, **kw)
        if spec.variant == "base":
            return base_instance(BaseInstanceSpec(*a, **kw))
        if spec.variant == "lb1":
            return lb1()
        if spec.variant == "lb2":
            return lb2()
        if spec.variant == "composed":
            parts = kw.get("parts", a[0] if a else 123)
            drop = kw.get("drop", "")
            return composed(
                parts=tuple(int(c) for c in str(parts)),
                drop=tuple(d for d in str(drop).split("+") if d),
            )
        if spec.variant == "random":
            return random_instance(*a, **kw)
    except TypeError as exc:
        raise BadSpec(f"bad arguments for {spec}: {exc}") from exc
    raise BadSpec(f"unknown generator {spec.variant!r}")
