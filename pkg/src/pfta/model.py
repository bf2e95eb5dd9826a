"""Parametric fault tree model: typed events, gates, replication, rates.

A model is a bipartite DAG of event classes and gates.  Event classes may
carry formal parameters ranging over finite integer types; a class that
declares a parameter stands for one replica per value (a replicator).
Basic event classes fail independently with exponential rates; the unique
top event is ground.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable

from .errors import ModelInvalidError

GateKind = str  # "and" | "or" | "kofn"

KIND_BASIC = "basic"
KIND_INTERNAL = "internal"
KIND_TOP = "top"

# a ground event instance: (class name, parameter values)
GroundEvent = tuple[str, tuple[int, ...]]


def format_instance(key: GroundEvent) -> str:
    name, values = key
    if not values:
        return name
    return f"{name}({','.join(str(v) for v in values)})"


@dataclass(frozen=True)
class ParamType:
    """A finite set of integer values usable as replica indices."""

    name: str
    values: tuple[int, ...]


@dataclass(frozen=True)
class Parameter:
    """A named replica index; declared at exactly one event class."""

    name: str
    type_name: str
    declared_at: str | None  # class name of the declaring replicator


@dataclass(frozen=True)
class EventNode:
    """An event class; replicas are distinguished by parameter values."""

    class_name: str
    kind: str  # KIND_BASIC | KIND_INTERNAL | KIND_TOP
    formal_params: tuple[str, ...] = ()
    # names of the formal parameters declared at this node (replicator role)
    declares: frozenset[str] = frozenset()
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class EventRef:
    """A gate input: an event class applied to parameter names or constants."""

    event: str
    args: tuple[int | str, ...] = ()  # int = constant, str = parameter name


@dataclass(frozen=True)
class Gate:
    """One gate; `output` is defined in terms of the ordered `inputs`."""

    kind: GateKind
    output: str
    inputs: tuple[EventRef, ...]
    k: int | None = None  # voting threshold, kind == "kofn" only
    # parameters this gate quantifies, i.e. declares at its single input
    forall: tuple[str, ...] = ()
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FailureRate:
    """Constant failure rate (per hour) of a basic event class."""

    event_class: str
    lam: float


@dataclass(frozen=True)
class PftModel:
    """Immutable parametric fault tree."""

    name: str
    types: tuple[ParamType, ...]
    params: tuple[Parameter, ...]
    events: tuple[EventNode, ...]
    gates: tuple[Gate, ...]
    rates: tuple[FailureRate, ...]

    @cached_property
    def type_map(self) -> dict[str, ParamType]:
        return {t.name: t for t in self.types}

    @cached_property
    def param_map(self) -> dict[str, Parameter]:
        return {p.name: p for p in self.params}

    @cached_property
    def event_map(self) -> dict[str, EventNode]:
        return {e.class_name: e for e in self.events}

    @cached_property
    def rate_map(self) -> dict[str, float]:
        return {r.event_class: r.lam for r in self.rates}

    @cached_property
    def gate_map(self) -> dict[str, Gate]:
        """Gate keyed by its output class; at most one per class."""
        return {g.output: g for g in self.gates}

    @cached_property
    def top(self) -> EventNode:
        tops = [e for e in self.events if e.kind == KIND_TOP]
        if len(tops) != 1:
            raise ModelInvalidError([f"model has {len(tops)} top events, expected 1"])
        return tops[0]

    def param_values(self, param_name: str) -> tuple[int, ...]:
        return self.type_map[self.param_map[param_name].type_name].values

    def formal_types(self, class_name: str) -> tuple[str, ...]:
        ev = self.event_map[class_name]
        return tuple(self.param_map[p].type_name for p in ev.formal_params)


def failure_probability(lam: float, t: float) -> float:
    """Failure probability 1 - exp(-lam*t) of an exponential component."""
    if lam < 0:
        raise ValueError(f"failure rate must be nonnegative, got {lam}")
    if t < 0:
        raise ValueError(f"mission time must be nonnegative, got {t}")
    return -math.expm1(-lam * t)


def _descendants(model: PftModel, root: str) -> set[str]:
    """All event classes reachable downward from `root`, inclusive."""
    seen: set[str] = set()
    stack = [root]
    while stack:
        name = stack.pop()
        if name in seen:
            continue
        seen.add(name)
        gate = model.gate_map.get(name)
        if gate is not None:
            stack.extend(ref.event for ref in gate.inputs)
    return seen


def validate(model: PftModel) -> list[str]:
    """Check structural well-formedness; returns human-readable violations."""
    out: list[str] = []
    classes = {e.class_name for e in model.events}

    for t in model.types:
        if not t.values:
            out.append(f"type {t.name} is empty")
        if len(set(t.values)) != len(t.values):
            out.append(f"type {t.name} has repeated values")

    for p in model.params:
        if p.type_name not in model.type_map:
            out.append(f"parameter {p.name} has unknown type {p.type_name}")

    tops = [e for e in model.events if e.kind == KIND_TOP]
    if len(tops) != 1:
        out.append(f"model has {len(tops)} top events, expected exactly 1")
    lowered: dict[str, str] = {}
    for e in model.events:
        low = e.class_name.lower()
        if low in lowered:
            out.append(
                f"event classes {lowered[low]} and {e.class_name} collide "
                "case-insensitively"
            )
        lowered[low] = e.class_name
    gate_outputs = [g.output for g in model.gates]
    if len(set(gate_outputs)) != len(gate_outputs):
        dups = sorted({n for n in gate_outputs if gate_outputs.count(n) > 1})
        out.append("multiple gates share an output: " + ", ".join(dups))
    input_classes = {ref.event for g in model.gates for ref in g.inputs}

    for e in model.events:
        for p in e.formal_params:
            if p not in model.param_map:
                out.append(f"event {e.class_name} uses undeclared parameter {p}")
        if e.kind == KIND_BASIC:
            if e.class_name in model.gate_map:
                out.append(f"basic event {e.class_name} is the output of a gate")
            if e.class_name not in model.rate_map:
                out.append(f"missing failure rate for {e.class_name}")
        else:
            if e.class_name not in model.gate_map:
                out.append(f"event {e.class_name} is not the output of any gate")
            if e.class_name in model.rate_map:
                out.append(f"non-basic event {e.class_name} has a failure rate")
        if e.kind == KIND_TOP:
            if e.formal_params:
                out.append(f"top event {e.class_name} must be ground")
            if e.class_name in input_classes:
                out.append(f"top event {e.class_name} is an input of a gate")

    for r in model.rates:
        if r.event_class not in classes:
            out.append(f"failure rate given for unknown event {r.event_class}")
        if r.lam < 0:
            out.append(f"negative failure rate for {r.event_class}")

    # every parameter must be declared at exactly one event node
    for p in model.params:
        declarers = [e.class_name for e in model.events if p.name in e.declares]
        if p.declared_at is None or not declarers:
            out.append(f"parameter {p.name} is never declared at a replicator")
        elif len(declarers) > 1 or declarers != [p.declared_at]:
            out.append(f"parameter {p.name} is declared at multiple events")
        elif p.name not in model.event_map[p.declared_at].formal_params:
            out.append(
                f"parameter {p.name} declared at {p.declared_at} "
                "is not one of its formal parameters"
            )

    # cycle check on the event graph (output -> inputs)
    color: dict[str, int] = {}

    def has_cycle(name: str) -> bool:
        color[name] = 1
        gate = model.gate_map.get(name)
        if gate is not None:
            for ref in gate.inputs:
                c = color.get(ref.event, 0)
                if c == 1 or (c == 0 and ref.event in classes and has_cycle(ref.event)):
                    return True
        color[name] = 2
        return False

    if any(color.get(e.class_name, 0) == 0 and has_cycle(e.class_name) for e in model.events):
        out.append("event graph contains a cycle")
        return out  # scope checks below assume an acyclic graph

    for g in model.gates:
        out.extend(_check_gate(model, g, classes))

    # scope: a parameter may only reach descendants of its declaring node
    for p in model.params:
        if p.declared_at is None or p.declared_at not in classes:
            continue
        scope = _descendants(model, p.declared_at)
        holders = [e.class_name for e in model.events if p.name in e.formal_params]
        # a gate may name the parameter in the ref that introduces it (forall)
        holders.extend(
            g.output for g in model.gates
            if p.name not in g.forall and any(p.name in ref.args for ref in g.inputs)
        )
        if any(name not in scope for name in holders):
            out.append(f"parameter {p.name} used outside the scope of {p.declared_at}")
    return out


def _check_gate(model: PftModel, g: Gate, classes: set[str]) -> Iterable[str]:
    out: list[str] = []
    if g.output not in classes:
        out.append(f"gate output {g.output} is not a declared event")
        return out
    outer = model.event_map[g.output].formal_params
    for ref in g.inputs:
        if ref.event not in classes:
            out.append(f"gate {g.output} references unknown event {ref.event}")
            continue
        ev = model.event_map[ref.event]
        if len(ref.args) != len(ev.formal_params):
            out.append(
                f"gate {g.output}: {ref.event} takes "
                f"{len(ev.formal_params)} parameters, got {len(ref.args)}"
            )
            continue
        for pos, (arg, formal) in enumerate(zip(ref.args, ev.formal_params)):
            ftype = model.param_map[formal].type_name if formal in model.param_map else None
            if isinstance(arg, int):
                if ftype is not None and arg not in model.type_map[ftype].values:
                    out.append(
                        f"gate {g.output}: constant {arg} is not a value of "
                        f"type {ftype} (position {pos + 1} of {ref.event})"
                    )
            else:
                if arg not in model.param_map:
                    out.append(f"gate {g.output} uses undeclared parameter {arg}")
                    continue
                atype = model.param_map[arg].type_name
                if ftype is not None and atype != ftype:
                    out.append(
                        f"gate {g.output}: parameter {arg} of type {atype} "
                        f"passed where {ref.event} expects {ftype}"
                    )
                # a parameter declared at the input itself is legal in any
                # gate: AND/KofN fold over it, OR reads it as a disjunction
                if arg not in outer and arg not in ev.declares:
                    out.append(
                        f"gate {g.output} uses parameter {arg} that is neither "
                        f"a formal of {g.output} nor declared at {ref.event}"
                    )
    if g.kind == "kofn":
        ref = g.inputs[0] if len(g.inputs) == 1 else None
        ev = model.event_map.get(ref.event) if ref is not None else None
        declared = [] if ev is None else [
            a for a in ref.args if isinstance(a, str) and a in ev.declares
        ]
        if not declared:
            out.append(f"KofN gate {g.output} must have exactly one replicator input")
        else:
            n = 1
            for a in declared:
                param = model.param_map.get(a)
                if param is None or param.type_name not in model.type_map:
                    n = 0
                    break
                n *= len(model.type_map[param.type_name].values)
            if n and (g.k is None or not 1 <= g.k <= n):
                out.append(f"KofN gate {g.output}: k={g.k} outside 1..{n}")
    elif g.k is not None:
        out.append(f"gate {g.output} ({g.kind}) must not carry a voting threshold")
    if g.forall:
        if len(g.inputs) != 1:
            out.append(f"gate {g.output} quantifies over a non-unique input")
        else:
            target = model.event_map.get(g.inputs[0].event)
            for pname in g.forall:
                if target is None or pname not in target.declares:
                    out.append(
                        f"gate {g.output} quantifies {pname}, which is not "
                        f"declared at {g.inputs[0].event}"
                    )
    if not g.inputs:
        out.append(f"gate {g.output} has no inputs")
    return out


def require_valid(model: PftModel) -> None:
    """Raise ModelInvalidError when `validate` reports violations."""
    violations = validate(model)
    if violations:
        raise ModelInvalidError(violations)


def instantiate(model: PftModel, ref: EventRef, env: dict[str, int]) -> list[tuple[tuple[int, ...], dict[str, int]]]:
    """Ground a gate input under `env`, enumerating unbound replica indices.

    Returns one (value tuple, extended environment) pair per replica; the
    order follows the Cartesian product of the declared types in the order
    the unbound parameters first appear in the reference.
    """
    free: list[str] = []
    for arg in ref.args:
        if isinstance(arg, str) and arg not in env and arg not in free:
            free.append(arg)
    out = []
    for combo in product(*(model.param_values(p) for p in free)):
        child_env = dict(env)
        child_env.update(zip(free, combo))
        values = tuple(a if isinstance(a, int) else child_env[a] for a in ref.args)
        out.append((values, child_env))
    return out
