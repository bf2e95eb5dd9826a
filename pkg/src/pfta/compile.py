"""Translate parametric fault trees into probabilistic Horn theories.

Two translations share the same disjoint declarations (one per ground
basic event, working/failed alternatives at the mission time) and differ
in clause discipline:

* `compile_direct` emits one clause per disjunct, keeping parameters as
  clause variables wherever possible.  Same-head bodies may overlap, so
  explanation probabilities may double-count.
* `compile_disjoint` defines every non-top event as a status-carrying
  predicate whose clauses split the input status space into disjoint
  cells (an ordered expansion with early termination), making explanation
  probabilities directly summable.  The top event keeps a plain failure
  predicate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Mapping, Sequence

from .errors import ModelInvalidError
from .model import (
    EventRef,
    Gate,
    KIND_BASIC,
    KIND_TOP,
    PftModel,
    failure_probability,
    require_valid,
)
from .pha import (
    Atom,
    Clause,
    DisjointDeclaration,
    PhaTheory,
    STAGE_DIRECT,
    STAGE_DISJOINT,
    STATUS_FAILED,
    STATUS_WORKING,
    Var,
)


@dataclass(frozen=True)
class CompileOptions:
    """Per-gate input ordering overrides: output class -> input class order."""

    input_order: Mapping[str, Sequence[str]] | None = None


def predicate_name(class_name: str) -> str:
    return class_name.lower()


def _head_terms(model: PftModel, class_name: str) -> tuple:
    ev = model.event_map[class_name]
    return tuple(Var(p.upper()) for p in ev.formal_params)


def _ordered_inputs(gate: Gate, options: CompileOptions | None) -> tuple[EventRef, ...]:
    if options is None or not options.input_order:
        return gate.inputs
    order = options.input_order.get(gate.output)
    if order is None:
        return gate.inputs
    ranking = {name: i for i, name in enumerate(order)}
    return tuple(sorted(gate.inputs, key=lambda r: ranking.get(r.event, len(ranking))))


def _expand_ref(
    model: PftModel,
    ref: EventRef,
    outer: Mapping[str, object],
    fold: bool,
) -> list[tuple[str, tuple]]:
    """Instances of one gate input as (event class, argument terms) pairs.

    Parameters declared at the referenced event are its replica indices:
    with `fold` they are enumerated over their types (Cartesian product,
    declaration order of values), otherwise they stay clause variables.
    All other parameters take their term from `outer`.
    """
    ev = model.event_map[ref.event]
    replicas: list[str] = []
    for a in ref.args:
        if isinstance(a, str) and a in ev.declares and a not in outer and a not in replicas:
            replicas.append(a)
    if not fold:
        bind = {p: Var(p.upper()) for p in replicas}
        args = tuple(
            a if isinstance(a, int) else bind.get(a) or outer[a] for a in ref.args
        )
        return [(ref.event, args)]
    out = []
    for combo in product(*(model.param_values(p) for p in replicas)):
        bind = dict(zip(replicas, combo))
        args = tuple(
            a if isinstance(a, int) else bind.get(a, None) if a in bind else outer[a]
            for a in ref.args
        )
        out.append((ref.event, args))
    return out


def expand_kofn(
    model: PftModel,
    gate: Gate,
    outer: Mapping[str, object] | None = None,
) -> list[tuple[tuple[str, tuple], ...]]:
    """Rewrite a voting gate as a disjunction of replica conjunctions.

    A gate asking for k working replicas out of n fails when n-k+1 fail;
    the result lists one conjunction per subset of that size, subsets in
    lexicographic order of the replica list.
    """
    if gate.kind != "kofn" or len(gate.inputs) != 1 or gate.k is None:
        raise ModelInvalidError([f"gate {gate.output} is not a well-formed KofN gate"])
    if outer is None:
        outer = {p: Var(p.upper()) for p in model.event_map[gate.output].formal_params}
    replicas = _expand_ref(model, gate.inputs[0], outer, fold=True)
    q = len(replicas) - gate.k + 1
    if q < 1:
        raise ModelInvalidError([f"KofN gate {gate.output}: k={gate.k} outside 1..{len(replicas)}"])
    return [tuple(group) for group in combinations(replicas, q)]


def _declarations(model: PftModel, t: float) -> tuple[DisjointDeclaration, ...]:
    decls = []
    for ev in model.events:
        if ev.kind != KIND_BASIC:
            continue
        p = failure_probability(model.rate_map[ev.class_name], t)
        pred = predicate_name(ev.class_name)
        value_sets = [model.param_values(f) for f in ev.formal_params]
        for values in product(*value_sets):
            decls.append(
                DisjointDeclaration(
                    (
                        (Atom(pred, values + (STATUS_WORKING,)), 1.0 - p),
                        (Atom(pred, values + (STATUS_FAILED,)), p),
                    )
                )
            )
    return tuple(decls)


def _direct_atom(model: PftModel, event: str, args: tuple) -> Atom:
    """Atom for an instance in the direct translation; basics carry `f`."""
    if model.event_map[event].kind == KIND_BASIC:
        return Atom(predicate_name(event), args + (STATUS_FAILED,))
    return Atom(predicate_name(event), args)


def compile_direct(
    model: PftModel, t: float, options: CompileOptions | None = None
) -> PhaTheory:
    """Direct clause translation (stage 1): cut set oriented."""
    require_valid(model)
    clauses: list[Clause] = []
    for ev in model.events:
        if ev.kind == KIND_BASIC:
            continue
        gate = model.gate_map[ev.class_name]
        head = Atom(predicate_name(ev.class_name), _head_terms(model, ev.class_name))
        outer = {p: v for p, v in zip(ev.formal_params, head.args)}
        inputs = _ordered_inputs(gate, options)
        if gate.kind == "or":
            for ref in inputs:
                for event, args in _expand_ref(model, ref, outer, fold=False):
                    clauses.append(Clause(head, (_direct_atom(model, event, args),)))
        elif gate.kind == "and":
            body: list[Atom] = []
            for ref in inputs:
                for event, args in _expand_ref(model, ref, outer, fold=True):
                    body.append(_direct_atom(model, event, args))
            clauses.append(Clause(head, tuple(body)))
        else:  # kofn
            for group in expand_kofn(model, gate, outer):
                body = [_direct_atom(model, event, args) for event, args in group]
                clauses.append(Clause(head, tuple(body)))
    return PhaTheory(tuple(clauses), _declarations(model, t), STAGE_DIRECT)


def _status_atom(model: PftModel, event: str, args: tuple, status: str) -> Atom:
    return Atom(predicate_name(event), args + (status,))


def _split_cells(kind: str, k: int | None, n: int) -> list[tuple[str, list[tuple[int, str]]]]:
    """Disjoint decision cells of a gate over n ordered inputs.

    Each cell is (gate status, [(input index, input status), ...]) where
    the inputs that settle the gate value come first in positional order
    and the remaining decided inputs follow in reverse positional order.
    Together the cells of a gate partition the joint status space of its
    inputs; the failure cells alone cover exactly the failing region.
    """
    cells: list[tuple[str, list[tuple[int, str]]]] = []
    f, w = STATUS_FAILED, STATUS_WORKING
    if kind == "and":
        cells.append((f, [(i, f) for i in range(n)]))
        for i in range(n):
            cells.append((w, [(i, w)] + [(j, f) for j in range(i - 1, -1, -1)]))
    elif kind == "or":
        for i in range(n):
            cells.append((f, [(i, f)] + [(j, w) for j in range(i - 1, -1, -1)]))
        cells.append((w, [(i, w) for i in range(n - 1, -1, -1)]))
    else:  # kofn with threshold k: fails when n-k+1 replicas fail
        q = n - k + 1
        for subset in combinations(range(n), q):
            rest = [j for j in range(max(subset) - 1, -1, -1) if j not in subset]
            cells.append((f, [(i, f) for i in subset] + [(j, w) for j in rest]))
        for subset in combinations(range(n), k):
            rest = [j for j in range(max(subset) - 1, -1, -1) if j not in subset]
            cells.append((w, [(i, w) for i in subset] + [(j, f) for j in rest]))
    return cells


def compile_disjoint(
    model: PftModel, t: float, options: CompileOptions | None = None
) -> PhaTheory:
    """Status-complete translation (stage 2): probability oriented."""
    require_valid(model)
    clauses: list[Clause] = []
    for ev in model.events:
        if ev.kind == KIND_BASIC:
            continue
        gate = model.gate_map[ev.class_name]
        head_terms = _head_terms(model, ev.class_name)
        outer = {p: v for p, v in zip(ev.formal_params, head_terms)}
        expanded: list[tuple[str, tuple]] = []
        for ref in _ordered_inputs(gate, options):
            expanded.extend(_expand_ref(model, ref, outer, fold=True))
        pred = predicate_name(ev.class_name)
        cells = _split_cells(gate.kind, gate.k, len(expanded))
        for status, picks in cells:
            if ev.kind == KIND_TOP:
                if status != STATUS_FAILED:
                    continue
                head = Atom(pred, head_terms)
            else:
                head = Atom(pred, head_terms + (status,))
            body = tuple(
                _status_atom(model, expanded[i][0], expanded[i][1], st)
                for i, st in picks
            )
            clauses.append(Clause(head, body))
    return PhaTheory(tuple(clauses), _declarations(model, t), STAGE_DISJOINT)
