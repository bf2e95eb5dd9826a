"""Ground-truth reference: unfold the tree and enumerate every world.

This path never touches the Horn translation or the search engine.  The
parametric tree is unfolded to a ground AND/OR DAG (voting gates become
a disjunction over replica subsets) and every probability is obtained by
summing complete basic-event assignments, so it is exact, slow, and an
independent check on everything the engine computes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import OracleError
from .compile import expand_kofn, _expand_ref
from .model import (
    GroundEvent as Key,
    KIND_BASIC,
    PftModel,
    failure_probability,
    format_instance,
    require_valid,
)

DEFAULT_MAX_EVENTS = 24
_CHUNK_BITS = 16


@dataclass(frozen=True)
class GroundFaultTree:
    """Ground AND/OR DAG; `nodes` are topologically ordered (inputs first)."""

    basics: tuple[tuple[Key, float], ...]
    nodes: tuple[tuple[Key, str, tuple[Key, ...]], ...]
    top: Key

    @property
    def basic_keys(self) -> tuple[Key, ...]:
        return tuple(k for k, _ in self.basics)


def unfold(model: PftModel, t: float) -> GroundFaultTree:
    """Instantiate every replica reachable from the top event."""
    require_valid(model)
    basic_probs: dict[Key, float] = {}
    nodes: list[tuple[Key, str, tuple[Key, ...]]] = []
    done: set[Key] = set()
    building: set[Key] = set()

    def build(class_name: str, values: tuple[int, ...]) -> Key:
        key: Key = (class_name, values)
        if key in done:
            return key
        if key in building:
            raise OracleError(f"cycle through {format_instance(key)}")
        building.add(key)
        ev = model.event_map[class_name]
        if ev.kind == KIND_BASIC:
            basic_probs[key] = failure_probability(model.rate_map[class_name], t)
        else:
            gate = model.gate_map[class_name]
            env = dict(zip(ev.formal_params, values))
            if gate.kind == "kofn":
                subkeys = []
                for idx, group in enumerate(expand_kofn(model, gate, env), start=1):
                    inputs = tuple(build(event, args) for event, args in group)
                    subkey: Key = (f"{class_name}#{idx}", values)
                    nodes.append((subkey, "and", inputs))
                    done.add(subkey)
                    subkeys.append(subkey)
                nodes.append((key, "or", tuple(subkeys)))
            else:
                inputs = []
                for ref in gate.inputs:
                    for event, args in _expand_ref(model, ref, env, fold=True):
                        inputs.append(build(event, args))
                nodes.append((key, gate.kind, tuple(inputs)))
        building.discard(key)
        done.add(key)
        return key

    top_key = build(model.top.class_name, ())
    order = {e.class_name: i for i, e in enumerate(model.events)}
    basics = tuple(
        (k, basic_probs[k]) for k in sorted(basic_probs, key=lambda k: (order[k[0]], k[1]))
    )
    return GroundFaultTree(basics, tuple(nodes), top_key)


def evaluate(tree: GroundFaultTree, failed: set[Key]) -> dict[Key, bool]:
    """Status of every node (True = failed) for one basic assignment."""
    state: dict[Key, bool] = {k: (k in failed) for k, _ in tree.basics}
    for key, kind, inputs in tree.nodes:
        vals = [state[i] for i in inputs]
        state[key] = all(vals) if kind == "and" else any(vals)
    return state


def _check_size(tree: GroundFaultTree, max_events: int) -> int:
    n = len(tree.basics)
    if n > max_events:
        raise OracleError(
            f"{n} ground basic events exceed the enumeration bound {max_events}"
        )
    return n


def _node_columns(tree: GroundFaultTree, bits: np.ndarray) -> dict[Key, np.ndarray]:
    """Evaluate all nodes over a chunk of assignments (rows of `bits`)."""
    cols: dict[Key, np.ndarray] = {}
    for j, (key, _) in enumerate(tree.basics):
        cols[key] = bits[:, j]
    for key, kind, inputs in tree.nodes:
        acc = cols[inputs[0]].copy()
        if kind == "and":
            for i in inputs[1:]:
                acc &= cols[i]
        else:
            for i in inputs[1:]:
                acc |= cols[i]
        cols[key] = acc
    return cols


def _chunk_bits(n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    return (idx[:, None] >> np.arange(n)) & 1 == 1


def exact_probability(
    tree: GroundFaultTree,
    condition: Mapping[Key, bool],
    max_events: int = DEFAULT_MAX_EVENTS,
) -> float:
    """Probability that every conditioned node has the stated status.

    Computed by enumerating all 2^N basic-event assignments and summing
    the weights of those satisfying `condition` (True = failed).
    """
    n = _check_size(tree, max_events)
    probs = np.array([p for _, p in tree.basics])
    total = 0.0
    for start in range(0, 1 << n, 1 << _CHUNK_BITS):
        stop = min(start + (1 << _CHUNK_BITS), 1 << n)
        bits = _chunk_bits(n, start, stop)
        cols = _node_columns(tree, bits)
        weights = np.where(bits, probs, 1.0 - probs).prod(axis=1)
        sat = np.ones(stop - start, dtype=bool)
        for key, must_fail in condition.items():
            sat &= cols[key] if must_fail else ~cols[key]
        total += float(weights[sat].sum())
    return total


def top_failure_vector(tree: GroundFaultTree, max_events: int = DEFAULT_MAX_EVENTS) -> np.ndarray:
    """Top event status for every assignment, indexed by failure bitmask."""
    n = _check_size(tree, max_events)
    out = np.empty(1 << n, dtype=bool)
    for start in range(0, 1 << n, 1 << _CHUNK_BITS):
        stop = min(start + (1 << _CHUNK_BITS), 1 << n)
        cols = _node_columns(tree, _chunk_bits(n, start, stop))
        out[start:stop] = cols[tree.top]
    return out


def prime_implicants(
    tree: GroundFaultTree, max_events: int = DEFAULT_MAX_EVENTS
) -> list[frozenset[Key]]:
    """Minimal failure sets of the top event, by exhaustive enumeration.

    The tree is coherent (AND/OR only), so a failing set is minimal
    exactly when dropping any single element makes the top event work.
    """
    n = _check_size(tree, max_events)
    failed = top_failure_vector(tree, max_events)
    keys = tree.basic_keys
    out: list[frozenset[Key]] = []
    for mask in np.flatnonzero(failed):
        mask = int(mask)
        minimal = True
        for j in range(n):
            bit = 1 << j
            if mask & bit and failed[mask ^ bit]:
                minimal = False
                break
        if minimal:
            out.append(frozenset(keys[j] for j in range(n) if mask & (1 << j)))
    out.sort(key=lambda s: (len(s), sorted(s)))
    return out
