"""Dependability measures of a model at a mission time.

Qualitative results (minimal cut sets) come from the direct translation;
quantitative ones (unreliability, posteriors) from the status-complete
translation, whose explanations are mutually exclusive events.  Posterior
probabilities are ratios of joint and top-event probabilities, so the
exhaustively computed top-event probability is memoized per compiled
theory and reused across cut sets and basic events.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .compile import CompileOptions, compile_direct, compile_disjoint, predicate_name
from .engine import (
    EXHAUSTIVE,
    ProbabilityBounds,
    StopCriteria,
    minimal_explanations,
    probability,
)
from .errors import AnalysisError
from .model import (
    GroundEvent,
    KIND_BASIC,
    PftModel,
    format_instance,
    require_valid,
)
from .pha import Atom, PhaTheory, STATUS_FAILED, serialize


@dataclass(frozen=True)
class CutSet:
    """A minimal failure set with its prior and optional posterior weight."""

    events: frozenset[GroundEvent]
    prior: float
    posterior: float | None = None

    def rendered(self) -> tuple[str, ...]:
        return tuple(format_instance(k) for k in sorted(self.events))


@dataclass(frozen=True)
class UnreliabilityPoint:
    time: float
    bounds: ProbabilityBounds


@dataclass(frozen=True)
class MeasureReport:
    """Everything the command line prints, in one bundle."""

    model_name: str
    time: float
    cut_sets: tuple[CutSet, ...] = ()
    unreliability: ProbabilityBounds | None = None
    curve: tuple[UnreliabilityPoint, ...] = ()
    basic_posteriors: tuple[tuple[str, float], ...] = ()


def top_atom(model: PftModel) -> Atom:
    return Atom(predicate_name(model.top.class_name))


def event_atom(model: PftModel, event: GroundEvent, status: str = STATUS_FAILED) -> Atom:
    name, values = event
    if name not in model.event_map:
        raise AnalysisError(f"unknown event class {name}")
    return Atom(predicate_name(name), tuple(values) + (status,))


def _class_names(model: PftModel) -> dict[str, str]:
    return {predicate_name(e.class_name): e.class_name for e in model.events}


def parse_instance(model: PftModel, text: str) -> GroundEvent:
    """Read a rendered ground event such as `D(1,2)` back into a key."""
    m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z_0-9]*)\s*(?:\(([^()]*)\))?\s*", text)
    if m is None:
        raise AnalysisError(f"cannot parse event {text!r}")
    name = m.group(1)
    values: tuple[int, ...] = ()
    if m.group(2) is not None and m.group(2).strip():
        try:
            values = tuple(int(v) for v in m.group(2).split(","))
        except ValueError:
            raise AnalysisError(f"cannot parse event {text!r}") from None
    ev = model.event_map.get(name)
    if ev is None or ev.kind != KIND_BASIC:
        raise AnalysisError(f"{name} is not a basic event class of the model")
    if len(values) != len(ev.formal_params):
        raise AnalysisError(
            f"{name} takes {len(ev.formal_params)} parameter values, got {len(values)}"
        )
    return (name, values)


def _require_positive_time(t: float) -> None:
    if not t > 0:
        raise AnalysisError(f"mission time must be positive, got {t}")


def minimal_cut_sets(
    model: PftModel,
    t: float,
    stop: StopCriteria = EXHAUSTIVE,
    options: CompileOptions | None = None,
) -> list[CutSet]:
    """Minimal cut sets ranked by prior probability, ties lexicographic."""
    _require_positive_time(t)
    require_valid(model)
    theory = compile_direct(model, t, options)
    expls = minimal_explanations(theory, top_atom(model), stop)
    names = _class_names(model)
    cut_sets = [
        CutSet(frozenset((names[a.pred], a.args[:-1]) for a in e.hypotheses), e.prob)
        for e in expls
    ]
    cut_sets.sort(key=lambda c: (-c.prior, c.rendered()))
    return cut_sets


_unrel_memo: dict[str, ProbabilityBounds] = {}
_UNREL_MEMO_LIMIT = 64


def clear_memo() -> None:
    _unrel_memo.clear()


def _disjoint_theory(model: PftModel, t: float) -> PhaTheory:
    require_valid(model)
    return compile_disjoint(model, t)


def _top_probability(theory: PhaTheory, model: PftModel, stop: StopCriteria) -> ProbabilityBounds:
    if not stop.exhaustive:
        return probability(theory, top_atom(model), stop)
    key = serialize(theory)
    hit = _unrel_memo.get(key)
    if hit is None:
        hit = probability(theory, top_atom(model), EXHAUSTIVE)
        if len(_unrel_memo) >= _UNREL_MEMO_LIMIT:
            _unrel_memo.pop(next(iter(_unrel_memo)))
        _unrel_memo[key] = hit
    return hit


def system_unreliability(
    model: PftModel, t: float, stop: StopCriteria = EXHAUSTIVE
) -> ProbabilityBounds:
    """Bounds on the probability that the top event occurs by time t."""
    if t == 0:
        return ProbabilityBounds(0.0, 0.0)
    _require_positive_time(t)
    return _top_probability(_disjoint_theory(model, t), model, stop)


def unreliability_curve(
    model: PftModel, times: Sequence[float], stop: StopCriteria = EXHAUSTIVE
) -> list[UnreliabilityPoint]:
    """Unreliability at each requested mission time."""
    return [UnreliabilityPoint(t, system_unreliability(model, t, stop)) for t in times]


def curve_times(t_from: float, t_to: float, step: float) -> list[float]:
    """Arithmetic grid from t_from to t_to inclusive (within rounding)."""
    if step <= 0:
        raise AnalysisError(f"step must be positive, got {step}")
    if t_to < t_from:
        raise AnalysisError("curve end time precedes start time")
    times = []
    i = 0
    while True:
        t = t_from + i * step
        if t > t_to + 1e-9 * max(1.0, abs(t_to)):
            break
        times.append(t)
        i += 1
    return times


def cut_set_posterior(
    model: PftModel,
    cut_set: Iterable[GroundEvent] | CutSet,
    t: float,
    stop: StopCriteria = EXHAUSTIVE,
) -> float:
    """P(cut set failed | top event) at time t."""
    _require_positive_time(t)
    events = cut_set.events if isinstance(cut_set, CutSet) else frozenset(cut_set)
    theory = _disjoint_theory(model, t)
    te = _top_probability(theory, model, stop).lower
    if te <= 0.0:
        raise AnalysisError("posterior undefined: system unreliability is 0")
    goals = [event_atom(model, e) for e in sorted(events)] + [top_atom(model)]
    joint = probability(theory, goals, stop).lower
    return joint / te


def basic_event_posterior(
    model: PftModel,
    event: GroundEvent | str,
    t: float,
    stop: StopCriteria = EXHAUSTIVE,
) -> float:
    """P(basic event failed | top event) at time t."""
    _require_positive_time(t)
    if isinstance(event, str):
        event = parse_instance(model, event)
    theory = _disjoint_theory(model, t)
    te = _top_probability(theory, model, stop).lower
    if te <= 0.0:
        raise AnalysisError("posterior undefined: system unreliability is 0")
    joint = probability(theory, [event_atom(model, event), top_atom(model)], stop).lower
    return joint / te


def basic_event_posteriors(
    model: PftModel, t: float, stop: StopCriteria = EXHAUSTIVE
) -> list[tuple[str, float]]:
    """Per-class posterior table, computed on one representative replica.

    Rows are labeled with the class and its formal parameter names, e.g.
    `D(i,j)`; replicas of a class are interchangeable in replica-symmetric
    models, which is what a per-class table presumes.
    """
    out: list[tuple[str, float]] = []
    for ev in model.events:
        if ev.kind != KIND_BASIC:
            continue
        values = tuple(model.param_values(p)[0] for p in ev.formal_params)
        label = ev.class_name
        if ev.formal_params:
            label += "(" + ",".join(ev.formal_params) + ")"
        out.append((label, basic_event_posterior(model, (ev.class_name, values), t, stop)))
    return out


def attach_posteriors(
    model: PftModel,
    cut_sets: Sequence[CutSet],
    t: float,
    stop: StopCriteria = EXHAUSTIVE,
) -> list[CutSet]:
    """Return the cut sets with their posterior weights filled in."""
    return [
        CutSet(c.events, c.prior, cut_set_posterior(model, c, t, stop))
        for c in cut_sets
    ]


def measure_report(
    model: PftModel,
    t: float,
    with_posteriors: bool = False,
    curve: Sequence[float] = (),
    stop: StopCriteria = EXHAUSTIVE,
) -> MeasureReport:
    """Assemble the full set of measures for one model and mission time."""
    cut_sets = minimal_cut_sets(model, t, stop)
    if with_posteriors:
        cut_sets = attach_posteriors(model, cut_sets, t, stop)
    return MeasureReport(
        model_name=model.name,
        time=t,
        cut_sets=tuple(cut_sets),
        unreliability=system_unreliability(model, t, stop),
        curve=tuple(unreliability_curve(model, curve, stop)) if curve else (),
        basic_posteriors=tuple(basic_event_posteriors(model, t, stop))
        if with_posteriors
        else (),
    )
