"""Best-first abductive search for explanations of a goal conjunction.

A search state is a partial SLD derivation: remaining goals, hypotheses
assumed so far, and their probability product, which serves as the state
priority.  States come off the frontier in nonincreasing priority order,
so complete explanations are emitted most probable first, and the sum of
frontier priorities bounds the probability mass still unaccounted for.
That upper bound is probabilistically valid only for theories whose
same-head clause bodies are disjoint (stage "disjoint"); for direct-stage
theories it is reported as raw search mass (`sound` is False).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import count
from typing import Iterable, Iterator

from .errors import EngineError
from .pha import (
    Atom,
    PhaTheory,
    STAGE_DISJOINT,
    Subst,
    apply_substitution,
    format_atom,
    rename_clause,
    unify,
)

DEFAULT_FRONTIER_BUDGET = 10**6


@dataclass(frozen=True)
class Explanation:
    """A consistent hypothesis set entailing the goals, with its probability."""

    hypotheses: frozenset[Atom]
    prob: float

    def sorted_atoms(self) -> tuple[Atom, ...]:
        return tuple(sorted(self.hypotheses, key=format_atom))


@dataclass(frozen=True)
class ProbabilityBounds:
    """Running interval around the goal probability."""

    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper:
            raise ValueError(f"malformed bounds [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class StopCriteria:
    """When to stop emitting explanations; criteria combine disjunctively."""

    max_explanations: int | None = None
    epsilon: float | None = None
    exhaustive: bool = False

    def __post_init__(self):
        if not self.exhaustive and self.max_explanations is None and self.epsilon is None:
            raise ValueError("stop criteria require a bound or exhaustive=True")
        if self.max_explanations is not None and self.max_explanations < 1:
            raise ValueError("max_explanations must be positive")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


EXHAUSTIVE = StopCriteria(exhaustive=True)


def _as_goal_list(goals: Atom | Iterable[Atom]) -> tuple[Atom, ...]:
    if isinstance(goals, Atom):
        return (goals,)
    return tuple(goals)


class ExplanationSearch(Iterator[Explanation]):
    """Iterator over explanations of `goals`, most probable first."""

    def __init__(
        self,
        theory: PhaTheory,
        goals: Atom | Iterable[Atom],
        stop: StopCriteria = EXHAUSTIVE,
        frontier_budget: int = DEFAULT_FRONTIER_BUDGET,
    ):
        self.theory = theory
        self.goals = _as_goal_list(goals)
        self.stop = stop
        self.frontier_budget = frontier_budget
        self.sound = theory.stage == STAGE_DISJOINT

        self._hyp_by_pred: dict[str, list[tuple[Atom, int, float]]] = {}
        for atom, (decl, p) in theory.hypothesis_index.items():
            self._hyp_by_pred.setdefault(atom.pred, []).append((atom, decl, p))
        known = set(theory.clause_index) | set(self._hyp_by_pred)
        for g in self.goals:
            if g.pred not in known:
                raise EngineError(f"unknown predicate {g.pred} in goal {format_atom(g)}")

        self._seq = count()
        self._rename = count()
        self._emitted_probs_sum = 0.0
        self._emitted_count = 0
        self._seen: set[frozenset[Atom]] = set()
        # heap entries: (-priority, tiebreak, goals, assumed, decl_choice)
        self._frontier: list = []
        self._push(1.0, self.goals, frozenset(), {})

    def _push(self, priority: float, goals, assumed, decl_choice) -> None:
        if len(self._frontier) >= self.frontier_budget:
            raise EngineError(
                f"frontier memory budget of {self.frontier_budget} states exceeded"
            )
        heapq.heappush(
            self._frontier, (-priority, next(self._seq), goals, assumed, decl_choice)
        )

    @property
    def bounds(self) -> ProbabilityBounds:
        mass = -sum(entry[0] for entry in self._frontier)
        lower = self._emitted_probs_sum
        return ProbabilityBounds(lower, lower + max(mass, 0.0))

    @property
    def emitted(self) -> int:
        return self._emitted_count

    def _stopped(self) -> bool:
        if self.stop.exhaustive:
            return False
        if (
            self.stop.max_explanations is not None
            and self._emitted_count >= self.stop.max_explanations
        ):
            return True
        return self.stop.epsilon is not None and self.bounds.width <= self.stop.epsilon

    def __next__(self) -> Explanation:
        if self._stopped():
            raise StopIteration
        while self._frontier:
            neg_priority, _, goals, assumed, decl_choice = heapq.heappop(self._frontier)
            priority = -neg_priority
            if not goals:
                if assumed in self._seen:
                    continue
                self._seen.add(assumed)
                self._emitted_probs_sum += priority
                self._emitted_count += 1
                return Explanation(assumed, priority)
            goal, rest = goals[0], goals[1:]
            for clause in self.theory.clause_index.get(goal.pred, ()):
                fresh = rename_clause(clause, self._rename)
                subst = unify(goal, fresh.head)
                if subst is None:
                    continue
                child_goals = tuple(
                    apply_substitution(a, subst) for a in fresh.body + rest
                )
                self._push(priority, child_goals, assumed, decl_choice)
            for hyp, decl, p in self._hyp_by_pred.get(goal.pred, ()):
                subst = unify(goal, hyp)
                if subst is None:
                    continue
                child_goals = tuple(apply_substitution(a, subst) for a in rest)
                if hyp in assumed:
                    self._push(priority, child_goals, assumed, decl_choice)
                    continue
                chosen = decl_choice.get(decl)
                if chosen is not None and chosen != hyp:
                    continue  # contradicts an alternative already assumed
                child_choice = dict(decl_choice)
                child_choice[decl] = hyp
                self._push(priority * p, child_goals, assumed | {hyp}, child_choice)
        raise StopIteration


@dataclass(frozen=True)
class ExplainResult:
    """Explanations found before the stop criterion, with final bounds."""

    explanations: tuple[Explanation, ...]
    bounds: ProbabilityBounds
    sound: bool


def explain(
    theory: PhaTheory,
    goals: Atom | Iterable[Atom],
    stop: StopCriteria = EXHAUSTIVE,
    frontier_budget: int = DEFAULT_FRONTIER_BUDGET,
) -> ExplainResult:
    """Collect explanations of `goals`, most probable first."""
    search = ExplanationSearch(theory, goals, stop, frontier_budget)
    explanations = tuple(search)
    return ExplainResult(explanations, search.bounds, search.sound)


def minimal_explanations(
    theory: PhaTheory,
    goals: Atom | Iterable[Atom],
    stop: StopCriteria = EXHAUSTIVE,
    frontier_budget: int = DEFAULT_FRONTIER_BUDGET,
) -> list[Explanation]:
    """Explanations no subset of which explains the goals, best first.

    Emission order guarantees a subset is found before any of its strict
    supersets only when every hypothesis probability is strictly below 1,
    so that is required of the theory's declarations.
    """
    for decl in theory.declarations:
        for atom, p in decl.alternatives:
            if p >= 1.0:
                raise EngineError(
                    f"hypothesis {format_atom(atom)} has probability 1; "
                    "minimality by emission order is not meaningful"
                )
    search = ExplanationSearch(theory, goals, stop, frontier_budget)
    out: list[Explanation] = []
    for expl in search:
        if any(prev.hypotheses <= expl.hypotheses for prev in out):
            continue
        out.append(expl)
    return out


def probability(
    theory: PhaTheory,
    goals: Atom | Iterable[Atom],
    stop: StopCriteria = EXHAUSTIVE,
    frontier_budget: int = DEFAULT_FRONTIER_BUDGET,
) -> ProbabilityBounds:
    """Bounds on the probability of the goal conjunction.

    Only meaningful for disjoint-stage theories, where explanations are
    mutually exclusive events and the frontier mass is a sound bound on
    what remains.
    """
    if theory.stage != STAGE_DISJOINT:
        raise EngineError(
            "probability requires a disjoint-stage theory; "
            "recompile with the status-complete translation"
        )
    search = ExplanationSearch(theory, goals, stop, frontier_budget)
    for _ in search:
        pass
    b = search.bounds
    if b.upper > 1.0:
        b = ProbabilityBounds(min(b.lower, 1.0), 1.0)
    return b
