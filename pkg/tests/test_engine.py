from __future__ import annotations

import pytest

from pfta.compile import compile_direct, compile_disjoint
from pfta.engine import (
    EXHAUSTIVE,
    Explanation,
    ExplanationSearch,
    ProbabilityBounds,
    StopCriteria,
    explain,
    minimal_explanations,
    probability,
)
from pfta.errors import EngineError
from pfta.pha import Atom, Clause, DisjointDeclaration, PhaTheory, STAGE_DIRECT

T = 1e4
TE = Atom("te", ())


def _decl(*pairs):
    return DisjointDeclaration(tuple((Atom(n, ()), p) for n, p in pairs))


def _theory(clauses, decls, stage=STAGE_DIRECT):
    return PhaTheory(tuple(clauses), tuple(decls), stage)


GOAL = Atom("g", ())
TWO_WAY = _theory(
    [Clause(GOAL, (Atom("a", ()),)), Clause(GOAL, (Atom("c", ()),))],
    [_decl(("a", 0.3), ("x", 0.7)), _decl(("c", 0.2), ("y", 0.8))],
)


def test_explanations_come_out_most_probable_first():
    result = explain(TWO_WAY, GOAL)
    assert [(set(e.sorted_atoms()), e.prob) for e in result.explanations] == [
        ({Atom("a", ())}, pytest.approx(0.3)),
        ({Atom("c", ())}, pytest.approx(0.2)),
    ]


def test_exhausted_search_is_marked_sound_only_for_disjoint_stage():
    result = explain(TWO_WAY, GOAL)
    assert result.sound is False  # direct-stage bodies may overlap


def test_same_hypothesis_twice_counts_once():
    theory = _theory(
        [Clause(GOAL, (Atom("a", ()), Atom("a", ())))],
        [_decl(("a", 0.5), ("x", 0.5))],
    )
    result = explain(theory, GOAL)
    assert [e.prob for e in result.explanations] == [pytest.approx(0.5)]


def test_alternatives_of_one_declaration_are_inconsistent():
    theory = _theory(
        [Clause(GOAL, (Atom("a", ()), Atom("b", ())))],
        [_decl(("a", 0.4), ("b", 0.6))],
    )
    assert explain(theory, GOAL).explanations == ()


def test_conjunction_multiplies_independent_hypotheses():
    theory = _theory(
        [Clause(GOAL, (Atom("a", ()), Atom("c", ())))],
        [_decl(("a", 0.3), ("x", 0.7)), _decl(("c", 0.2), ("y", 0.8))],
    )
    result = explain(theory, GOAL)
    assert [e.prob for e in result.explanations] == [pytest.approx(0.06)]


def test_max_explanations_stop():
    result = explain(TWO_WAY, GOAL, StopCriteria(max_explanations=1))
    assert len(result.explanations) == 1
    assert result.explanations[0].prob == pytest.approx(0.3)


def test_epsilon_stop_reports_bracketing_bounds():
    result = explain(TWO_WAY, GOAL, StopCriteria(epsilon=0.25))
    assert result.bounds.width <= 0.25
    assert result.bounds.lower >= 0.3


def test_stop_criteria_require_some_bound():
    with pytest.raises(ValueError):
        StopCriteria()
    with pytest.raises(ValueError):
        StopCriteria(max_explanations=0)
    with pytest.raises(ValueError):
        StopCriteria(epsilon=-0.1)


def test_bounds_are_ordered():
    with pytest.raises(ValueError):
        ProbabilityBounds(0.5, 0.4)
    assert ProbabilityBounds(0.25, 0.75).midpoint == 0.5


def test_unknown_goal_predicate_is_an_error():
    with pytest.raises(EngineError, match="nope"):
        explain(TWO_WAY, Atom("nope", ()))


def test_frontier_budget_is_enforced(model):
    theory = compile_disjoint(model, T)
    search = ExplanationSearch(theory, TE, EXHAUSTIVE, frontier_budget=3)
    with pytest.raises(EngineError, match="budget"):
        list(search)


def test_minimal_explanations_drop_supersets():
    theory = _theory(
        [Clause(GOAL, (Atom("a", ()),)),
         Clause(GOAL, (Atom("a", ()), Atom("c", ())))],
        [_decl(("a", 0.3), ("x", 0.7)), _decl(("c", 0.2), ("y", 0.8))],
    )
    result = minimal_explanations(theory, GOAL)
    assert [set(e.hypotheses) for e in result] == [{Atom("a", ())}]


def test_minimal_explanations_require_uncertain_hypotheses():
    theory = _theory(
        [Clause(GOAL, (Atom("a", ()),))],
        [DisjointDeclaration(((Atom("a", ()), 1.0),))],
    )
    with pytest.raises(EngineError, match="probability 1"):
        minimal_explanations(theory, GOAL)


def test_probability_requires_the_disjoint_stage(model):
    theory = compile_direct(model, T)
    with pytest.raises(EngineError, match="disjoint-stage"):
        probability(theory, TE)


def test_probability_on_the_example(model):
    theory = compile_disjoint(model, T)
    bounds = probability(theory, TE)
    assert bounds.lower == bounds.upper
    assert bounds.lower == pytest.approx(0.224528, abs=1e-6)


def test_emission_probabilities_never_increase(model):
    theory = compile_disjoint(model, T)
    probs = [e.prob for e in ExplanationSearch(theory, TE, EXHAUSTIVE)]
    assert len(probs) > 28
    assert all(a >= b for a, b in zip(probs, probs[1:]))


def test_conditional_goal_lists_conjoin(model):
    theory = compile_disjoint(model, T)
    b_failed = Atom("b", ("f",))
    joint = probability(theory, [b_failed, TE])
    alone = probability(theory, [b_failed])
    # the bus alone downs the system, so the conjunction adds nothing
    assert joint.lower == pytest.approx(alone.lower, rel=1e-12)
