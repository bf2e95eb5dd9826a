from __future__ import annotations

import pytest

from pfta.compile import compile_direct, compile_disjoint
from pfta.errors import TheoryError
from pfta.pha import (
    Atom,
    Clause,
    DisjointDeclaration,
    GroundProgram,
    PhaTheory,
    STAGE_DIRECT,
    STAGE_DISJOINT,
    Var,
    apply_substitution,
    check_assumptions,
    entails,
    format_atom,
    format_clause,
    parse_theory,
    serialize,
    unify,
)

T = 1e4


def _decl(*pairs):
    return DisjointDeclaration(tuple((Atom(n, ()), p) for n, p in pairs))


def test_unify_binds_both_directions():
    subst = unify(Atom("p", (Var("X"), 1)), Atom("p", (2, Var("Y"))))
    assert subst == {Var("X"): 2, Var("Y"): 1}


def test_unify_rejects_constant_clash():
    assert unify(Atom("p", (1,)), Atom("p", (2,))) is None
    assert unify(Atom("p", (1,)), Atom("q", (1,))) is None
    assert unify(Atom("p", (1,)), Atom("p", (1, 2))) is None


def test_unify_chains_variable_bindings():
    subst = unify(Atom("p", (Var("X"), Var("X"))), Atom("p", (Var("Y"), 3)))
    grounded = apply_substitution(Atom("p", (Var("X"), Var("Y"))), subst)
    assert grounded == Atom("p", (3, 3))


def test_declaration_probabilities_must_sum_to_one():
    with pytest.raises(TheoryError, match="sum to 0.8"):
        _decl(("a", 0.4), ("b", 0.4))


def test_declaration_alternatives_must_be_ground():
    with pytest.raises(TheoryError, match="not ground"):
        DisjointDeclaration(((Atom("a", (Var("X"),)), 0.5), (Atom("b", ()), 0.5)))


def test_declaration_alternatives_must_be_distinct():
    with pytest.raises(TheoryError):
        _decl(("a", 0.5), ("a", 0.5))


def test_hypothesis_may_appear_in_one_declaration_only():
    with pytest.raises(TheoryError):
        PhaTheory(
            clauses=(),
            declarations=(_decl(("a", 0.5), ("b", 0.5)), _decl(("a", 0.3), ("c", 0.7))),
            stage=STAGE_DIRECT,
        )


def test_dangling_body_predicate_is_rejected():
    with pytest.raises(TheoryError, match="dangling predicate nope"):
        PhaTheory(
            clauses=(Clause(Atom("g", ()), (Atom("nope", ()),)),),
            declarations=(_decl(("a", 0.5), ("b", 0.5)),),
            stage=STAGE_DIRECT,
        )


def test_format_atom_is_compact():
    assert format_atom(Atom("m", (1, "f"))) == "m(1,f)"
    assert format_atom(Atom("te", ())) == "te"


def test_format_clause_is_one_line():
    c = Clause(Atom("g", (Var("I"),)), (Atom("a", (Var("I"), "f")), Atom("b", ())))
    assert format_clause(c) == "g(I) :- a(I,f), b."


def test_serialize_parse_round_trip(model):
    theory = compile_disjoint(model, T)
    text = serialize(theory)
    again = parse_theory(text, stage=STAGE_DISJOINT)
    assert again.clauses == theory.clauses
    assert again.declarations == theory.declarations
    assert serialize(again) == text


def test_serialize_default_precision_round_trips_probabilities(model):
    theory = compile_direct(model, T)
    again = parse_theory(serialize(theory))
    for mine, parsed in zip(theory.declarations, again.declarations):
        for (_, p), (_, q) in zip(mine.alternatives, parsed.alternatives):
            assert p == q  # exact, not approximate


def test_fixed_precision_grows_until_nonzero():
    theory = PhaTheory(clauses=(), declarations=(_decl(("a", 0.99998), ("b", 2e-5)),),
                       stage=STAGE_DIRECT)
    assert serialize(theory, precision=4) == "disjoint([a:0.99998,b:0.00002]).\n"


def test_direct_stage_breaks_body_exclusivity(model):
    report = check_assumptions(compile_direct(model, T))
    assert report.assumption1 is True
    assert report.assumption2 is False
    assert report.counterexample is not None


def test_disjoint_stage_satisfies_both_assumptions(model):
    report = check_assumptions(compile_disjoint(model, T))
    assert report.assumption1 is True
    assert report.assumption2 is True


def test_head_unifying_with_hypothesis_breaks_assumption_one():
    theory = PhaTheory(
        clauses=(Clause(Atom("a", ()), (Atom("b", ()),)),),
        declarations=(_decl(("a", 0.5), ("b", 0.5)),),
        stage=STAGE_DIRECT,
    )
    report = check_assumptions(theory)
    assert report.assumption1 is False


def test_entails_follows_clauses(model):
    theory = compile_disjoint(model, T)
    te = Atom("te", ())
    bus_only = {Atom("b", ("f",))}
    assert entails(theory, bus_only, [te])
    all_working = {
        alt for decl in theory.declarations for alt, _ in decl.alternatives
        if alt.args and alt.args[-1] == "w"
    }
    assert not entails(theory, all_working, [te])


def test_ground_program_closure_is_monotone():
    theory = PhaTheory(
        clauses=(
            Clause(Atom("g", ()), (Atom("a", ()), Atom("h", ()))),
            Clause(Atom("h", ()), (Atom("b", ()),)),
        ),
        declarations=(_decl(("a", 0.5), ("x", 0.5)), _decl(("b", 0.5), ("y", 0.5))),
        stage=STAGE_DIRECT,
    )
    program = GroundProgram(theory)
    assert program.derives({Atom("a", ()), Atom("b", ())}, [Atom("g", ())])
    assert not program.derives({Atom("a", ())}, [Atom("g", ())])


def test_parse_theory_reports_line_numbers():
    with pytest.raises(TheoryError) as err:
        parse_theory("disjoint([a:0.5,b:0.5]).\ng :- a\n")
    assert err.value.line == 2
