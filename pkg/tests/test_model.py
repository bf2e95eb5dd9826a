from __future__ import annotations

import math

import pytest

from pfta.dsl import parse_model
from pfta.model import (
    EventNode,
    EventRef,
    FailureRate,
    Gate,
    KIND_BASIC,
    KIND_TOP,
    Parameter,
    ParamType,
    PftModel,
    failure_probability,
    format_instance,
    instantiate,
    require_valid,
    validate,
)
from pfta.errors import ModelInvalidError


def test_failure_probability_matches_closed_form():
    assert failure_probability(8e-5, 1e4) == pytest.approx(1 - math.exp(-0.8))
    assert failure_probability(3e-8, 1e4) == pytest.approx(1 - math.exp(-3e-4))


def test_failure_probability_edge_values():
    assert failure_probability(0.0, 1e4) == 0.0
    assert failure_probability(1e-5, 0.0) == 0.0
    assert 0.0 < failure_probability(1e-9, 1.0) < 1e-8


def test_failure_probability_rejects_negative_inputs():
    with pytest.raises(ValueError):
        failure_probability(-1e-5, 10.0)
    with pytest.raises(ValueError):
        failure_probability(1e-5, -10.0)


def test_fixture_model_is_valid(model):
    assert validate(model) == []
    require_valid(model)  # should not raise


def test_validate_flags_cycle():
    m = parse_model(
        "type T={1}\nbasic B rate 1e-3\n"
        "event A = or(C)\nevent C = or(A)\ntop TE = or(B, A)"
    )
    assert validate(m) == ["event graph contains a cycle"]


def test_validate_counts_top_events():
    none = parse_model("basic B rate 1e-3")
    assert "model has 0 top events, expected exactly 1" in validate(none)


def test_validate_flags_negative_rate():
    m = parse_model("basic B rate -2\ntop TE = or(B)")
    assert "negative failure rate for B" in validate(m)


def test_validate_flags_kofn_k_out_of_range():
    m = parse_model(
        "type T={1,2,3}\nbasic A(i:T) rate 1e-3\n"
        "top TE = vote(4:3) forall(i:T) A(i)"
    )
    assert validate(m) == ["KofN gate TE: k=4 outside 1..3"]


def test_validate_flags_two_input_kofn():
    m = parse_model("basic A rate 1e-3\nbasic B rate 1e-3\ntop TE = vote(2:2)(A, B)")
    assert validate(m) == ["KofN gate TE must have exactly one replicator input"]


def test_validate_flags_parameter_used_outside_scope():
    m = parse_model(
        "type T={1,2}\nbasic A(i:T) rate 1e-3\n"
        "event E = and forall(i:T) A(i)\nevent F = or(A(i))\ntop TE = or(E, F)"
    )
    assert validate(m) == ["parameter i used outside the scope of A"]


def test_validate_flags_undeclared_parameter_directly():
    # built by hand: the text parser would reject this earlier
    m = PftModel(
        name="broken",
        types=(ParamType("T", (1, 2)),),
        params=(),
        events=(
            EventNode("A", KIND_BASIC, ("i",), frozenset()),
            EventNode("TE", KIND_TOP, (), frozenset()),
        ),
        gates=(Gate("or", "TE", (EventRef("A", ("i",)),)),),
        rates=(FailureRate("A", 1e-3),),
    )
    problems = validate(m)
    assert "event A uses undeclared parameter i" in problems


def test_require_valid_raises_with_all_violations():
    m = parse_model("basic B rate -2")
    with pytest.raises(ModelInvalidError) as err:
        require_valid(m)
    assert "negative failure rate for B" in err.value.violations
    assert "model has 0 top events, expected exactly 1" in err.value.violations


def test_instantiate_passes_ground_refs_through(model):
    ref = EventRef("D", (2, 1))
    assert instantiate(model, ref, {}) == [((2, 1), {})]


def test_instantiate_enumerates_free_parameters(model):
    got = instantiate(model, EventRef("D", ("i", "j")), {})
    assert [values for values, _ in got] == [
        (1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2),
    ]
    assert got[0][1] == {"i": 1, "j": 1}


def test_instantiate_respects_environment(model):
    got = instantiate(model, EventRef("D", ("i", "j")), {"i": 3})
    assert [values for values, _ in got] == [(3, 1), (3, 2)]


def test_instantiate_binds_repeated_parameters_together():
    m = parse_model(
        "type T={1,2,3}\nbasic X(a:T, b:T) rate 1e-3\n"
        "top TE = and forall(a:T, b:T) X(a, b)"
    )
    got = instantiate(m, EventRef("X", ("a", "a")), {})
    assert [values for values, _ in got] == [(1, 1), (2, 2), (3, 3)]


def test_format_instance_renders_like_the_source_labels():
    assert format_instance(("D", (1, 2))) == "D(1,2)"
    assert format_instance(("B", ())) == "B"


def test_parameter_table_records_the_declaring_replicator(model):
    by_name = {p.name: p for p in model.params}
    assert by_name["i"] == Parameter("i", "T1", "S")
    assert by_name["j"] == Parameter("j", "T2", "D")
