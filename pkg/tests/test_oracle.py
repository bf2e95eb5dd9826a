from __future__ import annotations

from collections import Counter

import pytest

from pfta.dsl import parse_model
from pfta.errors import ModelInvalidError, OracleError
from pfta.model import failure_probability
from pfta.oracle import (
    evaluate,
    exact_probability,
    prime_implicants,
    top_failure_vector,
    unfold,
)

T = 1e4

# frozen reference values for the shipped example at t = 10^4 hours
TOP_PROBABILITY = 0.2245283367701036
DISK_FAILURE = 0.5506710358827784
BUS_FAILURE = 1.999980000133333e-05


def test_unfold_grounds_every_replica(model):
    tree = unfold(model, T)
    assert tree.top == ("TE", ())
    assert len(tree.basics) == 14
    classes = Counter(key[0] for key in tree.basic_keys)
    assert classes == {"B": 1, "Mg": 1, "M": 3, "P": 3, "D": 6}


def test_unfold_rewrites_voting_gates_to_and_or(model):
    tree = unfold(model, T)
    kinds = {key: kind for key, kind, _ in tree.nodes}
    synthetic = sorted(key for key in kinds if "#" in key[0])
    assert synthetic == [("SKN#1", ()), ("SKN#2", ()), ("SKN#3", ())]
    assert all(kinds[key] == "and" for key in synthetic)
    assert kinds[("SKN", ())] == "or"


def test_unfold_probabilities_match_the_rates(model):
    tree = unfold(model, T)
    probs = dict(tree.basics)
    assert probs[("D", (2, 1))] == failure_probability(8e-5, T)
    assert probs[("B", ())] == failure_probability(2e-9, T)


def test_unfold_rejects_invalid_models():
    broken = parse_model("basic B rate -2\ntop TE = or(B)")
    with pytest.raises(ModelInvalidError):
        unfold(broken, T)


def test_evaluate_propagates_statuses(model):
    tree = unfold(model, T)
    quad = {("D", (1, 1)), ("D", (1, 2)), ("D", (2, 1)), ("D", (2, 2))}
    assert evaluate(tree, quad)[tree.top] is True
    assert evaluate(tree, {("B", ())})[tree.top] is True
    assert evaluate(tree, set())[tree.top] is False
    one_module = evaluate(tree, {("D", (1, 1)), ("D", (1, 2))})
    assert one_module[("S", (1,))] is True
    assert one_module[tree.top] is False


def test_exact_probability_of_the_top_event(model):
    tree = unfold(model, T)
    assert exact_probability(tree, {tree.top: True}) == pytest.approx(
        TOP_PROBABILITY, abs=1e-15
    )


def test_exact_probability_marginals_match_inputs(model):
    tree = unfold(model, T)
    assert exact_probability(tree, {("D", (1, 1)): True}) == pytest.approx(
        DISK_FAILURE, abs=1e-12
    )
    # the bus alone downs the system, so conditioning on the top adds nothing
    joint = exact_probability(tree, {("B", ()): True, tree.top: True})
    assert joint == pytest.approx(BUS_FAILURE, abs=1e-15)


def test_exact_probability_of_everything_is_one(model):
    tree = unfold(model, T)
    assert exact_probability(tree, {}) == pytest.approx(1.0, abs=1e-12)


def test_prime_implicants_on_the_example(model):
    tree = unfold(model, T)
    implicants = prime_implicants(tree)
    assert len(implicants) == 28
    assert Counter(len(s) for s in implicants) == {1: 1, 2: 3, 3: 15, 4: 9}
    assert frozenset({("B", ())}) in implicants


def test_prime_implicants_are_sorted_by_size_then_members(model):
    implicants = prime_implicants(unfold(model, T))
    keys = [(len(s), sorted(s)) for s in implicants]
    assert keys == sorted(keys)


def test_enumeration_bound_is_enforced(model):
    tree = unfold(model, T)
    with pytest.raises(OracleError, match="exceed the enumeration bound"):
        exact_probability(tree, {tree.top: True}, max_events=8)
    with pytest.raises(OracleError):
        top_failure_vector(tree, max_events=8)


def test_enumeration_is_deterministic(model):
    tree = unfold(model, T)
    first = prime_implicants(tree)
    second = prime_implicants(unfold(model, T))
    assert first == second
