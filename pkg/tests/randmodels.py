"""Seeded generator of small valid models for engine/oracle agreement tests."""

from __future__ import annotations

import random

from pfta.dsl import parse_model
from pfta.model import PftModel, validate


def random_model(seed: int) -> tuple[PftModel, float]:
    """A small random model plus an analysis time; deterministic per seed.

    Ground basic events stay at or under 12 so the exhaustive oracle is cheap.
    """
    rng = random.Random(seed)
    t = rng.choice([1.0e3, 5.0e3, 1.0e4])

    def rate() -> str:
        # keep failure probabilities in a range where ordering is interesting
        return f"{rng.uniform(0.05, 1.2) / t:.6g}"

    lines: list[str] = [f"model rand{seed}"]
    units: list[str] = []

    if rng.random() < 0.6:
        card = rng.choice([2, 3])
        lines.append(f"type T = {{{', '.join(str(v) for v in range(1, card + 1))}}}")
        if rng.random() < 0.5:
            lines.append(f"basic R(i:T) rate {rate()}")
            lines.append(f"basic Q(i:T) rate {rate()}")
            kind = rng.choice(["or", "and"])
            lines.append(f"event W(i:T) = {kind}(R(i), Q(i))")
            target = "W"
        else:
            lines.append(f"basic R(i:T) rate {rate()}")
            target = "R"
        if rng.random() < 0.5:
            k = rng.randint(1, card)
            lines.append(f"event G0 = vote({k}:{card}) forall(i:T) {target}(i)")
        else:
            lines.append(f"event G0 = and forall(i:T) {target}(i)")
        units.append("G0")

    for i in range(rng.randint(2, 5)):
        lines.append(f"basic B{i} rate {rate()}")
        units.append(f"B{i}")

    for i in range(rng.randint(0, 2)):
        arity = min(len(units), rng.randint(2, 3))
        inputs = rng.sample(units, arity)
        kind = rng.choice(["or", "and"])
        lines.append(f"event L{i} = {kind}({', '.join(inputs)})")
        for name in inputs:
            units.remove(name)
        units.append(f"L{i}")

    kind = rng.choice(["or", "and"])
    lines.append(f"top TE = {kind}({', '.join(units)})")

    model = parse_model("\n".join(lines) + "\n")
    violations = validate(model)
    assert not violations, violations
    return model, t
