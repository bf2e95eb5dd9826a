"""Probabilistic Horn theories: definite clauses plus disjoint declarations.

A theory is a set of definite clauses over function-free atoms together
with disjoint declarations.  Each declaration lists ground hypothesis
atoms with probabilities summing to one; exactly one alternative of each
declaration holds.  Explanations are consistent hypothesis sets whose
probability is the product of the chosen alternatives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import count

from .errors import TheoryError

STATUS_WORKING = "w"
STATUS_FAILED = "f"

PROB_SUM_TOL = 1e-9

STAGE_DIRECT = "direct"      # one clause per disjunct; bodies may overlap
STAGE_DISJOINT = "disjoint"  # same-head clause bodies mutually exclusive


@dataclass(frozen=True)
class Var:
    """A logical variable; everything else in an argument slot is constant."""

    name: str


Term = "Var | int | str"


@dataclass(frozen=True)
class Atom:
    """A predicate applied to variables, integers, or symbolic constants."""

    pred: str
    args: tuple = ()

    def is_ground(self) -> bool:
        return not any(isinstance(a, Var) for a in self.args)


@dataclass(frozen=True)
class Clause:
    """Definite clause `head :- body`; an empty body is a fact."""

    head: Atom
    body: tuple[Atom, ...] = ()


@dataclass(frozen=True)
class DisjointDeclaration:
    """Exhaustive, mutually exclusive ground alternatives with probabilities."""

    alternatives: tuple[tuple[Atom, float], ...]

    def __post_init__(self):
        if not self.alternatives:
            raise TheoryError("empty disjoint declaration")
        atoms = [a for a, _ in self.alternatives]
        for a in atoms:
            if not a.is_ground():
                raise TheoryError(f"declaration alternative {format_atom(a)} is not ground")
        if len(set(atoms)) != len(atoms):
            raise TheoryError("declaration repeats an alternative")
        for _, p in self.alternatives:
            if not 0.0 <= p <= 1.0:
                raise TheoryError(f"alternative probability {p!r} outside [0, 1]")
        total = sum(p for _, p in self.alternatives)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise TheoryError(f"probabilities sum to {total:g}")


@dataclass(frozen=True)
class PhaTheory:
    """Clauses plus declarations; `stage` records the compilation discipline."""

    clauses: tuple[Clause, ...]
    declarations: tuple[DisjointDeclaration, ...]
    stage: str = STAGE_DIRECT

    def __post_init__(self):
        seen: dict[Atom, int] = {}
        for i, decl in enumerate(self.declarations):
            for atom, _ in decl.alternatives:
                if atom in seen and seen[atom] != i:
                    raise TheoryError(
                        f"hypothesis {format_atom(atom)} appears in two declarations"
                    )
                seen[atom] = i
        head_preds = {c.head.pred for c in self.clauses}
        hyp_preds = {a.pred for a in seen}
        for c in self.clauses:
            for b in c.body:
                if b.pred not in head_preds and b.pred not in hyp_preds:
                    raise TheoryError(
                        f"dangling predicate {b.pred} in the body of "
                        f"{format_atom(c.head)}"
                    )

    @cached_property
    def hypothesis_index(self) -> dict[Atom, tuple[int, float]]:
        """Ground hypothesis atom -> (declaration index, probability)."""
        out: dict[Atom, tuple[int, float]] = {}
        for i, decl in enumerate(self.declarations):
            for atom, p in decl.alternatives:
                out[atom] = (i, p)
        return out

    @cached_property
    def clause_index(self) -> dict[str, tuple[Clause, ...]]:
        out: dict[str, list[Clause]] = {}
        for c in self.clauses:
            out.setdefault(c.head.pred, []).append(c)
        return {k: tuple(v) for k, v in out.items()}


# ---------------------------------------------------------------------------
# substitutions and unification

Subst = dict


def walk(term, subst: Subst):
    """Chase variable bindings to a representative term."""
    while isinstance(term, Var) and term in subst:
        term = subst[term]
    return term


def unify(a: Atom, b: Atom, subst: Subst | None = None) -> Subst | None:
    """Most general unifier extending `subst`, or None."""
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    out = dict(subst) if subst else {}
    for x, y in zip(a.args, b.args):
        x = walk(x, out)
        y = walk(y, out)
        if x == y:
            continue
        if isinstance(x, Var):
            out[x] = y
        elif isinstance(y, Var):
            out[y] = x
        else:
            return None
    return out


def apply_substitution(atom: Atom, subst: Subst) -> Atom:
    """Replace bound variables in `atom`; unbound variables survive."""
    if not subst or atom.is_ground():
        return atom
    return Atom(atom.pred, tuple(walk(a, subst) for a in atom.args))


def rename_clause(clause: Clause, counter: count) -> Clause:
    """Standardize a clause apart with fresh variable names."""
    mapping: dict[Var, Var] = {}

    def fresh(term):
        if isinstance(term, Var):
            if term not in mapping:
                mapping[term] = Var(f"{term.name}#{next(counter)}")
            return mapping[term]
        return term

    head = Atom(clause.head.pred, tuple(fresh(a) for a in clause.head.args))
    body = tuple(Atom(b.pred, tuple(fresh(a) for a in b.args)) for b in clause.body)
    return Clause(head, body)


# ---------------------------------------------------------------------------
# text format

_VAR_RE = re.compile(r"[A-Z_][A-Za-z_0-9]*$")


def format_term(term) -> str:
    if isinstance(term, Var):
        return term.name
    return str(term)


def format_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.pred
    return atom.pred + "(" + ",".join(format_term(a) for a in atom.args) + ")"


def _format_probability(p: float, precision: int | None) -> str:
    if precision is None:
        return repr(p)
    if p == 0.0:
        return "0.0"
    if p == 1.0:
        return "1.0"
    digits = precision
    while True:
        text = f"{p:.{digits}f}"
        if float(text) not in (0.0, 1.0):
            return text
        digits += 1


def format_clause(clause: Clause) -> str:
    if not clause.body:
        return format_atom(clause.head) + "."
    body = ", ".join(format_atom(b) for b in clause.body)
    return f"{format_atom(clause.head)} :- {body}."


def format_declaration(decl: DisjointDeclaration, precision: int | None = None) -> str:
    alts = ",".join(
        f"{format_atom(a)}:{_format_probability(p, precision)}"
        for a, p in decl.alternatives
    )
    return f"disjoint([{alts}])."


def serialize(theory: PhaTheory, precision: int | None = None) -> str:
    """One declaration or clause per line, declarations first.

    With `precision`, probabilities are rendered to that many decimal
    places (more when rounding would collapse them to 0 or 1); otherwise
    they round-trip exactly.
    """
    lines = [format_declaration(d, precision) for d in theory.declarations]
    lines.extend(format_clause(c) for c in theory.clauses)
    return "\n".join(lines) + "\n"


class _ItemParser:
    """Recursive-descent parser for one serialized declaration or clause."""

    def __init__(self, text: str, lineno: int):
        self.tokens = re.findall(
            r"\d+\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?|[A-Za-z_][A-Za-z_0-9]*"
            r"|:-|[()\[\],:.]|\S",
            text,
        )
        self.lineno = lineno
        self.i = 0

    def error(self, message: str) -> TheoryError:
        return TheoryError(message, self.lineno)

    def next(self) -> str:
        if self.i >= len(self.tokens):
            raise self.error("unexpected end of line")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def expect(self, text: str) -> None:
        tok = self.next()
        if tok != text:
            raise self.error(f"expected {text!r}, got {tok!r}")

    def term(self):
        tok = self.next()
        if re.fullmatch(r"\d+", tok):
            return int(tok)
        if _VAR_RE.match(tok):
            return Var(tok)
        if re.fullmatch(r"[a-z_][A-Za-z_0-9]*", tok):
            return tok
        raise self.error(f"expected term, got {tok!r}")

    def atom(self) -> Atom:
        pred = self.next()
        if not re.fullmatch(r"[a-z_][A-Za-z_0-9]*", pred):
            raise self.error(f"expected predicate, got {pred!r}")
        args: list = []
        if self.peek() == "(":
            self.next()
            args.append(self.term())
            while self.peek() == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
        return Atom(pred, tuple(args))

    def probability(self) -> float:
        tok = self.next()
        try:
            return float(tok)
        except ValueError:
            raise self.error(f"expected probability, got {tok!r}") from None

    def declaration(self) -> DisjointDeclaration:
        self.expect("(")
        self.expect("[")
        alts: list[tuple[Atom, float]] = []
        while True:
            atom = self.atom()
            self.expect(":")
            alts.append((atom, self.probability()))
            if self.peek() == ",":
                self.next()
                continue
            break
        self.expect("]")
        self.expect(")")
        self.expect(".")
        if self.peek() is not None:
            raise self.error("trailing text after declaration")
        return DisjointDeclaration(tuple(alts))

    def clause(self, head: Atom) -> Clause:
        tok = self.next()
        if tok == ".":
            if self.peek() is not None:
                raise self.error("trailing text after fact")
            return Clause(head)
        if tok != ":-":
            raise self.error(f"expected ':-' or '.', got {tok!r}")
        body = [self.atom()]
        while self.peek() == ",":
            self.next()
            body.append(self.atom())
        self.expect(".")
        if self.peek() is not None:
            raise self.error("trailing text after clause")
        return Clause(head, tuple(body))


def parse_theory(text: str, stage: str = STAGE_DIRECT) -> PhaTheory:
    """Parse serialized theory text back into a PhaTheory."""
    clauses: list[Clause] = []
    declarations: list[DisjointDeclaration] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        p = _ItemParser(line, lineno)
        if p.tokens[:3] == ["disjoint", "(", "["]:
            p.expect("disjoint")
            try:
                declarations.append(p.declaration())
            except TheoryError as exc:
                if exc.line is None:
                    raise TheoryError(str(exc), lineno) from None
                raise
        else:
            clauses.append(p.clause(p.atom()))
    return PhaTheory(tuple(clauses), tuple(declarations), stage)


# ---------------------------------------------------------------------------
# grounding and the two abduction assumptions


def theory_constants(theory: PhaTheory) -> set:
    out: set = set()
    for decl in theory.declarations:
        for atom, _ in decl.alternatives:
            out.update(atom.args)
    for c in theory.clauses:
        for atom in (c.head, *c.body):
            out.update(a for a in atom.args if not isinstance(a, Var))
    return out


def ground_clauses(theory: PhaTheory) -> list[Clause]:
    """All ground instances of the clauses over the theory's constants."""
    from itertools import product as iproduct

    constants = sorted(theory_constants(theory), key=repr)
    out: list[Clause] = []
    for c in theory.clauses:
        vs: list[Var] = []
        for atom in (c.head, *c.body):
            for a in atom.args:
                if isinstance(a, Var) and a not in vs:
                    vs.append(a)
        for combo in iproduct(constants, repeat=len(vs)):
            s = dict(zip(vs, combo))
            out.append(
                Clause(
                    apply_substitution(c.head, s),
                    tuple(apply_substitution(b, s) for b in c.body),
                )
            )
    return out


def _relevant_ground_clauses(theory: PhaTheory) -> list[Clause]:
    """Ground instances whose bodies can possibly hold in some world."""
    possible: set[Atom] = set(theory.hypothesis_index)
    clauses = ground_clauses(theory)
    changed = True
    live: list[Clause] = []
    while changed:
        changed = False
        remaining = []
        for c in clauses:
            if all(b in possible for b in c.body):
                live.append(c)
                if c.head not in possible:
                    possible.add(c.head)
                    changed = True
            else:
                remaining.append(c)
        clauses = remaining
    return live


class GroundProgram:
    """Grounded theory compiled to bitmask rules for fast world evaluation.

    Rules whose bodies can never hold are dropped; the rest are ordered so
    a single pass computes the forward-chaining closure when the clause
    graph is acyclic (the general fixpoint loop covers cyclic theories).
    """

    def __init__(self, theory: PhaTheory):
        live = _relevant_ground_clauses(theory)
        atom_set = {a for c in live for a in (c.head, *c.body)}
        atom_set.update(theory.hypothesis_index)
        self.atoms: list[Atom] = sorted(atom_set, key=format_atom)
        self.index: dict[Atom, int] = {a: i for i, a in enumerate(self.atoms)}
        seen_instances: set[tuple[int, tuple[int, ...]]] = set()
        rules: list[tuple[int, int, tuple[int, ...], Clause]] = []
        for c in live:
            head_i = self.index[c.head]
            body_i = tuple(sorted(self.index[b] for b in c.body))
            if (head_i, body_i) in seen_instances:
                continue  # identical ground instance from another clause
            seen_instances.add((head_i, body_i))
            body_mask = 0
            for b in body_i:
                body_mask |= 1 << b
            rules.append((head_i, body_mask, body_i, c))
        self.rules = rules
        self.ordered, self.acyclic = self._order_rules()

    def _order_rules(self) -> tuple[list[tuple[int, int, tuple[int, ...], Clause]], bool]:
        deps: dict[int, set[int]] = {}
        for head_i, _, body_i, _ in self.rules:
            deps.setdefault(head_i, set()).update(body_i)
        rank: dict[int, int] = {}
        state: dict[int, int] = {}
        acyclic = True

        def visit(a: int) -> None:
            nonlocal acyclic
            state[a] = 1
            for b in deps.get(a, ()):
                s = state.get(b, 0)
                if s == 1:
                    acyclic = False
                elif s == 0:
                    visit(b)
            state[a] = 2
            rank[a] = len(rank)

        for a in range(len(self.atoms)):
            if state.get(a, 0) == 0:
                visit(a)
        ordered = sorted(self.rules, key=lambda r: rank.get(r[0], 0))
        return ordered, acyclic

    def fact_mask(self, facts: set[Atom]) -> int:
        mask = 0
        for a in facts:
            i = self.index.get(a)
            if i is not None:
                mask |= 1 << i
        return mask

    def closure_mask(self, mask: int) -> int:
        if self.acyclic:
            for head_i, body_mask, _, _ in self.ordered:
                if body_mask & ~mask == 0:
                    mask |= 1 << head_i
            return mask
        changed = True
        while changed:
            changed = False
            for head_i, body_mask, _, _ in self.rules:
                head_bit = 1 << head_i
                if not mask & head_bit and body_mask & ~mask == 0:
                    mask |= head_bit
                    changed = True
        return mask

    def closure(self, facts: set[Atom]) -> set[Atom]:
        mask = self.closure_mask(self.fact_mask(facts))
        return {a for i, a in enumerate(self.atoms) if mask & (1 << i)}

    def derives(self, facts: set[Atom], goals: list[Atom]) -> bool:
        if any(g not in self.index for g in goals):
            return False
        mask = self.closure_mask(self.fact_mask(facts))
        return all(mask & (1 << self.index[g]) for g in goals)

    def same_head_conflict(self, mask: int) -> tuple[Clause, Clause] | None:
        """Two same-head rules whose bodies both hold in the closed world."""
        mask = self.closure_mask(mask)
        first: dict[int, tuple[int, Clause]] = {}
        for head_i, body_mask, _, clause in self.rules:
            if body_mask & ~mask == 0:
                prev = first.get(head_i)
                if prev is not None and prev[0] != body_mask:
                    return prev[1], clause
                first[head_i] = (body_mask, clause)
        return None


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of checking the two preconditions of the probability rule."""

    assumption1: bool  # no clause head unifies with any hypothesis
    assumption2: bool | None  # ground same-head bodies mutually exclusive
    joint_states: int
    counterexample: str | None = None


def check_assumptions(theory: PhaTheory, max_joint_states: int = 2**20) -> AssumptionReport:
    """Verify the well-formedness assumptions behind the probability rule.

    The first is syntactic.  The second is checked by enumerating every
    joint truth assignment of the declarations on the grounded theory and
    is skipped (reported as None) when there are more than
    `max_joint_states` assignments.
    """
    counter = count()
    assumption1 = True
    for c in theory.clauses:
        head = rename_clause(c, counter).head
        if any(unify(head, hyp) is not None for hyp in theory.hypothesis_index):
            assumption1 = False
            break

    joint = 1
    for decl in theory.declarations:
        joint *= len(decl.alternatives)
    if joint > max_joint_states:
        return AssumptionReport(assumption1, None, joint)

    program = GroundProgram(theory)
    from itertools import product as iproduct

    choices = [
        tuple(1 << program.index[a] for a, _ in d.alternatives)
        for d in theory.declarations
    ]
    for world in iproduct(*choices):
        mask = 0
        for bit in world:
            mask |= bit
        conflict = program.same_head_conflict(mask)
        if conflict is not None:
            example = (
                f"{format_clause(conflict[0])} and "
                f"{format_clause(conflict[1])} both hold"
            )
            return AssumptionReport(assumption1, False, joint, example)
    return AssumptionReport(assumption1, True, joint)


def entails(theory: PhaTheory, hypotheses: set[Atom], goals: list[Atom]) -> bool:
    """True when the ground `goals` all follow from `hypotheses` alone."""
    return GroundProgram(theory).derives(set(hypotheses), list(goals))
