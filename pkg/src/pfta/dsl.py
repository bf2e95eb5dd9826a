"""Line-oriented text format for parametric fault tree models.

One statement per line; `--` starts a comment.  Statements:

    model <name>
    type <T> = {v1, v2, ...}
    basic <Name>(<p>:<T>, ...) rate <float>
    event <Name>(<p>:<T>, ...) = <gate-expr>
    top <Name> = <gate-expr>

    gate-expr := and(<ref>, ...) | or(<ref>, ...)
               | and forall(<p>:<T>, ...) <ref>
               | vote(<k>:<n>) forall(<p>:<T>) <ref>
    ref       := <Name> | <Name>(<arg>, ...)      -- arg: parameter or integer

A `forall` clause declares its parameters at the referenced input event,
which thereby becomes a replicator.  Declarations may appear in any order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DslError
from .model import (
    EventNode,
    EventRef,
    FailureRate,
    Gate,
    KIND_BASIC,
    KIND_INTERNAL,
    KIND_TOP,
    Parameter,
    ParamType,
    PftModel,
)

_TOKEN = re.compile(r"\s*(-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|[A-Za-z_][A-Za-z_0-9]*|[(){}=:,])")


@dataclass
class _Tok:
    text: str
    column: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    code = line.split("--", 1)[0]
    toks: list[_Tok] = []
    pos = 0
    while pos < len(code):
        m = _TOKEN.match(code, pos)
        if m is None:
            rest = code[pos:].strip()
            if not rest:
                break
            raise DslError(f"unexpected character {rest[0]!r}", lineno, pos + 1)
        toks.append(_Tok(m.group(1), m.start(1) + 1))
        pos = m.end()
    return toks


class _Cursor:
    """Token stream over one statement line."""

    def __init__(self, toks: list[_Tok], lineno: int):
        self.toks = toks
        self.lineno = lineno
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i].text if self.i < len(self.toks) else None

    def next(self, what: str = "token") -> _Tok:
        if self.i >= len(self.toks):
            raise DslError(f"expected {what} at end of line", self.lineno)
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next(repr(text))
        if tok.text != text:
            raise DslError(f"expected {text!r}, got {tok.text!r}", self.lineno, tok.column)
        return tok

    def ident(self, what: str = "identifier") -> _Tok:
        tok = self.next(what)
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", tok.text):
            raise DslError(f"expected {what}, got {tok.text!r}", self.lineno, tok.column)
        return tok

    def integer(self, what: str = "integer") -> int:
        tok = self.next(what)
        if not re.fullmatch(r"-?\d+", tok.text):
            raise DslError(f"expected {what}, got {tok.text!r}", self.lineno, tok.column)
        return int(tok.text)

    def number(self, what: str = "number") -> float:
        tok = self.next(what)
        try:
            return float(tok.text)
        except ValueError:
            raise DslError(f"expected {what}, got {tok.text!r}", self.lineno, tok.column) from None

    def done(self) -> None:
        if self.i < len(self.toks):
            tok = self.toks[self.i]
            raise DslError(f"unexpected trailing {tok.text!r}", self.lineno, tok.column)


@dataclass
class _RawGate:
    kind: str
    k: int | None
    n: int | None
    forall: list[tuple[str, str]]  # (param, type) pairs
    refs: list[tuple[str, list[int | str], int]]  # name, args, column
    lineno: int


class _Builder:
    """Collects declarations, then resolves references into a PftModel."""

    def __init__(self) -> None:
        self.name = ""
        self.types: list[ParamType] = []
        self.basics: list[tuple[str, list[tuple[str, str]], float, int]] = []
        self.eventdecls: list[tuple[str, list[tuple[str, str]], _RawGate, str, int]] = []
        self.seen: dict[str, int] = {}

    def declare(self, what: str, name: str, lineno: int, column: int) -> None:
        if name in self.seen:
            raise DslError(
                f"duplicate declaration of {name} (first on line {self.seen[name]})",
                lineno,
                column,
            )
        self.seen[name] = lineno

    def finish(self) -> PftModel:
        type_map = {t.name: t for t in self.types}
        # global parameter table: same name, same type everywhere
        params: dict[str, str] = {}
        owner: dict[str, tuple[str, int]] = {}

        def note_param(pname: str, tname: str, lineno: int, where: str) -> None:
            if tname not in type_map:
                raise DslError(f"unknown type {tname} in {where}", lineno)
            prev = params.get(pname)
            if prev is None:
                params[pname] = tname
            elif prev != tname:
                raise DslError(
                    f"parameter {pname} used with type {tname} in {where} "
                    f"but previously with type {prev}",
                    lineno,
                )

        for cname, formals, _lam, lineno in self.basics:
            for pname, tname in formals:
                note_param(pname, tname, lineno, f"basic {cname}")
        for cname, formals, _raw, _kind, lineno in self.eventdecls:
            for pname, tname in formals:
                note_param(pname, tname, lineno, f"event {cname}")

        formals_of: dict[str, list[str]] = {}
        for cname, formals, _lam, _lineno in self.basics:
            formals_of[cname] = [p for p, _ in formals]
        for cname, formals, _raw, _kind, _lineno in self.eventdecls:
            formals_of[cname] = [p for p, _ in formals]

        declares: dict[str, set[str]] = {c: set() for c in formals_of}
        gates: list[Gate] = []
        for cname, formals, raw, kind, lineno in self.eventdecls:
            gates.append(self._resolve_gate(cname, raw, formals_of, params, type_map,
                                            declares, owner, note_param))

        events: list[EventNode] = []
        rates: list[FailureRate] = []
        for cname, formals, lam, lineno in self.basics:
            events.append(EventNode(cname, KIND_BASIC, tuple(p for p, _ in formals),
                                    frozenset(declares.get(cname, ())), lineno))
            rates.append(FailureRate(cname, lam))
        for cname, formals, _raw, kind, lineno in self.eventdecls:
            events.append(EventNode(cname, kind, tuple(p for p, _ in formals),
                                    frozenset(declares.get(cname, ())), lineno))

        param_objs = tuple(
            Parameter(pname, tname, owner.get(pname, (None,))[0])
            for pname, tname in params.items()
        )
        return PftModel(
            name=self.name,
            types=tuple(self.types),
            params=param_objs,
            events=tuple(events),
            gates=tuple(gates),
            rates=tuple(rates),
        )

    def _resolve_gate(self, cname, raw, formals_of, params, type_map,
                      declares, owner, note_param) -> Gate:
        lineno = raw.lineno
        forall_names = []
        for pname, tname in raw.forall:
            note_param(pname, tname, lineno, f"forall of {cname}")
            if pname in forall_names:
                raise DslError(f"parameter {pname} repeated in forall", lineno)
            forall_names.append(pname)
        if raw.forall and len(raw.refs) != 1:
            raise DslError("forall applies to exactly one reference", lineno)

        outer = set(formals_of[cname])
        refs: list[EventRef] = []
        for rname, rargs, column in raw.refs:
            if rname not in formals_of:
                raise DslError(f"unknown event {rname}", lineno, column)
            formals = formals_of[rname]
            if len(rargs) != len(formals):
                raise DslError(
                    f"{rname} takes {len(formals)} parameters, got {len(rargs)}",
                    lineno,
                    column,
                )
            for arg, formal in zip(rargs, formals):
                ftype = params[formal]
                if isinstance(arg, int):
                    if arg not in type_map[ftype].values:
                        raise DslError(
                            f"constant {arg} is not a value of type {ftype}",
                            lineno,
                            column,
                        )
                else:
                    if arg not in params:
                        raise DslError(f"unknown parameter {arg}", lineno, column)
                    if params[arg] != ftype:
                        raise DslError(
                            f"parameter {arg} of type {params[arg]} passed to "
                            f"{rname} where type {ftype} is expected",
                            lineno,
                            column,
                        )
                    if arg in forall_names and arg != formal:
                        raise DslError(
                            f"forall parameter {arg} must match the formal "
                            f"parameter name {formal} of {rname}",
                            lineno,
                            column,
                        )
                    if arg not in outer and arg not in forall_names \
                            and owner.get(arg, (rname,))[0] != rname:
                        raise DslError(
                            f"parameter {arg} is not in scope here",
                            lineno,
                            column,
                        )
            refs.append(EventRef(rname, tuple(rargs)))

        if raw.forall:
            target = refs[0].event
            for pname in forall_names:
                if pname in owner:
                    prev_at, prev_line = owner[pname]
                    raise DslError(
                        f"parameter {pname} already declared at {prev_at} "
                        f"(line {prev_line})",
                        lineno,
                    )
                if pname not in formals_of[target]:
                    raise DslError(
                        f"forall parameter {pname} is not a formal parameter "
                        f"of {target}",
                        lineno,
                    )
                owner[pname] = (target, lineno)
                declares[target].add(pname)

        kind = raw.kind
        k = raw.k
        if kind == "kofn" and raw.n is not None and raw.forall:
            n = 1
            for pname in forall_names:
                n *= len(type_map[params[pname]].values)
            if raw.n != n:
                raise DslError(
                    f"vote({k}:{raw.n}) of {cname} disagrees with the "
                    f"{n} replicas of {refs[0].event}",
                    lineno,
                )
        return Gate(kind=kind, output=cname, inputs=tuple(refs), k=k,
                    forall=tuple(forall_names), line=lineno)


def _parse_params(cur: _Cursor) -> list[tuple[str, str]]:
    """Parse `(p:T, q:U)`; cursor sits on the opening parenthesis."""
    out: list[tuple[str, str]] = []
    cur.expect("(")
    while True:
        pname = cur.ident("parameter name").text
        cur.expect(":")
        tname = cur.ident("type name").text
        if pname in [p for p, _ in out]:
            raise DslError(f"parameter {pname} repeated", cur.lineno)
        out.append((pname, tname))
        if cur.peek() == ",":
            cur.next()
            continue
        cur.expect(")")
        return out


def _parse_ref(cur: _Cursor) -> tuple[str, list[int | str], int]:
    tok = cur.ident("event name")
    args: list[int | str] = []
    if cur.peek() == "(":
        cur.next()
        while True:
            nxt = cur.next("argument")
            if re.fullmatch(r"-?\d+", nxt.text):
                args.append(int(nxt.text))
            elif re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", nxt.text):
                args.append(nxt.text)
            else:
                raise DslError(f"expected argument, got {nxt.text!r}", cur.lineno, nxt.column)
            if cur.peek() == ",":
                cur.next()
                continue
            cur.expect(")")
            break
    return tok.text, args, tok.column


def _parse_gate_expr(cur: _Cursor) -> _RawGate:
    tok = cur.ident("gate kind")
    kind = tok.text
    if kind in ("and", "or"):
        if kind == "and" and cur.peek() == "forall":
            cur.next()
            forall = _parse_params(cur)
            ref = _parse_ref(cur)
            return _RawGate("and", None, None, forall, [ref], cur.lineno)
        cur.expect("(")
        refs = []
        while True:
            refs.append(_parse_ref(cur))
            if cur.peek() == ",":
                cur.next()
                continue
            cur.expect(")")
            break
        return _RawGate(kind, None, None, [], refs, cur.lineno)
    if kind == "vote":
        cur.expect("(")
        k = cur.integer("k")
        cur.expect(":")
        n = cur.integer("n")
        cur.expect(")")
        if cur.peek() == "forall":
            cur.next()
            forall = _parse_params(cur)
            ref = _parse_ref(cur)
            return _RawGate("kofn", k, n, forall, [ref], cur.lineno)
        # bare reference list; structural checks are left to the validator
        cur.expect("(")
        refs = []
        while True:
            refs.append(_parse_ref(cur))
            if cur.peek() == ",":
                cur.next()
                continue
            cur.expect(")")
            break
        return _RawGate("kofn", k, n, [], refs, cur.lineno)
    raise DslError(f"expected and/or/vote, got {kind!r}", cur.lineno, tok.column)


def parse_model(text: str) -> PftModel:
    """Parse a fault tree document into a PftModel."""
    b = _Builder()
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokenize(line, lineno)
        if not toks:
            continue
        cur = _Cursor(toks, lineno)
        head = cur.next("statement")
        if head.text == "model":
            b.name = cur.ident("model name").text
            cur.done()
        elif head.text == "type":
            name = cur.ident("type name")
            b.declare("type", name.text, lineno, name.column)
            cur.expect("=")
            cur.expect("{")
            values = [cur.integer("type value")]
            while cur.peek() == ",":
                cur.next()
                values.append(cur.integer("type value"))
            cur.expect("}")
            cur.done()
            if len(set(values)) != len(values):
                raise DslError(f"type {name.text} has repeated values", lineno)
            b.types.append(ParamType(name.text, tuple(values)))
        elif head.text == "basic":
            name = cur.ident("event name")
            b.declare("basic", name.text, lineno, name.column)
            formals = _parse_params(cur) if cur.peek() == "(" else []
            if cur.peek() != "rate":
                raise DslError(f"missing failure rate for {name.text}", lineno)
            cur.next()
            lam = cur.number("failure rate")
            cur.done()
            b.basics.append((name.text, formals, lam, lineno))
        elif head.text in ("event", "top"):
            name = cur.ident("event name")
            b.declare(head.text, name.text, lineno, name.column)
            formals = []
            if head.text == "event" and cur.peek() == "(":
                formals = _parse_params(cur)
            cur.expect("=")
            raw = _parse_gate_expr(cur)
            cur.done()
            kind = KIND_TOP if head.text == "top" else KIND_INTERNAL
            b.eventdecls.append((name.text, formals, raw, kind, lineno))
        else:
            raise DslError(
                f"expected model/type/basic/event/top, got {head.text!r}",
                lineno,
                head.column,
            )
    return b.finish()


def _format_rate(lam: float) -> str:
    return repr(lam)


def _format_ref(ref: EventRef) -> str:
    if not ref.args:
        return ref.event
    return ref.event + "(" + ", ".join(str(a) for a in ref.args) + ")"


def _format_formals(model: PftModel, class_name: str) -> str:
    ev = model.event_map[class_name]
    if not ev.formal_params:
        return ""
    parts = [f"{p}:{model.param_map[p].type_name}" for p in ev.formal_params]
    return "(" + ", ".join(parts) + ")"


def serialize_model(model: PftModel) -> str:
    """Render a model as a document that parses back to an equal model."""
    lines: list[str] = []
    if model.name:
        lines.append(f"model {model.name}")
    for t in model.types:
        lines.append(f"type {t.name} = {{{', '.join(str(v) for v in t.values)}}}")
    for e in model.events:
        if e.kind != KIND_BASIC:
            continue
        lines.append(
            f"basic {e.class_name}{_format_formals(model, e.class_name)} "
            f"rate {_format_rate(model.rate_map[e.class_name])}"
        )
    for e in model.events:
        if e.kind == KIND_BASIC:
            continue
        gate = model.gate_map[e.class_name]
        keyword = "top" if e.kind == KIND_TOP else "event"
        head = f"{keyword} {e.class_name}"
        if e.kind != KIND_TOP:
            head += _format_formals(model, e.class_name)
        lines.append(f"{head} = {_format_gate(model, gate)}")
    return "\n".join(lines) + "\n"


def _format_gate(model: PftModel, gate: Gate) -> str:
    forall_params = list(gate.forall)
    if gate.kind == "kofn" and not forall_params:
        # fall back on the parameters declared at the replicator input
        target = model.event_map[gate.inputs[0].event]
        forall_params = [a for a in gate.inputs[0].args
                         if isinstance(a, str) and a in target.declares]
    if gate.kind == "kofn" and forall_params:
        n = 1
        for p in forall_params:
            n *= len(model.param_values(p))
        quant = ", ".join(f"{p}:{model.param_map[p].type_name}" for p in forall_params)
        return f"vote({gate.k}:{n}) forall({quant}) {_format_ref(gate.inputs[0])}"
    if gate.kind == "kofn":
        refs = ", ".join(_format_ref(r) for r in gate.inputs)
        return f"vote({gate.k}:{len(gate.inputs)})({refs})"
    if gate.kind == "and" and forall_params:
        quant = ", ".join(f"{p}:{model.param_map[p].type_name}" for p in forall_params)
        return f"and forall({quant}) {_format_ref(gate.inputs[0])}"
    refs = ", ".join(_format_ref(r) for r in gate.inputs)
    return f"{gate.kind}({refs})"
