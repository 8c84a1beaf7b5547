"""Line-oriented circuit language with postselection, and its executor.

Grammar (one statement per line, ``#`` starts a comment, keywords and qubit
names are case-insensitive)::

    qubits N
    prep q<i> 0|1
    <gate> q<i> [q<j> ...] [(p1, p2, ...)]
    unitary q<i> [q<j> ...] [m00, m01; m10, m11]
    postselect q<i>[,q<j>...] <bits>
    measure q<i> [q<j> ...]

Qubit lists may be separated by spaces or commas. Parameters are radians and
accept ``pi`` in simple products/quotients such as ``-pi/4`` or ``0.5*pi``.
Matrix entries are Python complex literals, rows separated by ``;``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gates import GATES
from .postselect import DEFAULT_MIN_AMPLITUDE, PostselectionAnnihilated, embed, project
from .statevec import (
    NotUnitaryError,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    make_basis_state,
    probabilities,
)

KINDS = ("prep", "gate", "unitary", "postselect", "measure")


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_column: int


class CircuitError(Exception):
    """Parse or validation failure, located at ``line``/``column`` (1-based)."""

    def __init__(self, message: str, span: Span | None = None, token: str | None = None, source_line: str | None = None):
        self.message = message
        self.span = span
        self.token = token
        self.source_line = source_line
        super().__init__(str(self))

    @property
    def line(self) -> int | None:
        return self.span.line if self.span else None

    @property
    def column(self) -> int | None:
        return self.span.column if self.span else None

    def __str__(self):
        if self.span is None:
            return self.message
        text = f"line {self.span.line}, column {self.span.column}: {self.message}"
        if self.source_line is not None:
            width = max(1, self.span.end_column - self.span.column)
            text += f"\n  {self.source_line}\n  {' ' * (self.span.column - 1)}{'^' * width}"
        return text


class CircuitSyntaxError(CircuitError):
    pass


class CircuitSemanticError(CircuitError):
    pass


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple[int, ...]
    name: str = ""
    params: tuple[float, ...] = ()
    bits: tuple[int, ...] = ()
    matrix: tuple[tuple[complex, ...], ...] | None = None
    span: Span | None = field(default=None, compare=False, repr=False)

    @classmethod
    def prep(cls, qubit: int, bit: int, span=None):
        return cls("prep", (qubit,), bits=(bit,), span=span)

    @classmethod
    def gate(cls, name: str, qubits: Sequence[int], params: Sequence[float] = (), span=None):
        return cls("gate", tuple(qubits), name=name.lower(), params=tuple(float(p) for p in params), span=span)

    @classmethod
    def unitary(cls, matrix, qubits: Sequence[int], span=None):
        m = tuple(tuple(complex(x) for x in row) for row in np.asarray(matrix, dtype=complex))
        return cls("unitary", tuple(qubits), matrix=m, span=span)

    @classmethod
    def postselect(cls, qubits: Sequence[int], bits: Sequence[int], span=None):
        return cls("postselect", tuple(qubits), bits=tuple(int(b) for b in bits), span=span)

    @classmethod
    def measure(cls, qubits: Sequence[int], span=None):
        return cls("measure", tuple(qubits), span=span)

    def to_unitary(self) -> UnitaryMatrix:
        if self.kind == "gate":
            return GATES[self.name].unitary(*self.params)
        if self.kind == "unitary":
            return UnitaryMatrix(np.array(self.matrix, dtype=complex))
        raise TypeError(f"{self.kind} instruction has no unitary")


@dataclass(frozen=True)
class CircuitProgram:
    num_qubits: int
    instructions: tuple[Instruction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        validate(self)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        out: list[int] = []
        for ins in self.instructions:
            if ins.kind == "measure":
                out.extend(ins.qubits)
        return tuple(out)


def _semantic(msg, ins: Instruction):
    return CircuitSemanticError(msg, ins.span)


def validate(program: CircuitProgram) -> None:
    """Raise :class:`CircuitSemanticError` on the first invalid instruction."""
    n = program.num_qubits
    if n < 1:
        raise CircuitSemanticError("register needs at least one qubit")
    measured: set[int] = set()
    for ins in program.instructions:
        if ins.kind not in KINDS:
            raise _semantic(f"unknown instruction kind {ins.kind!r}", ins)
        if not ins.qubits:
            raise _semantic(f"{ins.kind} needs at least one qubit", ins)
        if len(set(ins.qubits)) != len(ins.qubits):
            raise _semantic(f"repeated qubit in {ins.kind}", ins)
        for q in ins.qubits:
            if not 0 <= q < n:
                raise _semantic(f"qubit index q{q} out of range for {n} qubits", ins)
            if q in measured:
                raise _semantic(f"q{q} was already measured", ins)
        if ins.kind == "gate":
            spec = GATES.get(ins.name)
            if spec is None:
                raise _semantic(f"unknown gate '{ins.name}'", ins)
            if len(ins.qubits) != spec.num_qubits:
                raise _semantic(f"gate '{ins.name}' acts on {spec.num_qubits} qubit(s), got {len(ins.qubits)}", ins)
            if len(ins.params) != spec.num_params:
                raise _semantic(f"gate '{ins.name}' takes {spec.num_params} parameter(s), got {len(ins.params)}", ins)
            if not all(np.isfinite(ins.params)):
                raise _semantic("parameters must be finite", ins)
        elif ins.kind == "unitary":
            m = np.array(ins.matrix, dtype=complex)
            if m.shape != (2 ** len(ins.qubits),) * 2:
                raise _semantic(f"matrix shape {m.shape} does not match {len(ins.qubits)} qubit(s)", ins)
            try:
                UnitaryMatrix(m)
            except NotUnitaryError as exc:
                raise _semantic(str(exc), ins) from None
        elif ins.kind in ("prep", "postselect"):
            if len(ins.bits) != len(ins.qubits):
                raise _semantic(f"{len(ins.bits)} bit(s) given for {len(ins.qubits)} qubit(s)", ins)
            if any(b not in (0, 1) for b in ins.bits):
                raise _semantic("bits must be 0 or 1", ins)
        elif ins.kind == "measure":
            measured.update(ins.qubits)


# ---------------------------------------------------------------- lexing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<matrix>\[[^\]]*\])
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),*/+-])
    """,
    re.VERBOSE,
)
_QUBIT_RE = re.compile(r"[qQ](\d+)$")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int  # 1-based

    def span(self, line):
        return Span(line, self.col, self.col + len(self.text))


def _lex(text: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            bad = text[pos]
            if bad == "[":
                raise CircuitSyntaxError("unterminated matrix literal", Span(lineno, pos + 1, len(text) + 1), bad, text)
            raise CircuitSyntaxError(f"unexpected character {bad!r}", Span(lineno, pos + 1, pos + 2), bad, text)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    return toks


class _LineParser:
    def __init__(self, toks: list[_Tok], lineno: int, text: str):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.text = text

    def syntax(self, msg, tok: _Tok | None = None):
        if tok is None:
            end = len(self.text.rstrip()) + 1
            return CircuitSyntaxError(msg + " at end of line", Span(self.lineno, end, end + 1), "", self.text)
        return CircuitSyntaxError(msg, tok.span(self.lineno), tok.text, self.text)

    def semantic(self, msg, tok: _Tok):
        return CircuitSemanticError(msg, tok.span(self.lineno), tok.text, self.text)

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.syntax(f"expected {what}")
        self.i += 1
        return tok

    def at_end(self):
        return self.i >= len(self.toks)

    def expect_end(self):
        tok = self.peek()
        if tok is not None:
            raise self.syntax(f"unexpected token {tok.text!r}", tok)

    def qubit(self, num_qubits: int) -> int:
        tok = self.next("qubit (q<i>)")
        m = _QUBIT_RE.match(tok.text) if tok.kind == "ident" else None
        if m is None:
            raise self.syntax(f"expected qubit (q<i>), got {tok.text!r}", tok)
        q = int(m.group(1))
        if q >= num_qubits:
            raise self.semantic(f"qubit index q{q} out of range for {num_qubits} qubits", tok)
        return q

    def is_qubit_next(self) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "ident" and _QUBIT_RE.match(tok.text) is not None

    def qubit_list(self, num_qubits: int) -> list[int]:
        qs = [self.qubit(num_qubits)]
        while True:
            tok = self.peek()
            if tok is not None and tok.text == ",":
                self.i += 1
                qs.append(self.qubit(num_qubits))
            elif self.is_qubit_next():
                qs.append(self.qubit(num_qubits))
            else:
                return qs

    def bits(self, count: int) -> tuple[int, ...]:
        tok = self.next("bit string")
        if tok.kind != "number" or set(tok.text) - {"0", "1"}:
            raise self.syntax(f"expected bit string of 0/1, got {tok.text!r}", tok)
        if len(tok.text) != count:
            raise self.semantic(f"{len(tok.text)} bit(s) given for {count} qubit(s)", tok)
        return tuple(int(b) for b in tok.text)

    def params(self) -> list[float]:
        self.next("'('")
        values = [self.expr()]
        while True:
            tok = self.next("')' or ','")
            if tok.text == ")":
                return values
            if tok.text != ",":
                raise self.syntax(f"expected ',' or ')', got {tok.text!r}", tok)
            values.append(self.expr())

    def expr(self) -> float:
        sign = 1.0
        tok = self.peek()
        if tok is not None and tok.text in "+-" and tok.kind == "punct":
            self.i += 1
            sign = -1.0 if tok.text == "-" else 1.0
        value = self.atom()
        while True:
            tok = self.peek()
            if tok is None or tok.text not in ("*", "/"):
                return sign * value
            self.i += 1
            rhs = self.atom()
            if tok.text == "*":
                value *= rhs
            else:
                if rhs == 0:
                    raise self.semantic("division by zero", tok)
                value /= rhs

    def atom(self) -> float:
        tok = self.next("number")
        if tok.kind == "number":
            return float(tok.text)
        if tok.kind == "ident" and tok.text.lower() == "pi":
            return float(np.pi)
        raise self.syntax(f"expected number, got {tok.text!r}", tok)

    def matrix(self):
        tok = self.next("matrix literal '[...]'")
        if tok.kind != "matrix":
            raise self.syntax(f"expected matrix literal, got {tok.text!r}", tok)
        rows = []
        for row in tok.text[1:-1].split(";"):
            try:
                entries = [complex(e.strip()) for e in row.split(",")]
            except ValueError:
                raise self.syntax("malformed matrix entry", tok) from None
            rows.append(entries)
        if len({len(r) for r in rows}) != 1:
            raise self.semantic("matrix rows have different lengths", tok)
        return tok, rows


def _parse_statement(p: _LineParser, head: _Tok, n: int) -> Instruction:
    word = head.text.lower()
    line = p.lineno
    if word == "prep":
        q = p.qubit(n)
        bits = p.bits(1)
        ins = Instruction.prep(q, bits[0])
    elif word == "postselect":
        qs = p.qubit_list(n)
        ins = Instruction.postselect(qs, p.bits(len(qs)))
    elif word == "measure":
        ins = Instruction.measure(p.qubit_list(n))
    elif word == "unitary":
        qs = p.qubit_list(n)
        tok, rows = p.matrix()
        if len(rows) != 2 ** len(qs) or len(rows[0]) != 2 ** len(qs):
            raise p.semantic(f"{len(rows)}x{len(rows[0])} matrix does not match {len(qs)} qubit(s)", tok)
        try:
            UnitaryMatrix(rows)
        except NotUnitaryError as exc:
            raise p.semantic(str(exc), tok) from None
        ins = Instruction.unitary(rows, qs)
    else:
        spec = GATES.get(word)
        if spec is None:
            raise p.semantic(f"unknown gate '{head.text}'", head)
        qs = p.qubit_list(n)
        params: list[float] = []
        tok = p.peek()
        if tok is not None and tok.text == "(":
            params = p.params()
        if len(qs) != spec.num_qubits:
            raise p.semantic(f"gate '{word}' acts on {spec.num_qubits} qubit(s), got {len(qs)}", head)
        if len(params) != spec.num_params:
            raise p.semantic(f"gate '{word}' takes {spec.num_params} parameter(s), got {len(params)}", head)
        ins = Instruction.gate(word, qs, params)
    p.expect_end()
    if len(set(ins.qubits)) != len(ins.qubits):
        raise p.semantic(f"repeated qubit in {word}", head)
    span = Span(line, head.col, len(p.text.rstrip()) + 1)
    return Instruction(ins.kind, ins.qubits, ins.name, ins.params, ins.bits, ins.matrix, span)


def parse(source: str) -> CircuitProgram:
    """Parse program text; raises :class:`CircuitSyntaxError` / :class:`CircuitSemanticError`."""
    num_qubits = None
    instructions: list[Instruction] = []
    lines = source.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].rstrip()
        toks = _lex(text, lineno)
        if not toks:
            continue
        p = _LineParser(toks, lineno, text)
        head = p.next("statement")
        if head.kind != "ident":
            raise p.syntax(f"expected keyword or gate name, got {head.text!r}", head)
        if head.text.lower() == "qubits":
            if num_qubits is not None:
                raise p.semantic("duplicate 'qubits' header", head)
            tok = p.next("qubit count")
            if tok.kind != "number" or not tok.text.isdigit():
                raise p.syntax(f"expected integer qubit count, got {tok.text!r}", tok)
            num_qubits = int(tok.text)
            if num_qubits < 1:
                raise p.semantic("register needs at least one qubit", tok)
            p.expect_end()
            continue
        if num_qubits is None:
            raise p.syntax("expected 'qubits N' header before first instruction", head)
        instructions.append(_parse_statement(p, head, num_qubits))
    if num_qubits is None:
        raise CircuitSyntaxError("missing 'qubits N' header", Span(max(1, len(lines)), 1, 2))
    try:
        return CircuitProgram(num_qubits, tuple(instructions))
    except CircuitSemanticError as exc:
        span = exc.span
        src = lines[span.line - 1].split("#", 1)[0].rstrip() if span else None
        raise CircuitSemanticError(exc.message, span, None, src) from None


def _qubits_text(qs, sep=" "):
    return sep.join(f"q{q}" for q in qs)


def serialize(program: CircuitProgram) -> str:
    """Canonical text form; ``parse(serialize(p)) == p``."""
    out = [f"qubits {program.num_qubits}"]
    for ins in program.instructions:
        if ins.kind == "prep":
            out.append(f"prep q{ins.qubits[0]} {ins.bits[0]}")
        elif ins.kind == "gate":
            line = f"{ins.name} {_qubits_text(ins.qubits)}"
            if ins.params:
                line += " (" + ", ".join(repr(float(p)) for p in ins.params) + ")"
            out.append(line)
        elif ins.kind == "unitary":
            rows = "; ".join(", ".join(repr(complex(x)) for x in row) for row in ins.matrix)
            out.append(f"unitary {_qubits_text(ins.qubits)} [{rows}]")
        elif ins.kind == "postselect":
            out.append(f"postselect {_qubits_text(ins.qubits, ',')} {''.join(map(str, ins.bits))}")
        elif ins.kind == "measure":
            out.append(f"measure {_qubits_text(ins.qubits)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- execution

@dataclass(frozen=True)
class PostselectRecord:
    instruction_index: int
    kind: str
    amplitude: float
    discarded_weight: float


@dataclass(frozen=True)
class ExecutionResult:
    final_state: StateVector
    postselect_log: tuple[PostselectRecord, ...]
    measurement_samples: tuple[str, ...]
    success_probability: float
    sampled_qubits: tuple[int, ...]

    def histogram(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.measurement_samples:
            counts[s] = counts.get(s, 0) + 1
        return dict(sorted(counts.items()))


def _project_and_reset(state, qubits, bits_in, bits_out, index, kind, min_amplitude):
    g = make_basis_state(len(qubits), int("".join(map(str, bits_in)), 2))
    out = project(state, qubits, g)
    amp = abs(out.success_amplitude)
    if amp < min_amplitude or out.renormalized_state is None:
        raise PostselectionAnnihilated(
            f"instruction {index} ({kind}): branch amplitude {amp:.3e} below {min_amplitude:.0e}",
            amplitude=amp,
            instruction_index=index,
        )
    fresh = make_basis_state(len(qubits), int("".join(map(str, bits_out)), 2))
    new_state = embed(out.renormalized_state, fresh, qubits).renormalized()
    return new_state, PostselectRecord(index, kind, amp, out.discarded_weight)


def execute(
    program: CircuitProgram,
    shots: int = 0,
    seed=None,
    min_amplitude: float = DEFAULT_MIN_AMPLITUDE,
) -> ExecutionResult:
    """Run ``program`` from ``|0...0>``.

    ``postselect qs bits`` applies ``|bits><bits|`` to ``qs`` and renormalizes.
    ``prep q b`` applies ``|b><0|`` to ``q`` (a reset with amplitude
    bookkeeping); on a fresh qubit this is exact preparation. Both are logged
    and contribute ``|c|^2`` to ``success_probability``. Samples cover the
    measured qubits in declaration order, or every qubit if none are measured.
    """
    if shots < 0:
        raise ValueError("shots must be >= 0")
    state = make_basis_state(program.num_qubits, 0)
    log: list[PostselectRecord] = []
    for index, ins in enumerate(program.instructions):
        if ins.kind in ("gate", "unitary"):
            state = apply_unitary(state, ins.to_unitary(), ins.qubits)
        elif ins.kind == "prep":
            state, rec = _project_and_reset(state, ins.qubits, (0,), ins.bits, index, "prep", min_amplitude)
            log.append(rec)
        elif ins.kind == "postselect":
            state, rec = _project_and_reset(state, ins.qubits, ins.bits, ins.bits, index, "postselect", min_amplitude)
            log.append(rec)
    success = float(np.prod([r.amplitude**2 for r in log])) if log else 1.0

    sampled = program.measured_qubits or tuple(range(program.num_qubits))
    samples: tuple[str, ...] = ()
    if shots:
        rng = np.random.default_rng(seed)
        p = probabilities(state, sampled)
        idx = rng.choice(p.size, size=shots, p=p)
        width = len(sampled)
        samples = tuple(format(int(i), f"0{width}b") for i in idx)
    return ExecutionResult(state, tuple(log), samples, success, sampled)
