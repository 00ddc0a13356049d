"""Line-oriented text format for model files, with parse and build steps.

A model file declares a system in the Schrodinger picture; building it
converts every projector to the Heisenberg picture using the declared
evolution. Directives, one per line ("#" starts a comment, names are
whitespace-free tokens):

    dim 3
    state [0.5+0i, 0.5, 0.5, 0.5]
    evolution zero
    evolution hamiltonian [[0,1],[1,0]]
    evolution unitary 1.0 [[0,1],[1,0]]      # repeatable, one per time
    slot 1.0 boxes
    member A basis {0}                       # sum of basis projectors
    member ~A basis {1,2}
    member X matrix [[...],[...]]            # explicit projector matrix
    partition sector [[0,1,2],[3,4,5]]       # named flat-index classes
    finegrained 2.0 basis [[1,1,-1],[1,-1,0],[1,1,2]]   # rows, normalized on build
    composite pair factors a.model b.model   # paths relative to this file

Complex literals are "a+bi" (or "a-bi", suffix i or j); bare reals are
fine. parse_model gives ParseError with 1-based line and column.
serialize_model writes a canonical form with shortest round-trip float
literals, and parse_model(serialize_model(doc)) reproduces doc exactly.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, ParseError
from .hilbert import (
    EvolutionSpec,
    HermitianOperator,
    Projector,
    ProjectorSet,
    StateVector,
    heisenberg_projector,
    rank_one_projector,
)
from .histories import HistorySet
from .finegrained import FineGrainedSpec
from .composite import CompositeSystem

Matrix = tuple[tuple[complex, ...], ...]


@dataclass(frozen=True)
class MemberClause:
    label: str
    kind: str                     # "basis" | "matrix"
    indices: tuple[int, ...] = ()
    matrix: Matrix | None = None


@dataclass(frozen=True)
class SlotClause:
    time: float
    name: str
    members: tuple[MemberClause, ...]


@dataclass(frozen=True)
class EvolutionClause:
    kind: str                     # "zero" | "hamiltonian" | "unitary"
    hamiltonian: Matrix | None = None
    unitaries: tuple[tuple[float, Matrix], ...] = ()


@dataclass(frozen=True)
class PartitionClause:
    name: str
    classes: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class FineClause:
    time: float
    rows: Matrix


@dataclass(frozen=True)
class CompositeClause:
    name: str
    paths: tuple[str, ...]


@dataclass(frozen=True)
class ModelDocument:
    dim: int | None = None
    state: tuple[complex, ...] | None = None
    evolution: EvolutionClause | None = None
    slots: tuple[SlotClause, ...] = ()
    partitions: tuple[PartitionClause, ...] = ()
    finegrained: tuple[FineClause, ...] = ()
    composites: tuple[CompositeClause, ...] = ()


def parse_complex(text: str) -> complex:
    """One literal: "1.5", "2i", "1+2i", "-1.5e-3-2e-4j"."""
    s = text.strip()
    if not s:
        raise ValueError("empty number")
    if s[-1] in "ij":
        body = s[:-1]
        if body in ("", "+"):
            return 1j
        if body == "-":
            return -1j
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-" and body[k - 1] not in "eE":
                real, imag = body[:k], body[k:]
                imag = imag if imag not in ("+", "-") else imag + "1"
                return complex(float(real), float(imag))
        return complex(0.0, float(body))
    return complex(float(s), 0.0)


def format_complex(z: complex) -> str:
    if z.imag == 0.0:
        return repr(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{repr(z.real)}{sign}{repr(abs(z.imag))}i"


class _Line:
    """Cursor over one logical line; tracks the column for diagnostics."""

    def __init__(self, no: int, text: str):
        self.no = no
        self.text = text
        self.pos = 0

    def fail(self, expected: str, at: int | None = None):
        col = (self.pos if at is None else at) + 1
        found = self.text[self.pos:].strip()
        raise ParseError(self.no, col, expected, found[:40])

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect_end(self):
        if not self.at_end():
            self.fail("end of line")

    def word(self, expected: str) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and not self.text[self.pos].isspace():
            self.pos += 1
        if self.pos == start:
            self.fail(expected, at=start)
        return self.text[start:self.pos]

    def number(self, expected: str, conv):
        start_ws = self.pos
        w = self.word(expected)
        try:
            return conv(w)
        except ValueError:
            self.pos = start_ws
            self.fail(expected)

    def bracket(self, open_ch: str, close_ch: str, expected: str) -> tuple[str, int]:
        """Balanced literal starting at the cursor; returns (inner, start)."""
        self.skip_ws()
        start = self.pos
        if start >= len(self.text) or self.text[start] != open_ch:
            self.fail(expected, at=start)
        depth = 0
        for k in range(start, len(self.text)):
            c = self.text[k]
            if c in "[{":
                depth += 1
            elif c in "]}":
                depth -= 1
                if depth == 0:
                    self.pos = k + 1
                    return self.text[start + 1:k], start + 1
        self.fail(f"closing {close_ch!r}", at=len(self.text))


def _split_top(inner: str, base: int) -> list[tuple[str, int]]:
    """Comma-split at bracket depth 0; (piece, absolute offset) pairs."""
    out = []
    depth, start = 0, 0
    for k, c in enumerate(inner + ","):
        if c in "[{":
            depth += 1
        elif c in "]}":
            depth -= 1
        elif c == "," and depth == 0:
            out.append((inner[start:k], base + start))
            start = k + 1
    return out


def _parse_vector(line: _Line, expected: str) -> tuple[complex, ...]:
    inner, base = line.bracket("[", "]", expected)
    values = []
    for piece, off in _split_top(inner, base):
        if not piece.strip():
            line.fail("a number", at=off)
        try:
            values.append(parse_complex(piece))
        except ValueError:
            line.fail("a number like 1.5 or 1+2i", at=off + (len(piece) - len(piece.lstrip())))
    if not values:
        line.fail("a nonempty vector", at=base - 1)
    return tuple(values)


def _parse_matrix(line: _Line, expected: str) -> Matrix:
    inner, base = line.bracket("[", "]", expected)
    rows = []
    for piece, off in _split_top(inner, base):
        sub = _Line(line.no, line.text)
        sub.pos = off
        rows.append(_parse_vector(sub, "a row like [1,0]"))
    if not rows:
        line.fail("a nonempty matrix", at=base - 1)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        line.fail("rows of equal length", at=base - 1)
    return tuple(rows)


def _parse_index_set(line: _Line, dim: int) -> tuple[int, ...]:
    inner, base = line.bracket("{", "}", "an index set like {0,2}")
    indices = []
    for piece, off in _split_top(inner, base):
        try:
            i = int(piece.strip())
        except ValueError:
            line.fail("a basis index", at=off)
        if not 0 <= i < dim:
            line.fail(f"an index in 0..{dim - 1}", at=off)
        indices.append(i)
    if not indices:
        line.fail("a nonempty index set", at=base - 1)
    return tuple(indices)


_DIRECTIVES = "dim, state, evolution, slot, member, partition, finegrained, composite"


class _Parser:
    def __init__(self):
        self.dim: int | None = None
        self.state = None
        self.evolution: EvolutionClause | None = None
        self.slots: list[SlotClause] = []
        self.partitions: list[PartitionClause] = []
        self.finegrained: list[FineClause] = []
        self.composites: list[CompositeClause] = []
        # open slot being accumulated: (line, time, name, [members])
        self.open_slot: tuple[_Line, float, str, list[MemberClause]] | None = None

    def need_dim(self, line: _Line, what: str) -> int:
        if self.dim is None:
            raise ParseError(line.no, 1, f"dim declared before {what}", "")
        return self.dim

    def close_slot(self):
        if self.open_slot is None:
            return
        line, time, name, members = self.open_slot
        if not members:
            raise ParseError(line.no, 1, "at least one member after slot", "")
        self.slots.append(SlotClause(time, name, tuple(members)))
        self.open_slot = None

    def check_time_order(self, line: _Line, clauses, time: float, what: str):
        pending = [self.open_slot[1]] if (what == "slot" and self.open_slot) else []
        prior = [c.time for c in clauses] + pending
        if prior and time <= prior[-1]:
            line.fail(f"{what} time greater than {prior[-1]}")

    def directive(self, line: _Line):
        head = line.word("a directive")
        if head != "member":
            self.close_slot()
        handler = getattr(self, "on_" + head, None)
        if handler is None:
            raise ParseError(line.no, 1, f"a directive ({_DIRECTIVES})", head)
        handler(line)
        line.expect_end()

    def on_dim(self, line: _Line):
        if self.dim is not None:
            line.fail("a single dim declaration")
        n = line.number("a positive integer dimension", int)
        if n < 1:
            line.fail("a positive integer dimension")
        self.dim = n

    def on_state(self, line: _Line):
        if self.state is not None:
            line.fail("a single state declaration")
        d = self.need_dim(line, "state")
        vec = _parse_vector(line, "an amplitude vector like [1,0]")
        if len(vec) != d:
            line.fail(f"{d} amplitudes", at=0)
        self.state = vec

    def on_evolution(self, line: _Line):
        kind = line.word("zero, hamiltonian, or unitary")
        if kind == "zero":
            if self.evolution is not None:
                line.fail("a single evolution declaration")
            self.evolution = EvolutionClause("zero")
        elif kind == "hamiltonian":
            if self.evolution is not None:
                line.fail("a single evolution declaration")
            d = self.need_dim(line, "evolution hamiltonian")
            mat = _parse_matrix(line, "a hamiltonian matrix")
            if len(mat) != d or len(mat[0]) != d:
                line.fail(f"a {d}x{d} matrix", at=0)
            self.evolution = EvolutionClause("hamiltonian", hamiltonian=mat)
        elif kind == "unitary":
            if self.evolution is not None and self.evolution.kind != "unitary":
                line.fail("a single evolution kind")
            d = self.need_dim(line, "evolution unitary")
            t = line.number("a time label", float)
            mat = _parse_matrix(line, "a unitary matrix")
            if len(mat) != d or len(mat[0]) != d:
                line.fail(f"a {d}x{d} matrix", at=0)
            prior = self.evolution.unitaries if self.evolution else ()
            if any(pt == t for pt, _ in prior):
                line.fail(f"a time other than {t} (already declared)")
            self.evolution = EvolutionClause("unitary", unitaries=prior + ((t, mat),))
        else:
            line.fail("zero, hamiltonian, or unitary")

    def on_slot(self, line: _Line):
        t = line.number("a time label", float)
        self.check_time_order(line, self.slots, t, "slot")
        name = line.word("a slot name")
        self.open_slot = (line, t, name, [])

    def on_member(self, line: _Line):
        if self.open_slot is None:
            raise ParseError(line.no, 1, "a slot line before member", "member")
        label = line.word("a member label")
        kind = line.word("basis or matrix")
        if kind == "basis":
            d = self.need_dim(line, "member basis")
            clause = MemberClause(label, "basis", indices=_parse_index_set(line, d))
        elif kind == "matrix":
            d = self.need_dim(line, "member matrix")
            mat = _parse_matrix(line, "a projector matrix")
            if len(mat) != d or len(mat[0]) != d:
                line.fail(f"a {d}x{d} matrix", at=0)
            clause = MemberClause(label, "matrix", matrix=mat)
        else:
            line.fail("basis or matrix")
        self.open_slot[3].append(clause)

    def on_partition(self, line: _Line):
        name = line.word("a partition name")
        inner, base = line.bracket("[", "]", "a class list like [[0],[1,2]]")
        literal = "[" + inner + "]"
        try:
            raw = json.loads(literal)
        except json.JSONDecodeError as e:
            raise ParseError(line.no, base + e.colno - 1, "a class list like [[0],[1,2]]",
                             literal[:40]) from None
        if (not isinstance(raw, list) or not raw
                or any(not isinstance(c, list) or not c for c in raw)
                or any(not isinstance(i, int) or isinstance(i, bool) for c in raw for i in c)):
            line.fail("nonempty lists of integers", at=base - 1)
        self.partitions.append(PartitionClause(name, tuple(tuple(c) for c in raw)))

    def on_finegrained(self, line: _Line):
        d = self.need_dim(line, "finegrained")
        t = line.number("a time label", float)
        self.check_time_order(line, self.finegrained, t, "finegrained")
        kw = line.word("the word basis")
        if kw != "basis":
            line.fail("the word basis")
        rows = _parse_matrix(line, "a basis matrix (one row per vector)")
        if len(rows) != d or len(rows[0]) != d:
            line.fail(f"a {d}x{d} basis (rows are vectors)", at=0)
        self.finegrained.append(FineClause(t, rows))

    def on_composite(self, line: _Line):
        name = line.word("a composite name")
        kw = line.word("the word factors")
        if kw != "factors":
            line.fail("the word factors")
        paths = []
        while not line.at_end():
            paths.append(line.word("a factor path"))
        if len(paths) < 2:
            line.fail("at least two factor paths")
        self.composites.append(CompositeClause(name, tuple(paths)))


def parse_model(text: str) -> ModelDocument:
    parser = _Parser()
    saw_any = False
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        saw_any = True
        parser.directive(_Line(no, body))
    parser.close_slot()
    if not saw_any:
        raise ParseError(1, 1, f"at least one directive ({_DIRECTIVES})", "")
    return ModelDocument(
        dim=parser.dim,
        state=parser.state,
        evolution=parser.evolution,
        slots=tuple(parser.slots),
        partitions=tuple(parser.partitions),
        finegrained=tuple(parser.finegrained),
        composites=tuple(parser.composites),
    )


def _vector_literal(values) -> str:
    return "[" + ",".join(format_complex(complex(z)) for z in values) + "]"


def _matrix_literal(rows) -> str:
    return "[" + ",".join(_vector_literal(r) for r in rows) + "]"


def serialize_model(doc: ModelDocument) -> str:
    """Canonical text form; parse_model inverts it exactly."""
    out = []
    if doc.dim is not None:
        out.append(f"dim {doc.dim}")
    if doc.state is not None:
        out.append(f"state {_vector_literal(doc.state)}")
    if doc.evolution is not None:
        ev = doc.evolution
        if ev.kind == "zero":
            out.append("evolution zero")
        elif ev.kind == "hamiltonian":
            out.append(f"evolution hamiltonian {_matrix_literal(ev.hamiltonian)}")
        else:
            for t, mat in ev.unitaries:
                out.append(f"evolution unitary {t!r} {_matrix_literal(mat)}")
    for slot in doc.slots:
        out.append(f"slot {slot.time!r} {slot.name}")
        for m in slot.members:
            if m.kind == "basis":
                out.append(f"member {m.label} basis {{{','.join(str(i) for i in m.indices)}}}")
            else:
                out.append(f"member {m.label} matrix {_matrix_literal(m.matrix)}")
    for part in doc.partitions:
        classes = "[" + ",".join("[" + ",".join(str(i) for i in c) + "]" for c in part.classes) + "]"
        out.append(f"partition {part.name} {classes}")
    for fc in doc.finegrained:
        out.append(f"finegrained {fc.time!r} basis {_matrix_literal(fc.rows)}")
    for comp in doc.composites:
        out.append(f"composite {comp.name} factors {' '.join(comp.paths)}")
    return "\n".join(out) + "\n"


def _require(doc: ModelDocument, section: str):
    value = getattr(doc, section)
    if value is None or value == ():
        raise InvariantViolation("missing-section", 1.0,
                                 f"model file declares no {section}")


def build_state(doc: ModelDocument) -> StateVector:
    _require(doc, "state")
    return StateVector(np.array(doc.state, dtype=np.complex128))


def build_evolution(doc: ModelDocument) -> EvolutionSpec:
    """Declared evolution, or the trivial one if the file omits it."""
    if doc.evolution is None or doc.evolution.kind == "zero":
        _require(doc, "dim")
        return EvolutionSpec.zero(doc.dim)
    if doc.evolution.kind == "hamiltonian":
        return EvolutionSpec.from_hamiltonian(
            HermitianOperator(np.array(doc.evolution.hamiltonian, dtype=np.complex128)))
    return EvolutionSpec.from_unitaries(
        {t: np.array(m, dtype=np.complex128) for t, m in doc.evolution.unitaries})


def _member_projector(doc: ModelDocument, m: MemberClause) -> Projector:
    if m.kind == "basis":
        entries = np.zeros((doc.dim, doc.dim), dtype=np.complex128)
        for i in m.indices:
            entries[i, i] = 1.0
        return Projector(entries, label=m.label)
    return Projector(np.array(m.matrix, dtype=np.complex128), label=m.label)


def build_history_set(doc: ModelDocument) -> HistorySet:
    _require(doc, "slots")
    evo = build_evolution(doc)
    slots = []
    for sc in doc.slots:
        members = tuple(heisenberg_projector(_member_projector(doc, m), sc.time, evo)
                        for m in sc.members)
        slots.append(ProjectorSet(members, time=sc.time))
    return HistorySet(tuple(slots))


def build_finegrained(doc: ModelDocument) -> FineGrainedSpec:
    _require(doc, "finegrained")
    evo = build_evolution(doc)
    slots = []
    for fc in doc.finegrained:
        members = tuple(
            heisenberg_projector(rank_one_projector(np.array(row, dtype=np.complex128), str(i)),
                                 fc.time, evo)
            for i, row in enumerate(fc.rows))
        slots.append(ProjectorSet(members, time=fc.time))
    return FineGrainedSpec(build_state(doc), tuple(slots))


@dataclass(frozen=True)
class BuiltModel:
    """Parsed document plus every engine object it declares."""

    path: str
    document: ModelDocument
    psi: StateVector | None = None
    evolution: EvolutionSpec | None = None
    history_set: HistorySet | None = None
    finegrained: FineGrainedSpec | None = None
    partitions: dict = field(default_factory=dict)
    composites: dict = field(default_factory=dict)


def load_model(path: str, _stack: tuple[str, ...] = ()) -> BuiltModel:
    """Read, parse, and build a model file; composites load their factors."""
    resolved = os.path.abspath(path)
    if resolved in _stack:
        raise InvariantViolation("composite-cycle", float(len(_stack)),
                                 f"{path} is already being loaded")
    try:
        with open(resolved, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InvariantViolation("model-file", 0.0,
                                 f"cannot read {path}: {e.strerror or e}") from None
    doc = parse_model(text)
    psi = build_state(doc) if doc.state is not None else None
    evolution = build_evolution(doc) if doc.dim is not None else None
    history_set = build_history_set(doc) if doc.slots else None
    fine = build_finegrained(doc) if doc.finegrained else None
    composites = {}
    base = os.path.dirname(resolved)
    for comp in doc.composites:
        factors = []
        for rel in comp.paths:
            sub = load_model(os.path.join(base, rel), _stack + (resolved,))
            if sub.psi is None or sub.history_set is None:
                raise InvariantViolation(
                    "missing-section", 1.0,
                    f"composite factor {rel} needs both a state and slots")
            factors.append((sub.psi, sub.history_set))
        composites[comp.name] = CompositeSystem(tuple(factors))
    return BuiltModel(
        path=resolved,
        document=doc,
        psi=psi,
        evolution=evolution,
        history_set=history_set,
        finegrained=fine,
        partitions={p.name: p.classes for p in doc.partitions},
        composites=composites,
    )
