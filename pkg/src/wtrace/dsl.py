"""Line-oriented circuit description language (``.ifz`` files).

Grammar, one statement per line, ``#`` starts a comment::

    file       := header stmt*
    header     := "modes" INT
    stmt       := bs | phase | checkpoint | source | detector
    bs         := "bs" INT INT "R=" NUMBER
    phase      := "phase" INT (NUMBER | IDENT)
    checkpoint := "checkpoint" IDENT "mode=" INT
    source     := "source" INT
    detector   := "detector" IDENT INT

NUMBER is a decimal (``0.5``, ``-1e-3``), a fraction ``p/q``, or a multiple of
pi (``pi``, ``-pi/2``, ``3pi/4``, ``0.5pi``).  Numbers keep their literal text
in the parsed document and are only evaluated when lowering, so ``R=1/3``
round-trips exactly.  An IDENT in a phase statement names a parameter that
must be bound at lowering time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Union

from .network import BeamSplitter, Checkpoint, Network, PhaseShift

_DECIMAL = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
NUMBER_RE = re.compile(
    rf"(?P<sign>[+-]?)(?:(?P<pimul>{_DECIMAL})?(?P<pi>pi)|(?P<num>{_DECIMAL}))(?:/(?P<den>\d+))?"
)
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
INT_RE = re.compile(r"\d+")
RESERVED = {"pi"}


@dataclass(frozen=True)
class Span:
    line: int
    column: int


class ParseError(ValueError):
    """Syntax or semantic error at a position in the input (1-based line/column)."""

    def __init__(self, line: int, column: int, message: str, token: str = ""):
        self.line, self.column, self.message, self.token = line, column, message, token
        where = f"line {line}, col {column}"
        super().__init__(f"{where}: {message}" + (f" (at {token!r})" if token else ""))


class SemanticError(ParseError):
    """Structurally valid text describing an invalid network; carries every issue found."""

    def __init__(self, issues: list[ParseError]):
        self.issues = issues
        first = issues[0]
        super().__init__(first.line, first.column, first.message, first.token)
        if len(issues) > 1:
            self.args = ("\n".join(str(i) for i in issues),)


class UnboundParameter(KeyError):
    def __init__(self, name: str, span: Span | None = None):
        self.name, self.span = name, span
        where = f" (declared at line {span.line}, col {span.column})" if span else ""
        super().__init__(f"unbound phase parameter {name!r}{where}")

    def __str__(self):
        return self.args[0]


@dataclass(frozen=True)
class Number:
    """A numeric literal kept as text; evaluated in double precision on demand."""

    text: str

    def __post_init__(self):
        if NUMBER_RE.fullmatch(self.text) is None:
            raise ValueError(f"not a number literal: {self.text!r}")

    @property
    def value(self) -> float:
        return parse_number(self.text)

    def __str__(self):
        return self.text


def parse_number(text: str) -> float:
    """Evaluate a decimal, ``p/q`` fraction or multiple-of-pi literal."""
    m = NUMBER_RE.fullmatch(text.strip())
    if m is None:
        raise ValueError(f"not a number: {text!r}")
    if m["pi"]:
        value = (float(m["pimul"]) if m["pimul"] else 1.0) * math.pi
    else:
        value = float(m["num"])
    if m["den"]:
        den = int(m["den"])
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        value = value / den
    if not math.isfinite(value):
        raise ValueError(f"number {text!r} is not finite")
    return -value if m["sign"] == "-" else value


@dataclass(frozen=True)
class Modes:
    count: int
    span: Span | None = field(default=None, compare=False)

    def __str__(self):
        return f"modes {self.count}"


@dataclass(frozen=True)
class BS:
    mode_a: int
    mode_b: int
    R: Number
    span: Span | None = field(default=None, compare=False)

    def __str__(self):
        return f"bs {self.mode_a} {self.mode_b} R={self.R}"


@dataclass(frozen=True)
class Phase:
    mode: int
    value: Union[Number, str]
    span: Span | None = field(default=None, compare=False)

    def __str__(self):
        return f"phase {self.mode} {self.value}"


@dataclass(frozen=True)
class CheckpointDecl:
    label: str
    mode: int
    span: Span | None = field(default=None, compare=False)

    def __str__(self):
        return f"checkpoint {self.label} mode={self.mode}"


@dataclass(frozen=True)
class Source:
    mode: int
    span: Span | None = field(default=None, compare=False)

    def __str__(self):
        return f"source {self.mode}"


@dataclass(frozen=True)
class Detector:
    label: str
    mode: int
    span: Span | None = field(default=None, compare=False)

    def __str__(self):
        return f"detector {self.label} {self.mode}"


Statement = Union[Modes, BS, Phase, CheckpointDecl, Source, Detector]


@dataclass(frozen=True)
class CircuitDoc:
    """Parsed circuit: the ``modes`` header followed by statements in declaration order."""

    declarations: tuple[Statement, ...]

    @property
    def mode_count(self) -> int:
        return self.declarations[0].count

    @property
    def parameters(self) -> dict[str, Span | None]:
        """Named phase parameters, in order of first use."""
        out: dict[str, Span | None] = {}
        for d in self.declarations:
            if isinstance(d, Phase) and isinstance(d.value, str):
                out.setdefault(d.value, d.span)
        return out


class _Line:
    """Token cursor over one source line."""

    def __init__(self, lineno: int, text: str):
        self.lineno = lineno
        self.text = text
        self.tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", text)]
        self.pos = 0

    def error(self, message: str, token: str | None = None, column: int | None = None) -> ParseError:
        if column is None:
            if self.pos < len(self.tokens):
                token, column = self.tokens[self.pos]
            else:
                column = len(self.text.rstrip()) + 1
        return ParseError(self.lineno, column, message, token or "")

    def next(self, what: str) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise self.error(f"expected {what}, found end of line")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def int(self, what: str = "mode index") -> int:
        tok, col = self.next(what)
        if not INT_RE.fullmatch(tok):
            raise self.error(f"expected {what} (non-negative integer)", tok, col)
        return int(tok)

    def ident(self, what: str) -> str:
        tok, col = self.next(what)
        if not IDENT_RE.fullmatch(tok) or tok in RESERVED:
            raise self.error(f"expected {what} (identifier)", tok, col)
        return tok

    def number(self, tok: str, col: int, what: str) -> Number:
        try:
            parse_number(tok)
        except ValueError:
            raise self.error(f"expected {what} (decimal, p/q or multiple of pi)", tok, col) from None
        return Number(tok)

    def keyed(self, key: str) -> tuple[str, int]:
        tok, col = self.next(f"{key}<value>")
        if not tok.startswith(key) or len(tok) == len(key):
            raise self.error(f"expected {key}<value>", tok, col)
        return tok[len(key):], col + len(key)

    def done(self) -> None:
        if self.pos < len(self.tokens):
            tok, col = self.tokens[self.pos]
            raise self.error("unexpected trailing token", tok, col)


def _statement(line: _Line) -> Statement:
    keyword, col = line.next("statement")
    span = Span(line.lineno, col)
    if keyword == "modes":
        stmt = Modes(line.int("mode count"), span)
    elif keyword == "bs":
        a, b = line.int(), line.int()
        text, vcol = line.keyed("R=")
        stmt = BS(a, b, line.number(text, vcol, "reflectivity"), span)
    elif keyword == "phase":
        mode = line.int()
        tok, vcol = line.next("phase value or parameter name")
        if IDENT_RE.fullmatch(tok) and tok not in RESERVED:
            value: Union[Number, str] = tok
        else:
            value = line.number(tok, vcol, "phase")
        stmt = Phase(mode, value, span)
    elif keyword == "checkpoint":
        label = line.ident("checkpoint label")
        text, vcol = line.keyed("mode=")
        if not INT_RE.fullmatch(text):
            raise line.error("expected mode index (non-negative integer)", text, vcol)
        stmt = CheckpointDecl(label, int(text), span)
    elif keyword == "source":
        stmt = Source(line.int(), span)
    elif keyword == "detector":
        stmt = Detector(line.ident("detector label"), line.int(), span)
    else:
        raise line.error(
            "unknown statement; expected modes, bs, phase, checkpoint, source or detector",
            keyword, col,
        )
    line.done()
    return stmt


def _validate(decls: list[Statement], last_line: int) -> None:
    issues: list[ParseError] = []

    def issue(span: Span | None, message: str) -> None:
        span = span or Span(last_line, 1)
        issues.append(ParseError(span.line, span.column, message))

    n = decls[0].count
    if n < 1:
        issue(decls[0].span, "mode count must be at least 1")
    labels: dict[str, Span | None] = {}
    ports: dict[str, Span | None] = {}
    sources = []
    for d in decls[1:]:
        if isinstance(d, Modes):
            issue(d.span, "duplicate 'modes' header")
            continue
        modes = (d.mode_a, d.mode_b) if isinstance(d, BS) else (d.mode,)
        for m in modes:
            if m >= n:
                issue(d.span, f"mode {m} out of range (modes {n})")
        if isinstance(d, BS):
            if d.mode_a == d.mode_b:
                issue(d.span, "beam splitter needs two distinct modes")
            if not 0.0 <= d.R.value <= 1.0:
                issue(d.span, f"reflectivity {d.R} outside [0, 1]")
        elif isinstance(d, CheckpointDecl):
            if d.label in labels:
                issue(d.span, f"duplicate checkpoint label {d.label!r}")
            labels.setdefault(d.label, d.span)
        elif isinstance(d, Detector):
            if d.label in ports:
                issue(d.span, f"duplicate detector label {d.label!r}")
            ports.setdefault(d.label, d.span)
        elif isinstance(d, Source):
            sources.append(d)
    if not sources:
        issue(None, "missing 'source' statement")
    for extra in sources[1:]:
        issue(extra.span, "duplicate 'source' statement")
    if not ports:
        issue(None, "missing 'detector' statement")
    if issues:
        raise SemanticError(issues)


def parse(text: str) -> CircuitDoc:
    """Parse ``.ifz`` text; raises :class:`ParseError` on the first syntax error,
    then :class:`SemanticError` listing every semantic issue."""
    decls: list[Statement] = []
    lines = text.splitlines() or [""]
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        line = _Line(lineno, body)
        if not line.tokens:
            continue
        stmt = _statement(line)
        if not decls and not isinstance(stmt, Modes):
            raise ParseError(lineno, stmt.span.column, "file must start with 'modes N'",
                             line.tokens[0][0])
        decls.append(stmt)
    if not decls:
        raise ParseError(len(lines), 1, "empty circuit; expected 'modes N'")
    _validate(decls, len(lines))
    return CircuitDoc(tuple(decls))


def parse_bytes(data: bytes) -> CircuitDoc:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        head = data[: exc.start]
        line = head.count(b"\n") + 1
        column = exc.start - (head.rfind(b"\n") + 1) + 1
        raise ParseError(line, column, "input is not valid UTF-8") from None
    return parse(text)


def serialize(doc: CircuitDoc) -> str:
    """Canonical text: one statement per line, single spaces, comments dropped."""
    return "".join(f"{d}\n" for d in doc.declarations)


def lower(doc: CircuitDoc, bindings: Mapping[str, float] | None = None) -> Network:
    bindings = bindings or {}
    stages = []
    source = None
    ports: dict[str, int] = {}
    for d in doc.declarations[1:]:
        if isinstance(d, BS):
            stages.append(BeamSplitter(d.mode_a, d.mode_b, d.R.value))
        elif isinstance(d, Phase):
            if isinstance(d.value, str):
                if d.value not in bindings:
                    raise UnboundParameter(d.value, d.span)
                phi = float(bindings[d.value])
            else:
                phi = d.value.value
            stages.append(PhaseShift(d.mode, phi))
        elif isinstance(d, CheckpointDecl):
            stages.append(Checkpoint(d.mode, d.label))
        elif isinstance(d, Source):
            source = d.mode
        elif isinstance(d, Detector):
            ports[d.label] = d.mode
    return Network(doc.mode_count, tuple(stages), source, ports)


def load(path) -> CircuitDoc:
    with open(path, "rb") as fh:
        return parse_bytes(fh.read())


def reference_text() -> str:
    """Text of the shipped ``three_path.ifz`` reference circuit."""
    return resources.files("wtrace.data").joinpath("three_path.ifz").read_text(encoding="utf-8")
