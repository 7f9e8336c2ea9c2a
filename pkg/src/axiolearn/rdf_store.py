"""In-memory RDF triple store with indexed class/instance queries.

Supported input is N-Triples plus a Turtle subset (prefix directives, the
``a`` keyword, predicate-object lists with ``;`` and ``,``, plain and typed
literals).  Collections, anonymous blank nodes and multi-line literals are
out of scope.  IRIs are expanded at parse time and compared byte-exactly;
no percent decoding is applied.

A Dataset is immutable after construction: concurrent readers need no
synchronization (internal closure caches are idempotent).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_SUBCLASS_OF = "http://www.w3.org/2000/01/rdf-schema#subClassOf"
OWL_CLASS = "http://www.w3.org/2002/07/owl#Class"
OWL_DISJOINT_WITH = "http://www.w3.org/2002/07/owl#disjointWith"
XSD = "http://www.w3.org/2001/XMLSchema#"

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_PNAME_LOCAL_RE = re.compile(r"[A-Za-z0-9_\-.%À-￿]*")
_BNODE_LABEL_RE = re.compile(r"[A-Za-z0-9_\-.]+")


class ParseError(ValueError):
    """Syntax or prefix error; carries the 1-based input line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, slots=True)
class Literal:
    """An RDF literal.  Stored verbatim; never joins class/instance indexes."""

    lexical: str
    datatype: str | None = None
    lang: str | None = None


class Triple(NamedTuple):
    subject: str  # IRI or blank node id ("_:" prefix)
    predicate: str  # always an IRI
    object: str | Literal


def is_blank(term) -> bool:
    return isinstance(term, str) and term.startswith("_:")


def is_iri(term) -> bool:
    return isinstance(term, str) and not term.startswith("_:")


def _check_iri(value: str, line: int) -> str:
    if not value:
        raise ParseError("empty IRI", line)
    if any(c.isspace() for c in value):
        raise ParseError(f"whitespace in IRI <{value}>", line)
    if not _SCHEME_RE.match(value):
        raise ParseError(f"relative IRI <{value}>", line)
    return value


# --- tokenizer -------------------------------------------------------------

_PUNCT = {".": "DOT", ";": "SEMI", ",": "COMMA"}

_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


class _Scanner:
    """Character scanner producing (kind, value, line) tokens."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1

    def error(self, message: str):
        raise ParseError(message, self.line)

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _advance(self) -> str:
        c = self.text[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
        return c

    def _skip_ws(self):
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self._advance()
            elif c == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self.pos += 1
            else:
                return

    def tokens(self):
        while True:
            self._skip_ws()
            if self.pos >= len(self.text):
                yield ("EOF", "", self.line)
                return
            line = self.line
            c = self._peek()
            if c == "<":
                yield ("IRI", self._read_iriref(), line)
            elif c == '"':
                yield ("STRING", self._read_string(), line)
            elif c in _PUNCT:
                self._advance()
                yield (_PUNCT[c], c, line)
            elif c == "^":
                self._advance()
                if self._peek() != "^":
                    self.error("expected '^^'")
                self._advance()
                yield ("DTSEP", "^^", line)
            elif c == "@":
                self._advance()
                word = self._read_word()
                if word == "prefix":
                    yield ("PREFIX_DIRECTIVE", "@prefix", line)
                elif word == "base":
                    self.error("@base is not supported (relative IRIs are rejected)")
                else:
                    yield ("LANGTAG", word, line)
            elif c == "_" and self.text[self.pos : self.pos + 2] == "_:":
                self.pos += 2
                m = _BNODE_LABEL_RE.match(self.text, self.pos)
                if not m:
                    self.error("bad blank node label")
                self.pos = m.end()
                yield ("BNODE", "_:" + m.group(0), line)
            elif c.isdigit() or (c in "+-" and self.text[self.pos + 1 : self.pos + 2].isdigit()):
                yield ("NUMBER", self._read_number(), line)
            else:
                word_start = self.pos
                word = self._read_word()
                if not word and self._peek() != ":":
                    self.error(f"unexpected character {c!r}")
                if self._peek() == ":":
                    self._advance()
                    m = _PNAME_LOCAL_RE.match(self.text, self.pos)
                    local = m.group(0)
                    self.pos = m.end()
                    # a trailing '.' belongs to the statement terminator
                    while local.endswith("."):
                        local = local[:-1]
                        self.pos -= 1
                    yield ("PNAME", (word, local), line)
                elif word == "a":
                    yield ("A", "a", line)
                elif word in ("true", "false"):
                    yield ("BOOLEAN", word, line)
                elif word.upper() == "PREFIX":
                    yield ("PREFIX_DIRECTIVE", "PREFIX", line)
                else:
                    self.pos = word_start
                    self.error(f"unexpected token {word!r}")

    def _read_word(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] in "_-"
        ):
            self.pos += 1
        return self.text[start : self.pos]

    def _read_iriref(self) -> str:
        self._advance()  # '<'
        chars = []
        while True:
            if self.pos >= len(self.text):
                self.error("unterminated IRI")
            c = self._advance()
            if c == ">":
                return "".join(chars)
            if c == "\n":
                self.error("newline inside IRI")
            chars.append(c)

    def _read_string(self) -> str:
        self._advance()  # opening quote
        chars = []
        while True:
            if self.pos >= len(self.text):
                self.error("unterminated string literal")
            c = self._advance()
            if c == '"':
                return "".join(chars)
            if c == "\n":
                self.error("newline inside string literal")
            if c == "\\":
                e = self._advance()
                if e in _ESCAPES:
                    chars.append(_ESCAPES[e])
                elif e == "u":
                    chars.append(self._read_hex(4))
                elif e == "U":
                    chars.append(self._read_hex(8))
                else:
                    self.error(f"bad escape '\\{e}'")
            else:
                chars.append(c)

    def _read_hex(self, width: int) -> str:
        digits = self.text[self.pos : self.pos + width]
        if len(digits) < width:
            self.error("truncated unicode escape")
        try:
            code = int(digits, 16)
        except ValueError:
            self.error(f"bad unicode escape {digits!r}")
        self.pos += width
        return chr(code)

    def _read_number(self) -> str:
        start = self.pos
        if self._peek() in "+-":
            self._advance()
        while self._peek().isdigit():
            self._advance()
        if self._peek() == "." and self.text[self.pos + 1 : self.pos + 2].isdigit():
            self._advance()
            while self._peek().isdigit():
                self._advance()
        return self.text[start : self.pos]


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, turtle: bool):
        self.scanner = _Scanner(text)
        self.tokens = self.scanner.tokens()
        self.turtle = turtle
        self.prefixes: dict[str, str] = {}
        self.current = next(self.tokens)

    def _advance(self):
        self.current = next(self.tokens)

    def _expect(self, kind: str):
        tok = self.current
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2])
        self._advance()
        return tok

    def parse(self) -> list[Triple]:
        triples: list[Triple] = []
        while self.current[0] != "EOF":
            if self.current[0] == "PREFIX_DIRECTIVE":
                self._directive()
            else:
                self._statement(triples)
        return triples

    def _directive(self):
        if not self.turtle:
            raise ParseError("prefix directives are not allowed in N-Triples", self.current[2])
        sparql_style = self.current[1] == "PREFIX"
        self._advance()
        tok = self.current
        if tok[0] != "PNAME" or tok[1][1] != "":
            raise ParseError("expected prefix name ending in ':'", tok[2])
        prefix = tok[1][0]
        self._advance()
        iri_tok = self._expect("IRI")
        self.prefixes[prefix] = _check_iri(iri_tok[1], iri_tok[2])
        if not sparql_style:
            self._expect("DOT")

    def _statement(self, triples: list[Triple]):
        subject = self._term(position="subject")
        while True:
            predicate = self._term(position="predicate")
            while True:
                obj = self._term(position="object")
                triples.append(Triple(subject, predicate, obj))
                if self.current[0] == "COMMA":
                    if not self.turtle:
                        raise ParseError("',' lists are not allowed in N-Triples", self.current[2])
                    self._advance()
                    continue
                break
            if self.current[0] == "SEMI":
                if not self.turtle:
                    raise ParseError("';' lists are not allowed in N-Triples", self.current[2])
                self._advance()
                if self.current[0] == "DOT":  # tolerate trailing ';'
                    break
                continue
            break
        self._expect("DOT")

    def _term(self, position: str):
        kind, value, line = self.current
        if kind == "IRI":
            self._advance()
            return _check_iri(value, line)
        if kind == "PNAME":
            if not self.turtle:
                raise ParseError("prefixed names are not allowed in N-Triples", line)
            prefix, local = value
            if prefix not in self.prefixes:
                raise ParseError(f"unknown prefix '{prefix}:'", line)
            self._advance()
            return self.prefixes[prefix] + local
        if kind == "A":
            if not self.turtle:
                raise ParseError("'a' keyword is not allowed in N-Triples", line)
            if position != "predicate":
                raise ParseError("'a' is only valid as a predicate", line)
            self._advance()
            return RDF_TYPE
        if kind == "BNODE":
            if position == "predicate":
                raise ParseError("blank node cannot be a predicate", line)
            self._advance()
            return value
        if kind == "STRING":
            if position != "object":
                raise ParseError("literal is only valid as an object", line)
            self._advance()
            return self._literal_tail(value)
        if kind in ("NUMBER", "BOOLEAN"):
            if not self.turtle:
                raise ParseError("bare literals are not allowed in N-Triples", line)
            if position != "object":
                raise ParseError("literal is only valid as an object", line)
            self._advance()
            if kind == "BOOLEAN":
                return Literal(value, datatype=XSD + "boolean")
            dt = "decimal" if "." in value else "integer"
            return Literal(value, datatype=XSD + dt)
        raise ParseError(f"unexpected {value!r} as {position}", line)

    def _literal_tail(self, lexical: str) -> Literal:
        kind, value, line = self.current
        if kind == "LANGTAG":
            self._advance()
            return Literal(lexical, lang=value)
        if kind == "DTSEP":
            self._advance()
            dt = self._term(position="datatype-iri")
            if not isinstance(dt, str) or is_blank(dt):
                raise ParseError("datatype must be an IRI", line)
            return Literal(lexical, datatype=dt)
        return Literal(lexical)


# --- dataset ---------------------------------------------------------------


class Dataset:
    """Deduplicated triples plus the indexes the scoring pipeline queries.

    type_index maps individual -> asserted classes; rev_type_index is its
    exact inverse.  subclass_edges and disjoint_edges hold (sub, sup) /
    (left, right) IRI pairs with blank-node endpoints and reflexive pairs
    filtered out.
    """

    __slots__ = (
        "triples",
        "class_set",
        "type_index",
        "rev_type_index",
        "subclass_edges",
        "disjoint_edges",
        "_children",
        "_parents",
        "_desc_cache",
        "_anc_cache",
    )

    def __init__(self, triples: Iterable[Triple]):
        self.triples = frozenset(triples)
        type_index: dict[str, set[str]] = {}
        rev: dict[str, set[str]] = {}
        class_set: set[str] = set()
        subclass: set[tuple[str, str]] = set()
        disjoint: set[tuple[str, str]] = set()

        for s, p, o in self.triples:
            if p == RDF_TYPE and is_iri(o):
                type_index.setdefault(s, set()).add(o)
                rev.setdefault(o, set()).add(s)
                if o == OWL_CLASS and is_iri(s):
                    class_set.add(s)
            elif p == RDFS_SUBCLASS_OF and is_iri(s) and is_iri(o) and s != o:
                subclass.add((s, o))
            elif p == OWL_DISJOINT_WITH and is_iri(s) and is_iri(o) and s != o:
                disjoint.add((s, o))

        for a, b in subclass | disjoint:
            class_set.add(a)
            class_set.add(b)

        self.type_index = {k: frozenset(v) for k, v in type_index.items()}
        self.rev_type_index = {k: frozenset(v) for k, v in rev.items()}
        self.class_set = frozenset(class_set)
        self.subclass_edges = frozenset(subclass)
        self.disjoint_edges = frozenset(disjoint)

        children: dict[str, set[str]] = {}
        parents: dict[str, set[str]] = {}
        for sub, sup in self.subclass_edges:
            children.setdefault(sup, set()).add(sub)
            parents.setdefault(sub, set()).add(sup)
        self._children = children
        self._parents = parents
        self._desc_cache: dict[str, frozenset[str]] = {}
        self._anc_cache: dict[str, frozenset[str]] = {}

    def __eq__(self, other):
        return isinstance(other, Dataset) and self.triples == other.triples

    def __repr__(self):
        return (
            f"Dataset({len(self.triples)} triples, {len(self.class_set)} classes, "
            f"{len(self.type_index)} individuals)"
        )

    @property
    def individuals(self) -> frozenset[str]:
        return frozenset(self.type_index)

    def classes(self) -> frozenset[str]:
        """Explicitly typed owl:Class IRIs plus all axiom-edge endpoints."""
        return self.class_set

    def _closure(self, c: str, adjacency: dict, cache: dict) -> frozenset[str]:
        hit = cache.get(c)
        if hit is not None:
            return hit
        seen = {c}
        stack = [c]
        while stack:
            for nxt in adjacency.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        result = frozenset(seen)
        cache[c] = result
        return result

    def subclasses_of(self, c: str) -> frozenset[str]:
        """Transitive subclasses of c, including c itself."""
        return self._closure(c, self._children, self._desc_cache)

    def superclasses_of(self, c: str) -> frozenset[str]:
        """Transitive superclasses of c, including c itself."""
        return self._closure(c, self._parents, self._anc_cache)

    def instances_of(self, c: str, inferred: bool = False) -> frozenset[str]:
        """Individuals typed c; with inferred=True, typed any subclass of c."""
        if not inferred:
            return self.rev_type_index.get(c, frozenset())
        out: set[str] = set()
        for sub in self.subclasses_of(c):
            out.update(self.rev_type_index.get(sub, ()))
        return frozenset(out)

    def to_ntriples(self) -> str:
        """Deterministic N-Triples serialization (sorted lines)."""
        return "".join(line + "\n" for line in sorted(map(_nt_line, self.triples)))


def _nt_term(term) -> str:
    if isinstance(term, Literal):
        escaped = (
            term.lexical.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\r", "\\r")
            .replace("\t", "\\t")
        )
        if term.lang:
            return f'"{escaped}"@{term.lang}'
        if term.datatype:
            return f'"{escaped}"^^<{term.datatype}>'
        return f'"{escaped}"'
    if is_blank(term):
        return term
    return f"<{term}>"


def _nt_line(t: Triple) -> str:
    return f"{_nt_term(t.subject)} {_nt_term(t.predicate)} {_nt_term(t.object)} ."


def parse_triples(source, format: str = "ntriples") -> Dataset:
    """Parse N-Triples or the Turtle subset into a Dataset.

    source may be a string or a readable text stream.  Raises ParseError
    with a line number on syntax errors, unknown prefixes, or relative IRIs.
    """
    if hasattr(source, "read"):
        source = source.read()
    if format not in ("ntriples", "turtle"):
        raise ValueError(f"unknown format {format!r} (expected 'ntriples' or 'turtle')")
    parser = _Parser(source, turtle=(format == "turtle"))
    return Dataset(parser.parse())


def parse_file(path) -> Dataset:
    """Parse a .nt or .ttl file (UTF-8), dispatching on the extension."""
    name = str(path)
    if name.endswith(".nt"):
        fmt = "ntriples"
    elif name.endswith(".ttl"):
        fmt = "turtle"
    else:
        raise ValueError(f"cannot infer RDF format from file name {name!r} (.nt or .ttl)")
    with open(path, encoding="utf-8") as f:
        return parse_triples(f, format=fmt)
