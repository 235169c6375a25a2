"""CNF formulas, DIMACS reading and writing, and parity constraints.

Literals are nonzero ints in the DIMACS convention: ``v`` is variable ``v``
and ``-v`` its negation.  Variables are 1-based.  A formula may carry a name
for each variable; DIMACS output records names as ``c var <i> <name>``
comments so they survive a round trip.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from itertools import combinations, product

__all__ = [
    "Literal",
    "Cnf",
    "XorConstraint",
    "ParseError",
    "HeaderMismatch",
    "TautologyPresent",
    "parse_dimacs",
    "emit_dimacs",
    "parse_xor_dimacs",
    "emit_xor_dimacs",
    "expand_at_most_one",
    "expand_xor",
    "evaluate",
]

Clause = tuple[int, ...]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class HeaderMismatch(ParseError):
    pass


class TautologyPresent(ValueError):
    """A clause contains both a variable and its negation."""


@dataclass(frozen=True)
class Literal:
    variable: int
    positive: bool = True

    @classmethod
    def of(cls, lit: int) -> Literal:
        return cls(abs(lit), lit > 0)

    def __int__(self) -> int:
        return self.variable if self.positive else -self.variable

    def __neg__(self) -> Literal:
        return Literal(self.variable, not self.positive)


def _dedupe(clause: Iterable[int]) -> Clause:
    return tuple(dict.fromkeys(clause))


def _is_tautology(clause: Clause) -> bool:
    s = set(clause)
    return any(-lit in s for lit in s)


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[Clause, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")
        if self.names is not None:
            if len(self.names) != self.num_vars or len(set(self.names)) != self.num_vars:
                raise ValueError("names must be one distinct name per variable")

    @classmethod
    def of(cls, clauses: Iterable[Iterable[int]], num_vars: int | None = None,
           names: Sequence[str] | None = None) -> Cnf:
        cl = tuple(_dedupe(c) for c in clauses)
        if num_vars is None:
            num_vars = max((abs(lit) for c in cl for lit in c), default=0)
            if names is not None:
                num_vars = max(num_vars, len(names))
        return cls(num_vars, cl, tuple(names) if names is not None else None)

    @classmethod
    def from_names(cls, clauses: Iterable[Iterable[str]]) -> Cnf:
        """Build from clauses of names, ``-x`` or ``~x`` meaning negation.

        >>> Cnf.from_names([["a", "-b"]]).clauses
        ((1, -2),)
        """
        index: dict[str, int] = {}
        out = []
        for c in clauses:
            row = []
            for tok in c:
                neg = tok[:1] in ("-", "~", "¬")
                name = tok[1:] if neg else tok
                v = index.setdefault(name, len(index) + 1)
                row.append(-v if neg else v)
            out.append(row)
        return cls.of(out, len(index), list(index))

    def name(self, var: int) -> str:
        return self.names[var - 1] if self.names else f"x{var}"

    def var(self, name: str) -> int:
        if self.names:
            return self.names.index(name) + 1
        m = re.fullmatch(r"x(\d+)", name)
        if not m or not 1 <= int(m.group(1)) <= self.num_vars:
            raise KeyError(name)
        return int(m.group(1))

    def lit_str(self, lit: int) -> str:
        return ("-" if lit < 0 else "") + self.name(abs(lit))

    def named_clauses(self) -> list[list[str]]:
        return [[self.lit_str(lit) for lit in c] for c in self.clauses]

    def evaluate(self, assignment: Mapping[int, bool]) -> bool:
        return evaluate(self.clauses, assignment)

    def named_assignment(self, assignment: Mapping[int, bool]) -> dict[str, bool]:
        return {self.name(v): val for v, val in sorted(assignment.items())}

    def from_named_assignment(self, named: Mapping[str, bool]) -> dict[int, bool]:
        return {self.var(k): v for k, v in named.items()}

    def has_tautology(self) -> bool:
        return any(_is_tautology(c) for c in self.clauses)

    def without_tautologies(self) -> Cnf:
        return Cnf(self.num_vars, tuple(c for c in self.clauses if not _is_tautology(c)), self.names)

    def __str__(self) -> str:
        return " & ".join("(" + " | ".join(self.lit_str(lit) for lit in c) + ")" for c in self.clauses)


def evaluate(clauses: Iterable[Clause], assignment: Mapping[int, bool]) -> bool:
    """Missing variables count as False."""
    return all(any(assignment.get(abs(lit), False) == (lit > 0) for lit in c) for c in clauses)


_VAR_COMMENT = re.compile(r"c\s+var\s+(\d+)\s+(\S+)\s*$")


def _read_header(text: str) -> tuple[int, int, int, dict[int, str], list[tuple[int, str]]]:
    header = None
    names: dict[int, str] = {}
    body: list[tuple[int, str]] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            m = _VAR_COMMENT.match(line)
            if m:
                names[int(m.group(1))] = m.group(2)
            continue
        if line.startswith("p"):
            if header is not None:
                raise ParseError("duplicate problem line", ln, 1)
            parts = line.split()
            if len(parts) != 4 or parts[1] not in ("cnf", "xor"):
                raise ParseError("expected 'p cnf <vars> <clauses>'", ln, 1)
            try:
                nv, nc = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("non-integer counts in problem line", ln, 1) from None
            if nv < 0 or nc < 0:
                raise ParseError("negative counts in problem line", ln, 1)
            header = (ln, nv, nc)
            continue
        if header is None:
            raise ParseError("clause before problem line", ln, 1)
        body.append((ln, raw))
    if header is None:
        raise ParseError("missing problem line 'p cnf <vars> <clauses>'")
    return header[0], header[1], header[2], names, body


def _parse_clauses(body, nv: int, xor_ok: bool):
    clauses: list[tuple[bool, list[int]]] = []
    cur: list[int] = []
    cur_xor = False
    last = (0, 0)
    for ln, raw in body:
        for m in re.finditer(r"\S+", raw):
            tok, col = m.group(), m.start() + 1
            last = (ln, col)
            if tok == "x" and not cur:
                if not xor_ok:
                    raise ParseError("XOR line in plain CNF input", ln, col)
                cur_xor = True
                continue
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"unexpected token {tok!r}", ln, col) from None
            if lit == 0:
                clauses.append((cur_xor, cur))
                cur, cur_xor = [], False
            elif abs(lit) > nv:
                raise ParseError(f"literal {lit} exceeds declared {nv} variables", ln, col)
            else:
                cur.append(lit)
    if cur or cur_xor:
        raise ParseError("last clause is not terminated by 0", *last)
    return clauses


def parse_dimacs(text: str, tautologies: str = "reject") -> Cnf:
    """Parse DIMACS CNF.

    ``tautologies`` is ``"reject"`` (raise :class:`TautologyPresent`) or
    ``"strip"`` (drop such clauses; the header count refers to the input).
    """
    if tautologies not in ("reject", "strip"):
        raise ValueError("tautologies must be 'reject' or 'strip'")
    hl, nv, nc, names, body = _read_header(text)
    raw = _parse_clauses(body, nv, xor_ok=False)
    if len(raw) != nc:
        raise HeaderMismatch(f"header declares {nc} clauses, found {len(raw)}", hl, 1)
    clauses = []
    for _, c in raw:
        c = _dedupe(c)
        if _is_tautology(c):
            if tautologies == "reject":
                raise TautologyPresent(f"tautological clause {list(c)}")
            continue
        clauses.append(c)
    name_tuple = None
    if names and set(names) == set(range(1, nv + 1)) and len(set(names.values())) == nv:
        name_tuple = tuple(names[i] for i in range(1, nv + 1))
    return Cnf(nv, tuple(clauses), name_tuple)


def emit_dimacs(cnf: Cnf) -> str:
    lines = []
    if cnf.names:
        lines += [f"c var {i} {n}" for i, n in enumerate(cnf.names, 1)]
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    lines += [" ".join(map(str, c)) + " 0" for c in cnf.clauses]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parity constraints


@dataclass(frozen=True)
class XorConstraint:
    """``sum(variables) == parity`` over GF(2); negations already folded."""

    variables: tuple[int, ...]
    parity: bool

    @classmethod
    def from_literals(cls, lits: Iterable[int]) -> XorConstraint:
        """XOR of the literals equals 1."""
        parity = True
        seen: dict[int, None] = {}
        for lit in lits:
            if lit < 0:
                parity = not parity
            v = abs(lit)
            if v in seen:
                del seen[v]  # x + x = 0
            else:
                seen[v] = None
        return cls(tuple(seen), parity)

    def holds(self, assignment: Mapping[int, bool]) -> bool:
        return sum(assignment.get(v, False) for v in self.variables) % 2 == int(self.parity)


def parse_xor_dimacs(text: str) -> tuple[int, list[Clause], list[XorConstraint]]:
    """DIMACS with ``x``-prefixed lines read as parity constraints.

    Returns ``(num_vars, ordinary clauses, xor constraints)``; the header
    counts both kinds together.
    """
    hl, nv, nc, _, body = _read_header(text)
    raw = _parse_clauses(body, nv, xor_ok=True)
    if len(raw) != nc:
        raise HeaderMismatch(f"header declares {nc} clauses, found {len(raw)}", hl, 1)
    plain = [_dedupe(c) for is_x, c in raw if not is_x]
    xors = [XorConstraint.from_literals(c) for is_x, c in raw if is_x]
    return nv, plain, xors


def emit_xor_dimacs(num_vars: int, xors: Sequence[XorConstraint]) -> str:
    lines = [f"p cnf {num_vars} {len(xors)}"]
    for x in xors:
        lits = list(x.variables)
        if not x.parity and lits:
            lits[0] = -lits[0]
        lines.append("x " + " ".join(map(str, lits)) + " 0")
    return "\n".join(lines) + "\n"


def expand_at_most_one(group: Sequence) -> list[tuple]:
    """All pairwise 'not both' clauses over ``group``.

    Works on ints (returns negated int pairs) or names (returns ``-name``).
    """
    def neg(v):
        return -v if isinstance(v, int) else f"-{v}"
    return [(neg(a), neg(b)) for a, b in combinations(group, 2)]


def expand_xor(x: XorConstraint) -> list[Clause]:
    """The 2^(k-1) clauses ruling out each assignment of the wrong parity."""
    out = []
    for bits in product((False, True), repeat=len(x.variables)):
        if sum(bits) % 2 != int(x.parity):
            out.append(tuple(-v if b else v for v, b in zip(x.variables, bits)))
    return out
