"""Line-oriented text formats for FMP, SMP and tripartite instances.

Every format starts with a header line; ``#`` starts a comment.

FMP::

    fmp v1                      (``fmp v1 working`` for non-canonical weights)
    elements b1 b2 b3           (optional; fixes element order)
    girl g1: {1 b1} ; {1/2 b2, 1/2 b3}
    girl g2:                    (empty tradeoff set)

SMP::

    smp v1
    girl g1 : b1 b2             (colon present iff the girl submits a list)
    girl g2
    boy b1 : g1

Tripartite::

    tri v1
    triple g1 x1 y1

DIMACS input is recognised by a ``p cnf`` line or leading ``c`` comments.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from fractions import Fraction
from pathlib import Path
from typing import Union

from .core import FmpInstance, Fragment, Tradeoff, TradeoffSet, validate_instance
from .matching import SmpInstance
from .reductions import TripartiteInstance
from .satkit.cnf import Cnf, ParseError, emit_dimacs, parse_dimacs

__all__ = [
    "ParseError",
    "FormatMismatch",
    "Instance",
    "parse_fmp",
    "emit_fmp",
    "parse_smp",
    "emit_smp",
    "parse_tri",
    "emit_tri",
    "detect_format",
    "parse_instance",
    "emit_instance",
    "read_instance",
]

Instance = Union[FmpInstance, Cnf, SmpInstance, TripartiteInstance]

FORMATS = ("fmp", "dimacs", "smp", "tri")

_IDENT = r"[^\s{};,:#]+"
_IDENT_RE = re.compile(_IDENT)
_WEIGHT_RE = re.compile(r"(\d+)(?:/(\d+))?")


class FormatMismatch(ParseError):
    """The header names a different format than the one requested."""


def _lines(text: str) -> Iterator[tuple[int, str, int]]:
    """Yield (line number, content without comment, column offset)."""
    for ln, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        stripped = body.strip()
        if stripped:
            yield ln, stripped, len(body) - len(body.lstrip()) + 1


def _header(text: str, fmt: str) -> tuple[int, list[str], Iterator[tuple[int, str, int]]]:
    it = _lines(text)
    first = next(it, None)
    if first is None:
        raise ParseError(f"empty input; expected '{fmt} v1' header")
    ln, content, col = first
    words = content.split()
    if words[0] != fmt:
        raise FormatMismatch(f"expected '{fmt} v1' header, found {content!r}", ln, col)
    if len(words) < 2 or words[1] != "v1":
        raise ParseError(f"unsupported {fmt} version in {content!r}", ln, col)
    return ln, words[2:], it


# --------------------------------------------------------------------------
# FMP


class _Cursor:
    def __init__(self, text: str, ln: int, col0: int):
        self.text, self.pos, self.ln, self.col0 = text, 0, ln, col0

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.ln, self.col0 + self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def match(self, pattern: re.Pattern, what: str) -> re.Match:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}")
        self.pos = m.end()
        return m


def _weight(cur: _Cursor) -> Fraction:
    start = cur.pos
    m = cur.match(_WEIGHT_RE, "weight 'p/q' or integer")
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        cur.pos = start
        raise cur.error(f"zero denominator in weight {m.group(0)!r}")
    w = Fraction(num, den)
    if not 0 < w <= 1:
        cur.pos = start
        raise cur.error(f"weight {w} outside (0, 1]")
    return w


def _tradeoff(cur: _Cursor) -> Tradeoff:
    cur.expect("{")
    frags: list[Fragment] = []
    seen = set()
    while True:
        w = _weight(cur)
        start = cur.pos
        e = cur.match(_IDENT_RE, "element identifier").group(0)
        if e in seen:
            cur.pos = start
            raise cur.error(f"element {e!r} repeated within a tradeoff")
        seen.add(e)
        frags.append(Fragment(e, w))
        if cur.peek() == ",":
            cur.pos += 1
            continue
        cur.expect("}")
        return Tradeoff(tuple(frags))


def parse_fmp(text: str) -> FmpInstance:
    hl, flags, it = _header(text, "fmp")
    if flags not in ([], ["working"]):
        raise ParseError(f"unknown header flags {flags}", hl, 1)
    canonical = not flags
    declared: list[str] | None = None
    sets: list[TradeoffSet] = []
    girls: set[str] = set()
    for ln, content, col in it:
        word = content.split(maxsplit=1)[0]
        if word == "elements":
            if declared is not None or sets:
                raise ParseError("'elements' must appear once, before any girl", ln, col)
            declared = content.split()[1:]
            if len(set(declared)) != len(declared):
                raise ParseError("duplicate element in 'elements' line", ln, col)
            continue
        if word != "girl":
            raise ParseError(f"expected 'girl' or 'elements', found {word!r}", ln, col)
        cur = _Cursor(content, ln, col)
        cur.pos = len("girl")
        girl = cur.match(_IDENT_RE, "girl identifier").group(0)
        if girl in girls:
            raise cur.error(f"duplicate girl {girl!r}")
        girls.add(girl)
        cur.expect(":")
        ts: list[Tradeoff] = []
        if not cur.at_end():
            ts.append(_tradeoff(cur))
            while not cur.at_end():
                cur.expect(";")
                ts.append(_tradeoff(cur))
        sets.append(TradeoffSet(girl, tuple(ts)))
    mentioned: dict[str, None] = {}
    for s in sets:
        for t in s.tradeoffs:
            for f in t.fragments:
                mentioned.setdefault(f.element)
    if declared is None:
        elements = tuple(mentioned)
    else:
        missing = [e for e in mentioned if e not in set(declared)]
        if missing:
            raise ParseError(f"undeclared elements {missing}")
        elements = tuple(declared)
    inst = FmpInstance(elements, tuple(sets), canonical)
    report = validate_instance(inst)
    if report.errors:
        raise ParseError(f"invalid instance: {report.errors[0]}")
    return inst


def emit_fmp(inst: FmpInstance) -> str:
    lines = ["fmp v1" if inst.canonical else "fmp v1 working"]
    lines.append("elements " + " ".join(inst.elements) if inst.elements else "elements")
    for ts in inst.sets:
        body = " ; ".join(str(t) for t in ts.tradeoffs)
        lines.append(f"girl {ts.girl}: {body}".rstrip())
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# SMP


def parse_smp(text: str) -> SmpInstance:
    hl, flags, it = _header(text, "smp")
    if flags:
        raise ParseError(f"unknown header flags {flags}", hl, 1)
    members: dict[str, list[str]] = {"girl": [], "boy": []}
    lists: dict[str, dict[str, tuple[str, ...]]] = {"girl": {}, "boy": {}}
    pending: list[tuple[int, int, str, str, tuple[str, ...]]] = []
    for ln, content, col in it:
        head, colon, tail = content.partition(":")
        words = head.split()
        if len(words) != 2 or words[0] not in ("girl", "boy"):
            raise ParseError("expected 'girl <id> [: ...]' or 'boy <id> [: ...]'", ln, col)
        kind, name = words
        if not _IDENT_RE.fullmatch(name):
            raise ParseError(f"bad identifier {name!r}", ln, col)
        if name in members[kind]:
            raise ParseError(f"duplicate {kind} {name!r}", ln, col)
        members[kind].append(name)
        if colon:
            entries = tuple(tail.split())
            if len(set(entries)) != len(entries):
                raise ParseError(f"duplicate entry in list of {name!r}", ln, col)
            lists[kind][name] = entries
            pending.append((ln, col, kind, name, entries))
    for ln, col, kind, name, entries in pending:
        other = set(members["boy" if kind == "girl" else "girl"])
        bad = [e for e in entries if e not in other]
        if bad:
            raise ParseError(f"list of {name!r} names undeclared members {bad}", ln, col)
    return SmpInstance(tuple(members["girl"]), tuple(members["boy"]), lists["girl"], lists["boy"])


def emit_smp(smp: SmpInstance) -> str:
    lines = ["smp v1"]
    for kind, names, lists in (("girl", smp.girls, smp.girl_lists), ("boy", smp.boys, smp.boy_lists)):
        for n in names:
            if n in lists:
                lines.append(f"{kind} {n} : {' '.join(lists[n])}".rstrip())
            else:
                lines.append(f"{kind} {n}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# tripartite


def parse_tri(text: str) -> TripartiteInstance:
    hl, flags, it = _header(text, "tri")
    if flags:
        raise ParseError(f"unknown header flags {flags}", hl, 1)
    triples = []
    for ln, content, col in it:
        words = content.split()
        if len(words) != 4 or words[0] != "triple":
            raise ParseError("expected 'triple <g> <x> <y>'", ln, col)
        if not all(_IDENT_RE.fullmatch(w) for w in words[1:]):
            raise ParseError("bad identifier in triple", ln, col)
        triples.append(tuple(words[1:]))
    try:
        return TripartiteInstance(tuple(triples))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def emit_tri(tri: TripartiteInstance) -> str:
    return "\n".join(["tri v1"] + [f"triple {g} {x} {y}" for g, x, y in tri.triples]) + "\n"


# --------------------------------------------------------------------------
# dispatch


def detect_format(text: str) -> str:
    for ln, content, col in _lines(text):
        word = content.split()[0]
        if word in ("fmp", "smp", "tri"):
            return word
        if word in ("p", "c") or content.startswith("p cnf"):
            return "dimacs"
        raise ParseError(f"cannot infer format from {content!r}", ln, col)
    raise ParseError("empty input")


def parse_instance(text: str, fmt: str | None = None) -> Instance:
    """Parse ``text`` as ``fmt``, or infer the format from its header."""
    found = detect_format(text)
    if fmt is None:
        fmt = found
    elif fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    elif fmt != found:
        raise FormatMismatch(f"requested {fmt} input but header says {found}")
    if fmt == "fmp":
        return parse_fmp(text)
    if fmt == "smp":
        return parse_smp(text)
    if fmt == "tri":
        return parse_tri(text)
    return parse_dimacs(text)


def emit_instance(inst: Instance) -> str:
    if isinstance(inst, FmpInstance):
        return emit_fmp(inst)
    if isinstance(inst, SmpInstance):
        return emit_smp(inst)
    if isinstance(inst, TripartiteInstance):
        return emit_tri(inst)
    if isinstance(inst, Cnf):
        return emit_dimacs(inst)
    raise TypeError(f"cannot emit {type(inst).__name__}")


def read_instance(path: str | Path, fmt: str | None = None) -> Instance:
    return parse_instance(Path(path).read_text(), fmt)
