"""Exact data model for fractional and classical marriage problems.

An FMP instance is a list of tradeoff sets, one per girl.  Each tradeoff is a
bundle of weighted element fragments; a solution picks one tradeoff per girl
and is feasible when no element is loaded beyond unit capacity.  All weights
are :class:`fractions.Fraction` values, so arithmetic is exact throughout.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

__all__ = [
    "Weight",
    "Fragment",
    "Tradeoff",
    "TradeoffSet",
    "FmpInstance",
    "FmpSolution",
    "FeasibilityReport",
    "ValidationIssue",
    "ValidationReport",
    "HallViolator",
    "CmpView",
    "IndexOutOfRange",
    "as_weight",
    "fmp",
    "validate_instance",
    "check_solution",
    "element_loads",
    "as_cmp",
    "cmp_instance",
    "free_elements",
]

Weight = Union[Fraction, int, str]

# girl -> acceptable elements, in declaration order
CmpView = dict[str, tuple[str, ...]]

ONE = Fraction(1)


class IndexOutOfRange(IndexError):
    """A solution picks a tradeoff index that does not exist."""


def as_weight(value: Weight) -> Fraction:
    """Coerce ``value`` to an exact fraction.  Floats are refused."""
    if isinstance(value, float):
        raise TypeError("floating-point weights are not supported")
    if isinstance(value, str):
        num, _, den = value.strip().partition("/")
        if den and int(den) == 0:
            raise ZeroDivisionError(f"zero denominator in weight {value!r}")
    return Fraction(value)


@dataclass(frozen=True)
class Fragment:
    element: str
    weight: Fraction

    @property
    def integral(self) -> bool:
        return self.weight == ONE

    def __str__(self) -> str:
        return f"{self.weight} {self.element}"


@dataclass(frozen=True)
class Tradeoff:
    fragments: tuple[Fragment, ...]

    @classmethod
    def of(cls, parts: Mapping[str, Weight] | Iterable[tuple[str, Weight]]) -> Tradeoff:
        items = parts.items() if isinstance(parts, Mapping) else parts
        return cls(tuple(Fragment(e, as_weight(w)) for e, w in items))

    @property
    def elements(self) -> tuple[str, ...]:
        return tuple(f.element for f in self.fragments)

    @property
    def total(self) -> Fraction:
        return sum((f.weight for f in self.fragments), Fraction(0))

    @property
    def integral(self) -> bool:
        """A single whole element."""
        return len(self.fragments) == 1 and self.fragments[0].weight == ONE

    def weight_of(self, element: str) -> Fraction:
        return sum((f.weight for f in self.fragments if f.element == element), Fraction(0))

    def __str__(self) -> str:
        return "{" + ", ".join(str(f) for f in self.fragments) + "}"


@dataclass(frozen=True)
class TradeoffSet:
    girl: str
    tradeoffs: tuple[Tradeoff, ...]


@dataclass(frozen=True)
class FmpInstance:
    """The triple (girls, elements, tradeoff sets).

    ``canonical`` selects the weight regime: canonical tradeoffs sum to
    exactly 1, working tradeoffs (produced by the rewrite engine) may sum to
    less or more.
    """

    elements: tuple[str, ...]
    sets: tuple[TradeoffSet, ...]
    canonical: bool = True

    @property
    def girls(self) -> tuple[str, ...]:
        return tuple(s.girl for s in self.sets)

    def tradeoff_set(self, girl: str) -> TradeoffSet:
        for s in self.sets:
            if s.girl == girl:
                return s
        raise KeyError(girl)

    def fragments(self) -> Iterable[tuple[int, int, Fragment]]:
        """Yield ``(set index, tradeoff index, fragment)`` for every fragment."""
        for si, ts in enumerate(self.sets):
            for ti, t in enumerate(ts.tradeoffs):
                for f in t.fragments:
                    yield si, ti, f

    def mentioned_elements(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for _, _, f in self.fragments():
            seen.setdefault(f.element)
        return tuple(seen)

    def total_weights(self) -> dict[str, Fraction]:
        totals = {e: Fraction(0) for e in self.elements}
        for _, _, f in self.fragments():
            totals[f.element] = totals.get(f.element, Fraction(0)) + f.weight
        return totals

    def with_sets(self, sets: Iterable[TradeoffSet], canonical: bool | None = None) -> FmpInstance:
        """Copy with new sets; the element list is recomputed from mentions."""
        sets = tuple(sets)
        mentioned: dict[str, None] = {}
        for ts in sets:
            for t in ts.tradeoffs:
                for f in t.fragments:
                    mentioned.setdefault(f.element)
        kept = [e for e in self.elements if e in mentioned]
        kept_set = set(kept)
        kept += [e for e in mentioned if e not in kept_set]
        return FmpInstance(
            tuple(kept), sets, self.canonical if canonical is None else canonical
        )

    def fragment_count(self) -> int:
        return sum(1 for _ in self.fragments())

    def __str__(self) -> str:
        lines = []
        for ts in self.sets:
            lines.append(f"{ts.girl}: " + "; ".join(str(t) for t in ts.tradeoffs))
        return "\n".join(lines)


def fmp(
    spec: Mapping[str, Sequence[Mapping[str, Weight]]],
    elements: Sequence[str] | None = None,
    canonical: bool = True,
) -> FmpInstance:
    """Build an instance from ``{girl: [{element: weight, ...}, ...]}``.

    >>> inst = fmp({"g1": [{"b1": 1}, {"b2": "1/2", "b3": "1/2"}]})
    >>> inst.elements
    ('b1', 'b2', 'b3')
    """
    sets = tuple(
        TradeoffSet(girl, tuple(Tradeoff.of(t) for t in tradeoffs))
        for girl, tradeoffs in spec.items()
    )
    if elements is None:
        seen: dict[str, None] = {}
        for ts in sets:
            for t in ts.tradeoffs:
                for e in t.elements:
                    seen.setdefault(e)
        elements = tuple(seen)
    return FmpInstance(tuple(elements), sets, canonical)


@dataclass(frozen=True)
class FmpSolution:
    choice: Mapping[str, int]

    def chosen(self, inst: FmpInstance) -> dict[str, Tradeoff]:
        out = {}
        for ts in inst.sets:
            if not ts.tradeoffs:
                continue
            idx = self.choice[ts.girl]
            if not 0 <= idx < len(ts.tradeoffs):
                raise IndexOutOfRange(
                    f"girl {ts.girl!r} picks tradeoff {idx} of {len(ts.tradeoffs)}"
                )
            out[ts.girl] = ts.tradeoffs[idx]
        return out


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message} [{self.code}]"


@dataclass
class ValidationReport:
    errors: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


def validate_instance(inst: FmpInstance) -> ValidationReport:
    """Report every structural problem in ``inst``.

    Errors: duplicate girls or declared elements, undeclared elements,
    weights outside (0, 1], repeated elements inside one tradeoff, and (for
    canonical instances) tradeoffs whose weights do not sum to 1.  Warnings:
    declared but unused elements, and empty tradeoff sets (which encode an
    unsatisfiable girl).
    """
    report = ValidationReport()
    err = report.errors.append
    warn = report.warnings.append

    seen_girls: set[str] = set()
    for ts in inst.sets:
        if ts.girl in seen_girls:
            err(ValidationIssue("duplicate-girl", ts.girl, "girl declared twice"))
        seen_girls.add(ts.girl)

    declared: set[str] = set()
    for e in inst.elements:
        if e in declared:
            err(ValidationIssue("duplicate-element", e, "element declared twice"))
        declared.add(e)

    used: set[str] = set()
    for ts in inst.sets:
        if not ts.tradeoffs:
            warn(ValidationIssue("empty-set", ts.girl, "empty tradeoff set (unsatisfiable girl)"))
        for ti, t in enumerate(ts.tradeoffs):
            loc = f"{ts.girl}[{ti}]"
            if not t.fragments:
                err(ValidationIssue("empty-tradeoff", loc, "tradeoff has no fragments"))
                continue
            names = [f.element for f in t.fragments]
            for e in sorted({n for n in names if names.count(n) > 1}):
                err(ValidationIssue("repeated-element", loc, f"element {e} appears twice"))
            for f in t.fragments:
                used.add(f.element)
                if f.element not in declared:
                    err(ValidationIssue("undeclared-element", loc, f"element {f.element} not declared"))
                if not 0 < f.weight <= 1:
                    err(ValidationIssue("weight-range", loc, f"weight {f.weight} of {f.element} outside (0, 1]"))
            if inst.canonical and t.total != 1:
                err(ValidationIssue("weight-sum", loc, f"weights sum to {t.total} != 1"))

    for e in inst.elements:
        if e not in used:
            warn(ValidationIssue("unused-element", e, "declared element is never mentioned"))
    return report


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    loads: dict[str, Fraction]
    overloaded: dict[str, Fraction]
    unsatisfiable: tuple[str, ...] = ()


def element_loads(inst: FmpInstance, sol: FmpSolution) -> dict[str, Fraction]:
    loads = {e: Fraction(0) for e in inst.elements}
    for t in sol.chosen(inst).values():
        for f in t.fragments:
            loads[f.element] = loads.get(f.element, Fraction(0)) + f.weight
    return loads


def check_solution(inst: FmpInstance, sol: FmpSolution) -> FeasibilityReport:
    """Feasible iff every element's total chosen weight is at most 1.

    Girls with an empty tradeoff set can never be satisfied; they are listed
    in ``unsatisfiable`` and make every solution infeasible.
    """
    empty = tuple(ts.girl for ts in inst.sets if not ts.tradeoffs)
    loads = element_loads(inst, sol)
    over = {e: w for e, w in loads.items() if w > 1}
    return FeasibilityReport(not over and not empty, loads, over, empty)


@dataclass(frozen=True)
class HallViolator:
    """Girls whose combined acceptable elements are fewer than the girls."""

    girls: frozenset[str]
    elements: frozenset[str]

    def verify(self, cmp: Mapping[str, Iterable[str]]) -> bool:
        if not self.girls <= cmp.keys():
            return False
        union = frozenset(e for g in self.girls for e in cmp[g])
        return union == self.elements and len(self.girls) > len(self.elements)


def as_cmp(inst: FmpInstance) -> CmpView | None:
    """The classical view, or None when some tradeoff is not a whole element."""
    view: CmpView = {}
    for ts in inst.sets:
        if not all(t.integral for t in ts.tradeoffs):
            return None
        view[ts.girl] = tuple(dict.fromkeys(t.fragments[0].element for t in ts.tradeoffs))
    return view


def cmp_instance(cmp: Mapping[str, Iterable[str]]) -> FmpInstance:
    """Embed a classical instance as an FMP with integral tradeoffs."""
    return fmp({g: [{e: 1} for e in dict.fromkeys(els)] for g, els in cmp.items()})


def free_elements(inst: FmpInstance) -> set[str]:
    """Elements whose total fragment weight over the whole instance is <= 1."""
    return {e for e, w in inst.total_weights().items() if w <= 1}
