"""Membership tests for the tractable CNF families."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .cmpsat import CmpSatForm, NotRecognized, recognize_cmp_sat, recognize_smp_sat
from .cnf import Cnf, XorConstraint, expand_xor
from .solvers import solve_2sat

__all__ = [
    "ClassificationReport",
    "classify",
    "is_2sat",
    "is_horn",
    "horn_renaming",
    "xor_grouping",
]


def is_2sat(cnf: Cnf) -> bool:
    return all(len(c) <= 2 for c in cnf.clauses)


def is_horn(cnf: Cnf) -> bool:
    return all(sum(lit > 0 for lit in c) <= 1 for c in cnf.clauses)


def horn_renaming(cnf: Cnf) -> frozenset[int] | None:
    """Variables whose flip makes ``cnf`` Horn, or None if no flip set works.

    For every pair of literals in a clause, at most one may end up positive.
    With f_v meaning "flip v", literal v stays positive iff not f_v and -v
    becomes positive iff f_v, so the requirement for the pair (l1, l2) is
    exactly the 2-clause (l1 or l2) over the flip variables.
    """
    pairs = [pair for c in cnf.clauses for pair in combinations(c, 2)]
    r = solve_2sat(Cnf(cnf.num_vars, tuple(pairs)))
    if not r.sat:
        return None
    return frozenset(v for v, b in r.assignment.items() if b)


def xor_grouping(cnf: Cnf) -> list[XorConstraint] | None:
    """Parity constraints whose expansions are exactly the clause groups."""
    groups: dict[frozenset[int], set[frozenset[int]]] = {}
    order: list[frozenset[int]] = []
    for c in cnf.clauses:
        key = frozenset(abs(lit) for lit in c)
        if key not in groups:
            groups[key] = set()
            order.append(key)
        groups[key].add(frozenset(c))
    out = []
    for key in order:
        sample = next(iter(groups[key]))
        negs = sum(lit < 0 for lit in sample)
        x = XorConstraint(tuple(sorted(key)), negs % 2 == 0)
        if {frozenset(c) for c in expand_xor(x)} != groups[key]:
            return None
        out.append(x)
    return out


@dataclass(frozen=True)
class ClassificationReport:
    is_2sat: bool
    is_horn: bool
    is_renamable_horn: bool
    is_xor_expansion: bool
    is_cmp_sat_canonical: bool
    is_smp_sat_canonical: bool
    renaming: frozenset[int] | None = None
    xor_constraints: tuple[XorConstraint, ...] | None = None
    cmp_form: CmpSatForm | NotRecognized | None = None
    smp_form: CmpSatForm | NotRecognized | None = None

    def flags(self) -> dict[str, bool]:
        return {
            "2sat": self.is_2sat,
            "horn": self.is_horn,
            "renamable_horn": self.is_renamable_horn,
            "xor_expansion": self.is_xor_expansion,
            "cmp_sat_canonical": self.is_cmp_sat_canonical,
            "smp_sat_canonical": self.is_smp_sat_canonical,
        }


def classify(cnf: Cnf) -> ClassificationReport:
    ren = horn_renaming(cnf)
    xors = xor_grouping(cnf)
    cmp_form = recognize_cmp_sat(cnf)
    smp_form = recognize_smp_sat(cnf)
    return ClassificationReport(
        is_2sat=is_2sat(cnf),
        is_horn=is_horn(cnf),
        is_renamable_horn=ren is not None,
        is_xor_expansion=xors is not None,
        is_cmp_sat_canonical=isinstance(cmp_form, CmpSatForm),
        is_smp_sat_canonical=isinstance(smp_form, CmpSatForm),
        renaming=ren,
        xor_constraints=tuple(xors) if xors is not None else None,
        cmp_form=cmp_form,
        smp_form=smp_form,
    )
