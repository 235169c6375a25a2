"""Instance-to-instance translations.

* CNF to FMP, with solution pull-back.
* CMP to CNF (positive clause per girl plus pairwise at-most-one clauses).
* Long clauses to 3-literal clauses through bridge variables.
* The two FMP normal forms, with solution pull-back.
* Tripartite matching to an FMP whose fractions are all one half.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    FmpInstance,
    FmpSolution,
    Fragment,
    Tradeoff,
    TradeoffSet,
    check_solution,
    free_elements,
)
from .satkit.cmpsat import CmpSatForm
from .satkit.cnf import Cnf, TautologyPresent, expand_at_most_one

__all__ = [
    "VarOccurrenceProfile",
    "SatFmpTrace",
    "InfeasibleSolution",
    "NotInFirstNormalForm",
    "TautologyPresent",
    "NormalFormTrace",
    "TripartiteInstance",
    "sat_to_fmp",
    "pull_back_assignment",
    "cmp_to_sat",
    "expand_at_most_one",
    "to_3cnf",
    "first_normal_form",
    "second_normal_form",
    "tripartite_to_fmp",
    "FreshNames",
]

HALF = Fraction(1, 2)


class InfeasibleSolution(ValueError):
    pass


class NotInFirstNormalForm(ValueError):
    pass


# --------------------------------------------------------------------------
# SAT -> FMP


@dataclass(frozen=True)
class VarOccurrenceProfile:
    variable: int
    k: int  # positive occurrences
    l: int  # negative occurrences

    @property
    def m(self) -> int:
        return max(self.k, self.l)


@dataclass(frozen=True)
class SatFmpTrace:
    """Forward maps of the CNF-to-FMP construction."""

    cnf: Cnf
    instance: FmpInstance
    clause_girl: tuple[str, ...]
    literal_of: Mapping[tuple[str, int], int]  # (girl, tradeoff index) -> literal
    var_elements: Mapping[int, tuple[str, tuple[str, ...]]]  # var -> (element, auxiliaries)
    profiles: Mapping[int, VarOccurrenceProfile]


def _aux(name: str, i: int) -> str:
    return f"{name}.aux.{i}"


def sat_to_fmp(cnf: Cnf) -> tuple[FmpInstance, SatFmpTrace]:
    """One tradeoff set per clause, one tradeoff per literal.

    With k positive and l negative occurrences of x and M = max(k, l), the
    i-th positive occurrence becomes {1/(M+1) x, M/(M+1) x.aux.i} and every
    negative occurrence becomes {1/M x.aux.1, ..., 1/M x.aux.M}.
    """
    clauses = [tuple(dict.fromkeys(c)) for c in cnf.clauses]
    for i, c in enumerate(clauses):
        if any(-lit in c for lit in c):
            raise TautologyPresent(f"clause {i + 1} contains a variable and its negation")
    k = Counter(lit for c in clauses for lit in c if lit > 0)
    l = Counter(-lit for c in clauses for lit in c if lit < 0)
    profiles = {
        v: VarOccurrenceProfile(v, k[v], l[v]) for v in range(1, cnf.num_vars + 1) if k[v] + l[v]
    }
    var_elements = {
        v: (cnf.name(v), tuple(_aux(cnf.name(v), i) for i in range(1, p.m + 1)))
        for v, p in profiles.items()
    }
    used = Counter()
    sets = []
    literal_of: dict[tuple[str, int], int] = {}
    girls = []
    for ci, c in enumerate(clauses):
        girl = f"g{ci + 1}"
        girls.append(girl)
        ts = []
        for ti, lit in enumerate(c):
            v = abs(lit)
            m = profiles[v].m
            elem, aux = var_elements[v]
            if lit > 0:
                used[v] += 1
                t = Tradeoff((
                    Fragment(elem, Fraction(1, m + 1)),
                    Fragment(aux[used[v] - 1], Fraction(m, m + 1)),
                ))
            else:
                t = Tradeoff(tuple(Fragment(a, Fraction(1, m)) for a in aux))
            ts.append(t)
            literal_of[(girl, ti)] = lit
        sets.append(TradeoffSet(girl, tuple(ts)))
    mentioned: dict[str, None] = {}
    for ts in sets:
        for t in ts.tradeoffs:
            for f in t.fragments:
                mentioned.setdefault(f.element)
    inst = FmpInstance(tuple(mentioned), tuple(sets))
    trace = SatFmpTrace(cnf, inst, tuple(girls), literal_of, var_elements, profiles)
    return inst, trace


def pull_back_assignment(trace: SatFmpTrace, sol: FmpSolution) -> dict[int, bool]:
    """A variable is True iff one of its positive-literal tradeoffs is chosen."""
    if not check_solution(trace.instance, sol).feasible:
        raise InfeasibleSolution("solution overloads an element")
    true = set()
    for girl in trace.clause_girl:
        lit = trace.literal_of[(girl, sol.choice[girl])]
        if lit > 0:
            true.add(lit)
    return {v: v in true for v in range(1, trace.cnf.num_vars + 1)}


# --------------------------------------------------------------------------
# CMP -> SAT


@dataclass(frozen=True)
class CmpSatTrace:
    """Variable ``v`` stands for (element, girl)."""

    var_meaning: Mapping[int, tuple[str, str]]


def cmp_to_sat(cmp: Mapping[str, Iterable[str]]) -> tuple[Cnf, CmpSatForm, CmpSatTrace]:
    """Variables are named ``<element>.<girl>``; one positive clause per girl
    in girl order, then the pairwise clauses of each element shared by two
    or more girls (elements in order of first appearance)."""
    names: list[str] = []
    index: dict[tuple[str, str], int] = {}
    positive = []
    users: dict[str, list[int]] = {}
    for g, els in cmp.items():
        row = []
        for e in dict.fromkeys(els):
            key = (e, g)
            if key not in index:
                names.append(f"{e}.{g}")
                index[key] = len(names)
            v = index[key]
            row.append(v)
            users.setdefault(e, []).append(v)
        positive.append(tuple(row))
    if len(set(names)) != len(names):
        raise ValueError("element/girl names collide after joining with '.'")
    groups = [tuple(vs) for vs in users.values() if len(vs) >= 2]
    clauses = list(positive)
    for grp in groups:
        clauses += expand_at_most_one(grp)
    cnf = Cnf(len(names), tuple(tuple(c) for c in clauses), tuple(names))
    form = CmpSatForm(cnf.num_vars, cnf.names, tuple(positive), tuple(groups), source=cnf)
    return cnf, form, CmpSatTrace({v: k for k, v in index.items()})


# --------------------------------------------------------------------------
# long clauses -> 3-literal clauses


def to_3cnf(cnf: Cnf) -> tuple[Cnf, tuple[int, ...]]:
    """(l1 | l2 | X1)(-X1 | l3 | X2)...(-Xk | l_{n-1} | l_n) for each long clause."""
    names = list(cnf.names) if cnf.names else [f"x{v}" for v in range(1, cnf.num_vars + 1)]
    taken = set(names)
    counter = 0

    def fresh() -> int:
        nonlocal counter
        while True:
            counter += 1
            n = f"bridge{counter}"
            if n not in taken:
                taken.add(n)
                names.append(n)
                return len(names)

    out = []
    bridges = []
    for c in cnf.clauses:
        if len(c) <= 3:
            out.append(c)
            continue
        rest = list(c)
        x = fresh()
        bridges.append(x)
        out.append((rest[0], rest[1], x))
        rest = rest[2:]
        while len(rest) > 2:
            y = fresh()
            bridges.append(y)
            out.append((-x, rest[0], y))
            x = y
            rest = rest[1:]
        out.append((-x, rest[0], rest[1]))
    keep_names = cnf.names is not None or bridges
    return Cnf(len(names), tuple(out), tuple(names) if keep_names else None), tuple(bridges)


# --------------------------------------------------------------------------
# normal forms


class FreshNames:
    """Continues the instance's dominant ``<prefix><number>`` naming."""

    def __init__(self, existing: Iterable[str], default_prefix: str = "n"):
        names = list(dict.fromkeys(existing))
        self.taken = set(names)
        pat = re.compile(r"^([A-Za-z_]+)(\d+)$")
        counts: Counter[str] = Counter()
        top: dict[str, int] = {}
        order: dict[str, int] = {}
        for name in names:
            m = pat.match(name)
            if m:
                p, n = m.group(1), int(m.group(2))
                counts[p] += 1
                top[p] = max(top.get(p, 0), n)
                order.setdefault(p, len(order))
        if counts:
            self.prefix = max(counts, key=lambda p: (counts[p], -order[p]))
            self.next = top[self.prefix] + 1
        else:
            self.prefix, self.next = default_prefix, 1

    def __call__(self) -> str:
        while f"{self.prefix}{self.next}" in self.taken:
            self.next += 1
        name = f"{self.prefix}{self.next}"
        self.taken.add(name)
        self.next += 1
        return name


class _Girls:
    def __init__(self, existing: Iterable[str]):
        self.taken = set(existing)

    def __call__(self, base: str) -> str:
        i = 1
        while f"{base}.{i}" in self.taken:
            i += 1
        name = f"{base}.{i}"
        self.taken.add(name)
        return name


def _integral(e: str) -> Tradeoff:
    return Tradeoff((Fragment(e, Fraction(1)),))


Home = tuple[str, int]


@dataclass(frozen=True)
class _Expansion:
    """How one source set maps into output sets.

    ``homes[i]`` is where source tradeoff i lives; a source tradeoff counts
    as chosen when every listed (girl, index) is chosen.  ``None`` never
    matches.  ``fallback`` is picked when none qualifies.
    """

    homes: tuple[tuple[Home, ...] | None, ...]
    fallback: int | None = None


@dataclass(frozen=True)
class NormalFormTrace:
    source: FmpInstance
    result: FmpInstance
    expansions: Mapping[str, _Expansion]
    fresh_elements: tuple[str, ...] = ()
    fresh_girls: tuple[str, ...] = ()

    def pull_back(self, sol: FmpSolution) -> FmpSolution:
        choice = {}
        for ts in self.source.sets:
            if not ts.tradeoffs:
                continue
            exp = self.expansions[ts.girl]
            pick = next(
                (
                    i
                    for i, hs in enumerate(exp.homes)
                    if hs is not None and all(sol.choice[g] == ix for g, ix in hs)
                ),
                exp.fallback,
            )
            if pick is None:
                raise InfeasibleSolution(f"no source tradeoff of {ts.girl} is chosen")
            choice[ts.girl] = pick
        return FmpSolution(choice)


def _split(
    girl: str,
    items: list[tuple[Tradeoff, int | None]],
    fresh: FreshNames,
    gname: _Girls,
    out: list[TradeoffSet],
    homes: dict[int, Home],
    elems: list[str],
) -> None:
    """Emit sets of at most three tradeoffs sharing fresh elements.

    ``items`` pairs each tradeoff with the source index it stands for.
    """
    if len(items) <= 3:
        name = gname(girl)
        for pos, (_, src) in enumerate(items):
            if src is not None:
                homes[src] = (name, pos)
        out.append(TradeoffSet(name, tuple(t for t, _ in items)))
        return
    half = len(items) // 2
    link = fresh()
    elems.append(link)
    _split(girl, items[:half] + [(_integral(link), None)], fresh, gname, out, homes, elems)
    _split(girl, items[half:] + [(_integral(link), None)], fresh, gname, out, homes, elems)


def _nf1_set(
    ts: TradeoffSet, fresh: FreshNames, gname: _Girls, elems: list[str]
) -> tuple[list[TradeoffSet], _Expansion]:
    if not ts.tradeoffs or (len(ts.tradeoffs) <= 3 and all(t.integral for t in ts.tradeoffs)):
        return [ts], _Expansion(tuple(((ts.girl, i),) for i in range(len(ts.tradeoffs))))
    out: list[TradeoffSet] = []
    homes: dict[int, Home] = {}
    items: list[tuple[Tradeoff, int | None]] = []
    extra: dict[int, Home] = {}
    for i, t in enumerate(ts.tradeoffs):
        if t.integral:
            items.append((t, i))
        else:
            f = fresh()
            elems.append(f)
            name = gname(ts.girl)
            out.append(TradeoffSet(name, (t, _integral(f))))
            extra[i] = (name, 0)
            items.append((_integral(f), None))
    _split(ts.girl, items, fresh, gname, out, homes, elems)
    homes.update(extra)
    return out, _Expansion(tuple((homes[i],) for i in range(len(ts.tradeoffs))))


def first_normal_form(inst: FmpInstance) -> tuple[FmpInstance, NormalFormTrace]:
    """At most three tradeoffs per set; every fractional tradeoff isolated.

    A fractional tradeoff t becomes the set {t, {f}} for a fresh f, and the
    source set keeps {f} in its place.  Sets with more than three tradeoffs
    are halved recursively, the halves sharing a fresh element.  Sets of at
    most three integral tradeoffs pass through unchanged.
    """
    fresh = FreshNames(inst.elements)
    gname = _Girls(inst.girls)
    elems: list[str] = []
    out: list[TradeoffSet] = []
    expansions: dict[str, _Expansion] = {}
    for ts in inst.sets:
        new, exp = _nf1_set(ts, fresh, gname, elems)
        out += new
        expansions[ts.girl] = exp
    result = FmpInstance(tuple(inst.elements) + tuple(elems), tuple(out), inst.canonical)
    new_girls = tuple(g for g in result.girls if g not in set(inst.girls))
    return result, NormalFormTrace(inst, result, expansions, tuple(elems), new_girls)


def _nf1_shape(ts: TradeoffSet) -> str:
    """'integral', 'fractional' ({t_frac, {b}}) or 'bad'."""
    if len(ts.tradeoffs) > 3:
        return "bad"
    frac = [t for t in ts.tradeoffs if not t.integral]
    if not frac:
        return "integral"
    if len(ts.tradeoffs) == 2 and len(frac) == 1:
        return "fractional"
    return "bad"


def second_normal_form(inst: FmpInstance) -> tuple[FmpInstance, NormalFormTrace]:
    """Fractional tradeoffs become {p b, (1-p) c} with c free.

    A set {{p1 b1, ..., pN bN}, {b}} becomes the N sets
    {{pi bi, (1-pi) ci}, {1/N b, (N-1)/N di}} with fresh ci, di, after which
    the fractional tradeoffs are isolated again as in the first normal form.
    Sets whose fractional tradeoff already has two fragments, one of them
    free, are kept (the free fragment is moved second).
    """
    free = free_elements(inst)
    fresh = FreshNames(inst.elements)
    gname = _Girls(inst.girls)
    elems: list[str] = []
    out: list[TradeoffSet] = []
    expansions: dict[str, _Expansion] = {}
    for ts in inst.sets:
        shape = _nf1_shape(ts)
        if shape == "bad":
            raise NotInFirstNormalForm(f"set {ts.girl} is not in first normal form")
        if shape == "integral":
            out.append(ts)
            expansions[ts.girl] = _Expansion(tuple(((ts.girl, i),) for i in range(len(ts.tradeoffs))))
            continue
        fi = next(i for i, t in enumerate(ts.tradeoffs) if not t.integral)
        bi = 1 - fi
        t = ts.tradeoffs[fi]
        b = ts.tradeoffs[bi].fragments[0].element
        frs = t.fragments
        if len(frs) == 1:
            # a lone fragment below 1: pad with a fresh free element
            c = fresh()
            elems.append(c)
            frs = (frs[0], Fragment(c, 1 - frs[0].weight))
            t = Tradeoff(frs)
        if len(frs) == 2 and (frs[1].element in free or frs[0].element in free):
            if frs[1].element not in free:
                t = Tradeoff((frs[1], frs[0]))
            new = list(ts.tradeoffs)
            new[fi] = t
            out.append(TradeoffSet(ts.girl, tuple(new)))
            expansions[ts.girl] = _Expansion((((ts.girl, 0),), ((ts.girl, 1),)))
            continue
        n = len(frs)
        first_homes: list[Home] = []
        for f in frs:
            c, d = fresh(), fresh()
            elems += [c, d]
            pair = TradeoffSet(
                ts.girl,
                (
                    Tradeoff((Fragment(f.element, f.weight), Fragment(c, 1 - f.weight))),
                    Tradeoff((Fragment(b, Fraction(1, n)), Fragment(d, Fraction(n - 1, n)))),
                ),
            )
            new_sets, exp = _nf1_set(pair, fresh, gname, elems)
            out += new_sets
            first_homes.append(exp.homes[0][0])
        # t_frac counts as chosen only if every part is; otherwise {b}
        homes: list[tuple[Home, ...] | None] = [None, None]
        homes[fi] = tuple(first_homes)
        expansions[ts.girl] = _Expansion(tuple(homes), fallback=bi)
    result = FmpInstance(tuple(inst.elements) + tuple(elems), tuple(out), inst.canonical)
    new_girls = tuple(g for g in result.girls if g not in set(inst.girls))
    return result, NormalFormTrace(inst, result, expansions, tuple(elems), new_girls)


# --------------------------------------------------------------------------
# tripartite matching -> FMP


@dataclass(frozen=True)
class TripartiteInstance:
    triples: tuple[tuple[str, str, str], ...]

    def __post_init__(self) -> None:
        xs = {x for _, x, _ in self.triples}
        ys = {y for _, _, y in self.triples}
        if xs & ys:
            raise ValueError(f"names used on both element sides: {sorted(xs & ys)}")

    @property
    def girls(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(g for g, _, _ in self.triples))

    @property
    def xs(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(x for _, x, _ in self.triples))

    @property
    def ys(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(y for _, _, y in self.triples))


def tripartite_to_fmp(triples: TripartiteInstance | Sequence[tuple[str, str, str]]) -> FmpInstance:
    """Each triple (g, x, y) becomes {1/2 x, 1/2 y} in g's set; every used x
    and y gets a one-tradeoff guard set {1/2 x, 1/2 z} with a fresh z."""
    tri = triples if isinstance(triples, TripartiteInstance) else TripartiteInstance(tuple(triples))
    sets = []
    for g in tri.girls:
        ts = tuple(
            dict.fromkeys(
                Tradeoff((Fragment(x, HALF), Fragment(y, HALF))) for gg, x, y in tri.triples if gg == g
            )
        )
        sets.append(TradeoffSet(g, ts))
    used = tri.xs + tri.ys
    taken = set(used)
    gnames = set(tri.girls)
    z = 0
    for e in used:
        z += 1
        while f"z{z}" in taken:
            z += 1
        zname = f"z{z}"
        taken.add(zname)
        girl = f"guard.{e}"
        while girl in gnames:
            girl += "'"
        gnames.add(girl)
        sets.append(TradeoffSet(girl, (Tradeoff((Fragment(e, HALF), Fragment(zname, HALF))),)))
    mentioned: dict[str, None] = {}
    for ts in sets:
        for t in ts.tradeoffs:
            for f in t.fragments:
                mentioned.setdefault(f.element)
    return FmpInstance(tuple(mentioned), tuple(sets))
