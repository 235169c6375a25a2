"""Recognizing and solving CNF formulas that encode marriage problems.

A CMP-SAT formula consists of all-positive clauses (one per girl, possibly
split into 3-literal pieces by bridge variables) plus "at most one" groups
written as all pairs of negated 2-clauses (one group per boy).  Such a
formula is solved by replacing each group by a representative element and
running bipartite matching.

The SMP-SAT extension also admits all-positive clauses whose variables lie
inside a single group; these become the boys' lists of a symmetric marriage
problem.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass, field

from ..core import HallViolator
from ..matching import SmpInstance, smp_as_two_cmps, solve_cmp, solve_smp
from .cnf import Cnf

__all__ = [
    "BridgeChain",
    "CmpSatForm",
    "NotRecognized",
    "CmpSatResult",
    "recognize_cmp_sat",
    "recognize_smp_sat",
    "solve_cmp_sat",
    "form_to_cmp",
]


@dataclass(frozen=True)
class NotRecognized:
    """Why a formula is outside the family; ``step`` names the failed check."""

    step: str
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class BridgeChain:
    """A long disjunction split by bridge variables.

    ``segments[i]`` are the ordinary literals of the i-th link and
    ``bridges[i]`` joins link i to link i+1.
    """

    bridges: tuple[int, ...]
    segments: tuple[tuple[int, ...], ...]
    clauses: tuple[int, ...]


@dataclass(frozen=True)
class CmpSatForm:
    num_vars: int
    names: tuple[str, ...] | None
    positive_clauses: tuple[tuple[int, ...], ...]
    groups: tuple[tuple[int, ...], ...]
    optional_clauses: tuple[tuple[int, tuple[int, ...]], ...] = ()
    bridges: tuple[BridgeChain, ...] = ()
    dropped: tuple[int, ...] = ()
    phantoms: tuple[int, ...] = ()
    flipped: tuple[int, ...] = ()
    source: Cnf | None = field(default=None, compare=False, repr=False)

    def name(self, v: int) -> str:
        return self.names[v - 1] if self.names else f"x{v}"

    def group_of(self) -> dict[int, int]:
        return {v: j for j, g in enumerate(self.groups) for v in g}


# --------------------------------------------------------------------------
# recognition


def _flip_negative_only(cnf: Cnf) -> tuple[Cnf, tuple[int, ...]]:
    pos = {lit for c in cnf.clauses for lit in c if lit > 0}
    neg = {-lit for c in cnf.clauses for lit in c if lit < 0}
    flips = tuple(sorted(neg - pos))
    fl = set(flips)
    clauses = tuple(tuple(-l if abs(l) in fl else l for l in c) for c in cnf.clauses)
    return Cnf(cnf.num_vars, clauses, cnf.names), flips


@dataclass
class _Parsed:
    merged: list[tuple[int, ...]]
    chains: list[BridgeChain]
    groups: list[tuple[int, ...]]


def _parse(cnf: Cnf) -> _Parsed | NotRecognized:
    nm = cnf.name
    pairs: list[tuple[int, int]] = []
    positive: list[int] = []
    linked: dict[int, int] = {}  # clause -> its single negated variable
    pos_occ: dict[int, list[int]] = {}
    neg_occ: dict[int, list[int]] = {}
    for ci, c in enumerate(cnf.clauses):
        for lit in c:
            (pos_occ if lit > 0 else neg_occ).setdefault(abs(lit), []).append(ci)
        negs = [-lit for lit in c if lit < 0]
        if len(c) == 2 and len(negs) == 2:
            pairs.append((negs[0], negs[1]))
        elif not negs:
            positive.append(ci)
        elif len(negs) == 1:
            linked[ci] = negs[0]
        else:
            return NotRecognized(
                "3", f"clause {ci + 1} is not all-positive, a negated pair, or a bridge link"
            )

    # bridge links: clause with +x  ->  clause with -x
    succ: dict[int, int] = {}
    bridge_of: dict[int, int] = {}
    for ci, x in linked.items():
        if len(pos_occ.get(x, ())) != 1 or len(neg_occ.get(x, ())) != 1:
            return NotRecognized("3", f"negated {nm(x)} in clause {ci + 1} is not a bridge variable")
        pc = pos_occ[x][0]
        if pc == ci:
            return NotRecognized("3", f"clause {ci + 1} is a tautology")
        if pc in succ:
            return NotRecognized("bridge", f"clause {pc + 1} starts two bridge chains")
        succ[pc] = ci
        bridge_of[pc] = x

    merged: list[tuple[int, ...]] = []
    chains: list[BridgeChain] = []
    seen: set[int] = set()
    bridges = set(bridge_of.values())
    for head in positive:
        seq = [head]
        seen.add(head)
        while seq[-1] in succ:
            nxt = succ[seq[-1]]
            if nxt in seen:
                return NotRecognized("bridge", "cyclic bridge chain")
            seen.add(nxt)
            seq.append(nxt)
        segs = tuple(
            tuple(lit for lit in cnf.clauses[ci] if lit > 0 and lit not in bridges) for ci in seq
        )
        merged.append(tuple(dict.fromkeys(v for s in segs for v in s)))
        if len(seq) > 1:
            chains.append(BridgeChain(tuple(bridge_of[ci] for ci in seq[:-1]), segs, tuple(seq)))
    if len(seen) != len(positive) + len(linked):
        return NotRecognized("bridge", "cyclic bridge chain")

    # at-most-one groups: components of the co-negated graph, each a clique
    adj: dict[int, set[int]] = {}
    for a, b in pairs:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    groups: list[tuple[int, ...]] = []
    placed: set[int] = set()
    first = {v: i for i, v in enumerate(adj)}
    for v in adj:
        if v in placed:
            continue
        comp = [v]
        placed.add(v)
        q = deque([v])
        while q:
            u = q.popleft()
            for w in sorted(adj[u], key=first.__getitem__):
                if w not in placed:
                    placed.add(w)
                    comp.append(w)
                    q.append(w)
        for i, a in enumerate(comp):
            for b in comp[i + 1:]:
                if b not in adj[a]:
                    return NotRecognized(
                        "1",
                        f"negated pairs over {{{', '.join(nm(x) for x in comp)}}} miss "
                        f"(-{nm(a)} | -{nm(b)})",
                    )
        groups.append(tuple(comp))
    return _Parsed(merged, chains, groups)


def _finish(
    cnf: Cnf,
    parsed: _Parsed,
    main: list[tuple[int, ...]],
    optional: list[tuple[int, tuple[int, ...]]],
    groups: list[tuple[int, ...]],
    dropped: list[int],
    phantoms: list[int],
    flips: tuple[int, ...],
    source: Cnf,
) -> CmpSatForm | NotRecognized:
    if optional:
        gidx = {v: j for j, g in enumerate(groups) for v in g}
        owner: dict[object, int] = {}
        for j, s in optional:
            sset = set(s)
            girls: list[object] = [i for i, c in enumerate(main) if any(v in sset and gidx.get(v) == j for v in c)]
            girls += [("phantom", v) for v in s if v in phantoms]
            for gl in girls:
                if gl in owner and owner[gl] != j:
                    return NotRecognized(
                        "smp",
                        "an all-positive clause is listed by two constrained groups; "
                        "the translation is only exact when those lists are disjoint",
                    )
                owner[gl] = j
    return CmpSatForm(
        cnf.num_vars,
        cnf.names,
        tuple(main),
        tuple(groups),
        tuple(optional),
        tuple(parsed.chains),
        tuple(dropped),
        tuple(phantoms),
        flips,
        source,
    )


def recognize_cmp_sat(cnf: Cnf, rename_negative_only: bool = False) -> CmpSatForm | NotRecognized:
    """Recover the marriage structure of a canonical encoding.

    Optional clauses (all-positive clauses over exactly one group's
    variables) are accepted and routed through the symmetric solver.
    """
    source = cnf
    flips: tuple[int, ...] = ()
    if rename_negative_only:
        cnf, flips = _flip_negative_only(cnf)
    parsed = _parse(cnf)
    if isinstance(parsed, NotRecognized):
        return parsed
    nm = cnf.name
    gsets = [frozenset(g) for g in parsed.groups]
    main: list[tuple[int, ...]] = []
    optional: list[tuple[int, tuple[int, ...]]] = []
    for c in parsed.merged:
        s = frozenset(c)
        j = next((j for j, g in enumerate(gsets) if len(g) >= 2 and g == s), None)
        if j is None:
            main.append(c)
        else:
            optional.append((j, c))
    if not main:
        return NotRecognized("2", "no all-positive clause")
    where: dict[int, int] = {}
    for i, c in enumerate(main):
        for v in c:
            if v in where:
                return NotRecognized("2", f"{nm(v)} appears in two all-positive clauses")
            where[v] = i
    for g in parsed.groups:
        for v in g:
            if v not in where:
                return NotRecognized("4", f"grouped variable {nm(v)} is in no all-positive clause")
        homes = [where[v] for v in g]
        if len(set(homes)) != len(homes):
            return NotRecognized("4", f"two variables of group {{{', '.join(nm(v) for v in g)}}} share a clause")
    # repeated full-group clauses collapse to one
    merged_opt: dict[int, tuple[int, ...]] = {}
    for j, c in optional:
        merged_opt.setdefault(j, parsed.groups[j])
    opt = sorted(merged_opt.items())
    return _finish(cnf, parsed, main, opt, list(parsed.groups), [], [], flips, source)


def recognize_smp_sat(cnf: Cnf, rename_negative_only: bool = False) -> CmpSatForm | NotRecognized:
    """Like :func:`recognize_cmp_sat`, also accepting clauses over subsets
    of one group.

    Normalizations: several subset clauses of one group are intersected;
    group variables in no all-positive clause are dropped; when a clause
    holds several variables of one group only one is kept (a listed one if
    possible).  Group variables that occur only in subset clauses are
    represented by unlisted phantom girls.
    """
    source = cnf
    flips: tuple[int, ...] = ()
    if rename_negative_only:
        cnf, flips = _flip_negative_only(cnf)
    parsed = _parse(cnf)
    if isinstance(parsed, NotRecognized):
        return parsed
    nm = cnf.name
    gidx = {v: j for j, g in enumerate(parsed.groups) for v in g}
    main: list[tuple[int, ...]] = []
    allowed: dict[int, set[int]] = {}
    for c in parsed.merged:
        js = {gidx.get(v) for v in c}
        if c and len(js) == 1 and None not in js:
            j = js.pop()
            allowed[j] = allowed[j] & set(c) if j in allowed else set(c)
        else:
            main.append(c)
    if not main and not allowed:
        return NotRecognized("2", "no all-positive clause")
    where: dict[int, int] = {}
    for i, c in enumerate(main):
        for v in c:
            if v in where:
                return NotRecognized("2", f"{nm(v)} appears in two all-positive clauses")
            where[v] = i

    dropped: list[int] = []
    # keep one variable per group in each clause
    new_main = []
    for c in main:
        keep: list[int] = []
        chosen: dict[int, int] = {}
        for v in c:
            j = gidx.get(v)
            if j is None:
                keep.append(v)
                continue
            prev = chosen.get(j)
            if prev is None:
                chosen[j] = v
                keep.append(v)
            elif j in allowed and v in allowed[j] and prev not in allowed[j]:
                keep[keep.index(prev)] = v
                chosen[j] = v
                dropped.append(prev)
            else:
                dropped.append(v)
        new_main.append(tuple(keep))
    main = new_main
    in_main = {v for c in main for v in c}

    groups: list[tuple[int, ...]] = []
    phantoms: list[int] = []
    remap: dict[int, int] = {}
    for j, g in enumerate(parsed.groups):
        listed = allowed.get(j, set())
        kept = []
        for v in g:
            if v in dropped:
                continue
            if v in in_main:
                kept.append(v)
            elif v in listed:
                kept.append(v)
                phantoms.append(v)
            elif v not in dropped:
                dropped.append(v)
        if kept or j in allowed:
            remap[j] = len(groups)
            groups.append(tuple(kept))
    optional = [
        (remap[j], tuple(v for v in parsed.groups[j] if v in allowed[j] and v in set(groups[remap[j]])))
        for j in sorted(allowed)
    ]
    return _finish(cnf, parsed, main, optional, groups, dropped, phantoms, flips, source)


# --------------------------------------------------------------------------
# solving


@dataclass(frozen=True)
class CmpSatResult:
    status: str  # "sat" or "unsat"
    assignment: dict[int, bool] | None = None
    violator: HallViolator | None = None
    cmp: dict[str, tuple[str, ...]] | None = None

    @property
    def sat(self) -> bool:
        return self.status == "sat"


def _rep_names(form: CmpSatForm) -> list[str]:
    taken = set(form.names or ())
    out = []
    for j in range(len(form.groups)):
        r = f"R{j + 1}"
        while r in taken:
            r += "'"
        taken.add(r)
        out.append(r)
    return out


def form_to_cmp(form: CmpSatForm) -> tuple[dict[str, tuple[str, ...]], dict[tuple[str, str], int]]:
    """The marriage problem of the main clauses, and (girl, element) -> variable."""
    reps = _rep_names(form)
    gidx = form.group_of()
    cmp: dict[str, tuple[str, ...]] = {}
    back: dict[tuple[str, str], int] = {}
    for i, c in enumerate(form.positive_clauses):
        girl = f"C{i + 1}"
        els = []
        for v in c:
            e = reps[gidx[v]] if v in gidx else form.name(v)
            els.append(e)
            back[(girl, e)] = v
        cmp[girl] = tuple(dict.fromkeys(els))
    return cmp, back


def _complete(form: CmpSatForm, true_vars: set[int]) -> dict[int, bool]:
    a = {v: v in true_vars for v in range(1, form.num_vars + 1)}
    for ch in form.bridges:
        k = next((i for i, s in enumerate(ch.segments) if any(a[v] for v in s)), len(ch.segments) - 1)
        for i, x in enumerate(ch.bridges):
            a[x] = i < k
    for v in form.flipped:
        a[v] = not a[v]
    return a


def solve_cmp_sat(form: CmpSatForm) -> CmpSatResult:
    """Solve via matching; UNSAT carries a Hall violator over clause girls."""
    cmp, back = form_to_cmp(form)
    if not form.optional_clauses:
        r = solve_cmp(cmp)
        if not r.sat:
            return CmpSatResult("unsat", violator=r.violator, cmp=cmp)
        true_vars = {back[(g, e)] for g, e in r.transversal.items()}
    else:
        reps = _rep_names(form)
        gidx = form.group_of()
        girls = list(cmp) + [f"P:{form.name(v)}" for v in form.phantoms]
        boys = list(dict.fromkeys(e for els in cmp.values() for e in els))
        boys += [reps[gidx[v]] for v in form.phantoms if reps[gidx[v]] not in boys]
        boys += [reps[j] for j, _ in form.optional_clauses if reps[j] not in boys]
        boy_lists: dict[str, tuple[str, ...]] = {}
        for j, s in form.optional_clauses:
            sset = set(s)
            lst = [g for g in cmp if any(v in sset for v in form.positive_clauses[int(g[1:]) - 1])]
            lst += [f"P:{form.name(v)}" for v in form.phantoms if v in sset]
            boy_lists[reps[j]] = tuple(lst)
        smp = SmpInstance(tuple(girls), tuple(boys), dict(cmp), boy_lists)
        r = solve_smp(smp)
        if not r.sat:
            cg, cb, _ = smp_as_two_cmps(smp)
            viol = None
            for side in (cg, cb):
                rr = solve_cmp(side)
                if not rr.sat:
                    viol = rr.violator
                    break
            return CmpSatResult("unsat", violator=viol, cmp=cmp)
        true_vars = set()
        phantom_var = {f"P:{form.name(v)}": v for v in form.phantoms}
        for g, e in r.pairing.items():
            true_vars.add(phantom_var[g] if g in phantom_var else back[(g, e)])
    a = _complete(form, true_vars)
    if form.source is not None:
        assert form.source.evaluate(a), "assignment does not satisfy the source formula"
    return CmpSatResult("sat", a, cmp=cmp)


def named(form: CmpSatForm, assignment: Mapping[int, bool]) -> dict[str, bool]:
    return {form.name(v): b for v, b in assignment.items()}
