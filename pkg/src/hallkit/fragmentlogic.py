"""Fragment Logic: rewrite rules R1 to R7 over working FMP instances.

Working instances (``canonical=False``) may hold tradeoffs whose weights sum
to less or more than 1; only the unit capacity of each element matters.
Every rule maps an instance to an equisatisfiable one with fewer fragments,
or with as many fragments but fewer non-integral ones.

Rule summary (sites are found by :func:`find_applicable_sites`):

R1  drop every fragment of an element whose total weight is at most 1; a
    tradeoff left empty satisfies its girl, so her set is dropped.
R2  a closed group of pairwise conflicting tradeoffs (no two fit together,
    no element used outside the group) becomes copies of {1 e1}.
R3  an element whose fragments split into k >= 1 highs (> 1/2) and l >= 2
    lows (<= 1/l), every high-low pair overloading it: highs become 1,
    lows 1/N with N = l.
R4  a set {{e1}, {e2}} whose elements occur elsewhere only integrally: drop
    the set and rename e2 to e1.
R5  a clique of pair sets {{1/N ei}, {1/N ej}} whose elements occur
    elsewhere only integrally: drop the pair sets and rename all to e1.
R6  sets {{p e}, t} and {{p' e'}, t'} where e and e' occur elsewhere only
    together and always with overload: merge into {{p e}, t + t'}.
R7  sets {..., {p e, ...}} and {..., {p' e, ...}} with p + p' > 1 and no
    other occurrence of the fragments' elements: merge the remaining
    tradeoffs into one set.
"""

from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations

from .core import CmpView, FmpInstance, Fragment, Tradeoff, TradeoffSet, as_cmp
from .formats import emit_fmp
from .reductions import first_normal_form, second_normal_form

__all__ = [
    "RULES",
    "DRIVER_ORDER",
    "RewriteSite",
    "InstanceDelta",
    "RewriteStep",
    "RewriteTrace",
    "ReductionOutcome",
    "AsetState",
    "StaleSite",
    "TraceMismatch",
    "find_applicable_sites",
    "apply_rule",
    "apply_delta",
    "fragment_reduce",
    "replay_trace",
    "instance_hash",
    "progress_metric",
]

RULES = ("R1", "R2", "R3", "R4", "R5", "R6", "R7")
DRIVER_ORDER = ("R1", "R4", "R2", "R7", "R5", "R3")
ONE = Fraction(1)
HALF = Fraction(1, 2)

Loc = tuple[int, int]  # (set index, tradeoff index)


class StaleSite(ValueError):
    """The site no longer satisfies its rule's precondition."""


class TraceMismatch(ValueError):
    """Replaying a trace does not reproduce the recorded states."""


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class RewriteSite:
    rule: str
    sets: tuple[int, ...] = ()
    tradeoffs: tuple[Loc, ...] = ()
    elements: tuple[str, ...] = ()
    n: int | None = None

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "sets": list(self.sets),
            "tradeoffs": [list(t) for t in self.tradeoffs],
            "elements": list(self.elements),
            "n": self.n,
        }

    @classmethod
    def from_json(cls, d: Mapping) -> RewriteSite:
        return cls(
            d["rule"],
            tuple(d.get("sets", ())),
            tuple(tuple(t) for t in d.get("tradeoffs", ())),
            tuple(d.get("elements", ())),
            d.get("n"),
        )


def _set_json(ts: TradeoffSet) -> dict:
    return {
        "girl": ts.girl,
        "tradeoffs": [[[str(f.weight), f.element] for f in t.fragments] for t in ts.tradeoffs],
    }


def _set_from_json(d: Mapping) -> TradeoffSet:
    return TradeoffSet(
        d["girl"],
        tuple(Tradeoff(tuple(Fragment(e, Fraction(w)) for w, e in t)) for t in d["tradeoffs"]),
    )


@dataclass(frozen=True)
class InstanceDelta:
    """Enough to rebuild the next instance from the previous one."""

    girls: tuple[str, ...]
    upserts: tuple[TradeoffSet, ...]
    elements: tuple[str, ...]
    canonical: bool
    merges: tuple[tuple[str, str], ...] = ()

    @classmethod
    def between(cls, before: FmpInstance, after: FmpInstance,
                merges: Iterable[tuple[str, str]] = ()) -> InstanceDelta:
        old = {ts.girl: ts for ts in before.sets}
        ups = tuple(ts for ts in after.sets if old.get(ts.girl) != ts)
        return cls(after.girls, ups, after.elements, after.canonical, tuple(merges))

    def to_json(self) -> dict:
        return {
            "girls": list(self.girls),
            "upserts": [_set_json(ts) for ts in self.upserts],
            "elements": list(self.elements),
            "canonical": self.canonical,
            "merges": [list(m) for m in self.merges],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> InstanceDelta:
        return cls(
            tuple(d["girls"]),
            tuple(_set_from_json(s) for s in d["upserts"]),
            tuple(d["elements"]),
            bool(d["canonical"]),
            tuple(tuple(m) for m in d.get("merges", ())),
        )


def apply_delta(inst: FmpInstance, delta: InstanceDelta) -> FmpInstance:
    old = {ts.girl: ts for ts in inst.sets}
    new = {ts.girl: ts for ts in delta.upserts}
    try:
        sets = tuple(new[g] if g in new else old[g] for g in delta.girls)
    except KeyError as exc:
        raise TraceMismatch(f"delta refers to unknown girl {exc.args[0]!r}") from None
    return FmpInstance(delta.elements, sets, delta.canonical)


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    site: RewriteSite | None
    before_hash: str
    after_hash: str
    delta: InstanceDelta

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "site": self.site.to_json() if self.site else None,
            "before-hash": self.before_hash,
            "after-hash": self.after_hash,
            "delta": self.delta.to_json(),
        }

    @classmethod
    def from_json(cls, d: Mapping) -> RewriteStep:
        return cls(
            d["rule"],
            RewriteSite.from_json(d["site"]) if d.get("site") else None,
            d["before-hash"],
            d["after-hash"],
            InstanceDelta.from_json(d["delta"]),
        )


@dataclass(frozen=True)
class RewriteTrace:
    steps: tuple[RewriteStep, ...] = ()

    @property
    def merges(self) -> dict[str, str]:
        """Each merged-away element mapped to its final representative."""
        parent: dict[str, str] = {}
        for step in self.steps:
            for old, new in step.delta.merges:
                parent[old] = new

        def root(e: str) -> str:
            while e in parent:
                e = parent[e]
            return e

        return {e: root(e) for e in parent}

    @property
    def rules(self) -> tuple[str, ...]:
        return tuple(s.rule for s in self.steps)

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> RewriteTrace:
        return cls(tuple(RewriteStep.from_json(d) for d in data))

    @classmethod
    def loads(cls, text: str) -> RewriteTrace:
        return cls.from_json(json.loads(text))


@dataclass(frozen=True)
class AsetState:
    """Whether every tradeoff holds exactly one fragment."""

    flag: bool

    @classmethod
    def of(cls, inst: FmpInstance) -> AsetState:
        return cls(all(len(t.fragments) == 1 for ts in inst.sets for t in ts.tradeoffs))


@dataclass(frozen=True)
class ReductionOutcome:
    kind: str  # "all-integral" or "fixpoint"
    cmp: CmpView | None
    residual: FmpInstance

    @property
    def all_integral(self) -> bool:
        return self.kind == "all-integral"


def instance_hash(inst: FmpInstance) -> str:
    return hashlib.sha256(emit_fmp(inst).encode()).hexdigest()


def progress_metric(inst: FmpInstance) -> tuple[int, int]:
    """(fragment count, non-integral fragment count); rules decrease it."""
    frags = list(f for _, _, f in inst.fragments())
    return len(frags), sum(1 for f in frags if f.weight != ONE)


# --------------------------------------------------------------------------
# helpers


def _occurrences(inst: FmpInstance) -> dict[str, list[tuple[int, int, Fraction]]]:
    occ: dict[str, list[tuple[int, int, Fraction]]] = defaultdict(list)
    for si, ts in enumerate(inst.sets):
        for ti, t in enumerate(ts.tradeoffs):
            for f in t.fragments:
                occ[f.element].append((si, ti, f.weight))
    return occ


def _element_order(inst: FmpInstance) -> dict[str, int]:
    order = {e: i for i, e in enumerate(inst.elements)}
    for e in inst.mentioned_elements():
        order.setdefault(e, len(order))
    return order


def _rebuild(inst: FmpInstance, sets: Iterable[TradeoffSet]) -> FmpInstance:
    return inst.with_sets(sets, canonical=False)


def _rename(t: Tradeoff, mapping: Mapping[str, str]) -> Tradeoff:
    return Tradeoff(tuple(Fragment(mapping.get(f.element, f.element), f.weight) for f in t.fragments))


def _single(t: Tradeoff) -> Fragment | None:
    return t.fragments[0] if len(t.fragments) == 1 else None


def _conflict(a: Tradeoff, b: Tradeoff) -> bool:
    wb = {f.element: f.weight for f in b.fragments}
    return any(f.element in wb and f.weight + wb[f.element] > 1 for f in a.fragments)


# --------------------------------------------------------------------------
# site finders


def _sites_r1(inst: FmpInstance) -> list[RewriteSite]:
    occ = _occurrences(inst)
    out = []
    for e, lst in occ.items():
        if sum(w for _, _, w in lst) <= 1:
            out.append((lst[0][0], lst[0][1], e))
    out.sort(key=lambda x: (x[0], x[1]))
    return [RewriteSite("R1", sets=tuple(sorted({si for si, _, _ in occ[e]})), elements=(e,)) for _, _, e in out]


def _sites_r2(inst: FmpInstance) -> list[RewriteSite]:
    occ = _occurrences(inst)
    order = _element_order(inst)
    seen: set[Loc] = set()
    out = []
    for si, ts in enumerate(inst.sets):
        for ti in range(len(ts.tradeoffs)):
            if (si, ti) in seen:
                continue
            comp: list[Loc] = []
            elems: set[str] = set()
            stack = [(si, ti)]
            seen.add((si, ti))
            while stack:
                loc = stack.pop()
                comp.append(loc)
                for f in inst.sets[loc[0]].tradeoffs[loc[1]].fragments:
                    if f.element in elems:
                        continue
                    elems.add(f.element)
                    for a, b, _ in occ[f.element]:
                        if (a, b) not in seen:
                            seen.add((a, b))
                            stack.append((a, b))
            if len(comp) < 2 or not elems:
                continue
            comp.sort()
            ts_list = [inst.sets[a].tradeoffs[b] for a, b in comp]
            if not all(_conflict(x, y) for x, y in combinations(ts_list, 2)):
                continue
            e1 = min(elems, key=order.__getitem__)
            target = Tradeoff((Fragment(e1, ONE),))
            if all(t == target for t in ts_list):
                continue
            out.append(RewriteSite(
                "R2",
                sets=tuple(sorted({a for a, _ in comp})),
                tradeoffs=tuple(comp),
                elements=(e1,) + tuple(sorted(elems - {e1}, key=order.__getitem__)),
            ))
    out.sort(key=lambda s: s.tradeoffs[0])
    return out


def _r3_split(weights: Sequence[Fraction]) -> tuple[list[Fraction], list[Fraction]] | None:
    highs = [w for w in weights if w > HALF]
    lows = [w for w in weights if w <= HALF]
    l = len(lows)
    if not highs or l < 2:
        return None
    if any(w > Fraction(1, l) for w in lows):
        return None
    if min(highs) + min(lows) <= 1:
        return None
    return highs, lows


def _sites_r3(inst: FmpInstance) -> list[RewriteSite]:
    out = []
    for e, lst in _occurrences(inst).items():
        split = _r3_split([w for _, _, w in lst])
        if split is None or all(w == ONE for w in split[0]):
            continue
        out.append((lst[0][0], lst[0][1], RewriteSite(
            "R3", sets=tuple(sorted({si for si, _, _ in lst})), elements=(e,), n=len(split[1]),
        )))
    out.sort(key=lambda x: (x[0], x[1]))
    return [s for _, _, s in out]


def _only_integral_elsewhere(occ, elems: set[str], skip_sets: set[int]) -> bool:
    return all(w == ONE for e in elems for si, _, w in occ[e] if si not in skip_sets)


def _sites_r4(inst: FmpInstance) -> list[RewriteSite]:
    occ = _occurrences(inst)
    out = []
    for si, ts in enumerate(inst.sets):
        if len(ts.tradeoffs) != 2:
            continue
        a, b = (_single(t) for t in ts.tradeoffs)
        if a is None or b is None or a.weight != ONE or b.weight != ONE or a.element == b.element:
            continue
        e1, e2 = a.element, b.element
        if not _only_integral_elsewhere(occ, {e1, e2}, {si}):
            continue
        if any(t.weight_of(e1) and t.weight_of(e2) for s in inst.sets for t in s.tradeoffs):
            continue
        out.append(RewriteSite("R4", sets=(si,), elements=(e1, e2)))
    return out


def _pair_sets(inst: FmpInstance) -> dict[int, tuple[Fraction, str, str]]:
    """Set index -> (weight, e_i, e_j) for sets {{w e_i}, {w e_j}}, w = 1/N < 1."""
    out = {}
    for si, ts in enumerate(inst.sets):
        if len(ts.tradeoffs) != 2:
            continue
        a, b = (_single(t) for t in ts.tradeoffs)
        if a is None or b is None or a.element == b.element or a.weight != b.weight:
            continue
        w = a.weight
        if w.numerator == 1 and w.denominator >= 2:
            out[si] = (w, a.element, b.element)
    return out


def _sites_r5(inst: FmpInstance) -> list[RewriteSite]:
    occ = _occurrences(inst)
    order = _element_order(inst)
    pairs = _pair_sets(inst)
    by_w: dict[Fraction, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
    for w, a, b in pairs.values():
        by_w[w][a].add(b)
        by_w[w][b].add(a)
    out = []
    for w, adj in by_w.items():
        done: set[str] = set()
        for start in sorted(adj, key=order.__getitem__):
            if start in done:
                continue
            comp, stack = {start}, [start]
            while stack:
                for nb in adj[stack.pop()]:
                    if nb not in comp:
                        comp.add(nb)
                        stack.append(nb)
            done |= comp
            if any(adj[x] != comp - {x} for x in comp):
                continue  # not a clique
            group_sets = {si for si, (ww, a, b) in pairs.items() if ww == w and a in comp}
            if not _only_integral_elsewhere(occ, comp, group_sets):
                continue
            # each element must be able to serve all its pairs alone
            if any(w * sum(1 for si, _, _ in occ[x] if si in group_sets) > 1 for x in comp):
                continue
            if any(
                sum(1 for f in t.fragments if f.element in comp) > 1
                for s in inst.sets for t in s.tradeoffs
            ):
                continue
            elems = tuple(sorted(comp, key=order.__getitem__))
            out.append(RewriteSite("R5", sets=tuple(sorted(group_sets)), elements=elems,
                                   n=w.denominator))
    out.sort(key=lambda s: s.sets[0])
    return out


def _r6_match(inst: FmpInstance, occ, s1: int, i1: int, s2: int, i2: int) -> bool:
    A, B = inst.sets[s1], inst.sets[s2]
    fa, fb = _single(A.tradeoffs[i1]), _single(B.tradeoffs[i2])
    if fa is None or fb is None or fa.element == fb.element:
        return False
    e, e2 = fa.element, fb.element
    t, t2 = A.tradeoffs[1 - i1], B.tradeoffs[1 - i2]
    if {e, e2} & (set(t.elements) | set(t2.elements)):
        return False
    for si, ti, _ in occ[e] + occ[e2]:
        if (si, ti) in ((s1, i1), (s2, i2)):
            continue
        if si in (s1, s2):
            return False
        other = inst.sets[si].tradeoffs[ti]
        q, q2 = other.weight_of(e), other.weight_of(e2)
        if not q or not q2 or fa.weight + q <= 1 or fb.weight + q2 <= 1:
            return False
    return True


def _sites_r6(inst: FmpInstance) -> list[RewriteSite]:
    occ = _occurrences(inst)
    two = [si for si, ts in enumerate(inst.sets) if len(ts.tradeoffs) == 2]
    out = []
    for s1 in two:
        for s2 in two:
            if s1 == s2:
                continue
            for i1 in (0, 1):
                for i2 in (0, 1):
                    if _r6_match(inst, occ, s1, i1, s2, i2):
                        fa = inst.sets[s1].tradeoffs[i1].fragments[0]
                        fb = inst.sets[s2].tradeoffs[i2].fragments[0]
                        out.append(RewriteSite("R6", sets=(s1, s2), tradeoffs=((s1, i1), (s2, i2)),
                                               elements=(fa.element, fb.element)))
    return out


def _sites_r7(inst: FmpInstance) -> list[RewriteSite]:
    occ = _occurrences(inst)
    out = []
    for e, lst in occ.items():
        if len(lst) != 2:
            continue
        (s1, t1, p), (s2, t2, p2) = lst
        if s1 == s2 or p + p2 <= 1:
            continue
        if len(inst.sets[s1].tradeoffs) < 2 or len(inst.sets[s2].tradeoffs) < 2:
            continue
        locs = {(s1, t1), (s2, t2)}
        others = {f.element for s, t in locs for f in inst.sets[s].tradeoffs[t].fragments} - {e}
        if any((si, ti) not in locs for x in others for si, ti, _ in occ[x]):
            continue
        out.append(RewriteSite("R7", sets=(s1, s2), tradeoffs=((s1, t1), (s2, t2)), elements=(e,)))
    out.sort(key=lambda s: s.tradeoffs)
    return out


_FINDERS = {
    "R1": _sites_r1, "R2": _sites_r2, "R3": _sites_r3, "R4": _sites_r4,
    "R5": _sites_r5, "R6": _sites_r6, "R7": _sites_r7,
}


def find_applicable_sites(inst: FmpInstance, rule: str) -> list[RewriteSite]:
    """All sites where ``rule`` applies, lowest set index first."""
    if rule not in _FINDERS:
        raise ValueError(f"unknown rule {rule!r}")
    return _FINDERS[rule](inst)


# --------------------------------------------------------------------------
# rule application


def _apply_r1(inst: FmpInstance, site: RewriteSite):
    e = site.elements[0]
    sets = []
    for ts in inst.sets:
        new = []
        satisfied = False
        for t in ts.tradeoffs:
            frs = tuple(f for f in t.fragments if f.element != e)
            if not frs:
                satisfied = True
                break
            new.append(Tradeoff(frs))
        if not satisfied:
            sets.append(TradeoffSet(ts.girl, tuple(new)))
    return sets, ()


def _apply_r2(inst: FmpInstance, site: RewriteSite):
    target = Tradeoff((Fragment(site.elements[0], ONE),))
    locs = set(site.tradeoffs)
    sets = [
        TradeoffSet(ts.girl, tuple(target if (si, ti) in locs else t for ti, t in enumerate(ts.tradeoffs)))
        for si, ts in enumerate(inst.sets)
    ]
    return sets, ()


def _apply_r3(inst: FmpInstance, site: RewriteSite):
    e, n = site.elements[0], site.n
    low = Fraction(1, n)

    def fix(f: Fragment) -> Fragment:
        if f.element != e:
            return f
        return Fragment(e, ONE if f.weight > HALF else low)

    sets = [
        TradeoffSet(ts.girl, tuple(Tradeoff(tuple(fix(f) for f in t.fragments)) for t in ts.tradeoffs))
        for ts in inst.sets
    ]
    return sets, ()


def _merge_sets(inst: FmpInstance, drop: set[int], mapping: Mapping[str, str]):
    return [
        TradeoffSet(ts.girl, tuple(_rename(t, mapping) for t in ts.tradeoffs))
        for si, ts in enumerate(inst.sets)
        if si not in drop
    ]


def _apply_r4(inst: FmpInstance, site: RewriteSite):
    e1, e2 = site.elements
    return _merge_sets(inst, set(site.sets), {e2: e1}), ((e2, e1),)


def _apply_r5(inst: FmpInstance, site: RewriteSite):
    e1 = site.elements[0]
    mapping = {e: e1 for e in site.elements[1:]}
    return _merge_sets(inst, set(site.sets), mapping), tuple(mapping.items())


def _union(t: Tradeoff, t2: Tradeoff) -> Tradeoff | None:
    """Fragment union with weights added; None if some weight exceeds 1."""
    acc: dict[str, Fraction] = {}
    for f in t.fragments + t2.fragments:
        acc[f.element] = acc.get(f.element, Fraction(0)) + f.weight
    if any(w > 1 for w in acc.values()):
        return None
    return Tradeoff(tuple(Fragment(e, w) for e, w in acc.items()))


def _apply_r6(inst: FmpInstance, site: RewriteSite):
    (s1, i1), (s2, i2) = site.tradeoffs
    A, B = inst.sets[s1], inst.sets[s2]
    pe = A.tradeoffs[i1]
    merged = _union(A.tradeoffs[1 - i1], B.tradeoffs[1 - i2])
    e = site.elements[0]
    sets = []
    for si, ts in enumerate(inst.sets):
        if si == s2:
            continue
        if si == s1:
            if merged is None:
                sets.append(TradeoffSet(ts.girl, (pe,)))
            else:
                new = [pe, pe]
                new[1 - i1] = merged
                sets.append(TradeoffSet(ts.girl, tuple(new)))
            continue
        if merged is None:
            # every tradeoff shared by e and e' is now unreachable
            ts = TradeoffSet(ts.girl, tuple(t for t in ts.tradeoffs if not t.weight_of(e)))
        sets.append(ts)
    return sets, ()


def _apply_r7(inst: FmpInstance, site: RewriteSite):
    (s1, t1), (s2, t2) = site.tradeoffs
    A, B = inst.sets[s1], inst.sets[s2]
    merged = tuple(t for i, t in enumerate(A.tradeoffs) if i != t1) + tuple(
        t for i, t in enumerate(B.tradeoffs) if i != t2
    )
    sets = []
    for si, ts in enumerate(inst.sets):
        if si == s2:
            continue
        sets.append(TradeoffSet(ts.girl, merged) if si == s1 else ts)
    return sets, ()


_APPLIERS = {
    "R1": _apply_r1, "R2": _apply_r2, "R3": _apply_r3, "R4": _apply_r4,
    "R5": _apply_r5, "R6": _apply_r6, "R7": _apply_r7,
}


def _revalidate(inst: FmpInstance, site: RewriteSite) -> None:
    found = find_applicable_sites(inst, site.rule)
    if site.rule == "R3":
        for f in found:
            if replace(f, n=None) == replace(site, n=None) and site.n is not None and site.n >= f.n:
                return
    elif site in found:
        return
    raise StaleSite(f"{site.rule} site {site.to_json()} does not apply")


def apply_rule(inst: FmpInstance, site: RewriteSite) -> tuple[FmpInstance, InstanceDelta]:
    """Apply one rewrite after checking that ``site`` is still applicable."""
    if site.rule not in _APPLIERS:
        raise ValueError(f"unknown rule {site.rule!r}")
    _revalidate(inst, site)
    sets, merges = _APPLIERS[site.rule](inst, site)
    out = _rebuild(inst, sets)
    if progress_metric(out) >= progress_metric(inst):
        raise AssertionError(f"{site.rule} did not decrease the progress metric")
    return out, InstanceDelta.between(inst, out, merges)


# --------------------------------------------------------------------------
# driver


class _Recorder:
    def __init__(self, inst: FmpInstance):
        self.inst = inst
        self.steps: list[RewriteStep] = []

    def record(self, rule: str, site: RewriteSite | None, after: FmpInstance,
               delta: InstanceDelta | None = None) -> None:
        if delta is None:
            delta = InstanceDelta.between(self.inst, after)
        self.steps.append(RewriteStep(rule, site, instance_hash(self.inst), instance_hash(after), delta))
        self.inst = after

    def apply(self, site: RewriteSite) -> None:
        after, delta = apply_rule(self.inst, site)
        self.record(site.rule, site, after, delta)


def _exhaust_r1(rec: _Recorder, check_aset: bool) -> None:
    while True:
        sites = find_applicable_sites(rec.inst, "R1")
        if not sites:
            return
        rec.apply(sites[0])
        if check_aset:
            assert AsetState.of(rec.inst).flag, "R1 broke the single-fragment property"


@dataclass(frozen=True)
class _Policy:
    """Which contraction sites the driver takes.

    R4 and R7 are sound on any integral structure, but applied freely they
    also contract the sets that carry the source girls' choices.  The driver
    therefore uses them only to undo bookkeeping: sites touching an element
    introduced by the normal forms, plus (for R4, while fractions remain)
    sets that were already integral in the input.
    """

    fresh: frozenset[str]
    integral_girls: frozenset[str]

    def allows(self, inst: FmpInstance, site: RewriteSite) -> bool:
        if site.rule == "R4":
            if set(site.elements) & self.fresh:
                return True
            girl = inst.sets[site.sets[0]].girl
            return girl in self.integral_girls and progress_metric(inst)[1] > 0
        if site.rule == "R7":
            (s1, t1), (s2, t2) = site.tradeoffs
            e = site.elements[0]
            p = inst.sets[s1].tradeoffs[t1].weight_of(e)
            q = inst.sets[s2].tradeoffs[t2].weight_of(e)
            return p < 1 or q < 1 or e in self.fresh
        return True


def _next_site(inst: FmpInstance, rules: Sequence[str], policy: _Policy) -> RewriteSite | None:
    for rule in rules:
        for site in find_applicable_sites(inst, rule):
            if policy.allows(inst, site):
                return site
    return None


def fragment_reduce(
    inst: FmpInstance, rules: Sequence[str] = DRIVER_ORDER
) -> tuple[FmpInstance, RewriteTrace, ReductionOutcome]:
    """Normal forms, R1 to exhaustion, then rewrites until no site is left.

    Rules are tried in ``rules`` order and the first allowed site of the
    first rule that has one is applied; the search then restarts.  R1
    leads the order, so it runs again after every other rewrite.
    """
    if inst.sets and not inst.canonical:
        raise ValueError("fragment_reduce expects a canonical instance")
    rec = _Recorder(inst)
    nf1, _ = first_normal_form(inst)
    rec.record("NF1", None, nf1)
    nf2, _ = second_normal_form(nf1)
    rec.record("NF2", None, nf2)
    rec.record("working", None, FmpInstance(nf2.elements, nf2.sets, canonical=False))
    _exhaust_r1(rec, check_aset=False)
    assert AsetState.of(rec.inst).flag, "preprocessing did not reach single-fragment tradeoffs"

    policy = _Policy(
        fresh=frozenset(nf2.elements) - frozenset(inst.elements),
        integral_girls=frozenset(
            ts.girl for ts in inst.sets if ts.tradeoffs and all(t.integral for t in ts.tradeoffs)
        ),
    )
    budget = 2 * rec.inst.fragment_count()
    iterations = 0
    while (site := _next_site(rec.inst, rules, policy)) is not None:
        before = progress_metric(rec.inst)
        rec.apply(site)
        iterations += 1
        assert progress_metric(rec.inst) < before
        assert AsetState.of(rec.inst).flag, f"{site.rule} broke the single-fragment property"
        assert iterations <= budget, "rewrite count exceeded twice the fragment count"

    out = rec.inst
    cmp = as_cmp(out)
    outcome = ReductionOutcome("all-integral" if cmp is not None else "fixpoint", cmp, out)
    return out, RewriteTrace(tuple(rec.steps)), outcome


def replay_trace(inst: FmpInstance, trace: RewriteTrace, recompute: bool = False) -> FmpInstance:
    """Re-apply the recorded deltas, checking every state hash.

    With ``recompute`` the rule steps are also re-derived with
    :func:`apply_rule` and compared against the recorded deltas.
    """
    cur = inst
    for i, step in enumerate(trace.steps):
        if instance_hash(cur) != step.before_hash:
            raise TraceMismatch(f"step {i} ({step.rule}): input state differs from the recording")
        nxt = apply_delta(cur, step.delta)
        if recompute and step.site is not None:
            try:
                again, _ = apply_rule(cur, step.site)
            except StaleSite as exc:
                raise TraceMismatch(f"step {i}: {exc}") from None
            if again != nxt:
                raise TraceMismatch(f"step {i} ({step.rule}): rule output differs from delta")
        if instance_hash(nxt) != step.after_hash:
            raise TraceMismatch(f"step {i} ({step.rule}): output state differs from the recording")
        cur = nxt
    return cur
