"""Polynomial solvers: bipartite matching, the CMP and the SMP.

The CMP is solved as a bipartite matching between girls and elements; when
no girl-perfect matching exists, the girls reachable by alternating paths
from an unmatched girl form a Hall violator.

The SMP is solved on the four-group graph whose left side is the girls plus
one list-node per listed girl and whose right side is the boys plus one
list-node per listed boy.  A matching covering every listed member is then
repaired until each girl-to-boy-list edge is paired with the matching
boy-to-girl-list edge, after which the pairing can be read off.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .core import CmpView, HallViolator

__all__ = [
    "BipartiteGraph",
    "Matching",
    "CmpResult",
    "SmpInstance",
    "SmpGraph",
    "SmpResult",
    "RepairStep",
    "max_bipartite_matching",
    "solve_cmp",
    "build_smp_graph",
    "solve_smp",
    "smp_as_two_cmps",
    "verify_pairing",
    "verify_transversal",
]


@dataclass(frozen=True)
class BipartiteGraph:
    left_count: int
    right_count: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.adjacency) != self.left_count:
            raise ValueError("adjacency must have one row per left vertex")
        for row in self.adjacency:
            if len(set(row)) != len(row):
                raise ValueError("duplicate neighbour in adjacency list")
            if any(not 0 <= r < self.right_count for r in row):
                raise ValueError("right index out of range")

    @classmethod
    def from_lists(cls, left_count: int, right_count: int, rows: Iterable[Iterable[int]]) -> BipartiteGraph:
        return cls(left_count, right_count, tuple(tuple(sorted(set(r))) for r in rows))


@dataclass(frozen=True)
class Matching:
    """Partial injective map from left to right indices."""

    pairs: Mapping[int, int]

    def __len__(self) -> int:
        return len(self.pairs)

    def inverse(self) -> dict[int, int]:
        return {r: l for l, r in self.pairs.items()}


_INF = float("inf")


def max_bipartite_matching(g: BipartiteGraph) -> Matching:
    """Hopcroft–Karp; O(E sqrt(V))."""
    mate_l = [-1] * g.left_count
    mate_r = [-1] * g.right_count
    adj = g.adjacency
    dist = [0.0] * g.left_count

    def bfs() -> bool:
        q: deque[int] = deque()
        for u in range(g.left_count):
            if mate_l[u] < 0:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = _INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = mate_r[v]
                if w < 0:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        # iterative would avoid recursion limits; graphs here are modest
        for v in adj[u]:
            w = mate_r[v]
            if w < 0 or (dist[w] == dist[u] + 1 and dfs(w)):
                mate_l[u] = v
                mate_r[v] = u
                return True
        dist[u] = _INF
        return False

    while bfs():
        for u in range(g.left_count):
            if mate_l[u] < 0:
                dfs(u)
    return Matching({u: v for u, v in enumerate(mate_l) if v >= 0})


# --------------------------------------------------------------------------
# CMP


@dataclass(frozen=True)
class CmpResult:
    sat: bool
    transversal: dict[str, str] | None = None
    violator: HallViolator | None = None


def _hall_violator(
    girls: list[str], elements: list[str], g: BipartiteGraph, m: Matching, start: int
) -> HallViolator:
    inv = m.inverse()
    seen_l = {start}
    seen_r: set[int] = set()
    q = deque([start])
    while q:
        u = q.popleft()
        for v in g.adjacency[u]:
            if v in seen_r:
                continue
            seen_r.add(v)
            w = inv.get(v)
            # v must be matched, otherwise the matching was not maximum
            assert w is not None
            if w not in seen_l:
                seen_l.add(w)
                q.append(w)
    return HallViolator(
        frozenset(girls[i] for i in seen_l), frozenset(elements[j] for j in seen_r)
    )


def solve_cmp(cmp: Mapping[str, Iterable[str]]) -> CmpResult:
    """Transversal of the girls' lists, or a Hall violator."""
    girls = list(cmp)
    elements: list[str] = []
    index: dict[str, int] = {}
    rows = []
    for gname in girls:
        row = []
        for e in cmp[gname]:
            if e not in index:
                index[e] = len(elements)
                elements.append(e)
            row.append(index[e])
        rows.append(row)
    graph = BipartiteGraph.from_lists(len(girls), len(elements), rows)
    m = max_bipartite_matching(graph)
    if len(m) == len(girls):
        t = {girls[u]: elements[v] for u, v in m.pairs.items()}
        assert verify_transversal(cmp, t)
        return CmpResult(True, transversal=t)
    start = next(u for u in range(len(girls)) if u not in m.pairs)
    violator = _hall_violator(girls, elements, graph, m, start)
    assert violator.verify({gn: tuple(cmp[gn]) for gn in violator.girls})
    return CmpResult(False, violator=violator)


def verify_transversal(cmp: Mapping[str, Iterable[str]], t: Mapping[str, str]) -> bool:
    if set(t) != set(cmp):
        return False
    if len(set(t.values())) != len(t):
        return False
    return all(t[gn] in tuple(cmp[gn]) for gn in cmp)


# --------------------------------------------------------------------------
# SMP


@dataclass(frozen=True)
class SmpInstance:
    """Girls and boys, some of whom submit lists.

    A member present in ``girl_lists``/``boy_lists`` is listed (possibly with
    an empty list, which makes the instance unsolvable); absent members are
    unconstrained and may stay unpaired.
    """

    girls: tuple[str, ...]
    boys: tuple[str, ...]
    girl_lists: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    boy_lists: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        gs, bs = set(self.girls), set(self.boys)
        if len(gs) != len(self.girls) or len(bs) != len(self.boys):
            raise ValueError("duplicate member")
        for g, lst in self.girl_lists.items():
            if g not in gs or not set(lst) <= bs:
                raise ValueError(f"girl list for {g!r} references undeclared members")
        for b, lst in self.boy_lists.items():
            if b not in bs or not set(lst) <= gs:
                raise ValueError(f"boy list for {b!r} references undeclared members")

    def compatible(self, g: str, b: str) -> bool:
        return (
            g in self.girl_lists
            and b in self.boy_lists
            and b in self.girl_lists[g]
            and g in self.boy_lists[b]
        )

    def allowed(self, g: str, b: str) -> bool:
        if g in self.girl_lists and b not in self.girl_lists[g]:
            return False
        if b in self.boy_lists and g not in self.boy_lists[b]:
            return False
        return True


# node = (kind, name) with kind in g, b, Lg, Lb
Node = tuple[str, str]


@dataclass(frozen=True)
class SmpGraph:
    left: tuple[Node, ...]
    right: tuple[Node, ...]
    edges: tuple[tuple[Node, Node], ...]

    @property
    def target(self) -> int:
        return sum(1 for k, _ in self.left if k == "Lg") + sum(1 for k, _ in self.right if k == "Lb")


def build_smp_graph(smp: SmpInstance) -> SmpGraph:
    gl, bl = smp.girl_lists, smp.boy_lists
    left = tuple(("g", g) for g in smp.girls) + tuple(("Lg", g) for g in smp.girls if g in gl)
    right = tuple(("b", b) for b in smp.boys) + tuple(("Lb", b) for b in smp.boys if b in bl)
    edges: list[tuple[Node, Node]] = []
    for g in smp.girls:
        for b in smp.boys:
            if (g in gl and b not in bl and b in gl[g]) or (b in bl and g not in gl and g in bl[b]):
                edges.append((("g", g), ("b", b)))
        for b in smp.boys:
            if smp.compatible(g, b):
                edges.append((("g", g), ("Lb", b)))
    for g in smp.girls:
        for b in smp.boys:
            if smp.compatible(g, b):
                edges.append((("Lg", g), ("b", b)))
    return SmpGraph(left, right, tuple(edges))


@dataclass(frozen=True)
class RepairStep:
    kind: str  # "reattach", "swap" or "rotate"
    mismatched_before: int
    mismatched_after: int
    size: int


@dataclass(frozen=True)
class SmpResult:
    sat: bool
    pairing: dict[str, str] | None = None
    matching_size: int = 0
    target: int = 0
    repairs: tuple[RepairStep, ...] = ()


class _Mates:
    """Symmetric node matching with side-agnostic helpers."""

    def __init__(self, pairs: Iterable[tuple[Node, Node]]):
        self.m: dict[Node, Node] = {}
        for a, b in pairs:
            self.m[a] = b
            self.m[b] = a

    def get(self, n: Node) -> Node | None:
        return self.m.get(n)

    def unlink(self, n: Node) -> None:
        other = self.m.pop(n, None)
        if other is not None:
            del self.m[other]

    def link(self, a: Node, b: Node) -> None:
        self.unlink(a)
        self.unlink(b)
        self.m[a] = b
        self.m[b] = a

    def size(self) -> int:
        return len(self.m) // 2


# mirror tables: a person x of kind k has its list node _L[k]; the opposite
# side's person kind is _OPP[k]
_L = {"g": "Lg", "b": "Lb"}
_OPP = {"g": "b", "b": "g"}


def _mismatched(mates: _Mates) -> list[tuple[Node, Node]]:
    """Edges (x, L_y) whose partner (L_x, y) is missing, girls first."""
    out = []
    for kind in ("g", "b"):
        for n, other in mates.m.items():
            if n[0] == kind and other[0] == _L[_OPP[kind]]:
                if mates.get((_L[kind], n[1])) != (_OPP[kind], other[1]):
                    out.append((n, other))
    out.sort(key=lambda e: (e[0][0] != "g",))
    return out


def _repair_once(mates: _Mates, x1: Node, ly1: Node) -> str:
    kind = x1[0]
    lk, ok = _L[kind], _OPP[kind]
    xs = [x1[1]]
    ys = [ly1[1]]
    visited = {ly1[1]}
    while True:
        xi, yi = xs[-1], ys[-1]
        lx = (lk, xi)
        partner = mates.get(lx)
        if partner is None:
            mates.link(lx, (ok, yi))
            return "reattach"
        y_next = partner[1]
        if y_next == ys[0]:
            for x, y in zip(xs, ys):
                mates.link((lk, x), (ok, y))
            return "rotate"
        ly_next = (_L[ok], y_next)
        holder = mates.get(ly_next)
        if holder is None:
            mates.link((kind, xi), ly_next)
            return "swap"
        if y_next in visited:
            raise AssertionError("repair chain revisited a member")
        visited.add(y_next)
        xs.append(holder[1])
        ys.append(y_next)


def _pairing(smp: SmpInstance, mates: _Mates) -> dict[str, str]:
    out: dict[str, str] = {}
    for g in smp.girls:
        other = mates.get(("g", g))
        if other is None:
            continue
        if other[0] == "b":
            out[g] = other[1]
        else:
            assert mates.get(("Lg", g)) == ("b", other[1])
            out[g] = other[1]
    return out


def verify_pairing(smp: SmpInstance, pairing: Mapping[str, str]) -> bool:
    if len(set(pairing.values())) != len(pairing):
        return False
    if not set(smp.girl_lists) <= set(pairing):
        return False
    if not set(smp.boy_lists) <= set(pairing.values()):
        return False
    return all(smp.allowed(g, b) for g, b in pairing.items())


def solve_smp(smp: SmpInstance) -> SmpResult:
    graph = build_smp_graph(smp)
    li = {n: i for i, n in enumerate(graph.left)}
    ri = {n: i for i, n in enumerate(graph.right)}
    rows: list[list[int]] = [[] for _ in graph.left]
    for a, b in graph.edges:
        rows[li[a]].append(ri[b])
    m = max_bipartite_matching(BipartiteGraph.from_lists(len(graph.left), len(graph.right), rows))
    target = graph.target
    if len(m) < target:
        return SmpResult(False, matching_size=len(m), target=target)
    mates = _Mates((graph.left[u], graph.right[v]) for u, v in m.pairs.items())
    size = mates.size()
    steps: list[RepairStep] = []
    bad = _mismatched(mates)
    while bad:
        before = len(bad)
        kind = _repair_once(mates, *bad[0])
        bad = _mismatched(mates)
        assert len(bad) < before, "repair step did not reduce mismatched edges"
        assert mates.size() == size, "repair step changed matching size"
        steps.append(RepairStep(kind, before, len(bad), mates.size()))
    pairing = _pairing(smp, mates)
    assert verify_pairing(smp, pairing)
    return SmpResult(True, pairing, size, target, tuple(steps))


def smp_as_two_cmps(smp: SmpInstance) -> tuple[CmpView, CmpView, SmpInstance]:
    """The girls' and boys' classical problems with lists pared to
    list-compatible or unlisted partners."""
    gl, bl = smp.girl_lists, smp.boy_lists
    pared_g = {
        g: tuple(b for b in lst if b not in bl or g in bl[b]) for g, lst in gl.items()
    }
    pared_b = {
        b: tuple(g for g in lst if g not in gl or b in gl[g]) for b, lst in bl.items()
    }
    pared = SmpInstance(smp.girls, smp.boys, pared_g, pared_b)
    return dict(pared_g), dict(pared_b), pared
