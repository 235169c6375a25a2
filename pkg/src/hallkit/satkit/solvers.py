"""Polynomial-time solvers for the classical tractable SAT families."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Any

from .cnf import Cnf, XorConstraint

__all__ = ["SatResult", "solve_2sat", "solve_horn", "solve_xorsat", "solve_renamed_horn"]


@dataclass(frozen=True)
class SatResult:
    status: str  # "sat", "unsat" or "not-applicable"
    assignment: dict[int, bool] | None = None
    certificate: Any = None

    @property
    def sat(self) -> bool:
        return self.status == "sat"


NOT_APPLICABLE = SatResult("not-applicable")


def _lit_node(lit: int) -> int:
    v = abs(lit) - 1
    return 2 * v + (lit < 0)


def _scc(n_nodes: int, adj: list[list[int]]) -> list[int]:
    """Tarjan, iterative.  Component ids come out in reverse topological order."""
    index = [-1] * n_nodes
    low = [0] * n_nodes
    comp = [-1] * n_nodes
    on_stack = [False] * n_nodes
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in range(n_nodes):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(adj[v]):
                work[-1] = (v, i + 1)
                w = adj[v][i]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return comp


def solve_2sat(cnf: Cnf) -> SatResult:
    """Implication-graph SCC check; NotApplicable on clauses longer than 2."""
    if any(len(c) > 2 for c in cnf.clauses):
        return NOT_APPLICABLE
    if any(len(c) == 0 for c in cnf.clauses):
        return SatResult("unsat", certificate="empty clause")
    n = cnf.num_vars
    adj: list[list[int]] = [[] for _ in range(2 * n)]
    for c in cnf.clauses:
        a = c[0]
        b = c[1] if len(c) == 2 else c[0]
        adj[_lit_node(-a)].append(_lit_node(b))
        adj[_lit_node(-b)].append(_lit_node(a))
    comp = _scc(2 * n, adj)
    assignment = {}
    for v in range(1, n + 1):
        p, q = comp[2 * (v - 1)], comp[2 * (v - 1) + 1]
        if p == q:
            return SatResult("unsat", certificate=v)
        # earlier completion = closer to a sink in the implication order
        assignment[v] = p < q
    return SatResult("sat", assignment)


def solve_horn(cnf: Cnf) -> SatResult:
    """Unit propagation to the minimal model."""
    if any(sum(lit > 0 for lit in c) > 1 for c in cnf.clauses):
        return NOT_APPLICABLE
    n = cnf.num_vars
    remaining = []
    watchers: list[list[int]] = [[] for _ in range(n + 1)]
    head = []
    queue: list[int] = []
    true = [False] * (n + 1)
    for ci, c in enumerate(cnf.clauses):
        negs = [-lit for lit in c if lit < 0]
        pos = [lit for lit in c if lit > 0]
        head.append(pos[0] if pos else 0)
        remaining.append(len(negs))
        for v in negs:
            watchers[v].append(ci)
        if not negs:
            if not pos:
                return SatResult("unsat", certificate=ci)
            queue.append(pos[0])
    while queue:
        v = queue.pop()
        if true[v]:
            continue
        true[v] = True
        for ci in watchers[v]:
            remaining[ci] -= 1
            if remaining[ci] == 0:
                if head[ci] == 0:
                    return SatResult("unsat", certificate=ci)
                queue.append(head[ci])
    return SatResult("sat", {v: true[v] for v in range(1, n + 1)})


def solve_renamed_horn(cnf: Cnf, flips: Iterable[int]) -> SatResult:
    """Solve after flipping the polarity of ``flips``; map the model back."""
    fl = set(flips)
    renamed = Cnf(cnf.num_vars, tuple(tuple(-l if abs(l) in fl else l for l in c) for c in cnf.clauses), cnf.names)
    r = solve_horn(renamed)
    if not r.sat:
        return r
    return SatResult("sat", {v: (not b) if v in fl else b for v, b in r.assignment.items()})


def solve_xorsat(num_vars: int, constraints: Sequence[XorConstraint]) -> SatResult:
    """Gaussian elimination over GF(2) with rows as int bitsets.

    Free variables are set False, so each pivot variable takes its row's
    right-hand side.
    """
    rows: list[tuple[int, int]] = []
    for x in constraints:
        mask = 0
        for v in x.variables:
            mask ^= 1 << (v - 1)
        rows.append((mask, int(x.parity)))
    pivots: list[tuple[int, int, int]] = []  # (column, mask, rhs)
    for col in range(num_vars):
        bit = 1 << col
        sel = next((i for i, (m, _) in enumerate(rows) if m & bit), None)
        if sel is None:
            continue
        pm, pr = rows.pop(sel)
        rows = [((m ^ pm, r ^ pr) if m & bit else (m, r)) for m, r in rows]
        pivots = [((c, m ^ pm, r ^ pr) if m & bit else (c, m, r)) for c, m, r in pivots]
        pivots.append((col, pm, pr))
    for m, r in rows:
        if m == 0 and r == 1:
            return SatResult("unsat", certificate="inconsistent row")
    assignment = {v: False for v in range(1, num_vars + 1)}
    for col, _, r in pivots:
        assignment[col + 1] = bool(r)
    assert all(x.holds(assignment) for x in constraints)
    return SatResult("sat", assignment)
