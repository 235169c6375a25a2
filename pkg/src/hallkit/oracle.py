"""Brute-force reference solvers.

These are deliberately naive: choice tuples and assignments are walked in a
fixed order and the first hit is returned.  The only shortcut is abandoning a
partial choice tuple as soon as some element is over capacity, which cannot
skip a feasible tuple because loads only grow.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass
from itertools import combinations, permutations

from .core import FmpInstance, FmpSolution

__all__ = [
    "OracleBudget",
    "BudgetExceeded",
    "solve_fmp_bruteforce",
    "count_fmp_solutions",
    "solve_sat_bruteforce",
    "solve_smp_bruteforce",
    "perfect_tripartite_matching",
]


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_choice_tuples: int = 10**7
    max_assignments: int = 2**24

    def __post_init__(self) -> None:
        if self.max_choice_tuples <= 0 or self.max_assignments <= 0:
            raise ValueError("budgets must be positive")


DEFAULT_BUDGET = OracleBudget()


def _scaled(inst: FmpInstance) -> tuple[int, list[list[list[tuple[int, int]]]]]:
    """Integer weights over a common denominator, elements as dense ids."""
    denom = 1
    for _, _, f in inst.fragments():
        denom = math.lcm(denom, f.weight.denominator)
    ids: dict[str, int] = {e: i for i, e in enumerate(inst.elements)}
    table = []
    for ts in inst.sets:
        opts = []
        for t in ts.tradeoffs:
            opts.append(
                [(ids.setdefault(f.element, len(ids)), int(f.weight * denom)) for f in t.fragments]
            )
        table.append(opts)
    return denom, table


def _tuple_count(inst: FmpInstance) -> int:
    return math.prod(len(ts.tradeoffs) for ts in inst.sets)


def _walk(inst: FmpInstance) -> Iterator[list[int]]:
    """Feasible choice tuples in lexicographic order (girls in declared order)."""
    cap, table = _scaled(inst)
    if any(not opts for opts in table):
        return
    n_el = 1 + max((e for opts in table for t in opts for e, _ in t), default=-1)
    load = [0] * n_el
    choice = [0] * len(table)

    def rec(depth: int) -> Iterator[list[int]]:
        if depth == len(table):
            yield choice
            return
        for idx, t in enumerate(table[depth]):
            ok = True
            for e, w in t:
                load[e] += w
                if load[e] > cap:
                    ok = False
            if ok:
                choice[depth] = idx
                yield from rec(depth + 1)
            for e, w in t:
                load[e] -= w

    yield from rec(0)


def solve_fmp_bruteforce(
    inst: FmpInstance, budget: OracleBudget = DEFAULT_BUDGET
) -> FmpSolution | None:
    """First feasible choice tuple in lexicographic order, or None if none."""
    if _tuple_count(inst) > budget.max_choice_tuples:
        raise BudgetExceeded(f"{_tuple_count(inst)} choice tuples > {budget.max_choice_tuples}")
    for choice in _walk(inst):
        return FmpSolution(dict(zip(inst.girls, choice)))
    return None


def count_fmp_solutions(inst: FmpInstance, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    if _tuple_count(inst) > budget.max_choice_tuples:
        raise BudgetExceeded(f"{_tuple_count(inst)} choice tuples > {budget.max_choice_tuples}")
    return sum(1 for _ in _walk(inst))


def solve_sat_bruteforce(cnf, budget: OracleBudget = DEFAULT_BUDGET) -> dict[int, bool] | None:
    """Binary-counter search; variable 1 is the least significant bit."""
    n = cnf.num_vars
    if 2**n > budget.max_assignments:
        raise BudgetExceeded(f"2^{n} assignments > {budget.max_assignments}")
    masks = []
    for clause in cnf.clauses:
        pos = neg = 0
        for lit in clause:
            if lit > 0:
                pos |= 1 << (lit - 1)
            else:
                neg |= 1 << (-lit - 1)
        masks.append((pos, neg))
    full = (1 << n) - 1
    for a in range(1 << n):
        na = full ^ a
        if all((a & pos) or (na & neg) for pos, neg in masks):
            return {v: bool(a >> (v - 1) & 1) for v in range(1, n + 1)}
    return None


def solve_smp_bruteforce(smp) -> dict[str, str] | None:
    """Search all injective partial pairings girl -> boy.

    A pairing is valid when every listed member is paired and every pair
    respects the list of each listed partner.
    """
    girls = list(smp.girls)
    boys = list(smp.boys)

    def ok(g: str, b: str) -> bool:
        if g in smp.girl_lists and b not in smp.girl_lists[g]:
            return False
        if b in smp.boy_lists and g not in smp.boy_lists[b]:
            return False
        return True

    pairing: dict[str, str] = {}
    used: set[str] = set()

    def rec(i: int) -> bool:
        if i == len(girls):
            return all(b in used for b in smp.boy_lists)
        g = girls[i]
        for b in boys:
            if b not in used and ok(g, b):
                pairing[g] = b
                used.add(b)
                if rec(i + 1):
                    return True
                del pairing[g]
                used.discard(b)
        if g not in smp.girl_lists:
            return rec(i + 1)
        return False

    return dict(pairing) if rec(0) else None


def perfect_tripartite_matching(triples) -> list[tuple[str, str, str]] | None:
    """Pick one triple per distinct g with all x's and all y's distinct."""
    girls = list(dict.fromkeys(g for g, _, _ in triples))
    by_girl = {g: [t for t in triples if t[0] == g] for g in girls}
    picked: list[tuple[str, str, str]] = []

    def rec(i: int, xs: frozenset, ys: frozenset) -> bool:
        if i == len(girls):
            return True
        for t in by_girl[girls[i]]:
            if t[1] not in xs and t[2] not in ys:
                picked.append(t)
                if rec(i + 1, xs | {t[1]}, ys | {t[2]}):
                    return True
                picked.pop()
        return False

    return list(picked) if rec(0, frozenset(), frozenset()) else None


def max_matching_bruteforce(adjacency: dict[str, tuple[str, ...]]) -> int:
    """Largest injective partial map left -> right, by exhaustive search.

    Only for tiny graphs; used to cross-check the polynomial matcher.
    """
    left = list(adjacency)
    best = 0
    for k in range(len(left), 0, -1):
        for subset in combinations(left, k):
            rights = sorted({r for g in subset for r in adjacency[g]})
            if len(rights) < k:
                continue
            for perm in permutations(rights, k):
                if all(perm[i] in adjacency[g] for i, g in enumerate(subset)):
                    return k
    return best
