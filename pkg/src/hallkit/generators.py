"""Seeded random instance generators.

Every generator takes a ``random.Random`` so identical seeds give identical
instances.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import FmpInstance, Tradeoff, TradeoffSet
from .matching import SmpInstance
from .reductions import TripartiteInstance
from .satkit.cnf import Cnf

__all__ = [
    "random_cnf",
    "random_cmp",
    "random_smp",
    "random_tripartite",
    "random_fmp",
    "random_split",
]


def random_cnf(rng: random.Random, max_vars: int = 10, max_clauses: int = 15, max_width: int = 3) -> Cnf:
    """Tautology-free CNF with 1..max_vars variables and 1..max_clauses clauses."""
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_clauses)
    clauses = []
    for _ in range(m):
        k = rng.randint(1, min(max_width, n))
        vs = rng.sample(range(1, n + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return Cnf.of(clauses, num_vars=n)


def random_cmp(rng: random.Random, max_girls: int = 8, max_elements: int = 8, max_list: int = 3) -> dict[str, tuple[str, ...]]:
    ng = rng.randint(1, max_girls)
    ne = rng.randint(1, max_elements)
    els = [f"b{i}" for i in range(1, ne + 1)]
    return {
        f"g{j}": tuple(rng.sample(els, rng.randint(1, min(max_list, ne))))
        for j in range(1, ng + 1)
    }


def random_smp(rng: random.Random, max_girls: int = 7, max_boys: int = 7) -> SmpInstance:
    girls = tuple(f"g{i}" for i in range(1, rng.randint(1, max_girls) + 1))
    boys = tuple(f"b{i}" for i in range(1, rng.randint(1, max_boys) + 1))
    p_list, p_edge = rng.choice((0.3, 0.6, 0.9)), rng.choice((0.3, 0.5, 0.7))
    girl_lists = {
        g: tuple(b for b in boys if rng.random() < p_edge) for g in girls if rng.random() < p_list
    }
    boy_lists = {
        b: tuple(g for g in girls if rng.random() < p_edge) for b in boys if rng.random() < p_list
    }
    return SmpInstance(girls, boys, girl_lists, boy_lists)


def random_tripartite(rng: random.Random, max_triples: int = 4, part: int = 3) -> TripartiteInstance:
    universe = [(f"g{a}", f"x{b}", f"y{c}") for a in range(1, part + 1)
                for b in range(1, part + 1) for c in range(1, part + 1)]
    return TripartiteInstance(tuple(rng.sample(universe, rng.randint(1, max_triples))))


def random_split(rng: random.Random, size: int, max_den: int = 4) -> list[Fraction]:
    """``size`` positive fractions summing to 1."""
    den = rng.randint(size, max(size, max_den))
    cuts = sorted(rng.sample(range(1, den), size - 1))
    bounds = [0, *cuts, den]
    return [Fraction(bounds[i + 1] - bounds[i], den) for i in range(size)]


def random_fmp(
    rng: random.Random,
    max_girls: int = 4,
    max_elements: int = 5,
    max_tradeoffs: int = 4,
    max_width: int = 3,
) -> FmpInstance:
    """Canonical instance: every tradeoff sums to 1."""
    els = [f"e{i}" for i in range(1, rng.randint(1, max_elements) + 1)]
    sets = []
    for j in range(1, rng.randint(1, max_girls) + 1):
        ts = []
        for _ in range(rng.randint(1, max_tradeoffs)):
            k = rng.randint(1, min(max_width, len(els)))
            ts.append(Tradeoff.of(zip(rng.sample(els, k), random_split(rng, k))))
        sets.append(TradeoffSet(f"g{j}", tuple(ts)))
    inst = FmpInstance(tuple(els), tuple(sets), True)
    return inst.with_sets(inst.sets)
