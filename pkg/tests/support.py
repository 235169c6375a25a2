"""Shared helpers for the test suite."""

from __future__ import annotations

import itertools
import random
from collections import Counter
from collections.abc import Iterable, Mapping
from fractions import Fraction as F

from hallkit.core import FmpInstance, Fragment, HallViolator, Tradeoff, TradeoffSet

WEIGHTS = (F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4), F(1))

# every Hall violator produced anywhere in the suite, checked at session end
HALL_LOG: list[tuple[dict[str, tuple[str, ...]], HallViolator]] = []


def log_violator(cmp: Mapping[str, Iterable[str]], v: HallViolator | None) -> None:
    if v is not None:
        HALL_LOG.append(({g: tuple(cmp[g]) for g in cmp}, v))


def build(sets: Iterable[tuple[str, Iterable[Iterable[tuple[str, F]]]]], canonical: bool = False) -> FmpInstance:
    built = tuple(
        TradeoffSet(g, tuple(Tradeoff(tuple(Fragment(e, F(w)) for e, w in t)) for t in ts))
        for g, ts in sets
    )
    return FmpInstance((), built, canonical).with_sets(built)


def random_working(rng: random.Random, single: bool, elements: int = 5) -> FmpInstance:
    """Small non-canonical instance; ``single`` gives one fragment per tradeoff."""
    els = [f"e{i}" for i in range(rng.randint(2, elements))]
    sets = []
    for j in range(rng.randint(1, 5)):
        ts = []
        for _ in range(rng.randint(1, 3)):
            k = 1 if single else rng.randint(1, 2)
            ts.append([(e, rng.choice(WEIGHTS)) for e in rng.sample(els, k)])
        sets.append((f"g{j}", ts))
    return build(sets)


def _background(rng: random.Random, sets: list, integral_only: set[str], avoid_pairs: set[str],
                pool: list[str], count: int) -> None:
    """Append ``count`` random sets over ``pool``.

    Elements of ``integral_only`` get weight 1, and no tradeoff holds two
    elements of ``avoid_pairs``.
    """
    for j in range(count):
        ts = []
        for _ in range(rng.randint(1, 3)):
            chosen = rng.sample(pool, rng.randint(1, min(2, len(pool))))
            if len(set(chosen) & avoid_pairs) > 1:
                chosen = chosen[:1]
            ts.append([(e, F(1) if e in integral_only else rng.choice(WEIGHTS)) for e in chosen])
        sets.append((f"h{j}", ts))


def planted(rule: str, rng: random.Random) -> FmpInstance:
    """Random instance built around a site of ``rule``."""
    others = [f"o{i}" for i in range(rng.randint(1, 3))]
    sets: list = []
    if rule == "R4":
        sets.append(("s", [[("a", F(1))], [("b", F(1))]]))
        _background(rng, sets, {"a", "b"}, {"a", "b"}, ["a", "b", *others], rng.randint(1, 3))
    elif rule == "R5":
        k = rng.randint(2, 4)
        group = [f"c{i}" for i in range(k)]
        w = F(1, rng.randint(max(2, k - 1), k + 1))
        for x, y in itertools.combinations(group, 2):
            sets.append((f"p{x}{y}", [[(x, w)], [(y, w)]]))
        _background(rng, sets, set(group), set(group), group + others, rng.randint(0, 2))
    elif rule == "R6":
        p, p2 = rng.choice(WEIGHTS), rng.choice(WEIGHTS)
        t = [(x, rng.choice(WEIGHTS)) for x in rng.sample(others, rng.randint(1, len(others)))]
        t2 = [(x, rng.choice(WEIGHTS)) for x in rng.sample(others, rng.randint(1, len(others)))]
        sets.append(("s1", [[("e", p)], t]))
        sets.append(("s2", [[("f", p2)], t2]))
        for j in range(rng.randint(0, 2)):
            q = rng.choice([w for w in WEIGHTS if w + p > 1] or [F(1)])
            q2 = rng.choice([w for w in WEIGHTS if w + p2 > 1] or [F(1)])
            extra = [(x, rng.choice(WEIGHTS)) for x in rng.sample(others, rng.randint(0, 1))]
            sets.append((f"u{j}", [[("e", q), ("f", q2), *extra], [(rng.choice(others), F(1, 2))]]))
        _background(rng, sets, set(), set(), list(others), rng.randint(0, 2))
    elif rule == "R3":
        l = rng.randint(2, 3)
        highs = [rng.choice([F(2, 3), F(3, 4), F(4, 5), F(5, 6)]) for _ in range(rng.randint(1, 2))]
        fine = [F(1, d) for d in range(2, 7)]
        lows = [rng.choice([w for w in fine if w <= F(1, l) and w + min(highs) > 1] or [F(1, l)])
                for _ in range(l)]
        for j, w in enumerate(highs + lows):
            alt = [[(rng.choice(others), rng.choice(WEIGHTS))]] if rng.random() < 0.7 else []
            sets.append((f"r{j}", [[("e", w)], *alt]))
        _background(rng, sets, set(), set(), list(others), rng.randint(0, 2))
    elif rule == "R7":
        p = rng.choice(WEIGHTS[2:])
        p2 = rng.choice([w for w in WEIGHTS if w + p > 1])
        sets.append(("s1", [[("e", p), ("x", rng.choice(WEIGHTS))], [(rng.choice(others), F(1, 2))]]))
        sets.append(("s2", [[("e", p2)], [(rng.choice(others), F(1, 3))]]))
        _background(rng, sets, set(), set(), list(others), rng.randint(0, 2))
    else:
        return random_working(rng, rng.random() < 0.5)
    rng.shuffle(sets)
    return build(sets)


def cmp_isomorphic(a: Mapping[str, Iterable[str]], b: Mapping[str, Iterable[str]]) -> bool:
    """Same multiset of lists after some bijection of elements."""
    ea = sorted({e for v in a.values() for e in v})
    eb = sorted({e for v in b.values() for e in v})
    if len(ea) != len(eb) or len(a) != len(b):
        return False
    target = Counter(frozenset(v) for v in b.values())
    for perm in itertools.permutations(eb):
        m = dict(zip(ea, perm))
        if Counter(frozenset(m[e] for e in v) for v in a.values()) == target:
            return True
    return False
