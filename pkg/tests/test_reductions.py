import random
from fractions import Fraction as F

import pytest

from hallkit import fixture_path, read_instance
from hallkit.core import FmpSolution, check_solution, fmp
from hallkit.generators import random_cmp, random_cnf, random_fmp
from hallkit.matching import solve_cmp
from hallkit.oracle import OracleBudget, solve_fmp_bruteforce, solve_sat_bruteforce
from hallkit.reductions import (
    FreshNames,
    NotInFirstNormalForm,
    cmp_to_sat,
    first_normal_form,
    pull_back_assignment,
    sat_to_fmp,
    second_normal_form,
    to_3cnf,
    tripartite_to_fmp,
)
from hallkit.satkit import Cnf, emit_dimacs

WIDE = OracleBudget(max_choice_tuples=10**30)
CMP4 = {"g1": ("b1", "b2", "b3"), "g2": ("b1", "b3"), "g3": ("b2", "b4"), "g4": ("b1", "b4")}


def rows(inst):
    return [[sorted((f.element, f.weight) for f in t.fragments) for t in ts.tradeoffs] for ts in inst.sets]


# --------------------------------------------------------------------------
# SAT -> FMP


def test_sat_to_fmp_single_negative():
    inst, _ = sat_to_fmp(Cnf.from_names([["-A"]]))
    assert rows(inst) == [[[("A.aux.1", 1)]]]


def test_sat_to_fmp_shapes():
    # A occurs positively twice and negatively once: M = 2
    cnf = Cnf.from_names([["A", "B"], ["A"], ["-A"]])
    inst, trace = sat_to_fmp(cnf)
    assert [ts.girl for ts in inst.sets] == ["g1", "g2", "g3"]
    assert rows(inst)[0][0] == [("A", F(1, 3)), ("A.aux.1", F(2, 3))]
    assert rows(inst)[1][0] == [("A", F(1, 3)), ("A.aux.2", F(2, 3))]
    assert rows(inst)[2][0] == [("A.aux.1", F(1, 2)), ("A.aux.2", F(1, 2))]
    assert trace.profiles[1].m == 2
    assert solve_fmp_bruteforce(inst) is None


def test_sat_to_fmp_empty_clause():
    inst, _ = sat_to_fmp(Cnf(1, ((1,), ())))
    assert inst.sets[1].tradeoffs == ()
    assert solve_fmp_bruteforce(inst) is None


def test_pull_back_single_clause():
    cnf = Cnf.from_names([["A"]])
    inst, trace = sat_to_fmp(cnf)
    assert pull_back_assignment(trace, FmpSolution({"g1": 0})) == {1: True}


def test_psi_prime_pull_back():
    cnf = read_instance(fixture_path("psi_prime.cnf"))
    inst, trace = sat_to_fmp(cnf)
    sol = solve_fmp_bruteforce(inst, WIDE)
    assert cnf.evaluate(pull_back_assignment(trace, sol))


def test_pull_back_property():
    rng = random.Random(3)
    for _ in range(500):
        cnf = random_cnf(rng, max_vars=6, max_clauses=8)
        inst, trace = sat_to_fmp(cnf)
        sol = solve_fmp_bruteforce(inst, WIDE)
        assert (sol is None) == (solve_sat_bruteforce(cnf) is None)
        if sol is not None:
            assert cnf.evaluate(pull_back_assignment(trace, sol))


# --------------------------------------------------------------------------
# CMP -> SAT


def test_cmp_to_sat_matches_fixture():
    cnf, form, trace = cmp_to_sat(CMP4)
    assert emit_dimacs(cnf) == fixture_path("cmp4_encoding.cnf").read_text()
    assert sum(all(l > 0 for l in c) for c in cnf.clauses) == 4
    assert sum(all(l < 0 for l in c) for c in cnf.clauses) == 6
    assert trace.var_meaning[cnf.var("b1.g4")] == ("b1", "g4")


def test_cmp_to_sat_small():
    assert cmp_to_sat({"g1": ["b1"]})[0].named_clauses() == [["b1.g1"]]
    cnf = cmp_to_sat({"g1": ["e"], "g2": ["e"], "g3": ["e"]})[0]
    assert len([c for c in cnf.clauses if len(c) == 2]) == 3


def test_cmp_to_sat_equisatisfiable():
    rng = random.Random(21)
    for _ in range(300):
        cmp = random_cmp(rng, max_girls=6, max_elements=6)
        assert solve_cmp(cmp).sat == (solve_sat_bruteforce(cmp_to_sat(cmp)[0]) is not None)


# --------------------------------------------------------------------------
# 3-CNF


def test_to_3cnf_example():
    cnf, bridges = to_3cnf(Cnf.from_names([list("ABCDE"), ["A", "B"]]))
    assert cnf.named_clauses() == [
        ["A", "B", "bridge1"], ["-bridge1", "C", "bridge2"], ["-bridge2", "D", "E"], ["A", "B"],
    ]
    assert bridges == (6, 7)


def test_to_3cnf_equisatisfiable():
    rng = random.Random(33)
    for _ in range(200):
        cnf = random_cnf(rng, max_vars=6, max_clauses=5, max_width=6)
        out, _ = to_3cnf(cnf)
        assert all(len(c) <= 3 for c in out.clauses)
        a = solve_sat_bruteforce(out)
        assert (a is None) == (solve_sat_bruteforce(cnf) is None)
        if a is not None:
            assert cnf.evaluate({v: a[v] for v in range(1, cnf.num_vars + 1)})


# --------------------------------------------------------------------------
# normal forms


def test_fresh_names():
    fresh = FreshNames(["b1", "b2", "b7", "x"])
    assert [fresh(), fresh()] == ["b8", "b9"]
    assert FreshNames(["p", "q"])() == "n1"


def test_nf1_four_way_split():
    out, trace = first_normal_form(fmp({"g1": [{"b1": 1}, {"b2": 1}, {"b3": 1}, {"b4": 1}]}))
    assert rows(out) == [
        [[("b1", 1)], [("b2", 1)], [("b5", 1)]],
        [[("b3", 1)], [("b4", 1)], [("b5", 1)]],
    ]
    assert trace.fresh_elements == ("b5",)
    sol = solve_fmp_bruteforce(out)
    assert check_solution(fmp({"g1": [{"b1": 1}, {"b2": 1}, {"b3": 1}, {"b4": 1}]}), trace.pull_back(sol)).feasible


def test_nf1_integral_pair_unchanged():
    inst = fmp({"g1": [{"a": 1}, {"b": 1}]})
    assert first_normal_form(inst)[0] == inst


def test_nf1_isolates_fractional():
    out, _ = first_normal_form(fmp({"g1": [{"b1": "1/2", "b2": "1/2"}, {"b": 1}, {"c": 1}]}))
    assert len(out.sets) == 2
    frac, rest = rows(out)
    assert frac[0] == [("b1", F(1, 2)), ("b2", F(1, 2))] and len(frac) == 2
    assert len(rest) == 3 and frac[1] in rest


def test_nf2_requires_nf1():
    with pytest.raises(NotInFirstNormalForm):
        second_normal_form(fmp({"g1": [{"a": 1}, {"b": 1}, {"c": 1}, {"d": 1}]}))


def test_nf2_thirds():
    nf1, _ = first_normal_form(fmp({"g1": [{"b1": "1/3", "b2": "1/3", "b3": "1/3"}, {"b": 1}]}))
    out, trace = second_normal_form(nf1)
    totals = out.total_weights()
    for ts in out.sets:
        for t in ts.tradeoffs:
            if not t.integral:
                assert len(t.fragments) == 2 and totals[t.fragments[1].element] <= 1
    assert len(trace.fresh_girls) > 0


def test_nf2_binary_with_free_second_unchanged():
    nf1, _ = first_normal_form(fmp({"g1": [{"b1": "1/2", "b2": "1/2"}, {"b": 1}]}))
    assert second_normal_form(nf1)[0] == nf1


def test_nf_random_equisatisfiable():
    rng = random.Random(16)
    for _ in range(200):
        inst = random_fmp(rng, max_girls=4, max_elements=4, max_tradeoffs=3, max_width=3)
        nf1, t1 = first_normal_form(inst)
        nf2, t2 = second_normal_form(nf1)
        for ts in nf1.sets:
            assert len(ts.tradeoffs) <= 3
        src = solve_fmp_bruteforce(inst, WIDE)
        out = solve_fmp_bruteforce(nf2, WIDE)
        assert (src is None) == (out is None)
        if out is not None:
            assert check_solution(inst, t1.pull_back(t2.pull_back(out))).feasible


# --------------------------------------------------------------------------
# tripartite gadget


def test_tripartite_examples():
    one = tripartite_to_fmp([("g1", "x1", "y1")])
    assert rows(one) == [
        [[("x1", F(1, 2)), ("y1", F(1, 2))]],
        [[("x1", F(1, 2)), ("z1", F(1, 2))]],
        [[("y1", F(1, 2)), ("z2", F(1, 2))]],
    ]
    assert solve_fmp_bruteforce(one) is not None
    assert solve_fmp_bruteforce(tripartite_to_fmp([("g1", "x1", "y1"), ("g2", "x1", "y1")])) is None
    assert solve_fmp_bruteforce(tripartite_to_fmp([("g1", "x1", "y1"), ("g2", "x2", "y2")])) is not None
