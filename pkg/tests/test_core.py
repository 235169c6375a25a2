import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hallkit import fixture_path, read_instance
from hallkit.core import (
    FmpInstance,
    FmpSolution,
    IndexOutOfRange,
    as_cmp,
    as_weight,
    check_solution,
    cmp_instance,
    element_loads,
    fmp,
    free_elements,
    validate_instance,
)
from hallkit.reductions import sat_to_fmp

CMP4 = {"g1": ("b1", "b2", "b3"), "g2": ("b1", "b3"), "g3": ("b2", "b4"), "g4": ("b1", "b4")}


def test_weights_are_exact():
    assert as_weight("2/4") == F(1, 2)
    assert as_weight(1) == 1
    with pytest.raises(TypeError):
        as_weight(0.5)
    with pytest.raises(ZeroDivisionError):
        as_weight("1/0")


@given(st.lists(st.fractions(), min_size=3, max_size=3))
def test_fraction_algebra(xs):
    a, b, c = xs
    assert (a + b) + c == a + (b + c)
    assert (a < b) + (a == b) + (a > b) == 1


def test_minimal_instance_valid():
    assert validate_instance(fmp({"g1": [{"b1": 1}]})).ok


def test_canonical_sum_checked():
    report = validate_instance(fmp({"g1": [{"b1": "1/2"}]}))
    assert [i.code for i in report.errors] == ["weight-sum"]
    assert report.errors[0].location == "g1[0]"
    assert validate_instance(fmp({"g1": [{"b1": "1/2"}]}, canonical=False)).ok


def test_structural_errors_reported():
    inst = FmpInstance(("b1", "b1"), fmp({"g": [{"b1": 1}], "h": [{"b2": 1}]}).sets)
    codes = {i.code for i in validate_instance(inst).errors}
    assert codes == {"duplicate-element", "undeclared-element"}


def test_empty_set_and_unused_element_warn():
    inst = FmpInstance(("b1", "b9"), fmp({"g1": [{"b1": 1}], "g2": []}).sets)
    report = validate_instance(inst)
    assert report.ok
    assert {i.code for i in report.warnings} == {"empty-set", "unused-element"}


def test_psi_prime_reduction_valid():
    inst = read_instance(fixture_path("psi_prime_reference.fmp"))
    assert validate_instance(inst).ok
    assert validate_instance(sat_to_fmp(read_instance(fixture_path("psi_prime.cnf")))[0]).ok


def test_check_solution_loads():
    inst = fmp({"g1": [{"b1": 1}]})
    rep = check_solution(inst, FmpSolution({"g1": 0}))
    assert rep.feasible and rep.loads["b1"] == 1
    inst = fmp({"g1": [{"b1": "1/2", "b2": "1/2"}], "g2": [{"b1": "2/3", "b3": "1/3"}]})
    rep = check_solution(inst, FmpSolution({"g1": 0, "g2": 0}))
    assert not rep.feasible and rep.overloaded == {"b1": F(7, 6)}


def test_check_solution_transversal_and_range():
    inst = cmp_instance(CMP4)
    choice = {"g1": 2, "g2": 0, "g3": 0, "g4": 1}  # b3, b1, b2, b4
    assert check_solution(inst, FmpSolution(choice)).feasible
    with pytest.raises(IndexOutOfRange):
        check_solution(inst, FmpSolution({**choice, "g2": 5}))


def test_empty_set_never_feasible():
    inst = fmp({"g1": [{"b1": 1}], "g2": []})
    assert not check_solution(inst, FmpSolution({"g1": 0})).feasible


def test_as_cmp():
    assert as_cmp(read_instance(fixture_path("cmp4.fmp"))) == CMP4
    assert as_cmp(fmp({"g1": [{"b1": "1/2", "b2": "1/2"}]})) is None
    assert len(as_cmp(read_instance(fixture_path("cmp4_step5_r5.fmp")))) == 4


def test_free_elements():
    assert free_elements(fmp({"g": [{"b": "2/3", "c": "1/3"}]}, canonical=False)) == {"b", "c"}
    inst = fmp({f"g{i}": [{"b": "1/2", f"c{i}": "1/2"}] for i in range(3)})
    assert "b" not in free_elements(inst)
    assert "b4" in free_elements(read_instance(fixture_path("psi_prime_reference.fmp")))


@given(st.dictionaries(st.sampled_from("ghij"), st.lists(st.sampled_from("abcd"), min_size=1, max_size=3, unique=True), min_size=1))
def test_cmp_feasibility_is_injective(cmp):
    inst = cmp_instance(cmp)
    for choice in itertools.product(*(range(len(ts.tradeoffs)) for ts in inst.sets)):
        sol = FmpSolution(dict(zip(inst.girls, choice)))
        picked = [cmp[g][i] for g, i in sol.choice.items()]
        loads = element_loads(inst, sol)
        assert check_solution(inst, sol).feasible == (len(set(picked)) == len(picked))
        assert all(loads[e] == picked.count(e) for e in set(picked))
