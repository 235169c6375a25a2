import random
from fractions import Fraction as F

import pytest
from support import build, planted, random_working

from hallkit import fixture_path, read_instance
from hallkit.core import as_cmp, cmp_instance
from hallkit.fragmentlogic import (
    RULES,
    AsetState,
    RewriteSite,
    RewriteTrace,
    StaleSite,
    TraceMismatch,
    apply_delta,
    apply_rule,
    find_applicable_sites,
    fragment_reduce,
    progress_metric,
    replay_trace,
)
from hallkit.generators import random_cmp, random_fmp
from hallkit.oracle import perfect_tripartite_matching, solve_fmp_bruteforce
from hallkit.reductions import tripartite_to_fmp

CHAIN = [
    ("R1", None, "cmp4_step1_r1"),
    ("R2", None, "cmp4_step2_r2"),
    ("R3", None, "cmp4_step3_r3"),
    ("R4", {"g8", "g9", "g10"}, "cmp4_step4_r4"),
    ("R5", None, "cmp4_step5_r5"),
]


def exhaust(inst, rule, girls=None):
    while True:
        sites = [s for s in find_applicable_sites(inst, rule)
                 if girls is None or all(inst.sets[i].girl in girls for i in s.sets)]
        if not sites:
            return inst
        inst, _ = apply_rule(inst, sites[0])


def test_worked_example_chain():
    cur = read_instance(fixture_path("cmp4_embedded.fmp"))
    first = find_applicable_sites(cur, "R1")[0]
    assert first.elements == ("b11",)
    for rule, girls, stem in CHAIN:
        cur = exhaust(cur, rule, girls)
        assert cur == read_instance(fixture_path(f"{stem}.fmp")), stem
    assert as_cmp(cur) == {
        "g1": ("b11.aux.1", "b21.aux.1", "b31.aux.1"),
        "g2": ("b11.aux.1", "b31.aux.1"),
        "g3": ("b21.aux.1", "b43.aux.1"),
        "g4": ("b11.aux.1", "b43.aux.1"),
    }


def test_r3_site_in_worked_example():
    state = read_instance(fixture_path("cmp4_step2_r2.fmp"))
    site = find_applicable_sites(state, "R3")[0]
    assert site.elements == ("b11.aux.1",) and site.n == 2
    after, _ = apply_rule(state, site)
    weights = sorted(w for _, _, f in after.fragments() if f.element == "b11.aux.1" for w in [f.weight])
    assert weights == [F(1, 2), F(1, 2), 1]


def test_r4_renames_globally():
    inst = build([("s", [[("a", 1)], [("b", 1)]]), ("h", [[("b", 1)], [("c", 1)], [("d", 1)]])])
    site = find_applicable_sites(inst, "R4")[0]
    assert site.sets == (0,)
    after, delta = apply_rule(inst, site)
    assert [[[(f.element, f.weight) for f in t.fragments] for t in ts.tradeoffs] for ts in after.sets] == [
        [[("a", 1)], [("c", 1)], [("d", 1)]]
    ]
    assert delta.merges == (("b", "a"),)


def test_r5_merges_clique():
    half = F(1, 2)
    inst = build([
        ("p1", [[("c0", half)], [("c1", half)]]),
        ("p2", [[("c0", half)], [("c2", half)]]),
        ("p3", [[("c1", half)], [("c2", half)]]),
        ("h", [[("c1", 1)], [("o", 1)]]),
    ])
    (site,) = find_applicable_sites(inst, "R5")
    after, _ = apply_rule(inst, site)
    assert [ts.girl for ts in after.sets] == ["h"]
    assert {f.element for _, _, f in after.fragments()} == {"c0", "o"}


def test_r2_and_r7():
    inst = build([
        ("s1", [[("e", F(2, 3))], [("x", 1)]]),
        ("s2", [[("e", F(1, 2))], [("y", 1)]]),
    ])
    assert find_applicable_sites(inst, "R2")
    sites = find_applicable_sites(inst, "R7")
    assert sites
    after, _ = apply_rule(inst, sites[0])
    assert len(after.sets) == 1
    assert (solve_fmp_bruteforce(after) is None) == (solve_fmp_bruteforce(inst) is None)


def test_r6_off_driver_examples():
    rng = random.Random(66)
    applied = 0
    for _ in range(100):
        inst = planted("R6", rng)
        for site in find_applicable_sites(inst, "R6"):
            after, _ = apply_rule(inst, site)
            assert len(after.sets) == len(inst.sets) - 1
            assert (solve_fmp_bruteforce(after) is None) == (solve_fmp_bruteforce(inst) is None)
            applied += 1
    assert applied > 20


def test_sites_satisfy_metric_on_random_instances():
    rng = random.Random(42)
    for _ in range(300):
        inst = random_working(rng, single=rng.random() < 0.5)
        for rule in RULES:
            for site in find_applicable_sites(inst, rule):
                after, delta = apply_rule(inst, site)
                assert progress_metric(after) < progress_metric(inst)
                assert apply_delta(inst, delta) == after


def test_stale_site_rejected():
    inst = build([("s", [[("a", 1)], [("b", 1)]])])
    with pytest.raises(StaleSite):
        apply_rule(inst, RewriteSite("R4", (0,), (), ("a", "c")))
    with pytest.raises(ValueError):
        apply_rule(inst, RewriteSite("R9"))


def test_integral_cmp_needs_only_preprocessing():
    rng = random.Random(5)
    for _ in range(100):
        cmp = random_cmp(rng, max_girls=5, max_elements=6, max_list=5)
        if not all(cmp.values()):
            continue
        inst = cmp_instance(cmp)
        out, trace, outcome = fragment_reduce(inst)
        assert outcome.all_integral
        assert set(trace.rules) <= {"NF1", "NF2", "working", "R1", "R4", "R7"}
        # contractions only touch elements added by the normal forms
        for step in trace.steps:
            if step.rule in ("R4", "R7"):
                assert set(step.site.elements) - set(inst.elements)


def test_tripartite_reaches_fixpoint():
    triples = [("g1", "x1", "y1"), ("g2", "x1", "y2")]
    out, _, outcome = fragment_reduce(tripartite_to_fmp(triples))
    assert outcome.kind == "fixpoint" and outcome.cmp is None
    assert progress_metric(out)[1] > 0
    assert (solve_fmp_bruteforce(out) is None) == (perfect_tripartite_matching(triples) is None)


def test_trace_json_and_replay():
    inst = read_instance(fixture_path("cmp4_embedded.fmp"))
    out, trace, _ = fragment_reduce(inst)
    again = RewriteTrace.loads(trace.dumps())
    assert again == trace
    assert replay_trace(inst, again, recompute=True) == out
    assert replay_trace(inst, RewriteTrace()) == inst
    for step in trace.steps:
        assert set(step.to_json()) >= {"rule", "site", "before-hash", "after-hash"}


def test_replay_detects_tampering():
    inst = read_instance(fixture_path("cmp4_embedded.fmp"))
    _, trace, _ = fragment_reduce(inst)
    with pytest.raises(TraceMismatch):
        replay_trace(read_instance(fixture_path("cmp4.fmp")), trace)
    steps = list(trace.steps)
    steps[3], steps[4] = steps[4], steps[3]
    with pytest.raises(TraceMismatch):
        replay_trace(inst, RewriteTrace(tuple(steps)))


def test_random_runs_replay_and_keep_aset():
    rng = random.Random(77)
    for _ in range(150):
        inst = random_fmp(rng, max_girls=3, max_elements=4, max_tradeoffs=3, max_width=3)
        out, trace, outcome = fragment_reduce(inst)
        assert replay_trace(inst, trace, recompute=True) == out
        assert AsetState.of(out).flag
        assert (solve_fmp_bruteforce(out) is None) == (solve_fmp_bruteforce(inst) is None)
        assert outcome.all_integral == (as_cmp(out) is not None)


def test_driver_rejects_working_input():
    with pytest.raises(ValueError):
        fragment_reduce(build([("g", [[("a", F(1, 2))]])]))
