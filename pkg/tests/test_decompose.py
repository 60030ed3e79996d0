import json

import numpy as np
import pytest
from hypothesis import assume, given, settings

from oracles import cat, fidelity, t_product, tensor_of
from strategies import diagrams
from zxcut.decompose import (
    AUTO,
    MATERIALISE_LIMIT,
    REFERENCE_COUNTS,
    CutSchedule,
    CutStats,
    DecompositionError,
    DecompositionSum,
    ScheduleError,
    build_cat_state,
    cut_spider,
    decompose_bss,
    decompose_cat6,
    decompose_two_t,
    dedup_terms,
    expand_single_t,
    find_cat_hub,
    identity_expand,
    magic_from_cat,
    repeated_bound,
    repeated_decomposition,
    resolve_selector,
    run_cutting,
    run_strategy,
    select_cut,
)
from zxcut.evaluate import contract_dense, eval_sum
from zxcut.graph import Diagram, EdgeType, VertexType, t_count, t_spiders
from zxcut.rewrite import full_reduce, to_graph_like
from zxcut.scalar import ExactScalar


def raw_t_legs(n: int) -> tuple[Diagram, list[int]]:
    """(|0> + w|1>)^n as n one-legged Z(pi/4) spiders."""
    d = Diagram()
    vs = []
    for _ in range(n):
        v = d.add_spider(VertexType.Z, 1)
        d.add_edge(v, d.add_output())
        vs.append(v)
    return d, vs


def total(terms) -> np.ndarray:
    return eval_sum(list(terms), reduce=False).to_complex()


def exact_total(terms):
    return eval_sum(list(terms), reduce=False)


def gadget_diagram() -> Diagram:
    # two wires joined by a single T gadget
    d = Diagram()
    a, b = d.add_spider(VertexType.Z), d.add_spider(VertexType.Z)
    for v in (a, b):
        d.add_edge(v, d.add_output())
    hub, leaf = d.add_spider(VertexType.Z), d.add_spider(VertexType.Z, 1)
    d.add_edge(hub, a, EdgeType.HADAMARD)
    d.add_edge(hub, b, EdgeType.HADAMARD)
    d.add_edge(hub, leaf, EdgeType.HADAMARD)
    return d


# cutting


@pytest.mark.parametrize("beta", range(8))
def test_cut_lone_spider(beta):
    d = Diagram()
    v = d.add_spider(VertexType.Z, beta)
    s = cut_spider(d, v)
    assert len(s) == 2
    assert [t.scalar for t in s] == [ExactScalar.one(), ExactScalar.omega_power(beta)]
    assert sum((t.scalar for t in s), ExactScalar.zero()) == ExactScalar.phase_plus_one(beta)


def test_cut_preconditions():
    d = gadget_diagram()
    with pytest.raises(DecompositionError):
        cut_spider(d, d.outputs[0])
    with pytest.raises(DecompositionError):
        cut_spider(d, 999)
    x = d.add_spider(VertexType.X, 0)
    with pytest.raises(DecompositionError):
        cut_spider(d, x)


def test_cut_with_loops_and_parallel_edges():
    d = Diagram()
    v, w = d.add_spider(VertexType.Z, 3), d.add_spider(VertexType.X, 1)
    d.add_edge(v, v, EdgeType.HADAMARD)
    d.add_edge(v, v)
    d.add_edge(v, w, EdgeType.HADAMARD, n=2)
    d.add_edge(v, w)
    d.add_edge(w, d.add_output())
    d.add_edge(v, d.add_output(), EdgeType.HADAMARD)
    s = cut_spider(d, v)
    assert exact_total(s).exact_equal(contract_dense(d))
    assert np.allclose(sum(tensor_of(t) for t in s), tensor_of(d))


def test_forced_optimum():
    d = gadget_diagram()
    v = select_cut(d)
    branches = [full_reduce(t) for t in cut_spider(d, v)]
    assert all(t_count(b) == 0 for b in branches)


def test_select_cut_on_clifford():
    d, _ = raw_t_legs(0)
    d.add_spider(VertexType.Z, 2)
    with pytest.raises(DecompositionError):
        select_cut(d)


@settings(max_examples=60)
@given(diagrams(max_spiders=12, max_wires=4))
def test_greedy_matches_brute_force(d):
    g = to_graph_like(d)
    assume(t_count(g) > 0)

    def score(v: int) -> int:
        a, b = (full_reduce(t) for t in cut_spider(g, v))
        return t_count(g) - max(t_count(a), t_count(b))

    best = max(score(v) for v, t in g.ty.items() if t == VertexType.Z)
    assert score(select_cut(g)) == best


# schedules and run_cutting


def test_target_above_t_count_is_a_no_op():
    d = gadget_diagram()
    stats = CutStats()
    s = run_cutting(d, target_t=5, stats=stats)
    assert len(s) == 1 and stats.cuts == 0
    assert s.terms[0].dumps() == d.dumps()


def test_schedule_json():
    sch = CutSchedule([AUTO, {"label": "a"}, [{"label": "b"}, {"vertex": 3}]])
    assert len(sch) == 4
    assert CutSchedule.from_json(json.loads(json.dumps(sch.to_json()))).entries == sch.entries
    assert len(CutSchedule.auto(3)) == 3
    assert CutSchedule.from_json([AUTO]).entries == [AUTO]
    with pytest.raises(ScheduleError):
        CutSchedule.from_json({"version": 7, "cuts": []})


def test_resolve_selector():
    d = gadget_diagram()
    leaf = t_spiders(d)[0]
    d.add_label(leaf, "gadget.leaf")
    assert resolve_selector(d, leaf) == leaf
    assert resolve_selector(d, {"vertex": leaf}) == leaf
    assert resolve_selector(d, {"label": "gadget.leaf"}) == leaf
    for bad in ({"label": "nope"}, d.outputs[0], 12345, True, "x", {"foo": 1}):
        with pytest.raises(ScheduleError):
            resolve_selector(d, bad)


def test_schedule_naming_a_missing_spider():
    d = gadget_diagram()
    with pytest.raises(ScheduleError):
        run_cutting(d, CutSchedule([{"label": "ghost"}]), target_t=0)


def test_schedule_can_run_out():
    d, _ = raw_t_legs(3)
    hub = d.add_spider(VertexType.X)
    for v in list(d.spiders())[:3]:
        d.add_edge(v, hub)
    stats = CutStats()
    s = run_cutting(d, CutSchedule.auto(1), target_t=0, stats=stats)
    assert stats.cuts >= 1 and stats.levels == 1
    assert exact_total(s).exact_equal(contract_dense(d))


def test_d3_auto_cutting(msc_d3):
    stats = CutStats()
    s = run_cutting(msc_d3, target_t=1, stats=stats)
    assert s.t_counts() == [1, 1]
    assert stats.cuts == 2
    assert exact_total(s).exact_equal(contract_dense(msc_d3))
    # every recorded cut names the doubled-check spiders
    names = {lab for entry in stats.cut_log for labs in entry["labels"] for lab in labs}
    assert names == {"d3.check1", "d3.check2"}


def test_d3_shipped_schedule_matches_auto(msc_d3):
    from importlib import resources

    path = resources.files("zxcut.data").joinpath("schedule_msc_d3.json")
    sch = CutSchedule.from_json(json.loads(path.read_text()))
    auto = run_cutting(msc_d3, target_t=1)
    explicit = run_cutting(msc_d3, sch, target_t=1)
    assert sorted(t.dumps() for t in auto) == sorted(t.dumps() for t in explicit)


def test_cutting_in_parallel_gives_the_same_terms(msc_d3):
    a = run_cutting(msc_d3, target_t=1, jobs=1)
    b = run_cutting(msc_d3, target_t=1, jobs=2)
    assert [t.dumps() for t in a] == [t.dumps() for t in b]


# dedup


def test_dedup_merges_equal_diagrams():
    d = gadget_diagram()
    e = d.copy()
    e.scalar = ExactScalar.omega_power(2)
    s = dedup_terms(DecompositionSum([d, e]))
    assert len(s) == 1
    assert s.terms[0].scalar == d.scalar + e.scalar
    assert s.provenance[-1] == {"event": "dedup", "before": 2, "after": 1}


def test_dedup_drops_cancelled_terms():
    d = gadget_diagram()
    e = d.copy()
    e.scalar = -d.scalar
    assert len(dedup_terms([d, e])) == 0


def test_dedup_keeps_distinct_terms():
    d = gadget_diagram()
    e = d.copy()
    e.phase[t_spiders(e)[0]] = 3
    f, _ = raw_t_legs(2)
    s = dedup_terms([d, e, f])
    assert len(s) == 3


def test_dedup_does_not_mutate_inputs():
    d = gadget_diagram()
    before = d.dumps()
    dedup_terms([d, d.copy()])
    assert d.dumps() == before


# single-T expansion


def test_expand_clifford_is_identity():
    d = gadget_diagram()
    d.phase[t_spiders(d)[0]] = 2
    s = expand_single_t([d])
    assert len(s) == 1 and s.terms[0].dumps() == d.dumps()


@pytest.mark.parametrize("phase", [1, 3, 5, 7])
def test_expand_each_t_like_phase(phase):
    d = gadget_diagram()
    d.phase[t_spiders(d)[0]] = phase
    s = expand_single_t([d])
    assert len(s) == 2 and s.t_counts() == [0, 0]
    assert exact_total(s).exact_equal(contract_dense(d))


def test_expand_odd_x_spider():
    d = Diagram()
    x = d.add_spider(VertexType.X, 3)
    d.add_edge(x, d.add_output())
    d.add_edge(x, d.add_input(), EdgeType.HADAMARD)
    s = expand_single_t([d])
    assert len(s) == 2 and s.t_counts() == [0, 0]
    assert exact_total(s).exact_equal(contract_dense(d))


def test_expand_counts():
    d, _ = raw_t_legs(3)
    e, _ = raw_t_legs(3)
    e.phase[t_spiders(e)[0]] = 0
    s = expand_single_t(DecompositionSum([d, e]))
    assert len(s) == 2**3 + 2**2
    assert all(t == 0 for t in s.t_counts())


# two-T and BSS


def test_two_t_on_pair():
    d, (u, v) = raw_t_legs(2)
    s = decompose_two_t(d, u, v)
    assert len(s) == 2 and s.t_counts() == [0, 0]
    st = exact_total(s)
    assert st.exact_equal(contract_dense(d))
    assert np.allclose(st.to_complex(), t_product(2))


def test_two_t_twice_on_four():
    d, vs = raw_t_legs(4)
    terms = [x for t in decompose_two_t(d, vs[0], vs[1]) for x in decompose_two_t(t, vs[2], vs[3])]
    assert len(terms) == 4 < 2**4
    assert all(t_count(t) == 0 for t in terms)
    assert np.allclose(total(terms), t_product(4))


def test_two_t_preconditions():
    d, (u, v) = raw_t_legs(2)
    d.phase[v] = 2
    with pytest.raises(DecompositionError):
        decompose_two_t(d, u, v)
    with pytest.raises(DecompositionError):
        decompose_two_t(d, u, u)


def test_bss():
    d, vs = raw_t_legs(6)
    s = decompose_bss(d, vs)
    assert len(s) == 7 and s.t_counts() == [0] * 7
    st = exact_total(s)
    assert st.exact_equal(contract_dense(d))
    assert np.allclose(st.to_complex(), t_product(6))


def test_bss_in_context():
    # the six legs sit inside a larger diagram with T-dagger phases
    d, vs = raw_t_legs(6)
    for v in vs[::2]:
        d.phase[v] = 7
    hub = d.add_spider(VertexType.Z, 2)
    for v in vs[:3]:
        d.add_edge(v, hub, EdgeType.HADAMARD)
    s = decompose_bss(d, vs)
    assert exact_total(s).exact_equal(contract_dense(d))


def test_bss_preconditions():
    d, vs = raw_t_legs(5)
    with pytest.raises(DecompositionError):
        decompose_bss(d, vs)


# cat states


def test_cat1_is_scaled_zero():
    st = contract_dense(build_cat_state(1))
    assert st.amplitude(0) == ExactScalar.sqrt2_power(1)
    assert st.amplitude(1).is_zero()


@pytest.mark.parametrize("m", [2, 3, 4, 6])
def test_cat_amplitudes(m):
    v = contract_dense(build_cat_state(m)).to_complex()
    assert np.allclose(v, cat(m))
    odd = [x for x in range(1 << m) if bin(x).count("1") % 2]
    assert np.allclose(v[odd], 0)


def test_cat_needs_a_leg():
    with pytest.raises(DecompositionError):
        build_cat_state(0)


def test_cat6_decomposition():
    d = build_cat_state(6)
    s = decompose_cat6(d)
    assert len(s) == 3
    assert all(t <= 1 for t in s.t_counts())
    st = exact_total(s)
    assert st.exact_equal(contract_dense(d))
    assert fidelity(st.to_complex(), cat(6)) > 1 - 1e-12
    # the three terms are already Clifford here, so expansion adds nothing
    assert s.t_counts() == [0, 0, 0]
    assert len(expand_single_t(s)) == 3


def test_cat6_needs_a_pattern():
    d, _ = raw_t_legs(6)
    with pytest.raises(DecompositionError):
        decompose_cat6(d)
    with pytest.raises(DecompositionError):
        find_cat_hub(build_cat_state(4), m=6)
    with pytest.raises(DecompositionError):
        decompose_cat6(build_cat_state(4), hub=find_cat_hub(build_cat_state(4)))


def test_magic_from_cat6():
    s = magic_from_cat(build_cat_state(6), 2)
    assert len(s) == 3 < 2**5
    assert all(len(t.outputs) == 5 for t in s)
    v = total(s)
    ratio = v / t_product(5)
    assert np.allclose(ratio, ratio[0])
    assert np.allclose(v, t_product(5))
    assert s.t_counts() == [1, 1, 1]
    e = expand_single_t(s)
    assert len(e) == 6
    assert exact_total(e).exact_equal(exact_total(s))


def test_magic_from_cat2():
    s = magic_from_cat(build_cat_state(2), 0)
    assert len(s) == 1
    assert np.allclose(total(s), t_product(1))


def test_magic_from_cat_bad_leg():
    with pytest.raises(DecompositionError):
        magic_from_cat(build_cat_state(3), 3)
    d, _ = raw_t_legs(2)
    with pytest.raises(DecompositionError):
        magic_from_cat(d, 0)


# repeated identities and strategies


def test_repeated_decomposition_is_exact():
    d, vs = raw_t_legs(7)
    hub = d.add_spider(VertexType.Z)
    for v in vs:
        d.add_edge(v, hub, EdgeType.HADAMARD)
    for kind in ("bss", "cat", "two-t", "single-t"):
        s = repeated_decomposition(kind, [d])
        assert all(t == 0 for t in s.t_counts())
        assert eval_sum(s.terms).exact_equal(contract_dense(d)), kind


def test_repeated_decomposition_limit():
    d, _ = raw_t_legs(8)
    with pytest.raises(DecompositionError):
        repeated_decomposition("single-t", [d], limit=3)


def test_identity_expand_counts():
    d, _ = raw_t_legs(5)
    assert len(identity_expand("single-t", d)) == 32 == repeated_bound("single-t", 5)
    s = identity_expand("two-t", d)
    assert len(s) == 8 == repeated_bound("two-t", 5)
    assert exact_total(s).exact_equal(contract_dense(d))
    with pytest.raises(DecompositionError):
        identity_expand("bss", d)


def test_repeated_bounds():
    assert repeated_bound("single-t", 15) == 32768
    assert repeated_bound("two-t", 15) == 256
    assert repeated_bound("bss", 12) == 49
    assert repeated_bound("bss", 15) == 49 * 4
    # five legs give three terms that each keep one T
    assert repeated_bound("cat", 5) == 6
    assert repeated_bound("cat", 4) == 4
    assert repeated_bound("cat", 9) == 18
    with pytest.raises(DecompositionError):
        repeated_bound("nope", 3)


def test_d3_single_t_report(msc_d3):
    _, rep = run_strategy("single-t", msc_d3, circuit="msc-d3")
    assert rep.final_terms == 2**15 == REFERENCE_COUNTS["msc-d3"]["worst_case"]
    assert not rep.materialised and rep.final_terms > MATERIALISE_LIMIT


def test_d3_two_t_materialises(msc_d3):
    s, rep = run_strategy("two-t", msc_d3, circuit="msc-d3")
    assert rep.final_terms == len(s) == 256 and rep.materialised
    assert all(t == 0 for t in s.t_counts())


def test_d3_strategies_agree(msc_d3, d3_cut):
    ref = contract_dense(msc_d3)
    states = {"cut": eval_sum(d3_cut[0].terms)}
    for name in ("bss", "cat", "two-t"):
        s, rep = run_strategy(name, msc_d3, circuit="msc-d3")
        assert rep.materialised
        states[name] = eval_sum(s.terms)
    for name, st in states.items():
        assert st.exact_equal(ref), name


def test_report_invariants(d3_cut, d5_reuse):
    for s, rep in (d3_cut, d5_reuse):
        assert rep.final_terms == sum(2**t for t in rep.per_term_t_counts) == len(s)
        assert rep.terms_after_dedup == len(rep.per_term_t_counts)
        obj = rep.to_json()
        assert "wall_time_s" not in obj and "wall_time_s" in rep.to_json(include_timing=True)
        assert obj["reference_counts"] == REFERENCE_COUNTS[rep.circuit]
        json.dumps(obj)


def test_reports_are_reproducible(msc_d3, d3_cut):
    _, again = run_strategy("cut", msc_d3, circuit="msc-d3")
    assert json.dumps(again.to_json(), sort_keys=True) == json.dumps(d3_cut[1].to_json(), sort_keys=True)


def test_strategy_errors(msc_d3):
    with pytest.raises(DecompositionError):
        run_strategy("cut-reuse", msc_d3, circuit="msc-d3")
    with pytest.raises(DecompositionError):
        run_strategy("magic", msc_d3)


def test_d5_explicit_schedule_matches_auto(msc_d5, d5_reuse):
    from importlib import resources

    path = resources.files("zxcut.data").joinpath("schedule_msc_d5_reuse.json")
    sch = CutSchedule.from_json(json.loads(path.read_text()))
    s, rep = run_strategy("cut-reuse", msc_d5, circuit="msc-d5", schedule=sch)
    assert rep.final_terms == 8 and rep.terms_after_dedup == 4
    assert sorted(t.dumps() for t in s) == sorted(t.dumps() for t in d5_reuse[0])


def test_d5_plain_cut(msc_d5):
    s, rep = run_strategy("cut", msc_d5, circuit="msc-d5")
    assert rep.per_term_t_counts == [1, 1] and rep.final_terms == 4
