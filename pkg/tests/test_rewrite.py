import numpy as np
import pytest
from hypothesis import given, settings

from oracles import simulate, tensor_of
from strategies import circuits, diagrams
from zxcut.circuit import circuit_to_diagram
from zxcut.evaluate import contract_dense
from zxcut.graph import Diagram, EdgeType, VertexType, t_count
from zxcut.rewrite import (
    RewriteStep,
    fuse_spiders,
    full_reduce,
    local_complement,
    pivot,
    to_graph_like,
)
from zxcut.scalar import ExactScalar

RULES = {
    "fuse", "identity-removal", "hopf", "self-loop", "colour-change", "local-complement",
    "pivot", "pivot-gadget", "gadget-fuse", "boundary-extract", "pauli-push", "scalar",
}


def is_graph_like(d: Diagram) -> bool:
    for v, t in d.ty.items():
        if t == VertexType.X:
            return False
        for w, m in d.adj[v].items():
            if w == v or sum(m) != 1:
                return False
            both_spiders = t != VertexType.BOUNDARY and d.ty[w] != VertexType.BOUNDARY
            if both_spiders and m != (0, 1):
                return False
    return True


def same_tensor(a: Diagram, b: Diagram) -> bool:
    return contract_dense(a).exact_equal(contract_dense(b))


def hub_with_outputs(hub_phase: int, leg_phases: list[int]) -> tuple[Diagram, int, list[int]]:
    """Z hub joined by Hadamard edges to Z legs, each leg with one output."""
    d = Diagram()
    hub = d.add_spider(VertexType.Z, hub_phase)
    legs = []
    for p in leg_phases:
        v = d.add_spider(VertexType.Z, p)
        d.add_edge(hub, v, EdgeType.HADAMARD)
        d.add_edge(v, d.add_output())
        legs.append(v)
    return d, hub, legs


def test_x_pi_becomes_z_with_hadamard_edge():
    d = Diagram()
    x = d.add_spider(VertexType.X, 4)
    d.add_edge(x, d.add_output())
    r = to_graph_like(d)
    assert r.ty[x] == VertexType.Z and r.phase[x] == 4
    (o,) = r.outputs
    assert r.adj[o][x] == (0, 1)
    assert same_tensor(d, r)


def test_adjacent_t_spiders_fuse_on_graph_like():
    d = Diagram()
    a, b = d.add_spider(VertexType.Z, 1), d.add_spider(VertexType.Z, 1)
    d.add_edge(a, b)
    d.add_edge(a, d.add_output())
    r = to_graph_like(d)
    assert [r.phase[v] for v in r.spiders()] == [2]
    assert same_tensor(d, r)


@settings(max_examples=100)
@given(circuits(max_qubits=6, max_gates=16))
def test_graph_like_on_circuits(c):
    d = circuit_to_diagram(c)
    r = to_graph_like(d)
    assert is_graph_like(r)
    assert same_tensor(d, r)
    assert np.allclose(contract_dense(r).to_complex(), simulate(c), atol=1e-9)


@given(diagrams())
def test_graph_like_on_random_diagrams(d):
    r = to_graph_like(d)
    assert is_graph_like(r)
    assert same_tensor(d, r)


@pytest.mark.parametrize("a, b, want", [(1, 1, 2), (1, 7, 0), (3, 6, 1)])
def test_fuse_adds_phases(a, b, want):
    d = Diagram()
    u, v = d.add_spider(VertexType.Z, a), d.add_spider(VertexType.Z, b)
    d.add_edge(u, v)
    d.add_edge(u, d.add_output())
    d.add_edge(v, d.add_output())
    r = fuse_spiders(d, u, v)
    assert r.phase[u] == want and v not in r.ty
    assert t_count(r) == want % 2
    assert same_tensor(d, r)


def test_fuse_x_spiders():
    d = Diagram()
    u, v = d.add_spider(VertexType.X, 1), d.add_spider(VertexType.X, 2)
    d.add_edge(u, v)
    d.add_edge(u, d.add_input(), EdgeType.HADAMARD)
    d.add_edge(v, d.add_output())
    r = fuse_spiders(d, u, v)
    assert r.ty[u] == VertexType.X and r.phase[u] == 3
    assert same_tensor(d, r)


def test_fuse_preconditions():
    d = Diagram()
    z, x = d.add_spider(VertexType.Z), d.add_spider(VertexType.X)
    d.add_edge(z, x)
    with pytest.raises(ValueError):
        fuse_spiders(d, z, x)
    z2 = d.add_spider(VertexType.Z)
    d.add_edge(z, z2, EdgeType.HADAMARD)
    with pytest.raises(ValueError):
        fuse_spiders(d, z, z2)


def test_lcomp_on_triangle():
    d, hub, legs = hub_with_outputs(2, [0, 0, 0])
    d.add_edge(legs[0], legs[1], EdgeType.HADAMARD)
    r = local_complement(d, hub)
    assert hub not in r.ty
    assert r.edge(legs[0], legs[1]) == (0, 0)
    assert r.edge(legs[0], legs[2]) == (0, 1) and r.edge(legs[1], legs[2]) == (0, 1)
    assert all(r.phase[v] == 6 for v in legs)
    assert np.allclose(contract_dense(r).to_complex(), tensor_of(d))
    assert same_tensor(d, r)


def test_lcomp_with_one_neighbour_shifts_its_phase():
    d, hub, (leg,) = hub_with_outputs(6, [1])
    r = local_complement(d, hub)
    assert list(r.spiders()) == [leg] and r.phase[leg] == 3
    assert same_tensor(d, r)


def test_lcomp_preconditions():
    d, hub, legs = hub_with_outputs(2, [0])
    with pytest.raises(ValueError):
        local_complement(d, d.outputs[0])
    with pytest.raises(ValueError):
        local_complement(d, legs[0])  # has a boundary neighbour
    d2, hub2, _ = hub_with_outputs(1, [0])
    with pytest.raises(ValueError):
        local_complement(d2, hub2)


@pytest.mark.parametrize("pu, pv, extra", [(0, 0, 1), (4, 0, 2), (4, 4, 3)])
def test_pivot(pu, pv, extra):
    # u and v share one neighbour and each has private ones
    d = Diagram()
    u, v = d.add_spider(VertexType.Z, pu), d.add_spider(VertexType.Z, pv)
    d.add_edge(u, v, EdgeType.HADAMARD)
    shared = d.add_spider(VertexType.Z, 1)
    d.add_edge(shared, d.add_output())
    for x in (u, v):
        d.add_edge(x, shared, EdgeType.HADAMARD)
    for k in range(extra):
        for x in (u, v):
            w = d.add_spider(VertexType.Z, k)
            d.add_edge(x, w, EdgeType.HADAMARD)
            d.add_edge(w, d.add_output())
    assert len(d.outputs) <= 7
    r = pivot(d, u, v)
    assert u not in r.ty and v not in r.ty
    assert np.allclose(contract_dense(r).to_complex(), tensor_of(d))
    assert same_tensor(d, r)


def test_pivot_preconditions():
    d, hub, legs = hub_with_outputs(0, [0, 0])
    with pytest.raises(ValueError):
        pivot(d, hub, legs[0])  # legs touch boundaries
    with pytest.raises(ValueError):
        pivot(d, hub, d.outputs[0])
    d2, hub2, legs2 = hub_with_outputs(0, [0])
    inner = d2.add_spider(VertexType.Z, 1)
    d2.add_edge(hub2, inner, EdgeType.HADAMARD)
    d2.add_edge(inner, legs2[0], EdgeType.HADAMARD)
    with pytest.raises(ValueError):
        pivot(d2, hub2, inner)  # T phase


@settings(max_examples=100)
@given(circuits(max_qubits=5, max_gates=20))
def test_clifford_reduces_to_boundary_layer(c):
    c.instructions = [i for i in c.instructions if i.op not in ("T", "TDG")]
    c.regions = {}
    d = circuit_to_diagram(c)
    r = full_reduce(d)
    assert t_count(r) == 0
    assert same_tensor(d, r)
    for v in r.spiders():
        assert any(r.ty[w] == VertexType.BOUNDARY for w in r.adj[v])


@given(diagrams())
def test_trace_accounts_for_the_scalar(d):
    steps: list[RewriteStep] = []
    r = full_reduce(d, trace=steps)
    s = d.scalar
    for step in steps:
        assert step.rule in RULES
        s = s * step.scalar
    assert s == r.scalar
    for step in steps:
        obj = step.to_json()
        assert ExactScalar.from_json(obj["scalar"]) == step.scalar


def test_full_reduce_is_deterministic(msc_d3):
    a, b = full_reduce(msc_d3), full_reduce(msc_d3)
    assert a.dumps() == b.dumps()


def test_full_reduce_keeps_d3_t_count(msc_d3):
    r = full_reduce(msc_d3)
    assert t_count(r) <= 15
    assert same_tensor(msc_d3, r)


def test_scalar_only_diagrams_evaluate():
    d = Diagram()
    d.add_spider(VertexType.Z, 2)
    a, b = d.add_spider(VertexType.Z, 1), d.add_spider(VertexType.Z, 3)
    d.add_edge(a, b, EdgeType.HADAMARD)
    r = full_reduce(d)
    assert not r.ty
    assert r.scalar == contract_dense(d).amplitude(0)
    assert abs(complex(r.scalar) - complex(tensor_of(d)[0])) < 1e-12


def test_self_loops():
    d = Diagram()
    v = d.add_spider(VertexType.Z, 1)
    d.add_edge(v, v, EdgeType.HADAMARD)
    d.add_edge(v, v)
    d.add_edge(v, d.add_output())
    r = full_reduce(d)
    assert np.allclose(contract_dense(r).to_complex(), tensor_of(d))
    assert same_tensor(d, r)
    assert t_count(r) == 1 and is_graph_like(r)
