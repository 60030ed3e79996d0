"""ZX-diagrams as open multigraphs of phased spiders with an exact scalar."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator

import networkx as nx

from .scalar import ExactScalar, Phase

JSON_VERSION = 1


class VertexType(IntEnum):
    BOUNDARY = 0
    Z = 1
    X = 2


class EdgeType(IntEnum):
    PLAIN = 1
    HADAMARD = 2


# (plain count, hadamard count) between two vertices
Mult = tuple[int, int]
NO_EDGE: Mult = (0, 0)


def _bump(m: Mult, et: EdgeType, n: int) -> Mult:
    return (m[0] + n, m[1]) if et == EdgeType.PLAIN else (m[0], m[1] + n)


@dataclass
class Region:
    """A marked sub-diagram that can later be swapped for an equivalent one.

    ``ports`` lists, in the order of the replacement's output legs, the outside
    vertex each leg attaches to and the edge type of that attachment.
    ``outer_scalar`` is the part of the diagram scalar not owned by the region.
    """

    vertices: frozenset[int]
    ports: list[tuple[int, EdgeType]]
    outer_scalar: ExactScalar


@dataclass
class Diagram:
    ty: dict[int, VertexType] = field(default_factory=dict)
    phase: dict[int, int] = field(default_factory=dict)
    adj: dict[int, dict[int, Mult]] = field(default_factory=dict)
    inputs: list[int] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    scalar: ExactScalar = field(default_factory=ExactScalar.one)
    labels: dict[int, frozenset[str]] = field(default_factory=dict)
    regions: dict[str, Region] = field(default_factory=dict)
    next_id: int = 0

    # construction

    def add_vertex(self, kind: VertexType, phase: Phase | int = 0, vid: int | None = None) -> int:
        if vid is None:
            vid = self.next_id
        elif vid in self.ty:
            raise ValueError(f"vertex {vid} already exists")
        self.next_id = max(self.next_id, vid + 1)
        p = int(Phase(int(phase)))
        if kind == VertexType.BOUNDARY and p:
            raise ValueError("boundary vertices carry no phase")
        self.ty[vid] = VertexType(kind)
        self.phase[vid] = p
        self.adj[vid] = {}
        return vid

    def add_spider(self, kind: VertexType, phase: Phase | int = 0) -> int:
        if kind == VertexType.BOUNDARY:
            raise ValueError("use add_input/add_output for boundaries")
        return self.add_vertex(kind, phase)

    def add_input(self) -> int:
        v = self.add_vertex(VertexType.BOUNDARY)
        self.inputs.append(v)
        return v

    def add_output(self) -> int:
        v = self.add_vertex(VertexType.BOUNDARY)
        self.outputs.append(v)
        return v

    def add_edge(self, u: int, v: int, et: EdgeType = EdgeType.PLAIN, n: int = 1) -> None:
        if u not in self.ty or v not in self.ty:
            raise KeyError(f"edge endpoint missing: {u}-{v}")
        m = _bump(self.adj[u].get(v, NO_EDGE), et, n)
        self.adj[u][v] = m
        self.adj[v][u] = m

    def set_edge(self, u: int, v: int, m: Mult) -> None:
        if m == NO_EDGE:
            self.adj[u].pop(v, None)
            self.adj[v].pop(u, None)
        else:
            self.adj[u][v] = m
            self.adj[v][u] = m

    def remove_edges(self, u: int, v: int) -> None:
        self.set_edge(u, v, NO_EDGE)

    def remove_vertex(self, v: int) -> None:
        for w in list(self.adj[v]):
            if w != v:
                del self.adj[w][v]
        del self.adj[v]
        del self.ty[v]
        del self.phase[v]
        self.labels.pop(v, None)
        if v in self.inputs:
            self.inputs.remove(v)
        if v in self.outputs:
            self.outputs.remove(v)

    def add_label(self, v: int, *names: str) -> None:
        self.labels[v] = self.labels.get(v, frozenset()) | frozenset(names)

    def add_phase(self, v: int, p: int) -> None:
        self.phase[v] = (self.phase[v] + p) % 8

    def mul_scalar(self, s: ExactScalar) -> None:
        self.scalar = self.scalar * s

    # queries

    @property
    def boundary_order(self) -> list[int]:
        return self.inputs + self.outputs

    def vertices(self) -> Iterator[int]:
        return iter(self.ty)

    def num_vertices(self) -> int:
        return len(self.ty)

    def edges(self) -> Iterator[tuple[int, int, Mult]]:
        for u, nb in self.adj.items():
            for v, m in nb.items():
                if u <= v:
                    yield u, v, m

    def num_edges(self) -> int:
        return sum(m[0] + m[1] for _, _, m in self.edges())

    def neighbors(self, v: int) -> list[int]:
        return [w for w in self.adj[v] if w != v]

    def degree(self, v: int) -> int:
        d = 0
        for w, m in self.adj[v].items():
            d += (m[0] + m[1]) * (2 if w == v else 1)
        return d

    def edge(self, u: int, v: int) -> Mult:
        return self.adj[u].get(v, NO_EDGE)

    def is_boundary(self, v: int) -> bool:
        return self.ty[v] == VertexType.BOUNDARY

    def spiders(self) -> list[int]:
        return [v for v, t in self.ty.items() if t != VertexType.BOUNDARY]

    def find_label(self, name: str) -> list[int]:
        return sorted(v for v, ls in self.labels.items() if name in ls)

    def copy(self) -> Diagram:
        return Diagram(
            ty=dict(self.ty),
            phase=dict(self.phase),
            adj={u: dict(nb) for u, nb in self.adj.items()},
            inputs=list(self.inputs),
            outputs=list(self.outputs),
            scalar=self.scalar,
            labels=dict(self.labels),
            regions=dict(self.regions),
            next_id=self.next_id,
        )

    def check(self) -> None:
        """Raise AssertionError if a structural invariant is broken."""
        bset = set(self.boundary_order)
        assert len(bset) == len(self.boundary_order), "duplicate boundary"
        for v, t in self.ty.items():
            assert v in self.adj and v in self.phase
            if t == VertexType.BOUNDARY:
                assert v in bset, f"boundary {v} not in boundary order"
                assert self.phase[v] == 0, f"boundary {v} has a phase"
                assert self.degree(v) == 1, f"boundary {v} has degree {self.degree(v)}"
            else:
                assert v not in bset
        for u, nb in self.adj.items():
            for v, m in nb.items():
                assert v in self.ty, f"dangling edge {u}-{v}"
                assert self.adj[v][u] == m, f"asymmetric edge {u}-{v}"
                assert m != NO_EDGE

    # serialization

    def to_json(self) -> dict:
        verts = []
        for v in sorted(self.ty):
            item = {"id": v, "kind": self.ty[v].name, "phase": self.phase[v]}
            if v in self.labels:
                item["labels"] = sorted(self.labels[v])
            verts.append(item)
        edges = []
        for u, v, m in sorted(self.edges()):
            edges.extend({"src": u, "dst": v, "kind": "plain"} for _ in range(m[0]))
            edges.extend({"src": u, "dst": v, "kind": "hadamard"} for _ in range(m[1]))
        return {
            "version": JSON_VERSION,
            "vertices": verts,
            "edges": edges,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "scalar": self.scalar.to_json(),
            "t_count": t_count(self),
        }

    @classmethod
    def from_json(cls, obj: dict) -> Diagram:
        if obj.get("version") != JSON_VERSION:
            raise ValueError(f"unsupported diagram version {obj.get('version')!r}")
        d = cls()
        for item in obj["vertices"]:
            d.add_vertex(VertexType[item["kind"]], item["phase"], vid=item["id"])
            if item.get("labels"):
                d.add_label(item["id"], *item["labels"])
        for e in obj["edges"]:
            kind = {"plain": EdgeType.PLAIN, "hadamard": EdgeType.HADAMARD}[e["kind"]]
            d.add_edge(e["src"], e["dst"], kind)
        d.inputs = list(obj["inputs"])
        d.outputs = list(obj["outputs"])
        d.scalar = ExactScalar.from_json(obj["scalar"])
        d.check()
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, ensure_ascii=False)

    @classmethod
    def loads(cls, text: str) -> Diagram:
        return cls.from_json(json.loads(text))


def t_count(d: Diagram) -> int:
    return sum(1 for v, t in d.ty.items() if t != VertexType.BOUNDARY and d.phase[v] & 1)


def t_spiders(d: Diagram) -> list[int]:
    return sorted(v for v, t in d.ty.items() if t != VertexType.BOUNDARY and d.phase[v] & 1)


def _embed(target: Diagram, src: Diagram) -> dict[int, int]:
    """Copy every vertex and edge of ``src`` into ``target`` under fresh ids."""
    m: dict[int, int] = {}
    for v in sorted(src.ty):
        m[v] = target.add_vertex(src.ty[v], src.phase[v])
        if v in src.labels:
            target.labels[m[v]] = src.labels[v]
    for u, v, mult in src.edges():
        target.set_edge(m[u], m[v], mult)
    target.scalar = target.scalar * src.scalar
    return m


def tensor_product(a: Diagram, b: Diagram) -> Diagram:
    d = Diagram()
    ma = _embed(d, a)
    mb = _embed(d, b)
    d.inputs = [ma[v] for v in a.inputs] + [mb[v] for v in b.inputs]
    d.outputs = [ma[v] for v in a.outputs] + [mb[v] for v in b.outputs]
    return d


def _compose_type(a: EdgeType, b: EdgeType) -> EdgeType:
    return EdgeType.PLAIN if a == b else EdgeType.HADAMARD


def boundary_edge(d: Diagram, b: int) -> tuple[int, EdgeType]:
    """The unique neighbour of boundary ``b`` and the type of the edge to it."""
    (w, m), = d.adj[b].items()
    return w, (EdgeType.PLAIN if m[0] else EdgeType.HADAMARD)


def compose(a: Diagram, b: Diagram) -> Diagram:
    """Plug the outputs of ``a`` into the inputs of ``b`` (apply a, then b)."""
    if len(a.outputs) != len(b.inputs):
        raise ValueError(f"arity mismatch: {len(a.outputs)} outputs vs {len(b.inputs)} inputs")
    d = Diagram()
    ma = _embed(d, a)
    mb = _embed(d, b)
    d.inputs = [ma[v] for v in a.inputs]
    d.outputs = [mb[v] for v in b.outputs]
    for o, i in zip(a.outputs, b.inputs):
        x, e1 = boundary_edge(d, ma[o])
        y, e2 = boundary_edge(d, mb[i])
        d.remove_vertex(ma[o])
        d.remove_vertex(mb[i])
        d.add_edge(x, y, _compose_type(e1, e2))
    return d


def plug(d: Diagram, slots: list[int], state: Diagram) -> Diagram:
    """Attach the outputs of a state diagram to the given spiders of ``d``.

    Output ``i`` of ``state`` is connected, through the edge that fed it, to
    ``slots[i]``.  The result owns both scalars.
    """
    if state.inputs or len(state.outputs) != len(slots):
        raise ValueError("plug expects a state with one output per slot")
    r = d.copy()
    ms = _embed(r, state)
    for slot, o in zip(slots, state.outputs):
        x, e = boundary_edge(r, ms[o])
        r.remove_vertex(ms[o])
        r.add_edge(slot, x, e)
    return r


# canonical hashing

def _nx_graph(d: Diagram, with_scalar: bool) -> nx.Graph:
    bidx = {v: i for i, v in enumerate(d.boundary_order)}
    g = nx.Graph()
    for v, t in d.ty.items():
        if t == VertexType.BOUNDARY:
            lab = f"B{bidx[v]}{'i' if v in d.inputs else 'o'}"
        else:
            loop = d.adj[v].get(v, NO_EDGE)
            lab = f"{t.name}{d.phase[v]}L{loop[0]}.{loop[1]}"
        g.add_node(v, label=lab)
    for u, v, m in d.edges():
        if u != v:
            g.add_edge(u, v, label=f"{m[0]}.{m[1]}")
    if with_scalar:
        g.graph["scalar"] = (d.scalar.coeffs, d.scalar.half_power)
    return g


def structure_hash(d: Diagram) -> str:
    """Digest of the diagram up to internal relabelling, ignoring the scalar."""
    g = _nx_graph(d, False)
    wl = nx.weisfeiler_lehman_graph_hash(g, node_attr="label", edge_attr="label", iterations=5)
    degs = sorted((g.nodes[v]["label"], d.degree(v)) for v in g.nodes)
    h = hashlib.sha256()
    h.update(wl.encode())
    h.update(repr((len(d.inputs), len(d.outputs), g.number_of_nodes(), g.number_of_edges(), degs)).encode())
    return h.hexdigest()


def canonical_hash(d: Diagram) -> str:
    """Digest covering structure, phases, boundary order and the exact scalar."""
    h = hashlib.sha256()
    h.update(structure_hash(d).encode())
    h.update(repr((d.scalar.coeffs, d.scalar.half_power)).encode())
    return h.hexdigest()


def same_structure(a: Diagram, b: Diagram) -> bool:
    """Exact isomorphism test fixing boundary positions (scalars ignored)."""
    if len(a.inputs) != len(b.inputs) or len(a.outputs) != len(b.outputs):
        return False
    ga, gb = _nx_graph(a, False), _nx_graph(b, False)
    return nx.is_isomorphic(
        ga,
        gb,
        node_match=lambda x, y: x["label"] == y["label"],
        edge_match=lambda x, y: x["label"] == y["label"],
    )


def relabel(d: Diagram, mapping: dict[int, int]) -> Diagram:
    """Rename vertices; ``mapping`` must be a bijection on the vertex set."""
    r = Diagram(scalar=d.scalar)
    for v in d.ty:
        r.add_vertex(d.ty[v], d.phase[v], vid=mapping[v])
        if v in d.labels:
            r.labels[mapping[v]] = d.labels[v]
    for u, v, m in d.edges():
        r.set_edge(mapping[u], mapping[v], m)
    r.inputs = [mapping[v] for v in d.inputs]
    r.outputs = [mapping[v] for v in d.outputs]
    return r
