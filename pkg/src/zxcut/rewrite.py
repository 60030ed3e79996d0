"""Clifford simplification of ZX-diagrams in graph-like form.

Rules are applied in a fixed order and, inside one pass, to the lowest vertex
id first, so the result of :func:`full_reduce` is a deterministic function of
its input.  Every rule multiplies the diagram scalar by the exact factor that
keeps the tensor unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graph import NO_EDGE, Diagram, EdgeType, Mult, VertexType
from .scalar import ExactScalar

H1: Mult = (0, 1)
P1: Mult = (1, 0)

_INV_SQRT2 = ExactScalar.sqrt2_power(-1)
_HALF = ExactScalar.sqrt2_power(-2)


class InvariantViolation(RuntimeError):
    """A rewrite produced a diagram that breaks a structural invariant."""


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    vertices: tuple[int, ...]
    scalar: ExactScalar

    def to_json(self) -> dict:
        return {"rule": self.rule, "vertices": list(self.vertices), "scalar": self.scalar.to_json()}


def _et(m: Mult) -> EdgeType:
    return EdgeType.PLAIN if m[0] else EdgeType.HADAMARD


def _toggle_type(et: EdgeType) -> EdgeType:
    return EdgeType.HADAMARD if et == EdgeType.PLAIN else EdgeType.PLAIN


class Rewriter:
    """Applies rewrite rules to one diagram in place."""

    def __init__(self, d: Diagram, trace: bool = False) -> None:
        self.d = d
        self.trace: list[RewriteStep] | None = [] if trace else None

    def _log(self, rule: str, verts: tuple[int, ...], s: ExactScalar) -> None:
        if not (s.coeffs == (1, 0, 0, 0) and s.half_power == 0):
            self.d.scalar = self.d.scalar * s
        if self.trace is not None:
            self.trace.append(RewriteStep(rule, verts, s))

    # basic moves

    def is_z(self, v: int) -> bool:
        return self.d.ty.get(v) == VertexType.Z

    def colour_change_all(self) -> int:
        d = self.d
        xs = sorted(v for v, t in d.ty.items() if t == VertexType.X)
        for v in xs:
            d.ty[v] = VertexType.Z
            for w, m in list(d.adj[v].items()):
                if w != v:
                    d.set_edge(v, w, (m[1], m[0]))
            self._log("colour-change", (v,), ExactScalar.one())
        return len(xs)

    def fuse(self, u: int, v: int) -> None:
        """Merge Z spider ``v`` into ``u``; they must share a plain edge."""
        d = self.d
        m = d.adj[u][v]
        if not m[0] or not (self.is_z(u) and self.is_z(v)):
            raise InvariantViolation(f"cannot fuse {u} and {v}")
        loop_p, loop_h = m[0] - 1, m[1]
        d.remove_edges(u, v)
        lv = d.adj[v].get(v, NO_EDGE)
        loop_p += lv[0]
        loop_h += lv[1]
        for w, mw in list(d.adj[v].items()):
            if w == v:
                continue
            del d.adj[w][v]
            old = d.adj[u].get(w, NO_EDGE)
            d.set_edge(u, w, (old[0] + mw[0], old[1] + mw[1]))
        d.phase[u] = (d.phase[u] + d.phase[v]) % 8
        if v in d.labels:
            d.add_label(u, *d.labels[v])
        d.adj[v] = {}
        d.remove_vertex(v)
        if loop_p or loop_h:
            old = d.adj[u].get(u, NO_EDGE)
            d.set_edge(u, u, (old[0] + loop_p, old[1] + loop_h))
        self._log("fuse", (u, v), ExactScalar.one())
        self.clean(u)

    def clean(self, u: int) -> None:
        """Remove self-loops and parallel edges around Z spider ``u``."""
        d = self.d
        if u not in d.ty:
            return
        loop = d.adj[u].pop(u, None)
        if loop is not None:
            p, h = loop
            if h:
                d.phase[u] = (d.phase[u] + 4 * h) % 8
                self._log("self-loop", (u,), ExactScalar.sqrt2_power(-h))
            elif p:
                self._log("self-loop", (u,), ExactScalar.one())
        for w in sorted(d.adj[u]):
            if u not in d.ty or w not in d.adj.get(u, {}):
                continue
            if not self.is_z(w):
                continue
            m = d.adj[u][w]
            if m[0]:
                self.fuse(u, w)
            elif m[1] >= 2:
                pairs = m[1] // 2
                d.set_edge(u, w, (0, m[1] % 2))
                self._log("hopf", (u, w), ExactScalar.sqrt2_power(-2 * pairs))

    def connect(self, u: int, v: int, et: EdgeType, rule: tuple[str, tuple[int, ...]] | None = None) -> None:
        """Add one edge and restore graph-like form around it."""
        d = self.d
        d.add_edge(u, v, et)
        if rule is not None:
            self._log(rule[0], rule[1], ExactScalar.one())
        if u == v:
            self.clean(u)
        elif self.is_z(u) and self.is_z(v):
            a, b = (u, v) if u < v else (v, u)
            self.clean(a)

    def toggle(self, u: int, v: int) -> int:
        """Add a Hadamard edge, cancelling an existing one; returns 1 on cancellation.

        A cancelled pair of parallel Hadamard edges is worth a factor 1/2,
        which the caller folds into its own scalar.
        """
        d = self.d
        if d.adj[u].get(v) == H1:
            d.remove_edges(u, v)
            return 1
        d.set_edge(u, v, H1)
        return 0

    # structure checks

    def interior(self, v: int) -> bool:
        """Z spider whose neighbours are all Z spiders joined by single Hadamard edges."""
        d = self.d
        if not self.is_z(v):
            return False
        for w, m in d.adj[v].items():
            if w == v or m != H1 or d.ty[w] != VertexType.Z:
                return False
        return True

    def boundary_neighbours(self, v: int) -> list[int] | None:
        """Boundary neighbours of ``v`` if all its other edges are single H-edges to Z spiders."""
        d = self.d
        bs = []
        for w, m in d.adj[v].items():
            if w == v:
                return None
            if d.ty[w] == VertexType.BOUNDARY:
                bs.append(w)
            elif m != H1 or d.ty[w] != VertexType.Z:
                return None
        return bs

    # graph-like conversion

    def to_graph_like(self) -> None:
        d = self.d
        self.colour_change_all()
        for v in sorted(d.ty):
            if v in d.ty and self.is_z(v):
                self.clean(v)
        # boundary wired straight to boundary: route it through an identity spider
        for b in sorted(d.boundary_order):
            if b not in d.ty:
                continue
            (w, m), = d.adj[b].items()
            if d.ty[w] == VertexType.BOUNDARY and b < w:
                d.remove_edges(b, w)
                z = d.add_vertex(VertexType.Z, 0)
                d.add_edge(b, z, EdgeType.PLAIN)
                d.add_edge(z, w, _et(m))
                self._log("boundary-extract", (b, w, z), ExactScalar.one())

    # Clifford rules

    def remove_ids(self) -> int:
        d = self.d
        n = 0
        for v in sorted(d.ty):
            if v not in d.ty or not self.is_z(v) or d.phase[v]:
                continue
            nb = d.adj[v]
            if len(nb) != 2 or v in nb:
                continue
            (a, ma), (b, mb) = sorted(nb.items())
            if sum(ma) != 1 or sum(mb) != 1:
                continue
            if d.ty[a] == VertexType.BOUNDARY and d.ty[b] == VertexType.BOUNDARY:
                continue
            et = EdgeType.PLAIN if _et(ma) == _et(mb) else EdgeType.HADAMARD
            d.remove_vertex(v)
            self.connect(a, b, et, rule=("identity-removal", (v,)))
            n += 1
        return n

    def lcomp(self, v: int) -> None:
        d = self.d
        a = d.phase[v]
        if a not in (2, 6) or not self.interior(v):
            raise ValueError(f"local complementation precondition fails at {v}")
        ns = sorted(d.adj[v])
        k = len(ns)
        s = ExactScalar.omega_power(1 if a == 2 else 7) * ExactScalar.sqrt2_power((k - 2) * (k - 1) // 2)
        d.remove_vertex(v)
        cancelled = sum(self.toggle(x, y) for x, y in combinations(ns, 2))
        s = s * ExactScalar.sqrt2_power(-2 * cancelled)
        for x in ns:
            d.phase[x] = (d.phase[x] - a) % 8
        self._log("local-complement", (v,), s)

    def lcomp_all(self) -> int:
        n = 0
        for v in sorted(self.d.ty):
            if v in self.d.ty and self.d.phase.get(v) in (2, 6) and self.interior(v):
                self.lcomp(v)
                n += 1
        return n

    def pivot(self, u: int, v: int) -> None:
        d = self.d
        if d.adj[u].get(v) != H1 or not (self.interior(u) and self.interior(v)):
            raise ValueError(f"pivot precondition fails at {u}-{v}")
        a, b = d.phase[u], d.phase[v]
        if a % 4 or b % 4:
            raise ValueError(f"pivot needs Pauli phases at {u}-{v}")
        nu = set(d.adj[u]) - {v}
        nv = set(d.adj[v]) - {u}
        W = nu & nv
        U = sorted(nu - W)
        V = sorted(nv - W)
        Ws = sorted(W)
        k0, k1, k2 = len(U), len(V), len(Ws)
        s = ExactScalar.sqrt2_power(k0 * k2 + k1 * k2 + k0 * k1 - (k0 + k1 + 2 * k2 - 1))
        if a == 4 and b == 4:
            s = -s
        d.remove_vertex(u)
        d.remove_vertex(v)
        cancelled = 0
        for x in U:
            for y in V:
                cancelled += self.toggle(x, y)
        for x in V:
            for y in Ws:
                cancelled += self.toggle(x, y)
        for x in U:
            for y in Ws:
                cancelled += self.toggle(x, y)
        s = s * ExactScalar.sqrt2_power(-2 * cancelled)
        for x in U:
            d.phase[x] = (d.phase[x] + b) % 8
        for x in V:
            d.phase[x] = (d.phase[x] + a) % 8
        for x in Ws:
            d.phase[x] = (d.phase[x] + a + b + 4) % 8
        self._log("pivot", (u, v), s)

    def _not_hub(self, u: int) -> bool:
        return all(len(self.d.adj[w]) != 1 for w in self.d.adj[u])

    def pivot_all(self) -> int:
        d = self.d
        n = 0
        for u in sorted(d.ty):
            if u not in d.ty or d.phase[u] % 4 or not self.interior(u):
                continue
            for v in sorted(d.adj[u]):
                if v > u and d.phase[v] % 4 == 0 and self.interior(v):
                    self.pivot(u, v)
                    n += 1
                    break
        return n

    def gadgetize(self, v: int) -> tuple[int, int]:
        """Move the phase of ``v`` onto a new leaf hanging off a new hub."""
        d = self.d
        hub = d.add_vertex(VertexType.Z, 0)
        leaf = d.add_vertex(VertexType.Z, d.phase[v])
        d.phase[v] = 0
        if v in d.labels:
            d.labels[leaf] = d.labels[v]
        d.set_edge(v, hub, H1)
        d.set_edge(hub, leaf, H1)
        return hub, leaf

    def pivot_gadget_all(self) -> int:
        d = self.d
        n = 0
        for u in sorted(d.ty):
            if u not in d.ty or d.phase[u] % 4 or not self.interior(u) or not self._not_hub(u):
                continue
            for v in sorted(d.adj[u]):
                if d.phase[v] % 4 and len(d.adj[v]) > 1 and self.interior(v):
                    hub, leaf = self.gadgetize(v)
                    self._log("pivot-gadget", (u, v, hub, leaf), ExactScalar.one())
                    self.pivot(u, v)
                    n += 1
                    break
        return n

    def extract_boundary(self, w: int, b: int) -> int:
        """Insert an identity spider between ``w`` and its boundary ``b``."""
        d = self.d
        et = _et(d.adj[w][b])
        d.remove_edges(w, b)
        z = d.add_vertex(VertexType.Z, 0)
        d.set_edge(w, z, H1)
        d.add_edge(z, b, _toggle_type(et))
        self._log("boundary-extract", (w, b, z), ExactScalar.one())
        return z

    def pivot_boundary_all(self) -> int:
        d = self.d
        n = 0
        for u in sorted(d.ty):
            if u not in d.ty or d.phase[u] % 4 or not self.interior(u) or not self._not_hub(u):
                continue
            for w in sorted(d.adj[u]):
                bs = self.boundary_neighbours(w)
                if not bs or len(d.adj[w]) < 2:
                    continue
                for b in bs:
                    self.extract_boundary(w, b)
                if d.phase[w] % 4:
                    hub, leaf = self.gadgetize(w)
                    self._log("pivot-gadget", (u, w, hub, leaf), ExactScalar.one())
                self.pivot(u, w)
                n += 1
                break
        return n

    def pauli_push(self) -> int:
        """Slide an interior degree-2 pi spider through a boundary-adjacent wire spider.

        p -H- w(pi) -H- q(beta) -e- b  becomes  p(+(-beta)) -H- r(pi) -e'- b
        with scalar e^{i beta}; e' is e with its Hadamard toggled.
        """
        d = self.d
        n = 0
        for w in sorted(d.ty):
            if w not in d.ty or d.phase[w] != 4 or len(d.adj[w]) != 2 or not self.interior(w):
                continue
            for q in sorted(d.adj[w]):
                p = next(x for x in d.adj[w] if x != q)
                if len(d.adj[q]) != 2:
                    continue
                b = next(x for x in d.adj[q] if x != w)
                if d.ty[b] != VertexType.BOUNDARY or sum(d.adj[q][b]) != 1:
                    continue
                beta = d.phase[q]
                et = _et(d.adj[q][b])
                labels_q = d.labels.get(q)
                d.remove_vertex(w)
                d.remove_vertex(q)
                d.phase[p] = (d.phase[p] - beta) % 8
                if labels_q:
                    d.add_label(p, *labels_q)
                r = d.add_vertex(VertexType.Z, 4)
                d.set_edge(p, r, H1)
                d.add_edge(r, b, _toggle_type(et))
                self._log("pauli-push", (w, q, p, r), ExactScalar.omega_power(beta))
                n += 1
                break
        return n

    def gadget_fuse(self) -> int:
        d = self.d
        groups: dict[frozenset[int], list[tuple[int, int]]] = {}
        hubs: set[int] = set()
        for leaf in sorted(d.ty):
            if not self.is_z(leaf) or not d.phase[leaf] & 1 or len(d.adj[leaf]) != 1:
                continue
            (hub, m), = d.adj[leaf].items()
            if m != H1 or not self.is_z(hub) or d.phase[hub] % 4 or hub in hubs:
                continue
            if not self.interior(hub):
                continue
            targets = frozenset(d.adj[hub]) - {leaf}
            if not targets or any(len(d.adj[t]) == 1 for t in targets):
                continue
            hubs.add(hub)
            groups.setdefault(targets, []).append((hub, leaf))
        n = 0
        for targets, gads in sorted(groups.items(), key=lambda kv: min(kv[1])):
            for hub, leaf in gads:
                if d.phase[hub] == 4:
                    # pi on the hub: absorb it into the leaf
                    alpha = d.phase[leaf]
                    d.phase[hub] = 0
                    d.phase[leaf] = (-alpha) % 8
                    self._log("gadget-fuse", (hub, leaf), ExactScalar.omega_power(alpha))
                    n += 1
            if len(gads) < 2:
                continue
            gads = sorted(gads)
            keep_hub, keep_leaf = gads[0]
            total = sum(d.phase[leaf] for _, leaf in gads) % 8
            s = ExactScalar.sqrt2_power(-(len(targets) - 1) * (len(gads) - 1))
            for hub, leaf in gads[1:]:
                if leaf in d.labels:
                    d.add_label(keep_leaf, *d.labels[leaf])
                d.remove_vertex(hub)
                d.remove_vertex(leaf)
            d.phase[keep_leaf] = total
            self._log("gadget-fuse", tuple(v for g in gads for v in g), s)
            n += 1
        return n

    def remove_scalars(self) -> int:
        """Evaluate spiders that are disconnected from the rest of the diagram."""
        d = self.d
        n = 0
        for v in sorted(d.ty):
            if v not in d.ty or not self.is_z(v):
                continue
            nb = d.adj[v]
            if not nb:
                s = ExactScalar.phase_plus_one(d.phase[v])
                d.remove_vertex(v)
                self._log("scalar", (v,), s)
                n += 1
            elif len(nb) == 1:
                (w, m), = nb.items()
                if m == H1 and self.is_z(w) and len(d.adj[w]) == 1:
                    a, b = d.phase[v], d.phase[w]
                    s = (
                        ExactScalar.one()
                        + ExactScalar.omega_power(a)
                        + ExactScalar.omega_power(b)
                        - ExactScalar.omega_power(a + b)
                    ) * _INV_SQRT2
                    d.remove_vertex(v)
                    d.remove_vertex(w)
                    self._log("scalar", (v, w), s)
                    n += 1
        return n

    def interior_clifford(self) -> int:
        total = 0
        while True:
            k = self.remove_ids()
            k += self.pauli_push()
            k += self.lcomp_all()
            k += self.pivot_all()
            k += self.remove_scalars()
            if not k:
                return total
            total += k

    def full_reduce(self, max_rounds: int = 100000) -> None:
        self.to_graph_like()
        for _ in range(max_rounds):
            self.interior_clifford()
            k = self.pivot_boundary_all()
            k += self.gadget_fuse()
            k += self.pivot_gadget_all()
            if not k:
                return
        raise InvariantViolation("full_reduce did not reach a fixpoint")


def to_graph_like(d: Diagram) -> Diagram:
    r = d.copy()
    Rewriter(r).to_graph_like()
    return r


def full_reduce(d: Diagram, trace: list[RewriteStep] | None = None) -> Diagram:
    r = d.copy()
    rw = Rewriter(r, trace=trace is not None)
    rw.full_reduce()
    if trace is not None and rw.trace is not None:
        trace.extend(rw.trace)
    return r


def fuse_spiders(d: Diagram, u: int, v: int) -> Diagram:
    if d.ty.get(u) != d.ty.get(v) or d.ty.get(u) not in (VertexType.Z, VertexType.X):
        raise ValueError("fuse_spiders needs two spiders of the same colour")
    if not d.edge(u, v)[0]:
        raise ValueError("fuse_spiders needs a plain edge between the spiders")
    r = d.copy()
    if r.ty[u] == VertexType.X:
        # fuse in the Z picture and colour back
        for x in (u, v):
            r.ty[x] = VertexType.Z
        for w, m in list(r.adj[u].items()):
            if w not in (u, v):
                r.set_edge(u, w, (m[1], m[0]))
        for w, m in list(r.adj[v].items()):
            if w not in (u, v):
                r.set_edge(v, w, (m[1], m[0]))
        # u-v edges would be toggled from both ends, so they stay as they are
        _fuse_raw(r, u, v)
        r.ty[u] = VertexType.X
        for w, m in list(r.adj[u].items()):
            if w != u:
                r.set_edge(u, w, (m[1], m[0]))
        return r
    _fuse_raw(r, u, v)
    return r


def _fuse_raw(d: Diagram, u: int, v: int) -> None:
    """Plain spider fusion without any clean-up of the merged neighbourhood."""
    m = d.adj[u][v]
    d.remove_edges(u, v)
    loops = (m[0] - 1, m[1])
    lv = d.adj[v].get(v, NO_EDGE)
    for w, mw in list(d.adj[v].items()):
        if w == v:
            continue
        del d.adj[w][v]
        old = d.adj[u].get(w, NO_EDGE)
        d.set_edge(u, w, (old[0] + mw[0], old[1] + mw[1]))
    d.phase[u] = (d.phase[u] + d.phase[v]) % 8
    if v in d.labels:
        d.add_label(u, *d.labels[v])
    d.adj[v] = {}
    d.remove_vertex(v)
    tot = (loops[0] + lv[0], loops[1] + lv[1])
    if tot != NO_EDGE:
        old = d.adj[u].get(u, NO_EDGE)
        d.set_edge(u, u, (old[0] + tot[0], old[1] + tot[1]))


def local_complement(d: Diagram, v: int) -> Diagram:
    if d.ty.get(v) != VertexType.Z:
        raise ValueError(f"vertex {v} is not an internal Z spider")
    r = d.copy()
    Rewriter(r).lcomp(v)
    return r


def pivot(d: Diagram, u: int, v: int) -> Diagram:
    if d.ty.get(u) != VertexType.Z or d.ty.get(v) != VertexType.Z:
        raise ValueError("pivot needs two internal Z spiders")
    r = d.copy()
    Rewriter(r).pivot(u, v)
    return r
