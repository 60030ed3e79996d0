"""Stabiliser decompositions: spider cutting, magic-state identities, strategies."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

from .graph import Diagram, EdgeType, VertexType, same_structure, structure_hash, t_count, t_spiders
from .rewrite import full_reduce, to_graph_like
from .scalar import ExactScalar


class DecompositionError(ValueError):
    """A decomposition was asked for something its preconditions rule out."""


class ScheduleError(DecompositionError):
    """A cut schedule names a vertex that is not there."""


@dataclass
class DecompositionSum:
    """Terms whose tensors, each including its own scalar, add up to the source diagram."""

    terms: list[Diagram] = field(default_factory=list)
    provenance: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def t_counts(self) -> list[int]:
        return [t_count(d) for d in self.terms]

    def check_arity(self) -> None:
        if not self.terms:
            return
        ni, no = len(self.terms[0].inputs), len(self.terms[0].outputs)
        for d in self.terms[1:]:
            if (len(d.inputs), len(d.outputs)) != (ni, no):
                raise DecompositionError("terms disagree on boundary arity")


# cutting

def cut_spider(d: Diagram, v: int) -> DecompositionSum:
    """Split ``d`` at Z spider ``v`` into its |0..0> and |1..1> branches.

    Every wire of ``v`` is capped with an X effect of phase 0 (branch A) or
    pi (branch B).  Each cap carries sqrt2, so both terms pick up
    sqrt2^-n and branch B also e^{i beta}.
    """
    if v not in d.ty:
        raise DecompositionError(f"vertex {v} does not exist")
    if d.ty[v] == VertexType.BOUNDARY:
        raise DecompositionError(f"vertex {v} is a boundary")
    if d.ty[v] != VertexType.Z:
        raise DecompositionError(f"vertex {v} is X-coloured; convert to graph-like form first")
    beta = d.phase[v]
    out = DecompositionSum()
    for branch in (0, 1):
        r = d.copy()
        wires = [(w, m) for w, m in r.adj[v].items()]
        r.remove_vertex(v)
        n = 0
        for w, (p, h) in wires:
            if w == v:
                # a plain loop is the identity; a Hadamard loop picks out the branch sign
                for _ in range(h):
                    r.scalar = r.scalar * ExactScalar.sqrt2_power(-1)
                    if branch:
                        r.scalar = -r.scalar
                continue
            for et, cnt in ((EdgeType.PLAIN, p), (EdgeType.HADAMARD, h)):
                for _ in range(cnt):
                    cap = r.add_vertex(VertexType.X, 4 * branch)
                    r.add_edge(w, cap, et)
                    n += 1
        s = ExactScalar.sqrt2_power(-n)
        if branch:
            s = s * ExactScalar.omega_power(beta)
        r.scalar = r.scalar * s
        out.terms.append(r)
        out.provenance.append({"event": "cut", "vertex": v, "branch": branch})
    return out


def _cut_many(d: Diagram, vs: Sequence[int]) -> list[Diagram]:
    terms = [d]
    for v in vs:
        terms = [t for x in terms for t in cut_spider(x, v).terms]
    return terms


def dedup_terms(s: DecompositionSum | Sequence[Diagram]) -> DecompositionSum:
    """Merge terms that are the same diagram up to their scalars.

    Candidates are bucketed by :func:`structure_hash` and confirmed by an
    exact isomorphism test before their scalars are added.  Terms whose
    scalar cancels to zero are dropped.
    """
    terms = list(s.terms if isinstance(s, DecompositionSum) else s)
    reps: list[Diagram] = []
    buckets: dict[str, list[int]] = {}
    for d in terms:
        h = structure_hash(d)
        for i in buckets.get(h, []):
            if same_structure(reps[i], d):
                reps[i].scalar = reps[i].scalar + d.scalar
                break
        else:
            buckets.setdefault(h, []).append(len(reps))
            reps.append(d.copy())
    out = DecompositionSum([r for r in reps if not r.scalar.is_zero()])
    if isinstance(s, DecompositionSum):
        out.provenance = list(s.provenance) + [{"event": "dedup", "before": len(terms), "after": len(out.terms)}]
    return out


# cut selection

def _internal_z(d: Diagram) -> list[int]:
    return sorted(v for v, t in d.ty.items() if t == VertexType.Z)


def cut_candidates(d: Diagram, radius: int = 2) -> list[int]:
    """Internal Z spiders within ``radius`` hops of an odd-phase spider."""
    frontier = set(t_spiders(d))
    seen = set(frontier)
    for _ in range(radius):
        nxt = set()
        for v in frontier:
            nxt.update(w for w in d.adj[v] if w not in seen)
        seen |= nxt
        frontier = nxt
    return sorted(v for v in seen if d.ty[v] == VertexType.Z)


def twin_groups(d: Diagram) -> list[tuple[int, ...]]:
    """Sets of two or more Z spiders with identical neighbourhoods and edge types."""
    by_nbhd: dict[tuple, list[int]] = {}
    for v in _internal_z(d):
        nb = d.adj[v]
        if v in nb or not nb:
            continue
        if any(d.ty[w] == VertexType.BOUNDARY for w in nb):
            continue
        key = (d.phase[v] & 1, tuple(sorted(nb.items())))
        by_nbhd.setdefault(key, []).append(v)
    return [tuple(vs) for _, vs in sorted(by_nbhd.items(), key=lambda kv: kv[1][0]) if len(vs) > 1]


@dataclass(frozen=True)
class CutChoice:
    vertices: tuple[int, ...]
    score: int
    total: int
    terms: tuple[Diagram, ...] = field(compare=False, repr=False)

    def key(self, d: Diagram) -> tuple:
        return (-self.score, self.total, len(self.vertices), _stable_name(d, self.vertices))


def _stable_name(d: Diagram, vs: tuple[int, ...]) -> tuple:
    names = []
    for v in vs:
        labs = sorted(d.labels.get(v, ()))
        names.append((0, labs[0]) if labs else (1, f"{v:012d}"))
    return tuple(names)


def _evaluate_choice(args: tuple[Diagram, tuple[int, ...]]) -> CutChoice | None:
    d, vs = args
    branches = [full_reduce(t) for t in _cut_many(d, vs)]
    if len(vs) > 1:
        branches = dedup_terms(branches).terms
        if len(branches) > 2:
            return None
    ts = [t_count(t) for t in branches] or [0]
    return CutChoice(vs, t_count(d) - max(ts), sum(ts), tuple(branches))


def _pmap(fn: Callable, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) < 8:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def best_cut(d: Diagram, jobs: int = 1, max_group: int | None = None) -> CutChoice:
    """Greedy lookahead over single spiders and twin groups.

    A twin group is cut all at once and only kept as a candidate if its
    branches collapse to at most two distinct diagrams, so it never costs
    more terms than a single cut.
    """
    singles = [(v,) for v in cut_candidates(d)]
    if not singles:
        singles = [(v,) for v in _internal_z(d)]
    if not singles:
        raise DecompositionError("no internal spider available to cut")
    groups = [g for g in twin_groups(d) if max_group is None or len(g) <= max_group]
    near = set(cut_candidates(d, radius=3))
    groups = [g for g in groups if any(v in near for v in g)]
    results = _pmap(_evaluate_choice, [(d, vs) for vs in singles + groups], jobs)
    choices = [c for c in results if c is not None]
    return min(choices, key=lambda c: c.key(d))


def select_cut(d: Diagram, jobs: int = 1) -> int:
    """The single spider whose cut lowers the worst branch T-count the most."""
    if t_count(d) == 0:
        raise DecompositionError("diagram is already Clifford")
    singles = [(v,) for v in cut_candidates(d)] or [(v,) for v in _internal_z(d)]
    if not singles:
        raise DecompositionError("no internal spider available to cut")
    choices = [c for c in _pmap(_evaluate_choice, [(d, vs) for vs in singles], jobs) if c is not None]
    return min(choices, key=lambda c: c.key(d)).vertices[0]


# schedules

AUTO = "AUTO"
Selector = Union[str, int, dict]


@dataclass
class CutSchedule:
    """Ordered cut targets.

    Each entry is ``"AUTO"``, a vertex id, ``{"label": name}``, or a list of
    such selectors that are cut together before any simplification.  The
    schedule length counts individual spider cuts.
    """

    entries: list = field(default_factory=list)

    def __len__(self) -> int:
        return sum(len(e) if isinstance(e, list) else 1 for e in self.entries)

    @classmethod
    def auto(cls, n: int) -> CutSchedule:
        return cls([AUTO] * n)

    def to_json(self) -> dict:
        return {"version": 1, "cuts": self.entries}

    @classmethod
    def from_json(cls, obj: dict | list) -> CutSchedule:
        if isinstance(obj, list):
            return cls(list(obj))
        if obj.get("version") != 1:
            raise ScheduleError(f"unsupported schedule version {obj.get('version')!r}")
        return cls(list(obj["cuts"]))

    @classmethod
    def load(cls, path: str) -> CutSchedule:
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def resolve_selector(d: Diagram, sel: Selector) -> int:
    if isinstance(sel, bool):
        raise ScheduleError(f"bad selector {sel!r}")
    if isinstance(sel, int):
        if sel not in d.ty or d.ty[sel] != VertexType.Z:
            raise ScheduleError(f"vertex {sel} is not an internal Z spider of this term")
        return sel
    if isinstance(sel, dict) and "vertex" in sel:
        return resolve_selector(d, int(sel["vertex"]))
    if isinstance(sel, dict) and "label" in sel:
        hits = [v for v in d.find_label(sel["label"]) if d.ty[v] == VertexType.Z]
        if not hits:
            raise ScheduleError(f"no spider labelled {sel['label']!r} survives in this term")
        return hits[0]
    raise ScheduleError(f"bad selector {sel!r}")


@dataclass
class CutStats:
    cuts: int = 0
    levels: int = 0
    terms_before_dedup: int = 0
    cut_log: list[dict] = field(default_factory=list)


def run_cutting(
    d: Diagram,
    schedule: CutSchedule | None = None,
    target_t: int = 1,
    jobs: int = 1,
    stats: CutStats | None = None,
    simplify_first: bool = False,
) -> DecompositionSum:
    """Cut, simplify and merge until every term has at most ``target_t`` T spiders.

    ``schedule`` defaults to unlimited AUTO.  Each level applies the next
    schedule entry to every term still above target; AUTO may consume several
    entries at once when it picks a twin group.  The input is brought to
    graph-like form but not simplified before the first cut, because full
    simplification can merge spiders that are better cut separately.
    """
    stats = stats if stats is not None else CutStats()
    if t_count(d) <= target_t:
        return DecompositionSum([d.copy()], [{"event": "input"}])
    start = full_reduce(d) if simplify_first else to_graph_like(d)
    terms = [start]
    pending = list(schedule.entries) if schedule is not None else None
    prov: list[dict] = [{"event": "input"}]
    while True:
        if all(t_count(t) <= target_t for t in terms):
            break
        if pending is not None and not pending:
            break
        entry = pending.pop(0) if pending is not None else AUTO
        new_terms: list[Diagram] = []
        consumed = 1
        for t in terms:
            if t_count(t) <= target_t:
                new_terms.append(t)
                continue
            if entry == AUTO:
                i = 0
                while pending is not None and i < len(pending) and pending[i] == AUTO:
                    i += 1
                room = 1 + i if pending is not None else None
                choice = best_cut(t, jobs=jobs, max_group=room)
                vs = choice.vertices
                branches = list(choice.terms)
                consumed = max(consumed, len(vs))
            else:
                sels = entry if isinstance(entry, list) else [entry]
                vs = tuple(resolve_selector(t, s) for s in sels)
                branches = dedup_terms([full_reduce(x) for x in _cut_many(t, vs)]).terms
            stats.cuts += len(vs)
            stats.terms_before_dedup += 2 ** len(vs)
            labels = [sorted(t.labels.get(v, ())) for v in vs]
            stats.cut_log.append({"level": stats.levels, "vertices": list(vs), "labels": labels})
            prov.append({"event": "cut", "level": stats.levels, "vertices": list(vs), "labels": labels})
            new_terms.extend(branches)
        if pending is not None and entry == AUTO:
            for _ in range(consumed - 1):
                if pending and pending[0] == AUTO:
                    pending.pop(0)
        stats.levels += 1
        merged = dedup_terms(new_terms)
        terms = merged.terms
        prov.append({"event": "dedup", "before": len(new_terms), "after": len(terms)})
    return DecompositionSum(terms, prov)


# magic-state identities
#
# Each identity is a sum of small k-leg states equal to |T>^{(x)k} in the
# unnormalised convention |0> + e^{i pi/4}|1> per leg.  A spider Z(a) is the
# fusion of Z(a - pi/4) with one such leg, so an identity is applied in place
# by lowering each chosen phase by pi/4 and plugging every state into the
# chosen spiders.

_SQ2 = ExactScalar.sqrt2_power(1)
_I = ExactScalar.omega_power(2)


def _state(n: int) -> tuple[Diagram, list[int]]:
    """An empty state with ``n`` outputs, each wired to a fresh Z(0) leg spider."""
    d = Diagram()
    legs = []
    for _ in range(n):
        v = d.add_vertex(VertexType.Z, 0)
        o = d.add_output()
        d.add_edge(v, o)
        legs.append(v)
    return d, legs


def _legs_with_hub(n: int, leg_phase: int, hub_phase: int, et: EdgeType) -> Diagram:
    d, legs = _state(n)
    w = d.add_vertex(VertexType.Z, hub_phase)
    for v in legs:
        d.phase[v] = leg_phase
        d.add_edge(v, w, et)
    return d


def _phi_state(order: Sequence[int]) -> Diagram:
    d, legs = _state(6)
    v = [legs[i] for i in order]
    w6 = d.add_vertex(VertexType.Z, 4)
    d.add_edge(v[5], w6)
    ws = []
    for x in v[:5]:
        w = d.add_vertex(VertexType.Z, 0)
        d.add_edge(x, w, EdgeType.HADAMARD)
        d.add_edge(w, w6, EdgeType.HADAMARD)
        ws.append(w)
    for a, b in ((0, 2), (0, 3), (1, 3), (1, 4), (2, 4)):
        d.add_edge(ws[a], ws[b], EdgeType.HADAMARD)
    return d


def _product_state(n: int, leg_phase: int) -> Diagram:
    d, legs = _state(n)
    for v in legs:
        d.phase[v] = leg_phase
    return d


def _bss_terms() -> list[Diagram]:
    # coefficients of the Bravyi-Smith-Smolin identity for six raw |T> legs
    glob = -(ExactScalar.from_int(7) + 5 * _SQ2) * (1 - _I) * ExactScalar.sqrt2_power(-4)
    rows = [
        (_product_state(6, 0), -16 + 12 * _SQ2, -6, 0),
        (_product_state(6, 4), 96 - 68 * _SQ2, -6, 4),
        (_legs_with_hub(6, 2, 4, EdgeType.HADAMARD), 10 - 7 * _SQ2, 4, 2),
        (_legs_with_hub(6, 2, 0, EdgeType.HADAMARD), -14 + 10 * _SQ2, 4, 2),
        (_legs_with_hub(6, 0, 6, EdgeType.PLAIN), 7 - 5 * _SQ2, 5, 1),
        (_phi_state(range(6)), 10 - 7 * _SQ2, 9, 6),
        (_phi_state((0, 1, 3, 4, 5, 2)), 10 - 7 * _SQ2, 9, 6),
    ]
    for d, c, k, ph in rows:
        d.scalar = glob * c * ExactScalar.sqrt2_power(k) * ExactScalar.omega_power(ph)
    return [d for d, *_ in rows]


def _two_t_terms() -> list[Diagram]:
    # |00> + i|11>  and  e^{i pi/4}(|01> + |10>)
    a = _legs_with_hub(2, 0, 2, EdgeType.PLAIN)
    b, legs = _state(2)
    x = b.add_vertex(VertexType.X, 4)
    for v in legs:
        b.add_edge(v, x)
    b.scalar = ExactScalar.omega_power(1)
    return [a, b]


def _single_t_terms(sign: int) -> list[Diagram]:
    # |0> + e^{+-i pi/4}|1> as two X-coloured basis states, each worth sqrt2
    out = []
    for branch in (0, 1):
        d = Diagram()
        x = d.add_vertex(VertexType.X, 4 * branch)
        d.add_edge(x, d.add_output())
        d.scalar = ExactScalar.sqrt2_power(-1) * ExactScalar.omega_power(sign * branch)
        out.append(d)
    return out


def _require_t_spiders(d: Diagram, vs: Sequence[int], n: int) -> None:
    if len(vs) != n or len(set(vs)) != n:
        raise DecompositionError(f"expected {n} distinct spiders, got {list(vs)}")
    for v in vs:
        if v not in d.ty or d.ty[v] != VertexType.Z or not d.phase[v] & 1:
            raise DecompositionError(f"vertex {v} is not an odd-phase Z spider")


def replace_legs(d: Diagram, verts: Sequence[int], shifts: Sequence[int], states: Iterable[Diagram], event: str) -> DecompositionSum:
    """Lower each phase in ``verts`` by its shift and plug in every state in turn."""
    from .graph import plug

    base = d.copy()
    for v, s in zip(verts, shifts):
        base.phase[v] = (base.phase[v] - s) % 8
    out = DecompositionSum()
    for j, st in enumerate(states):
        out.terms.append(plug(base, list(verts), st))
        out.provenance.append({"event": event, "vertices": list(verts), "term": j})
    return out


def _t_sign(phase: int) -> int:
    return -1 if phase % 8 in (3, 7) else 1


def decompose_two_t(d: Diagram, u: int, v: int) -> DecompositionSum:
    """Replace two T-like spiders by two Clifford terms instead of four."""
    _require_t_spiders(d, [u, v], 2)
    return replace_legs(d, [u, v], [1, 1], _two_t_terms(), "two-t")


def decompose_bss(d: Diagram, legs: Sequence[int]) -> DecompositionSum:
    """Replace six T-like spiders by the seven-term Clifford identity."""
    if len(legs) < 6:
        raise DecompositionError(f"BSS needs 6 T spiders, got {len(legs)}")
    _require_t_spiders(d, legs, 6)
    return replace_legs(d, legs, [1] * 6, _bss_terms(), "bss")


def _as_z(d: Diagram, v: int) -> Diagram:
    """Copy of ``d`` with X spider ``v`` recoloured to Z behind Hadamards."""
    if d.ty.get(v) != VertexType.X:
        return d
    d = d.copy()
    d.ty[v] = VertexType.Z
    for w, m in list(d.adj[v].items()):
        if w != v:
            d.set_edge(v, w, (m[1], m[0]))
    return d


def expand_t_spider(d: Diagram, v: int) -> DecompositionSum:
    d = _as_z(d, v)
    _require_t_spiders(d, [v], 1)
    s = _t_sign(d.phase[v])
    return replace_legs(d, [v], [s], _single_t_terms(s), "single-t")


def expand_single_t(s: DecompositionSum | Sequence[Diagram]) -> DecompositionSum:
    """Split every odd-phase spider of every term into its two basis branches."""
    terms = list(s.terms if isinstance(s, DecompositionSum) else s)
    prov = list(s.provenance) if isinstance(s, DecompositionSum) else []
    out: list[Diagram] = []
    for d in terms:
        cur = [d]
        for v in t_spiders(d):
            cur = [t for x in cur for t in expand_t_spider(x, v).terms]
        out.extend(cur)
    prov.append({"event": "expand-single-t", "before": len(terms), "after": len(out)})
    return DecompositionSum(out, prov)


# magic cat states

def build_cat_state(m: int) -> Diagram:
    """(I + Z^m)|T>^m / sqrt2 with unnormalised legs |0> + e^{i pi/4}|1>.

    An X hub on m wires is the even-parity projector times 2^{(1-m)/2}, so
    the hub plus T legs needs a factor sqrt2^{m-1}.
    """
    if m < 1:
        raise DecompositionError("cat state needs at least one leg")
    d, legs = _state(m)
    hub = d.add_vertex(VertexType.X, 0)
    for v in legs:
        d.phase[v] = 1
        d.add_edge(v, hub)
    d.scalar = ExactScalar.sqrt2_power(m - 1)
    return d


def _cat6_terms() -> list[Diagram]:
    # cat6 = 2 sqrt2 (|0^6> - i|1^6>) + (-1 + i) E / sqrt2 + (-1 - i) S^6 E / sqrt2,
    # E the uniform even-parity state, itself 4 times a 6-leg X(0) spider
    ghz = _legs_with_hub(6, 0, 6, EdgeType.PLAIN)
    ghz.scalar = 2 * _SQ2
    terms = [ghz]
    for leg_phase, c in ((0, _I - 1), (2, -1 - _I)):
        e, legs = _state(6)
        x = e.add_vertex(VertexType.X, 0)
        for v in legs:
            e.phase[v] = leg_phase
            e.add_edge(v, x)
        e.scalar = 2 * _SQ2 * c
        terms.append(e)
    return terms


def find_cat_hub(d: Diagram, m: int | None = None) -> int:
    """A parity hub: X(0) with plain edges, or Z(0) with Hadamard edges, to T-like Z spiders."""
    for h in sorted(d.ty):
        if _is_cat_hub(d, h) and (m is None or len(d.adj[h]) == m):
            return h
    raise DecompositionError("no magic cat pattern found")


def _is_cat_hub(d: Diagram, h: int) -> bool:
    t = d.ty[h]
    if t == VertexType.BOUNDARY or d.phase[h] != 0 or h in d.adj[h] or not d.adj[h]:
        return False
    want = (1, 0) if t == VertexType.X else (0, 1)
    return all(m == want and d.ty[w] == VertexType.Z and d.phase[w] & 1 for w, m in d.adj[h].items())


def decompose_cat6(d: Diagram, hub: int | None = None) -> DecompositionSum:
    """Replace a six-legged magic cat pattern by three Clifford terms."""
    h = find_cat_hub(d, 6) if hub is None else hub
    if h not in d.ty or not _is_cat_hub(d, h) or len(d.adj[h]) != 6:
        raise DecompositionError(f"vertex {h} is not the hub of a cat6 pattern")
    legs = sorted(d.adj[h])
    base = d.copy()
    base.remove_vertex(h)
    # the bare pattern is cat6 / sqrt2^5
    base.scalar = base.scalar * ExactScalar.sqrt2_power(-5)
    return replace_legs(base, legs, [1] * 6, _cat6_terms(), "cat6")


def magic_from_cat(d: Diagram, leg: int) -> DecompositionSum:
    """Measure output ``leg`` of a cat state in the T basis, leaving |T>^(m-1).

    The effect <0| + e^{-i pi/4}<1| kills the Z^m branch and leaves
    sqrt2 |T>^(m-1); dividing that out makes the sum equal the unnormalised
    |T>^(m-1) exactly.  A six-legged cat is
    then split by :func:`decompose_cat6`.
    """
    if not 0 <= leg < len(d.outputs) or d.inputs:
        raise DecompositionError(f"leg {leg} is not an output of the cat state")
    h = find_cat_hub(d)
    r = d.copy()
    b = r.outputs[leg]
    w, et = _boundary_nb(r, b)
    r.remove_vertex(b)
    r.outputs = [o for o in r.outputs if o != b]
    cap = r.add_vertex(VertexType.Z, 7)
    r.add_edge(w, cap, et)
    r.scalar = r.scalar * ExactScalar.sqrt2_power(-1)
    if len(d.adj[h]) == 6:
        return decompose_cat6(r, h)
    return DecompositionSum([r], [{"event": "magic-from-cat", "leg": leg}])


def _boundary_nb(d: Diagram, b: int) -> tuple[int, EdgeType]:
    from .graph import boundary_edge

    return boundary_edge(d, b)


# repeated magic-state strategies

MATERIALISE_LIMIT = 1 << 12
REPEAT_LIMIT = 100_000


def _t_ranking(d: Diagram) -> list[int]:
    """T spiders, most connected first; a gadget leaf counts its hub's other wires."""
    rank = {}
    for v in t_spiders(d):
        deg = len(d.adj[v])
        if deg == 1:
            (w,) = d.adj[v]
            if d.ty[w] == VertexType.Z:
                deg = len(d.adj[w]) - 1
        rank[v] = deg
    return sorted(rank, key=lambda v: (-rank[v], v))


def _magic5_terms() -> list[Diagram]:
    return magic_from_cat(build_cat_state(6), 5).terms


def _step(kind: str, d: Diagram) -> DecompositionSum:
    ts = _t_ranking(d)
    if kind == "bss" and len(ts) >= 6:
        return decompose_bss(d, ts[:6])
    if kind == "cat" and len(ts) >= 5:
        return replace_legs(d, ts[:5], [1] * 5, _magic5_terms(), "magic-from-cat")
    if kind in ("bss", "cat", "two-t") and len(ts) >= 2:
        return decompose_two_t(d, ts[0], ts[1])
    return expand_t_spider(d, ts[0])


def repeated_decomposition(kind: str, terms: Sequence[Diagram], limit: int | None = None) -> DecompositionSum:
    """Apply one magic-state identity at a time, fully simplifying every new term.

    Raises :class:`DecompositionError` once more than ``limit`` finished
    terms would have to be held.
    """
    done: list[Diagram] = []
    stack = [full_reduce(t) for t in reversed(list(terms))]
    while stack:
        d = stack.pop()
        if d.scalar.is_zero():
            continue
        if t_count(d) == 0:
            done.append(d)
            if limit is not None and len(done) > limit:
                raise DecompositionError(f"{kind} decomposition exceeds {limit} terms")
            continue
        parts = [full_reduce(t) for t in _step(kind, d).terms]
        stack.extend(reversed(parts))
    return DecompositionSum(done, [{"event": f"repeated-{kind}", "terms": len(done)}])


def identity_expand(kind: str, d: Diagram) -> DecompositionSum:
    """Apply single-T or two-T to every T spider of ``d`` with no simplification in between."""
    ts = t_spiders(d)
    cur = [d]
    if kind == "two-t":
        for u, v in zip(ts[0::2], ts[1::2]):
            cur = [x for c in cur for x in decompose_two_t(c, u, v).terms]
        ts = ts[len(ts) - len(ts) % 2:]
    elif kind != "single-t":
        raise DecompositionError(f"unknown identity {kind!r}")
    for v in ts:
        cur = [x for c in cur for x in expand_t_spider(c, v).terms]
    return DecompositionSum(cur, [{"event": kind, "terms": len(cur)}])


def repeated_bound(kind: str, t: int) -> int:
    """Term count of the identities alone, without simplification in between."""
    if kind == "single-t":
        return 2**t
    if kind == "two-t":
        return 2 ** ((t + 1) // 2)
    if kind == "bss":
        q, r = divmod(t, 6)
        return 7**q * 2 ** ((r + 1) // 2)
    if kind == "cat":
        # three single-T terms per five legs
        n, left = 1, t
        while left >= 5:
            n, left = n * 3, left - 4
        return n * 2 ** ((left + 1) // 2)
    raise DecompositionError(f"unknown identity {kind!r}")


# strategies

REFERENCE_COUNTS = {
    "msc-d3": {"t_count": 15, "bss": 68, "cat": 108, "cut": 4, "worst_case": 32768},
    "msc-d5": {"t_count": 53, "bss": 29176466, "bss_estimated": True, "cat": 6377292, "cut": 8, "worst_case": 9.01e15},
}

# published Clifford count for two naive cuts on d=5 followed by BSS
NAIVE_BSS_REFERENCE = {"msc-d5": 72}

STRATEGIES = ("cut", "cut-reuse", "bss", "cat", "single-t", "two-t")


@dataclass
class StrategyReport:
    strategy: str
    circuit: str
    t_count: int
    cuts: int = 0
    cut_levels: int = 0
    terms_before_dedup: int = 0
    terms_after_dedup: int = 0
    per_term_t_counts: list[int] = field(default_factory=list)
    final_terms: int = 0
    materialised: bool = True
    wall_time: float = 0.0
    details: dict = field(default_factory=dict)

    def to_json(self, include_timing: bool = False) -> dict:
        obj = {
            "version": 1,
            "strategy": self.strategy,
            "circuit": self.circuit,
            "t_count": self.t_count,
            "cuts": self.cuts,
            "cut_levels": self.cut_levels,
            "terms_before_dedup": self.terms_before_dedup,
            "terms_after_dedup": self.terms_after_dedup,
            "per_term_t_counts": self.per_term_t_counts,
            "final_terms": self.final_terms,
            "materialised": self.materialised,
            "details": self.details,
            "reference_counts": REFERENCE_COUNTS.get(self.circuit),
        }
        if include_timing:
            obj["wall_time_s"] = self.wall_time
        return obj


def load_stored_d3() -> tuple[list[Diagram], dict]:
    """The committed two-term decomposition of the d=3 cultivation state."""
    from importlib import resources

    with resources.files("zxcut.data").joinpath("d3_decomposition.json").open() as fh:
        obj = json.load(fh)
    return [Diagram.from_json(t) for t in obj["terms"]], obj["stats"]


def _finish_cut(rep: StrategyReport, s: DecompositionSum, expand: bool) -> DecompositionSum:
    rep.terms_after_dedup = len(s.terms)
    rep.per_term_t_counts = s.t_counts()
    rep.final_terms = sum(2**t for t in rep.per_term_t_counts)
    if not expand:
        return s
    if rep.final_terms > MATERIALISE_LIMIT:
        rep.materialised = False
        return s
    return expand_single_t(s)


def run_strategy(
    name: str,
    d: Diagram,
    circuit: str = "",
    schedule: CutSchedule | None = None,
    target_t: int = 1,
    naive: bool = False,
    bss_fallback: bool = False,
    jobs: int = 1,
) -> tuple[DecompositionSum, StrategyReport]:
    """Run a named strategy on a diagram; returns the final sum and its report."""
    if name not in STRATEGIES:
        raise DecompositionError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")
    t0 = time.perf_counter()
    rep = StrategyReport(name, circuit, t_count(d))
    if name in ("cut", "cut-reuse"):
        stats = CutStats()
        if name == "cut-reuse":
            if "d3" not in d.regions:
                raise DecompositionError("cut-reuse needs a diagram with a marked d3 region (use msc-d5)")
            from .circuit import substitute_region

            stored, stored_stats = load_stored_d3()
            stats.cuts = stored_stats["cuts"]
            rep.details["reused_d3_terms"] = len(stored)
            rep.details["reused_d3_cuts"] = stored_stats["cuts"]
            starts = [substitute_region(d, "d3", t) for t in stored]
        else:
            starts = [d]
        if naive and schedule is None:
            schedule = CutSchedule.auto(2)
        pieces: list[Diagram] = []
        for st in starts:
            pieces.extend(run_cutting(st, schedule, target_t, jobs=jobs, stats=stats).terms)
        merged = dedup_terms(pieces)
        rep.cuts = stats.cuts
        rep.cut_levels = stats.levels
        rep.terms_before_dedup = stats.terms_before_dedup
        rep.details["cut_log"] = stats.cut_log
        rep.details["schedule"] = schedule.entries if schedule is not None else "AUTO"
        if bss_fallback:
            rep.terms_after_dedup = len(merged.terms)
            rep.per_term_t_counts = merged.t_counts()
            out = repeated_decomposition("bss", merged.terms)
            rep.details["bss_fallback_terms"] = [
                len(repeated_decomposition("bss", [t]).terms) for t in merged.terms
            ]
            rep.final_terms = len(out.terms)
            if rep.circuit in NAIVE_BSS_REFERENCE:
                rep.details["reference_bss_fallback_total"] = NAIVE_BSS_REFERENCE[rep.circuit]
            result = out
        else:
            result = _finish_cut(rep, merged, expand=True)
    else:
        r = full_reduce(d)
        t = t_count(r)
        rep.per_term_t_counts = [t]
        bound = repeated_bound(name, t)
        rep.details["bound_without_simplification"] = bound
        if name in ("single-t", "two-t"):
            # the bare identity count, applied to the simplified diagram in one go
            rep.final_terms = bound
            if bound <= MATERIALISE_LIMIT:
                result = identity_expand(name, r)
            else:
                rep.materialised = False
                result = DecompositionSum([r], [{"event": "not-materialised", "bound": bound}])
        elif bound > REPEAT_LIMIT:
            # far too many terms to build; report the identity bound instead
            rep.materialised = False
            rep.final_terms = bound
            result = DecompositionSum([r], [{"event": "not-materialised", "bound": bound}])
        else:
            result = repeated_decomposition(name, [r])
            rep.final_terms = len(result.terms)
        rep.terms_after_dedup = rep.final_terms
    rep.wall_time = time.perf_counter() - t0
    return result, rep
