"""Brute-force evaluation of diagrams and reference logical states.

Only :func:`eval_clifford_term` and :func:`eval_sum` with ``reduce=True``
call the rewrite engine.  :func:`contract_dense` is the oracle used by the
test suite, so it relies on nothing but the raw tensor semantics of spiders.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .graph import Diagram, VertexType, t_count
from .scalar import ExactScalar

MAX_OPEN_LEGS = 22
MAX_WIDTH = 26

_SQ = 2.0**-0.5
_OMEGA = np.exp(1j * np.pi / 4)
_OMEGA_POW = np.array([_OMEGA**j for j in range(4)])
_SAFE = 1 << 60


class BudgetExceeded(RuntimeError):
    pass


# Z[omega] arrays: axis 0 has length 4 and holds the omega coefficients.

def _zmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    dtype = object if (a.dtype == object or b.dtype == object) else np.int64
    out = np.zeros((4,) + shape, dtype=dtype)
    for i in range(4):
        ai = a[i]
        for j in range(4):
            k = i + j
            if k < 4:
                out[k] += ai * b[j]
            else:
                out[k - 4] -= ai * b[j]
    return out


def _times_sqrt2(c: np.ndarray) -> np.ndarray:
    return np.stack([c[1] - c[3], c[0] + c[2], c[1] + c[3], c[2] - c[0]])


def _maxabs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return int(np.max(np.abs(a)))


def _exact_to_complex(c: np.ndarray, k: int) -> np.ndarray:
    z = np.tensordot(_OMEGA_POW, c.astype(np.float64) if c.dtype != object else np.array(c, dtype=np.float64), axes=(0, 0))
    return z * 2.0 ** (-k / 2)


@dataclass
class DenseState:
    """Amplitudes indexed by boundary bitstrings (first boundary = most significant bit).

    ``exact`` arrays have shape (4, 2**n) with a common 2^(-k/2) factor;
    otherwise ``data`` is a complex vector and ``k`` is unused.
    """

    n: int
    data: np.ndarray
    k: int = 0
    exact: bool = True

    def to_complex(self) -> np.ndarray:
        if not self.exact:
            return np.asarray(self.data, dtype=np.complex128)
        return _exact_to_complex(self.data, self.k)

    def amplitude(self, index: int) -> ExactScalar | complex:
        if not self.exact:
            return complex(self.data[index])
        return ExactScalar([int(x) for x in self.data[:, index]], self.k)

    def _aligned(self, other: DenseState) -> tuple[np.ndarray, np.ndarray, int]:
        a, b = self.data, other.data
        ka, kb = self.k, other.k
        while ka < kb:
            a = _times_sqrt2(a)
            ka += 1
        while kb < ka:
            b = _times_sqrt2(b)
            kb += 1
        if a.dtype != b.dtype:
            a, b = a.astype(object), b.astype(object)
        return a, b, ka

    def __add__(self, other: DenseState) -> DenseState:
        if self.n != other.n:
            raise ValueError("leg count mismatch")
        if self.exact and other.exact:
            a, b, k = self._aligned(other)
            if max(_maxabs(a), _maxabs(b)) > _SAFE // 2:
                a, b = a.astype(object), b.astype(object)
            return DenseState(self.n, a + b, k).normalized()
        return DenseState(self.n, self.to_complex() + other.to_complex(), exact=False)

    def exact_equal(self, other: DenseState) -> bool:
        if not (self.exact and other.exact) or self.n != other.n:
            return False
        a, b, _ = self._aligned(other)
        return bool(np.all(a == b))

    def normalized(self) -> DenseState:
        """Pull out powers of sqrt2 so that equal states have equal data."""
        if not self.exact:
            return self
        c, k = self.data, self.k
        if not np.any(c):
            return DenseState(self.n, np.zeros_like(c), 0)
        while k < 0:
            c = _times_sqrt2(c)
            k += 1
        while k > 0:
            y = _times_sqrt2(c)
            if np.any(y % 2):
                break
            c = y // 2
            k -= 1
        if c.dtype == object and _maxabs(c) < _SAFE:
            c = c.astype(np.int64)
        return DenseState(self.n, c, k)

    def norm_sq(self) -> float:
        v = self.to_complex()
        return float(np.vdot(v, v).real)

    @classmethod
    def zero(cls, n: int) -> DenseState:
        return cls(n, np.zeros((4, 1 << n), dtype=np.int64), 0)


class _Factors:
    """Bucket elimination over binary variables with exact or complex tensors."""

    def __init__(self, exact: bool) -> None:
        self.exact = exact
        self.items: list[tuple[tuple[int, ...], np.ndarray, int]] = []

    def add(self, scope: tuple[int, ...], arr: np.ndarray, k: int = 0) -> None:
        self.items.append((scope, arr, k))

    def _broadcast(self, scope: tuple[int, ...], arr: np.ndarray, full: tuple[int, ...]) -> np.ndarray:
        lead = 1 if self.exact else 0
        order = sorted(range(len(scope)), key=lambda i: full.index(scope[i]))
        arr = np.transpose(arr, tuple(range(lead)) + tuple(lead + i for i in order))
        shape = list(arr.shape[:lead])
        placed = [scope[i] for i in order]
        j = 0
        for v in full:
            if j < len(placed) and placed[j] == v:
                shape.append(2)
                j += 1
            else:
                shape.append(1)
        return arr.reshape(shape)

    def _product(self, group: list[tuple[tuple[int, ...], np.ndarray, int]]) -> tuple[tuple[int, ...], np.ndarray, int]:
        full: list[int] = []
        for scope, _, _ in group:
            for v in scope:
                if v not in full:
                    full.append(v)
        full_t = tuple(full)
        if len(full_t) > MAX_WIDTH:
            raise BudgetExceeded(f"intermediate tensor over {len(full_t)} wires exceeds budget {MAX_WIDTH}")
        acc = None
        ktot = 0
        for scope, arr, k in group:
            b = self._broadcast(scope, arr, full_t)
            ktot += k
            if acc is None:
                acc = b
            elif self.exact:
                if acc.dtype != object and _maxabs(acc) * max(_maxabs(b), 1) * 4 >= _SAFE:
                    acc = acc.astype(object)
                acc = _zmul(acc, b)
            else:
                acc = acc * b
        assert acc is not None
        shape = ((4,) if self.exact else ()) + (2,) * len(full_t)
        acc = np.broadcast_to(acc, shape).copy()
        return full_t, acc, ktot

    def _shrink(self, arr: np.ndarray, k: int) -> tuple[np.ndarray, int]:
        # divide out common factors of two to keep integers small
        if not self.exact or arr.size == 0:
            return arr, k
        while k >= 2 and np.any(arr) and not np.any(arr % 2):
            arr = arr // 2
            k -= 2
        return arr, k

    def eliminate(self, keep: Sequence[int]) -> tuple[np.ndarray, int]:
        keep_set = set(keep)
        while True:
            cand: dict[int, set[int]] = {}
            for scope, _, _ in self.items:
                for v in scope:
                    if v not in keep_set:
                        cand.setdefault(v, set()).update(scope)
            if not cand:
                break
            var = min(cand, key=lambda v: (len(cand[v]), v))
            group = [f for f in self.items if var in f[0]]
            rest = [f for f in self.items if var not in f[0]]
            scope, arr, k = self._product(group)
            ax = scope.index(var) + (1 if self.exact else 0)
            arr = arr.sum(axis=ax)
            scope = scope[: scope.index(var)] + scope[scope.index(var) + 1 :]
            arr, k = self._shrink(arr, k)
            self.items = rest + [(scope, arr, k)]
        if not self.items:
            one = np.array([1, 0, 0, 0], dtype=np.int64) if self.exact else np.array(1.0 + 0j)
            return one, 0
        scope, arr, k = self._product(self.items)
        lead = 1 if self.exact else 0
        missing = [v for v in keep if v not in scope]
        if missing:
            # an open leg with no factor would be a free index; cannot happen for valid diagrams
            raise AssertionError(f"unconstrained open legs {missing}")
        perm = tuple(range(lead)) + tuple(lead + scope.index(v) for v in keep)
        return np.transpose(arr, perm), k


def _hadamard(exact: bool) -> tuple[np.ndarray, int]:
    if exact:
        h = np.zeros((4, 2, 2), dtype=np.int64)
        h[0] = [[1, 1], [1, -1]]
        return h, 1
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQ, 0


def _phase_vec(p: int, exact: bool) -> np.ndarray:
    if exact:
        v = np.zeros((4, 2), dtype=np.int64)
        v[0, 0] = 1
        v[p % 4, 1] = -1 if p % 8 >= 4 else 1
        return v
    return np.array([1.0, _OMEGA**p], dtype=np.complex128)


def contract_dense(d: Diagram, exact: bool = True, max_open: int = MAX_OPEN_LEGS) -> DenseState:
    """Evaluate the diagram as a vector over its boundary, inputs first.

    Every spider is a binary variable; an X spider is a Z spider with a
    Hadamard on each leg.  Edges become equalities or Hadamard factors.
    """
    bo = d.boundary_order
    if len(bo) > max_open:
        raise BudgetExceeded(f"{len(bo)} open legs exceed the limit of {max_open}")
    parent: dict[int, int] = {v: v for v in d.ty}

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    is_b = {v: d.ty[v] == VertexType.BOUNDARY for v in d.ty}
    leg_h = {v: 1 if d.ty[v] == VertexType.X else 0 for v in d.ty}
    fs = _Factors(exact)
    hmat, hk = _hadamard(exact)
    ident = np.zeros((4, 2, 2), dtype=np.int64) if exact else np.eye(2, dtype=np.complex128)
    if exact:
        ident[0] = np.eye(2, dtype=np.int64)
    pending: list[tuple[int, int, int]] = []  # (u, v, parity) for non-merge factors
    for u, v, m in d.edges():
        for kind, count in ((0, m[0]), (1, m[1])):
            for _ in range(count):
                h = (leg_h[u] + leg_h[v] + kind) & 1
                if u != v and h == 0 and not is_b[u] and not is_b[v]:
                    ru, rv = find(u), find(v)
                    if ru != rv:
                        parent[ru] = rv
                else:
                    pending.append((u, v, h))
    scalar_k = 0
    for u, v, h in pending:
        ru, rv = find(u), find(v)
        if ru == rv:
            if h:
                diag = hmat[:, [0, 1], [0, 1]] if exact else np.array([1.0, -1.0]) * _SQ
                fs.add((ru,), diag, hk)
            continue
        if h:
            fs.add((ru, rv), hmat, hk)
        else:
            fs.add((ru, rv), ident, 0)
    # phases: a class of merged Z variables carries the sum of their phases
    acc: dict[int, int] = {}
    for v in d.ty:
        if not is_b[v]:
            r = find(v)
            acc[r] = (acc.get(r, 0) + d.phase[v]) % 8
    for r, p in acc.items():
        fs.add((r,), _phase_vec(p, exact), 0)
    arr, k = fs.eliminate([find(b) for b in bo])
    n = len(bo)
    if exact:
        flat = arr.reshape(4, 1 << n)
        s = d.scalar
        big = max(abs(c) for c in s.coeffs) >= _SAFE
        sc = np.array(s.coeffs, dtype=object if big else np.int64).reshape(4, 1)
        if flat.dtype != object and (big or _maxabs(flat) * max(_maxabs(sc), 1) * 4 >= _SAFE):
            flat = flat.astype(object)
        flat = _zmul(sc, flat)
        return DenseState(n, flat, k + s.half_power + scalar_k).normalized()
    vec = np.asarray(arr, dtype=np.complex128).reshape(1 << n) * complex(d.scalar)
    return DenseState(n, vec, exact=False)


def scalar_value(d: Diagram) -> ExactScalar:
    """The number a closed diagram denotes."""
    if d.boundary_order:
        raise ValueError("diagram has open legs")
    st = contract_dense(d)
    amp = st.amplitude(0)
    assert isinstance(amp, ExactScalar)
    return amp


def eval_clifford_term(d: Diagram, exact: bool = True) -> DenseState:
    from .rewrite import full_reduce

    if t_count(d) != 0:
        raise ValueError("eval_clifford_term needs a Clifford diagram")
    return contract_dense(full_reduce(d), exact=exact)


def eval_sum(terms: Iterable[Diagram], n: int | None = None, exact: bool = True, reduce: bool = True) -> DenseState:
    from .rewrite import full_reduce

    total: DenseState | None = None
    for t in terms:
        st = contract_dense(full_reduce(t) if reduce else t, exact=exact)
        total = st if total is None else total + st
    if total is None:
        if n is None:
            raise ValueError("empty sum needs an explicit leg count")
        return DenseState.zero(n)
    return total


def fidelity(a: DenseState, b: DenseState) -> float:
    va, vb = a.to_complex(), b.to_complex()
    if va.shape != vb.shape:
        raise ValueError("states have different leg counts")
    na = float(np.vdot(va, va).real)
    nb = float(np.vdot(vb, vb).real)
    if na == 0 or nb == 0:
        raise ValueError("fidelity of a zero state")
    return float(abs(np.vdot(va, vb)) ** 2 / (na * nb))


# colour-code reference states

def load_code(distance: int) -> dict:
    name = f"colour_code_d{distance}.json"
    with resources.files("zxcut.data").joinpath(name).open() as fh:
        return json.load(fh)


def logical_T_state(distance: int) -> DenseState:
    """|0_L> + e^{i pi/4}|1_L> for the committed triangular colour code.

    |0_L> is the uniform superposition over the X-stabiliser orbit of
    |0...0>, and |1_L> applies the transversal X.  Qubit ``j`` of the code
    file is output leg ``j`` (most significant bit first).
    """
    code = load_code(distance)
    n = code["n"]
    faces = code["faces"]
    gens = [sum(1 << (n - 1 - q) for q in f) for f in faces]
    basis: list[int] = []
    for g in gens:
        x = g
        for b in basis:
            x = min(x, x ^ b)
        if x:
            basis.append(x)
    orbit = {0}
    for b in basis:
        orbit |= {x ^ b for x in orbit}
    full = (1 << n) - 1
    data = np.zeros((4, 1 << n), dtype=np.int64)
    for x in orbit:
        data[0, x] += 1
        data[1, x ^ full] += 1
    return DenseState(n, data, 0)


def is_stabilizer_state(st: DenseState, tol: float = 1e-9) -> bool:
    """Uniform magnitude on an affine support with relative phases in {1, i, -1, -i}."""
    v = st.to_complex()
    nz = np.flatnonzero(np.abs(v) > tol * max(np.abs(v).max(), 1e-300))
    if len(nz) == 0:
        return False
    mags = np.abs(v[nz])
    if np.max(mags) - np.min(mags) > tol * np.max(mags):
        return False
    if len(nz) & (len(nz) - 1):
        return False
    base = int(nz[0])
    shifted = {int(x) ^ base for x in nz}
    for a, b in itertools.combinations(list(shifted)[:64], 2):
        if a ^ b not in shifted:
            return False
    rel = v[nz] / v[base]
    quarter = rel ** 4
    return bool(np.all(np.abs(quarter - 1) < 1e-6))
