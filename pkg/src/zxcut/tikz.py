"""TikZ export in the style vocabulary used by tikzit, pyzx and zxlive.

Node styles are ``none`` (boundary), ``Z dot``/``X dot`` (phase 0) and
``Z phase dot``/``X phase dot``; Hadamard edges use ``hadamard edge`` and
plain edges carry no style.  Coordinates come from a layered layout: the x
position is the breadth-first distance from the inputs (or, for states,
the distance back from the outputs), the y position is the order of
appearance within a layer.  The layout has no randomness, so output is
byte-stable.
"""

from __future__ import annotations

from collections import deque

from .graph import Diagram, VertexType

STYLE_BOUNDARY = "none"
STYLE_Z = "Z dot"
STYLE_X = "X dot"
STYLE_Z_PHASE = "Z phase dot"
STYLE_X_PHASE = "X phase dot"
STYLE_HADAMARD_EDGE = "hadamard edge"

_HEADER = "\\begin{tikzpicture}\n    \\begin{pgfonlayer}{nodelayer}\n"
_MIDDLE = "    \\end{pgfonlayer}\n    \\begin{pgfonlayer}{edgelayer}\n"
_FOOTER = "    \\end{pgfonlayer}\n\\end{tikzpicture}\n"


def phase_label(n: int) -> str:
    """``n`` pi/4 as a tikzit label, empty for zero."""
    n %= 8
    if n == 0:
        return ""
    if n == 4:
        return "$\\pi$"
    num, den = (n // 2, 2) if n % 2 == 0 else (n, 4)
    return f"$\\frac{{{'' if num == 1 else num}\\pi}}{{{den}}}$"


def _distances(d: Diagram, sources: list[int]) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    q = deque(sources)
    while q:
        v = q.popleft()
        for w in sorted(d.adj[v]):
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def layout(d: Diagram) -> dict[int, tuple[float, float]]:
    """Layered coordinates; boundaries sit in their own first and last columns."""
    from_inputs = bool(d.inputs)
    dist = _distances(d, list(d.inputs if from_inputs else d.outputs))
    depth = max(dist.values(), default=0)
    for v in d.ty:
        dist.setdefault(v, depth + 1)
    depth = max(dist.values())
    layer = {v: (dist[v] if from_inputs else depth - dist[v]) for v in d.ty}
    last = max((layer[v] for v in d.ty if v not in d.outputs), default=-1)
    for v in d.outputs:
        layer[v] = last + 1
    order = {v: i for i, v in enumerate(d.boundary_order)}
    rows: dict[int, int] = {}
    pos: dict[int, tuple[float, float]] = {}
    for v in sorted(d.ty, key=lambda v: (layer[v], order.get(v, len(order)), v)):
        if v in order:
            y = d.inputs.index(v) if v in d.inputs else d.outputs.index(v)
        else:
            y = rows.get(layer[v], 0)
            rows[layer[v]] = y + 1
        pos[v] = (float(layer[v]), 0.0 - y)
    return pos


def _style(d: Diagram, v: int) -> str:
    t = d.ty[v]
    if t == VertexType.BOUNDARY:
        return STYLE_BOUNDARY
    if t == VertexType.Z:
        return STYLE_Z_PHASE if d.phase[v] else STYLE_Z
    return STYLE_X_PHASE if d.phase[v] else STYLE_X


def _latex(d: Diagram) -> str:
    text = str(d.scalar)
    for a, b in (("ω²", "\\omega^2"), ("ω³", "\\omega^3"), ("ω", "\\omega"), ("√2", "\\sqrt{2}")):
        text = text.replace(a, b)
    return text


def to_tikz(d: Diagram, draw_scalar: bool = False) -> str:
    pos = layout(d)
    ids = {v: i for i, v in enumerate(sorted(d.ty))}
    nodes = []
    if draw_scalar:
        nodes.append(f"        \\node [style=none] ({len(ids)}) at (-1.00, 1.00) {{${_latex(d)}$}};")
    for v in sorted(d.ty):
        x, y = pos[v]
        lab = "" if d.ty[v] == VertexType.BOUNDARY else phase_label(d.phase[v])
        nodes.append(f"        \\node [style={_style(d, v)}] ({ids[v]}) at ({x:.2f}, {y:.2f}) {{{lab}}};")
    edges = []
    for u, v, (p, h) in d.edges():
        a, b = ids[u], ids[v]
        loop = ", loop" if u == v else ""
        for _ in range(p):
            style = f"[{loop.lstrip(', ')}] " if loop else ""
            edges.append(f"        \\draw {style}({a}) to ({b});")
        for _ in range(h):
            edges.append(f"        \\draw [style={STYLE_HADAMARD_EDGE}{loop}] ({a}) to ({b});")
    return _HEADER + "\n".join(nodes) + ("\n" if nodes else "") + _MIDDLE + "\n".join(edges) + ("\n" if edges else "") + _FOOTER
