"""Labeled undirected graphs, terminal-marked gadgets, and composition.

Graphs are immutable: vertices are the dense integers 0..n-1, edges an
unordered set of distinct pairs, with optional per-vertex string labels used
only for construction provenance.  Self-loops and parallel edges are
impossible by construction, which every composition below relies on.

A Gadget is a bipartite graph together with a degree-1 terminal vertex and a
certified exact value of the occupation ratio Z_in/Z_out at that terminal for
a fixed ambient activity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CapacityError, DomainError
from .numerics import format_rational, parse_rational


class Graph:
    """Immutable simple undirected graph on vertices 0..n-1."""

    __slots__ = ("n", "edges", "labels", "_adj")

    def __init__(self, n: int, edges, labels: dict | None = None):
        if n < 0:
            raise DomainError("vertex count must be non-negative")
        norm = set()
        for u, v in edges:
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u},{v}) out of range for n={n}")
            norm.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "labels", dict(labels) if labels else {})
        object.__setattr__(self, "_adj", None)

    def __setattr__(self, *args):
        raise AttributeError("Graph is immutable")

    # -- basic queries -------------------------------------------------------

    @property
    def adjacency(self):
        if self._adj is None:
            adj = [[] for _ in range(self.n)]
            for u, v in self.edges:
                adj[u].append(v)
                adj[v].append(u)
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def neighbors(self, v: int):
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def degrees(self):
        return [len(a) for a in self.adjacency]

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        seen = bytearray(self.n)
        queue = deque([0])
        seen[0] = 1
        count = 1
        while queue:
            u = queue.popleft()
            for w in self.adjacency[u]:
                if not seen[w]:
                    seen[w] = 1
                    count += 1
                    queue.append(w)
        return count == self.n

    def is_tree(self) -> bool:
        return self.n >= 1 and len(self.edges) == self.n - 1 and self.is_connected()

    def components(self):
        """List of vertex lists, one per connected component."""
        seen = bytearray(self.n)
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = 1
            comp = [s]
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self.adjacency[u]:
                    if not seen[w]:
                        seen[w] = 1
                        comp.append(w)
                        queue.append(w)
            comps.append(comp)
        return comps

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        data = {"n": self.n, "edges": sorted([u, v] for u, v in self.edges)}
        if self.labels:
            data["labels"] = {str(k): v for k, v in sorted(self.labels.items())}
        return data

    @staticmethod
    def from_json(data: dict) -> "Graph":
        labels = {int(k): v for k, v in data.get("labels", {}).items()}
        return Graph(int(data["n"]), [tuple(e) for e in data["edges"]], labels)

    def __eq__(self, other):
        return (isinstance(other, Graph) and self.n == other.n
                and self.edges == other.edges)

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={len(self.edges)})"


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def path(n: int) -> Graph:
    """Simple path on n >= 1 vertices, 0 -- 1 -- ... -- n-1."""
    if n < 1:
        raise DomainError("a path needs at least one vertex")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def dary_tree(d: int, h: int):
    """Complete d-ary tree of height h; returns (graph, root).

    Every internal vertex has exactly d children; height 0 is a single vertex.
    """
    if d < 1 or h < 0:
        raise DomainError("need d >= 1 and h >= 0")
    edges = []
    level = [0]
    next_id = 1
    for _ in range(h):
        nxt = []
        for parent in level:
            for _ in range(d):
                edges.append((parent, next_id))
                nxt.append(next_id)
                next_id += 1
        level = nxt
    return Graph(next_id, edges), 0


def disjoint_union(g1: Graph, g2: Graph):
    """Union with g2's vertices shifted by g1.n; returns (graph, offset)."""
    offset = g1.n
    edges = list(g1.edges) + [(u + offset, v + offset) for u, v in g2.edges]
    labels = dict(g1.labels)
    labels.update({k + offset: v for k, v in g2.labels.items()})
    return Graph(g1.n + g2.n, edges, labels), offset


def attach_at(g1: Graph, u: int, g2: Graph, v: int) -> Graph:
    """Disjoint union of g1 and g2 with u (in g1) and v (in g2) identified.

    The merged vertex keeps g1's id u and has degree deg(u) + deg(v); every
    other degree is preserved.  Composition can never create a parallel edge
    because the pieces are disjoint, and this is asserted.
    """
    if not (0 <= u < g1.n):
        raise DomainError(f"vertex {u} not in the base graph")
    if not (0 <= v < g2.n):
        raise DomainError(f"vertex {v} not in the attached graph")

    remap = {}
    next_id = g1.n
    for w in range(g2.n):
        if w == v:
            remap[w] = u
        else:
            remap[w] = next_id
            next_id += 1
    edges = list(g1.edges) + [(remap[a], remap[b]) for a, b in g2.edges]
    labels = dict(g1.labels)
    labels.update({remap[k]: lab for k, lab in g2.labels.items() if k != v})
    out = Graph(next_id, edges, labels)
    assert len(out.edges) == len(g1.edges) + len(g2.edges), "identification merged edges"
    return out


def add_pendant(g: Graph, u: int):
    """Add one new degree-1 vertex adjacent only to u; returns (graph, new vertex)."""
    if not (0 <= u < g.n):
        raise DomainError(f"vertex {u} not in the graph")
    new = g.n
    return Graph(g.n + 1, list(g.edges) + [(u, new)], dict(g.labels)), new


def is_bipartite(g: Graph):
    """Proper 2-coloring as a list of 0/1 (color of isolated vertices is 0), or None."""
    color = [-1] * g.n
    for s in range(g.n):
        if color[s] != -1:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if color[w] == -1:
                    color[w] = 1 - color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    return None
    return color


# ---------------------------------------------------------------------------
# Activity vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActivityVector:
    """Per-vertex activities; the common case is the uniform ambient activity."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    @staticmethod
    def uniform(n: int, lam) -> "ActivityVector":
        return ActivityVector((Fraction(lam),) * n)

    def with_value(self, vertex: int, value) -> "ActivityVector":
        vals = list(self.values)
        vals[vertex] = Fraction(value)
        return ActivityVector(tuple(vals))

    def __getitem__(self, v: int) -> Fraction:
        return self.values[v]

    def __len__(self):
        return len(self.values)

    def to_json(self):
        return [format_rational(v) for v in self.values]

    @staticmethod
    def from_json(data) -> "ActivityVector":
        return ActivityVector(tuple(parse_rational(s) for s in data))


def coerce_activities(g: Graph, acts) -> tuple:
    """Accept a scalar, a sequence, or an ActivityVector; return a value tuple."""
    if isinstance(acts, ActivityVector):
        vals = acts.values
    elif isinstance(acts, (int, Fraction)):
        vals = (Fraction(acts),) * g.n
    else:
        vals = tuple(Fraction(v) for v in acts)
    if len(vals) != g.n:
        raise DomainError(f"activity vector length {len(vals)} != vertex count {g.n}")
    return vals


# ---------------------------------------------------------------------------
# Gadgets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gadget:
    """Bipartite graph + degree-1 terminal + certified exact terminal ratio."""

    graph: Graph
    terminal: int
    ratio: Fraction
    lam: Fraction

    def __post_init__(self):
        object.__setattr__(self, "ratio", Fraction(self.ratio))
        object.__setattr__(self, "lam", Fraction(self.lam))

    def to_json(self) -> dict:
        data = self.graph.to_json()
        data.update({
            "terminal": self.terminal,
            "ratio": format_rational(self.ratio),
            "lambda": format_rational(self.lam),
        })
        return data

    @staticmethod
    def from_json(data: dict) -> "Gadget":
        return Gadget(
            Graph.from_json(data),
            int(data["terminal"]),
            parse_rational(data["ratio"]),
            parse_rational(data["lambda"]),
        )


def gadget_split(g: Gadget):
    """Exact (Z_in, Z_out) at the gadget's terminal, recomputed from scratch."""
    from . import partition

    acts = ActivityVector.uniform(g.graph.n, g.lam)
    if g.graph.is_tree():
        return partition.z_tree(g.graph, g.terminal, acts)
    return partition.z_exact(g.graph, acts, marked=g.terminal)


def validate_gadget(g: Gadget) -> bool:
    """Recheck everything a Gadget claims.

    True iff the terminal has degree 1, the graph is bipartite, Z_out at the
    terminal is nonzero, and the exactly recomputed ratio equals the claimed
    one (tested by cross-multiplication, so gadgets with enormous exact
    ratios avoid giant gcds).  Raises CapacityError only if no exact
    evaluator can handle the graph.
    """
    from . import partition

    if not (0 <= g.terminal < g.graph.n):
        return False
    if g.graph.degree(g.terminal) != 1:
        return False
    if is_bipartite(g.graph) is None:
        return False
    acts = ActivityVector.uniform(g.graph.n, g.lam)
    matches, nonzero = partition.z_exact_ratio_check(
        g.graph, acts, g.terminal, g.ratio)
    return matches and nonzero
