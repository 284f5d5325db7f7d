"""Metric graphs and the structural operations performed on them.

A metric graph is a set of vertices joined by edges that carry an optical
length (meters) and, optionally, a magnetic vector potential (radians per
meter, signed along the stored edge direction).  Graphs are immutable;
every operation returns a new graph, so values can be shared freely
between parallel workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

__all__ = [
    "Edge",
    "MetricGraph",
    "SwitchDescriptor",
    "validate",
    "edge_switch",
    "transfer_length",
    "pin_total_length",
    "negate_phases",
    "load_graph",
    "save_graph",
    "graph_to_dict",
    "graph_from_dict",
]

GRAPH_FILE_VERSION = 1


@dataclass(frozen=True)
class Edge:
    """Undirected edge with a stored orientation.

    The magnetic phase is the vector potential component along the stored
    direction u -> v; traversing v -> u picks up the opposite sign.  Loops
    (u == v) are allowed.
    """

    id: int
    u: int
    v: int
    length: float
    phase_per_m: float = 0.0

    def is_loop(self) -> bool:
        return self.u == self.v

    def other_end(self, vertex: int) -> int:
        if vertex == self.u:
            return self.v
        if vertex == self.v:
            return self.u
        raise ValueError(f"vertex {vertex} is not an endpoint of edge {self.id}")

    def canonical(self) -> tuple[int, int, float, float]:
        """Orientation-independent tuple (phase sign follows min -> max)."""
        if self.u <= self.v:
            return (self.u, self.v, self.length, self.phase_per_m)
        return (self.v, self.u, self.length, -self.phase_per_m)


@dataclass(frozen=True)
class MetricGraph:
    """Immutable metric graph with Neumann (standard) vertex conditions."""

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def total_length(self) -> float:
        # fsum: exactly rounded, independent of edge order
        return math.fsum(e.length for e in self.edges)

    def degree(self, vertex: int) -> int:
        d = 0
        for e in self.edges:
            if e.u == vertex:
                d += 1
            if e.v == vertex:
                d += 1
        return d

    def edge_by_id(self, edge_id: int) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(f"no edge with id {edge_id}")

    def canonical_edges(self) -> tuple[tuple[int, int, float, float], ...]:
        """Sorted orientation-independent edge tuples (for equality tests)."""
        return tuple(sorted(e.canonical() for e in self.edges))

    def with_edges(self, edges: tuple[Edge, ...]) -> "MetricGraph":
        return replace(self, edges=edges)


@dataclass(frozen=True)
class SwitchDescriptor:
    """Two edges meeting at a pivot vertex, ready to have their far
    endpoints exchanged."""

    pivot: int
    edge_a: int
    edge_b: int

    def check(self, graph: MetricGraph) -> None:
        if self.edge_a == self.edge_b:
            raise ValueError("switch needs two distinct edges")
        for eid in (self.edge_a, self.edge_b):
            e = graph.edge_by_id(eid)
            if self.pivot not in (e.u, e.v):
                raise ValueError(
                    f"edge {eid} is not incident to pivot vertex {self.pivot}"
                )
            if e.is_loop():
                raise ValueError(f"edge {eid} is a loop at the pivot; cannot switch")


def validate(graph: MetricGraph) -> list[str]:
    """Check every structural invariant; return human-readable violations.

    Diagnostics are returned, never raised, so callers can report all
    problems at once.
    """
    violations: list[str] = []
    n = len(graph.vertices)
    if sorted(graph.vertices) != list(range(n)):
        violations.append(
            f"vertices must be densely indexed 0..{n - 1}, got {sorted(graph.vertices)}"
        )
    seen_ids = set()
    length_ok = True
    for e in graph.edges:
        if e.id in seen_ids:
            violations.append(f"duplicate edge id {e.id}")
        seen_ids.add(e.id)
        if not (e.length > 0.0) or not math.isfinite(e.length):
            violations.append(f"edge {e.id} has non-positive length {e.length}")
            length_ok = False
        for endpoint in (e.u, e.v):
            if endpoint not in graph.vertices:
                violations.append(f"edge {e.id} references unknown vertex {endpoint}")
    if not graph.edges:
        violations.append("graph has no edges")
        return violations
    if length_ok and not (graph.total_length > 0.0):
        violations.append(f"total length must be positive, got {graph.total_length}")
    for v in graph.vertices:
        if graph.degree(v) < 1:
            violations.append(f"vertex {v} is isolated (degree 0)")
    if not _connected(graph):
        violations.append("graph is not connected")
    return violations


def _connected(graph: MetricGraph) -> bool:
    if not graph.vertices:
        return True
    adj: dict[int, set[int]] = {v: set() for v in graph.vertices}
    for e in graph.edges:
        if e.u in adj and e.v in adj:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
    stack = [graph.vertices[0]]
    seen = {graph.vertices[0]}
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(graph.vertices)


def edge_switch(graph: MetricGraph, d: SwitchDescriptor) -> MetricGraph:
    """Exchange the far endpoints of two edges sharing the pivot vertex.

    Lengths are untouched and magnetic phases are re-anchored so that the
    sign convention still runs pivot -> far endpoint; the total length is
    therefore preserved bit for bit.  Applying the same descriptor twice
    returns a graph with an identical canonical edge multiset.
    """
    d.check(graph)
    ea = graph.edge_by_id(d.edge_a)
    eb = graph.edge_by_id(d.edge_b)

    def pivot_to_far_phase(e: Edge) -> float:
        return e.phase_per_m if e.u == d.pivot else -e.phase_per_m

    far_a = ea.other_end(d.pivot)
    far_b = eb.other_end(d.pivot)
    new_a = Edge(ea.id, d.pivot, far_b, ea.length, pivot_to_far_phase(ea))
    new_b = Edge(eb.id, d.pivot, far_a, eb.length, pivot_to_far_phase(eb))
    new_edges = tuple(
        new_a if e.id == ea.id else new_b if e.id == eb.id else e for e in graph.edges
    )
    return graph.with_edges(new_edges)


def transfer_length(
    graph: MetricGraph, from_edge: int, to_edge: int, delta: float
) -> MetricGraph:
    """Move `delta` meters of optical length from one edge to another.

    Models a paired phase-shifter move: one bond grows while the other
    shrinks by the same amount, keeping the total length constant to full
    floating precision (a correction pass pins the exactly-rounded sum).
    """
    if delta < 0.0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    src = graph.edge_by_id(from_edge)
    dst = graph.edge_by_id(to_edge)
    if from_edge == to_edge:
        raise ValueError("from_edge and to_edge must differ")
    if delta >= src.length:
        raise ValueError(
            f"transfer of {delta} m would degenerate edge {from_edge} "
            f"(length {src.length} m)"
        )
    if delta == 0.0:
        return graph

    total_before = graph.total_length
    new_src_len = src.length - delta
    new_dst_len = dst.length + delta

    def build(dst_len: float) -> MetricGraph:
        new_edges = tuple(
            replace(e, length=new_src_len)
            if e.id == from_edge
            else replace(e, length=dst_len)
            if e.id == to_edge
            else e
            for e in graph.edges
        )
        return graph.with_edges(new_edges)

    return pin_total_length(build, new_dst_len, total_before)


def pin_total_length(build, length0: float, target: float) -> MetricGraph:
    """Adjust one edge length until the exactly-rounded total equals target.

    `build(length)` constructs the candidate graph.  Bulk corrections
    first, then single-ulp steps in the right direction; the adjustment
    stays within rounding distance of length0.
    """
    length = length0
    out = build(length)
    for _ in range(4):
        err = out.total_length - target
        if err == 0.0:
            return out
        length -= err
        out = build(length)
    for _ in range(64):
        err = out.total_length - target
        if err == 0.0:
            return out
        length = math.nextafter(length, -math.inf if err > 0.0 else math.inf)
        out = build(length)
    raise ArithmeticError("could not preserve total length to full precision")


def negate_phases(graph: MetricGraph) -> MetricGraph:
    """Flip the sign of every magnetic phase (time-reversal image)."""
    return graph.with_edges(
        tuple(replace(e, phase_per_m=-e.phase_per_m) for e in graph.edges)
    )


# ---------------------------------------------------------------------------
# graph file format (JSON): round-trips losslessly at full float precision
# ---------------------------------------------------------------------------


def graph_to_dict(graph: MetricGraph) -> dict:
    return {
        "version": GRAPH_FILE_VERSION,
        "vertices": list(graph.vertices),
        "edges": [
            {
                "id": e.id,
                "u": e.u,
                "v": e.v,
                "length_m": e.length,
                "phase_per_m": e.phase_per_m,
            }
            for e in graph.edges
        ],
        "metadata": dict(graph.metadata),
    }


def graph_from_dict(data: dict) -> MetricGraph:
    if data.get("version") != GRAPH_FILE_VERSION:
        raise ValueError(f"unsupported graph file version {data.get('version')!r}")
    try:
        vertices = tuple(int(v) for v in data["vertices"])
        edges = tuple(
            Edge(
                id=int(e["id"]),
                u=int(e["u"]),
                v=int(e["v"]),
                length=float(e["length_m"]),
                phase_per_m=float(e.get("phase_per_m", 0.0)),
            )
            for e in data["edges"]
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed graph file: {exc}") from exc
    return MetricGraph(vertices=vertices, edges=edges, metadata=data.get("metadata", {}))


def save_graph(graph: MetricGraph, path) -> None:
    # json floats use repr: shortest string that round-trips exactly
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(graph), fh, indent=2)
        fh.write("\n")


def load_graph(path) -> MetricGraph:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return graph_from_dict(data)
