"""Coupling-graph constructions discretizing curved two-dimensional geometries.

A binary tree with intra-level rings discretizes a hyperbolic disk; two
truncated copies glued at their innermost levels discretize a two-sided
wormhole; decoration splits every edge with an intermediate node carrying
opposite-sign couplings.  Node ids are consecutive integers starting at 0,
and the coupling matrix is the signed adjacency matrix of the edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .phase_space import MEASURED_ROLES, ROLES

#: proper radial distance between adjacent tree levels, in AdS units
LEVEL_SPACING = math.log(2.0)

#: display radius of the outermost (boundary) level on the unit disk
BOUNDARY_DISPLAY_RADIUS = 0.95


@dataclass(frozen=True)
class GraphNode:
    id: int
    role: str
    depth: int | None = None
    theta: float | None = None
    side: str | None = None


@dataclass(frozen=True)
class CouplingGraph:
    """Simple signed graph plus per-node roles and optional disk coordinates."""

    nodes: tuple[GraphNode, ...]
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        n = len(self.nodes)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ValueError("node ids must be consecutive integers from 0")
            if node.role not in ROLES:
                raise ValueError(f"unknown role {node.role!r} on node {i}")
        seen: set[tuple[int, int]] = set()
        for a, b, w in self.edges:
            if a == b:
                raise ValueError("self-loops are not allowed")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) references a missing node")
            if w not in (-1, 1):
                raise ValueError("edge weights must be +1 or -1")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge between {key[0]} and {key[1]}")
            seen.add(key)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def coupling_matrix(self) -> np.ndarray:
        j = np.zeros((self.num_nodes, self.num_nodes))
        for a, b, w in self.edges:
            j[a, b] = w
            j[b, a] = w
        j.setflags(write=False)
        return j

    def roles(self) -> tuple[str, ...]:
        return tuple(node.role for node in self.nodes)

    def node(self, node_id: int) -> GraphNode:
        return self.nodes[node_id]

    def nodes_with_role(self, *roles: str) -> tuple[int, ...]:
        return tuple(node.id for node in self.nodes if node.role in roles)

    def measured_nodes(self) -> tuple[int, ...]:
        return self.nodes_with_role(*MEASURED_ROLES)

    def boundary_ring(self, side: str | None = None) -> tuple[int, ...]:
        """Boundary node ids in angular order, optionally restricted to one side."""
        picked = [
            node
            for node in self.nodes
            if node.role == "boundary" and (side is None or node.side == side)
        ]
        if not picked:
            raise ValueError(f"no boundary nodes for side {side!r}")
        return tuple(node.id for node in sorted(picked, key=lambda nd: (nd.theta, nd.id)))

    def degree(self, node_id: int) -> int:
        return sum(1 for a, b, _ in self.edges if node_id in (a, b))


@dataclass(frozen=True)
class DiskSpec:
    """Binary-tree disk of the given depth; boundary has 2**depth sites."""

    depth: int
    branching: int = 2

    def __post_init__(self) -> None:
        if self.depth < 2:
            raise ValueError("disk depth must be >= 2")
        if self.branching != 2:
            raise ValueError("only branching ratio 2 is supported")

    @property
    def boundary_size(self) -> int:
        return 2**self.depth


@dataclass(frozen=True)
class WormholeSpec:
    """Two truncated disks glued at their innermost (throat) level."""

    depth: int
    throat_depth: int
    interior: str = "ring_bridge"

    def __post_init__(self) -> None:
        if self.depth < 2:
            raise ValueError("wormhole depth must be >= 2")
        if not 1 <= self.throat_depth < self.depth:
            raise ValueError("throat depth must satisfy 1 <= throat < depth")
        if self.interior not in ("ring_bridge", "identify"):
            raise ValueError("interior must be 'ring_bridge' or 'identify'")

    @property
    def boundary_size(self) -> int:
        return 2**self.depth


@dataclass(frozen=True)
class DecorationSpec:
    """Edge-splitting decoration of an all-bulk base graph."""

    base: CouplingGraph
    boundary_attach: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(node.role != "bulk" for node in self.base.nodes):
            raise ValueError("decoration base graph must contain only bulk nodes")
        if any(w != 1 for _, _, w in self.base.edges):
            raise ValueError("decoration base graph must be unweighted (+1 edges)")
        if not self.boundary_attach:
            raise ValueError("boundary_attach must be nonempty")
        for v in self.boundary_attach:
            if not 0 <= v < self.base.num_nodes:
                raise ValueError(f"attach vertex {v} is not in the base graph")


def _level_start(level: int) -> int:
    return 2**level - 1


def _ring_edges(ids: list[int]) -> list[tuple[int, int, int]]:
    if len(ids) < 2:
        return []
    if len(ids) == 2:
        return [(ids[0], ids[1], 1)]
    edges = []
    for k in range(len(ids)):
        a, b = ids[k], ids[(k + 1) % len(ids)]
        edges.append((min(a, b), max(a, b), 1))
    return edges


def build_disk_graph(spec: DiskSpec) -> CouplingGraph:
    """Binary tree of the given depth with every level closed into a ring.

    Level R holds 2**R nodes at radial layer R and angles 2 pi k / 2**R;
    the outermost level is the boundary, everything else is bulk.
    """
    nodes: list[GraphNode] = []
    edges: list[tuple[int, int, int]] = []
    for level in range(spec.depth + 1):
        size = 2**level
        start = _level_start(level)
        role = "boundary" if level == spec.depth else "bulk"
        ids = []
        for k in range(size):
            nid = start + k
            nodes.append(GraphNode(nid, role, depth=level, theta=2.0 * math.pi * k / size))
            ids.append(nid)
            if level > 0:
                parent = _level_start(level - 1) + k // 2
                edges.append((parent, nid, 1))
        edges.extend(_ring_edges(ids))
    return CouplingGraph(tuple(nodes), tuple(edges))


def build_wormhole_graph(spec: WormholeSpec) -> CouplingGraph:
    """Glue two disks truncated below the throat level.

    interior='ring_bridge' joins equal-angle throat nodes of the two copies
    by +1 edges; interior='identify' merges them into a single shared ring.
    The boundary consists of both outermost levels.
    """
    nodes: list[GraphNode] = []
    edges: list[tuple[int, int, int]] = []
    level_ids: dict[tuple[str, int], list[int]] = {}

    def add_level(side: str | None, level: int, role: str) -> list[int]:
        size = 2**level
        ids = []
        for k in range(size):
            nid = len(nodes)
            nodes.append(
                GraphNode(nid, role, depth=level, theta=2.0 * math.pi * k / size, side=side)
            )
            ids.append(nid)
        return ids

    sides = ("left", "right")
    if spec.interior == "identify":
        shared = add_level(None, spec.throat_depth, "bulk")
        edges.extend(_ring_edges(shared))
        for side in sides:
            level_ids[(side, spec.throat_depth)] = shared
    for side in sides:
        first = spec.throat_depth if spec.interior == "ring_bridge" else spec.throat_depth + 1
        for level in range(first, spec.depth + 1):
            role = "boundary" if level == spec.depth else "bulk"
            ids = add_level(side, level, role)
            level_ids[(side, level)] = ids
            edges.extend(_ring_edges(ids))
        for level in range(spec.throat_depth + 1, spec.depth + 1):
            ids = level_ids[(side, level)]
            parents = level_ids[(side, level - 1)]
            for k, nid in enumerate(ids):
                parent = parents[k // 2]
                edges.append((min(parent, nid), max(parent, nid), 1))
    if spec.interior == "ring_bridge":
        left = level_ids[("left", spec.throat_depth)]
        right = level_ids[("right", spec.throat_depth)]
        for a, b in zip(left, right):
            edges.append((min(a, b), max(a, b), 1))
    return CouplingGraph(tuple(nodes), tuple(edges))


def _circular_midpoint(theta_a: float, theta_b: float) -> float:
    x = math.cos(theta_a) + math.cos(theta_b)
    y = math.sin(theta_a) + math.sin(theta_b)
    if x == 0.0 and y == 0.0:
        return theta_a
    return math.atan2(y, x) % (2.0 * math.pi)


def decorate(spec: DecorationSpec) -> CouplingGraph:
    """Split every base edge with a new node carrying +1/-1 couplings.

    The +1 half attaches to the lower-id endpoint.  One boundary node with
    a +1 edge is added per attach vertex, in the attach order.
    """
    base = spec.base
    nodes: list[GraphNode] = list(base.nodes)
    edges: list[tuple[int, int, int]] = []
    for a, b, _ in base.edges:
        lo, hi = min(a, b), max(a, b)
        split_id = len(nodes)
        na, nb = base.node(lo), base.node(hi)
        depth = None
        theta = None
        if na.depth is not None and nb.depth is not None:
            depth = max(na.depth, nb.depth)
        if na.theta is not None and nb.theta is not None:
            theta = _circular_midpoint(na.theta, nb.theta)
        nodes.append(GraphNode(split_id, "split", depth=depth, theta=theta, side=na.side))
        edges.append((lo, split_id, 1))
        edges.append((hi, split_id, -1))
    for v in spec.boundary_attach:
        attach = base.node(v)
        nid = len(nodes)
        depth = None if attach.depth is None else attach.depth + 1
        nodes.append(GraphNode(nid, "boundary", depth=depth, theta=attach.theta, side=attach.side))
        edges.append((v, nid, 1))
    return CouplingGraph(tuple(nodes), tuple(edges))


def build_decorated_disk(depth: int) -> CouplingGraph:
    """Decorated disk: the depth-(depth-1) disk as an all-bulk base, with a
    boundary node hung off every outermost bulk node.

    The resulting boundary ring has 2**(depth-1) sites.
    """
    if depth < 3:
        raise ValueError("decorated disk depth must be >= 3")
    base_disk = build_disk_graph(DiskSpec(depth - 1))
    bulk_nodes = tuple(
        GraphNode(node.id, "bulk", depth=node.depth, theta=node.theta) for node in base_disk.nodes
    )
    base = CouplingGraph(bulk_nodes, base_disk.edges)
    attach = base_disk.boundary_ring()
    return decorate(DecorationSpec(base, tuple(attach)))


def attach_probe(graph: CouplingGraph, bulk_node: int) -> CouplingGraph:
    """Add an unmeasured probe node coupled (+1) to the chosen bulk node."""
    if not 0 <= bulk_node < graph.num_nodes:
        raise ValueError(f"node {bulk_node} is not in the graph")
    target = graph.node(bulk_node)
    if target.role != "bulk":
        raise ValueError(f"probe target must be a bulk node, got role {target.role!r}")
    probe_id = graph.num_nodes
    depth = None if target.depth is None else target.depth + 1
    probe = GraphNode(probe_id, "probe", depth=depth, theta=target.theta, side=target.side)
    return CouplingGraph(
        graph.nodes + (probe,), graph.edges + ((bulk_node, probe_id, 1),)
    )


def poincare_coordinates(graph: CouplingGraph) -> dict[int, tuple[float, float]]:
    """Display positions on the unit disk: radius grows with layer depth.

    Layer R sits at hyperbolic radius R * ln 2, mapped through tanh(r/2)
    and rescaled so the boundary layer lands at radius 0.95.
    """
    for node in graph.nodes:
        if node.depth is None or node.theta is None:
            raise ValueError(f"node {node.id} lacks disk coordinates")
    boundary_depths = [n.depth for n in graph.nodes if n.role == "boundary"]
    if not boundary_depths:
        raise ValueError("graph has no boundary level to anchor the display radius")
    anchor = max(boundary_depths)
    scale = BOUNDARY_DISPLAY_RADIUS / math.tanh(anchor * LEVEL_SPACING / 2.0)
    coords = {}
    for node in graph.nodes:
        rho = scale * math.tanh(node.depth * LEVEL_SPACING / 2.0)
        coords[node.id] = (rho * math.cos(node.theta), rho * math.sin(node.theta))
    return coords


def graph_to_text(graph: CouplingGraph) -> str:
    """Serialize to the text edge-list format.

    Header line ``nodes <count>``, one line per node ``id role R theta``,
    then one line per edge ``a b weight``.
    """
    lines = [f"nodes {graph.num_nodes}"]
    for node in graph.nodes:
        depth = "-" if node.depth is None else str(node.depth)
        theta = "-" if node.theta is None else f"{node.theta:.17g}"
        lines.append(f"{node.id} {node.role} {depth} {theta}")
    for a, b, w in graph.edges:
        lines.append(f"{a} {b} {w:+d}")
    return "\n".join(lines) + "\n"


def connected_components(graph: CouplingGraph) -> list[set[int]]:
    """Connected components of the undirected edge set."""
    adjacency: dict[int, set[int]] = {i: set() for i in range(graph.num_nodes)}
    for a, b, _ in graph.edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    remaining = set(range(graph.num_nodes))
    components = []
    while remaining:
        frontier = [next(iter(remaining))]
        component: set[int] = set()
        while frontier:
            node = frontier.pop()
            if node in component:
                continue
            component.add(node)
            frontier.extend(adjacency[node] - component)
        components.append(component)
        remaining -= component
    return components
