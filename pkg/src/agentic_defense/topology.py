"""The defended five-node network and the path each traffic class travels.

The default graph is hub-and-spoke: the router is the gateway adjacent to
both servers, the database and the IoT device. Node ids are fixed
lowercase strings because they are written verbatim into decision logs.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum

from .labels import TrafficClass


class NodeKind(Enum):
    ROUTER = "router"
    SERVER = "server"
    DATABASE = "database"
    IOT_DEVICE = "iot"
    EXTERNAL = "external"


# Off-network origin; never a member of the defended graph.
EXTERNAL_NODE_ID = "external"

_REQUIRED_KINDS = Counter(
    {NodeKind.ROUTER: 1, NodeKind.SERVER: 2, NodeKind.DATABASE: 1, NodeKind.IOT_DEVICE: 1}
)


@dataclass(frozen=True)
class NetworkGraph:
    nodes: tuple[tuple[str, NodeKind], ...]
    edges: tuple[tuple[str, str], ...]

    def node_ids(self) -> list[str]:
        return [node_id for node_id, _ in self.nodes]

    def kind_of(self, node_id: str) -> NodeKind:
        for nid, kind in self.nodes:
            if nid == node_id:
                return kind
        raise KeyError(node_id)

    def neighbours(self, node_id: str) -> set[str]:
        out = set()
        for a, b in self.edges:
            if a == node_id:
                out.add(b)
            elif b == node_id:
                out.add(a)
        return out

    def degree(self, node_id: str) -> int:
        return len(self.neighbours(node_id))

    def first_of(self, kind: NodeKind) -> str:
        """Node id that stands for ``kind`` on event paths."""
        if kind is NodeKind.EXTERNAL:
            return EXTERNAL_NODE_ID
        for node_id, k in self.nodes:
            if k is kind:
                return node_id
        raise KeyError(f"graph has no {kind.value} node")

    def without_node(self, node_id: str) -> "NetworkGraph":
        return NetworkGraph(
            nodes=tuple(n for n in self.nodes if n[0] != node_id),
            edges=tuple(e for e in self.edges if node_id not in e),
        )

    def without_edge(self, a: str, b: str) -> "NetworkGraph":
        target = {a, b}
        return NetworkGraph(nodes=self.nodes, edges=tuple(e for e in self.edges if set(e) != target))


@dataclass(frozen=True)
class PathTemplate:
    traffic_class: TrafficClass
    source: NodeKind
    destination: NodeKind


def default_topology() -> NetworkGraph:
    """Router hub with server1, server2, database and iot as spokes."""
    nodes = (
        ("router", NodeKind.ROUTER),
        ("server1", NodeKind.SERVER),
        ("server2", NodeKind.SERVER),
        ("database", NodeKind.DATABASE),
        ("iot", NodeKind.IOT_DEVICE),
    )
    edges = tuple(("router", node_id) for node_id, _ in nodes[1:])
    return NetworkGraph(nodes=nodes, edges=edges)


def validate(graph: NetworkGraph) -> list[str]:
    """Return the names of every violated invariant; an empty list means ok.

    Possible entries: ``node-count``, ``external-node``, ``duplicate-node``,
    ``dangling-edge``, ``self-loop``, ``duplicates``, ``connectivity``, ``hub``.
    """
    violations: list[str] = []
    ids = graph.node_ids()
    kinds = Counter(kind for _, kind in graph.nodes)

    if any(kind is NodeKind.EXTERNAL for kind in kinds):
        violations.append("external-node")
    internal = Counter({k: v for k, v in kinds.items() if k is not NodeKind.EXTERNAL})
    if len(ids) != 5 or internal != _REQUIRED_KINDS:
        violations.append("node-count")
    if len(set(ids)) != len(ids):
        violations.append("duplicate-node")

    known = set(ids)
    seen: set[frozenset[str]] = set()
    dup = dangling = loop = False
    for a, b in graph.edges:
        if a not in known or b not in known:
            dangling = True
        if a == b:
            loop = True
        key = frozenset((a, b))
        if key in seen:
            dup = True
        seen.add(key)
    if dangling:
        violations.append("dangling-edge")
    if loop:
        violations.append("self-loop")
    if dup:
        violations.append("duplicates")

    if ids and not _connected(graph):
        violations.append("connectivity")

    routers = [nid for nid, kind in graph.nodes if kind is NodeKind.ROUTER]
    if len(routers) != 1 or graph.neighbours(routers[0]) != known - {routers[0]}:
        violations.append("hub")
    return violations


def _connected(graph: NetworkGraph) -> bool:
    ids = graph.node_ids()
    reached = {ids[0]}
    queue = deque([ids[0]])
    while queue:
        for nxt in graph.neighbours(queue.popleft()):
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    return reached >= set(ids)


_PATHS = {
    TrafficClass.NORMAL: (NodeKind.SERVER, NodeKind.DATABASE),
    TrafficClass.PHISHING: (NodeKind.EXTERNAL, NodeKind.IOT_DEVICE),
    TrafficClass.RANSOMWARE: (NodeKind.IOT_DEVICE, NodeKind.DATABASE),
    TrafficClass.DDOS: (NodeKind.EXTERNAL, NodeKind.ROUTER),
}


def attack_path(traffic_class: TrafficClass) -> PathTemplate:
    source, destination = _PATHS[TrafficClass(traffic_class)]
    return PathTemplate(TrafficClass(traffic_class), source, destination)
