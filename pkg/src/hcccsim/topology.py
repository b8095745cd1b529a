"""Node placement, unit-disk connectivity and static shortest-hop routing.

Routing is intentionally static: breadth-first shortest hop count toward the
sink, ties broken by the lowest neighbor id.  This isolates the congestion
control behaviour from routing dynamics.  Connectivity uses the unit-disk
rule with an inclusive boundary, compared on squared distances so the result
is exact.
"""

from collections import deque
from dataclasses import dataclass


class TopologyError(Exception):
    pass


@dataclass
class NodeSpec:
    id: int
    x: float
    y: float
    role: str  # "sink" | "source" | "relay"


class Topology:
    """Immutable after construction; node 0 is the sink by convention."""

    def __init__(self, nodes, adjacency, next_hop, hop_count):
        self.nodes = nodes
        self.adjacency = adjacency
        self.next_hop = next_hop
        self.hop_count = hop_count

    @property
    def sink_id(self):
        return 0

    def reachable(self, node_id):
        return self.hop_count[node_id] is not None

    def write_csv(self, path):
        """Dump positions, roles, routes and edges for debugging/plotting."""
        with open(path, "w") as f:
            f.write("record,id,x,y,role,next_hop,hop_count\n")
            for spec in self.nodes:
                nh = self.next_hop[spec.id]
                hc = self.hop_count[spec.id]
                f.write("node,%d,%.10g,%.10g,%s,%s,%s\n" % (
                    spec.id, spec.x, spec.y, spec.role,
                    "" if nh is None else nh, "" if hc is None else hc))
            f.write("record,a,b,,,,\n")
            for a in range(len(self.nodes)):
                for b in self.adjacency[a]:
                    if b > a:
                        f.write("edge,%d,%d,,,,\n" % (a, b))


def place_random(n, side, source_count, stream):
    """Uniform placement of n nodes in a side x side square.

    Node 0 is the sink; the next source_count ids are sources, the rest relays.
    """
    if n < 2:
        raise TopologyError("need at least 2 nodes (sink plus one source), got %d" % n)
    if not 1 <= source_count <= n - 1:
        raise TopologyError("source_count %d out of range [1, %d]" % (source_count, n - 1))
    if side <= 0:
        raise TopologyError("region side must be positive")
    nodes = []
    for i in range(n):
        x = side * stream.random()
        y = side * stream.random()
        if i == 0:
            role = "sink"
        elif i <= source_count:
            role = "source"
        else:
            role = "relay"
        nodes.append(NodeSpec(id=i, x=x, y=y, role=role))
    return nodes


def build_adjacency(nodes, radius):
    """Symmetric neighbor lists; an edge exists iff squared distance <= radius^2."""
    n = len(nodes)
    r2 = radius * radius
    adjacency = [[] for _ in range(n)]
    for i in range(n):
        xi, yi = nodes[i].x, nodes[i].y
        for j in range(i + 1, n):
            dx = nodes[j].x - xi
            dy = nodes[j].y - yi
            if dx * dx + dy * dy <= r2:
                adjacency[i].append(j)
                adjacency[j].append(i)
    return adjacency


def compute_routes(adjacency, sink_id=0):
    """BFS hop counts toward the sink; next hop is the lowest-id neighbor one hop closer.

    Unreachable nodes get (None, None).
    """
    n = len(adjacency)
    hop_count = [None] * n
    hop_count[sink_id] = 0
    queue = deque([sink_id])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if hop_count[v] is None:
                hop_count[v] = hop_count[u] + 1
                queue.append(v)
    next_hop = [None] * n
    for v in range(n):
        if v == sink_id or hop_count[v] is None:
            continue
        best = None
        for u in adjacency[v]:
            if hop_count[u] == hop_count[v] - 1 and (best is None or u < best):
                best = u
        next_hop[v] = best
    return next_hop, hop_count


def build_topology(config, stream):
    """Topology per a scenario config; honours the disconnected-source policy."""
    nodes = place_random(config.node_count, config.area_side, config.source_count, stream)
    adjacency = build_adjacency(nodes, config.radius)
    next_hop, hop_count = compute_routes(adjacency, 0)
    topo = Topology(nodes, adjacency, next_hop, hop_count)
    if config.disconnected == "fail":
        bad = [s.id for s in nodes if s.role == "source" and hop_count[s.id] is None]
        if bad:
            raise TopologyError("disconnected source nodes: %s" % bad)
    return topo
