"""Road network, time-optimal shortest paths and travel matrices."""
import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._core import kernels
from .errors import DanglingLink, DuplicateId, GeometryViolation, NetworkError, Unreachable

log = logging.getLogger(__name__)

# tolerance for the length >= straight-line check (float round-off in inputs)
GEOMETRY_TOL_KM = 1e-9


@dataclass(frozen=True)
class Link:
    source: str
    target: str
    length_km: float
    travel_time_s: float


@dataclass(frozen=True)
class PathCost:
    distance_km: float
    time_s: float


class RoadNetwork:
    """Directed road graph with per-link length (km) and travel time (s).

    Immutable after construction. Adjacency is stored in CSR form for the
    shortest-path kernel.
    """

    def __init__(self, nodes, links):
        self.nodes = dict(nodes)  # id -> (x_km, y_km)
        self.links = tuple(links)
        self.ids = list(self.nodes)
        self.index = {nid: i for i, nid in enumerate(self.ids)}
        n = len(self.ids)
        src = np.array([self.index[l.source] for l in self.links], dtype=np.int64)
        order = np.argsort(src, kind="stable")
        self._indices = np.array([self.index[self.links[k].target] for k in order], dtype=np.int64)
        self._times = np.array([self.links[k].travel_time_s for k in order], dtype=np.float64)
        self._lengths = np.array([self.links[k].length_km for k in order], dtype=np.float64)
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self._indptr[1:])
        self._coords = np.array([self.nodes[i] for i in self.ids], dtype=np.float64).reshape(n, 2)

    def __repr__(self):
        return f"RoadNetwork({len(self.nodes)} nodes, {len(self.links)} links)"

    @property
    def v_max_kmh(self):
        """Fastest link speed; ``euclid / v_max`` lower-bounds any travel time."""
        if not self.links:
            return 0.0
        return max(l.length_km / l.travel_time_s * 3600.0 for l in self.links)

    def coords(self, node_id):
        return self.nodes[node_id]

    def euclid(self, a, b):
        (xa, ya), (xb, yb) = self.nodes[a], self.nodes[b]
        return math.hypot(xa - xb, ya - yb)

    def sssp(self, source):
        """Times and distances from ``source`` to every node (index-aligned with ``ids``)."""
        t, d = kernels.dijkstra(self._indptr, self._indices, self._times, self._lengths,
                                self.index[source])
        return np.asarray(t, dtype=np.float64), np.asarray(d, dtype=np.float64)


def load_network(node_table, link_table):
    """Build a validated :class:`RoadNetwork`.

    ``node_table`` rows are ``(id, x_km, y_km)``; ``link_table`` rows are
    ``(from, to, length_km, travel_time_s)``. Mappings keyed like the CSV
    headers are accepted too.
    """
    nodes = {}
    for row in node_table:
        if isinstance(row, dict):
            row = (row["id"], row["x_km"], row["y_km"])
        nid, x, y = str(row[0]), float(row[1]), float(row[2])
        if nid in nodes:
            raise DuplicateId(f"duplicate node id {nid!r}")
        nodes[nid] = (x, y)
    links = []
    seen = set()
    for row in link_table:
        if isinstance(row, dict):
            row = (row["from"], row["to"], row["length_km"], row["travel_time_s"])
        a, b, length, tt = str(row[0]), str(row[1]), float(row[2]), float(row[3])
        for end in (a, b):
            if end not in nodes:
                raise DanglingLink(f"link {a}->{b} references undefined node {end!r}")
        if (a, b) in seen:
            raise DuplicateId(f"duplicate link {a}->{b}")
        seen.add((a, b))
        if not (length > 0 and tt > 0):
            raise NetworkError(f"link {a}->{b} needs positive length and time")
        (xa, ya), (xb, yb) = nodes[a], nodes[b]
        straight = math.hypot(xa - xb, ya - yb)
        if length < straight - GEOMETRY_TOL_KM:
            raise GeometryViolation(
                f"link {a}->{b} has length {length} km < straight-line {straight:.6f} km")
        links.append(Link(a, b, length, tt))
    return RoadNetwork(nodes, links)


def read_network(nodes_path, links_path):
    with open(nodes_path, newline="", encoding="utf-8") as f:
        node_rows = list(csv.DictReader(f))
    with open(links_path, newline="", encoding="utf-8") as f:
        link_rows = list(csv.DictReader(f))
    return load_network(node_rows, link_rows)


def write_network(net, nodes_path, links_path):
    with open(nodes_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["id", "x_km", "y_km"])
        for nid, (x, y) in net.nodes.items():
            w.writerow([nid, repr(float(x)), repr(float(y))])
    with open(links_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["from", "to", "length_km", "travel_time_s"])
        for l in net.links:
            w.writerow([l.source, l.target, repr(float(l.length_km)), repr(float(l.travel_time_s))])


def shortest_path(net, a, b):
    if a not in net.index:
        raise NetworkError(f"unknown node {a!r}")
    if b not in net.index:
        raise NetworkError(f"unknown node {b!r}")
    t, d = net.sssp(a)
    j = net.index[b]
    if not math.isfinite(t[j]):
        raise Unreachable(a, b)
    return PathCost(float(d[j]), float(t[j]))


@dataclass
class TravelMatrix:
    """Shortest-path times and distances restricted to a node subset."""

    ids: list
    time: np.ndarray
    dist: np.ndarray
    index: dict = field(init=False)

    def __post_init__(self):
        self.index = {nid: i for i, nid in enumerate(self.ids)}
        self._prepared = None

    def __len__(self):
        return len(self.ids)

    def cost(self, a, b):
        i, j = self.index[a], self.index[b]
        return PathCost(float(self.dist[i, j]), float(self.time[i, j]))

    def kernel_times(self):
        if self._prepared is None:
            self._prepared = kernels.prepare_times(self.time)
        return self._prepared


def travel_matrix(net, node_set):
    """All-pairs costs over ``node_set`` (order preserved, duplicates dropped)."""
    ids = list(dict.fromkeys(node_set))
    for nid in ids:
        if nid not in net.index:
            raise NetworkError(f"unknown node {nid!r}")
    cols = np.array([net.index[nid] for nid in ids], dtype=np.int64)
    k = len(ids)
    time = np.empty((k, k))
    dist = np.empty((k, k))
    for i, nid in enumerate(ids):
        t, d = net.sssp(nid)
        time[i] = t[cols]
        dist[i] = d[cols]
        bad = np.flatnonzero(~np.isfinite(time[i]))
        if bad.size:
            raise Unreachable(nid, ids[bad[0]])
    return TravelMatrix(ids, time, dist)


def generate_network(rows=32, cols=32, spacing_km=0.5, seed=0, jitter=0.25,
                     extra_edge_frac=0.15, detour=(1.0, 1.25), speed_kmh=(30.0, 60.0)):
    """Perturbed grid with random diagonal shortcuts.

    Every link is two-way with length ``euclid * U(detour)`` and an integer
    travel time from a speed drawn in ``speed_kmh``, so length never drops
    below the straight line.
    """
    rng = np.random.default_rng(seed)
    nodes = {}
    for r in range(rows):
        for c in range(cols):
            dx, dy = rng.uniform(-jitter, jitter, 2) * spacing_km
            nodes[f"n{r * cols + c}"] = (c * spacing_km + dx, r * spacing_km + dy)

    pairs = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                pairs.append((u, u + 1))
            if r + 1 < rows:
                pairs.append((u, u + cols))
    for r in range(rows - 1):
        for c in range(cols - 1):
            if rng.random() < extra_edge_frac:
                u = r * cols + c
                if rng.random() < 0.5:
                    pairs.append((u, u + cols + 1))
                else:
                    pairs.append((u + 1, u + cols))

    links = []
    for u, v in pairs:
        a, b = f"n{u}", f"n{v}"
        (xa, ya), (xb, yb) = nodes[a], nodes[b]
        length = math.hypot(xa - xb, ya - yb) * rng.uniform(*detour)
        for s, t in ((a, b), (b, a)):
            speed = rng.uniform(*speed_kmh)
            tt = max(1.0, float(round(length / speed * 3600.0)))
            links.append(Link(s, t, length, tt))
    return RoadNetwork(nodes, links)


def line_network(n=5, spacing_km=2.0, link_time_s=120.0):
    """Nodes ``n0..n{n-1}`` on the x axis joined both ways."""
    nodes = [(f"n{i}", i * spacing_km, 0.0) for i in range(n)]
    links = []
    for i in range(n - 1):
        links.append((f"n{i}", f"n{i + 1}", spacing_km, link_time_s))
        links.append((f"n{i + 1}", f"n{i}", spacing_km, link_time_s))
    return load_network(nodes, links)
