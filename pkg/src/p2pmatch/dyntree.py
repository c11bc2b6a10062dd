"""Dynamic schedule trees.

Every root-to-leaf path of a :class:`ScheduleTree` is one feasible service
sequence for the driver and the requests it serves. Inserting a request
walks the existing tree once: the pickup is tried on every edge, the old
subtree is re-expanded beneath it with fresh arrival times, the drop-off is
tried on every edge below the pickup, and every branch whose time bound
breaks is cut on the spot. Because removing a request's stops from a
feasible sequence keeps it feasible (travel times obey the triangle
inequality and all time bounds are upper bounds), the expansion of a tree
holding every feasible sequence for ``S`` yields every feasible sequence
for ``S + {r}``.

Trees are immutable; insertion returns a new tree and shares untouched
subtrees with the old one.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._core import kernels
from .demand import StopKind, candidate_value
from .errors import Unreachable

ORIGIN, DEST = 0, 1
_NEG_INF = -math.inf


class FeasibilityOutcome(enum.Enum):
    FEASIBLE = "feasible"
    TIME_VIOLATED = "time_violated"
    CAPACITY_VIOLATED_PICKUP = "capacity_violated_pickup"
    CAPACITY_VIOLATED_INTERVAL = "capacity_violated_interval"
    PRECEDENCE_VIOLATED = "precedence_violated"


@dataclass(frozen=True)
class NodeContext:
    """State of the vehicle when it reaches ``stop``.

    ``occupancy`` is the load before the stop is served, ``onboard`` the ids
    of passengers in the vehicle, and ``carrying`` the id of a request
    currently being inserted whose pickup precedes this stop (capacity then
    has to hold across the whole pickup/drop-off interval).
    """

    stop: object
    arrival_s: float
    occupancy: int = 0
    onboard: frozenset = frozenset()
    carrying: str = None


def check_stop(driver, requests, ctx):
    """Verdict for serving ``ctx.stop``; ``requests`` maps id -> TripRequest."""
    kind = ctx.stop.kind
    if kind is StopKind.DRIVER_ORIGIN:
        return FeasibilityOutcome.FEASIBLE
    if kind is StopKind.PICKUP:
        r = requests[ctx.stop.owner]
        # early arrivals wait for the passenger, so the lower bound always holds
        served_at = max(ctx.arrival_s, r.earliest_departure_s)
        if served_at - r.earliest_departure_s > r.max_wait_s:
            return FeasibilityOutcome.TIME_VIOLATED
        if ctx.occupancy + r.seats > driver.capacity:
            if ctx.carrying is not None and ctx.carrying != r.id:
                return FeasibilityOutcome.CAPACITY_VIOLATED_INTERVAL
            return FeasibilityOutcome.CAPACITY_VIOLATED_PICKUP
        return FeasibilityOutcome.FEASIBLE
    if kind is StopKind.DROPOFF:
        if ctx.stop.owner not in ctx.onboard:
            return FeasibilityOutcome.PRECEDENCE_VIOLATED
        r = requests[ctx.stop.owner]
        if ctx.arrival_s - r.earliest_departure_s - r.sp_time_s > r.max_excess_s:
            return FeasibilityOutcome.TIME_VIOLATED
        return FeasibilityOutcome.FEASIBLE
    if ctx.onboard:
        return FeasibilityOutcome.PRECEDENCE_VIOLATED
    if ctx.arrival_s - driver.earliest_departure_s - driver.sp_time_s > driver.max_excess_s:
        return FeasibilityOutcome.TIME_VIOLATED
    return FeasibilityOutcome.FEASIBLE


class RequestTable:
    """Stop attributes of a batch of requests, laid out pickup/drop-off interleaved.

    Building it once per batch lets every driver context gather its stops
    with a single indexing operation instead of registering requests one by one.
    """

    def __init__(self, requests, matrix):
        self.requests = list(requests)
        idx = matrix.index
        n = len(self.requests)
        try:
            self.loc = np.array([[idx[r.origin], idx[r.destination]] for r in self.requests],
                                dtype=np.int64).reshape(2 * n)
        except KeyError as e:
            raise Unreachable(e.args[0], e.args[0]) from e
        self.ready = np.full(2 * n, _NEG_INF)
        self.ready[0::2] = [r.earliest_departure_s for r in self.requests]
        self.deadline = np.array([[r.latest_pickup_s, r.latest_dropoff_s] for r in self.requests],
                                 dtype=np.float64).reshape(2 * n)
        seats = np.array([r.seats for r in self.requests], dtype=np.int64)
        self.delta = np.stack([seats, -seats], axis=1).reshape(2 * n)

    def __len__(self):
        return len(self.requests)


class DriverContext:
    """Stop table shared by all trees of one driver.

    Requests are registered append-only, so stop ids held by existing trees
    never change meaning. ``positions`` picks the initial requests out of a
    :class:`RequestTable` (all of them by default).
    """

    def __init__(self, driver, matrix, requests=(), table=None, positions=None):
        self.driver = driver
        self.matrix = matrix
        idx = matrix.index
        try:
            o, d = idx[driver.origin], idx[driver.destination]
        except KeyError as e:
            raise Unreachable(driver.origin, driver.destination) from e
        if table is None:
            table = RequestTable(requests, matrix)
        if positions is None:
            positions = np.arange(len(table))
        positions = np.asarray(positions, dtype=np.int64)
        self.requests = [table.requests[i] for i in positions]
        self.rindex = {r.id: k for k, r in enumerate(self.requests)}
        if len(self.rindex) != len(self.requests):
            raise ValueError("duplicate request id in driver context")
        sel = np.stack([2 * positions, 2 * positions + 1], axis=1).reshape(-1)
        self.loc = np.concatenate([[o, d], table.loc[sel]]).astype(np.int64)
        self.ready = np.concatenate([[_NEG_INF, _NEG_INF], table.ready[sel]])
        self.deadline = np.concatenate([[math.inf, driver.latest_arrival_s], table.deadline[sel]])
        self.delta = np.concatenate([[0, 0], table.delta[sel]]).astype(np.int64)
        self._inserter = None

    def register(self, request):
        """Stop id of the pickup of ``request`` (drop-off is that id + 1)."""
        k = self.rindex.get(request.id)
        if k is None:
            extra = RequestTable([request], self.matrix)
            k = len(self.requests)
            self.requests.append(request)
            self.rindex[request.id] = k
            self.loc = np.concatenate([self.loc, extra.loc])
            self.ready = np.concatenate([self.ready, extra.ready])
            self.deadline = np.concatenate([self.deadline, extra.deadline])
            self.delta = np.concatenate([self.delta, extra.delta])
            self._inserter = None
        return 2 + 2 * k

    def inserter(self):
        if self._inserter is None:
            self._inserter = kernels.Inserter(
                self.matrix.kernel_times(), self.loc, self.ready, self.deadline, self.delta,
                self.driver.capacity)
        return self._inserter

    def stop(self, s):
        if s == ORIGIN:
            return self.driver.start
        if s == DEST:
            return self.driver.end
        r = self.requests[(s - 2) // 2]
        return r.pickup if s % 2 == 0 else r.dropoff

    def owner(self, s):
        return None if s < 2 else self.requests[(s - 2) // 2].id


@dataclass(frozen=True)
class TreeNode:
    """Read-only view of one tree node."""

    stop: object
    arrival_s: float
    depart_s: float
    occupancy_after: int
    children: tuple


@dataclass(frozen=True)
class ScheduleTree:
    ctx: DriverContext = field(repr=False)
    root: tuple = field(repr=False)
    served: frozenset = frozenset()

    @property
    def driver(self):
        return self.ctx.driver

    @property
    def driver_id(self):
        return self.ctx.driver.id

    def view(self, node=None):
        """Nested :class:`TreeNode` rendering (built eagerly; meant for small trees)."""
        s, arr, dep, occ, kids = self.root if node is None else node
        return TreeNode(self.ctx.stop(s), arr, dep, occ, tuple(self.view(c) for c in kids))

    def size(self):
        seen = set()
        stack = [self.root]
        while stack:
            n = stack.pop()
            if id(n) in seen:
                continue
            seen.add(id(n))
            stack.extend(n[4])
        return len(seen)


@dataclass(frozen=True)
class BestSequence:
    stops: tuple
    arrivals: tuple
    route_dist_km: float
    savings_km: float


def init_tree(driver, matrix, requests=(), table=None, positions=None):
    """Solo schedule: driver origin at its departure time, then its destination.

    ``requests`` (or ``table``/``positions``, see :class:`DriverContext`)
    pre-registers stops so that later insertions share one context.
    """
    ctx = DriverContext(driver, matrix, requests, table, positions)
    t = matrix.time[ctx.loc[ORIGIN], ctx.loc[DEST]]
    if not math.isfinite(t):
        raise Unreachable(driver.origin, driver.destination)
    t0 = driver.earliest_departure_s
    leaf = (DEST, t0 + float(t), t0 + float(t), 0, ())
    return ScheduleTree(ctx, (ORIGIN, t0, t0, 0, (leaf,)), frozenset())


def _record(stats, ins, before):
    if stats is not None:
        stats["checks"] = stats.get("checks", 0) + ins.checks - before
        stats["insertions"] = stats.get("insertions", 0) + 1


def insert_request(tree, request, stats=None):
    """Tree of all feasible sequences serving ``tree.served`` plus ``request``.

    Returns ``None`` when no sequence survives; ``tree`` itself is untouched.
    ``stats`` (a dict) accumulates the number of node feasibility checks.
    """
    if request.id in tree.served:
        raise ValueError(f"request {request.id} already served by this tree")
    p = tree.ctx.register(request)
    ins = tree.ctx.inserter()
    before = ins.checks
    root = ins.insert(tree.root, p)
    _record(stats, ins, before)
    if root is None:
        return None
    return ScheduleTree(tree.ctx, root, tree.served | {request.id})


def insert_each(tree, requests, stats=None):
    """``[insert_request(tree, r) for r in requests]`` with the per-call overhead hoisted.

    This is the hot loop of singleton generation, where most insertions fail.
    """
    ctx = tree.ctx
    stops = [ctx.register(r) for r in requests]
    for r in requests:
        if r.id in tree.served:
            raise ValueError(f"request {r.id} already served by this tree")
    ins = ctx.inserter()
    before = ins.checks
    insert, root, served = ins.insert, tree.root, tree.served
    out = []
    for r, p in zip(requests, stops):
        new = insert(root, p)
        out.append(None if new is None else ScheduleTree(ctx, new, served | {r.id}))
    if stats is not None:
        stats["checks"] = stats.get("checks", 0) + ins.checks - before
        stats["insertions"] = stats.get("insertions", 0) + len(requests)
    return out


def _chain(path):
    node = None
    for s, arr, dep, occ, _ in reversed(path):
        node = (s, arr, dep, occ, () if node is None else (node,))
    return node


def insert_request_greedy(tree, request, stats=None):
    """Insert into the best branch only and keep only the best resulting branch."""
    if request.id in tree.served:
        raise ValueError(f"request {request.id} already served by this tree")
    path, _ = _best_path(tree)
    chain = ScheduleTree(tree.ctx, _chain(path), tree.served)
    grown = insert_request(chain, request, stats)
    if grown is None:
        return None
    best, _ = _best_path(grown)
    return ScheduleTree(tree.ctx, _chain(best), grown.served)


def _paths(root):
    """Root-to-leaf node lists in depth-first, child-order sequence."""
    out = []
    stack = [(root, 0)]
    path = []
    while stack:
        node, depth = stack.pop()
        del path[depth:]
        path.append(node)
        kids = node[4]
        if not kids:
            out.append(list(path))
        else:
            stack.extend((c, depth + 1) for c in reversed(kids))
    return out


def _route_dist(ctx, path):
    locs = np.fromiter((ctx.loc[n[0]] for n in path), dtype=np.int64, count=len(path))
    return math.fsum(ctx.matrix.dist[locs[:-1], locs[1:]])


def _best_path(tree):
    ctx = tree.ctx
    best = None
    for path in _paths(tree.root):
        key = (_route_dist(ctx, path), path[-1][1], tuple(ctx.stop(n[0]).label for n in path))
        if best is None or key < best[0]:
            best = (key, path)
    return best[1], best[0][0]


def best_sequence(tree):
    """Shortest-route branch; ties go to the earlier arrival, then stop labels."""
    path, dist = _best_path(tree)
    ctx = tree.ctx
    combo = [ctx.requests[ctx.rindex[rid]] for rid in sorted(tree.served)]
    return BestSequence(tuple(ctx.stop(n[0]) for n in path), tuple(n[1] for n in path), dist,
                        candidate_value(ctx.driver, combo, dist))


def enumerate_sequences(tree):
    ctx = tree.ctx
    return [tuple(ctx.stop(n[0]) for n in path) for path in _paths(tree.root)]


def dump_tree(tree):
    """Indented text: one stop per line with kind, owner, node, arrival and load."""
    ctx = tree.ctx
    lines = []

    def walk(node, depth):
        stop = ctx.stop(node[0])
        lines.append(f"{'  ' * depth}{stop.kind.value} {stop.owner} {stop.node} "
                     f"t={node[1]:g} q={node[3]}")
        for c in node[4]:
            walk(c, depth + 1)

    walk(tree.root, 0)
    return "\n".join(lines) + "\n"
