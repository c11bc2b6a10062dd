"""Independent brute-force references used by the tests.

Nothing here calls into the search code under test; the oracles only read
plain data (node ids, link lists, travel-time matrices, request fields).
"""
import itertools
import math
import random

from p2pmatch.network import generate_network, travel_matrix
from p2pmatch.demand import make_driver, make_request


# ---------------------------------------------------------------- paths

def all_simple_paths(links, a, b):
    """Every simple path from ``a`` to ``b`` as a list of links."""
    out_links = {}
    for l in links:
        out_links.setdefault(l.source, []).append(l)
    found = []

    def walk(node, seen, acc):
        if node == b:
            found.append(list(acc))
            return
        for l in out_links.get(node, ()):
            if l.target not in seen:
                seen.add(l.target)
                acc.append(l)
                walk(l.target, seen, acc)
                acc.pop()
                seen.discard(l.target)

    walk(a, {a}, [])
    return found


def path_oracle(links, a, b):
    """``(time_s, distance_km)`` of the fastest simple path, shorter distance on ties.

    ``None`` when ``b`` cannot be reached.
    """
    if a == b:
        return 0.0, 0.0
    best = None
    for p in all_simple_paths(links, a, b):
        t, d = 0.0, 0.0
        for l in p:
            t += l.travel_time_s
            d += l.length_km
        if best is None or (t, d) < best:
            best = (t, d)
    return best


# ------------------------------------------------------------ sequences

def _visit_order(requests):
    """All interleavings of pickups/drop-offs with each pickup before its drop-off."""
    stops = [(r.id, "o") for r in requests] + [(r.id, "d") for r in requests]
    for perm in itertools.permutations(stops):
        seen = set()
        ok = True
        for rid, kind in perm:
            if kind == "o":
                seen.add(rid)
            elif rid not in seen:
                ok = False
                break
        if ok:
            yield perm


def simulate_sequence(driver, requests, order, matrix):
    """Walk ``order`` from the driver origin; ``None`` if any bound breaks.

    Returns the arrival times (driver origin first, destination last). The
    vehicle may wait at a pickup for the passenger's earliest departure.
    """
    byid = {r.id: r for r in requests}
    t = driver.earliest_departure_s
    here = driver.origin
    arrivals = [t]
    load = 0
    for rid, kind in order:
        r = byid[rid]
        node = r.origin if kind == "o" else r.destination
        t = t + matrix.cost(here, node).time_s
        arrivals.append(t)
        here = node
        if kind == "o":
            if max(t, r.earliest_departure_s) - r.earliest_departure_s > r.max_wait_s:
                return None
            t = max(t, r.earliest_departure_s)
            load += r.seats
            if load > driver.capacity:
                return None
        else:
            if t - r.earliest_departure_s - r.sp_time_s > r.max_excess_s:
                return None
            load -= r.seats
    t = t + matrix.cost(here, driver.destination).time_s
    arrivals.append(t)
    if t - driver.earliest_departure_s - driver.sp_time_s > driver.max_excess_s:
        return None
    return arrivals


def label(rid, kind):
    return f"{kind}:{rid}"


def feasible_sequences(driver, requests, matrix):
    """``{label tuple: arrivals}`` for every feasible full sequence."""
    out = {}
    for order in _visit_order(requests):
        arr = simulate_sequence(driver, requests, order, matrix)
        if arr is not None:
            labels = (f"o_v:{driver.id}",) + tuple(label(rid, k) for rid, k in order) + (
                f"d_v:{driver.id}",)
            out[labels] = arr
    return out


def sequence_dist(driver, requests, labels, matrix):
    byid = {r.id: r for r in requests}
    nodes = []
    for lab in labels:
        kind, owner = lab.split(":", 1)
        if kind == "o_v":
            nodes.append(driver.origin)
        elif kind == "d_v":
            nodes.append(driver.destination)
        elif kind == "o":
            nodes.append(byid[owner].origin)
        else:
            nodes.append(byid[owner].destination)
    return math.fsum(matrix.cost(a, b).distance_km for a, b in zip(nodes, nodes[1:]))


def feasible_sequences_dfs(driver, requests, matrix):
    """Same result as :func:`feasible_sequences`, built stop by stop.

    A prefix is abandoned as soon as one of its stops breaks a bound; arrival
    times only grow along a sequence, so no completion of it could recover.
    """
    out = {}
    tt = lambda a, b: matrix.cost(a, b).time_s

    def go(here, t, load, waiting, onboard, labels, arrivals):
        if not waiting and not onboard:
            end = t + tt(here, driver.destination)
            if end - driver.earliest_departure_s - driver.sp_time_s <= driver.max_excess_s:
                out[labels + (f"d_v:{driver.id}",)] = arrivals + [end]
            return
        for r in waiting:
            arr = t + tt(here, r.origin)
            if max(arr, r.earliest_departure_s) - r.earliest_departure_s > r.max_wait_s:
                continue
            if load + r.seats > driver.capacity:
                continue
            go(r.origin, max(arr, r.earliest_departure_s), load + r.seats,
               [w for w in waiting if w is not r], onboard + [r], labels + (label(r.id, "o"),),
               arrivals + [arr])
        for r in onboard:
            arr = t + tt(here, r.destination)
            if arr - r.earliest_departure_s - r.sp_time_s > r.max_excess_s:
                continue
            go(r.destination, arr, load - r.seats, waiting, [w for w in onboard if w is not r],
               labels + (label(r.id, "d"),), arrivals + [arr])

    go(driver.origin, driver.earliest_departure_s, 0, list(requests), [],
       (f"o_v:{driver.id}",), [driver.earliest_departure_s])
    return out


def best_savings(driver, requests, matrix, enumerate_all=True):
    """Largest vehicle-km saving over all feasible sequences, ``None`` if none."""
    find = feasible_sequences if enumerate_all else feasible_sequences_dfs
    seqs = find(driver, requests, matrix)
    if not seqs:
        return None
    solo = math.fsum([r.sp_dist_km for r in requests] + [driver.sp_dist_km])
    return max(solo - sequence_dist(driver, requests, s, matrix) for s in seqs)


def feasible_subsets(driver, requests, matrix):
    """``{frozenset of ids: best saving}`` over every non-empty subset up to capacity."""
    out = {}
    for k in range(1, min(driver.capacity, len(requests)) + 1):
        for sub in itertools.combinations(requests, k):
            v = best_savings(driver, list(sub), matrix, enumerate_all=False)
            if v is not None:
                out[frozenset(r.id for r in sub)] = v
    return out


# ----------------------------------------------------------- set packing

def best_packing(columns):
    """Exhaustive maximum over conflict-free column subsets (sums via fsum).

    ``columns`` is a sequence of ``(driver, passengers, value)``.
    """
    n = len(columns)
    best = [0.0, ()]

    def go(j, drivers, pax, chosen):
        if j == n:
            v = math.fsum(columns[i][2] for i in chosen)
            if v > best[0]:
                best[0], best[1] = v, tuple(chosen)
            return
        go(j + 1, drivers, pax, chosen)
        d, ps, _ = columns[j]
        if d not in drivers and not (pax & ps):
            chosen.append(j)
            go(j + 1, drivers | {d}, pax | ps, chosen)
            chosen.pop()

    go(0, frozenset(), frozenset(), [])
    return best[0], best[1]


# ------------------------------------------------------ random instances

def small_instance(rng, m, capacity=None, rows=None, cols=None, loose=False):
    """Small generator network with one driver and ``m`` requests, integer data.

    All bounds are whole seconds, so feasibility comparisons are exact.
    """
    rows = rows or rng.randint(2, 3)
    cols = cols or rng.randint(2, 3)
    net = generate_network(rows, cols, spacing_km=1.0, seed=rng.randrange(10**6))
    matrix = travel_matrix(net, net.ids)
    ids = net.ids

    def od():
        o, d = rng.sample(ids, 2)
        return o, d

    o, d = od()
    cap = capacity or rng.randint(1, 3)
    slack, extra = (3.0, 400) if loose else (1.0, 60)
    sp = matrix.cost(o, d).time_s
    driver = make_driver("v", o, d, 0, cap, matrix,
                         max_excess_s=float(rng.randint(0, int(slack * sp) + extra)))
    requests = []
    for k in range(m):
        ro, rd = od()
        rsp = matrix.cost(ro, rd).time_s
        # leave around the time the driver could first reach the pickup
        reach = matrix.cost(o, ro).time_s
        ted = max(0, int(reach) + rng.randint(-120, 120))
        requests.append(make_request(
            f"r{k}", ro, rd, float(ted), matrix,
            max_excess_s=float(rng.randint(0, int(slack * rsp) + extra)),
            max_wait_s=float(rng.randint(0, int(slack * sp) + extra))))
    return net, matrix, driver, requests


def make_rng(seed):
    return random.Random(seed)
