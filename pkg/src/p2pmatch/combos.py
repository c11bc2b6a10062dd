"""Driver / passenger-combination candidates, grown level by level."""
import csv
import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .dyntree import (RequestTable, best_sequence, init_tree, insert_each, insert_request,
                      insert_request_greedy)

log = logging.getLogger(__name__)

EXACT, GREEDY = "exact", "greedy"


@dataclass(frozen=True)
class Candidate:
    driver_id: str
    request_ids: frozenset
    best_stops: tuple
    arrivals: tuple
    route_dist_km: float
    savings_km: float
    tree: object = field(repr=False, compare=False)
    key: tuple = field(repr=False, compare=False, default=())  # positions in the driver's request list


def _insert(mode):
    if mode == EXACT:
        return insert_request
    if mode == GREEDY:
        return insert_request_greedy
    raise ValueError(f"unknown combination mode {mode!r}")


def _candidate(tree, key):
    best = best_sequence(tree)
    return Candidate(tree.driver_id, tree.served, best.stops, best.arrivals, best.route_dist_km,
                     best.savings_km, tree, key)


def feasible_singletons(driver, candidate_requests, matrix, stats=None, table=None,
                        positions=None):
    """One candidate per request the driver can serve alone.

    ``table``/``positions`` optionally give ``candidate_requests`` as rows of
    a prebuilt :class:`~p2pmatch.dyntree.RequestTable`.
    """
    base = init_tree(driver, matrix, candidate_requests, table, positions)
    return [_candidate(tree, (pos,))
            for pos, tree in enumerate(insert_each(base, candidate_requests, stats))
            if tree is not None]


def grow_level(driver, level, candidate_requests, mode=EXACT, stats=None, budget=None):
    """Size-k candidates from the feasible size-(k-1) ones.

    Two parents sharing their first k-2 requests are joined; the union is
    kept only when every (k-1)-subset is feasible, and then checked by
    inserting the extra request into the smaller parent's tree.
    """
    insert = _insert(mode)
    by_key = {c.key: c for c in level}
    keys = sorted(by_key)
    out = []
    i = 0
    while i < len(keys):
        j = i
        prefix = keys[i][:-1]
        while j < len(keys) and keys[j][:-1] == prefix:
            j += 1
        block = keys[i:j]
        for a, b in combinations(block, 2):
            union = a + b[-1:]
            if any(sub not in by_key for sub in combinations(union, len(union) - 1)):
                continue
            tree = insert(by_key[a].tree, candidate_requests[b[-1]], stats)
            if tree is not None:
                out.append(_candidate(tree, union))
                if budget is not None and len(out) >= budget:
                    return out
        i = j
    return out


def driver_candidates(driver, candidate_requests, matrix, mode=EXACT, max_combos=None, stats=None,
                      table=None, positions=None):
    """All levels ``1..capacity`` for one driver, in level order."""
    level = feasible_singletons(driver, candidate_requests, matrix, stats, table, positions)
    if max_combos is not None:
        level = level[:max_combos]
    out = list(level)
    k = 1
    while level and k < driver.capacity:
        budget = None if max_combos is None else max_combos - len(out)
        if budget is not None and budget <= 0:
            log.warning("driver %s hit the combination budget (%d)", driver.id, max_combos)
            break
        level = grow_level(driver, level, candidate_requests, mode, stats, budget)
        out.extend(level)
        k += 1
    return out


def build_candidates(drivers, requests, matrix, mask=None, mode=EXACT, max_combos=None, stats=None):
    """Candidates over all drivers.

    ``mask[i][j]`` selects which requests are considered for driver ``i``
    (all of them when ``mask`` is ``None``). Request order inside each
    driver follows ``requests``.
    """
    requests = list(requests)
    table = RequestTable(requests, matrix)
    everyone = np.arange(len(requests))
    out = []
    for i, d in enumerate(drivers):
        pos = everyone if mask is None else np.flatnonzero(mask[i])
        if len(pos):
            cands = [requests[j] for j in pos]
            out.extend(driver_candidates(d, cands, matrix, mode, max_combos, stats, table, pos))
    return out


def write_candidates(candidates, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["driver_id", "request_ids", "route_dist_km", "savings_km", "stop_sequence"])
        for c in candidates:
            w.writerow([c.driver_id, ";".join(sorted(c.request_ids)), repr(c.route_dist_km),
                        repr(c.savings_km), " ".join(s.label for s in c.best_stops)])
