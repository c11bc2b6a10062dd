"""Exact and greedy driver/combination assignment (weighted set packing).

Each candidate uses one driver and a set of passengers; a solution picks
candidates that share neither, maximising total savings. Solo driving is
the implicit zero-value option, so non-positive candidates never enter a
solution.
"""
import csv
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Column:
    driver: str
    passengers: frozenset
    value: float


@dataclass
class AssignmentProblem:
    columns: list

    @classmethod
    def from_candidates(cls, candidates):
        return cls([Column(c.driver_id, frozenset(c.request_ids), c.savings_km) for c in candidates])

    def __len__(self):
        return len(self.columns)

    def passenger_incidence(self):
        """``{passenger: [column indices]}``, the 0/1 passenger rows in sparse form."""
        out = {}
        for j, c in enumerate(self.columns):
            for p in c.passengers:
                out.setdefault(p, []).append(j)
        return out

    def driver_incidence(self):
        out = {}
        for j, c in enumerate(self.columns):
            out.setdefault(c.driver, []).append(j)
        return out


@dataclass(frozen=True)
class Assignment:
    chosen: tuple
    total_savings_km: float
    matched_passengers: frozenset
    matched_drivers: frozenset


def _assignment(problem, chosen):
    chosen = tuple(sorted(chosen))
    cols = [problem.columns[j] for j in chosen]
    return Assignment(chosen, math.fsum(c.value for c in cols),
                      frozenset().union(*(c.passengers for c in cols)),
                      frozenset(c.driver for c in cols))


def is_feasible(problem, chosen):
    drivers, passengers = set(), set()
    for j in chosen:
        c = problem.columns[j]
        if c.driver in drivers or passengers & c.passengers:
            return False
        drivers.add(c.driver)
        passengers |= c.passengers
    return True


def solve_greedy(problem):
    """Take columns by decreasing value whenever they do not conflict."""
    order = sorted((j for j, c in enumerate(problem.columns) if c.value > 0),
                   key=lambda j: (-problem.columns[j].value, j))
    drivers, passengers, chosen = set(), set(), []
    for j in order:
        c = problem.columns[j]
        if c.driver in drivers or passengers & c.passengers:
            continue
        chosen.append(j)
        drivers.add(c.driver)
        passengers |= c.passengers
    return _assignment(problem, chosen)


def components(problem, columns=None):
    """Groups of column indices linked through shared drivers or passengers."""
    if columns is None:
        columns = range(len(problem.columns))
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j in columns:
        c = problem.columns[j]
        root = find(("d", c.driver))
        for p in c.passengers:
            parent[find(("p", p))] = root
    groups = {}
    for j in columns:
        groups.setdefault(find(("d", problem.columns[j].driver)), []).append(j)
    return list(groups.values())


class _NodeLimit(Exception):
    pass


class _BranchAndBound:
    """Depth-first search that fixes one driver at a time.

    Each driver takes one of its columns compatible with the passengers
    already used, or nothing. The bound relaxes the "each passenger once"
    rows with non-negative multipliers ``lam``: for the residual problem,

        sum(lam[p] for free p) + sum over free drivers of
            max(0, best compatible value - sum(lam[p] for p in column))

    is an upper bound for any ``lam >= 0``. Two multiplier sets are used, the
    subgradient-tuned one and all zeros, and the smaller bound wins.
    """

    def __init__(self, problem, cols):
        self.cols = problem.columns
        cols = sorted(cols)
        scale = max((abs(self.cols[j].value) for j in cols), default=1.0)
        self.eps = 1e-9 * max(1.0, scale)
        by_driver = {}
        for j in cols:
            by_driver.setdefault(self.cols[j].driver, []).append(j)
        for js in by_driver.values():
            js.sort(key=lambda j: (-self.cols[j].value, j))
        # strongest drivers first: good incumbents early, tight bounds later
        self.drivers = sorted(by_driver, key=lambda d: (-self.cols[by_driver[d][0]].value,
                                                          by_driver[d][0]))
        self.by_driver = [by_driver[d] for d in self.drivers]
        self.passengers = sorted({p for j in cols for p in self.cols[j].passengers})
        self.best_value = 0.0
        self.best_key = ()
        self.nodes = 0
        self.node_limit = math.inf
        self.lam = self._multipliers()
        self.reduced = {j: self.cols[j].value - sum(self.lam[p] for p in self.cols[j].passengers)
                        for j in cols}
        # drivers whose best relaxed choice is most valuable are fixed first
        order = sorted(range(len(self.drivers)),
                       key=lambda i: (-max(self.reduced[j] for j in self.by_driver[i]),
                                      self.by_driver[i][0]))
        self.drivers = [self.drivers[i] for i in order]
        self.by_driver = [self.by_driver[i] for i in order]
        self.by_reduced = [sorted(js, key=lambda j: (-self.reduced[j], -self.cols[j].value, j))
                           for js in self.by_driver]

    def _dual(self, lam):
        total = sum(lam.values())
        hit = {}
        for js in self.by_driver:
            best, arg = 0.0, None
            for j in js:
                r = self.cols[j].value - sum(lam[p] for p in self.cols[j].passengers)
                if r > best:
                    best, arg = r, j
            total += best
            if arg is not None:
                for p in self.cols[arg].passengers:
                    hit[p] = hit.get(p, 0) + 1
        return total, hit

    def _multipliers(self, iters=150):
        lam = {p: 0.0 for p in self.passengers}
        if not lam:
            return lam
        target = solve_greedy_subset(self.cols, [j for js in self.by_driver for j in js])
        best_lam, best_ub = dict(lam), self._dual(lam)[0]
        theta = 1.0
        stall = 0
        for _ in range(iters):
            ub, hit = self._dual(lam)
            if ub < best_ub - self.eps:
                best_ub, best_lam, stall = ub, dict(lam), 0
            else:
                stall += 1
                if stall >= 10:
                    theta *= 0.5
                    stall = 0
            g = {p: 1 - hit.get(p, 0) for p in lam}
            norm = sum(v * v for v in g.values())
            if norm == 0 or best_ub - target <= self.eps or theta < 1e-4:
                break
            step = theta * max(ub - target, self.eps) / norm
            for p, gp in g.items():
                lam[p] = max(0.0, lam[p] - step * gp)
        return best_lam

    def seed(self, chosen):
        value = math.fsum(self.cols[j].value for j in chosen)
        if value > self.best_value + self.eps:
            self.best_value, self.best_key = value, tuple(sorted(chosen))

    def bound(self, k, used_p):
        cols = self.cols
        free_lam = sum(v for p, v in self.lam.items() if p not in used_p)
        lag, plain = free_lam, 0.0
        for i in range(k, len(self.by_driver)):
            for j in self.by_reduced[i]:
                r = self.reduced[j]
                if r <= 0:
                    break
                if used_p.isdisjoint(cols[j].passengers):
                    lag += r
                    break
            for j in self.by_driver[i]:
                if used_p.isdisjoint(cols[j].passengers):
                    plain += cols[j].value
                    break
        return min(lag, plain)

    def run(self, k=0, value=0.0, used_p=frozenset(), chosen=()):
        self.nodes += 1
        if self.nodes > self.node_limit:
            raise _NodeLimit
        if k == len(self.by_driver):
            key = tuple(sorted(chosen))
            if value > self.best_value + self.eps or (
                    abs(value - self.best_value) <= self.eps and key < self.best_key):
                self.best_value, self.best_key = value, key
            return
        if value + self.bound(k, used_p) < self.best_value - self.eps:
            return
        # reduced-cost order; "drive solo" sits where a reduced cost of 0 would
        skipped = False
        for j in self.by_reduced[k]:
            if not skipped and self.reduced[j] <= 0:
                skipped = True
                self.run(k + 1, value, used_p, chosen)
            c = self.cols[j]
            if used_p.isdisjoint(c.passengers):
                self.run(k + 1, value + c.value, used_p | c.passengers, chosen + (j,))
        if not skipped:
            self.run(k + 1, value, used_p, chosen)

    def lagrangian_greedy(self):
        """Feasible packing taken in decreasing reduced-cost order."""
        order = sorted(self.reduced, key=lambda j: (-self.reduced[j], -self.cols[j].value, j))
        drivers, passengers, chosen = set(), set(), []
        for j in order:
            c = self.cols[j]
            if c.value <= 0 or c.driver in drivers or not passengers.isdisjoint(c.passengers):
                continue
            drivers.add(c.driver)
            passengers |= c.passengers
            chosen.append(j)
        return chosen


def solve_greedy_subset(columns, js):
    drivers, passengers, total = set(), set(), 0.0
    for j in sorted(js, key=lambda j: (-columns[j].value, j)):
        c = columns[j]
        if c.value <= 0 or c.driver in drivers or passengers & c.passengers:
            continue
        drivers.add(c.driver)
        passengers |= c.passengers
        total += c.value
    return total


def _solve_milp(problem, comp):
    """Exact solve of one component with HiGHS (zero optimality gap)."""
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    cols = [problem.columns[j] for j in comp]
    rows = {}
    ri, ci = [], []
    for k, c in enumerate(cols):
        for key in [("d", c.driver)] + [("p", p) for p in sorted(c.passengers)]:
            ri.append(rows.setdefault(key, len(rows)))
            ci.append(k)
    a = coo_matrix((np.ones(len(ri)), (ri, ci)), shape=(len(rows), len(cols))).tocsr()
    res = milp(-np.array([c.value for c in cols]), constraints=LinearConstraint(a, 0, 1),
               integrality=np.ones(len(cols)), bounds=Bounds(0, 1),
               options={"mip_rel_gap": 0.0})
    if res.x is None:
        raise RuntimeError(f"MILP fallback failed: {res.message}")
    return [j for j, x in zip(comp, res.x) if x > 0.5]


def solve_exact(problem, node_budget=2_000_000, max_search_columns=5000):
    """Optimal packing by branch-and-bound, one independent component at a time.

    Equal-value optima resolve to the smallest sorted index tuple within each
    component. A component whose search exceeds ``node_budget / columns``
    nodes is handed to the HiGHS MILP solver instead, and so is any component
    larger than ``max_search_columns`` (multiplier tuning alone would cost
    seconds there).
    """
    positive = [j for j, c in enumerate(problem.columns) if c.value > 0]
    greedy = set(solve_greedy(problem).chosen)
    chosen = []
    limit = sys.getrecursionlimit()
    try:
        for comp in components(problem, positive):
            if len(comp) == 1:
                chosen.extend(comp)
                continue
            if len(comp) > max_search_columns:
                log.info("component of %d columns; using MILP directly", len(comp))
                chosen.extend(_solve_milp(problem, comp))
                continue
            sys.setrecursionlimit(max(limit, 4 * len(comp) + 1000))
            bb = _BranchAndBound(problem, comp)
            bb.node_limit = max(2000, node_budget // len(comp))
            bb.seed([j for j in comp if j in greedy])
            bb.seed(bb.lagrangian_greedy())
            try:
                bb.run()
            except _NodeLimit:
                log.info("component of %d columns exceeded %d nodes; using MILP", len(comp),
                         bb.node_limit)
                chosen.extend(_solve_milp(problem, comp))
            else:
                chosen.extend(bb.best_key)
    finally:
        sys.setrecursionlimit(limit)
    return _assignment(problem, chosen)


def write_matches(candidates, assignment, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["driver_id", "request_ids", "stop_sequence", "route_dist_km", "savings_km"])
        for j in assignment.chosen:
            c = candidates[j]
            w.writerow([c.driver_id, ";".join(sorted(c.request_ids)),
                        " ".join(s.label for s in c.best_stops), repr(c.route_dist_km),
                        repr(c.savings_km)])
