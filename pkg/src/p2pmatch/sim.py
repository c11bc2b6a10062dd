"""Instance generation, batch pipeline, replications and sensitivity sweeps."""
import csv
import itertools
import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import assign as assign_mod
from .combos import build_candidates
from .demand import make_driver, make_request
from .errors import InvalidConfig
from .network import travel_matrix
from .pruning import candidate_mask

log = logging.getLogger(__name__)


@dataclass
class Instance:
    drivers: list
    passengers: list
    matrix: object


@dataclass
class BatchResult:
    assignment: object
    candidates: list
    routes: dict  # driver id -> chosen Candidate, or None for solo driving
    runtimes: dict
    counts: dict

    @property
    def total_runtime_s(self):
        return sum(self.runtimes.values())

    @property
    def chosen(self):
        return [self.candidates[j] for j in self.assignment.chosen]


@dataclass
class NetworkMetrics:
    base: dict
    shared: dict
    deltas_pct: dict  # reductions relative to the base case

    @property
    def vehicle_trips(self):
        return self.shared["vehicle_trips"]

    @property
    def vkt_km(self):
        return self.shared["vkt_km"]

    @property
    def vht_h(self):
        return self.shared["vht_h"]

    def to_dict(self):
        return {"vehicle_trips": self.shared["vehicle_trips"], "vkt_km": self.shared["vkt_km"],
                "vht_h": self.shared["vht_h"], "deltas_pct": dict(self.deltas_pct),
                "base": dict(self.base)}


def _zones(net, n_zones):
    side = max(1, int(round(math.sqrt(n_zones))))
    if side * side != n_zones:
        raise InvalidConfig("n_zones must be a perfect square")
    xy = np.array([net.nodes[i] for i in net.ids])
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    cell = np.minimum((side * (xy - lo) / span).astype(int), side - 1)
    zone = cell[:, 1] * side + cell[:, 0]
    return [np.flatnonzero(zone == z) for z in range(n_zones)]


def _zone_probs(weights, members):
    w = np.array([wz if len(m) else 0.0 for wz, m in zip(weights, members)], dtype=float)
    if w.sum() <= 0:
        raise InvalidConfig("zone weights put no mass on populated zones")
    return w / w.sum()


def gen_instance(net, config, seed=None):
    """Random drivers and passengers over ``net``.

    Origins and destinations are drawn zone first (weights from the config,
    per-instance Dirichlet draws when ``od_concentration`` is set, uniform
    otherwise), then uniformly among the zone's nodes. Departures are
    uniform over the horizon.
    """
    config.validate()
    rng = np.random.default_rng(config.seed if seed is None else seed)
    members = _zones(net, config.n_zones)
    if config.zone_weights is not None:
        wo = wd = list(config.zone_weights)
    elif config.od_concentration is not None:
        wo = rng.dirichlet([config.od_concentration] * config.n_zones)
        wd = rng.dirichlet([config.od_concentration] * config.n_zones)
    else:
        wo = wd = [1.0] * config.n_zones
    po, pd = _zone_probs(wo, members), _zone_probs(wd, members)
    if len(net.ids) < 2:
        raise InvalidConfig("network needs at least two nodes")

    def draw(p):
        z = rng.choice(len(p), p=p)
        return net.ids[members[z][rng.integers(len(members[z]))]]

    n = config.n_drivers + config.n_passengers
    ods = []
    for _ in range(n):
        for _attempt in range(1000):
            o, d = draw(po), draw(pd)
            if o != d:
                break
        else:
            raise InvalidConfig("zone weights leave no distinct origin/destination pair")
        ods.append((o, d))
    deps = rng.uniform(0.0, config.horizon, n).round(1)
    nodes = [x for od in ods for x in od]
    matrix = travel_matrix(net, sorted(set(nodes), key=net.index.__getitem__))
    drivers = [make_driver(f"v{i}", o, d, deps[i], config.capacity, matrix, config.excess_ratio)
               for i, (o, d) in enumerate(ods[:config.n_drivers])]
    passengers = [make_request(f"r{i}", o, d, deps[config.n_drivers + i], matrix,
                               config.excess_ratio, config.wait_ratio)
                  for i, (o, d) in enumerate(ods[config.n_drivers:])]
    return Instance(drivers, passengers, matrix)


def run_batch(net, instance, config):
    """Pruning, combination generation and assignment for one batch."""
    drivers, passengers = instance.drivers, instance.passengers
    runtimes = {}
    counts = {}

    t0 = time.perf_counter()
    if config.prune:
        mask = candidate_mask(drivers, passengers, net, config.v_max_kmh)
        counts["pairs"] = int(mask.sum())
    else:
        mask = None
        counts["pairs"] = len(drivers) * len(passengers)
    runtimes["pruning"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    stats = {}
    candidates = build_candidates(drivers, passengers, instance.matrix, mask, config.combo_mode,
                                  config.max_combos_per_driver, stats)
    runtimes["combos"] = time.perf_counter() - t0
    counts["combinations"] = len(candidates)
    counts["checks"] = stats.get("checks", 0)

    t0 = time.perf_counter()
    problem = assign_mod.AssignmentProblem.from_candidates(candidates)
    solve = assign_mod.solve_exact if config.assign_mode == "exact" else assign_mod.solve_greedy
    assignment = solve(problem)
    runtimes["assign"] = time.perf_counter() - t0

    routes = {d.id: None for d in drivers}
    for j in assignment.chosen:
        routes[candidates[j].driver_id] = candidates[j]
    return BatchResult(assignment, candidates, routes, runtimes, counts)


def windows(instance, config):
    """Split an instance into consecutive batch windows.

    Drivers belong to the window of their departure. Passengers join the
    window they appear in and stay eligible in later windows while their
    latest pickup has not passed the window start.
    """
    w = config.batch_window_s
    n = max(1, int(math.ceil(config.horizon / w)))
    out = []
    for k in range(n):
        lo, hi = k * w, (k + 1) * w
        last = k == n - 1
        ds = [d for d in instance.drivers
              if lo <= d.earliest_departure_s < hi or (last and d.earliest_departure_s >= hi)]
        ps = [r for r in instance.passengers
              if r.earliest_departure_s < hi or last]
        ps = [r for r in ps if r.latest_pickup_s >= lo]
        out.append((ds, ps))
    return out


def simulate(net, instance, config):
    """Rolling-horizon run; returns the batch results in window order."""
    matched = set()
    results = []
    for ds, ps in windows(instance, config):
        ps = [r for r in ps if r.id not in matched]
        res = run_batch(net, Instance(ds, ps, instance.matrix), config)
        matched |= res.assignment.matched_passengers
        results.append(res)
    return results


def compute_metrics(instance, chosen):
    """Network impact of the chosen candidates against everyone driving solo."""
    drivers, passengers = instance.drivers, instance.passengers
    base = {
        "vehicle_trips": len(drivers) + len(passengers),
        "vkt_km": math.fsum([d.sp_dist_km for d in drivers] + [r.sp_dist_km for r in passengers]),
        "vht_h": math.fsum([d.sp_time_s for d in drivers] + [r.sp_time_s for r in passengers]) / 3600,
    }
    by_driver = {c.driver_id: c for c in chosen}
    riding = set().union(*(c.request_ids for c in chosen)) if chosen else set()
    km, sec = [], []
    for d in drivers:
        c = by_driver.get(d.id)
        if c is None:
            km.append(d.sp_dist_km)
            sec.append(d.sp_time_s)
        else:
            km.append(c.route_dist_km)
            sec.append(c.arrivals[-1] - d.earliest_departure_s)
    for r in passengers:
        if r.id not in riding:
            km.append(r.sp_dist_km)
            sec.append(r.sp_time_s)
    shared = {"vehicle_trips": len(drivers) + len(passengers) - len(riding),
              "vkt_km": math.fsum(km), "vht_h": math.fsum(sec) / 3600}

    def pct(key):
        return 0.0 if base[key] == 0 else 100.0 * (base[key] - shared[key]) / base[key]

    return NetworkMetrics(base, shared, {k: pct(k) for k in base})


@dataclass
class Replication:
    seed: int
    batches: list
    metrics: NetworkMetrics
    runtime_s: float = field(default=0.0)
    combinations: int = 0

    @property
    def chosen(self):
        return [c for b in self.batches for c in b.chosen]


def replication_seeds(config, n):
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(config.seed).spawn(n)]


def run_replication(net, config, seed):
    inst = gen_instance(net, config, seed)
    batches = simulate(net, inst, config)
    chosen = [c for b in batches for c in b.chosen]
    return Replication(seed, batches, compute_metrics(inst, chosen),
                       sum(b.total_runtime_s for b in batches),
                       sum(b.counts["combinations"] for b in batches))


def run_replications(net, config, n):
    if n < 1:
        raise InvalidConfig("need at least one replication")
    out = []
    for i, seed in enumerate(replication_seeds(config, n)):
        rep = run_replication(net, config, seed)
        log.info("replication %d/%d: %d combinations, %.3fs, VKT saving %.3f%%", i + 1, n,
                 rep.combinations, rep.runtime_s, rep.metrics.deltas_pct["vkt_km"])
        out.append(rep)
    return out


def _mean_sd(xs):
    xs = list(xs)
    if not xs:
        return 0.0, 0.0
    return statistics.fmean(xs), statistics.stdev(xs) if len(xs) > 1 else 0.0


def summarize(reps):
    """Mean and standard deviation of the saving percentages and runtimes."""
    out = {}
    for key in ("vehicle_trips", "vkt_km", "vht_h"):
        out[f"{key}_saving_pct"] = _mean_sd(r.metrics.deltas_pct[key] for r in reps)
    out["runtime_s"] = _mean_sd(r.runtime_s for r in reps)
    out["combinations"] = _mean_sd(r.combinations for r in reps)
    return out


def pearson(xs, ys):
    x, y = np.asarray(xs, float), np.asarray(ys, float)
    if len(x) < 2 or x.std() == 0 or y.std() == 0:
        return float("nan")
    return float(np.corrcoef(x, y)[0, 1])


def write_replications(reps, path):
    """Deterministic per-replication metrics (no wall-clock columns)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["seed", "combinations", "matched_passengers", "trips_saving_pct",
                    "vkt_saving_pct", "vht_saving_pct"])
        for r in reps:
            w.writerow([r.seed, r.combinations, r.metrics.base["vehicle_trips"] - r.metrics.vehicle_trips,
                        repr(r.metrics.deltas_pct["vehicle_trips"]),
                        repr(r.metrics.deltas_pct["vkt_km"]), repr(r.metrics.deltas_pct["vht_h"])])


def write_runtimes(batches, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["stage", "seconds", "combination_count"])
        for b in batches:
            for stage, sec in b.runtimes.items():
                w.writerow([stage, f"{sec:.6f}", b.counts["combinations"]])


def write_metrics(metrics, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(metrics.to_dict(), f, indent=2, sort_keys=True)


def cell_config(config, cell):
    cell = dict(cell)
    ratio = cell.pop("supply_ratio", None)
    cfg = config.replace(**cell)
    if ratio is not None:
        if ratio < 0:
            raise InvalidConfig("supply_ratio must be >= 0")
        cfg = cfg.replace(n_drivers=int(round(ratio * cfg.n_passengers)))
    return cfg


def sensitivity_sweep(net, grid, config, n):
    """Replications for every cell of ``grid`` (dict of axis -> values), same seeds everywhere."""
    if not grid or any(not v for v in grid.values()):
        raise InvalidConfig("empty sweep grid")
    keys = list(grid)
    rows = []
    for values in itertools.product(*(grid[k] for k in keys)):
        cell = dict(zip(keys, values))
        reps = run_replications(net, cell_config(config, cell), n)
        mean, sd = summarize(reps)["vkt_km_saving_pct"]
        rows.append({"cell_params": ";".join(f"{k}={v}" for k, v in cell.items()),
                     "mean_vkt_saving_pct": mean, "stdev": sd, "replications": reps})
    return rows


def write_sweep(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["cell_params", "mean_vkt_saving_pct", "stdev"])
        for r in rows:
            w.writerow([r["cell_params"], repr(r["mean_vkt_saving_pct"]), repr(r["stdev"])])
