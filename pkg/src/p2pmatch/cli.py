"""Command line entry point: ``p2pmatch {gen,match,simulate,sweep}``."""
import argparse
import json
import logging
import os
import statistics
import sys

from . import sim
from ._core import BACKEND
from .combos import write_candidates
from .assign import write_matches
from .config import RunConfig, load_config, parse_grid
from .demand import (drivers_from_rows, passengers_from_rows, read_drivers, read_passengers,
                     write_drivers, write_passengers)
from .errors import P2PMatchError
from .network import generate_network, read_network, travel_matrix, write_network

log = logging.getLogger("p2pmatch")


def _config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    for name in ("seed", "n_drivers", "n_passengers", "batch_window_s"):
        v = getattr(args, name, None)
        if v is not None:
            changes[name] = v
    if getattr(args, "no_prune", False):
        changes["prune"] = False
    if getattr(args, "greedy_combos", False):
        changes["combo_mode"] = "greedy"
    if getattr(args, "greedy_assign", False):
        changes["assign_mode"] = "greedy"
    return cfg.replace(**changes)


def _network(args, cfg):
    if args.network:
        return read_network(os.path.join(args.network, "nodes.csv"),
                            os.path.join(args.network, "links.csv"))
    return generate_network(cfg.grid_rows, cfg.grid_cols, cfg.spacing_km, seed=cfg.network_seed)


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_gen(args):
    cfg = _config(args)
    net = _network(args, cfg)
    out = _outdir(args)
    inst = sim.gen_instance(net, cfg)
    write_network(net, os.path.join(out, "nodes.csv"), os.path.join(out, "links.csv"))
    write_drivers(inst.drivers, os.path.join(out, "drivers.csv"))
    write_passengers(inst.passengers, os.path.join(out, "passengers.csv"))
    print(f"wrote network ({len(net.ids)} nodes), {len(inst.drivers)} drivers, "
          f"{len(inst.passengers)} passengers to {out}")


def cmd_match(args):
    cfg = _config(args)
    net = _network(args, cfg)
    out = _outdir(args)
    drows, prows = read_drivers(args.drivers), read_passengers(args.passengers)
    nodes = [r[k] for r in drows + prows for k in ("origin", "destination")]
    matrix = travel_matrix(net, nodes)
    inst = sim.Instance(drivers_from_rows(drows, matrix, cfg.excess_ratio),
                        passengers_from_rows(prows, matrix, cfg.excess_ratio, cfg.wait_ratio),
                        matrix)
    res = sim.run_batch(net, inst, cfg)
    metrics = sim.compute_metrics(inst, res.chosen)
    write_matches(res.candidates, res.assignment, os.path.join(out, "matches.csv"))
    sim.write_metrics(metrics, os.path.join(out, "metrics.json"))
    sim.write_runtimes([res], os.path.join(out, "runtimes.csv"))
    if args.candidates:
        write_candidates(res.candidates, os.path.join(out, "candidates.csv"))
    a = res.assignment
    print(f"{len(res.candidates)} feasible combinations, {len(a.chosen)} matches, "
          f"{len(a.matched_passengers)} passengers served, savings {a.total_savings_km:.3f} km, "
          f"VKT saving {metrics.deltas_pct['vkt_km']:.2f}%")


def _mean_metrics(reps):
    d = {}
    for key in ("vehicle_trips", "vkt_km", "vht_h"):
        d[key] = statistics.fmean(r.metrics.shared[key] for r in reps)
    d["base"] = {k: statistics.fmean(r.metrics.base[k] for r in reps) for k in d}
    d["deltas_pct"] = {k: statistics.fmean(r.metrics.deltas_pct[k] for r in reps)
                       for k in ("vehicle_trips", "vkt_km", "vht_h")}
    d["replications"] = len(reps)
    return d


def cmd_simulate(args):
    cfg = _config(args)
    net = _network(args, cfg)
    out = _outdir(args)
    reps = sim.run_replications(net, cfg, args.replications)
    sim.write_replications(reps, os.path.join(out, "replications.csv"))
    sim.write_runtimes([b for r in reps for b in r.batches], os.path.join(out, "runtimes.csv"))
    with open(os.path.join(out, "metrics.json"), "w", encoding="utf-8") as f:
        json.dump(_mean_metrics(reps), f, indent=2, sort_keys=True)
    s = sim.summarize(reps)
    corr = sim.pearson([r.runtime_s for r in reps], [r.combinations for r in reps])
    print(f"{len(reps)} replications: VKT saving {s['vkt_km_saving_pct'][0]:.2f}% "
          f"(sd {s['vkt_km_saving_pct'][1]:.2f}), trip saving "
          f"{s['vehicle_trips_saving_pct'][0]:.2f}%, mean runtime {s['runtime_s'][0]:.3f}s, "
          f"corr(runtime, combinations) {corr:.3f}")


def cmd_sweep(args):
    cfg = _config(args)
    net = _network(args, cfg)
    out = _outdir(args)
    with open(args.grid, encoding="utf-8") as f:
        grid = parse_grid(f.read())
    rows = sim.sensitivity_sweep(net, grid, cfg, args.replications)
    sim.write_sweep(rows, os.path.join(out, "sweep.csv"))
    for r in rows:
        print(f"{r['cell_params']}: VKT saving {r['mean_vkt_saving_pct']:.3f}% "
              f"(sd {r['stdev']:.3f})")


def build_parser():
    p = argparse.ArgumentParser(prog="p2pmatch", description="Peer-to-peer ride matching")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--network", help="directory holding nodes.csv and links.csv "
                                          "(default: synthetic grid from the config)")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int)
        return sp

    def matching(sp):
        sp.add_argument("--no-prune", action="store_true", help="skip the geometric pre-filter")
        sp.add_argument("--greedy-combos", action="store_true",
                        help="grow combinations with the single-path insertion heuristic")
        sp.add_argument("--greedy-assign", action="store_true",
                        help="greedy packing instead of the exact solver")
        return sp

    g = common(sub.add_parser("gen", help="write a synthetic network and instance"))
    g.add_argument("--n-drivers", dest="n_drivers", type=int)
    g.add_argument("--n-passengers", dest="n_passengers", type=int)
    g.set_defaults(func=cmd_gen)

    m = matching(common(sub.add_parser("match", help="match one batch from CSV files")))
    m.add_argument("--drivers", required=True)
    m.add_argument("--passengers", required=True)
    m.add_argument("--candidates", action="store_true", help="also write candidates.csv")
    m.set_defaults(func=cmd_match)

    s = matching(common(sub.add_parser("simulate", help="seeded rolling-horizon replications")))
    s.add_argument("--replications", type=int, default=10)
    s.add_argument("--n-drivers", dest="n_drivers", type=int)
    s.add_argument("--n-passengers", dest="n_passengers", type=int)
    s.add_argument("--batch-window", dest="batch_window_s", type=float)
    s.set_defaults(func=cmd_simulate)

    w = matching(common(sub.add_parser("sweep", help="replications over a parameter grid")))
    w.add_argument("--grid", required=True, help="file with one key=v1,v2,... line per axis")
    w.add_argument("--replications", type=int, default=10)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", BACKEND)
    try:
        args.func(args)
    except (P2PMatchError, ValueError, OSError, KeyError) as e:
        print(f"p2pmatch: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
