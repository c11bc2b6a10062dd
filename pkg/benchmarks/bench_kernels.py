"""Compiled vs pure-Python kernels.

Times the single-source shortest-path kernel on the default synthetic grid
and the schedule-tree insertion kernel on the singleton and pair stages of
a real batch, for both backends, and checks that their outputs agree.

    python benchmarks/bench_kernels.py [--sources 40] [--drivers 60]
"""
import argparse
import time

import numpy as np

from p2pmatch._core import py_kernels
from p2pmatch.config import RunConfig
from p2pmatch.dyntree import RequestTable, DriverContext, init_tree
from p2pmatch.network import generate_network
from p2pmatch.sim import gen_instance

try:
    from p2pmatch import _ckernels as c_kernels
except ImportError:  # extension not built
    c_kernels = None


def bench_dijkstra(net, kern, sources):
    args = (net._indptr, net._indices, net._times, net._lengths)
    t0 = time.perf_counter()
    out = [kern.dijkstra(*args, s) for s in sources]
    return time.perf_counter() - t0, out


def bench_insert(inst, kern, n_drivers):
    """Insert every passenger into each driver's solo tree, then every feasible pair."""
    table = RequestTable(inst.passengers, inst.matrix)
    times = kern.prepare_times(inst.matrix.time)
    t0 = time.perf_counter()
    checks = feasible = 0
    for d in inst.drivers[:n_drivers]:
        ctx = DriverContext(d, inst.matrix, table=table)
        root = init_tree(d, inst.matrix, table=table).root
        ins = kern.Inserter(times, ctx.loc, ctx.ready, ctx.deadline, ctx.delta, d.capacity)
        ones = []
        for k in range(len(inst.passengers)):
            r = ins.insert(root, 2 + 2 * k)
            if r is not None:
                ones.append((k, r))
        for i, (_, tree) in enumerate(ones):
            for k, _ in ones[i + 1:]:
                feasible += ins.insert(tree, 2 + 2 * k) is not None
        feasible += len(ones)
        checks += ins.checks
    return time.perf_counter() - t0, (checks, feasible)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sources", type=int, default=40)
    ap.add_argument("--drivers", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = RunConfig(n_drivers=300, n_passengers=600, batch_window_s=300, od_concentration=1.0)
    net = generate_network(cfg.grid_rows, cfg.grid_cols, cfg.spacing_km, seed=cfg.network_seed)
    inst = gen_instance(net, cfg, args.seed)
    sources = np.linspace(0, len(net.ids) - 1, args.sources).astype(int).tolist()
    backends = [("python", py_kernels)] + ([("cython", c_kernels)] if c_kernels else [])

    print(f"network: {len(net.ids)} nodes, {len(net.links)} links; "
          f"batch: {len(inst.drivers)} drivers, {len(inst.passengers)} passengers")
    print(f"{'kernel':<26}{'backend':<9}{'seconds':>10}{'speed-up':>10}")
    for name, fn, arg in (("dijkstra x%d" % args.sources, bench_dijkstra, sources),
                          ("insert (%d drivers)" % args.drivers, bench_insert, args.drivers)):
        results = {}
        for label, kern in backends:
            src = net if fn is bench_dijkstra else inst
            results[label] = fn(src, kern, arg)
        base = results["python"][0]
        for label, (sec, _) in results.items():
            print(f"{name:<26}{label:<9}{sec:>10.3f}{base / sec:>9.1f}x")
        if len(results) == 2:
            a, b = results["python"][1], results["cython"][1]
            if fn is bench_dijkstra:
                same = all(np.array_equal(np.asarray(x[0]), np.asarray(y[0])) and
                           np.array_equal(np.asarray(x[1]), np.asarray(y[1])) for x, y in zip(a, b))
            else:
                same = a == b
            print(f"{'':<26}outputs identical: {same}")


if __name__ == "__main__":
    main()
