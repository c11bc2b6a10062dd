"""The compiled and pure-Python kernels must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from p2pmatch import _core
from p2pmatch._core import py_kernels
from p2pmatch.network import generate_network

from oracles import make_rng, small_instance

ckern = pytest.importorskip("p2pmatch._ckernels")


def test_backend_selected():
    assert _core.BACKEND in ("cython", "python")


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_dijkstra_parity(seed):
    net = generate_network(6, 7, seed=seed)
    args = (net._indptr, net._indices, net._times, net._lengths)
    for src in (0, len(net.ids) // 2, len(net.ids) - 1):
        tc, dc = ckern.dijkstra(*args, src)
        tp, dp = py_kernels.dijkstra(*args, src)
        assert np.array_equal(np.asarray(tc), np.asarray(tp))
        assert np.array_equal(np.asarray(dc), np.asarray(dp))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_inserter_parity(seed):
    from p2pmatch.dyntree import init_tree
    net, matrix, driver, reqs = small_instance(make_rng(seed), 3, capacity=2, loose=True)
    ctx = init_tree(driver, matrix, reqs).ctx
    root = init_tree(driver, matrix, reqs).root
    kc = ckern.Inserter(ckern.prepare_times(matrix.time), ctx.loc, ctx.ready, ctx.deadline,
                        ctx.delta, driver.capacity)
    kp = py_kernels.Inserter(py_kernels.prepare_times(matrix.time), ctx.loc, ctx.ready,
                             ctx.deadline, ctx.delta, driver.capacity)
    rc = rp = root
    for k in range(len(reqs)):
        rc = kc.insert(rc, 2 + 2 * k) if rc is not None else None
        rp = kp.insert(rp, 2 + 2 * k) if rp is not None else None
        assert rc == rp
        assert kc.checks == kp.checks
