# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; contract identical to ``_kernels``."""
import numpy as np

from libc.math cimport INFINITY

cdef int DEST = 1


def prepare_times(time_matrix):
    return np.ascontiguousarray(time_matrix, dtype=np.float64)


cdef inline bint _less(double t1, double d1, double t2, double d2) noexcept nogil:
    return t1 < t2 or (t1 == t2 and d1 < d2)


def dijkstra(indptr, indices, times, lengths, Py_ssize_t source):
    cdef const long long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] tt = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[::1] ll = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    out_t = np.full(n, np.inf)
    out_d = np.full(n, np.inf)
    cdef double[::1] bt = out_t
    cdef double[::1] bd = out_d
    cdef unsigned char[::1] done = np.zeros(n, dtype=np.uint8)
    # binary heap keyed by (time, dist), lazy deletion
    cdef Py_ssize_t cap = max(16, 4 * ip[n] + 4)
    cdef double[::1] ht = np.empty(cap)
    cdef double[::1] hd = np.empty(cap)
    cdef long long[::1] hv = np.empty(cap, dtype=np.int64)
    cdef Py_ssize_t size = 0, i, j, child, e
    cdef long long u, v
    cdef double t, d, nt, nd, xt, xd
    cdef long long xv
    bt[source] = 0.0
    bd[source] = 0.0
    ht[0] = 0.0
    hd[0] = 0.0
    hv[0] = source
    size = 1
    with nogil:
        while size > 0:
            t = ht[0]
            d = hd[0]
            u = hv[0]
            size -= 1
            if size > 0:
                xt = ht[size]
                xd = hd[size]
                xv = hv[size]
                i = 0
                while True:
                    child = 2 * i + 1
                    if child >= size:
                        break
                    if child + 1 < size and _less(ht[child + 1], hd[child + 1], ht[child], hd[child]):
                        child += 1
                    if not _less(ht[child], hd[child], xt, xd):
                        break
                    ht[i] = ht[child]
                    hd[i] = hd[child]
                    hv[i] = hv[child]
                    i = child
                ht[i] = xt
                hd[i] = xd
                hv[i] = xv
            if done[u]:
                continue
            done[u] = 1
            for e in range(ip[u], ip[u + 1]):
                v = ix[e]
                if done[v]:
                    continue
                nt = t + tt[e]
                nd = d + ll[e]
                if _less(nt, nd, bt[v], bd[v]):
                    bt[v] = nt
                    bd[v] = nd
                    if size == cap:
                        with gil:
                            raise MemoryError("heap overflow")
                    i = size
                    size += 1
                    while i > 0:
                        j = (i - 1) // 2
                        if not _less(nt, nd, ht[j], hd[j]):
                            break
                        ht[i] = ht[j]
                        hd[i] = hd[j]
                        hv[i] = hv[j]
                        i = j
                    ht[i] = nt
                    hd[i] = nd
                    hv[i] = v
    return out_t, out_d


cdef class Inserter:
    cdef const double[:, ::1] T
    cdef const long long[::1] loc
    cdef const double[::1] ready
    cdef const double[::1] deadline
    cdef const long long[::1] delta
    cdef long long cap
    cdef long long p, d
    cdef public long long checks

    def __init__(self, time_matrix, loc, ready, deadline, delta, long long capacity):
        self.T = np.ascontiguousarray(time_matrix, dtype=np.float64)
        self.loc = np.ascontiguousarray(loc, dtype=np.int64)
        self.ready = np.ascontiguousarray(ready, dtype=np.float64)
        self.deadline = np.ascontiguousarray(deadline, dtype=np.float64)
        self.delta = np.ascontiguousarray(delta, dtype=np.int64)
        self.cap = capacity
        self.checks = 0

    def insert(self, tuple root, long long p):
        self.p = p
        self.d = p + 1
        cdef tuple kids = self._expand(<tuple>root[4], <long long>root[0], <double>root[2],
                                       <long long>root[3], 0)
        if not kids:
            return None
        return (root[0], root[1], root[2], root[3], kids)

    cdef tuple _expand(self, tuple kids, long long pstop, double pdep, long long pocc, int phase):
        cdef list out = []
        cdef tuple c, sub
        cdef long long s, occ
        cdef double arr, dep
        cdef long long prow = self.loc[pstop]
        if phase == 0:
            self.checks += 1
            arr = pdep + self.T[prow, self.loc[self.p]]
            if arr <= self.deadline[self.p] and pocc < self.cap:
                dep = arr if arr > self.ready[self.p] else self.ready[self.p]
                sub = self._expand(kids, self.p, dep, pocc + 1, 1)
                if sub:
                    out.append((self.p, arr, dep, pocc + 1, sub))
            for c in kids:
                s = c[0]
                if s == DEST:
                    continue
                self.checks += 1
                arr = pdep + self.T[prow, self.loc[s]]
                if arr > self.deadline[s]:
                    continue
                occ = pocc + self.delta[s]
                dep = arr if arr > self.ready[s] else self.ready[s]
                sub = self._expand(<tuple>c[4], s, dep, occ, 0)
                if sub:
                    out.append((s, arr, dep, occ, sub))
        elif phase == 1:
            self.checks += 1
            arr = pdep + self.T[prow, self.loc[self.d]]
            if arr <= self.deadline[self.d]:
                sub = self._expand(kids, self.d, arr, pocc - 1, 2)
                if sub:
                    out.append((self.d, arr, arr, pocc - 1, sub))
            for c in kids:
                s = c[0]
                if s == DEST:
                    continue
                self.checks += 1
                arr = pdep + self.T[prow, self.loc[s]]
                occ = pocc + self.delta[s]
                if arr > self.deadline[s] or occ > self.cap:
                    continue
                dep = arr if arr > self.ready[s] else self.ready[s]
                sub = self._expand(<tuple>c[4], s, dep, occ, 1)
                if sub:
                    out.append((s, arr, dep, occ, sub))
        else:
            for c in kids:
                s = c[0]
                arr = pdep + self.T[prow, self.loc[s]]
                if arr == <double>c[1]:
                    out.append(c)
                    continue
                self.checks += 1
                if arr > self.deadline[s]:
                    continue
                dep = arr if arr > self.ready[s] else self.ready[s]
                if dep == <double>c[2]:
                    out.append((s, arr, dep, c[3], c[4]))
                elif s == DEST:
                    out.append((s, arr, dep, c[3], ()))
                else:
                    sub = self._expand(<tuple>c[4], s, dep, <long long>c[3], 2)
                    if sub:
                        out.append((s, arr, dep, c[3], sub))
        return tuple(out)
