"""Pure-Python kernels.

Same contract as the compiled ``_ckernels`` module; selected by ``_core`` when
the extension is missing or ``P2PMATCH_PURE=1`` is set.

Schedule tree nodes are plain tuples ``(stop, arrival_s, depart_s, occupancy,
children)`` where ``children`` is a tuple of nodes. Stop ``0`` is the driver
origin, ``1`` the driver destination, ``2 + 2k`` / ``3 + 2k`` pickup and
drop-off of the k-th request known to the driver context.
"""
import heapq
import math

INF = math.inf
DEST = 1


def prepare_times(time_matrix):
    """Matrix layout consumed by :class:`Inserter`."""
    return time_matrix.tolist()


def dijkstra(indptr, indices, times, lengths, source):
    """Single-source time-optimal paths.

    Returns ``(time, dist)`` lists over all nodes; ``dist`` is measured along
    the time-optimal path, ties in time resolved by the shorter distance.
    Unreached nodes carry ``inf``.
    """
    indptr, indices, times, lengths = (
        a.tolist() if hasattr(a, "tolist") else a for a in (indptr, indices, times, lengths))
    n = len(indptr) - 1
    best_t = [INF] * n
    best_d = [INF] * n
    done = [False] * n
    best_t[source] = 0.0
    best_d[source] = 0.0
    heap = [(0.0, 0.0, source)]
    while heap:
        t, d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if done[v]:
                continue
            nt = t + times[e]
            nd = d + lengths[e]
            if nt < best_t[v] or (nt == best_t[v] and nd < best_d[v]):
                best_t[v] = nt
                best_d[v] = nd
                heapq.heappush(heap, (nt, nd, v))
    return best_t, best_d


def _as_list(a):
    return a.tolist() if hasattr(a, "tolist") else list(a)


class Inserter:
    """Insert one request (pickup ``p``, drop-off ``p + 1``) into a schedule tree.

    ``time_rows`` is the travel-time matrix as row sequences; ``loc``, ``ready``,
    ``deadline`` and ``delta`` are indexed by stop id. ``checks`` counts
    node feasibility evaluations.
    """

    def __init__(self, time_rows, loc, ready, deadline, delta, capacity):
        self.T = time_rows
        self.loc = _as_list(loc)
        self.ready = _as_list(ready)
        self.deadline = _as_list(deadline)
        self.delta = _as_list(delta)
        self.cap = capacity
        self.checks = 0

    def insert(self, root, p):
        self.p = p
        self.d = p + 1
        kids = self._expand(root[4], root[0], root[2], root[3], 0)
        if not kids:
            return None
        return (root[0], root[1], root[2], root[3], kids)

    def _expand(self, kids, pstop, pdep, pocc, phase):
        T = self.T
        loc = self.loc
        deadline = self.deadline
        row = T[loc[pstop]]
        out = []
        if phase == 0:
            p = self.p
            self.checks += 1
            arr = pdep + row[loc[p]]
            if arr <= deadline[p] and pocc < self.cap:
                dep = max(arr, self.ready[p])
                sub = self._expand(kids, p, dep, pocc + 1, 1)
                if sub:
                    out.append((p, arr, dep, pocc + 1, sub))
            for c in kids:
                s = c[0]
                if s == DEST:
                    continue
                self.checks += 1
                arr = pdep + row[loc[s]]
                if arr > deadline[s]:
                    continue
                occ = pocc + self.delta[s]
                dep = max(arr, self.ready[s])
                sub = self._expand(c[4], s, dep, occ, 0)
                if sub:
                    out.append((s, arr, dep, occ, sub))
        elif phase == 1:
            d = self.d
            self.checks += 1
            arr = pdep + row[loc[d]]
            if arr <= deadline[d]:
                sub = self._expand(kids, d, arr, pocc - 1, 2)
                if sub:
                    out.append((d, arr, arr, pocc - 1, sub))
            for c in kids:
                s = c[0]
                if s == DEST:
                    continue
                self.checks += 1
                arr = pdep + row[loc[s]]
                occ = pocc + self.delta[s]
                if arr > deadline[s] or occ > self.cap:
                    continue
                dep = max(arr, self.ready[s])
                sub = self._expand(c[4], s, dep, occ, 1)
                if sub:
                    out.append((s, arr, dep, occ, sub))
        else:
            for c in kids:
                s = c[0]
                arr = pdep + row[loc[s]]
                if arr == c[1]:
                    # identical timing: the old subtree stays valid as is
                    out.append(c)
                    continue
                self.checks += 1
                if arr > deadline[s]:
                    continue
                dep = max(arr, self.ready[s])
                if dep == c[2]:
                    out.append((s, arr, dep, c[3], c[4]))
                elif s == DEST:
                    out.append((s, arr, dep, c[3], ()))
                else:
                    sub = self._expand(c[4], s, dep, c[3], 2)
                    if sub:
                        out.append((s, arr, dep, c[3], sub))
        return tuple(out)
