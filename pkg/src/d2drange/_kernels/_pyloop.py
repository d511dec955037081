"""Pure-Python twin of the compiled delivery event loop.

Semantics are identical to the Cython kernel bit for bit: same event
ordering (time, kind, index with requests before timeout expiries), same
closed-ball nearest-holder rule with smallest-index tie break, and the same
double-precision distance arithmetic. The compiled module is preferred at
import time; this one is the fallback and the reference for equivalence
tests.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

BACKEND = "python"

REQUEST = 0
EXPIRY = 1


def grid_cell_size(r_max: float, extent: float) -> float:
    """Bucket edge for the uniform grid: the query radius, floored so the
    grid never exceeds ~256 buckets per axis."""
    return max(r_max, extent / 256.0, 1e-6)


def deliver_events(x, y, t_req, bs_dist, timeout_s, r_max):
    """Run the offloading protocol over one set of interested UEs.

    Events are processed in (time, kind, ue index) order. A request is
    served D2D from the nearest current holder within ``r_max`` (closed
    ball) if one exists; otherwise the UE waits ``timeout_s`` and is served
    by its base station at the deadline. Every delivery turns the receiver
    into a holder and immediately serves, in (deadline, index) order, any
    waiting UE that now has a holder in range (cascading).

    Returns (delivery_time, mode, distance, server) arrays; mode is 1 for
    D2D and 0 for I2D, server is the transmitting UE index or -1 for the
    base station.
    """
    n = len(x)
    t_del = np.zeros(n, dtype=np.float64)
    mode = np.zeros(n, dtype=np.int8)
    dist = np.asarray(bs_dist, dtype=np.float64).copy()
    server = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return t_del, mode, dist, server

    xs = np.asarray(x, dtype=np.float64).tolist()
    ys = np.asarray(y, dtype=np.float64).tolist()
    req = np.asarray(t_req, dtype=np.float64).tolist()
    bsd = np.asarray(bs_dist, dtype=np.float64).tolist()

    extent = max(max(xs) - min(xs), max(ys) - min(ys))
    cell = grid_cell_size(r_max, extent)
    x0, y0 = min(xs), min(ys)
    buckets: dict = {}
    for i in range(n):
        key = (int((xs[i] - x0) / cell), int((ys[i] - y0) / cell))
        buckets.setdefault(key, []).append(i)

    r_sq = r_max * r_max
    delivered = [False] * n
    pending = [False] * n
    deadline = [req[i] + timeout_s for i in range(n)]

    def neighborhood(i):
        cx = int((xs[i] - x0) / cell)
        cy = int((ys[i] - y0) / cell)
        for bx in range(cx - 1, cx + 2):
            for by in range(cy - 1, cy + 2):
                members = buckets.get((bx, by))
                if members:
                    yield from members

    def nearest_holder(i):
        best_d2 = math.inf
        best_j = -1
        qx, qy = xs[i], ys[i]
        for j in neighborhood(i):
            if not delivered[j]:
                continue
            dx = xs[j] - qx
            dy = ys[j] - qy
            d2 = dx * dx + dy * dy
            if d2 <= r_sq and (d2 < best_d2 or (d2 == best_d2 and j < best_j)):
                best_d2, best_j = d2, j
        return best_j, best_d2

    def pending_in_range(i):
        qx, qy = xs[i], ys[i]
        out = []
        for j in neighborhood(i):
            if not pending[j]:
                continue
            dx = xs[j] - qx
            dy = ys[j] - qy
            if dx * dx + dy * dy <= r_sq:
                out.append(j)
        return out

    def deliver(i, now, mode_i, dist_i, server_i, cascade):
        t_del[i] = now
        mode[i] = mode_i
        dist[i] = dist_i
        server[i] = server_i
        delivered[i] = True
        pending[i] = False
        for j in pending_in_range(i):
            heapq.heappush(cascade, (deadline[j], j))
        while cascade:
            _, u = heapq.heappop(cascade)
            if not pending[u]:
                continue
            srv, d2 = nearest_holder(u)
            t_del[u] = now
            mode[u] = 1
            dist[u] = math.sqrt(d2)
            server[u] = srv
            delivered[u] = True
            pending[u] = False
            for v in pending_in_range(u):
                heapq.heappush(cascade, (deadline[v], v))

    events = [(req[i], REQUEST, i) for i in range(n)]
    heapq.heapify(events)
    while events:
        now, kind, i = heapq.heappop(events)
        if delivered[i]:
            continue  # expiry made stale by a cascade
        if kind == REQUEST:
            j, d2 = nearest_holder(i)
            if j >= 0:
                deliver(i, now, 1, math.sqrt(d2), j, [])
            elif timeout_s > 0.0:
                pending[i] = True
                heapq.heappush(events, (deadline[i], EXPIRY, i))
            else:
                deliver(i, now, 0, bsd[i], -1, [])
        else:
            deliver(i, now, 0, bsd[i], -1, [])

    return t_del, mode, dist, server
