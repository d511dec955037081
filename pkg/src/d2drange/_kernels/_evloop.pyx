# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled delivery event loop.

Mirrors ``_pyloop.deliver_events`` exactly: same event ordering, same
closed-ball nearest-holder tie rules, same double-precision arithmetic, so
both backends produce bit-identical outputs for the same inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "compiled"

cdef int REQUEST = 0
cdef int EXPIRY = 1


cdef inline bint _ev_less(double t1, int k1, int i1,
                          double t2, int k2, int i2) noexcept:
    if t1 != t2:
        return t1 < t2
    if k1 != k2:
        return k1 < k2
    return i1 < i2


cdef void _heap_push(double[::1] ht, int[::1] hk, int[::1] hi, int* size,
                     double t, int k, int i) noexcept:
    cdef int c = size[0]
    cdef int parent
    cdef double tt
    cdef int tk, ti
    ht[c] = t
    hk[c] = k
    hi[c] = i
    size[0] = c + 1
    while c > 0:
        parent = (c - 1) >> 1
        if _ev_less(ht[c], hk[c], hi[c], ht[parent], hk[parent], hi[parent]):
            tt = ht[c]; ht[c] = ht[parent]; ht[parent] = tt
            tk = hk[c]; hk[c] = hk[parent]; hk[parent] = tk
            ti = hi[c]; hi[c] = hi[parent]; hi[parent] = ti
            c = parent
        else:
            break


cdef void _heap_pop(double[::1] ht, int[::1] hk, int[::1] hi, int* size,
                    double* t_out, int* k_out, int* i_out) noexcept:
    cdef int last = size[0] - 1
    cdef int c = 0, child
    cdef double tt
    cdef int tk, ti
    t_out[0] = ht[0]
    k_out[0] = hk[0]
    i_out[0] = hi[0]
    ht[0] = ht[last]
    hk[0] = hk[last]
    hi[0] = hi[last]
    size[0] = last
    while True:
        child = 2 * c + 1
        if child >= last:
            break
        if child + 1 < last and _ev_less(ht[child + 1], hk[child + 1], hi[child + 1],
                                         ht[child], hk[child], hi[child]):
            child += 1
        if _ev_less(ht[child], hk[child], hi[child], ht[c], hk[c], hi[c]):
            tt = ht[c]; ht[c] = ht[child]; ht[child] = tt
            tk = hk[c]; hk[c] = hk[child]; hk[child] = tk
            ti = hi[c]; hi[c] = hi[child]; hi[child] = ti
            c = child
        else:
            break


cdef int _nearest_holder(double[::1] xs, double[::1] ys, cnp.uint8_t[::1] delivered,
                         int[::1] bstart, int[::1] bids, int nx, int ny,
                         double x0, double y0, double cell, double r_sq,
                         int i, double* d2_out) noexcept:
    cdef int cx = <int>((xs[i] - x0) / cell)
    cdef int cy = <int>((ys[i] - y0) / cell)
    cdef double qx = xs[i], qy = ys[i]
    cdef double best_d2 = 1e308
    cdef int best_j = -1
    cdef int bx, by, b, p, j
    cdef double dx, dy, d2
    for bx in range(cx - 1, cx + 2):
        if bx < 0 or bx >= nx:
            continue
        for by in range(cy - 1, cy + 2):
            if by < 0 or by >= ny:
                continue
            b = by * nx + bx
            for p in range(bstart[b], bstart[b + 1]):
                j = bids[p]
                if not delivered[j]:
                    continue
                dx = xs[j] - qx
                dy = ys[j] - qy
                d2 = dx * dx + dy * dy
                if d2 <= r_sq and (d2 < best_d2 or (d2 == best_d2 and j < best_j)):
                    best_d2 = d2
                    best_j = j
    d2_out[0] = best_d2
    return best_j


cdef int _collect_pending(double[::1] xs, double[::1] ys, cnp.uint8_t[::1] pending,
                          int[::1] bstart, int[::1] bids, int nx, int ny,
                          double x0, double y0, double cell, double r_sq,
                          int i, int[::1] buf) noexcept:
    cdef int cx = <int>((xs[i] - x0) / cell)
    cdef int cy = <int>((ys[i] - y0) / cell)
    cdef double qx = xs[i], qy = ys[i]
    cdef int count = 0
    cdef int bx, by, b, p, j
    cdef double dx, dy
    for bx in range(cx - 1, cx + 2):
        if bx < 0 or bx >= nx:
            continue
        for by in range(cy - 1, cy + 2):
            if by < 0 or by >= ny:
                continue
            b = by * nx + bx
            for p in range(bstart[b], bstart[b + 1]):
                j = bids[p]
                if pending[j]:
                    dx = xs[j] - qx
                    dy = ys[j] - qy
                    if dx * dx + dy * dy <= r_sq:
                        buf[count] = j
                        count += 1
    return count


def deliver_events(x_in, y_in, t_req_in, bs_in, double timeout_s, double r_max):
    """Compiled counterpart of ``_pyloop.deliver_events``."""
    xs_arr = np.ascontiguousarray(x_in, dtype=np.float64)
    ys_arr = np.ascontiguousarray(y_in, dtype=np.float64)
    req_arr = np.ascontiguousarray(t_req_in, dtype=np.float64)
    bs_arr = np.ascontiguousarray(bs_in, dtype=np.float64)
    cdef int n = xs_arr.shape[0]

    t_del_arr = np.zeros(n, dtype=np.float64)
    mode_arr = np.zeros(n, dtype=np.int8)
    dist_arr = bs_arr.copy()
    server_arr = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return t_del_arr, mode_arr, dist_arr, server_arr

    cdef double[::1] xs = xs_arr
    cdef double[::1] ys = ys_arr
    cdef double[::1] req = req_arr
    cdef double[::1] bsd = bs_arr
    cdef double[::1] t_del = t_del_arr
    cdef cnp.int8_t[::1] mode = mode_arr
    cdef double[::1] dist = dist_arr
    cdef cnp.int64_t[::1] server = server_arr

    # uniform grid over the fixed positions, bucket edge >= query radius
    cdef double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0]
    cdef int i
    for i in range(n):
        if xs[i] < xmin: xmin = xs[i]
        if xs[i] > xmax: xmax = xs[i]
        if ys[i] < ymin: ymin = ys[i]
        if ys[i] > ymax: ymax = ys[i]
    cdef double extent = xmax - xmin
    if ymax - ymin > extent:
        extent = ymax - ymin
    cdef double cell = r_max
    if extent / 256.0 > cell:
        cell = extent / 256.0
    if cell < 1e-6:
        cell = 1e-6
    cdef int nx = <int>((xmax - xmin) / cell) + 1
    cdef int ny = <int>((ymax - ymin) / cell) + 1

    bucket_of_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] bucket_of = bucket_of_arr
    bstart_arr = np.zeros(nx * ny + 1, dtype=np.int32)
    cdef int[::1] bstart = bstart_arr
    bids_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] bids = bids_arr
    cursor_arr = np.zeros(nx * ny, dtype=np.int32)
    cdef int[::1] cursor = cursor_arr
    cdef int b
    for i in range(n):
        b = (<int>((ys[i] - ymin) / cell)) * nx + (<int>((xs[i] - xmin) / cell))
        bucket_of[i] = b
        bstart[b + 1] += 1
    for b in range(nx * ny):
        bstart[b + 1] += bstart[b]
    for i in range(n):
        b = bucket_of[i]
        bids[bstart[b] + cursor[b]] = i
        cursor[b] += 1

    delivered_arr = np.zeros(n, dtype=np.uint8)
    pending_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] delivered = delivered_arr
    cdef cnp.uint8_t[::1] pending = pending_arr
    deadline_arr = req_arr + timeout_s
    cdef double[::1] deadline = deadline_arr

    # main event heap: requests plus at most one expiry per UE
    ev_t_arr = np.empty(2 * n, dtype=np.float64)
    ev_k_arr = np.empty(2 * n, dtype=np.int32)
    ev_i_arr = np.empty(2 * n, dtype=np.int32)
    cdef double[::1] ev_t = ev_t_arr
    cdef int[::1] ev_k = ev_k_arr
    cdef int[::1] ev_i = ev_i_arr
    cdef int ev_size = 0

    # cascade worklist heap (deadline, index), grown on demand
    cas_cap = 4 * n + 16
    cas_t_arr = np.empty(cas_cap, dtype=np.float64)
    cas_k_arr = np.zeros(cas_cap, dtype=np.int32)
    cas_i_arr = np.empty(cas_cap, dtype=np.int32)
    cdef double[::1] cas_t = cas_t_arr
    cdef int[::1] cas_k = cas_k_arr
    cdef int[::1] cas_i = cas_i_arr
    cdef int cas_size = 0

    buf_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] buf = buf_arr

    for i in range(n):
        _heap_push(ev_t, ev_k, ev_i, &ev_size, req[i], REQUEST, i)

    cdef double now, d2, dlu
    cdef int kind, j, u, m, k, wave_from, dummy_k
    cdef double r_sq = r_max * r_max

    while ev_size > 0:
        _heap_pop(ev_t, ev_k, ev_i, &ev_size, &now, &kind, &i)
        if delivered[i]:
            continue
        wave_from = -1
        if kind == REQUEST:
            j = _nearest_holder(xs, ys, delivered, bstart, bids, nx, ny,
                                xmin, ymin, cell, r_sq, i, &d2)
            if j >= 0:
                t_del[i] = now
                mode[i] = 1
                dist[i] = sqrt(d2)
                server[i] = j
                delivered[i] = 1
                wave_from = i
            elif timeout_s > 0.0:
                pending[i] = 1
                _heap_push(ev_t, ev_k, ev_i, &ev_size, deadline[i], EXPIRY, i)
            else:
                t_del[i] = now
                mode[i] = 0
                dist[i] = bsd[i]
                server[i] = -1
                delivered[i] = 1
                wave_from = i
        else:
            t_del[i] = now
            mode[i] = 0
            dist[i] = bsd[i]
            server[i] = -1
            delivered[i] = 1
            pending[i] = 0
            wave_from = i

        if wave_from >= 0:
            cas_size = 0
            m = _collect_pending(xs, ys, pending, bstart, bids, nx, ny,
                                 xmin, ymin, cell, r_sq, wave_from, buf)
            for k in range(m):
                if cas_size >= cas_cap:
                    cas_cap *= 2
                    cas_t_arr = np.resize(cas_t_arr, cas_cap)
                    cas_k_arr = np.resize(cas_k_arr, cas_cap)
                    cas_i_arr = np.resize(cas_i_arr, cas_cap)
                    cas_t = cas_t_arr
                    cas_k = cas_k_arr
                    cas_i = cas_i_arr
                _heap_push(cas_t, cas_k, cas_i, &cas_size, deadline[buf[k]], 0, buf[k])
            while cas_size > 0:
                _heap_pop(cas_t, cas_k, cas_i, &cas_size, &dlu, &dummy_k, &u)
                if not pending[u]:
                    continue
                j = _nearest_holder(xs, ys, delivered, bstart, bids, nx, ny,
                                    xmin, ymin, cell, r_sq, u, &d2)
                t_del[u] = now
                mode[u] = 1
                dist[u] = sqrt(d2)
                server[u] = j
                delivered[u] = 1
                pending[u] = 0
                m = _collect_pending(xs, ys, pending, bstart, bids, nx, ny,
                                     xmin, ymin, cell, r_sq, u, buf)
                for k in range(m):
                    if cas_size >= cas_cap:
                        cas_cap *= 2
                        cas_t_arr = np.resize(cas_t_arr, cas_cap)
                        cas_k_arr = np.resize(cas_k_arr, cas_cap)
                        cas_i_arr = np.resize(cas_i_arr, cas_cap)
                        cas_t = cas_t_arr
                        cas_k = cas_k_arr
                        cas_i = cas_i_arr
                    _heap_push(cas_t, cas_k, cas_i, &cas_size, deadline[buf[k]], 0, buf[k])

    return t_del_arr, mode_arr, dist_arr, server_arr
