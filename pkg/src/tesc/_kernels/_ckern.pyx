# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: bounded BFS variants and the pairwise concordance loops.

Same contracts as ``_pykern``; see that module for the epoch-stamp protocol.
Nodes within one BFS level are emitted in adjacency order here.
"""

import numpy as np


def bfs_ball(const long long[::1] indptr, const int[::1] indices, int source, int h,
             unsigned int[::1] stamp, int[::1] queue, unsigned int epoch):
    cdef Py_ssize_t head = 0, tail = 0, level_end, k
    cdef int v, u, depth = 0
    with nogil:
        stamp[source] = epoch
        queue[tail] = source
        tail += 1
        level_end = tail
        while depth < h and head < tail:
            while head < level_end:
                v = queue[head]
                head += 1
                for k in range(indptr[v], indptr[v + 1]):
                    u = indices[k]
                    if stamp[u] != epoch:
                        stamp[u] = epoch
                        queue[tail] = u
                        tail += 1
            depth += 1
            level_end = tail
    return tail


def bfs_ball_levels(const long long[::1] indptr, const int[::1] indices, int source, int h,
                    unsigned int[::1] stamp, int[::1] queue, unsigned int epoch,
                    long long[::1] cum):
    cdef Py_ssize_t head = 0, tail = 0, level_end, k
    cdef int v, u, depth = 0
    with nogil:
        stamp[source] = epoch
        queue[tail] = source
        tail += 1
        cum[0] = 1
        level_end = tail
        while depth < h:
            if head == tail:
                while depth < h:
                    depth += 1
                    cum[depth] = tail
                break
            while head < level_end:
                v = queue[head]
                head += 1
                for k in range(indptr[v], indptr[v + 1]):
                    u = indices[k]
                    if stamp[u] != epoch:
                        stamp[u] = epoch
                        queue[tail] = u
                        tail += 1
            depth += 1
            cum[depth] = tail
            level_end = tail
    return tail


def bfs_multi(const long long[::1] indptr, const int[::1] indices, const int[::1] sources,
              int h, unsigned int[::1] stamp, int[::1] queue, unsigned int epoch):
    cdef Py_ssize_t head = 0, tail = 0, level_end, k, i
    cdef int v, u, depth = 0
    with nogil:
        for i in range(sources.shape[0]):
            v = sources[i]
            if stamp[v] != epoch:
                stamp[v] = epoch
                queue[tail] = v
                tail += 1
        level_end = tail
        while depth < h and head < tail:
            while head < level_end:
                v = queue[head]
                head += 1
                for k in range(indptr[v], indptr[v + 1]):
                    u = indices[k]
                    if stamp[u] != epoch:
                        stamp[u] = epoch
                        queue[tail] = u
                        tail += 1
            depth += 1
            level_end = tail
    return tail


def vicinity_size_table(const long long[::1] indptr, const int[::1] indices, int h_max,
                        unsigned int[:, ::1] out):
    cdef Py_ssize_t node_count = indptr.shape[0] - 1
    cdef unsigned int[::1] stamp = np.zeros(node_count, dtype=np.uint32)
    cdef int[::1] queue = np.empty(node_count, dtype=np.int32)
    cdef Py_ssize_t head, tail, level_end, k
    cdef int v, u, depth, src
    cdef unsigned int epoch
    with nogil:
        for src in range(node_count):
            epoch = <unsigned int> (src + 1)
            head = 0
            tail = 0
            depth = 0
            stamp[src] = epoch
            queue[tail] = src
            tail += 1
            level_end = tail
            while depth < h_max:
                if head == tail:
                    while depth < h_max:
                        out[depth, src] = <unsigned int> tail
                        depth += 1
                    break
                while head < level_end:
                    v = queue[head]
                    head += 1
                    for k in range(indptr[v], indptr[v + 1]):
                        u = indices[k]
                        if stamp[u] != epoch:
                            stamp[u] = epoch
                            queue[tail] = u
                            tail += 1
                out[depth, src] = <unsigned int> tail
                depth += 1
                level_end = tail


def density_pass(const long long[::1] indptr, const int[::1] indices, const int[::1] nodes,
                 int h, const unsigned char[::1] mask_a, const unsigned char[::1] mask_b,
                 const unsigned char[::1] mask_u, long long[:, ::1] out,
                 unsigned int[::1] stamp, int[::1] queue, unsigned long long epoch):
    cdef Py_ssize_t i, head, tail, level_end, k
    cdef int v, u, depth, src
    cdef unsigned int e
    cdef long long ca, cb, cu
    cdef bint with_u = mask_u.shape[0] > 0
    with nogil:
        for i in range(nodes.shape[0]):
            e = <unsigned int> epoch
            epoch += 1
            src = nodes[i]
            head = 0
            tail = 0
            depth = 0
            stamp[src] = e
            queue[tail] = src
            tail += 1
            ca = mask_a[src]
            cb = mask_b[src]
            cu = mask_u[src] if with_u else 0
            level_end = tail
            while depth < h and head < tail:
                while head < level_end:
                    v = queue[head]
                    head += 1
                    for k in range(indptr[v], indptr[v + 1]):
                        u = indices[k]
                        if stamp[u] != e:
                            stamp[u] = e
                            queue[tail] = u
                            tail += 1
                            ca += mask_a[u]
                            cb += mask_b[u]
                            if with_u:
                                cu += mask_u[u]
                depth += 1
                level_end = tail
            out[i, 0] = tail
            out[i, 1] = ca
            out[i, 2] = cb
            out[i, 3] = cu
    return epoch


def eligible(const long long[::1] indptr, const int[::1] indices, int source, int h,
             const unsigned char[::1] event_mask, unsigned int[::1] stamp, int[::1] queue,
             unsigned int epoch):
    cdef Py_ssize_t head = 0, tail = 0, level_end, k
    cdef int v, u, depth = 0
    cdef bint hit = False
    with nogil:
        if event_mask[source]:
            hit = True
        else:
            stamp[source] = epoch
            queue[tail] = source
            tail += 1
            level_end = tail
            while depth < h and head < tail and not hit:
                while head < level_end:
                    v = queue[head]
                    head += 1
                    for k in range(indptr[v], indptr[v + 1]):
                        u = indices[k]
                        if stamp[u] != epoch:
                            if event_mask[u]:
                                hit = True
                                break
                            stamp[u] = epoch
                            queue[tail] = u
                            tail += 1
                    if hit:
                        break
                depth += 1
                level_end = tail
    return bool(hit)


cdef inline int _sign(long long x) nogil:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def kendall_s(const long long[::1] num_a, const long long[::1] den_a,
              const long long[::1] num_b, const long long[::1] den_b):
    cdef Py_ssize_t n = num_a.shape[0], i, j
    cdef long long s = 0, xa, xb
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                xa = num_a[i] * den_a[j] - num_a[j] * den_a[i]
                xb = num_b[i] * den_b[j] - num_b[j] * den_b[i]
                s += _sign(xa) * _sign(xb)
    return s


def weighted_sums(const long long[::1] num_a, const long long[::1] den_a,
                  const long long[::1] num_b, const long long[::1] den_b,
                  const double[::1] u):
    cdef Py_ssize_t n = num_a.shape[0], i, j
    cdef long long xa, xb
    cdef double wnum = 0.0, wden = 0.0, uu
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                uu = u[i] * u[j]
                xa = num_a[i] * den_a[j] - num_a[j] * den_a[i]
                xb = num_b[i] * den_b[j] - num_b[j] * den_b[i]
                wnum += _sign(xa) * _sign(xb) * uu
                wden += uu
    return wnum, wden
