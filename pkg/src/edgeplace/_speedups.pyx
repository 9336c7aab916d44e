# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled placement kernels: objective evaluation and local search.

Mirrors ``edgeplace._fallback`` exactly: same cost model, same canonical
move order (relocate, add, remove, swap), same strict-improvement
tie-breaking.  Sums here are sequential; the fallback's NumPy reductions
may differ in the last ulp, which is why cross-backend comparisons use a
tolerance while within-backend comparisons are exact.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

BACKEND = "compiled"


cdef void _group(const cnp.int32_t[::1] svc, int S,
                 cnp.int32_t[::1] order, cnp.int32_t[::1] start) noexcept:
    # counting sort by service; request indices stay ascending within a service
    cdef int V = svc.shape[0]
    cdef int v, s
    cdef cnp.int32_t[::1] cnt = np.zeros(S + 1, dtype=np.int32)
    for v in range(V):
        cnt[svc[v] + 1] += 1
    start[0] = 0
    for s in range(S):
        start[s + 1] = start[s] + cnt[s + 1]
        cnt[s + 1] = 0
    for v in range(V):
        s = svc[v]
        order[start[s] + cnt[s + 1]] = v
        cnt[s + 1] += 1


cdef double _service_mean(const cnp.uint8_t[:, ::1] hosts, int s,
                          const double[:, ::1] dist,
                          const cnp.int32_t[::1] order,
                          const cnp.int32_t[::1] start,
                          double proc, double per_m, double cloud) noexcept:
    cdef int E = hosts.shape[1]
    cdef int i, e, v
    cdef int n = start[s + 1] - start[s]
    cdef double acc = 0.0, best
    cdef bint hosted = False
    for e in range(E):
        if hosts[s, e]:
            hosted = True
            break
    if not hosted:
        return cloud
    for i in range(start[s], start[s + 1]):
        v = order[i]
        best = INFINITY
        for e in range(E):
            if hosts[s, e] and dist[v, e] < best:
                best = dist[v, e]
        acc += proc + per_m * best
    return acc / n


cdef double _edge_load(const cnp.uint8_t[:, ::1] hosts, int e,
                       const double[::1] R) noexcept:
    cdef int s
    cdef double acc = 0.0
    for s in range(hosts.shape[0]):
        if hosts[s, e]:
            acc += R[s]
    return acc


cdef double _combine(const double[::1] loads, const double[::1] C,
                     const double[::1] dnorm, bint has_requests,
                     double alpha) noexcept:
    cdef int e, s
    cdef double umax = -INFINITY, dmax = -INFINITY, u
    for e in range(loads.shape[0]):
        u = loads[e] / C[e]
        if u > umax:
            umax = u
    if has_requests:
        for s in range(dnorm.shape[0]):
            if dnorm[s] > dmax:
                dmax = dnorm[s]
    else:
        dmax = 0.0
    return alpha * umax + (1.0 - alpha) * dmax


def placement_cost(hosts_in, dist_in, svc_in, R_in, C_in, D_in,
                   double proc, double per_m, double cloud, double alpha):
    """Objective value of a placement against a request snapshot."""
    cdef cnp.uint8_t[:, ::1] hosts = np.ascontiguousarray(hosts_in, dtype=np.uint8)
    cdef double[:, ::1] dist = np.ascontiguousarray(dist_in, dtype=np.float64)
    cdef cnp.int32_t[::1] svc = np.ascontiguousarray(svc_in, dtype=np.int32)
    cdef double[::1] R = np.ascontiguousarray(R_in, dtype=np.float64)
    cdef double[::1] C = np.ascontiguousarray(C_in, dtype=np.float64)
    cdef double[::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cdef int S = hosts.shape[0]
    cdef int V = svc.shape[0]
    cdef cnp.int32_t[::1] order = np.empty(V, dtype=np.int32)
    cdef cnp.int32_t[::1] start = np.empty(S + 1, dtype=np.int32)
    _group(svc, S, order, start)
    cdef double[::1] loads = np.empty(hosts.shape[1], dtype=np.float64)
    cdef double[::1] dnorm = np.full(S, -INFINITY, dtype=np.float64)
    cdef int s, e
    cdef bint has_requests = False
    for e in range(hosts.shape[1]):
        loads[e] = _edge_load(hosts, e, R)
    for s in range(S):
        if start[s + 1] > start[s]:
            has_requests = True
            dnorm[s] = _service_mean(hosts, s, dist, order, start,
                                     proc, per_m, cloud) / D[s]
    return _combine(loads, C, dnorm, has_requests, alpha)


def local_search(hosts_in, dist_in, svc_in, R_in, C_in, D_in,
                 double proc, double per_m, double cloud, double alpha,
                 int max_rounds=10_000):
    """Steepest-descent local search; see the fallback for the contract."""
    hosts_arr = np.ascontiguousarray(hosts_in, dtype=np.uint8).copy()
    cdef cnp.uint8_t[:, ::1] hosts = hosts_arr
    cdef double[:, ::1] dist = np.ascontiguousarray(dist_in, dtype=np.float64)
    cdef cnp.int32_t[::1] svc = np.ascontiguousarray(svc_in, dtype=np.int32)
    cdef double[::1] R = np.ascontiguousarray(R_in, dtype=np.float64)
    cdef double[::1] C = np.ascontiguousarray(C_in, dtype=np.float64)
    cdef double[::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cdef int S = hosts.shape[0]
    cdef int E = hosts.shape[1]
    cdef int V = svc.shape[0]

    cdef cnp.int32_t[::1] order = np.empty(V, dtype=np.int32)
    cdef cnp.int32_t[::1] start = np.empty(S + 1, dtype=np.int32)
    _group(svc, S, order, start)

    cdef double[::1] loads = np.empty(E, dtype=np.float64)
    cdef double[::1] dnorm = np.full(S, -INFINITY, dtype=np.float64)
    cdef double[::1] cand_loads = np.empty(E, dtype=np.float64)
    cdef double[::1] cand_dnorm = np.empty(S, dtype=np.float64)
    cdef int s, e, s1, s2, e1, e2, i, rounds
    cdef bint has_requests = False

    for e in range(E):
        loads[e] = _edge_load(hosts, e, R)
    for s in range(S):
        if start[s + 1] > start[s]:
            has_requests = True
            dnorm[s] = _service_mean(hosts, s, dist, order, start,
                                     proc, per_m, cloud) / D[s]
    cdef double cost = _combine(loads, C, dnorm, has_requests, alpha)

    # best move: kind 0=relocate(s,e_from,e_to) 1=add(s,e) 2=remove(s,e)
    #            3=swap(s1,e1,s2,e2)
    cdef double best_cost, cand
    cdef int bk, b0, b1, b2, b3
    cdef int ninst

    cdef double candidate_cost
    rounds = 0
    while rounds < max_rounds:
        best_cost = cost
        bk = -1
        b0 = b1 = b2 = b3 = 0

        # relocates
        for s in range(S):
            for e1 in range(E):
                if not hosts[s, e1]:
                    continue
                for e2 in range(E):
                    if e2 == e1 or hosts[s, e2]:
                        continue
                    if loads[e2] + R[s] <= C[e2]:
                        hosts[s, e1] = 0
                        hosts[s, e2] = 1
                        cand = _delta_cost(hosts, dist, order, start, R, C, D,
                                           loads, dnorm, cand_loads, cand_dnorm,
                                           has_requests, proc, per_m, cloud,
                                           alpha, s, -1, e1, e2)
                        hosts[s, e1] = 1
                        hosts[s, e2] = 0
                        if cand < best_cost:
                            best_cost = cand
                            bk = 0
                            b0 = s
                            b1 = e1
                            b2 = e2
        # adds
        for s in range(S):
            for e1 in range(E):
                if not hosts[s, e1] and loads[e1] + R[s] <= C[e1]:
                    hosts[s, e1] = 1
                    cand = _delta_cost(hosts, dist, order, start, R, C, D,
                                       loads, dnorm, cand_loads, cand_dnorm,
                                       has_requests, proc, per_m, cloud,
                                       alpha, s, -1, e1, -1)
                    hosts[s, e1] = 0
                    if cand < best_cost:
                        best_cost = cand
                        bk = 1
                        b0 = s
                        b1 = e1
        # removes
        for s in range(S):
            ninst = 0
            for e1 in range(E):
                if hosts[s, e1]:
                    ninst += 1
            if ninst > 1:
                for e1 in range(E):
                    if hosts[s, e1]:
                        hosts[s, e1] = 0
                        cand = _delta_cost(hosts, dist, order, start, R, C, D,
                                           loads, dnorm, cand_loads, cand_dnorm,
                                           has_requests, proc, per_m, cloud,
                                           alpha, s, -1, e1, -1)
                        hosts[s, e1] = 1
                        if cand < best_cost:
                            best_cost = cand
                            bk = 2
                            b0 = s
                            b1 = e1
        # swaps
        for s1 in range(S):
            for s2 in range(s1 + 1, S):
                for e1 in range(E):
                    if not (hosts[s1, e1] and not hosts[s2, e1]):
                        continue
                    for e2 in range(E):
                        if e2 == e1 or not (hosts[s2, e2] and not hosts[s1, e2]):
                            continue
                        if (loads[e1] - R[s1] + R[s2] <= C[e1]
                                and loads[e2] - R[s2] + R[s1] <= C[e2]):
                            hosts[s1, e1] = 0
                            hosts[s1, e2] = 1
                            hosts[s2, e2] = 0
                            hosts[s2, e1] = 1
                            cand = _delta_cost(hosts, dist, order, start, R, C,
                                               D, loads, dnorm, cand_loads,
                                               cand_dnorm, has_requests, proc,
                                               per_m, cloud, alpha,
                                               s1, s2, e1, e2)
                            hosts[s1, e1] = 1
                            hosts[s1, e2] = 0
                            hosts[s2, e2] = 1
                            hosts[s2, e1] = 0
                            if cand < best_cost:
                                best_cost = cand
                                bk = 3
                                b0 = s1
                                b1 = e1
                                b2 = s2
                                b3 = e2
        if bk == -1:
            break
        if bk == 0:
            hosts[b0, b1] = 0
            hosts[b0, b2] = 1
        elif bk == 1:
            hosts[b0, b1] = 1
        elif bk == 2:
            hosts[b0, b1] = 0
        else:
            hosts[b0, b1] = 0
            hosts[b0, b3] = 1
            hosts[b2, b3] = 0
            hosts[b2, b1] = 1
        for e in range(E):
            loads[e] = _edge_load(hosts, e, R)
        for s in range(S):
            if start[s + 1] > start[s]:
                dnorm[s] = _service_mean(hosts, s, dist, order, start,
                                         proc, per_m, cloud) / D[s]
        cost = best_cost
        rounds += 1

    return hosts_arr, cost, rounds


cdef double _delta_cost(const cnp.uint8_t[:, ::1] hosts,
                        const double[:, ::1] dist,
                        const cnp.int32_t[::1] order,
                        const cnp.int32_t[::1] start,
                        const double[::1] R, const double[::1] C,
                        const double[::1] D,
                        const double[::1] loads, const double[::1] dnorm,
                        double[::1] cand_loads, double[::1] cand_dnorm,
                        bint has_requests,
                        double proc, double per_m, double cloud, double alpha,
                        int sa, int sb, int ea, int eb) noexcept:
    """Cost of the current ``hosts`` (already holding the candidate bits).

    Services sa (and sb if >= 0) and edges ea (and eb if >= 0) are the ones
    whose cached terms must be recomputed; everything else is reused.
    """
    cdef int S = hosts.shape[0]
    cdef int E = hosts.shape[1]
    cdef int s, e
    for e in range(E):
        cand_loads[e] = loads[e]
    cand_loads[ea] = _edge_load(hosts, ea, R)
    if eb >= 0:
        cand_loads[eb] = _edge_load(hosts, eb, R)
    for s in range(S):
        cand_dnorm[s] = dnorm[s]
    if start[sa + 1] > start[sa]:
        cand_dnorm[sa] = _service_mean(hosts, sa, dist, order, start,
                                       proc, per_m, cloud) / D[sa]
    if sb >= 0 and start[sb + 1] > start[sb]:
        cand_dnorm[sb] = _service_mean(hosts, sb, dist, order, start,
                                       proc, per_m, cloud) / D[sb]
    return _combine(cand_loads, C, cand_dnorm, has_requests, alpha)
