"""Pure NumPy implementation of the placement kernels.

Selected by ``edgeplace.kernels`` when the compiled extension is missing or
``EDGEPLACE_PURE=1``.  The compiled version implements the same algorithm
with the same move ordering and tie-breaking; within one backend the cost
of a placement is bit-stable no matter which code path produced it.

Cost model (shared contract with ``_speedups``):

    cost = alpha * max_e(load_e / C_e)
         + (1 - alpha) * max_s(dbar_s / D_s)   over services with requests

where dbar_s is the mean over the service's requests of
``proc + per_m * min_{e in hosts(s)} dist[v, e]`` (or ``cloud`` when the
service has no instance).  Services without requests in the snapshot are
excluded from the delay term.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _group_requests(svc: np.ndarray, num_services: int) -> list[np.ndarray]:
    return [np.nonzero(svc == s)[0] for s in range(num_services)]


def _loads(hosts: np.ndarray, R: np.ndarray) -> np.ndarray:
    return np.array([float(np.sum(hosts[:, e].astype(np.float64) * R))
                     for e in range(hosts.shape[1])])


def _service_mean_delay(dist_s: np.ndarray, host_row: np.ndarray,
                        proc: float, per_m: float, cloud: float) -> float:
    """Mean delay of one service's requests under its current host set."""
    if dist_s.shape[0] == 0:
        return np.nan
    edges = np.nonzero(host_row)[0]
    if edges.size == 0:
        return cloud
    best = dist_s[:, edges].min(axis=1)
    return float(np.sum(proc + per_m * best) / dist_s.shape[0])


def placement_cost(hosts: np.ndarray, dist: np.ndarray, svc: np.ndarray,
                   R: np.ndarray, C: np.ndarray, D: np.ndarray,
                   proc: float, per_m: float, cloud: float,
                   alpha: float) -> float:
    """Objective value of a placement against a request snapshot."""
    S = hosts.shape[0]
    util = _loads(hosts, R) / C
    umax = float(util.max()) if util.size else 0.0
    groups = _group_requests(svc, S)
    dmax = -np.inf
    any_requests = False
    for s in range(S):
        if groups[s].size == 0:
            continue
        any_requests = True
        dbar = _service_mean_delay(dist[groups[s]], hosts[s], proc, per_m, cloud)
        dmax = max(dmax, dbar / D[s])
    if not any_requests:
        dmax = 0.0
    return alpha * umax + (1.0 - alpha) * dmax


class _SearchState:
    """Cached per-service delay terms and per-edge loads for delta evaluation."""

    def __init__(self, hosts, dist, svc, R, C, D, proc, per_m, cloud, alpha):
        self.hosts = hosts.astype(np.uint8).copy()
        self.R, self.C, self.D = R, C, D
        self.proc, self.per_m, self.cloud, self.alpha = proc, per_m, cloud, alpha
        S = hosts.shape[0]
        self.groups = _group_requests(svc, S)
        self.dist_s = [dist[g] for g in self.groups]
        self.dnorm = np.full(S, -np.inf)
        for s in range(S):
            if self.groups[s].size:
                self.dnorm[s] = (_service_mean_delay(self.dist_s[s], self.hosts[s],
                                                     proc, per_m, cloud) / D[s])
        self.loads = _loads(self.hosts, R)
        self.has_requests = any(g.size for g in self.groups)

    def cost_from(self, loads: np.ndarray, dnorm: np.ndarray) -> float:
        umax = float((loads / self.C).max())
        dmax = float(dnorm.max()) if self.has_requests else 0.0
        return self.alpha * umax + (1.0 - self.alpha) * dmax

    @property
    def cost(self) -> float:
        return self.cost_from(self.loads, self.dnorm)

    def candidate(self, changes: list[tuple[int, int, int]]) -> float:
        """Cost after applying (service, edge, new_bit) changes, without mutating."""
        hosts = self.hosts
        originals = [(s, e, int(hosts[s, e])) for s, e, _ in changes]
        for s, e, bit in changes:
            hosts[s, e] = bit
        loads = self.loads.copy()
        for e in sorted({e for _, e, _ in changes}):
            loads[e] = float(np.sum(hosts[:, e].astype(np.float64) * self.R))
        dnorm = self.dnorm.copy()
        for s in sorted({s for s, _, _ in changes}):
            if self.groups[s].size:
                dnorm[s] = (_service_mean_delay(self.dist_s[s], hosts[s],
                                                self.proc, self.per_m, self.cloud)
                            / self.D[s])
        for s, e, bit in originals:
            hosts[s, e] = bit
        return self.cost_from(loads, dnorm)

    def apply(self, changes: list[tuple[int, int, int]]) -> None:
        for s, e, bit in changes:
            self.hosts[s, e] = bit
        for e in sorted({e for _, e, _ in changes}):
            self.loads[e] = float(np.sum(self.hosts[:, e].astype(np.float64) * self.R))
        for s in sorted({s for s, _, _ in changes}):
            if self.groups[s].size:
                self.dnorm[s] = (_service_mean_delay(self.dist_s[s], self.hosts[s],
                                                     self.proc, self.per_m,
                                                     self.cloud) / self.D[s])


def _enumerate_moves(state: _SearchState):
    """Canonical move order: relocates, adds, removes, swaps."""
    hosts, loads = state.hosts, state.loads
    R, C = state.R, state.C
    S, E = hosts.shape
    for s in range(S):
        for e_from in range(E):
            if not hosts[s, e_from]:
                continue
            for e_to in range(E):
                if e_to == e_from or hosts[s, e_to]:
                    continue
                if loads[e_to] + R[s] <= C[e_to]:
                    yield [(s, e_from, 0), (s, e_to, 1)]
    for s in range(S):
        for e in range(E):
            if not hosts[s, e] and loads[e] + R[s] <= C[e]:
                yield [(s, e, 1)]
    for s in range(S):
        if hosts[s].sum() > 1:
            for e in range(E):
                if hosts[s, e]:
                    yield [(s, e, 0)]
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
                        yield [(s1, e1, 0), (s1, e2, 1), (s2, e2, 0), (s2, e1, 1)]


def local_search(hosts: np.ndarray, dist: np.ndarray, svc: np.ndarray,
                 R: np.ndarray, C: np.ndarray, D: np.ndarray,
                 proc: float, per_m: float, cloud: float, alpha: float,
                 max_rounds: int = 10_000):
    """Steepest-descent local search over relocate/add/remove/swap moves.

    Returns (hosts, cost, rounds).  Deterministic: moves are scanned in a
    fixed order and only strictly improving moves are taken, first-best wins.
    """
    state = _SearchState(hosts, dist, svc, R, C, D, proc, per_m, cloud, alpha)
    cost = state.cost
    rounds = 0
    while rounds < max_rounds:
        best_cost, best_move = cost, None
        for move in _enumerate_moves(state):
            cand = state.candidate(move)
            if cand < best_cost:
                best_cost, best_move = cand, move
        if best_move is None:
            break
        state.apply(best_move)
        cost = best_cost
        rounds += 1
    return state.hosts.copy(), cost, rounds
