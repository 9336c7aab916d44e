"""Placement policy: cost function, greedy + local-search optimizer, oracle.

The optimizer minimizes ``alpha * max_e utilization + (1 - alpha) *
max_s (mean_delay_s / threshold_s)`` subject to edge capacities, with at
least one instance per service.  An exhaustive oracle covers instances up
to 3 services x 3 edges for equivalence testing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .netmodel import PlacementAction, distance_matrix
from .scenario import ScenarioConfig


class PlacementInfeasibleError(RuntimeError):
    """No capacity-respecting assignment with one instance per service exists."""


class OracleSizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


ORACLE_MAX_SERVICES = 3
ORACLE_MAX_EDGES = 3
DEFAULT_RESTARTS = 6


@dataclass(frozen=True)
class _Instance:
    """Array view of a (snapshot, scenario) pair for the kernels."""

    dist: np.ndarray   # [V, E]
    svc: np.ndarray    # [V] 0-based service indices
    R: np.ndarray      # [S]
    C: np.ndarray      # [E]
    D: np.ndarray      # [S] delay normalizers (thresholds, or ones in raw mode)
    proc: float
    per_m: float
    cloud: float
    alpha: float

    def cost(self, hosts: np.ndarray) -> float:
        return kernels.placement_cost(hosts, self.dist, self.svc, self.R,
                                      self.C, self.D, self.proc, self.per_m,
                                      self.cloud, self.alpha)


def _build_instance(snapshot, scenario: ScenarioConfig,
                    normalize_delay: bool = True) -> _Instance:
    locations = np.array([r.location for r in snapshot], dtype=np.float64)
    if locations.size == 0:
        locations = locations.reshape(0, 2)
    dist = distance_matrix(locations, scenario.edges)
    svc = np.array([r.service_id - 1 for r in snapshot], dtype=np.int32)
    R = np.array([s.resource_req for s in scenario.services], dtype=np.float64)
    C = np.array([e.capacity for e in scenario.edges], dtype=np.float64)
    if normalize_delay:
        D = np.array([s.delay_threshold for s in scenario.services], dtype=np.float64)
    else:
        D = np.ones(len(scenario.services), dtype=np.float64)
    dm = scenario.delay_model
    return _Instance(dist, svc, R, C, D, dm.proc_delay, dm.per_meter_delay,
                     dm.cloud_fallback_delay, scenario.alpha)


def objective(placement: PlacementAction, snapshot, scenario: ScenarioConfig,
              normalize_delay: bool = True) -> float:
    """Weighted worst-utilization / worst-normalized-delay cost of a placement.

    Delay per service is the mean over the snapshot's requests for it under
    nearest-host association; services absent from the snapshot do not
    contribute.  ``normalize_delay=False`` uses raw milliseconds instead of
    threshold-relative delays.
    """
    inst = _build_instance(snapshot, scenario, normalize_delay)
    hosts = placement.as_matrix(scenario.num_services, scenario.num_edges)
    return inst.cost(hosts)


def _loads_of(hosts: np.ndarray, R: np.ndarray) -> np.ndarray:
    return (hosts.astype(np.float64) * R[:, None]).sum(axis=0)


def check_capacity(placement: PlacementAction, scenario: ScenarioConfig) -> None:
    """Raise if any edge's hosted demand exceeds its capacity (no tolerance)."""
    hosts = placement.as_matrix(scenario.num_services, scenario.num_edges)
    R = np.array([s.resource_req for s in scenario.services], dtype=np.float64)
    loads = _loads_of(hosts, R)
    for i, e in enumerate(scenario.edges):
        if loads[i] > e.capacity:
            raise PlacementInfeasibleError(
                f"edge {e.edge_id} overloaded: {loads[i]} > {e.capacity}")


def _greedy_hosts(inst: _Instance, num_services: int, num_edges: int) -> np.ndarray:
    """One instance per service, placed in descending-demand order on the
    feasible edge with the lowest resulting cost (ties to the lowest edge)."""
    hosts = np.zeros((num_services, num_edges), dtype=np.uint8)
    loads = np.zeros(num_edges)
    svc_order = sorted(range(num_services), key=lambda s: (-inst.R[s], s))
    for s in svc_order:
        best_e, best_cost = -1, np.inf
        for e in range(num_edges):
            if loads[e] + inst.R[s] <= inst.C[e]:
                hosts[s, e] = 1
                c = inst.cost(hosts)
                hosts[s, e] = 0
                if c < best_cost:
                    best_e, best_cost = e, c
        if best_e < 0:
            hosts = _repair(hosts, loads, inst, s)
            loads = _loads_of(hosts, inst.R)
            continue
        hosts[s, best_e] = 1
        loads[best_e] += inst.R[s]
    return hosts


def _packing_hosts(inst: _Instance, num_services: int, num_edges: int) -> np.ndarray:
    """Decreasing-demand packing onto the edge with most headroom, ignoring
    delay; safety net when cost-driven greedy cannot finish."""
    hosts = np.zeros((num_services, num_edges), dtype=np.uint8)
    loads = np.zeros(num_edges)
    for s in sorted(range(num_services), key=lambda s: (-inst.R[s], s)):
        for e in sorted(range(num_edges), key=lambda e: (-(inst.C[e] - loads[e]), e)):
            if loads[e] + inst.R[s] <= inst.C[e]:
                hosts[s, e] = 1
                loads[e] += inst.R[s]
                break
        else:
            raise PlacementInfeasibleError(
                "greedy construction with repair found no capacity-feasible "
                "placement")
    return hosts


def _repair(hosts: np.ndarray, loads: np.ndarray, inst: _Instance,
            s_new: int) -> np.ndarray:
    """Free capacity for service s_new by relocating already-placed instances."""
    num_services, num_edges = hosts.shape
    for e_target in range(num_edges):
        for s_other in range(num_services):
            if not hosts[s_other, e_target]:
                continue
            for e_alt in range(num_edges):
                if e_alt == e_target or hosts[s_other, e_alt]:
                    continue
                if loads[e_alt] + inst.R[s_other] > inst.C[e_alt]:
                    continue
                moved = loads[e_target] - inst.R[s_other]
                if moved + inst.R[s_new] <= inst.C[e_target]:
                    hosts[s_other, e_target] = 0
                    hosts[s_other, e_alt] = 1
                    hosts[s_new, e_target] = 1
                    return hosts
    raise PlacementInfeasibleError(
        "greedy construction with repair found no capacity-feasible placement")


def _random_feasible_hosts(inst: _Instance, num_services: int, num_edges: int,
                           rng: np.random.Generator) -> np.ndarray | None:
    """Random feasible start with a random instance-count profile.

    Multi-instance starts matter: some optima are unreachable from
    one-instance-per-service placements by strictly improving single moves.
    """
    hosts = np.zeros((num_services, num_edges), dtype=np.uint8)
    loads = np.zeros(num_edges)
    for s in rng.permutation(num_services):
        feasible = [e for e in range(num_edges)
                    if loads[e] + inst.R[s] <= inst.C[e]]
        if not feasible:
            return None
        e = int(rng.choice(feasible))
        hosts[s, e] = 1
        loads[e] += inst.R[s]
    for s in range(num_services):
        while rng.random() < 0.4:
            feasible = [e for e in range(num_edges)
                        if not hosts[s, e] and loads[e] + inst.R[s] <= inst.C[e]]
            if not feasible:
                break
            e = int(rng.choice(feasible))
            hosts[s, e] = 1
            loads[e] += inst.R[s]
    return hosts


def _instance_key(hosts: np.ndarray) -> tuple:
    """Tie-break key: fewer instances first, then lexicographic host sets."""
    return (int(hosts.sum()), tuple(int(b) for b in hosts.ravel()))


def optimize_placement(snapshot, scenario: ScenarioConfig,
                       incumbent: PlacementAction | None = None,
                       rng: np.random.Generator | None = None,
                       restarts: int = DEFAULT_RESTARTS,
                       max_rounds: int = 10_000) -> PlacementAction:
    """Capacity-feasible placement with >= 1 instance per service whose cost
    is <= the incumbent's.

    Greedy construction plus steepest-descent local search (relocate, add,
    remove, swap), restarted from seeded random feasible placements; the
    best local optimum wins (ties: fewest instances, then lexicographic).
    Deterministic for a fixed rng state.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    inst = _build_instance(snapshot, scenario)
    S, E = scenario.num_services, scenario.num_edges

    try:
        starts = [_greedy_hosts(inst, S, E)]
    except PlacementInfeasibleError:
        starts = [_packing_hosts(inst, S, E)]
    for _ in range(restarts):
        h = _random_feasible_hosts(inst, S, E, rng)
        if h is not None:
            starts.append(h)

    best_hosts, best_cost = None, np.inf
    for h0 in starts:
        hosts, cost, _ = kernels.local_search(
            h0, inst.dist, inst.svc, inst.R, inst.C, inst.D,
            inst.proc, inst.per_m, inst.cloud, inst.alpha, max_rounds)
        if best_hosts is None or cost < best_cost or (
                cost == best_cost
                and _instance_key(hosts) < _instance_key(best_hosts)):
            best_hosts, best_cost = hosts, cost

    result = PlacementAction.from_matrix(best_hosts)
    if incumbent is not None and all(incumbent.hosts.get(s.service_id)
                                     for s in scenario.services):
        try:
            check_capacity(incumbent, scenario)
        except PlacementInfeasibleError:
            pass
        else:
            inc_hosts = incumbent.as_matrix(S, E)
            if inst.cost(inc_hosts) < best_cost:
                result = incumbent.copy()
    check_capacity(result, scenario)
    return result


def exhaustive_oracle(snapshot, scenario: ScenarioConfig) -> PlacementAction:
    """Global optimum by enumerating all non-empty host sets per service.

    Guarded to S <= 3, E <= 3.  Ties break to the fewest total instances,
    then the lexicographically smallest host matrix.
    """
    S, E = scenario.num_services, scenario.num_edges
    if S > ORACLE_MAX_SERVICES or E > ORACLE_MAX_EDGES:
        raise OracleSizeError(
            f"oracle limited to {ORACLE_MAX_SERVICES} services x "
            f"{ORACLE_MAX_EDGES} edges, got {S} x {E}")
    inst = _build_instance(snapshot, scenario)
    subsets = [np.array(bits, dtype=np.uint8)
               for bits in itertools.product((0, 1), repeat=E)
               if any(bits)]
    best_hosts, best_cost, best_key = None, np.inf, None
    for combo in itertools.product(subsets, repeat=S):
        hosts = np.stack(combo)
        if (_loads_of(hosts, inst.R) > inst.C).any():
            continue
        cost = inst.cost(hosts)
        key = _instance_key(hosts)
        if (best_hosts is None or cost < best_cost
                or (cost == best_cost and key < best_key)):
            best_hosts, best_cost, best_key = hosts, cost, key
    if best_hosts is None:
        raise PlacementInfeasibleError("no capacity-feasible placement exists")
    return PlacementAction.from_matrix(best_hosts)
