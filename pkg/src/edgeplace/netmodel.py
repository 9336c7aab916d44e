"""Ground-truth delay physics, vehicle-to-edge association, resource accounting.

Everything here is a pure function of immutable inputs.  ``CLOUD`` marks
requests served by the remote cloud because the service has no edge
instance anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .scenario import DelayModelParams, EdgeNode, ServiceSpec

CLOUD = 0  # sentinel edge id for the cloud fallback


@dataclass
class PlacementAction:
    """Which edge nodes host instances of which services."""

    hosts: dict[int, set[int]]  # service_id -> set of edge_ids

    @classmethod
    def empty(cls, service_ids: Sequence[int]) -> "PlacementAction":
        return cls({int(s): set() for s in service_ids})

    def copy(self) -> "PlacementAction":
        return PlacementAction({s: set(e) for s, e in self.hosts.items()})

    def instance_count(self) -> int:
        return sum(len(e) for e in self.hosts.values())

    def as_matrix(self, num_services: int, num_edges: int) -> np.ndarray:
        """Binary [S, E] encoding (service s at row s-1, edge e at col e-1)."""
        m = np.zeros((num_services, num_edges), dtype=np.uint8)
        for s, edges in self.hosts.items():
            for e in edges:
                m[s - 1, e - 1] = 1
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "PlacementAction":
        hosts = {s + 1: {e + 1 for e in np.nonzero(m[s])[0]} for s in range(m.shape[0])}
        return cls(hosts)

    def __eq__(self, other) -> bool:
        return isinstance(other, PlacementAction) and self.hosts == other.hosts


@dataclass(frozen=True)
class DelayObservation:
    """One vehicle's ground-truth delay for one request."""

    vehicle_id: int
    service_id: int
    edge_id: int  # CLOUD when served by the cloud
    true_delay: float
    time: int


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def associate(request, placement: PlacementAction, edges: Sequence[EdgeNode]) -> int:
    """Nearest hosting edge for the request, or CLOUD if the service has none.

    Equidistant ties break to the lowest edge_id.
    """
    hosting = placement.hosts.get(request.service_id, set())
    if not hosting:
        return CLOUD
    best_id, best_d = CLOUD, math.inf
    for e in edges:
        if e.edge_id in hosting:
            d = distance(request.location, e.position)
            if d < best_d:
                best_id, best_d = e.edge_id, d
    return best_id


def compute_delay(request, serving: int, edges: Sequence[EdgeNode],
                  params: DelayModelParams) -> float:
    """Linear distance-delay for edge service; flat fallback for the cloud."""
    if serving == CLOUD:
        return params.cloud_fallback_delay
    edge = edges[serving - 1]
    assert edge.edge_id == serving
    return params.proc_delay + params.per_meter_delay * distance(request.location,
                                                                 edge.position)


def utilization(placement: PlacementAction, services: Sequence[ServiceSpec],
                edges: Sequence[EdgeNode]) -> dict[int, float]:
    """Per-edge fraction of capacity consumed by hosted instances (>1 = infeasible)."""
    demand = {s.service_id: s.resource_req for s in services}
    util = {}
    for e in edges:
        load = sum(demand[s] for s, hosted in sorted(placement.hosts.items())
                   if e.edge_id in hosted)
        util[e.edge_id] = load / e.capacity
    return util


def edge_position_array(edges: Sequence[EdgeNode]) -> np.ndarray:
    return np.array([e.position for e in edges], dtype=np.float64)


def distance_matrix(locations: np.ndarray, edges: Sequence[EdgeNode]) -> np.ndarray:
    """[V, E] Euclidean distances from request locations to edge positions."""
    pos = edge_position_array(edges)
    diff = locations[:, None, :] - pos[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def associate_batch(dist: np.ndarray, service_idx: np.ndarray,
                    host_matrix: np.ndarray) -> np.ndarray:
    """Vectorized nearest-hosting-edge association.

    dist: [V, E] distances; service_idx: [V] 0-based service index per request;
    host_matrix: [S, E] binary placement.  Returns [V] of 0-based edge indices,
    -1 for cloud.  Ties go to the lowest edge index (argmin behaviour).
    """
    masked = np.where(host_matrix[service_idx].astype(bool), dist, np.inf)
    out = masked.argmin(axis=1)
    out[~host_matrix[service_idx].any(axis=1)] = -1
    return out


def delay_batch(dist: np.ndarray, serving_idx: np.ndarray,
                params: DelayModelParams) -> np.ndarray:
    """Per-request true delays given association results from associate_batch."""
    v = np.arange(dist.shape[0])
    edge_served = serving_idx >= 0
    delays = np.full(dist.shape[0], params.cloud_fallback_delay, dtype=np.float64)
    delays[edge_served] = (params.proc_delay
                           + params.per_meter_delay * dist[v[edge_served],
                                                           serving_idx[edge_served]])
    return delays
