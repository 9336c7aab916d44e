"""Static scenario configuration: services, edge nodes, horizon, hyperparameters.

A scenario is loaded once from a YAML file, validated, and shared read-only
by every run of an experiment.  ``paper_defaults()`` builds the stock
8-service / 6-edge / 900-tick setup without touching the filesystem.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import IO

import yaml


class ConfigError(ValueError):
    """Raised when a config file cannot be parsed into a valid scenario."""


@dataclass(frozen=True)
class ServiceSpec:
    """One of the S service types a vehicle can request."""

    service_id: int
    resource_req: float      # resource units consumed by one instance
    delay_threshold: float   # maximum acceptable delay, ms


@dataclass(frozen=True)
class EdgeNode:
    """An eNB-attached edge server."""

    edge_id: int
    position: tuple[float, float]  # metres within the area
    capacity: float                # resource units


@dataclass(frozen=True)
class DelayModelParams:
    """Linear distance-delay model; cloud fallback is a flat penalty.

    Defaults put nearest-edge delays at roughly 3-9 ms on the stock grid and
    far-edge delays above the service thresholds, so a stale placement is
    visibly bad while a fresh one is comfortably healthy.
    """

    proc_delay: float = 1.0            # ms
    per_meter_delay: float = 0.002     # ms per metre of vehicle-edge distance
    cloud_fallback_delay: float = 50.0  # ms when a service has no instance


@dataclass(frozen=True)
class TrainingConfig:
    """Critic network and training-loop hyperparameters."""

    batch_size: int = 16
    replay_capacity: int = 200
    train_period_mean: int = 10        # mean ticks between training events
    hidden_layers: tuple[int, ...] = (64, 64)
    learning_rate: float = 0.2
    quality_scale: float = 20.0        # ms scale of the delay->quality mapping
    reopt_threshold: float = 0.5       # re-optimize when quality drops below
    bootstrap_gamma: float = 0.0       # 0 disables the discounted max-Q term


@dataclass(frozen=True)
class MobilityConfig:
    """Synthetic-trajectory generator parameters (trace runs ignore these)."""

    vehicles: int = 500
    max_speed_mps: float = 15.0    # speed cap, metres per second
    tick_seconds: float = 40.0     # wall-clock seconds represented by one tick
    hotspot_fraction: float = 0.7  # share of waypoints drawn near the hotspot
    hotspot_radius: float = 1500.0  # metres
    hotspot_period: int = 300      # ticks per hotspot revolution
    hotspot_orbit: float = 3000.0  # metres, orbit radius around area centre


@dataclass(frozen=True)
class AttackConfig:
    """Sybil reward-poisoning attack parameters."""

    enabled: bool = False
    proportion: float = 0.0                      # fraction of vehicles compromised
    mode: str = "any"                            # "any" | "selective"
    selective_services: tuple[int, ...] = (1, 2, 3, 4)
    fake_delays: tuple[float, ...] = (3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0)


@dataclass(frozen=True)
class ScenarioConfig:
    services: tuple[ServiceSpec, ...]
    edges: tuple[EdgeNode, ...]
    horizon: int
    area_size: tuple[float, float]   # metres x metres
    alpha: float                     # utilization-vs-delay weight in [0, 1]
    delay_model: DelayModelParams
    training: TrainingConfig
    attack: AttackConfig
    mobility: MobilityConfig
    seed: int

    @property
    def num_services(self) -> int:
        return len(self.services)

    @property
    def num_edges(self) -> int:
        return len(self.edges)


# Stock values: 8 services, 6 edges, 900 ticks over a 10x10 km area.
DEFAULT_RESOURCE_REQS = (5, 10, 15, 20, 25, 30, 35, 40)
DEFAULT_DELAY_THRESHOLDS = (14, 16, 18, 20, 22, 24, 26, 28)
DEFAULT_CAPACITIES = (60, 70, 80, 90, 100, 100)
DEFAULT_AREA = (10_000.0, 10_000.0)
DEFAULT_HORIZON = 900
DEFAULT_ALPHA = 0.5


def default_edge_positions(n: int, area: tuple[float, float]) -> list[tuple[float, float]]:
    """Grid of cell centres covering the area (2 rows x 3 columns for n=6)."""
    rows = max(1, int(math.floor(math.sqrt(n))))
    cols = int(math.ceil(n / rows))
    w, h = area
    positions = []
    for i in range(n):
        r, c = divmod(i, cols)
        positions.append((w * (2 * c + 1) / (2 * cols), h * (2 * r + 1) / (2 * rows)))
    return positions


def paper_defaults(**overrides) -> ScenarioConfig:
    """The stock scenario; keyword overrides replace top-level fields."""
    services = tuple(
        ServiceSpec(i + 1, float(r), float(d))
        for i, (r, d) in enumerate(zip(DEFAULT_RESOURCE_REQS, DEFAULT_DELAY_THRESHOLDS))
    )
    positions = default_edge_positions(len(DEFAULT_CAPACITIES), DEFAULT_AREA)
    edges = tuple(
        EdgeNode(i + 1, positions[i], float(c)) for i, c in enumerate(DEFAULT_CAPACITIES)
    )
    cfg = ScenarioConfig(
        services=services,
        edges=edges,
        horizon=DEFAULT_HORIZON,
        area_size=DEFAULT_AREA,
        alpha=DEFAULT_ALPHA,
        delay_model=DelayModelParams(),
        training=TrainingConfig(),
        attack=AttackConfig(),
        mobility=MobilityConfig(),
        seed=1,
    )
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _require(mapping: dict, key: str, section: str):
    if key not in mapping:
        raise ConfigError(f"missing required field '{section}.{key}'"
                          if section else f"missing required field '{key}'")
    return mapping[key]


def _positive_list(raw, name: str) -> list[float]:
    try:
        vals = [float(v) for v in raw]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{name}' must be a list of numbers") from exc
    return vals


def load_config(path_or_file: str | IO[str]) -> ScenarioConfig:
    """Parse a YAML scenario file into a fully populated ScenarioConfig.

    Absent optional sections fall back to the stock defaults.  Parse and
    schema problems raise ConfigError naming the offending field; I/O
    problems propagate as OSError.
    """
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
        src = getattr(path_or_file, "name", "<stream>")
    else:
        with open(path_or_file, "r", encoding="utf-8") as fh:
            text = fh.read()
        src = str(path_or_file)
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"cannot parse {src}{loc}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{src}: top level must be a mapping")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ScenarioConfig:
    base = paper_defaults()

    svc_raw = raw.get("services")
    if svc_raw is None:
        services = base.services
    else:
        reqs = _positive_list(_require(svc_raw, "resource_req", "services"),
                              "services.resource_req")
        thresholds = _positive_list(_require(svc_raw, "delay_threshold", "services"),
                                    "services.delay_threshold")
        if len(reqs) != len(thresholds):
            raise ConfigError("services.resource_req and services.delay_threshold "
                              "must have the same length")
        services = tuple(ServiceSpec(i + 1, r, d)
                         for i, (r, d) in enumerate(zip(reqs, thresholds)))

    area_raw = raw.get("area_size", list(base.area_size))
    try:
        area = (float(area_raw[0]), float(area_raw[1]))
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError("field 'area_size' must be [width_m, height_m]") from exc

    edge_raw = raw.get("edges")
    if edge_raw is None:
        edges = base.edges
    else:
        caps = _positive_list(_require(edge_raw, "capacity", "edges"), "edges.capacity")
        pos_raw = edge_raw.get("position")
        if pos_raw is None:
            positions = default_edge_positions(len(caps), area)
        else:
            if len(pos_raw) != len(caps):
                raise ConfigError("edges.position must match edges.capacity in length")
            try:
                positions = [(float(p[0]), float(p[1])) for p in pos_raw]
            except (TypeError, ValueError, IndexError) as exc:
                raise ConfigError("edges.position entries must be [x_m, y_m]") from exc
        edges = tuple(EdgeNode(i + 1, positions[i], c) for i, c in enumerate(caps))

    def section(name: str, factory, current):
        sub = raw.get(name)
        if sub is None:
            return current
        if not isinstance(sub, dict):
            raise ConfigError(f"section '{name}' must be a mapping")
        known = {f.name for f in dataclasses.fields(factory)}
        unknown = set(sub) - known
        if unknown:
            raise ConfigError(f"unknown field '{name}.{sorted(unknown)[0]}'")
        coerced = {}
        for f in dataclasses.fields(factory):
            if f.name not in sub:
                continue
            v = sub[f.name]
            if isinstance(getattr(current, f.name), tuple) and isinstance(v, list):
                v = tuple(v)
            coerced[f.name] = v
        try:
            return dataclasses.replace(current, **coerced)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value in section '{name}': {exc}") from exc

    cfg = ScenarioConfig(
        services=services,
        edges=edges,
        horizon=int(raw.get("horizon", base.horizon)),
        area_size=area,
        alpha=float(raw.get("alpha", base.alpha)),
        delay_model=section("delay_model", DelayModelParams, base.delay_model),
        training=section("training", TrainingConfig, base.training),
        attack=section("attack", AttackConfig, base.attack),
        mobility=section("mobility", MobilityConfig, base.mobility),
        seed=int(raw.get("seed", base.seed)),
    )
    report = validate_scenario(cfg)
    if report.violations:
        raise ConfigError("invalid scenario: " + "; ".join(report.violations))
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "services": {
            "resource_req": [s.resource_req for s in cfg.services],
            "delay_threshold": [s.delay_threshold for s in cfg.services],
        },
        "edges": {
            "capacity": [e.capacity for e in cfg.edges],
            "position": [list(e.position) for e in cfg.edges],
        },
        "horizon": cfg.horizon,
        "area_size": list(cfg.area_size),
        "alpha": cfg.alpha,
        "delay_model": dataclasses.asdict(cfg.delay_model),
        "training": {k: (list(v) if isinstance(v, tuple) else v)
                     for k, v in dataclasses.asdict(cfg.training).items()},
        "attack": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in dataclasses.asdict(cfg.attack).items()},
        "mobility": dataclasses.asdict(cfg.mobility),
        "seed": cfg.seed,
    }


def serialize_config(cfg: ScenarioConfig, path_or_file: str | IO[str] | None = None) -> str:
    """Dump a scenario as YAML; load_config(serialize_config(cfg)) == cfg."""
    text = yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
    if path_or_file is None:
        return text
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_scenario(cfg: ScenarioConfig) -> ValidationReport:
    """Collect every invariant violation; an empty report means runnable."""
    rep = ValidationReport()
    v = rep.violations

    if not cfg.services:
        v.append("at least one service is required")
    if not cfg.edges:
        v.append("at least one edge is required")
    if cfg.horizon < 1:
        v.append(f"horizon must be >= 1, got {cfg.horizon}")
    if not (0.0 <= cfg.alpha <= 1.0):
        v.append(f"alpha out of [0,1]: {cfg.alpha}")
    if cfg.area_size[0] <= 0 or cfg.area_size[1] <= 0:
        v.append(f"area_size must be positive, got {cfg.area_size}")

    ids = [s.service_id for s in cfg.services]
    if ids != list(range(1, len(ids) + 1)):
        v.append("service_ids must be unique and contiguous from 1")
    for s in cfg.services:
        if s.resource_req <= 0:
            v.append(f"service {s.service_id}: resource_req must be > 0")
        if s.delay_threshold <= 0:
            v.append(f"service {s.service_id}: delay_threshold must be > 0")

    eids = [e.edge_id for e in cfg.edges]
    if eids != list(range(1, len(eids) + 1)):
        v.append("edge_ids must be unique and contiguous from 1")
    for e in cfg.edges:
        if e.capacity <= 0:
            v.append(f"edge {e.edge_id}: capacity must be > 0")
        x, y = e.position
        if not (0.0 <= x <= cfg.area_size[0] and 0.0 <= y <= cfg.area_size[1]):
            v.append(f"edge {e.edge_id}: position {e.position} outside area "
                     f"{cfg.area_size}")

    dm = cfg.delay_model
    for name in ("proc_delay", "per_meter_delay", "cloud_fallback_delay"):
        if getattr(dm, name) < 0:
            v.append(f"delay_model.{name} must be >= 0")

    tr = cfg.training
    if tr.batch_size < 1:
        v.append("training.batch_size must be >= 1")
    if tr.replay_capacity < tr.batch_size:
        v.append("training.replay_capacity must be >= batch_size")
    if tr.learning_rate <= 0:
        v.append("training.learning_rate must be > 0")
    if tr.train_period_mean < 1:
        v.append("training.train_period_mean must be >= 1")
    if not (0.0 <= tr.reopt_threshold <= 1.0):
        v.append("training.reopt_threshold must be in [0,1]")
    if tr.quality_scale <= 0:
        v.append("training.quality_scale must be > 0")

    at = cfg.attack
    if not (0.0 <= at.proportion <= 1.0):
        v.append(f"attack.proportion out of [0,1]: {at.proportion}")
    if at.mode not in ("any", "selective"):
        v.append(f"attack.mode must be 'any' or 'selective', got '{at.mode}'")
    if at.enabled and not at.fake_delays:
        v.append("attack.fake_delays must be non-empty when the attack is enabled")
    bad = [s for s in at.selective_services if s not in set(ids)]
    if at.mode == "selective" and bad:
        v.append(f"attack.selective_services outside 1..{len(ids)}: {bad}")

    mob = cfg.mobility
    if mob.vehicles < 0:
        v.append("mobility.vehicles must be >= 0")
    if mob.max_speed_mps < 0 or mob.tick_seconds <= 0:
        v.append("mobility.max_speed_mps must be >= 0 and tick_seconds > 0")

    if cfg.services and cfg.edges:
        total_r = sum(s.resource_req for s in cfg.services)
        total_c = sum(e.capacity for e in cfg.edges)
        if total_r > total_c:
            rep.warnings.append(
                f"total resource demand {total_r} exceeds total capacity "
                f"{total_c}: no feasible single-copy placement")
    return rep
