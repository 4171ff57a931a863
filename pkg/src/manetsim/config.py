"""Simulation configuration and validation."""

from dataclasses import dataclass, field, fields

from .clustering import ElectionWeights
from .detection import DetectionThresholds
from .errors import ConfigError

NODE_COUNT_SWEEP = (20, 40, 60, 80, 100)


@dataclass
class SimConfig:
    """One run's worth of knobs. Defaults follow the reference setup:
    500x500 m field, CBR over 512-byte packets on a 2 Mbps channel,
    random-waypoint motion at 10-30 m/s with 1 s pauses, per-node transmit
    power 300-600 mW, receive power 50-300 mW, 5-10 J batteries, greeting
    beacons every 10 ms.
    """
    node_count: int = 20
    area: tuple = (500.0, 500.0)
    seed: int = 1
    sim_duration: float = 100.0

    # radio
    channel_capacity: float = 2_000_000.0   # bits per second
    radio_range: float = 75.0               # meters
    recv_power_floor: float = 1e-4          # mW
    friis_k: float = 1.0
    path_loss_q: int = 2
    tx_power_range: tuple = (300.0, 600.0)  # mW, drawn once per node
    rx_power_range: tuple = (50.0, 300.0)   # mW, drawn once per node

    # mobility
    speed_range: tuple = (10.0, 30.0)       # m/s; (0, 0) pins nodes in place
    pause_time: float = 1.0
    topology_interval: float = 0.1          # movement + membership upkeep cadence

    # packets
    packet_size: int = 512
    hello_size: int = 32
    control_size: int = 32
    hello_interval: float = 0.01
    hello_window: int = 100

    # energy
    initial_energy_range: tuple = (5.0, 10.0)   # joules
    energy_overrides: dict = field(default_factory=dict)

    # traffic: CBR sessions of session_packets DATA packets each,
    # back to back per source until the clock or the trust runs out
    cbr_interval: float = 0.25
    source_fraction: float = 0.1
    session_packets: int = 20
    sessions_per_source: int | None = None   # None = until sim end
    traffic_start: float = 1.0
    traffic: list | None = None              # explicit [(src, dst), ...]

    # adversaries
    malicious_fraction: float = 0.0
    attack: str = "black_hole"
    adversaries: list = field(default_factory=list)  # explicit placement dicts
    slander_interval: float = 0.5
    spoof_interval: float = 0.5
    flood_interval: float = 0.1
    flood_rate: float = 100.0
    grey_drop_rate: float = 1.0

    # detection
    detection_enabled: bool = True
    ack_timeout_factor: float = 4.0
    accusation_threshold: int = 3
    energy_high_threshold: float = 0.5
    velocity_low_threshold: float = 5.0
    nuisance_limit: int = 5
    blacklist_limit: float = 0.1

    # election
    weight_energy: float = 0.25
    weight_trust: float = 0.25
    weight_mobility: float = 0.25
    weight_dnc: float = 0.25

    # explicit placement for bench scenarios: [(x, y)] per node id
    positions: list | None = None

    def thresholds(self) -> DetectionThresholds:
        return DetectionThresholds(
            accusation_threshold=self.accusation_threshold,
            energy_high_threshold=self.energy_high_threshold,
            velocity_low_threshold=self.velocity_low_threshold,
            nuisance_limit=self.nuisance_limit,
            blacklist_limit=self.blacklist_limit)

    def weights(self) -> ElectionWeights:
        return ElectionWeights(self.weight_energy, self.weight_trust,
                               self.weight_mobility, self.weight_dnc)

    def validate(self):
        def positive(name):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")

        if self.node_count < 1:
            raise ConfigError("node_count must be at least 1")
        for name in ("sim_duration", "channel_capacity", "radio_range",
                     "hello_interval", "topology_interval", "cbr_interval",
                     "packet_size", "hello_size", "control_size",
                     "ack_timeout_factor"):
            positive(name)
        if self.path_loss_q not in (2, 3, 4):
            raise ConfigError("path_loss_q must be 2, 3 or 4")
        for name in ("tx_power_range", "rx_power_range", "speed_range",
                     "initial_energy_range", "area"):
            lo, hi = getattr(self, name)
            if lo > hi or hi < 0:
                raise ConfigError(f"{name} must be an ordered non-negative range")
        if self.initial_energy_range[1] <= 0:
            raise ConfigError("initial_energy_range must allow positive energy")
        if not 0 <= self.malicious_fraction <= 1:
            raise ConfigError("malicious_fraction must be within [0, 1]")
        if not 0 <= self.source_fraction <= 1:
            raise ConfigError("source_fraction must be within [0, 1]")
        if self.session_packets < 1:
            raise ConfigError("session_packets must be at least 1")
        if self.accusation_threshold < 1:
            raise ConfigError("accusation_threshold must be at least 1")
        if self.positions is not None and len(self.positions) != self.node_count:
            raise ConfigError("positions must list one (x, y) per node")
        try:
            self.weights()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self


CONFIG_FIELDS = tuple(f.name for f in fields(SimConfig))
