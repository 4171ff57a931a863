"""Radio propagation, distance estimation and mobility bookkeeping.

Received power follows the simplified Friis model

    recv_power = K * trans_power / dist**q

with a path-loss exponent q in {2, 3, 4} and a constant K folding in
antenna gains and wavelength.  Inverting the same expression gives the
distance estimate a receiver derives from a HELLO whose transmit power
it knows.  Relative mobility between two nodes is the average change of
that estimated distance over consecutive HELLO rounds.
"""

import math
from dataclasses import dataclass, field

from .errors import (
    DegenerateDistance,
    InsufficientSamples,
    InvalidSignal,
    NoNeighbors,
)

# Estimated distances below this are clamped before entering the Friis
# formula: co-located nodes would otherwise yield infinite power.
MIN_DISTANCE_M = 0.1

# Sliding window of HELLO distance samples kept per neighbor.
HELLO_WINDOW = 100


@dataclass
class Position:
    x: float
    y: float

    def distance_to(self, other) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass
class WaypointState:
    """Random-waypoint movement state: where to, how fast, how long parked."""
    target: Position
    speed: float
    pause_remaining: float = 0.0


@dataclass
class RadioParams:
    """Channel model knobs shared by all nodes."""
    k: float = 1.0
    q: int = 2
    radio_range: float = 75.0       # meters
    recv_power_floor: float = 1e-4  # mW, receiver sensitivity

    def __post_init__(self):
        if self.q not in (2, 3, 4):
            raise ValueError("path-loss exponent q must be 2, 3 or 4")
        if self.k <= 0:
            raise ValueError("K must be positive")


def friis_recv_power(trans_power: float, dist: float, radio: RadioParams) -> float:
    """Received power in the transmitter's units at distance dist."""
    if dist <= 0:
        raise DegenerateDistance(f"dist={dist}, nodes co-located or closer")
    return radio.k * trans_power / dist ** radio.q


def estimate_distance(trans_power: float, recv_power: float, radio: RadioParams) -> float:
    """Distance implied by a received-power reading, inverse of the Friis model."""
    if recv_power <= 0:
        raise InvalidSignal(f"recv_power={recv_power}")
    return (radio.k * trans_power / recv_power) ** (1.0 / radio.q)


def waypoint_step(pos: Position, state: WaypointState, dt: float, area, pause_time: float,
                  speed_range, rng):
    """Advance one random-waypoint step of dt seconds, in place.

    While paused the node only burns pause time; when the pause runs out a
    fresh target and speed are drawn.  Moving nodes travel straight at
    their drawn speed and start a pause on arrival.  A non-positive speed
    with no pause pending pins the node forever (used by static scenarios)
    and draws nothing from rng.
    """
    if state.speed <= 0 and state.pause_remaining <= 0:
        return pos, state
    if state.pause_remaining > 0:
        state.pause_remaining -= dt
        if state.pause_remaining <= 0:
            state.pause_remaining = 0.0
            state.target = Position(rng.uniform(0, area[0]), rng.uniform(0, area[1]))
            state.speed = rng.uniform(speed_range[0], speed_range[1])
        return pos, state
    step = state.speed * dt
    dist = pos.distance_to(state.target)
    if dist <= step:
        pos.x, pos.y = state.target.x, state.target.y
        state.pause_remaining = pause_time
    else:
        pos.x += (state.target.x - pos.x) / dist * step
        pos.y += (state.target.y - pos.y) / dist * step
    return pos, state


@dataclass
class HelloHistory:
    """Sliding window of distance estimates for one neighbor.

    Samples are (index, dist) pairs with indices re-based to 1..n whenever
    the window evicts the oldest entry, so the telescoped mobility formula
    below always sees a contiguous run.
    """
    neighbor_id: int
    window: int = HELLO_WINDOW
    dists: list = field(default_factory=list)

    @property
    def samples(self):
        return [(i + 1, d) for i, d in enumerate(self.dists)]


def record_hello(history: HelloHistory, dist: float) -> HelloHistory:
    """Append one distance sample, evicting the oldest past the window."""
    history.dists.append(dist)
    if len(history.dists) > history.window:
        del history.dists[0]
    return history


def pairwise_mobility(history: HelloHistory, t: float) -> float:
    """Average radial speed of the neighbor over the recorded window.

    Defined as sum(dist_i - dist_{i-1}) / (n * t) over consecutive samples,
    which telescopes to (dist_n - dist_1) / (n * t).  Negative values mean
    the neighbor is approaching.
    """
    n = len(history.dists)
    if n < 2:
        raise InsufficientSamples(f"{n} sample(s) for neighbor {history.neighbor_id}")
    if t <= 0:
        raise ValueError("hello interval must be positive")
    return (history.dists[-1] - history.dists[0]) / (n * t)


def avg_mobility(values) -> float:
    """Arithmetic mean of per-neighbor mobility values."""
    vals = list(values)
    if not vals:
        raise NoNeighbors("no downlink neighbors")
    return sum(vals) / len(vals)
