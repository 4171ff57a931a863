"""Session admission and cluster-head mediated routing.

All traffic is relayed through heads: a member hands its packet to its
head, the head forwards it across designated gateways to the next head,
and the destination's head delivers the final hop.  Routes are computed
over the head adjacency graph by breadth-first search, so they minimize
head-to-head hops; blacklisted nodes never appear on them.
"""

from collections import deque

from . import trust
from .errors import NoRoute, RejectedBlacklisted, RejectedUntrusted


def originate_request(world, src: int, dst: int, now: float):
    """Admission check at the head for one transfer request.

    Positive trust is the entry ticket; blacklisted nodes are refused
    regardless.  Returns the requester's trust snapshot used later for
    queue priority.
    """
    if src in world.blacklisted:
        raise RejectedBlacklisted(f"node {src}")
    if dst in world.blacklisted:
        # exclusion is network-wide: outlaws get no service as sinks either
        raise RejectedBlacklisted(f"destination {dst}")
    value = trust.trust_value(world.trust_registry[src])
    if value <= 0:
        raise RejectedUntrusted(f"node {src} trust {value}")
    return value


def drain_order(pending):
    """Serve queued requests by descending requester trust, id breaks ties."""
    return sorted(pending, key=lambda r: (-r[0], r[1], r[2]))


def ch_adjacency(edges):
    adj = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    return adj


def discover_route(world, src: int, dst: int):
    """Minimum head-hop path src's head -> dst's head, with gateways.

    Returns [(ch, gateways_traversed_into_it)], first entry the source
    head with no gateways.  Edges whose gateways are blacklisted have
    already been dropped from the designation map, but re-check anyway so
    a stale map can never route through an outlaw.
    """
    ch_s = world.nodes[src].cluster
    ch_d = world.nodes[dst].cluster
    if ch_s is None:
        raise NoRoute(f"source {src} unclustered")
    if ch_d is None:
        raise NoRoute(f"destination {dst} unclustered")
    if ch_s == ch_d:
        return [(ch_s, ())]

    usable = {pair: gws for pair, gws in world.edges.items()
              if not any(g in world.blacklisted for g in gws)}
    adj = ch_adjacency(usable)
    parent = {ch_s: None}
    queue = deque([ch_s])
    while queue:
        cur = queue.popleft()
        if cur == ch_d:
            break
        for nxt in sorted(adj.get(cur, ())):
            if nxt not in parent:
                parent[nxt] = cur
                queue.append(nxt)
    if ch_d not in parent:
        raise NoRoute(f"no head path {ch_s} -> {ch_d}")

    order = [ch_d]
    while parent[order[-1]] is not None:
        order.append(parent[order[-1]])
    order.reverse()

    path = [(ch_s, ())]
    for prev, cur in zip(order, order[1:]):
        gws = usable[(prev, cur)] if (prev, cur) in usable else tuple(reversed(usable[(cur, prev)]))
        path.append((cur, gws))
    return path


def build_plan(ch_path, src: int, dst: int):
    """Expand a head path into the radio-hop node sequence.

    Returns (plan, segments) where plan is the full id list
    src, head, [gw, gw?, head]..., dst (collapsing duplicates when the
    source or destination is itself a head) and segments lists
    (upstream_idx, downstream_idx) plan positions for every head-to-head
    edge crossed, which is what handover surveillance keys on.
    """
    plan = [src]
    if ch_path[0][0] != src:
        plan.append(ch_path[0][0])
    segments = []
    for ch, gws in ch_path[1:]:
        up = len(plan) - 1
        plan.extend(gws)
        plan.append(ch)
        segments.append((up, len(plan) - 1))
    if plan[-1] != dst:
        plan.append(dst)
    return plan, segments


def ack_plan(plan, segment):
    """Reverse hop sequence for the per-edge ACK: downstream head back up."""
    up, down = segment
    return list(reversed(plan[up:down + 1]))


def tx_time(size_bytes: int, channel_capacity: float) -> float:
    return size_bytes * 8 / channel_capacity


def ack_timeout(size_bytes: int, channel_capacity: float, path_hops: int,
                factor: float = 4.0) -> float:
    """Patience before a missing edge ACK counts as a timeout."""
    return factor * tx_time(size_bytes, channel_capacity) * path_hops
