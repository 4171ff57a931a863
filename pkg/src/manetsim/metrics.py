"""Run metrics and their re-derivation from the event log.

detection_rate counts planted attackers that committed at least one
punishable act (dropping or tunneling entrusted DATA, spoofing a request,
slandering past the nuisance limit) and reports the percentage of those
that ended up blacklisted.  It is None, not zero, when nothing acted:
a run without attackers has no detection performance to speak of.
"""

import statistics
from dataclasses import dataclass, field


@dataclass
class Metrics:
    node_count: int
    seed: int
    malicious_fraction: float
    attack_kinds: tuple
    detection_rate: float | None
    false_positives: int
    throughput: float | None
    mean_e2e_delay: float | None
    generated: int = 0
    delivered: int = 0
    dropped: dict = field(default_factory=dict)
    expired: int = 0
    sessions_started: int = 0
    sessions_completed: int = 0
    blacklisted: tuple = ()
    planted: tuple = ()
    acted: tuple = ()
    energy_remaining: dict = field(default_factory=dict)
    digest: str = ""


def rate(part: int, whole: int) -> float | None:
    if whole == 0:
        return None
    return 100.0 * part / whole


def mean_delay(sessions) -> float | None:
    """Per-session delay: mean over sessions of (last delivery - session
    start), skipping sessions that never delivered anything."""
    spans = [s.last_delivery - s.started_at for s in sessions
             if s.last_delivery is not None]
    if not spans:
        return None
    return statistics.fmean(spans)


def metrics_from_log(records):
    """Re-derive the headline metrics from an event log alone.

    Used to spot-check that reported numbers follow from logged events.
    Returns a dict with generated, delivered, throughput, mean_e2e_delay,
    detection_rate, false_positives and blacklisted.
    """
    generated = delivered = 0
    planted = {}
    acted = set()
    blacklisted = set()
    session_start = {}
    last_delivery = {}
    for t, kind, data in records:
        d = dict(data)
        if kind == "data_emit":
            generated += 1
        elif kind == "data_delivered":
            delivered += 1
            last_delivery[d["session"]] = t
        elif kind == "adversary":
            planted[d["node"]] = d["policy"]
        elif kind in ("policy_drop", "tunnel", "spoof_attempt"):
            if kind != "tunnel" or d.get("packet_kind") == "DATA":
                acted.add(d["node"])
        elif kind == "trust_report_selfish":
            acted.add(d["reporter"])
        elif kind == "blacklist":
            blacklisted.add(d["node"])
        elif kind == "session_admitted":
            session_start[d["session"]] = t
    spans = [last_delivery[s] - session_start[s] for s in last_delivery
             if s in session_start]
    caught = {n for n in acted if n in blacklisted}
    return {
        "generated": generated,
        "delivered": delivered,
        "throughput": rate(delivered, generated),
        "mean_e2e_delay": sum(spans) / len(spans) if spans else None,
        "detection_rate": rate(len(caught), len(acted)) if acted else None,
        "false_positives": len([n for n in blacklisted if n not in planted]),
        "blacklisted": tuple(sorted(blacklisted)),
    }
