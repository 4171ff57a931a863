"""Cluster-head side misbehavior evidence, judgment and punishment.

Every DATA handover to a gateway leaves a ledger entry at the supervising
head.  Entries resolve to ACKED when the downstream head confirms the
packet, or TIMEOUT when no confirmation arrives in time.  A timeout only
incriminates the custodian if nothing exonerates it: the link was up, its
battery was comfortably charged and it was not speeding away.  Enough
culpable timeouts make a MALICIOUS verdict; punishment zeroes trust and
floods a blacklist notice over the head backbone.
"""

from dataclasses import dataclass, field

from . import trust
from .errors import NoEvidence, UnknownLink

PENDING = "PENDING"
ACKED = "ACKED"
TIMEOUT = "TIMEOUT"

LINK_OK = "link_ok"
LINK_BROKEN = "link_broken"

NORMAL = "NORMAL"
SELFISH = "SELFISH"
MALICIOUS = "MALICIOUS"
INCONCLUSIVE = "INCONCLUSIVE"

# Battery band [SELFISH_ENERGY_FLOOR, energy_high_threshold) where refusing
# to forward reads as stinginess rather than malice or exhaustion.
SELFISH_ENERGY_FLOOR = 0.4


@dataclass
class DetectionThresholds:
    accusation_threshold: int = 3     # culpable timeouts before MALICIOUS
    energy_high_threshold: float = 0.5
    velocity_low_threshold: float = 5.0   # m/s
    nuisance_limit: int = 5           # tolerated reports per reporter/target
    blacklist_limit: float = trust.DEFAULT_BLACKLIST_LIMIT


@dataclass
class LedgerEntry:
    packet_id: int
    gateway: int                # current custodian under suspicion
    handed_over_at: float
    ack_status: str = PENDING
    context: str = LINK_OK
    res_eng: float = 1.0        # custodian battery at handover
    rel_mobility: float | None = None  # custodian radial speed vs the head
    downstream_ch: int | None = None
    retransmitted: bool = False  # head overheard the custodian pass it on
    delivered_downstream: bool = False


@dataclass
class Verdict:
    label: str
    target: int
    evidence: tuple = ()
    reason: str = ""


@dataclass
class SurveillanceLedger:
    ch_id: int
    entries: list = field(default_factory=list)
    by_packet: dict = field(default_factory=dict)

    def open_entry(self, packet_id, gateway, now, res_eng, rel_mobility,
                   downstream_ch=None) -> LedgerEntry:
        entry = LedgerEntry(packet_id, gateway, now, res_eng=res_eng,
                            rel_mobility=rel_mobility, downstream_ch=downstream_ch)
        self.entries.append(entry)
        self.by_packet[packet_id] = entry
        return entry

    def resolve(self, packet_id, status, context=None):
        entry = self.by_packet.get(packet_id)
        if entry is None or entry.ack_status != PENDING:
            return None
        entry.ack_status = status
        if context is not None:
            entry.context = context
        return entry

    def resolved_for(self, gateway):
        return [e for e in self.entries
                if e.gateway == gateway and e.ack_status != PENDING]


def _culpable(e, th: DetectionThresholds) -> bool:
    return (e.ack_status == TIMEOUT
            and e.context == LINK_OK
            and e.res_eng >= th.energy_high_threshold
            and e.rel_mobility is not None
            and abs(e.rel_mobility) <= th.velocity_low_threshold)


def judge_forwarding(ledger: SurveillanceLedger, gateway: int,
                     th: DetectionThresholds) -> Verdict:
    """Weigh all resolved evidence against one gateway.

    Timeouts with a live link, high battery and low relative speed are
    culpable; enough of them is malice.  Timeouts in the battery band just
    under "high" read as selfishness when recurring.  Anything else that
    timed out stays inconclusive, and a clean ACKed record is normal.
    """
    entries = ledger.resolved_for(gateway)
    if not entries:
        raise NoEvidence(f"no resolved entries for node {gateway}")
    culpable = [e for e in entries if _culpable(e, th)]
    if len(culpable) >= th.accusation_threshold:
        return Verdict(MALICIOUS, gateway,
                       tuple(e.packet_id for e in culpable), "culpable_drops")
    stingy = [e for e in entries
              if e.ack_status == TIMEOUT and e.context == LINK_OK
              and SELFISH_ENERGY_FLOOR <= e.res_eng < th.energy_high_threshold]
    if len(stingy) >= th.accusation_threshold:
        return Verdict(SELFISH, gateway,
                       tuple(e.packet_id for e in stingy), "recurring_refusal")
    if any(e.ack_status == TIMEOUT for e in entries):
        return Verdict(INCONCLUSIVE, gateway, reason="exonerated_timeouts")
    return Verdict(NORMAL, gateway)


def verify_identity(registry, link_id: int, claimed_id: int) -> Verdict:
    """Check a packet's claimed source against the physical link it used.

    registry is the set of node ids that ever associated with this head;
    the physical link identifies its owner directly.  A claimed id that
    differs from the link owner is spoofing, pinned on the owner.
    """
    if link_id not in registry:
        raise UnknownLink(f"link of node {link_id} never registered")
    if claimed_id != link_id:
        return Verdict(MALICIOUS, link_id, (claimed_id,), "spoofed_identity")
    return Verdict(NORMAL, link_id)


def handle_trust_report(nuisance_counts: dict, report, nuisance_limit: int) -> str:
    """Log-and-discard policy for member-originated trust reports.

    Word of mouth never moves trust here; only the head's own ledger does.
    Returns "discarded", or "reporter_selfish" exactly once, when the same
    reporter crosses the nuisance limit for the same accused node.
    """
    key = (report.src, report.payload.get("accused"))
    count = nuisance_counts.get(key, 0) + 1
    nuisance_counts[key] = count
    if count == nuisance_limit + 1:
        return "reporter_selfish"
    return "discarded"


def handle_route_advert(advert, from_member: bool) -> bool:
    """Heads only learn routes from other heads; member adverts are noise."""
    return not from_member


def punish(world, verdict: Verdict, issuing_ch: int) -> bool:
    """Apply a MALICIOUS verdict network-wide. Idempotent.

    Zeroes the node's trust, strips it from its cluster and any gateway
    role, and floods a blacklist notice to every head.  Returns False when
    the node was already blacklisted (nothing further happens).
    """
    if verdict.label != MALICIOUS:
        return False
    target = verdict.target
    if target in world.blacklisted:
        return False
    rec = world.trust_registry[target]
    before = trust.trust_value(rec)
    trust.on_malicious(rec)
    world.note_trust_change(target, before, trust.trust_value(rec), verdict.reason)
    world.blacklisted[target] = trust.BlacklistEntry(target, issuing_ch, verdict.reason, world.now)
    world.eject_node(target)
    world.flood_blacklist(target, issuing_ch, verdict.reason)
    return True
