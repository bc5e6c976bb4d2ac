"""Per-node carrier-sense state with two NAVs and OBSS/PD power restrictions.

This is the object-level form of the rules the event loop applies to flat
arrays. It is used for unit-level reasoning and tests; the kernel is the
production path.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .. import srcore
from ..propagation import HE_MCS_TABLE, Mcs, select_mcs, sinr

BUFFER_CAPACITY = 100


class Role(enum.Enum):
    AP = "AP"
    STA = "STA"


class Phase(enum.Enum):
    IDLE = "Idle"
    BACKOFF = "Backoff"
    WAIT_CTS = "WaitCts"
    TX_DATA = "TxData"
    WAIT_ACK = "WaitAck"
    NAV_BLOCKED = "NavBlocked"


class Detection(enum.Enum):
    BELOW_CCA = "below_cca"  # too weak to matter
    SR_IGNORED = "sr_ignored"  # dropped through an OBSS/PD threshold
    NAV_SET = "nav_set"
    BUSY = "busy"  # energy only, not decodable


@dataclass
class Packet:
    arrival_time: float
    dest: int
    length: int = 12000


@dataclass
class PowerRestriction:
    limit: float  # dBm
    expires: float  # end of the ignored transmission, s


@dataclass
class NodeState:
    role: Role
    config: srcore.SrConfig
    color: int
    own_bssid: Optional[int] = None
    phase: Phase = Phase.IDLE
    backoff_remaining: float = 0.0
    nav_intra: float = 0.0
    nav_inter: float = 0.0
    power_restrictions: list = field(default_factory=list)
    buffer: deque = field(default_factory=deque)
    capacity: int = BUFFER_CAPACITY
    drops: int = 0

    def navs_expired(self, now: float) -> bool:
        return self.nav_intra <= now and self.nav_inter <= now

    def may_decrement(self, now: float, medium_idle: bool) -> bool:
        """Backoff runs only on an idle medium with both NAVs expired."""
        return medium_idle and self.navs_expired(now)

    def enqueue(self, packet: Packet) -> bool:
        if len(self.buffer) >= self.capacity:
            self.drops += 1
            return False
        self.buffer.append(packet)
        return True

    def active_restriction(self, now: float) -> Optional[float]:
        self.power_restrictions = [r for r in self.power_restrictions if r.expires > now]
        return srcore.combine_power_restrictions(r.limit for r in self.power_restrictions)


def on_frame_detected(node: NodeState, frame: srcore.FrameMeta, rssi: float, now: float,
                      decodable: bool = True) -> Detection:
    """Apply carrier-sense rules for one received frame.

    ``frame.duration`` is the NAV duration carried by the frame, counted
    from ``now``. ``decodable`` says whether the SINR allows reading it.
    """
    if node.phase in (Phase.WAIT_CTS, Phase.TX_DATA):
        raise ValueError("a transmitting node does not detect frames")
    if rssi < node.config.cca_cs:
        return Detection.BELOW_CCA
    cls = srcore.classify_frame(node.config, node.color, frame, own_bssid=node.own_bssid)
    threshold = srcore.effective_sensitivity(node.config, cls)
    if rssi < threshold:
        limit = srcore.tx_power_restriction(threshold, node.config.tx_pwr_ref)
        if limit is not None:
            node.power_restrictions.append(PowerRestriction(limit, now + frame.duration))
        return Detection.SR_IGNORED
    if not decodable:
        return Detection.BUSY
    end = now + frame.duration
    if cls == srcore.FrameClass.INTRA_BSS:
        node.nav_intra = max(node.nav_intra, end)
    else:
        node.nav_inter = max(node.nav_inter, end)
    if not node.navs_expired(now):
        node.phase = Phase.NAV_BLOCKED
    return Detection.NAV_SET


def on_cf_end(node: NodeState, frame: srcore.FrameMeta, now: float = 0.0) -> None:
    """Reset the NAV matching the CF-End's class; the other NAV is kept."""
    if frame.kind != srcore.FrameKind.CF_END:
        raise ValueError("on_cf_end needs a CF-End frame")
    cls = srcore.classify_frame(node.config, node.color, frame, own_bssid=node.own_bssid)
    if cls == srcore.FrameClass.INTRA_BSS:
        node.nav_intra = min(node.nav_intra, now)
    else:
        node.nav_inter = min(node.nav_inter, now)
    if node.phase == Phase.NAV_BLOCKED and node.navs_expired(now):
        node.phase = Phase.BACKOFF


@dataclass(frozen=True)
class TransmissionPlan:
    tx_pwr: float
    mcs: Optional[Mcs]  # None: no MCS is feasible at this power
    n_packets: int


def start_transmission(node: NodeState, now: float, link_sinr: Callable[[float], float],
                       n_agg_max: int = 64, mcs_table: Sequence[Mcs] = HE_MCS_TABLE) -> TransmissionPlan:
    """Plan the exchange once the backoff has expired.

    ``link_sinr(tx_pwr)`` estimates the SINR at the receiver in dB.
    """
    if not node.navs_expired(now):
        raise ValueError("cannot transmit while a NAV is set")
    if not node.buffer:
        node.phase = Phase.IDLE
        raise ValueError("empty buffer")
    restriction = node.active_restriction(now)
    pwr = node.config.tx_pwr if restriction is None else min(node.config.tx_pwr, restriction)
    mcs = select_mcs(link_sinr(pwr), mcs_table)
    node.power_restrictions.clear()
    if mcs is None:
        node.phase = Phase.BACKOFF
        return TransmissionPlan(pwr, None, 0)
    node.phase = Phase.WAIT_CTS
    return TransmissionPlan(pwr, mcs, min(n_agg_max, len(node.buffer)))


def reception_outcome(signal: float, interferers: Sequence[float], noise: float, min_sinr: float,
                      capture_margin: float = 0.0) -> bool:
    """True if the frame survives the worst interference seen during it.

    ``interferers`` lists the strongest set of concurrent powers (dBm)
    at the receiver over the frame's lifetime.
    """
    return sinr(signal, interferers, noise) >= min_sinr + capture_margin
