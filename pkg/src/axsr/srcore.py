"""Rule and formula engine for 802.11ax OBSS/PD-based spatial reuse.

Everything here is a pure function of its arguments: frame classification
(intra-BSS / inter-BSS non-SRG / inter-BSS SRG), sensitivity selection,
OBSS/PD bounds, the SR transmit-power restriction, SRPS offset validation
and the PSR arithmetic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional

OBSS_PD_MIN = -82.0
OBSS_PD_MAX = -62.0
DEFAULT_CCA_CS = -82.0
TX_PWR_REFS = (21.0, 25.0)
MAX_PSR_SAFETY_MARGIN = 5.0
SRPS_OFFSET_MAX = 31  # 5-bit offset subfields


class SrError(ValueError):
    """Base class for rule violations raised by this module."""


class ClassificationError(SrError):
    pass


class SrpsValidationError(SrError):
    def __init__(self, constraint: str, message: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


class PpduFormat(enum.Enum):
    HE = "HE"
    VHT = "VHT"
    LEGACY = "legacy"


class FrameKind(enum.Enum):
    RTS = "RTS"
    CTS = "CTS"
    DATA = "Data"
    ACK = "ACK"
    BACK = "BACK"
    TF = "TF"
    CF_END = "CF-End"
    BEACON = "Beacon"


class FrameClass(enum.IntEnum):
    INTRA_BSS = 0
    INTER_BSS_NON_SRG = 1
    INTER_BSS_SRG = 2

    @property
    def is_inter(self) -> bool:
        return self is not FrameClass.INTRA_BSS


@dataclass(frozen=True)
class BssColor:
    value: int

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise SrError(f"BSS color must be an integer, got {self.value!r}")
        if not 1 <= self.value <= 63:
            raise SrError(f"BSS color must be in 1..63, got {self.value}")

    def __int__(self) -> int:
        return self.value


def bitmap(*bits: int) -> int:
    """Build a 64-bit SRG bitmap with the given bit positions set."""
    out = 0
    for b in bits:
        if not 0 <= b < 64:
            raise SrError(f"bitmap position {b} outside 0..63")
        out |= 1 << b
    return out


def _bit_set(bm: int, pos: int) -> bool:
    return 0 <= pos < 64 and bool((bm >> pos) & 1)


def _check_level(name: str, value: float) -> None:
    if not OBSS_PD_MIN <= value <= OBSS_PD_MAX:
        raise SrError(f"{name}={value} dBm outside [{OBSS_PD_MIN:g}, {OBSS_PD_MAX:g}]")
    if float(value) != math.floor(value):
        raise SrError(f"{name}={value} dBm is not on the 1 dBm grid")


@dataclass(frozen=True)
class SrConfig:
    """Per-node sensitivity and power configuration.

    OBSS/PD levels default to ``cca_cs`` which makes the node behave as a
    legacy (non-SR) device.
    """

    cca_cs: float = DEFAULT_CCA_CS
    obss_pd_non_srg: float = DEFAULT_CCA_CS
    obss_pd_srg: Optional[float] = None
    tx_pwr: float = 20.0
    tx_pwr_ref: float = 21.0
    srg_enabled: bool = False
    srg_color_bitmap: int = 0
    srg_partial_bssid_bitmap: int = 0
    non_srg_sr_disallowed: bool = False
    psr_disallowed: bool = False

    def __post_init__(self):
        _check_level("obss_pd_non_srg", self.obss_pd_non_srg)
        if self.obss_pd_srg is not None:
            _check_level("obss_pd_srg", self.obss_pd_srg)
        if self.srg_enabled and self.obss_pd_srg is None:
            raise SrError("srg_enabled requires obss_pd_srg")
        if self.tx_pwr_ref not in TX_PWR_REFS:
            raise SrError(f"tx_pwr_ref must be 21 or 25 dBm, got {self.tx_pwr_ref}")
        for name in ("srg_color_bitmap", "srg_partial_bssid_bitmap"):
            v = getattr(self, name)
            if not 0 <= v < 1 << 64:
                raise SrError(f"{name} must fit in 64 bits")

    @property
    def sr_active(self) -> bool:
        """True when some inter-BSS threshold differs from CCA/CS."""
        if not self.non_srg_sr_disallowed and self.obss_pd_non_srg != self.cca_cs:
            return True
        return self.srg_enabled and self.obss_pd_srg != self.cca_cs


@dataclass(frozen=True)
class FrameMeta:
    format: PpduFormat
    kind: FrameKind = FrameKind.DATA
    bss_color: Optional[int] = None
    group_id: Optional[int] = None
    partial_aid: Optional[int] = None
    bssid: Optional[int] = None
    src_bss: Optional[int] = None
    duration: float = 0.0
    rssi: Optional[float] = None


def classify_frame(receiver_config: SrConfig, receiver_bss_color, frame: FrameMeta,
                   own_bssid: Optional[int] = None) -> FrameClass:
    """Classify a detected PPDU relative to the receiving node.

    HE frames are matched on color. VHT frames count as SRG when GROUP_ID is
    0 and the PARTIAL_AID bit of the SRG partial-BSSID bitmap is set; legacy
    frames use their BSSID bit in the same bitmap. Non-HE frames are
    intra-BSS when their identifier equals ``own_bssid`` (defaults to the
    receiver's color value). Without SRG support nothing is SRG.
    """
    rx_color = int(receiver_bss_color)
    own = rx_color if own_bssid is None else own_bssid
    srg_on = receiver_config.srg_enabled
    fmt = frame.format
    if fmt is PpduFormat.HE:
        if frame.bss_color is None:
            raise ClassificationError("HE frame without BSS color")
        ident = int(frame.bss_color)
        if ident == rx_color:
            return FrameClass.INTRA_BSS
        srg = _bit_set(receiver_config.srg_color_bitmap, ident)
    elif fmt is PpduFormat.VHT:
        if frame.group_id is None or frame.partial_aid is None:
            raise ClassificationError("VHT frame without GROUP_ID/PARTIAL_AID")
        if frame.partial_aid == own:
            return FrameClass.INTRA_BSS
        srg = frame.group_id == 0 and _bit_set(
            receiver_config.srg_partial_bssid_bitmap, frame.partial_aid)
    elif fmt is PpduFormat.LEGACY:
        if frame.bssid is None:
            raise ClassificationError("legacy frame without BSSID")
        if frame.bssid == own:
            return FrameClass.INTRA_BSS
        srg = _bit_set(receiver_config.srg_partial_bssid_bitmap, frame.bssid)
    else:  # pragma: no cover - enum is closed
        raise ClassificationError(f"unknown format {fmt!r}")
    return FrameClass.INTER_BSS_SRG if srg and srg_on else FrameClass.INTER_BSS_NON_SRG


def effective_sensitivity(receiver_config: SrConfig, cls: FrameClass) -> float:
    c = receiver_config
    if cls is FrameClass.INTRA_BSS:
        return c.cca_cs
    if cls is FrameClass.INTER_BSS_SRG and c.srg_enabled:
        return c.obss_pd_srg
    # SRG frames seen by a node without SRG support fall back to non-SRG rules
    if c.non_srg_sr_disallowed:
        return c.cca_cs
    return c.obss_pd_non_srg


def max_obss_pd(tx_pwr: float, tx_pwr_ref: float) -> float:
    """Upper bound on the OBSS/PD level for a node transmitting at ``tx_pwr``."""
    if tx_pwr_ref not in TX_PWR_REFS:
        raise SrError(f"tx_pwr_ref must be 21 or 25 dBm, got {tx_pwr_ref}")
    return max(OBSS_PD_MIN, min(OBSS_PD_MAX, OBSS_PD_MIN + (tx_pwr_ref - tx_pwr)))


_WIDTHS = {20: 0, 40: 1, 80: 2, 160: 3}


def scale_obss_pd(obss_pd_20mhz: float, channel_width_mhz: int) -> float:
    try:
        doublings = _WIDTHS[channel_width_mhz]
    except (KeyError, TypeError):
        raise SrError(f"unsupported channel width {channel_width_mhz!r} MHz") from None
    return obss_pd_20mhz + 3.0 * doublings


def tx_power_restriction(obss_pd: float, tx_pwr_ref: float) -> Optional[float]:
    """Maximum TX power in an SR TXOP, or None when unconstrained."""
    if not OBSS_PD_MIN <= obss_pd <= OBSS_PD_MAX:
        raise SrError(f"obss_pd={obss_pd} outside [{OBSS_PD_MIN:g}, {OBSS_PD_MAX:g}]")
    if obss_pd <= OBSS_PD_MIN:
        return None
    return tx_pwr_ref - (obss_pd - OBSS_PD_MIN)


def combine_power_restrictions(restrictions: Iterable[Optional[float]]) -> Optional[float]:
    constrained = [r for r in restrictions if r is not None]
    return min(constrained) if constrained else None


@dataclass(frozen=True)
class SrpsElement:
    """Spatial Reuse Parameter Set element, as structured fields."""

    psr_disallowed: bool = False
    non_srg_obss_pd_sr_disallowed: bool = False
    non_srg_offset_present: bool = False
    srg_information_present: bool = False
    non_srg_obss_pd_max_offset: int = 0
    srg_obss_pd_min_offset: int = 0
    srg_obss_pd_max_offset: int = 0
    srg_bss_color_bitmap: int = 0
    srg_partial_bssid_bitmap: int = 0


@dataclass(frozen=True)
class SrpsBounds:
    non_srg_min: float
    non_srg_max: float
    srg_min: Optional[float] = None
    srg_max: Optional[float] = None

    def as_dict(self) -> dict:
        return {"non_srg_min": self.non_srg_min, "non_srg_max": self.non_srg_max,
                "srg_min": self.srg_min, "srg_max": self.srg_max}


def validate_srps(element: SrpsElement) -> SrpsBounds:
    """Check the SRPS offset constraints and derive the allowed OBSS/PD ranges.

    Offsets are checked whenever the element carries them: the non-SRG
    offset if ``non_srg_offset_present``, the SRG offsets if
    ``srg_information_present``.
    """
    e = element
    offsets = {"non_srg_obss_pd_max_offset": e.non_srg_obss_pd_max_offset,
               "srg_obss_pd_min_offset": e.srg_obss_pd_min_offset,
               "srg_obss_pd_max_offset": e.srg_obss_pd_max_offset}
    for name, v in offsets.items():
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v <= SRPS_OFFSET_MAX:
            raise SrpsValidationError("offset-range", f"{name}={v!r} is not an integer in 0..{SRPS_OFFSET_MAX}")
    for name in ("srg_bss_color_bitmap", "srg_partial_bssid_bitmap"):
        v = getattr(e, name)
        if not isinstance(v, int) or not 0 <= v < 1 << 64:
            raise SrpsValidationError("bitmap", f"{name} must be a 64-bit value")

    if e.srg_information_present:
        lo = OBSS_PD_MIN + e.srg_obss_pd_min_offset
        hi = OBSS_PD_MIN + e.srg_obss_pd_max_offset
        if not OBSS_PD_MIN <= lo <= OBSS_PD_MAX:
            raise SrpsValidationError("constraint-1", f"-82 + SRG min offset = {lo:g} dBm not in [-82, -62]")
        if e.srg_obss_pd_min_offset > e.srg_obss_pd_max_offset:
            raise SrpsValidationError("constraint-2", "SRG OBSS/PD min offset exceeds max offset")
        if hi > OBSS_PD_MAX:
            raise SrpsValidationError("constraint-3", f"-82 + SRG max offset = {hi:g} dBm exceeds -62")
        srg = (lo, hi)
    else:
        srg = (None, None)

    if e.non_srg_offset_present:
        hi = OBSS_PD_MIN + e.non_srg_obss_pd_max_offset
        if hi > OBSS_PD_MAX:
            raise SrpsValidationError("constraint-4", f"-82 + non-SRG max offset = {hi:g} dBm exceeds -62")

    if e.non_srg_obss_pd_sr_disallowed:
        non_srg = (OBSS_PD_MIN, OBSS_PD_MIN)
    elif e.non_srg_offset_present:
        non_srg = (OBSS_PD_MIN, OBSS_PD_MIN + e.non_srg_obss_pd_max_offset)
    else:
        non_srg = (OBSS_PD_MIN, OBSS_PD_MAX)
    return SrpsBounds(non_srg[0], non_srg[1], srg[0], srg[1])


def psr_value(tx_pwr_ap: float, i_ap_max: float) -> float:
    return tx_pwr_ap + i_ap_max


def i_ap_max(target_rssi: float, min_snr_10pct_per: float, safety_margin: float) -> float:
    # the margin tightens the allowance, capped at 5 dB
    if not 0.0 <= safety_margin <= MAX_PSR_SAFETY_MARGIN:
        raise SrError(f"safety margin {safety_margin} dB outside [0, {MAX_PSR_SAFETY_MARGIN:g}]")
    return target_rssi - min_snr_10pct_per - safety_margin


def psr_opportunity(psr: float, rpl: float, intended_tx_pwr: float) -> bool:
    return intended_tx_pwr < psr - rpl
