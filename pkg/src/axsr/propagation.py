"""Radio abstraction: path loss, RSSI, SINR, MCS selection and airtime."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence


class PropagationError(ValueError):
    pass


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise PropagationError(f"non-finite position ({self.x}, {self.y})")

    def distance(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss with one breakpoint and a partition term.

    ``w_loss`` is charged once per partition crossed. Links inside a BSS
    are taken to stay in one room (0 partitions); links between BSSs cross
    one. ``path_loss`` defaults to one partition.
    """

    l0: float
    gamma1: float = 2.0
    gamma2: float = 3.5
    d_bp: float = 5.0
    w_loss: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        if self.d_bp <= 0:
            raise PropagationError("breakpoint distance must be positive")


# Fitted to the Toy scenario 1 anchors: 84 dB over the 4 m AP->STA link
# (17 dBm -> -67 dBm) and 99.5 dB between the two APs 2 m apart.
_TOY_L0 = 84.0 - 20.0 * math.log10(4.0)
_TOY_W = 99.5 - _TOY_L0 - 20.0 * math.log10(2.0)

TOY_PATH_LOSS = PathLossModel(l0=_TOY_L0, gamma1=2.0, gamma2=3.5, d_bp=5.0,
                              w_loss=_TOY_W, name="toy")
# Free-space loss at 1 m for 5 GHz, 35 dB/decade past 5 m, 25 dB per partition.
RESIDENTIAL_PATH_LOSS = PathLossModel(l0=40.05 + 20.0 * math.log10(5.0 / 2.4), gamma1=2.0,
                                      gamma2=3.5, d_bp=5.0, w_loss=25.0, name="residential")

PATH_LOSS_PRESETS = {"toy": TOY_PATH_LOSS, "residential": RESIDENTIAL_PATH_LOSS}


def path_loss(d: float, model: PathLossModel, partitions: int = 1) -> float:
    if not d > 0:
        raise PropagationError(f"distance must be positive, got {d}")
    m = model
    loss = m.l0 + 10.0 * m.gamma1 * math.log10(min(d, m.d_bp))
    if d > m.d_bp:
        loss += 10.0 * m.gamma2 * math.log10(d / m.d_bp)
    return loss + m.w_loss * partitions


@dataclass(frozen=True)
class PhyParams:
    f_c: float = 5e9
    g_tx: float = 0.0
    g_rx: float = 0.0
    noise: float = -95.0
    sigma: float = 16e-6
    sigma_leg: float = 4e-6
    n_sc: int = 234
    n_ss: int = 1


@dataclass(frozen=True)
class MacParams:
    t_e: float = 9e-6
    t_sifs: float = 16e-6
    t_difs: float = 34e-6
    t_pifs: float = 25e-6
    t_phy_leg: float = 20e-6
    t_he_su: float = 100e-6
    t_ack: float = 28e-6
    t_back: float = 32e-6
    l_d: int = 12000
    l_rts: int = 160
    l_cts: int = 112
    l_sf: int = 16
    l_mh: int = 320
    l_s_leg: int = 24
    cw: int = 15
    n_agg_max: int = 64
    max_ppdu: float = 5484e-6


def rssi(tx_pwr: float, d: float, params: PhyParams, model: PathLossModel,
         partitions: int = 1) -> float:
    return tx_pwr + params.g_tx + params.g_rx - path_loss(d, model, partitions)


def dbm_to_mw(p: float) -> float:
    return 10.0 ** (p / 10.0)


def mw_to_dbm(p: float) -> float:
    return 10.0 * math.log10(p) if p > 0 else -math.inf


def sinr(signal: float, interferers: Sequence[float], noise: float) -> float:
    total = dbm_to_mw(noise) + sum(dbm_to_mw(i) for i in interferers)
    return signal - mw_to_dbm(total)


@dataclass(frozen=True)
class Mcs:
    index: int
    bits_per_sc: float  # coded bits per subcarrier times coding rate
    min_sinr: float


# HE single-stream table; thresholds approximate the SNR for 10% PER
# with LDPC coding over a flat channel.
HE_MCS_TABLE: tuple[Mcs, ...] = tuple(
    Mcs(i, b, s) for i, (b, s) in enumerate([
        (0.5, 2.0), (1.0, 5.0), (1.5, 8.0), (2.0, 11.0), (3.0, 14.0), (4.0, 17.5),
        (4.5, 19.0), (5.0, 20.5), (6.0, 23.5), (20.0 / 3.0, 25.5), (7.5, 27.0), (25.0 / 3.0, 28.5),
    ])
)


def check_mcs_table(table: Sequence[Mcs]) -> None:
    if not table:
        raise PropagationError("empty MCS table")
    for a, b in zip(table, table[1:]):
        if not (b.min_sinr > a.min_sinr and b.bits_per_sc > a.bits_per_sc):
            raise PropagationError("MCS table must be strictly increasing in min_sinr and rate")


def select_mcs(sinr_db: float, table: Sequence[Mcs] = HE_MCS_TABLE) -> Optional[Mcs]:
    if not table:
        raise PropagationError("empty MCS table")
    best = None
    for m in table:
        if m.min_sinr <= sinr_db:
            best = m
        else:
            break
    return best


def bits_per_symbol(mcs: Mcs, params: PhyParams) -> float:
    return params.n_sc * mcs.bits_per_sc * params.n_ss


def data_rate(mcs: Mcs, params: PhyParams) -> float:
    return bits_per_symbol(mcs, params) / params.sigma


class FrameDurations(NamedTuple):
    n_agg: int
    t_rts: float
    t_cts: float
    t_data: float
    t_ack_or_back: float
    t_exchange_success: float


def _legacy_duration(bits: int, phy: PhyParams, mac: MacParams) -> float:
    return mac.t_phy_leg + math.ceil(bits / mac.l_s_leg) * phy.sigma_leg


def max_aggregation(mcs: Mcs, phy: PhyParams, mac: MacParams, n_agg_max: Optional[int] = None) -> int:
    """Largest A-MPDU size whose payload fits in the maximum PPDU duration."""
    limit = mac.n_agg_max if n_agg_max is None else n_agg_max
    bps = bits_per_symbol(mcs, phy)
    max_symbols = math.floor(mac.max_ppdu / phy.sigma + 1e-9)
    n = int((max_symbols * bps - mac.l_sf) // (mac.l_mh + mac.l_d))
    return max(1, min(limit, n))


def payload_symbols(n_agg: int, mcs: Mcs, phy: PhyParams, mac: MacParams) -> int:
    return math.ceil((mac.l_sf + n_agg * (mac.l_mh + mac.l_d)) / bits_per_symbol(mcs, phy))


def frame_durations(n_agg: int, mcs: Mcs, phy: PhyParams = PhyParams(),
                    mac: MacParams = MacParams()) -> FrameDurations:
    if n_agg < 1:
        raise PropagationError(f"n_agg must be >= 1, got {n_agg}")
    n = min(n_agg, max_aggregation(mcs, phy, mac, n_agg_max=max(n_agg, 1)))
    t_rts = _legacy_duration(mac.l_rts, phy, mac)
    t_cts = _legacy_duration(mac.l_cts, phy, mac)
    t_data = mac.t_phy_leg + mac.t_he_su + payload_symbols(n, mcs, phy, mac) * phy.sigma
    t_resp = mac.t_ack if n == 1 else mac.t_back
    total = (t_rts + mac.t_sifs + t_cts + mac.t_sifs + t_data + mac.t_sifs + t_resp
             + mac.t_difs + mac.t_e)
    return FrameDurations(n, t_rts, t_cts, t_data, t_resp, total)


def mean_backoff(mac: MacParams) -> float:
    return mac.cw / 2.0 * mac.t_e


def saturated_throughput(mcs: Mcs, phy: PhyParams = PhyParams(), mac: MacParams = MacParams(),
                         n_agg: Optional[int] = None) -> float:
    """Cycle-time throughput of one isolated, always-backlogged BSS."""
    fd = frame_durations(mac.n_agg_max if n_agg is None else n_agg, mcs, phy, mac)
    return fd.n_agg * mac.l_d / (fd.t_exchange_success + mean_backoff(mac))
