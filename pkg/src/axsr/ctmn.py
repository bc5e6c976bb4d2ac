"""Continuous-time Markov network model of OBSS channel sharing with SR.

A state is the set of BSSs transmitting at once, each tagged with the
sensitivity mode it used to access the channel, its (possibly restricted)
transmit power and the MCS it picked when it started. States are built by
breadth-first expansion from the empty state; the generator has activation
rate ``lam`` and departure rate ``1 / t_exchange_success``.
"""
from __future__ import annotations

import enum
import io
import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from . import srcore
from .propagation import dbm_to_mw, frame_durations, mw_to_dbm, select_mcs
from .scenario import Scenario
from .srcore import FrameClass, FrameMeta, PpduFormat

DENSE_STATE_CAP = 2000


class CtmnError(RuntimeError):
    pass


class BssMode(enum.IntEnum):
    DEFAULT = 0
    SR_NON_SRG = 1
    SR_SRG = 2

    @property
    def suffix(self) -> str:
        return ("", "_SR", "_SRG")[self]


class Activity(NamedTuple):
    bss: int
    mode: BssMode
    tx_pwr: float
    mcs: int


CtmnState = frozenset  # frozenset[Activity]


def default_backoff_rate(scenario: Scenario) -> float:
    """Mean-matched exponential backoff: 1 / ((CW/2) * t_e)."""
    return 1.0 / (scenario.mac.cw / 2.0 * scenario.mac.t_e)


@dataclass
class CtmnGraph:
    states: list
    labels: list[str]
    reachable: np.ndarray
    sr_only: np.ndarray  # state holds at least one SR-mode activity
    edges: dict  # (i, j) -> ("up", bss) or ("down", bss)
    service_time: dict  # (state index, bss) -> seconds
    delivered_bits: dict  # (state index, bss) -> bits per exchange (0 when spoiled)
    n_bss: int
    bss_names: tuple[str, ...]

    def index(self, state) -> int:
        return self.states.index(frozenset(state))

    def successors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.edges if a == i)

    def predecessors(self, j: int) -> list[int]:
        return sorted(a for (a, b) in self.edges if b == j)

    def find(self, label: str) -> list[int]:
        return [i for i, l in enumerate(self.labels) if l == label]


class _Radio:
    """Precomputed link gains and per-BSS classification of other BSSs' frames."""

    def __init__(self, scenario: Scenario):
        self.sc = scenario
        dep = scenario.deployment
        if any(len(b.stas) != 1 for b in dep.bsses):
            raise CtmnError("the analytic model handles one STA per BSS")
        self.g = scenario.gain_matrix()
        self.n = dep.n_bss
        self.noise_mw = dbm_to_mw(scenario.phy.noise)
        self.cls = [[None] * self.n for _ in range(self.n)]
        for c in range(self.n):
            for b in range(self.n):
                if dep.bsses[b].channel != dep.bsses[c].channel:
                    continue
                frame = FrameMeta(PpduFormat.HE, bss_color=dep.bsses[b].color, src_bss=b)
                self.cls[c][b] = srcore.classify_frame(scenario.configs[c], dep.bsses[c].color, frame)

    def rx(self, src_bss: int, pwr: float, dst_node: int) -> float:
        return pwr + self.g[2 * src_bss, dst_node]

    def sinr_at_sta(self, bss: int, pwr: float, others: Iterable[Activity]) -> float:
        sta = 2 * bss + 1
        interf = self.noise_mw
        for o in others:
            if o.bss != bss and self.cls[bss][o.bss] is not None:
                interf += dbm_to_mw(self.rx(o.bss, o.tx_pwr, sta))
        return self.rx(bss, pwr, sta) - mw_to_dbm(interf)


def _try_activate(radio: _Radio, state, c: int) -> Optional[Activity]:
    """Activity BSS ``c`` would start in ``state``, or None if it cannot."""
    sc = radio.sc
    cfg = sc.configs[c]
    ap = 2 * c
    busy = []
    for a in state:
        cls = radio.cls[c][a.bss]
        if cls is None:
            continue
        r = radio.rx(a.bss, a.tx_pwr, ap)
        if r >= cfg.cca_cs:
            busy.append((a, cls, r))
    if not busy:
        mode, pwr = BssMode.DEFAULT, cfg.tx_pwr
    else:
        restrictions = []
        for a, cls, r in busy:
            thr = srcore.effective_sensitivity(cfg, cls)
            if cls is FrameClass.INTRA_BSS or r >= thr:
                return None
            restrictions.append((srcore.tx_power_restriction(thr, cfg.tx_pwr_ref), cls))
        limit = srcore.combine_power_restrictions(r for r, _ in restrictions)
        pwr = cfg.tx_pwr if limit is None else min(cfg.tx_pwr, limit)
        binding = min(restrictions, key=lambda t: (math.inf if t[0] is None else t[0], t[1]))
        srg_used = binding[1] is FrameClass.INTER_BSS_SRG and cfg.srg_enabled
        mode = BssMode.SR_SRG if srg_used else BssMode.SR_NON_SRG
    mcs = select_mcs(radio.sinr_at_sta(c, pwr, state), sc.mcs_table)
    if mcs is None:
        return None
    return Activity(c, mode, float(pwr), mcs.index)


def state_label(state, names: Sequence[str]) -> str:
    if not state:
        return "EMPTY"
    return " ".join(names[a.bss] + a.mode.suffix for a in sorted(state))


def _state_key(state):
    return (len(state), sorted(state))


def enumerate_states(scenario: Scenario, state_cap: int = DENSE_STATE_CAP,
                     n_agg: Optional[int] = None) -> CtmnGraph:
    """Breadth-first expansion from the empty state.

    All-default combinations of BSSs that are individually feasible are
    added too, so states that the sensing rules never reach still show up
    (flagged unreachable).
    """
    radio = _Radio(scenario)
    n = radio.n
    empty = frozenset()
    order = [empty]
    seen = {empty: 0}
    edges = {}
    queue = deque([empty])
    while queue:
        s = queue.popleft()
        i = seen[s]
        for c in range(n):
            if any(a.bss == c for a in s):
                continue
            act = _try_activate(radio, s, c)
            if act is None:
                continue
            t = s | {act}
            if t not in seen:
                if len(order) >= state_cap:
                    raise CtmnError(f"state space exceeds the cap of {state_cap}")
                seen[t] = len(order)
                order.append(t)
                queue.append(t)
            edges[(i, seen[t])] = ("up", c)
        for a in sorted(s):
            t = s - {a}
            if t not in seen:
                if len(order) >= state_cap:
                    raise CtmnError(f"state space exceeds the cap of {state_cap}")
                seen[t] = len(order)
                order.append(t)
                queue.append(t)
            edges[(i, seen[t])] = ("down", a.bss)
    n_reach = len(order)

    # all-default combinations, MCS picked in isolation
    solo = []
    for c in range(n):
        act = _try_activate(radio, empty, c)
        if act is not None:
            solo.append(act)
    if n <= 12:
        for k in range(2, len(solo) + 1):
            for combo in itertools.combinations(solo, k):
                t = frozenset(combo)
                if t not in seen:
                    if len(order) >= state_cap:
                        raise CtmnError(f"state space exceeds the cap of {state_cap}")
                    seen[t] = len(order)
                    order.append(t)

    # canonical ordering: reachable first, then by size and content
    reach_states = [order[0]] + sorted(order[1:n_reach], key=_state_key)
    unreach = sorted(order[n_reach:], key=_state_key)
    states = reach_states + unreach
    remap = {seen[s]: k for k, s in enumerate(states)}
    edges = {(remap[a], remap[b]): v for (a, b), v in sorted(edges.items())}
    edges = dict(sorted(edges.items()))

    names = tuple(b.name for b in scenario.deployment.bsses)
    reachable = np.array([k < n_reach for k in range(len(states))])
    sr_only = np.array([any(a.mode != BssMode.DEFAULT for a in s) for s in states])
    n_agg = scenario.mac.n_agg_max if n_agg is None else n_agg
    service, bits = {}, {}
    table = {m.index: m for m in scenario.mcs_table}
    for k, s in enumerate(states):
        for a in s:
            mcs = table[a.mcs]
            fd = frame_durations(n_agg, mcs, scenario.phy, scenario.mac)
            service[(k, a.bss)] = fd.t_exchange_success
            ok = radio.sinr_at_sta(a.bss, a.tx_pwr, s) >= mcs.min_sinr
            bits[(k, a.bss)] = fd.n_agg * scenario.mac.l_d if ok else 0.0
    return CtmnGraph(states, [state_label(s, names) for s in states], reachable, sr_only,
                     edges, service, bits, n, names)


def build_generator(graph: CtmnGraph, lam: float, service_times: Optional[dict] = None) -> np.ndarray:
    """Dense generator over all enumerated states (unreachable rows stay empty)."""
    if not (lam > 0 and math.isfinite(lam)):
        raise CtmnError(f"activation rate must be positive and finite, got {lam}")
    st = dict(graph.service_time)
    if service_times:
        st.update(service_times)
    m = len(graph.states)
    q = np.zeros((m, m))
    for (i, j), (kind, b) in graph.edges.items():
        if kind == "up":
            q[i, j] += lam
        else:
            t = st[(i, b)]
            if not (t > 0 and math.isfinite(t)):
                raise CtmnError(f"non-finite service time for BSS {b} in state {i}")
            q[i, j] += 1.0 / t
    q[np.diag_indices(m)] = -q.sum(axis=1)
    return q


def stationary_distribution(q: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Solve pi Q = 0 with sum(pi) = 1 by a direct solve.

    The last balance equation is swapped for the normalization row.
    """
    m = q.shape[0]
    if m == 0:
        raise CtmnError("empty generator")
    if m > DENSE_STATE_CAP:
        raise CtmnError(f"{m} states exceed the dense-solve limit of {DENSE_STATE_CAP}")
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise CtmnError(f"singular generator: {exc}") from None
    if pi.min() < -1e-12:
        raise CtmnError(f"negative stationary mass {pi.min():.3e}")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    res = np.abs(pi @ q).max()
    if res > tol * max(1.0, np.abs(q).max()):
        raise CtmnError(f"stationary residual {res:.3e} above tolerance")
    return pi


@dataclass
class CtmnSolution:
    graph: CtmnGraph
    q: np.ndarray
    pi: np.ndarray  # over all states, zero on unreachable ones
    throughput: np.ndarray  # bits/s per BSS
    tx_pwr: np.ndarray  # probability-weighted transmit power per BSS while active


def throughput_per_bss(graph: CtmnGraph, pi: np.ndarray) -> np.ndarray:
    gamma = np.zeros(graph.n_bss)
    for (k, b), bits in graph.delivered_bits.items():
        if pi[k] > 0 and bits > 0:
            gamma[b] += pi[k] * bits / graph.service_time[(k, b)]
    return gamma


def solve(scenario: Scenario, lam: Optional[float] = None, n_agg: Optional[int] = None,
          state_cap: int = DENSE_STATE_CAP) -> CtmnSolution:
    graph = enumerate_states(scenario, state_cap=state_cap, n_agg=n_agg)
    lam = default_backoff_rate(scenario) if lam is None else lam
    q_full = build_generator(graph, lam)
    idx = np.flatnonzero(graph.reachable)
    pi_r = stationary_distribution(q_full[np.ix_(idx, idx)])
    pi = np.zeros(len(graph.states))
    pi[idx] = pi_r
    gamma = throughput_per_bss(graph, pi)
    pwr = np.full(graph.n_bss, np.nan)
    for b in range(graph.n_bss):
        w = [(pi[k], a.tx_pwr) for k, s in enumerate(graph.states) for a in s if a.bss == b and pi[k] > 0]
        tot = sum(p for p, _ in w)
        if tot > 0:
            pwr[b] = sum(p * x for p, x in w) / tot
    return CtmnSolution(graph, q_full, pi, gamma, pwr)


def adjacency_dump(graph: CtmnGraph, q: Optional[np.ndarray] = None,
                   pi: Optional[np.ndarray] = None) -> str:
    """Plain-text state graph: one block per state, outgoing edges indented."""
    out = io.StringIO()
    for k, s in enumerate(graph.states):
        flags = [] if graph.reachable[k] else ["unreachable"]
        detail = ", ".join(f"{graph.bss_names[a.bss]}:{a.tx_pwr:g}dBm/MCS{a.mcs}" for a in sorted(s))
        prob = f" pi={pi[k]:.6g}" if pi is not None else ""
        out.write(f"s{k} [{graph.labels[k]}]{prob} {{{detail}}}{' ' + ' '.join(flags) if flags else ''}\n")
        for j in graph.successors(k):
            kind, b = graph.edges[(k, j)]
            rate = f" rate={q[k, j]:.6g}" if q is not None else ""
            back = "" if (j, k) in graph.edges else " one-way"
            out.write(f"  -> s{j} [{graph.labels[j]}] {kind} {graph.bss_names[b]}{rate}{back}\n")
    return out.getvalue()


def distribution_csv(graph: CtmnGraph, pi: np.ndarray) -> str:
    lines = ["state,label,reachable,pi"]
    for k, lab in enumerate(graph.labels):
        lines.append(f"s{k},{lab},{int(graph.reachable[k])},{pi[k]:.12g}")
    return "\n".join(lines) + "\n"
