"""Simulation entry point: input preparation, backend choice and metrics."""
from __future__ import annotations

import importlib.machinery
import importlib.util
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .. import srcore
from ..propagation import frame_durations, max_aggregation
from ..scenario import Scenario
from . import _kernel as _default_kernel

BACKEND_ENV = "AXSR_BACKEND"
DEFAULT_WARMUP = 1.0
DEFAULT_BUFFER = 100

EVENT_NAMES = ("bo_resume", "bo_freeze", "bo_expire", "nav_set", "nav_reset", "sr_ignore",
               "tx_start", "frame_start", "frame_end", "success", "fail", "infeasible", "drop")
FRAME_NAMES = ("RTS", "CTS", "DATA", "RESP", "CF-End")
NAV_NAMES = ("intra", "inter")


class SimulationError(ValueError):
    """Invalid simulation inputs."""


class AccountingError(AssertionError):
    """Internal bookkeeping went inconsistent."""


def _load_python_kernel():
    src = Path(__file__).with_name("_kernel.py")
    loader = importlib.machinery.SourceFileLoader("axsr.desim._kernel_py", str(src))
    spec = importlib.util.spec_from_loader(loader.name, loader)
    mod = importlib.util.module_from_spec(spec)
    loader.exec_module(mod)
    return mod


_py_kernel = None


def kernel_module(backend: Optional[str] = None):
    """Kernel module for ``backend`` ('compiled', 'python' or None for auto)."""
    global _py_kernel
    choice = (backend or os.environ.get(BACKEND_ENV, "auto")).lower()
    if choice not in ("auto", "compiled", "python"):
        raise SimulationError(f"unknown backend {choice!r}")
    if choice in ("auto", "compiled") and _default_kernel.COMPILED:
        return _default_kernel
    if choice == "compiled":
        raise SimulationError("compiled kernel not available; build the extension first")
    if not _default_kernel.COMPILED:
        return _default_kernel
    if _py_kernel is None:
        _py_kernel = _load_python_kernel()
    return _py_kernel


def available_backends() -> list[str]:
    return ["compiled", "python"] if _default_kernel.COMPILED else ["python"]


@dataclass
class MetricsReport:
    bss_names: tuple[str, ...]
    throughput: np.ndarray  # bits/s over the measurement window
    occupancy: np.ndarray  # fraction of the window spent in exchanges
    delay: np.ndarray  # mean enqueue-to-acknowledgment time in s (nan if none)
    drops: np.ndarray
    collisions: np.ndarray  # failed exchanges
    infeasible: np.ndarray  # attempts abandoned for lack of a feasible MCS
    attempts: np.ndarray
    generated: np.ndarray  # whole-run conservation counters
    delivered_total: np.ndarray
    dropped_total: np.ndarray
    queued: np.ndarray
    in_flight: np.ndarray
    n_events: int
    backend: str
    trace: Optional[list[str]] = None

    def as_rows(self) -> list[dict]:
        rows = []
        for i, name in enumerate(self.bss_names):
            rows.append({"bss": name, "throughput_mbps": self.throughput[i] / 1e6,
                         "occupancy": self.occupancy[i], "delay_ms": self.delay[i] * 1e3,
                         "drops": int(self.drops[i]), "collisions": int(self.collisions[i])})
        return rows


def _pack(values, dtype, compiled: bool):
    arr = np.ascontiguousarray(values, dtype=dtype)
    return arr if compiled else arr.tolist()


def prepare(scenario: Scenario, load: Union[float, Sequence[float]], n_agg_max: int,
            duration: float, seed: int, warmup: float = DEFAULT_WARMUP, trace: bool = False,
            cf_end: bool = True, capture_margin: float = 0.0, buffer: int = DEFAULT_BUFFER,
            compiled: bool = False, hold_restrictions: bool = False) -> tuple[dict, dict]:
    dep = scenario.deployment
    n = dep.n_bss
    if any(len(b.stas) != 1 for b in dep.bsses):
        raise SimulationError("the simulator serves one STA per BSS")
    if not duration > 0:
        raise SimulationError("duration must be positive")
    if not 0 <= warmup < duration:
        raise SimulationError("warm-up must lie in [0, duration)")
    if not 1 <= n_agg_max <= scenario.mac.n_agg_max:
        raise SimulationError(f"n_agg_max must be in 1..{scenario.mac.n_agg_max}")
    if buffer < 1:
        raise SimulationError("buffer must hold at least one packet")
    loads = [float(load)] * n if np.isscalar(load) else [float(x) for x in load]
    if len(loads) != n or any(not (x >= 0) for x in loads):
        raise SimulationError("need one non-negative load per BSS")

    phy, mac = scenario.phy, scenario.mac
    gdb = scenario.gain_matrix()
    for i in range(2 * n):
        for j in range(2 * n):
            if dep.bsses[i // 2].channel != dep.bsses[j // 2].channel:
                gdb[i, j] = -np.inf
    gdb = np.where(np.isfinite(gdb), gdb, -1e9)
    glin = np.where(gdb > -1e8, 10.0 ** (gdb / 10.0), 0.0)

    thr = np.zeros((n, n))
    rval = np.full((n, n), 1e300)
    cls = np.zeros((n, n), dtype=np.intc)
    for a in range(n):
        cfg = scenario.configs[a]
        for x in range(n):
            if x == a:
                thr[a, x] = cfg.cca_cs
                continue
            frame = srcore.FrameMeta(srcore.PpduFormat.HE, bss_color=dep.bsses[x].color, src_bss=x)
            c = srcore.classify_frame(cfg, dep.bsses[a].color, frame)
            cls[a, x] = int(c)
            thr[a, x] = srcore.effective_sensitivity(cfg, c)
            if c.is_inter and thr[a, x] > cfg.cca_cs:
                r = srcore.tx_power_restriction(thr[a, x], cfg.tx_pwr_ref)
                if r is not None:
                    rval[a, x] = r

    table = scenario.mcs_table
    n_mcs = len(table)
    nmax = [max_aggregation(m, phy, mac) for m in table]
    tdata = np.zeros((n_mcs, n_agg_max))
    for mi, m in enumerate(table):
        for k in range(1, n_agg_max + 1):
            tdata[mi, k - 1] = frame_durations(k, m, phy, mac).t_data
    fd = frame_durations(1, table[0], phy, mac)

    children = np.random.SeedSequence(int(seed)).spawn(n)
    rng = np.concatenate([c.generate_state(2, np.uint64) for c in children])

    rate = np.array([x / mac.l_d if math.isfinite(x) else 0.0 for x in loads])
    full = np.array([0 if math.isfinite(x) else 1 for x in loads], dtype=np.intc)
    inf = 1e300
    params = dict(n=n, n_mcs=n_mcs, n_agg_max=int(n_agg_max), cap=int(buffer),
                  noise_mw=10.0 ** (phy.noise / 10.0),
                  ctrl_lin=10.0 ** (table[0].min_sinr / 10.0), margin_db=float(capture_margin),
                  t_rts=fd.t_rts, t_cts=fd.t_cts, t_ack=mac.t_ack, t_back=mac.t_back,
                  t_cfend=fd.t_rts, sifs=mac.t_sifs, difs=mac.t_difs, te=mac.t_e, cw=float(mac.cw),
                  duration=float(duration), warmup=float(warmup), cf_end=bool(cf_end),
                  hold_restrictions=bool(hold_restrictions), trace=bool(trace))
    f64, i32, i64 = np.float64, np.intc, np.int_
    zeros_i = lambda k: _pack(np.zeros(k), i32, compiled)
    zeros_f = lambda k: _pack(np.zeros(k), f64, compiled)
    zeros_l = lambda k: _pack(np.zeros(k), i64, compiled)
    arrays = dict(
        gdb=_pack(gdb.ravel(), f64, compiled), glin=_pack(glin.ravel(), f64, compiled),
        cca=_pack([c.cca_cs for c in scenario.configs], f64, compiled),
        thr=_pack(thr.ravel(), f64, compiled), rval=_pack(rval.ravel(), f64, compiled),
        cls=_pack(cls.ravel(), i32, compiled),
        txp=_pack([c.tx_pwr for c in scenario.configs], f64, compiled),
        rate=_pack(rate, f64, compiled), mcs_sinr=_pack([m.min_sinr for m in table], f64, compiled),
        nmax=_pack(nmax, i32, compiled), tdata=_pack(tdata.ravel(), f64, compiled),
        rng=(np.ascontiguousarray(rng, dtype=np.uint64) if compiled else [int(v) for v in rng]),
        tm=_pack(np.full(n * 5, inf), f64, compiled),
        phase=zeros_i(n), step=zeros_i(n), bo_rem=zeros_f(n), counting=zeros_i(n),
        count_start=zeros_f(n), busy_cnt=zeros_i(n), busy_mark=zeros_i(n * n),
        nav_intra=zeros_f(n), nav_inter=zeros_f(n), restr_exp=zeros_f(n * n),
        ex_pwr=zeros_f(n), ex_mcs=zeros_i(n), ex_n=zeros_i(n), ex_start=zeros_f(n),
        ex_nav=zeros_f(n), ex_ok=zeros_i(n),
        f_active=zeros_i(n), f_tx=zeros_i(n), f_rx=zeros_i(n), f_kind=zeros_i(n),
        f_dbm=zeros_f(n), f_mw=zeros_f(n), f_sig=zeros_f(n), f_min=zeros_f(n), f_end=zeros_f(n),
        q_t=zeros_f(n * buffer), q_head=zeros_i(n), q_len=zeros_i(n),
        next_arr=_pack(np.full(n, inf), f64, compiled), full=_pack(full, i32, compiled),
        c_gen=zeros_l(n), c_drop_total=zeros_l(n), c_deliv_total=zeros_l(n), c_deliv=zeros_l(n),
        c_drop=zeros_l(n), c_fail=zeros_l(n), c_infeasible=zeros_l(n), c_attempt=zeros_l(n),
        delay_sum=zeros_f(n), occ=zeros_f(n),
    )
    return params, arrays


def format_trace(records, n_bss: int) -> list[str]:
    """Render kernel trace tuples as ``time_us,node,event,detail`` lines."""
    out = []
    for t, node, code, x, y in records:
        ev = EVENT_NAMES[code]
        if ev in ("nav_set",):
            detail = f"{NAV_NAMES[int(x)]}:{y * 1e6:.3f}"
        elif ev == "nav_reset":
            detail = f"{NAV_NAMES[int(x)]}:bss{int(y)}"
        elif ev in ("frame_start", "frame_end"):
            detail = f"{FRAME_NAMES[int(x)]}:{y:g}" if ev == "frame_start" else FRAME_NAMES[int(x)]
        elif ev == "sr_ignore":
            detail = f"bss{int(x)}:{y:g}"
        elif ev == "tx_start":
            detail = f"{x:g}dBm:mcs{int(y) // 1000}:n{int(y) % 1000}"
        elif ev in ("bo_resume", "bo_freeze"):
            detail = f"{x * 1e6:.3f}"
        elif ev == "infeasible":
            detail = f"{x:g}dBm:{y:.2f}dB"
        elif ev == "drop":
            detail = f"{x * 1e6:.3f}"
        else:
            detail = f"{x:g}"
        out.append(f"{t * 1e6:.3f},{node},{ev},{detail}")
    return out


def run(scenario: Scenario, load: Union[float, Sequence[float]] = math.inf, n_agg_max: int = 64,
        duration: float = 30.0, seed: int = 0, warmup: float = DEFAULT_WARMUP, trace: bool = False,
        cf_end: bool = True, capture_margin: float = 0.0, buffer: int = DEFAULT_BUFFER,
        backend: Optional[str] = None, hold_restrictions: bool = False) -> MetricsReport:
    """Simulate ``scenario`` and report per-BSS metrics.

    ``load`` is the offered downlink load in bit/s (per BSS or one value
    for all); ``math.inf`` keeps every AP backlogged. With
    ``hold_restrictions`` a power restriction picked up by ignoring a frame
    stays in force until the end of the AP's next exchange; otherwise it
    lapses when the ignored transmission ends.
    """
    mod = kernel_module(backend)
    params, arrays = prepare(scenario, load, n_agg_max, duration, seed, warmup, trace, cf_end,
                             capture_margin, buffer, compiled=mod.COMPILED,
                             hold_restrictions=hold_restrictions)
    k = mod.Kernel(params, arrays)
    n_events = k.run()
    a = {key: np.asarray(v) for key, v in arrays.items()}
    n = params["n"]
    window = duration - warmup
    deliv = a["c_deliv"]
    with np.errstate(invalid="ignore", divide="ignore"):
        delay = np.where(deliv > 0, a["delay_sum"] / np.maximum(deliv, 1), np.nan)
    delay = np.where(a["full"] == 1, np.nan, delay)
    in_flight = np.where((a["phase"] == 2) & (a["ex_ok"] == 0) & (a["full"] == 0), a["ex_n"], 0)
    queued = np.where(a["full"] == 1, 0, a["q_len"] - in_flight)
    occ = a["occ"] / window
    if np.any(occ > 1 + 1e-9):
        raise AccountingError("occupancy above one: exchange accounting is corrupt")
    report = MetricsReport(
        bss_names=tuple(b.name for b in scenario.deployment.bsses),
        throughput=deliv * scenario.mac.l_d / window, occupancy=np.minimum(occ, 1.0), delay=delay,
        drops=a["c_drop"].copy(), collisions=a["c_fail"].copy(), infeasible=a["c_infeasible"].copy(),
        attempts=a["c_attempt"].copy(),
        generated=np.where(a["full"] == 1, a["c_deliv_total"], a["c_gen"]),
        delivered_total=a["c_deliv_total"].copy(), dropped_total=a["c_drop_total"].copy(),
        queued=queued.astype(np.int64), in_flight=in_flight.astype(np.int64),
        n_events=int(n_events), backend="compiled" if mod.COMPILED else "python",
        trace=format_trace(k.trace, n) if trace else None)
    return report
