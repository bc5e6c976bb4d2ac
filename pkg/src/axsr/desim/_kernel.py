"""Event loop of the CSMA/CA simulator.

Written in Cython's pure-Python mode: it runs as ordinary Python and the
build compiles the same file into an extension module. All state lives in
flat arrays indexed by BSS (AP of BSS b is node 2b, its STA node 2b + 1).
Inputs are prepared by :mod:`axsr.desim.engine`.
"""
import cython
from cython.cimports.libc.math import log as c_log, pow as c_pow

COMPILED = cython.compiled

MASK = cython.declare(cython.ulonglong, 0xFFFFFFFFFFFFFFFF)
INF = cython.declare(cython.double, 1e300)

# AP phases
IDLE_EMPTY = cython.declare(cython.int, 0)
CONTEND = cython.declare(cython.int, 1)
EXCH = cython.declare(cython.int, 2)

# timers, NT per BSS; ties resolve by (time, bss, timer)
TM_PHASE = cython.declare(cython.int, 0)
TM_RESUME = cython.declare(cython.int, 1)
TM_BACKOFF = cython.declare(cython.int, 2)
TM_ARRIVAL = cython.declare(cython.int, 3)
TM_NAV = cython.declare(cython.int, 4)
NT = cython.declare(cython.int, 5)

# exchange steps
S_RTS_END = cython.declare(cython.int, 0)
S_CTS_START = cython.declare(cython.int, 1)
S_CTS_END = cython.declare(cython.int, 2)
S_DATA_START = cython.declare(cython.int, 3)
S_DATA_END = cython.declare(cython.int, 4)
S_RESP_START = cython.declare(cython.int, 5)
S_RESP_END = cython.declare(cython.int, 6)
S_TIMEOUT = cython.declare(cython.int, 7)
S_CFEND_END = cython.declare(cython.int, 8)
S_DONE = cython.declare(cython.int, 9)

# frame kinds
K_RTS = cython.declare(cython.int, 0)
K_CTS = cython.declare(cython.int, 1)
K_DATA = cython.declare(cython.int, 2)
K_RESP = cython.declare(cython.int, 3)
K_CFEND = cython.declare(cython.int, 4)

# trace codes, names live in the engine
EV_BO_RESUME = cython.declare(cython.int, 0)
EV_BO_FREEZE = cython.declare(cython.int, 1)
EV_BO_EXPIRE = cython.declare(cython.int, 2)
EV_NAV_SET = cython.declare(cython.int, 3)
EV_NAV_RESET = cython.declare(cython.int, 4)
EV_SR_IGNORE = cython.declare(cython.int, 5)
EV_TX_START = cython.declare(cython.int, 6)
EV_FRAME_START = cython.declare(cython.int, 7)
EV_FRAME_END = cython.declare(cython.int, 8)
EV_SUCCESS = cython.declare(cython.int, 9)
EV_FAIL = cython.declare(cython.int, 10)
EV_INFEASIBLE = cython.declare(cython.int, 11)
EV_DROP = cython.declare(cython.int, 12)


@cython.cclass
class Kernel:
    n: cython.int
    nn: cython.int
    n_mcs: cython.int
    n_agg_max: cython.int
    cap: cython.int
    gdb: cython.double[::1]
    glin: cython.double[::1]
    cca: cython.double[::1]
    thr: cython.double[::1]
    rval: cython.double[::1]
    cls: cython.int[::1]
    txp: cython.double[::1]
    rate: cython.double[::1]
    mcs_sinr: cython.double[::1]
    nmax: cython.int[::1]
    tdata: cython.double[::1]
    noise: cython.double
    ctrl_lin: cython.double
    margin_db: cython.double
    t_rts: cython.double
    t_cts: cython.double
    t_ack: cython.double
    t_back: cython.double
    t_cfend: cython.double
    sifs: cython.double
    difs: cython.double
    te: cython.double
    cw: cython.double
    duration: cython.double
    warmup: cython.double
    cf_end: cython.bint
    hold_restr: cython.bint
    tracing: cython.bint
    now: cython.double
    rng: cython.ulonglong[::1]
    tm: cython.double[::1]
    phase: cython.int[::1]
    step: cython.int[::1]
    bo_rem: cython.double[::1]
    counting: cython.int[::1]
    count_start: cython.double[::1]
    busy_cnt: cython.int[::1]
    busy_mark: cython.int[::1]
    nav_intra: cython.double[::1]
    nav_inter: cython.double[::1]
    restr_exp: cython.double[::1]
    ex_pwr: cython.double[::1]
    ex_mcs: cython.int[::1]
    ex_n: cython.int[::1]
    ex_start: cython.double[::1]
    ex_nav: cython.double[::1]
    ex_ok: cython.int[::1]
    f_active: cython.int[::1]
    f_tx: cython.int[::1]
    f_rx: cython.int[::1]
    f_kind: cython.int[::1]
    f_dbm: cython.double[::1]
    f_mw: cython.double[::1]
    f_sig: cython.double[::1]
    f_min: cython.double[::1]
    f_end: cython.double[::1]
    q_t: cython.double[::1]
    q_head: cython.int[::1]
    q_len: cython.int[::1]
    next_arr: cython.double[::1]
    full: cython.int[::1]
    # counters
    c_gen: cython.long[::1]
    c_drop_total: cython.long[::1]
    c_deliv_total: cython.long[::1]
    c_deliv: cython.long[::1]
    c_drop: cython.long[::1]
    c_fail: cython.long[::1]
    c_infeasible: cython.long[::1]
    c_attempt: cython.long[::1]
    delay_sum: cython.double[::1]
    occ: cython.double[::1]
    n_events: cython.long
    trace = cython.declare(list, visibility="public")

    def __init__(self, p: dict, arrays: dict):
        self.n = p["n"]
        self.nn = 2 * self.n
        self.n_mcs = p["n_mcs"]
        self.n_agg_max = p["n_agg_max"]
        self.cap = p["cap"]
        self.noise = p["noise_mw"]
        self.ctrl_lin = p["ctrl_lin"]
        self.margin_db = p["margin_db"]
        self.t_rts = p["t_rts"]
        self.t_cts = p["t_cts"]
        self.t_ack = p["t_ack"]
        self.t_back = p["t_back"]
        self.t_cfend = p["t_cfend"]
        self.sifs = p["sifs"]
        self.difs = p["difs"]
        self.te = p["te"]
        self.cw = p["cw"]
        self.duration = p["duration"]
        self.warmup = p["warmup"]
        self.cf_end = p["cf_end"]
        self.hold_restr = p["hold_restrictions"]
        self.tracing = p["trace"]
        self.now = 0.0
        self.n_events = 0
        self.trace = []
        a = arrays
        self.gdb = a["gdb"]
        self.glin = a["glin"]
        self.cca = a["cca"]
        self.thr = a["thr"]
        self.rval = a["rval"]
        self.cls = a["cls"]
        self.txp = a["txp"]
        self.rate = a["rate"]
        self.mcs_sinr = a["mcs_sinr"]
        self.nmax = a["nmax"]
        self.tdata = a["tdata"]
        self.rng = a["rng"]
        self.tm = a["tm"]
        self.phase = a["phase"]
        self.step = a["step"]
        self.bo_rem = a["bo_rem"]
        self.counting = a["counting"]
        self.count_start = a["count_start"]
        self.busy_cnt = a["busy_cnt"]
        self.busy_mark = a["busy_mark"]
        self.nav_intra = a["nav_intra"]
        self.nav_inter = a["nav_inter"]
        self.restr_exp = a["restr_exp"]
        self.ex_pwr = a["ex_pwr"]
        self.ex_mcs = a["ex_mcs"]
        self.ex_n = a["ex_n"]
        self.ex_start = a["ex_start"]
        self.ex_nav = a["ex_nav"]
        self.ex_ok = a["ex_ok"]
        self.f_active = a["f_active"]
        self.f_tx = a["f_tx"]
        self.f_rx = a["f_rx"]
        self.f_kind = a["f_kind"]
        self.f_dbm = a["f_dbm"]
        self.f_mw = a["f_mw"]
        self.f_sig = a["f_sig"]
        self.f_min = a["f_min"]
        self.f_end = a["f_end"]
        self.q_t = a["q_t"]
        self.q_head = a["q_head"]
        self.q_len = a["q_len"]
        self.next_arr = a["next_arr"]
        self.full = a["full"]
        self.c_gen = a["c_gen"]
        self.c_drop_total = a["c_drop_total"]
        self.c_deliv_total = a["c_deliv_total"]
        self.c_deliv = a["c_deliv"]
        self.c_drop = a["c_drop"]
        self.c_fail = a["c_fail"]
        self.c_infeasible = a["c_infeasible"]
        self.c_attempt = a["c_attempt"]
        self.delay_sum = a["delay_sum"]
        self.occ = a["occ"]

    # ------------------------------------------------------------ helpers

    @cython.cfunc
    def _u01(self, stream: cython.int) -> cython.double:
        """splitmix64 draw in [0, 1)."""
        z: cython.ulonglong = (self.rng[stream] + 0x9E3779B97F4A7C15) & MASK
        self.rng[stream] = z
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        z = z ^ (z >> 31)
        return (z >> 11) * (1.0 / 9007199254740992.0)

    @cython.cfunc
    def _emit(self, node: cython.int, code: cython.int, x: cython.double, y: cython.double) -> cython.void:
        self.trace.append((self.now, node, code, x, y))

    @cython.cfunc
    def _idle(self, b: cython.int) -> cython.bint:
        return (self.busy_cnt[b] == 0 and self.nav_intra[b] <= self.now
                and self.nav_inter[b] <= self.now)

    @cython.cfunc
    def _listening(self, b: cython.int) -> cython.bint:
        # an AP inside its own exchange ignores other frames until the final gap
        return self.phase[b] != EXCH or self.step[b] == S_DONE

    @cython.cfunc
    def _freeze(self, b: cython.int) -> cython.void:
        if self.counting[b]:
            rem: cython.double = self.bo_rem[b] - (self.now - self.count_start[b])
            self.bo_rem[b] = rem if rem > 0.0 else 0.0
            self.counting[b] = 0
            self.tm[b * NT + TM_BACKOFF] = INF
            if self.tracing:
                self._emit(2 * b, EV_BO_FREEZE, self.bo_rem[b], 0.0)
        self.tm[b * NT + TM_RESUME] = INF

    @cython.cfunc
    def _start_counting(self, b: cython.int) -> cython.void:
        self.counting[b] = 1
        self.count_start[b] = self.now
        self.tm[b * NT + TM_RESUME] = INF
        self.tm[b * NT + TM_BACKOFF] = self.now + self.bo_rem[b]
        if self.tracing:
            self._emit(2 * b, EV_BO_RESUME, self.bo_rem[b], 0.0)

    @cython.cfunc
    def _reeval(self, b: cython.int) -> cython.void:
        if self.phase[b] != CONTEND:
            return
        if self._idle(b):
            if not self.counting[b] and self.tm[b * NT + TM_RESUME] >= INF:
                self.tm[b * NT + TM_RESUME] = self.now + self.difs
        else:
            self._freeze(b)

    @cython.cfunc
    def _set_nav_timer(self, b: cython.int) -> cython.void:
        t: cython.double = INF
        if self.nav_intra[b] > self.now:
            t = self.nav_intra[b]
        if self.nav_inter[b] > self.now and self.nav_inter[b] < t:
            t = self.nav_inter[b]
        self.tm[b * NT + TM_NAV] = t

    @cython.cfunc
    def _sync_arrivals(self, b: cython.int) -> cython.void:
        r: cython.double = self.rate[b]
        pos: cython.int
        t: cython.double
        if self.full[b] or r <= 0.0:
            return
        while self.next_arr[b] <= self.now:
            t = self.next_arr[b]
            self.c_gen[b] += 1
            if self.q_len[b] < self.cap:
                pos = (self.q_head[b] + self.q_len[b]) % self.cap
                self.q_t[b * self.cap + pos] = t
                self.q_len[b] += 1
            else:
                self.c_drop_total[b] += 1
                if t >= self.warmup:
                    self.c_drop[b] += 1
                if self.tracing:
                    self._emit(2 * b, EV_DROP, t, 0.0)
            self.next_arr[b] = t - c_log(1.0 - self._u01(2 * b + 1)) / r

    @cython.cfunc
    def _queue_len(self, b: cython.int) -> cython.int:
        if self.full[b]:
            return self.n_agg_max
        return self.q_len[b]

    @cython.cfunc
    def _interference(self, rx: cython.int, skip: cython.int) -> cython.double:
        tot: cython.double = self.noise
        g: cython.int
        for g in range(self.n):
            if g != skip and self.f_active[g]:
                tot += self.f_mw[g] * self.glin[self.f_tx[g] * self.nn + rx]
        return tot

    # ------------------------------------------------------------ frames

    @cython.cfunc
    def _start_frame(self, b: cython.int, tx: cython.int, rx: cython.int, kind: cython.int,
                     dur: cython.double, nav_end: cython.double) -> cython.void:
        p: cython.double = self.ex_pwr[b]
        g: cython.int
        a: cython.int
        s: cython.double
        r: cython.double
        th: cython.double
        c: cython.int
        end: cython.double
        self.f_active[b] = 1
        self.f_tx[b] = tx
        self.f_rx[b] = rx
        self.f_kind[b] = kind
        self.f_dbm[b] = p
        self.f_mw[b] = c_pow(10.0, p / 10.0)
        self.f_sig[b] = self.f_mw[b] * self.glin[tx * self.nn + rx]
        self.f_min[b] = INF
        self.f_end[b] = self.now + dur
        for g in range(self.n):
            if self.f_active[g]:
                s = self.f_sig[g] / self._interference(self.f_rx[g], g)
                if s < self.f_min[g]:
                    self.f_min[g] = s
        if self.tracing:
            self._emit(tx, EV_FRAME_START, kind, p)
        for a in range(self.n):
            if a == b:
                continue
            r = p + self.gdb[tx * self.nn + 2 * a]
            if r < self.cca[a]:
                continue
            th = self.thr[a * self.n + b]
            if r < th:
                # inter-BSS frame ignored through OBSS/PD
                if self._listening(a) and self.rval[a * self.n + b] < INF:
                    if self.hold_restr:
                        end = INF  # kept until this AP's next exchange ends
                    else:
                        end = nav_end if nav_end > self.f_end[b] else self.f_end[b]
                    if end > self.restr_exp[a * self.n + b]:
                        self.restr_exp[a * self.n + b] = end
                    if self.tracing:
                        self._emit(2 * a, EV_SR_IGNORE, b, self.rval[a * self.n + b])
                continue
            self.busy_mark[b * self.n + a] = 1
            self.busy_cnt[a] += 1
            if self._listening(a):
                s = self.f_mw[b] * self.glin[tx * self.nn + 2 * a] / self._interference(2 * a, b)
                if s >= self.ctrl_lin:
                    c = self.cls[a * self.n + b]
                    if kind == K_CFEND:
                        if c == 0:
                            if self.nav_intra[a] > self.now:
                                self.nav_intra[a] = self.now
                            if self.tracing:
                                self._emit(2 * a, EV_NAV_RESET, 0, b)
                        else:
                            if self.nav_inter[a] > self.now:
                                self.nav_inter[a] = self.now
                            if self.tracing:
                                self._emit(2 * a, EV_NAV_RESET, 1, b)
                        self._set_nav_timer(a)
                    elif nav_end > self.now:
                        if c == 0:
                            if nav_end > self.nav_intra[a]:
                                self.nav_intra[a] = nav_end
                                if self.tracing:
                                    self._emit(2 * a, EV_NAV_SET, 0, nav_end)
                        else:
                            if nav_end > self.nav_inter[a]:
                                self.nav_inter[a] = nav_end
                                if self.tracing:
                                    self._emit(2 * a, EV_NAV_SET, 1, nav_end)
                        self._set_nav_timer(a)
            self._reeval(a)

    @cython.cfunc
    def _end_frame(self, b: cython.int, need_db: cython.double) -> cython.bint:
        a: cython.int
        self.f_active[b] = 0
        if self.tracing:
            self._emit(self.f_tx[b], EV_FRAME_END, self.f_kind[b], 0.0)
        for a in range(self.n):
            if self.busy_mark[b * self.n + a]:
                self.busy_mark[b * self.n + a] = 0
                self.busy_cnt[a] -= 1
                self._reeval(a)
        return self.f_min[b] >= c_pow(10.0, (need_db + self.margin_db) / 10.0)

    # ------------------------------------------------------------ AP logic

    @cython.cfunc
    def _contend(self, b: cython.int, immediate: cython.bint) -> cython.void:
        self.phase[b] = CONTEND
        self.bo_rem[b] = self._u01(2 * b) * self.cw * self.te
        self.counting[b] = 0
        self.tm[b * NT + TM_RESUME] = INF
        self.tm[b * NT + TM_BACKOFF] = INF
        if immediate and self._idle(b):
            self._start_counting(b)
        else:
            self._reeval(b)

    @cython.cfunc
    def _go_idle_or_contend(self, b: cython.int, immediate: cython.bint) -> cython.void:
        self._sync_arrivals(b)
        if self._queue_len(b) > 0:
            self._contend(b, immediate)
        else:
            self.phase[b] = IDLE_EMPTY
            self.counting[b] = 0
            self.tm[b * NT + TM_ARRIVAL] = self.next_arr[b]

    @cython.cfunc
    def _exchange_time(self, b: cython.int) -> cython.double:
        m: cython.int = self.ex_mcs[b]
        k: cython.int = self.ex_n[b]
        resp: cython.double = self.t_ack if k == 1 else self.t_back
        return (self.t_rts + self.sifs + self.t_cts + self.sifs
                + self.tdata[m * self.n_agg_max + k - 1] + self.sifs + resp)

    @cython.cfunc
    def _begin_exchange(self, b: cython.int) -> cython.void:
        x: cython.int
        m: cython.int
        k: cython.int
        best: cython.int = -1
        ap: cython.int = 2 * b
        sta: cython.int = 2 * b + 1
        self._sync_arrivals(b)
        if self._queue_len(b) == 0:
            self._go_idle_or_contend(b, False)
            return
        p: cython.double = self.txp[b]
        r: cython.double
        for x in range(self.n):
            if self.rval[b * self.n + x] >= p:
                continue
            if self.restr_exp[b * self.n + x] > self.now:
                p = self.rval[b * self.n + x]
            elif x != b and self.phase[x] == EXCH and self.step[x] != S_DONE:
                # ongoing exchange whose preamble was missed during our own one
                r = self.ex_pwr[x] + self.gdb[2 * x * self.nn + ap]
                if r >= self.cca[b] and r < self.thr[b * self.n + x]:
                    p = self.rval[b * self.n + x]
        sinr_db: cython.double = 10.0 * c_log(
            c_pow(10.0, p / 10.0) * self.glin[ap * self.nn + sta] / self._interference(sta, b)) / c_log(10.0)
        for m in range(self.n_mcs):
            if self.mcs_sinr[m] <= sinr_db:
                best = m
        self.c_attempt[b] += 1
        if best < 0:
            if self.now >= self.warmup:
                self.c_infeasible[b] += 1
            if self.tracing:
                self._emit(ap, EV_INFEASIBLE, p, sinr_db)
            self._clear_restrictions(b)
            self._contend(b, False)
            return
        k = self._queue_len(b)
        if k > self.n_agg_max:
            k = self.n_agg_max
        if k > self.nmax[best]:
            k = self.nmax[best]
        self.phase[b] = EXCH
        self.counting[b] = 0
        self.tm[b * NT + TM_RESUME] = INF
        self.tm[b * NT + TM_BACKOFF] = INF
        self.ex_pwr[b] = p
        self.ex_mcs[b] = best
        self.ex_n[b] = k
        self.ex_start[b] = self.now
        self.ex_ok[b] = 0
        self.ex_nav[b] = self.now + self._exchange_time(b)
        if self.tracing:
            self._emit(ap, EV_TX_START, p, best * 1000 + k)
        self._start_frame(b, ap, sta, K_RTS, self.t_rts, self.ex_nav[b])
        self.step[b] = S_RTS_END
        self.tm[b * NT + TM_PHASE] = self.now + self.t_rts

    @cython.cfunc
    def _clear_restrictions(self, b: cython.int) -> cython.void:
        x: cython.int
        if self.hold_restr:
            for x in range(self.n):
                self.restr_exp[b * self.n + x] = 0.0

    @cython.cfunc
    def _add_occupancy(self, b: cython.int) -> cython.void:
        lo: cython.double = self.ex_start[b]
        if lo < self.warmup:
            lo = self.warmup
        if self.now > lo:
            self.occ[b] += self.now - lo
        self.ex_ok[b] = 1  # occupancy of this exchange is closed
        self._clear_restrictions(b)

    @cython.cfunc
    def _fail(self, b: cython.int) -> cython.void:
        if self.now >= self.warmup:
            self.c_fail[b] += 1
        if self.tracing:
            self._emit(2 * b, EV_FAIL, self.step[b], 0.0)
        if self.cf_end:
            self._start_frame(b, 2 * b, 2 * b + 1, K_CFEND, self.t_cfend, self.now)
            self.step[b] = S_CFEND_END
            self.tm[b * NT + TM_PHASE] = self.now + self.t_cfend
        else:
            self._add_occupancy(b)
            self.step[b] = S_DONE
            self.tm[b * NT + TM_PHASE] = self.now + self.difs + self.te

    @cython.cfunc
    def _success(self, b: cython.int) -> cython.void:
        i: cython.int
        k: cython.int = self.ex_n[b]
        t0: cython.double
        self._sync_arrivals(b)
        self.c_deliv_total[b] += k
        if self.now >= self.warmup:
            self.c_deliv[b] += k
        if not self.full[b]:
            for i in range(k):
                t0 = self.q_t[b * self.cap + self.q_head[b]]
                self.q_head[b] = (self.q_head[b] + 1) % self.cap
                if self.now >= self.warmup:
                    self.delay_sum[b] += self.now - t0
            self.q_len[b] -= k
        if self.tracing:
            self._emit(2 * b, EV_SUCCESS, k, 0.0)
        self._add_occupancy(b)
        self.step[b] = S_DONE
        self.tm[b * NT + TM_PHASE] = self.now + self.difs + self.te

    @cython.cfunc
    def _phase(self, b: cython.int) -> cython.void:
        s: cython.int = self.step[b]
        ap: cython.int = 2 * b
        sta: cython.int = 2 * b + 1
        ctrl: cython.double = self.mcs_sinr[0]
        resp: cython.double = self.t_ack if self.ex_n[b] == 1 else self.t_back
        if s == S_RTS_END:
            if self._end_frame(b, ctrl):
                self.step[b] = S_CTS_START
                self.tm[b * NT + TM_PHASE] = self.now + self.sifs
            else:
                self.step[b] = S_TIMEOUT
                self.tm[b * NT + TM_PHASE] = self.now + self.sifs + self.t_cts
        elif s == S_CTS_START:
            self._start_frame(b, sta, ap, K_CTS, self.t_cts, self.ex_nav[b])
            self.step[b] = S_CTS_END
            self.tm[b * NT + TM_PHASE] = self.now + self.t_cts
        elif s == S_CTS_END:
            if self._end_frame(b, ctrl):
                self.step[b] = S_DATA_START
                self.tm[b * NT + TM_PHASE] = self.now + self.sifs
            else:
                self._fail(b)
        elif s == S_DATA_START:
            self._start_frame(b, ap, sta, K_DATA,
                              self.tdata[self.ex_mcs[b] * self.n_agg_max + self.ex_n[b] - 1],
                              self.ex_nav[b])
            self.step[b] = S_DATA_END
            self.tm[b * NT + TM_PHASE] = self.f_end[b]
        elif s == S_DATA_END:
            if self._end_frame(b, self.mcs_sinr[self.ex_mcs[b]]):
                self.step[b] = S_RESP_START
                self.tm[b * NT + TM_PHASE] = self.now + self.sifs
            else:
                self.step[b] = S_TIMEOUT
                self.tm[b * NT + TM_PHASE] = self.now + self.sifs + resp
        elif s == S_RESP_START:
            self._start_frame(b, sta, ap, K_RESP, resp, self.ex_nav[b])
            self.step[b] = S_RESP_END
            self.tm[b * NT + TM_PHASE] = self.now + resp
        elif s == S_RESP_END:
            if self._end_frame(b, ctrl):
                self._success(b)
            else:
                self._fail(b)
        elif s == S_TIMEOUT:
            self._fail(b)
        elif s == S_CFEND_END:
            self._end_frame(b, ctrl)
            self._add_occupancy(b)
            self.step[b] = S_DONE
            self.tm[b * NT + TM_PHASE] = self.now + self.difs + self.te
        elif s == S_DONE:
            self._go_idle_or_contend(b, True)

    # ------------------------------------------------------------ main loop

    def run(self) -> int:
        b: cython.int
        i: cython.int
        k: cython.int
        best: cython.int
        total: cython.int = self.n * NT
        t: cython.double
        for b in range(self.n):
            if not self.full[b] and self.rate[b] > 0.0:
                self.next_arr[b] = -c_log(1.0 - self._u01(2 * b + 1)) / self.rate[b]
            self._sync_arrivals(b)
            if self._queue_len(b) > 0:
                self._contend(b, False)
            else:
                self.phase[b] = IDLE_EMPTY
                self.tm[b * NT + TM_ARRIVAL] = self.next_arr[b]
        while True:
            best = -1
            t = INF
            for i in range(total):
                if self.tm[i] < t:
                    t = self.tm[i]
                    best = i
            if best < 0 or t > self.duration:
                break
            self.now = t
            self.tm[best] = INF
            self.n_events += 1
            b = best // NT
            k = best - b * NT
            if k == TM_PHASE:
                self._phase(b)
            elif k == TM_RESUME:
                if self.phase[b] == CONTEND and not self.counting[b] and self._idle(b):
                    self._start_counting(b)
            elif k == TM_BACKOFF:
                self.counting[b] = 0
                self.bo_rem[b] = 0.0
                if self.tracing:
                    self._emit(2 * b, EV_BO_EXPIRE, 0.0, 0.0)
                self._begin_exchange(b)
            elif k == TM_ARRIVAL:
                if self.phase[b] == IDLE_EMPTY:
                    self._go_idle_or_contend(b, False)
            elif k == TM_NAV:
                self._set_nav_timer(b)
                self._reeval(b)
        self.now = self.duration
        for b in range(self.n):
            self._sync_arrivals(b)
            if self.phase[b] == EXCH and self.ex_ok[b] == 0:
                self._add_occupancy(b)
        return self.n_events
