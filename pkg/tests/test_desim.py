import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axsr.desim import (
    AccountingError, SimulationError, available_backends, kernel_module, run,
)
from axsr.desim.audit import audit_trace
from axsr.desim.node import (
    Detection, NodeState, Packet, Phase, PowerRestriction, Role, on_cf_end, on_frame_detected,
    reception_outcome, start_transmission,
)
from axsr.propagation import HE_MCS_TABLE, frame_durations, saturated_throughput
from axsr.scenario import Deployment, grid_setup, sr_mask, toy_setup, with_obss_pd
from axsr.srcore import FrameKind, FrameMeta, PpduFormat, SrConfig

HAS_COMPILED = "compiled" in available_backends()


def single_bss():
    sc = toy_setup(1)
    dep = Deployment(sc.deployment.bsses[:1], 10, 10)
    return replace(sc, deployment=dep, configs=sc.configs[:1])


def _same(a, b):
    for f in ("throughput", "occupancy", "drops", "collisions", "infeasible", "attempts",
              "generated", "delivered_total", "dropped_total", "queued", "in_flight"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
    np.testing.assert_array_equal(np.nan_to_num(a.delay, nan=-1), np.nan_to_num(b.delay, nan=-1))
    assert a.n_events == b.n_events


# engine

def test_deterministic_for_seed():
    sc = with_obss_pd(toy_setup(2), [True] * 3, -70, -66)
    a = run(sc, load=60e6, duration=2, seed=5, warmup=0.5)
    b = run(sc, load=60e6, duration=2, seed=5, warmup=0.5)
    _same(a, b)
    c = run(sc, load=60e6, duration=2, seed=6, warmup=0.5)
    assert not np.array_equal(a.throughput, c.throughput)


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernel not built")
@pytest.mark.parametrize("load", [math.inf, 24e6])
def test_backends_agree(load):
    sc = with_obss_pd(grid_setup(15, 2), sr_mask("all", 9), -70)
    kw = dict(load=load, duration=0.6, seed=3, warmup=0.1, trace=True)
    a = run(sc, backend="compiled", **kw)
    b = run(sc, backend="python", **kw)
    assert (a.backend, b.backend) == ("compiled", "python")
    _same(a, b)
    assert a.trace == b.trace


def test_unknown_backend():
    with pytest.raises(SimulationError):
        kernel_module("gpu")


@pytest.mark.parametrize("kw", [dict(duration=0), dict(warmup=5, duration=2), dict(n_agg_max=0),
                                dict(n_agg_max=65), dict(buffer=0), dict(load=[1e6, 1e6, 1e6]),
                                dict(load=-1)])
def test_rejects_bad_inputs(kw):
    with pytest.raises(SimulationError):
        run(toy_setup(1), **{"duration": 1, **kw})


def test_accounting_error_is_internal():
    assert issubclass(AccountingError, AssertionError)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), load=st.sampled_from([6e6, 60e6, 200e6]),
       buffer=st.integers(1, 100), pd=st.integers(-82, -62))
def test_conservation(seed, load, buffer, pd):
    sc = with_obss_pd(toy_setup(2), [True] * 3, pd)
    r = run(sc, load=load, duration=0.5, warmup=0.1, seed=seed, buffer=buffer)
    np.testing.assert_array_equal(r.generated, r.delivered_total + r.dropped_total + r.queued + r.in_flight)
    assert (r.occupancy >= 0).all() and (r.occupancy <= 1).all()
    assert (r.queued >= 0).all() and (r.queued <= buffer).all()
    assert (r.delivered_total <= r.generated).all()


def test_single_bss_light_load_delivers_everything():
    r = run(single_bss(), load=12e6, duration=10, seed=1)
    assert r.drops[0] == 0 and r.collisions[0] == 0
    assert r.throughput[0] == pytest.approx(12e6, rel=0.02)
    assert r.generated[0] - r.delivered_total[0] <= 64
    # airtime tracks the offered load
    fd = frame_durations(1, HE_MCS_TABLE[11])
    assert r.occupancy[0] < 0.5 and r.occupancy[0] > 12e6 / 12000 * fd.t_data / 64
    assert 0 < r.delay[0] < 0.01


@pytest.mark.parametrize("n_agg", [1, 64])
def test_single_bss_saturated_matches_cycle_form(n_agg):
    r = run(single_bss(), n_agg_max=n_agg, duration=10, seed=0, warmup=0.0)
    expected = saturated_throughput(HE_MCS_TABLE[11], n_agg=n_agg)
    assert r.throughput[0] == pytest.approx(expected, rel=0.01)
    assert math.isnan(r.delay[0])


def test_sr_paths_inert_when_disabled():
    sc = toy_setup(2)
    off = replace(sc, configs=tuple(replace(c, obss_pd_non_srg=-70, non_srg_sr_disallowed=True)
                                    for c in sc.configs))
    _same(run(sc, duration=1.5, warmup=0.5, seed=9), run(off, duration=1.5, warmup=0.5, seed=9))


def test_two_nav_audit_on_traced_runs():
    for sc in (with_obss_pd(toy_setup(2), [True] * 3, -74, -68),
               with_obss_pd(grid_setup(10, 4), sr_mask("all", 9), -68)):
        r = run(sc, load=120e6, duration=0.5, warmup=0.1, seed=2, trace=True)
        rep = audit_trace(r.trace)
        assert rep.n_events > 100
        assert rep.ok, (rep.backoff_during_nav[:3], rep.bad_cf_end_resets[:3])


def test_audit_flags_violations():
    bad = ["time_us,node,event,detail",
           "0.000,0,nav_set,inter:500.000",
           "10.000,0,bo_resume,20.000",
           "20.000,2,nav_set,intra:900.000",
           "30.000,2,nav_reset,intra:bss0"]
    rep = audit_trace(bad)
    assert rep.backoff_during_nav and rep.bad_cf_end_resets and not rep.ok
    assert rep.inter_cf_end_resets == 1


def test_trace_format():
    r = run(single_bss(), load=12e6, duration=0.2, warmup=0.0, trace=True)
    for line in r.trace:
        t, node, event, detail = line.split(",", 3)
        float(t)
        int(node)
        assert event and detail is not None


# node rules

def ap(cfg=None, color=5):
    return NodeState(Role.AP, cfg or SrConfig(obss_pd_non_srg=-72), color)


def rts(color, duration=1e-3):
    return FrameMeta(PpduFormat.HE, FrameKind.RTS, bss_color=color, duration=duration)


def test_inter_rts_above_threshold_sets_inter_nav():
    n = ap()
    assert on_frame_detected(n, rts(7), -70, now=0.0) is Detection.NAV_SET
    assert n.nav_inter == pytest.approx(1e-3) and n.nav_intra == 0
    assert n.phase is Phase.NAV_BLOCKED


def test_inter_rts_below_threshold_is_ignored_with_restriction():
    n = ap()
    assert on_frame_detected(n, rts(7), -75, now=0.0) is Detection.SR_IGNORED
    assert n.nav_inter == 0
    assert n.power_restrictions == [PowerRestriction(21 - 10, 1e-3)]


def test_intra_rts_sets_intra_nav():
    n = ap()
    assert on_frame_detected(n, rts(5), -75, now=0.0) is Detection.NAV_SET
    assert n.nav_intra == pytest.approx(1e-3) and n.nav_inter == 0


def test_below_cca_and_undecodable():
    n = ap()
    assert on_frame_detected(n, rts(7), -90, now=0.0) is Detection.BELOW_CCA
    assert on_frame_detected(n, rts(7), -70, now=0.0, decodable=False) is Detection.BUSY
    assert n.nav_inter == 0


def test_legacy_ignore_records_no_restriction():
    n = ap(SrConfig())
    assert on_frame_detected(n, rts(7), -85, now=0.0) is Detection.BELOW_CCA
    assert n.power_restrictions == []


def test_transmitting_node_does_not_detect():
    n = ap()
    n.phase = Phase.TX_DATA
    with pytest.raises(ValueError):
        on_frame_detected(n, rts(7), -60, now=0.0)


def test_inter_cf_end_clears_only_inter_nav():
    n = ap()
    n.nav_intra, n.nav_inter, n.phase = 5.0, 4.0, Phase.NAV_BLOCKED
    on_cf_end(n, FrameMeta(PpduFormat.HE, FrameKind.CF_END, bss_color=7), now=1.0)
    assert (n.nav_intra, n.nav_inter) == (5.0, 1.0)
    assert n.phase is Phase.NAV_BLOCKED


def test_intra_cf_end_clears_intra_nav():
    n = ap()
    n.nav_intra, n.phase = 5.0, Phase.NAV_BLOCKED
    on_cf_end(n, FrameMeta(PpduFormat.HE, FrameKind.CF_END, bss_color=5), now=1.0)
    assert n.nav_intra == 1.0 and n.phase is Phase.BACKOFF


def test_cf_end_without_navs_is_noop():
    n = ap()
    on_cf_end(n, FrameMeta(PpduFormat.HE, FrameKind.CF_END, bss_color=7), now=1.0)
    assert (n.nav_intra, n.nav_inter, n.phase) == (0.0, 0.0, Phase.IDLE)
    with pytest.raises(ValueError):
        on_cf_end(n, rts(7))


def test_backoff_blocked_by_either_nav():
    n = ap()
    n.nav_intra = 2.0
    assert not n.may_decrement(1.0, True)
    n.nav_intra, n.nav_inter = 0.0, 2.0
    assert not n.may_decrement(1.0, True)
    assert n.may_decrement(3.0, True) and not n.may_decrement(3.0, False)


def test_transmit_power_takes_tightest_restriction():
    n = ap()
    n.buffer.extend(Packet(0.0, 1) for _ in range(3))
    n.power_restrictions = [PowerRestriction(11, 1.0), PowerRestriction(15, 1.0)]
    plan = start_transmission(n, 0.5, lambda p: p + 10)
    assert plan.tx_pwr == 11 and plan.n_packets == 3
    assert n.power_restrictions == []


def test_transmit_unrestricted_at_config_power():
    n = ap()
    n.buffer.append(Packet(0.0, 1))
    assert start_transmission(n, 0.0, lambda p: 40).tx_pwr == 20


def test_transmit_infeasible_when_restricted_too_far():
    n = ap()
    n.buffer.append(Packet(0.0, 1))
    n.power_restrictions = [PowerRestriction(1, 1.0)]
    plan = start_transmission(n, 0.0, lambda p: p - 5)
    assert plan.mcs is None and n.phase is Phase.BACKOFF


def test_transmit_errors():
    n = ap()
    with pytest.raises(ValueError):
        start_transmission(n, 0.0, lambda p: 40)
    assert n.phase is Phase.IDLE
    n.buffer.append(Packet(0.0, 1))
    n.nav_inter = 1.0
    with pytest.raises(ValueError):
        start_transmission(n, 0.0, lambda p: 40)


def test_buffer_overflow_counts_drops():
    n = ap()
    n.capacity = 2
    assert [n.enqueue(Packet(0.0, 1)) for _ in range(3)] == [True, True, False]
    assert n.drops == 1 and len(n.buffer) == 2


def test_reception_outcomes():
    assert reception_outcome(-50, [], -95, 28.5)
    assert not reception_outcome(-50, [-60], -95, 28.5)
    # the stronger of two overlapping frames survives, the weaker does not
    assert reception_outcome(-50, [-70], -95, 17.5)
    assert not reception_outcome(-70, [-50], -95, 2.0)
    assert not reception_outcome(-50, [-70], -95, 17.5, capture_margin=3.0)
