import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from axsr import srcore
from axsr.srcore import (
    BssColor, FrameClass, FrameMeta, PpduFormat, SrConfig, SrError, SrpsElement,
    SrpsValidationError, bitmap, classify_frame, combine_power_restrictions,
    effective_sensitivity, i_ap_max, max_obss_pd, psr_opportunity, psr_value,
    scale_obss_pd, tx_power_restriction, validate_srps,
)

LEVELS = range(-82, -61)
powers = st.floats(-40, 40, allow_nan=False)
restriction = st.one_of(st.none(), st.integers(-20, 25).map(float))


# classification

def test_he_same_color_is_intra():
    cfg = SrConfig()
    assert classify_frame(cfg, BssColor(5), FrameMeta(PpduFormat.HE, bss_color=5)) is FrameClass.INTRA_BSS


def test_he_color_in_srg_bitmap():
    cfg = SrConfig(obss_pd_srg=-70, srg_enabled=True, srg_color_bitmap=bitmap(7))
    frame = FrameMeta(PpduFormat.HE, bss_color=7)
    assert classify_frame(cfg, BssColor(5), frame) is FrameClass.INTER_BSS_SRG


def test_he_srg_bit_ignored_without_srg_support():
    cfg = SrConfig(srg_color_bitmap=bitmap(7))
    frame = FrameMeta(PpduFormat.HE, bss_color=7)
    assert classify_frame(cfg, BssColor(5), frame) is FrameClass.INTER_BSS_NON_SRG


def test_vht_group_zero_with_partial_aid_bit():
    cfg = SrConfig(obss_pd_srg=-70, srg_enabled=True, srg_partial_bssid_bitmap=bitmap(12))
    frame = FrameMeta(PpduFormat.VHT, group_id=0, partial_aid=12)
    assert classify_frame(cfg, BssColor(5), frame) is FrameClass.INTER_BSS_SRG


def test_vht_nonzero_group_is_not_srg():
    cfg = SrConfig(obss_pd_srg=-70, srg_enabled=True, srg_partial_bssid_bitmap=bitmap(12))
    frame = FrameMeta(PpduFormat.VHT, group_id=3, partial_aid=12)
    assert classify_frame(cfg, BssColor(5), frame) is FrameClass.INTER_BSS_NON_SRG


def test_legacy_bssid_bit_not_set_is_non_srg():
    cfg = SrConfig(obss_pd_srg=-70, srg_enabled=True, srg_partial_bssid_bitmap=bitmap(3))
    frame = FrameMeta(PpduFormat.LEGACY, bssid=9)
    assert classify_frame(cfg, BssColor(5), frame) is FrameClass.INTER_BSS_NON_SRG


@pytest.mark.parametrize("frame", [
    FrameMeta(PpduFormat.HE),
    FrameMeta(PpduFormat.VHT, group_id=0),
    FrameMeta(PpduFormat.VHT, partial_aid=1),
    FrameMeta(PpduFormat.LEGACY),
])
def test_missing_identity_field_raises(frame):
    with pytest.raises(srcore.ClassificationError):
        classify_frame(SrConfig(), BssColor(1), frame)


@pytest.mark.parametrize("v", [0, 64, -1, True, 1.5])
def test_bss_color_range(v):
    with pytest.raises(SrError):
        BssColor(v)


@given(rx=st.integers(1, 63), tx=st.integers(1, 63), bm=st.integers(0, 2**64 - 1),
       srg=st.booleans(), kind=st.sampled_from(list(srcore.FrameKind)))
def test_intra_iff_colors_match(rx, tx, bm, srg, kind):
    cfg = SrConfig(obss_pd_srg=-70 if srg else None, srg_enabled=srg, srg_color_bitmap=bm)
    cls = classify_frame(cfg, BssColor(rx), FrameMeta(PpduFormat.HE, kind=kind, bss_color=tx))
    assert (cls is FrameClass.INTRA_BSS) == (rx == tx)


# sensitivity

def test_intra_uses_cca():
    assert effective_sensitivity(SrConfig(), FrameClass.INTRA_BSS) == -82


def test_non_srg_uses_threshold():
    assert effective_sensitivity(SrConfig(obss_pd_non_srg=-72), FrameClass.INTER_BSS_NON_SRG) == -72


def test_non_srg_disallowed_falls_back_to_cca():
    cfg = SrConfig(obss_pd_non_srg=-72, non_srg_sr_disallowed=True)
    assert effective_sensitivity(cfg, FrameClass.INTER_BSS_NON_SRG) == -82


def test_srg_threshold_and_fallback():
    cfg = SrConfig(obss_pd_non_srg=-75, obss_pd_srg=-66, srg_enabled=True)
    assert effective_sensitivity(cfg, FrameClass.INTER_BSS_SRG) == -66
    assert effective_sensitivity(SrConfig(obss_pd_non_srg=-75), FrameClass.INTER_BSS_SRG) == -75


@pytest.mark.parametrize("kw", [dict(obss_pd_non_srg=-61), dict(obss_pd_non_srg=-83),
                                dict(obss_pd_non_srg=-70.5), dict(tx_pwr_ref=20),
                                dict(srg_enabled=True)])
def test_config_validation(kw):
    with pytest.raises(SrError):
        SrConfig(**kw)


# bound, scaling, restriction

@pytest.mark.parametrize("tx,ref,expected", [(25, 25, -82), (5, 25, -62), (0, 21, -62)])
def test_max_obss_pd_examples(tx, ref, expected):
    assert max_obss_pd(tx, ref) == expected


def test_max_obss_pd_exhaustive():
    for ref in (21, 25):
        for tx in range(-30, 41):
            # hand evaluation: the offset below ref adds dB-for-dB, clipped to the window
            raw = -82 + ref - tx
            expected = -82 if raw < -82 else (-62 if raw > -62 else raw)
            assert max_obss_pd(tx, ref) == expected


@given(tx=powers, ref=st.sampled_from([21.0, 25.0]))
def test_max_obss_pd_in_window(tx, ref):
    assert -82 <= max_obss_pd(tx, ref) <= -62


@pytest.mark.parametrize("pd,width,expected", [(-72, 20, -72), (-72, 40, -69), (-72, 80, -66), (-72, 160, -63)])
def test_scale_obss_pd(pd, width, expected):
    assert scale_obss_pd(pd, width) == expected


@pytest.mark.parametrize("width", [10, 60, 320, None])
def test_scale_obss_pd_rejects_width(width):
    with pytest.raises(SrError):
        scale_obss_pd(-72, width)


def test_scale_obss_pd_exhaustive():
    for pd in LEVELS:
        for k, width in enumerate((20, 40, 80, 160)):
            assert scale_obss_pd(pd, width) == pd + 3 * k


@pytest.mark.parametrize("pd,ref,expected", [(-82, 21, None), (-62, 21, 1), (-72, 25, 15)])
def test_tx_power_restriction_examples(pd, ref, expected):
    assert tx_power_restriction(pd, ref) == expected


def test_tx_power_restriction_exhaustive():
    for ref in (21, 25):
        for pd in LEVELS:
            expected = None if pd == -82 else ref - (pd + 82)
            assert tx_power_restriction(pd, ref) == expected


@pytest.mark.parametrize("pd", [-83, -61])
def test_tx_power_restriction_out_of_range(pd):
    with pytest.raises(SrError):
        tx_power_restriction(pd, 21)


@given(a=st.integers(-81, -62), b=st.integers(-81, -62), ref=st.sampled_from([21, 25]))
def test_restriction_monotone_and_capped(a, b, ref):
    lo, hi = sorted((a, b))
    assert tx_power_restriction(hi, ref) <= tx_power_restriction(lo, ref) <= ref


@pytest.mark.parametrize("rs,expected", [([None], None), ([11, 15], 11), ([None, 7], 7), ([], None)])
def test_combine_examples(rs, expected):
    assert combine_power_restrictions(rs) == expected


@given(a=restriction, b=restriction, c=restriction)
def test_combine_algebra(a, b, c):
    comb = combine_power_restrictions
    assert comb([a, b]) == comb([b, a])
    assert comb([comb([a, b]), c]) == comb([a, comb([b, c])])
    assert comb([a, a]) == comb([a])
    assert comb([a, None]) == comb([a])


# SRPS

def test_srps_valid_example():
    el = SrpsElement(non_srg_offset_present=True, srg_information_present=True,
                     non_srg_obss_pd_max_offset=15, srg_obss_pd_min_offset=9, srg_obss_pd_max_offset=20)
    b = validate_srps(el)
    assert (b.srg_min, b.srg_max) == (-73, -62)
    assert (b.non_srg_min, b.non_srg_max) == (-82, -67)


def test_srps_non_srg_offset_too_large():
    with pytest.raises(SrpsValidationError, match="constraint-4"):
        validate_srps(SrpsElement(non_srg_offset_present=True, non_srg_obss_pd_max_offset=21))


def test_srps_non_srg_disallowed():
    b = validate_srps(SrpsElement(non_srg_obss_pd_sr_disallowed=True, non_srg_offset_present=True,
                                  non_srg_obss_pd_max_offset=10))
    assert (b.non_srg_min, b.non_srg_max) == (-82, -82)


def test_srps_without_srg_has_no_srg_bounds():
    b = validate_srps(SrpsElement())
    assert b.srg_min is None and b.srg_max is None


@pytest.mark.parametrize("kw", [dict(non_srg_obss_pd_max_offset=32), dict(srg_obss_pd_min_offset=-1),
                                dict(srg_obss_pd_max_offset=True), dict(srg_bss_color_bitmap=1 << 64)])
def test_srps_field_ranges(kw):
    with pytest.raises(SrpsValidationError):
        validate_srps(SrpsElement(**kw))


def _hand_srps_ok(nmax, smin, smax):
    # the four offset inequalities, evaluated directly
    return (-82 <= -82 + smin <= -62 and smin <= smax and -82 + smax <= -62 and -82 + nmax <= -62)


def test_srps_exhaustive_offsets():
    for nmax, smin, smax in itertools.product(range(32), repeat=3):
        el = SrpsElement(non_srg_offset_present=True, srg_information_present=True,
                         non_srg_obss_pd_max_offset=nmax, srg_obss_pd_min_offset=smin,
                         srg_obss_pd_max_offset=smax)
        ok = _hand_srps_ok(nmax, smin, smax)
        try:
            b = validate_srps(el)
        except SrpsValidationError:
            assert not ok, (nmax, smin, smax)
        else:
            assert ok, (nmax, smin, smax)
            assert (b.srg_min, b.srg_max, b.non_srg_max) == (-82 + smin, -82 + smax, -82 + nmax)


# PSR

@pytest.mark.parametrize("tx,imax,expected", [(20, -40, -20), (0, 0, 0), (21, -55, -34)])
def test_psr_value(tx, imax, expected):
    assert psr_value(tx, imax) == expected


@pytest.mark.parametrize("args,expected", [((-60, 20, 0), -80), ((-60, 20, 5), -85)])
def test_i_ap_max(args, expected):
    assert i_ap_max(*args) == expected


def test_i_ap_max_margin_cap():
    with pytest.raises(SrError):
        i_ap_max(-60, 20, 6)


@pytest.mark.parametrize("psr,rpl,tx,expected", [(-20, -60, 5, True), (-20, -60, 40, False), (-20, -20, 1, False)])
def test_psr_opportunity(psr, rpl, tx, expected):
    assert psr_opportunity(psr, rpl, tx) is expected


def test_psr_exhaustive():
    for tx in range(-10, 31):
        for imax in range(-100, 1):
            assert psr_value(tx, imax) == tx + imax
        for rpl in range(-100, -19):
            for intended in range(-10, 31):
                assert psr_opportunity(-20, rpl, intended) == (intended < -20 - rpl)


@given(p=st.integers(-100, 50), r=st.integers(-100, 0), t=st.integers(-20, 40), c=st.integers(-50, 50))
def test_psr_shift_invariance(p, r, t, c):
    assert psr_opportunity(p, r, t) == psr_opportunity(p + c, r + c, t)
