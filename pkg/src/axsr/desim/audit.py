"""Event-trace checks for the two-NAV rules."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import groupby
from typing import Iterable


@dataclass
class AuditReport:
    n_events: int = 0
    backoff_during_nav: list = field(default_factory=list)
    bad_cf_end_resets: list = field(default_factory=list)
    inter_cf_end_resets: int = 0

    @property
    def ok(self) -> bool:
        return not self.backoff_during_nav and not self.bad_cf_end_resets


def _parse(line: str):
    t, node, event, detail = line.split(",", 3)
    return float(t), int(node), event, detail


def audit_trace(lines: Iterable[str]) -> AuditReport:
    """Scan ``time_us,node,event,detail`` lines.

    Flags any AP whose backoff is counting (or expires) while either NAV
    is active, and any CF-End from another BSS that touched the intra-BSS
    NAV. A node's BSS is ``node // 2``.
    """
    rep = AuditReport()
    nav = {}  # node -> [intra, inter] expiry in us
    counting = {}
    events = [_parse(l) for l in lines if l and not l.startswith(("#", "time_us"))]
    rep.n_events = len(events)
    for t, group in groupby(events, key=lambda e: e[0]):
        touched = set()
        for _, node, ev, detail in group:
            navs = nav.setdefault(node, [0.0, 0.0])
            if ev == "nav_set":
                which, end = detail.split(":")
                navs[0 if which == "intra" else 1] = max(navs[0 if which == "intra" else 1], float(end))
            elif ev == "nav_reset":
                which, src = detail.split(":")
                src_bss = int(src.removeprefix("bss"))
                if src_bss != node // 2:
                    rep.inter_cf_end_resets += 1
                    if which != "inter":
                        rep.bad_cf_end_resets.append((t, node, detail))
                idx = 0 if which == "intra" else 1
                navs[idx] = min(navs[idx], t)
            elif ev == "bo_resume":
                counting[node] = True
            elif ev == "bo_freeze":
                counting[node] = False
            elif ev == "bo_expire":
                counting[node] = False
                if max(navs) > t:
                    rep.backoff_during_nav.append((t, node, "expired under NAV"))
            touched.add(node)
        for node in touched:
            if counting.get(node) and max(nav.get(node, [0.0, 0.0])) > t:
                rep.backoff_during_nav.append((t, node, "counting under NAV"))
    return rep
