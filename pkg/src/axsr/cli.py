"""Command-line front end.

Subcommands write their data files plus a ``manifest.json`` into ``--out``.
Every data file names the manifest and a run id derived from the inputs,
so reruns with the same inputs give byte-identical data files.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, srcore
from .ctmn import CtmnError, adjacency_dump, solve
from .desim import SimulationError, run
from .scenario import (Scenario, ScenarioError, SweepSpec, grid_setup, parse_scenario, sr_mask,
                       with_obss_pd)

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3
MANIFEST = "manifest.json"

CTMN_COLUMNS = ["obss_pd_non_srg", "obss_pd_srg", "bss", "throughput_mbps", "tx_pwr_dbm"]
SIM_COLUMNS = ["seed", "map_size", "load_mbps", "n_agg", "sr_mode", "obss_pd", "bss",
               "throughput_mbps", "occupancy", "delay_ms", "drops", "sr_enabled"]
SUMMARY_COLUMNS = ["map_size", "load_mbps", "n_agg", "sr_mode", "obss_pd", "bss", "n_runs",
                   "throughput_mbps", "occupancy", "delay_ms", "drops"]
BEST_COLUMNS = ["map_size", "load_mbps", "n_agg", "sr_mode", "best_obss_pd", "legacy_a_mbps",
                "best_a_mbps", "gain_a_mbps", "legacy_others_mbps", "best_others_mbps",
                "gain_others_mbps"]
CROSSVAL_COLUMNS = ["bss", "mae_mbps", "mad_mbps", "n_points"]
POINT_COLUMNS = ["obss_pd_non_srg", "obss_pd_srg", "bss", "ctmn_mbps", "sim_mbps", "abs_error_mbps"]


class InputError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def parse_seeds(text: str) -> tuple[int, ...]:
    """``a..b`` (inclusive), ``a,b,c`` or a single integer."""
    out = []
    try:
        for tok in text.split(","):
            tok = tok.strip()
            if ".." in tok:
                lo, hi = (int(x) for x in tok.split("..", 1))
                if hi < lo:
                    raise InputError(f"empty seed range {tok!r}")
                out.extend(range(lo, hi + 1))
            elif tok:
                out.append(int(tok))
    except ValueError:
        raise InputError(f"bad seed list {text!r}") from None
    if not out:
        raise InputError("no seeds given")
    return tuple(out)


def _num(v) -> str:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return f"{v:.6f}".rstrip("0").rstrip(".")
    if v is None:
        return ""
    return str(v)


@dataclass
class Manifest:
    command: str
    scenario: Optional[str]
    sweep: dict
    seeds: list
    outputs: list
    version: str = __version__
    wall_clock_s: float = 0.0

    def run_id(self) -> str:
        key = json.dumps({"command": self.command, "scenario": self.scenario, "sweep": self.sweep,
                          "seeds": self.seeds, "version": self.version}, sort_keys=True)
        return hashlib.sha256(key.encode()).hexdigest()[:16]


class Writer:
    """Writes data files that reference the run manifest."""

    def __init__(self, out: Path, fmt: str, manifest: Manifest, scenario_text: str = ""):
        self.out = out
        self.fmt = fmt
        self.manifest = manifest
        self.digest = hashlib.sha256(scenario_text.encode()).hexdigest()[:16]
        out.mkdir(parents=True, exist_ok=True)

    @property
    def ref(self) -> str:
        return f"{MANIFEST} run_id={self.manifest.run_id()}-{self.digest}"

    def table(self, stem: str, columns: list, rows: list) -> Path:
        path = self.out / f"{stem}.{self.fmt}"
        if self.fmt == "json":
            data = {"manifest": self.ref, "columns": columns,
                    "rows": [{c: _json_value(r.get(c)) for c in columns} for r in rows]}
            path.write_text(json.dumps(data, indent=1, allow_nan=False) + "\n")
        else:
            buf = io.StringIO()
            buf.write(f"# manifest: {self.ref}\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_num(r.get(c)) for c in columns])
            path.write_text(buf.getvalue())
        self.manifest.outputs.append(path.name)
        return path

    def text(self, rel: str, body: str) -> Path:
        path = self.out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(f"# manifest: {self.ref}\n{body}")
        self.manifest.outputs.append(rel)
        return path

    def close(self, started: float) -> None:
        self.manifest.wall_clock_s = round(time.perf_counter() - started, 3)
        d = asdict(self.manifest)
        d["run_id"] = self.manifest.run_id()
        (self.out / MANIFEST).write_text(json.dumps(d, indent=1, default=_json_default) + "\n")


def _json_value(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float):
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    return v


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, float) and math.isinf(o):
        return str(o)
    raise TypeError(type(o).__name__)


def _sweep_dict(sw: SweepSpec) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(sw).items()}


def _threshold_grid(sw: SweepSpec) -> list[tuple[float, Optional[float]]]:
    if not sw.obss_pd_values:
        raise InputError("the sweep has no OBSS/PD values")
    srg = sw.obss_pd_srg_values
    if srg is not None and len(srg) == 0:
        raise InputError("the sweep has an empty SRG OBSS/PD list")
    return [(ns, sg) for ns in sw.obss_pd_values for sg in (srg if srg else (None,))]


def _deployment_for(sc: Scenario, map_size: Optional[float], seed: int) -> Scenario:
    if sc.generator is None:
        return sc
    size = sc.generator["map_size"] if map_size is None else map_size
    return grid_setup(size, seed, path_loss_model=sc.path_loss, phy=sc.phy, mac=sc.mac,
                      mcs_table=sc.mcs_table, sweep=sc.sweep)


# ---------------------------------------------------------------- simulation fan-out

def _sim_job(job: tuple) -> tuple:
    key, sc, load, n_agg, duration, seed, warmup, trace = job
    rep = run(sc, load, n_agg, duration, seed, warmup=warmup, trace=trace)
    return key, rep


def _fan_out(jobs: list, n_jobs: int) -> dict:
    if n_jobs <= 1 or len(jobs) <= 1:
        return dict(_sim_job(j) for j in jobs)
    with ProcessPoolExecutor(max_workers=n_jobs) as ex:
        return dict(ex.map(_sim_job, jobs, chunksize=max(1, len(jobs) // (4 * n_jobs))))


def _load_label(load: float) -> float:
    return load / 1e6 if math.isfinite(load) else math.inf


def _sim_rows(results: dict, scenarios: dict) -> list[dict]:
    rows = []
    for key in sorted(results, key=_order):
        seed, size, load, n_agg, mode, pd, sg = key
        rep = results[key]
        sc = scenarios[key]
        for i, name in enumerate(rep.bss_names):
            cfg = sc.configs[i]
            rows.append({"seed": seed, "map_size": size, "load_mbps": _load_label(load), "n_agg": n_agg,
                         "sr_mode": mode, "obss_pd": cfg.obss_pd_non_srg if pd is None else pd,
                         "obss_pd_srg": sg, "bss": name,
                         "throughput_mbps": rep.throughput[i] / 1e6, "occupancy": rep.occupancy[i],
                         "delay_ms": rep.delay[i] * 1e3, "drops": int(rep.drops[i]),
                         "sr_enabled": int(cfg.sr_active)})
    return rows


def _order(key: tuple) -> tuple:
    """Total order over mixed keys: numbers numerically, None first, then strings."""
    return tuple((0, 0.0) if v is None else (1, v) if isinstance(v, (int, float, np.number)) else (2, str(v))
                 for v in key)


def _summaries(rows: list[dict]) -> tuple[list[dict], list[dict]]:
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        k = (r["map_size"], r["load_mbps"], r["n_agg"], r["sr_mode"], r["obss_pd"], r["obss_pd_srg"], r["bss"])
        groups.setdefault(k, []).append(r)
    summary = []
    for k in sorted(groups, key=_order):
        g = groups[k]
        delays = [x["delay_ms"] for x in g if not math.isnan(x["delay_ms"])]
        summary.append({"map_size": k[0], "load_mbps": k[1], "n_agg": k[2], "sr_mode": k[3],
                        "obss_pd": k[4], "obss_pd_srg": k[5], "bss": k[6], "n_runs": len(g),
                        "throughput_mbps": float(np.mean([x["throughput_mbps"] for x in g])),
                        "occupancy": float(np.mean([x["occupancy"] for x in g])),
                        "delay_ms": float(np.mean(delays)) if delays else math.nan,
                        "drops": float(np.mean([x["drops"] for x in g]))})
    return summary, best_obss_pd(rows)


def best_obss_pd(rows: list[dict]) -> list[dict]:
    """Best non-SRG threshold for the first BSS, against the -82 dBm (legacy) point.

    Picks the value maximizing the first BSS's throughput averaged over
    seeds; ties go to the lower threshold. Others' change is averaged over
    seeds and over all other BSSs.
    """
    by_cfg: dict[tuple, dict] = {}
    for r in rows:
        if r["obss_pd_srg"] is not None:
            continue
        k = (r["map_size"], r["load_mbps"], r["n_agg"], r["sr_mode"])
        d = by_cfg.setdefault(k, {}).setdefault(r["obss_pd"], {})
        d.setdefault(r["seed"], {})[r["bss"]] = r["throughput_mbps"]
    out = []
    for k in sorted(by_cfg, key=_order):
        pts = by_cfg[k]
        legacy = pts.get(srcore.OBSS_PD_MIN)
        if legacy is None:
            continue
        seeds = sorted(legacy)
        names = list(legacy[seeds[0]])
        a, others = names[0], names[1:]

        def mean_a(pd):
            return float(np.mean([pts[pd][s][a] for s in seeds]))

        def mean_others(pd):
            return float(np.mean([[pts[pd][s][o] for o in others] for s in seeds])) if others else 0.0

        candidates = sorted(pd for pd in pts if set(pts[pd]) >= set(seeds))
        best = max(candidates, key=lambda pd: (mean_a(pd), -pd))
        la, ba = mean_a(srcore.OBSS_PD_MIN), mean_a(best)
        lo, bo = mean_others(srcore.OBSS_PD_MIN), mean_others(best)
        out.append({"map_size": k[0], "load_mbps": k[1], "n_agg": k[2], "sr_mode": k[3],
                    "best_obss_pd": best, "legacy_a_mbps": la, "best_a_mbps": ba, "gain_a_mbps": ba - la,
                    "legacy_others_mbps": lo, "best_others_mbps": bo, "gain_others_mbps": bo - lo})
    return out


# ---------------------------------------------------------------- commands

def cmd_ctmn(sc: Scenario, w: Writer, args) -> None:
    mask = sr_mask(sc.sweep.sr_mode, sc.deployment.n_bss, seed=(sc.generator or {}).get("seed", 0))
    rows = []
    for ns, sg in _threshold_grid(sc.sweep):
        point = with_obss_pd(sc, mask, ns, sg)
        sol = solve(point, n_agg=sc.sweep.n_agg[0])
        for i, b in enumerate(sc.deployment.bsses):
            rows.append({"obss_pd_non_srg": ns, "obss_pd_srg": sg, "bss": b.name,
                         "throughput_mbps": sol.throughput[i] / 1e6, "tx_pwr_dbm": sol.tx_pwr[i]})
        if args.graphs:
            tag = f"{_num(ns)}" + ("" if sg is None else f"_{_num(sg)}")
            w.text(f"graphs/ctmn_{tag}.txt", adjacency_dump(sol.graph, sol.q, sol.pi))
    w.table("ctmn", CTMN_COLUMNS, rows)


def _sim_jobs(sc: Scenario, seeds, points, mode_label: str, args, trace: bool):
    sw = sc.sweep
    sizes = sw.densities if sw.densities else (None,)
    jobs, scenarios = [], {}
    for size in sizes:
        for seed in seeds:
            base = _deployment_for(sc, size, seed)
            label_size = base.deployment.width if size is None else size
            mask = sr_mask(sw.sr_mode, base.deployment.n_bss, seed)
            for load in sw.loads:
                for n_agg in sw.n_agg:
                    for pd, sg in points:
                        point = base if pd is None else with_obss_pd(base, mask, pd, sg)
                        key = (seed, label_size, load, n_agg, mode_label, pd, sg)
                        scenarios[key] = point
                        jobs.append((key, point, load, n_agg, sw.duration, seed, sw.warmup, trace))
    return jobs, scenarios


def _write_traces(w: Writer, results: dict) -> None:
    for key, rep in sorted(results.items(), key=lambda kv: _order(kv[0])):
        seed, size, load, n_agg, mode, pd, sg = key
        tag = f"s{seed}_m{_num(size)}_l{_num(_load_label(load))}_n{n_agg}_{mode}_pd{_num(pd) or 'cfg'}"
        if sg is not None:
            tag += f"_srg{_num(sg)}"
        w.text(f"traces/{tag}.csv", "time_us,node,event,detail\n" + "\n".join(rep.trace) + "\n")


def cmd_sim(sc: Scenario, w: Writer, args) -> None:
    jobs, scenarios = _sim_jobs(sc, args.seed_list, [(None, None)], "config", args, args.trace)
    results = _fan_out(jobs, args.jobs)
    rows = _sim_rows(results, scenarios)
    w.table("sim_runs", SIM_COLUMNS, rows)
    summary, _ = _summaries(rows)
    w.table("sim_summary", SUMMARY_COLUMNS, summary)
    if args.trace:
        _write_traces(w, results)


def cmd_sweep(sc: Scenario, w: Writer, args) -> None:
    points = _threshold_grid(sc.sweep)
    if sc.sweep.obss_pd_srg_values is None and (srcore.OBSS_PD_MIN, None) not in points:
        points = [(srcore.OBSS_PD_MIN, None)] + points  # legacy reference
    jobs, scenarios = _sim_jobs(sc, args.seed_list, points, sc.sweep.sr_mode, args, args.trace)
    results = _fan_out(jobs, args.jobs)
    rows = _sim_rows(results, scenarios)
    joint = sc.sweep.obss_pd_srg_values is not None
    cols = SIM_COLUMNS + (["obss_pd_srg"] if joint else [])
    w.table("sweep_runs", cols, rows)
    summary, best = _summaries(rows)
    w.table("sweep_summary", SUMMARY_COLUMNS + (["obss_pd_srg"] if joint else []), summary)
    if not joint:
        w.table("sweep_best", BEST_COLUMNS, best)
    if args.trace:
        _write_traces(w, results)


def crossval(sc: Scenario, seeds: Sequence[int], n_jobs: int = 1):
    """CTMN vs simulated saturated throughput over the sweep grid.

    Returns (per-point rows, per-BSS rows). MAE is the mean absolute
    error over the grid; MAD is the mean absolute deviation of those
    errors around the MAE.
    """
    sw = sc.sweep
    points = _threshold_grid(sw)
    mask = sr_mask(sw.sr_mode, sc.deployment.n_bss, seed=(sc.generator or {}).get("seed", 0))
    n_agg = sw.n_agg[0]
    jobs, ctmn = [], {}
    for ns, sg in points:
        point = with_obss_pd(sc, mask, ns, sg)
        ctmn[(ns, sg)] = solve(point, n_agg=n_agg).throughput / 1e6
        for s in seeds:
            jobs.append(((ns, sg, s), point, math.inf, n_agg, sw.duration, s, sw.warmup, False))
    results = _fan_out(jobs, n_jobs)
    names = [b.name for b in sc.deployment.bsses]
    point_rows, errs = [], []
    for ns, sg in points:
        sim = np.mean([results[(ns, sg, s)].throughput for s in seeds], axis=0) / 1e6
        e = np.abs(ctmn[(ns, sg)] - sim)
        errs.append(e)
        for i, n in enumerate(names):
            point_rows.append({"obss_pd_non_srg": ns, "obss_pd_srg": sg, "bss": n,
                               "ctmn_mbps": ctmn[(ns, sg)][i], "sim_mbps": sim[i], "abs_error_mbps": e[i]})
    errs = np.array(errs)
    mae = errs.mean(axis=0)
    mad = np.abs(errs - mae).mean(axis=0)
    summary = [{"bss": n, "mae_mbps": mae[i], "mad_mbps": mad[i], "n_points": len(points)}
               for i, n in enumerate(names)]
    return point_rows, summary


def cmd_crossval(sc: Scenario, w: Writer, args) -> None:
    point_rows, summary = crossval(sc, args.seed_list, args.jobs)
    w.table("crossval_points", POINT_COLUMNS, point_rows)
    w.table("crossval", CROSSVAL_COLUMNS, summary)


SRPS_FIELDS = {f for f in srcore.SrpsElement.__dataclass_fields__}


def load_srps(path: Path) -> srcore.SrpsElement:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read SRPS element: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("SRPS element must be a JSON object")
    unknown = set(data) - SRPS_FIELDS
    if unknown:
        raise InputError(f"unknown SRPS fields: {', '.join(sorted(unknown))}")
    for k, v in data.items():
        if isinstance(v, str) and v.lower().startswith("0x"):
            data[k] = int(v, 16)
    return srcore.SrpsElement(**data)


def cmd_validate_srps(element: srcore.SrpsElement, w: Writer) -> bool:
    try:
        bounds = srcore.validate_srps(element)
        row = {"valid": 1, "constraint": "", "message": "", **bounds.as_dict()}
    except srcore.SrpsValidationError as exc:
        row = {"valid": 0, "constraint": exc.constraint, "message": str(exc),
               "non_srg_min": None, "non_srg_max": None, "srg_min": None, "srg_max": None}
    w.table("srps", ["valid", "constraint", "message", "non_srg_min", "non_srg_max", "srg_min", "srg_max"], [row])
    return bool(row["valid"])


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="axsr", description="OBSS/PD spatial reuse analysis and simulation")
    p.add_argument("--version", action="version", version=f"axsr {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True, type=Path, help="scenario file")
        sp.add_argument("--out", required=True, type=Path, help="output directory")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("ctmn", help="analytic throughput over the OBSS/PD sweep")
    common(sp)
    sp.add_argument("--graphs", action="store_true", help="also dump every state graph")
    for name, hlp in (("sim", "simulate the scenario as configured"),
                      ("sweep", "simulate every OBSS/PD point of the sweep"),
                      ("crossval", "compare CTMN and simulation over the sweep")):
        sp = sub.add_parser(name, help=hlp)
        common(sp)
        sp.add_argument("--seeds", help="a..b, a,b,c or one integer (default: the sweep's seeds)")
        sp.add_argument("--jobs", type=int, default=1, help="parallel runs")
        if name != "crossval":
            sp.add_argument("--trace", action="store_true", help="write per-run event traces")
    sp = sub.add_parser("validate-srps", help="check a Spatial Reuse Parameter Set element (JSON)")
    sp.add_argument("element", type=Path)
    common(sp, scenario=False)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "validate-srps":
            element = load_srps(args.element)
            m = Manifest(args.command, str(args.element), {}, [], [])
            w = Writer(args.out, args.format, m, args.element.read_text())
            ok = cmd_validate_srps(element, w)
            w.close(started)
            return EXIT_OK if ok else EXIT_INPUT
        try:
            text = args.scenario.read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read scenario: {exc}") from None
        sc = parse_scenario(text)
        seeds = parse_seeds(args.seeds) if getattr(args, "seeds", None) else sc.sweep.seeds
        args.seed_list = seeds
        if getattr(args, "jobs", 1) < 1:
            raise InputError("--jobs must be at least 1")
        m = Manifest(args.command, str(args.scenario), _sweep_dict(sc.sweep), list(seeds), [])
        w = Writer(args.out, args.format, m, text)
        {"ctmn": cmd_ctmn, "sim": cmd_sim, "sweep": cmd_sweep, "crossval": cmd_crossval}[args.command](sc, w, args)
        w.close(started)
        return EXIT_OK
    except (InputError, ScenarioError, CtmnError, srcore.SrError) as exc:
        print(f"axsr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SimulationError, ValueError) as exc:
        print(f"axsr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # assertion failures and anything unexpected
        print(f"axsr: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
