"""Deployments, toy and random-grid generators, and the scenario file format.

Scenario files are INI text with four sections::

    [phy]
    path_loss = toy            # or residential; l0/gamma1/gamma2/d_bp/w_loss override
    noise = -95

    [mac]
    n_agg_max = 64

    [deployment]
    map = 10,10
    bsses = A,B
    A.ap = 4,0
    A.sta = 0,0
    A.obss_pd_non_srg = -78
    B.ap = 6,0
    B.sta = 8,0

    [sweep]
    obss_pd_values = -82..-62
    sr_mode = only_A

Positions are ``x,y`` pairs in meters, powers in dBm, times in seconds and
loads in bit/s. A random grid is requested with ``generator = random_grid``
plus ``map_size`` and ``seed``.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace
from typing import Optional, Sequence

import numpy as np

from . import srcore
from .propagation import (HE_MCS_TABLE, MacParams, Mcs, PATH_LOSS_PRESETS, PathLossModel,
                          PhyParams, Position, RESIDENTIAL_PATH_LOSS, TOY_PATH_LOSS,
                          check_mcs_table, path_loss)
from .srcore import SrConfig

SR_MODES = ("legacy", "only_A", "mixed", "all")
MIN_LINK_DISTANCE = 0.1  # co-located nodes are treated as 10 cm apart


class ScenarioError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(key)
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class Bss:
    name: str
    ap: Position
    stas: tuple[Position, ...]
    color: int
    srg: Optional[int] = None
    channel: int = 1

    def __post_init__(self):
        if not self.stas:
            raise ScenarioError(f"BSS {self.name} has no STA")
        srcore.BssColor(self.color)


@dataclass(frozen=True)
class Deployment:
    bsses: tuple[Bss, ...]
    width: float
    height: float

    def __post_init__(self):
        if not self.bsses:
            raise ScenarioError("deployment has no BSS")
        if not (self.width > 0 and self.height > 0):
            raise ScenarioError("map dimensions must be positive")
        names = [b.name for b in self.bsses]
        if len(set(names)) != len(names):
            raise ScenarioError("duplicate BSS names")
        for b in self.bsses:
            for p in (b.ap, *b.stas):
                if not (0 <= p.x <= self.width and 0 <= p.y <= self.height):
                    raise ScenarioError(f"BSS {b.name}: node ({p.x}, {p.y}) outside the map")

    @property
    def n_bss(self) -> int:
        return len(self.bsses)

    def index(self, name: str) -> int:
        for i, b in enumerate(self.bsses):
            if b.name == name:
                return i
        raise KeyError(name)

    def node_positions(self) -> list[Position]:
        """AP of BSS b at index 2b, its (first) STA at 2b + 1."""
        out = []
        for b in self.bsses:
            out.extend((b.ap, b.stas[0]))
        return out


@dataclass(frozen=True)
class SweepSpec:
    obss_pd_values: tuple[float, ...] = tuple(float(v) for v in range(-82, -61))
    obss_pd_srg_values: Optional[tuple[float, ...]] = None
    densities: tuple[float, ...] = ()  # empty: the deployment's own map
    loads: tuple[float, ...] = (120e6,)
    n_agg: tuple[int, ...] = (64,)
    seeds: tuple[int, ...] = (0,)
    sr_mode: str = "only_A"
    duration: float = 30.0
    warmup: float = 1.0

    def __post_init__(self):
        for v in list(self.obss_pd_values) + list(self.obss_pd_srg_values or ()):
            if not srcore.OBSS_PD_MIN <= v <= srcore.OBSS_PD_MAX:
                raise ScenarioError(f"OBSS/PD value {v} outside [-82, -62]")
        if self.sr_mode not in SR_MODES:
            raise ScenarioError(f"sr_mode must be one of {', '.join(SR_MODES)}")
        if any(d <= 0 for d in self.densities):
            raise ScenarioError("map sizes must be positive")
        if self.duration <= self.warmup:
            raise ScenarioError("duration must exceed warm-up")


@dataclass(frozen=True)
class Scenario:
    deployment: Deployment
    configs: tuple[SrConfig, ...]
    phy: PhyParams = PhyParams()
    mac: MacParams = MacParams()
    path_loss: PathLossModel = TOY_PATH_LOSS
    mcs_table: tuple[Mcs, ...] = HE_MCS_TABLE
    sweep: SweepSpec = SweepSpec()
    generator: Optional[dict] = None  # {"map_size": ..., "seed": ...} for random grids

    def __post_init__(self):
        if len(self.configs) != self.deployment.n_bss:
            raise ScenarioError("one SrConfig per BSS is required")
        check_mcs_table(self.mcs_table)

    def gain_matrix(self) -> np.ndarray:
        """Link gain in dB between every pair of nodes (negative path loss).

        Links between nodes of different BSSs cross one partition.
        """
        pos = self.deployment.node_positions()
        n = len(pos)
        g = np.full((n, n), -np.inf)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                d = max(pos[i].distance(pos[j]), MIN_LINK_DISTANCE)
                walls = 0 if i // 2 == j // 2 else 1
                g[i, j] = self.phy.g_tx + self.phy.g_rx - path_loss(d, self.path_loss, walls)
        return g


def srg_configs(deployment: Deployment, base: Sequence[SrConfig]) -> tuple[SrConfig, ...]:
    """Fill SRG color bitmaps from the BSSs' SRG ids."""
    out = []
    for b, cfg in zip(deployment.bsses, base):
        if b.srg is None:
            out.append(replace(cfg, srg_color_bitmap=0))
            continue
        peers = [o.color for o in deployment.bsses if o.srg == b.srg and o.name != b.name]
        out.append(replace(cfg, srg_color_bitmap=srcore.bitmap(*peers)))
    return tuple(out)


def toy_scenario(toy_id: int) -> Deployment:
    if toy_id == 1:
        bsses = (Bss("A", Position(4, 0), (Position(0, 0),), color=1),
                 Bss("B", Position(6, 0), (Position(8, 0),), color=2))
        return Deployment(bsses, 10.0, 10.0)
    if toy_id == 2:
        bsses = (Bss("A", Position(4, 0), (Position(0, 0),), color=1, srg=1),
                 Bss("B", Position(8, 0), (Position(12, 0),), color=2, srg=1),
                 Bss("C", Position(6, 5), (Position(6, 9),), color=3, srg=2))
        return Deployment(bsses, 12.0, 10.0)
    raise ScenarioError(f"unknown toy scenario {toy_id!r}")


def toy_configs(toy_id: int, obss_pd_non_srg: float = -82.0, obss_pd_srg: Optional[float] = None,
                sr_bsses: Optional[Sequence[int]] = None) -> tuple[SrConfig, ...]:
    """Configs for a toy scenario; ``sr_bsses`` limits which BSSs apply SR."""
    dep = toy_scenario(toy_id)
    chosen = range(dep.n_bss) if sr_bsses is None else sr_bsses
    cfgs = []
    for i, b in enumerate(dep.bsses):
        on = i in chosen
        srg_on = on and obss_pd_srg is not None and b.srg is not None
        cfgs.append(SrConfig(obss_pd_non_srg=obss_pd_non_srg if on else -82.0,
                             obss_pd_srg=obss_pd_srg if srg_on else None, srg_enabled=srg_on))
    return srg_configs(dep, cfgs)


TOY_PATH_LOSS_BY_ID = {1: TOY_PATH_LOSS, 2: RESIDENTIAL_PATH_LOSS}


def toy_setup(toy_id: int, **kwargs) -> Scenario:
    """Toy deployment with its configs and path-loss preset.

    Toy 1 uses the preset fitted to its own link budget; toy 2 has no
    anchors of its own and uses the residential preset.
    """
    return Scenario(toy_scenario(toy_id), toy_configs(toy_id, **kwargs),
                    path_loss=TOY_PATH_LOSS_BY_ID[toy_id])


GRID_NAMES = "ABCDEFGHI"


def random_grid(map_size: float, seed: int) -> Deployment:
    """Nine BSSs on a 3x3 grid, BSS_A's AP pinned at the map center.

    BSS_A sits in the center cell; the other eight follow row-major order
    over the remaining cells. Every other AP and every STA is uniform in
    its own cell.
    """
    if not map_size > 0:
        raise ScenarioError(f"map size must be positive, got {map_size}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5eed]))
    cell = map_size / 3.0
    cells = [(1, 1)] + [(r, c) for r in range(3) for c in range(3) if (r, c) != (1, 1)]
    bsses = []
    for k, (r, c) in enumerate(cells):
        x0, y0 = c * cell, r * cell
        if k == 0:
            ap = Position(map_size / 2.0, map_size / 2.0)
        else:
            ap = Position(*(float(v) for v in (x0, y0) + rng.random(2) * cell))
        sta = Position(*(float(v) for v in (x0, y0) + rng.random(2) * cell))
        bsses.append(Bss(GRID_NAMES[k], ap, (sta,), color=k + 1))
    return Deployment(tuple(bsses), float(map_size), float(map_size))


def grid_cell(deployment: Deployment, k: int) -> tuple[int, int]:
    """Row and column of BSS k in a random-grid deployment."""
    cells = [(1, 1)] + [(r, c) for r in range(3) for c in range(3) if (r, c) != (1, 1)]
    return cells[k]


def mixed_sr_mask(n_bss: int, seed: int) -> list[bool]:
    """Which BSSs apply SR in mixed mode. BSS_A always does."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x313d]))
    draws = rng.random(n_bss) < 0.5
    return [True] + [bool(v) for v in draws[1:]]


def sr_mask(mode: str, n_bss: int, seed: int = 0) -> list[bool]:
    if mode == "legacy":
        return [False] * n_bss
    if mode == "only_A":
        return [True] + [False] * (n_bss - 1)
    if mode == "all":
        return [True] * n_bss
    if mode == "mixed":
        return mixed_sr_mask(n_bss, seed)
    raise ScenarioError(f"unknown sr_mode {mode!r}")


def with_obss_pd(scenario: Scenario, mask: Sequence[bool], non_srg: float,
                 srg: Optional[float] = None) -> Scenario:
    """Set the OBSS/PD thresholds of the masked BSSs; the rest go legacy."""
    dep = scenario.deployment
    cfgs = []
    for on, b, cfg in zip(mask, dep.bsses, scenario.configs):
        if on:
            srg_on = srg is not None and b.srg is not None
            cfgs.append(replace(cfg, obss_pd_non_srg=non_srg, obss_pd_srg=srg if srg_on else None,
                                srg_enabled=srg_on))
        else:
            cfgs.append(replace(cfg, obss_pd_non_srg=cfg.cca_cs, obss_pd_srg=None, srg_enabled=False))
    return replace(scenario, configs=srg_configs(dep, cfgs))


def grid_setup(map_size: float, seed: int, path_loss_model: PathLossModel = RESIDENTIAL_PATH_LOSS,
               **kwargs) -> Scenario:
    dep = random_grid(map_size, seed)
    cfgs = tuple(SrConfig() for _ in dep.bsses)
    return Scenario(dep, cfgs, path_loss=path_loss_model,
                    generator={"map_size": float(map_size), "seed": int(seed)}, **kwargs)


# ---------------------------------------------------------------- file format

_BSS_KEYS = {"ap", "sta", "color", "srg", "channel", "cca_cs", "obss_pd_non_srg", "obss_pd_srg",
             "tx_pwr", "tx_pwr_ref", "non_srg_sr_disallowed", "psr_disallowed"}
_PHY_KEYS = {f.name for f in fields(PhyParams)} | {"path_loss", "l0", "gamma1", "gamma2", "d_bp",
                                                    "w_loss", "mcs_min_sinr"}
_MAC_KEYS = {f.name for f in fields(MacParams)}
_DEPLOY_KEYS = {"map", "bsses", "generator", "map_size", "seed"}
_SWEEP_KEYS = {f.name for f in fields(SweepSpec)}
_SECTIONS = ("phy", "mac", "deployment", "sweep")


class _LineTracker(configparser.ConfigParser):
    """ConfigParser that remembers the line each key was defined on."""

    def __init__(self):
        super().__init__(interpolation=None, inline_comment_prefixes=("#", ";"))
        self.optionxform = str
        self.key_lines: dict[tuple[str, str], int] = {}

    def read_text(self, text: str) -> None:
        section = None
        for n, raw in enumerate(text.splitlines(), start=1):
            s = raw.strip()
            if s.startswith("[") and s.endswith("]"):
                section = s[1:-1].strip()
            elif section and s and not s.startswith(("#", ";")) and ("=" in s or ":" in s):
                key = s.split("=", 1)[0].split(":", 1)[0].strip()
                self.key_lines.setdefault((section, key), n)
        try:
            self.read_string(text)
        except configparser.Error as exc:
            raise ScenarioError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None


def _float(v: str, ctx) -> float:
    try:
        out = float(v)
    except ValueError:
        raise ScenarioError(f"expected a number, got {v!r}", *ctx) from None
    if math.isnan(out):
        raise ScenarioError("NaN is not allowed", *ctx)
    return out


def _int(v: str, ctx) -> int:
    try:
        return int(v)
    except ValueError:
        raise ScenarioError(f"expected an integer, got {v!r}", *ctx) from None


def _bool(v: str, ctx) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ScenarioError(f"expected a boolean, got {v!r}", *ctx)


def _pair(v: str, ctx) -> tuple[float, float]:
    parts = [p.strip() for p in v.split(",")]
    if len(parts) != 2:
        raise ScenarioError(f"expected 'x,y', got {v!r}", *ctx)
    return _float(parts[0], ctx), _float(parts[1], ctx)


def _float_list(v: str, ctx) -> tuple[float, ...]:
    """Comma list with optional ``a..b`` (step 1) or ``a..b:step`` ranges."""
    out = []
    for tok in (t.strip() for t in v.split(",")):
        if not tok:
            continue
        if ".." in tok:
            rng, _, step = tok.partition(":")
            lo, hi = (_float(x, ctx) for x in rng.split("..", 1))
            st = _float(step, ctx) if step else 1.0
            if st <= 0:
                raise ScenarioError("range step must be positive", *ctx)
            k = 0
            while lo + k * st <= hi + 1e-9:
                out.append(lo + k * st)
                k += 1
        else:
            out.append(_float(tok, ctx))
    return tuple(out)


def parse_scenario(text: str) -> Scenario:
    cp = _LineTracker()
    cp.read_text(text)

    def ctx(section, key):
        return cp.key_lines.get((section, key)), f"[{section}] {key}"

    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ScenarioError(f"unknown section [{sec}]", cp.key_lines.get((sec, None)))

    # phy
    phy_kw, pl_kw, pl_name, mcs_sinr = {}, {}, "toy", None
    if cp.has_section("phy"):
        for key, val in cp.items("phy"):
            c = ctx("phy", key)
            if key not in _PHY_KEYS:
                raise ScenarioError("unknown key", *c)
            if key == "path_loss":
                if val not in PATH_LOSS_PRESETS:
                    raise ScenarioError(f"unknown path-loss preset {val!r}", *c)
                pl_name = val
            elif key in ("l0", "gamma1", "gamma2", "d_bp", "w_loss"):
                pl_kw[key] = _float(val, c)
            elif key == "mcs_min_sinr":
                mcs_sinr = _float_list(val, c)
            elif key in ("n_sc", "n_ss"):
                phy_kw[key] = _int(val, c)
            else:
                phy_kw[key] = _float(val, c)
    phy = PhyParams(**phy_kw)
    model = PATH_LOSS_PRESETS[pl_name]
    if pl_kw:
        model = replace(model, name="custom", **pl_kw)
    table = HE_MCS_TABLE
    if mcs_sinr is not None:
        if len(mcs_sinr) != len(HE_MCS_TABLE):
            raise ScenarioError(f"mcs_min_sinr needs {len(HE_MCS_TABLE)} values", *ctx("phy", "mcs_min_sinr"))
        table = tuple(replace(m, min_sinr=s) for m, s in zip(HE_MCS_TABLE, mcs_sinr))
        try:
            check_mcs_table(table)
        except ValueError as exc:
            raise ScenarioError(str(exc), *ctx("phy", "mcs_min_sinr")) from None

    # mac
    mac_kw = {}
    if cp.has_section("mac"):
        int_fields = {f.name for f in fields(MacParams) if f.type in ("int", int)}
        for key, val in cp.items("mac"):
            c = ctx("mac", key)
            if key not in _MAC_KEYS:
                raise ScenarioError("unknown key", *c)
            mac_kw[key] = _int(val, c) if key in int_fields else _float(val, c)
    mac = MacParams(**mac_kw)

    # sweep
    sw_kw = {}
    if cp.has_section("sweep"):
        for key, val in cp.items("sweep"):
            c = ctx("sweep", key)
            if key not in _SWEEP_KEYS:
                raise ScenarioError("unknown key", *c)
            if key == "sr_mode":
                sw_kw[key] = val
            elif key in ("duration", "warmup"):
                sw_kw[key] = _float(val, c)
            elif key in ("seeds", "n_agg"):
                sw_kw[key] = tuple(int(x) for x in _float_list(val, c))
            else:
                sw_kw[key] = _float_list(val, c)
    try:
        sweep = SweepSpec(**sw_kw)
    except ScenarioError as exc:
        raise ScenarioError(str(exc), None, "[sweep]") from None

    # deployment
    if not cp.has_section("deployment"):
        raise ScenarioError("missing [deployment] section")
    dsec = dict(cp.items("deployment"))
    gen = dsec.get("generator")
    if gen is not None:
        if gen != "random_grid":
            raise ScenarioError(f"unknown generator {gen!r}", *ctx("deployment", "generator"))
        extra = set(dsec) - {"generator", "map_size", "seed"}
        if extra:
            k = sorted(extra)[0]
            raise ScenarioError("unknown key for a generated deployment", *ctx("deployment", k))
        size = _float(dsec.get("map_size", "15"), ctx("deployment", "map_size"))
        seed = _int(dsec.get("seed", "0"), ctx("deployment", "seed"))
        try:
            return grid_setup(size, seed, path_loss_model=model, phy=phy, mac=mac, mcs_table=table,
                              sweep=sweep)
        except ScenarioError as exc:
            raise ScenarioError(str(exc), *ctx("deployment", "map_size")) from None

    if "bsses" not in dsec:
        raise ScenarioError("missing key 'bsses'", None, "[deployment]")
    names = [n.strip() for n in dsec["bsses"].split(",") if n.strip()]
    per: dict[str, dict[str, tuple[str, tuple]]] = {n: {} for n in names}
    for key, val in dsec.items():
        c = ctx("deployment", key)
        if key in _DEPLOY_KEYS:
            continue
        name, dot, attr = key.partition(".")
        if not dot or name not in per:
            raise ScenarioError("unknown key", *c)
        if attr not in _BSS_KEYS:
            raise ScenarioError("unknown BSS attribute", *c)
        per[name][attr] = (val, c)
    if "map" not in dsec:
        raise ScenarioError("missing key 'map'", None, "[deployment]")
    width, height = _pair(dsec["map"], ctx("deployment", "map"))

    bsses, cfgs = [], []
    for k, name in enumerate(names):
        attrs = per[name]
        for req in ("ap", "sta"):
            if req not in attrs:
                raise ScenarioError(f"BSS {name} lacks '{req}'", None, f"[deployment] {name}.{req}")
        ap = Position(*_pair(*attrs["ap"]))
        val, c = attrs["sta"]
        stas = tuple(Position(*_pair(s, c)) for s in val.split(";") if s.strip())
        color = _int(*attrs["color"]) if "color" in attrs else k + 1
        srg = _int(*attrs["srg"]) if "srg" in attrs else None
        channel = _int(*attrs["channel"]) if "channel" in attrs else 1
        try:
            bsses.append(Bss(name, ap, stas, color, srg, channel))
        except (ScenarioError, srcore.SrError) as exc:
            raise ScenarioError(str(exc), attrs["ap"][1][0], f"[deployment] {name}") from None
        ckw = {}
        for attr in ("cca_cs", "obss_pd_non_srg", "obss_pd_srg", "tx_pwr", "tx_pwr_ref"):
            if attr in attrs:
                ckw[attr] = _float(*attrs[attr])
        for attr in ("non_srg_sr_disallowed", "psr_disallowed"):
            if attr in attrs:
                ckw[attr] = _bool(*attrs[attr])
        if "obss_pd_non_srg" not in ckw:
            ckw["obss_pd_non_srg"] = ckw.get("cca_cs", srcore.DEFAULT_CCA_CS)
        ckw["srg_enabled"] = ckw.get("obss_pd_srg") is not None
        try:
            cfgs.append(SrConfig(**ckw))
        except srcore.SrError as exc:
            bad = next((a for a in ("obss_pd_non_srg", "obss_pd_srg", "tx_pwr_ref") if a in str(exc) and a in attrs), None)
            line = attrs[bad][1][0] if bad else None
            raise ScenarioError(str(exc), line, f"[deployment] {name}") from None
    try:
        dep = Deployment(tuple(bsses), width, height)
    except ScenarioError as exc:
        raise ScenarioError(str(exc), None, "[deployment]") from None
    return Scenario(dep, srg_configs(dep, cfgs), phy, mac, model, table, sweep)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_scenario(sc: Scenario) -> str:
    lines = ["[phy]"]
    base = PATH_LOSS_PRESETS.get(sc.path_loss.name)
    lines.append(f"path_loss = {sc.path_loss.name if base else 'toy'}")
    ref = base or TOY_PATH_LOSS
    for attr in ("l0", "gamma1", "gamma2", "d_bp", "w_loss"):
        if base is None or getattr(sc.path_loss, attr) != getattr(ref, attr):
            lines.append(f"{attr} = {_fmt(getattr(sc.path_loss, attr))}")
    for f in fields(PhyParams):
        v = getattr(sc.phy, f.name)
        if v != f.default:
            lines.append(f"{f.name} = {_fmt(v)}")
    if sc.mcs_table != HE_MCS_TABLE:
        lines.append("mcs_min_sinr = " + ",".join(_fmt(m.min_sinr) for m in sc.mcs_table))
    lines += ["", "[mac]"]
    for f in fields(MacParams):
        v = getattr(sc.mac, f.name)
        if v != f.default:
            lines.append(f"{f.name} = {_fmt(v)}")

    lines += ["", "[deployment]"]
    dep = sc.deployment
    if sc.generator is not None:
        lines += ["generator = random_grid", f"map_size = {_fmt(sc.generator['map_size'])}",
                  f"seed = {sc.generator['seed']}"]
    else:
        lines.append(f"map = {_fmt(dep.width)},{_fmt(dep.height)}")
        lines.append("bsses = " + ",".join(b.name for b in dep.bsses))
        for b, cfg in zip(dep.bsses, sc.configs):
            n = b.name
            lines.append(f"{n}.ap = {_fmt(b.ap.x)},{_fmt(b.ap.y)}")
            lines.append(f"{n}.sta = " + ";".join(f"{_fmt(s.x)},{_fmt(s.y)}" for s in b.stas))
            lines.append(f"{n}.color = {b.color}")
            if b.srg is not None:
                lines.append(f"{n}.srg = {b.srg}")
            if b.channel != 1:
                lines.append(f"{n}.channel = {b.channel}")
            default = SrConfig()
            for attr in ("cca_cs", "obss_pd_non_srg", "obss_pd_srg", "tx_pwr", "tx_pwr_ref",
                         "non_srg_sr_disallowed", "psr_disallowed"):
                v = getattr(cfg, attr)
                if v != getattr(default, attr) and v is not None:
                    lines.append(f"{n}.{attr} = {_fmt(v)}")

    lines += ["", "[sweep]"]
    for f in fields(SweepSpec):
        v = getattr(sc.sweep, f.name)
        if v == f.default or v is None:
            continue
        if isinstance(v, tuple):
            v = ",".join(_fmt(x) for x in v)
        lines.append(f"{f.name} = {_fmt(v)}")
    return "\n".join(lines) + "\n"
