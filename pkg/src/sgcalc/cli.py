"""Batch experiments: ``sgcalc {gaps,riesz,heat,hormander,all}``.

Each run writes one CSV per table and a ``summary_<command>.json`` into the
output directory. CSV bodies depend only on the configuration and seeds;
runtimes and timestamps live in the JSON summary.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__, calculus, decimation, gasket, heatkernel, hormander, svgplot, tables
from .errors import ConfigError, SGCalcError, SingularSymbolError, UnderResolvedError

log = logging.getLogger("sgcalc")

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
FLOAT_FORMAT = "{:.12g}"
#: window in which ratio gaps of the decimation candidates are listed
GAP_WINDOW = (2.0, 2.5)

CONVENTIONS = {
    "laplacian": "5^m (D - A) on the level-m graph, without the 3/2 factor",
    "energy": "(2/3) 3^-m (D - A) 5^m, so mu-weighted eigenvalues are 5^m times graph eigenvalues",
    "measure": "each cell mass 3^-m split equally among its corners; total 1",
    "metric": "effective resistance of the (5/3)^m-weighted graph unless configured otherwise",
    "ball": "B(x, r) = {y : rho(x, y) < r}",
    "eigenvalues": "decimation candidates 5^m Psi(lam); exceptional graph values 2, 5, 6 skipped",
}


@dataclasses.dataclass
class ExperimentConfig:
    level: int = 3
    heat_level: int = 5
    gap_level: int = 6
    lemma_levels: list = dataclasses.field(default_factory=lambda: [2, 3])
    cz_levels: list = dataclasses.field(default_factory=lambda: [2, 3])
    boundary_condition: str = gasket.DIRICHLET
    metric: str = "resistance"
    method: str = "auto"
    riesz: dict = dataclasses.field(
        default_factory=lambda: {"a": 1.0, "b": 1.0, "c": 1.0, "d": math.sqrt(5.0)})
    cutoff: dict = dataclasses.field(default_factory=lambda: {"gamma": None, "sigma": 0.03})
    reference_cone: dict | None = dataclasses.field(
        default_factory=lambda: {"c": 1.0, "d": 1.0, "gamma": 1.0, "sigma": 0.45})
    s: float = 2.2
    p_list: list = dataclasses.field(default_factory=lambda: [1.5, 2.0, 3.0])
    t_grid: list | None = None
    seeds: list = dataclasses.field(default_factory=lambda: [0])
    starts: int = 8
    doubling_samples: int = 400
    eta_m: float = gasket.WALK_DIMENSION
    hormander_h: float = hormander.DEFAULT_H
    hormander_h_min: float = hormander.DEFAULT_H_MIN
    cz_radii: list = dataclasses.field(default_factory=lambda: [2.0**k for k in range(-5, 4)])
    workers: int = 1
    output: str = "sgcalc-out"
    svg: bool = False

    @property
    def gamma(self) -> float:
        g = self.cutoff.get("gamma")
        return self.riesz["d"] / self.riesz["c"] if g is None else float(g)

    @property
    def sigma(self) -> float:
        return float(self.cutoff["sigma"])

    @property
    def seed(self) -> int:
        return int(self.seeds[0])

    def times(self) -> list[float]:
        if self.t_grid is not None:
            return [float(t) for t in self.t_grid]
        return hormander.default_t_grid(self.eta_m, k=4)

    def echo(self) -> dict:
        out = dataclasses.asdict(self)
        out["cutoff"] = {"gamma": self.gamma, "sigma": self.sigma}
        out["t_grid"] = self.times()
        return out


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    levels = [cfg.level, cfg.heat_level, cfg.gap_level, *cfg.lemma_levels, *cfg.cz_levels]
    for lv in levels:
        _require(isinstance(lv, int) and not isinstance(lv, bool), f"level {lv!r} is not an integer")
        _require(0 <= lv <= gasket.MAX_LEVEL, f"level {lv} outside 0..{gasket.MAX_LEVEL}")
    _require(cfg.gap_level >= 1, "gap_level must be at least 1")
    _require(cfg.boundary_condition in (gasket.DIRICHLET, gasket.NEUMANN),
             f"unknown boundary condition {cfg.boundary_condition!r}")
    _require(cfg.metric in ("resistance", "euclidean"), f"unknown metric {cfg.metric!r}")
    _require(cfg.method in ("auto", "jacobi", "lapack"), f"unknown method {cfg.method!r}")
    _require(set(cfg.riesz) == {"a", "b", "c", "d"}, "riesz needs exactly a, b, c, d")
    for k, v in cfg.riesz.items():
        _require(isinstance(v, (int, float)) and math.isfinite(v), f"riesz {k} must be a finite number")
    _require(cfg.riesz["c"] > 0 and cfg.riesz["d"] > 0, "riesz c and d must be positive")
    _require(set(cfg.cutoff) <= {"gamma", "sigma"} and "sigma" in cfg.cutoff,
             "cutoff takes sigma and optional gamma")
    _require(isinstance(cfg.cutoff["sigma"], (int, float)) and cfg.cutoff["sigma"] > 0,
             "cutoff sigma must be positive")
    _require(cfg.gamma > 0, "cutoff gamma must be positive")
    if cfg.reference_cone is not None:
        rc = cfg.reference_cone
        _require(set(rc) == {"c", "d", "gamma", "sigma"}, "reference_cone needs c, d, gamma, sigma")
        _require(all(isinstance(v, (int, float)) and v > 0 for v in rc.values()),
                 "reference_cone entries must be positive")
    _require(isinstance(cfg.s, (int, float)) and cfg.s > 0, "s must be positive")
    _require(len(cfg.p_list) > 0 and all(isinstance(p, (int, float)) and 1 < p < math.inf
                                         for p in cfg.p_list), "every p must lie in (1, inf)")
    if cfg.t_grid is not None:
        _require(len(cfg.t_grid) > 0 and all(isinstance(t, (int, float)) and t > 0
                                             for t in cfg.t_grid), "t_grid entries must be positive")
    _require(len(cfg.seeds) > 0 and all(isinstance(v, int) and v >= 0 for v in cfg.seeds),
             "seeds must be non-negative integers")
    _require(isinstance(cfg.starts, int) and cfg.starts > 0, "starts must be a positive integer")
    _require(isinstance(cfg.doubling_samples, int) and cfg.doubling_samples > 0,
             "doubling_samples must be a positive integer")
    _require(cfg.eta_m > 1, "eta_m must exceed 1")
    _require(0 < cfg.hormander_h_min <= cfg.hormander_h / 2, "need 0 < hormander_h_min <= hormander_h/2")
    _require(len(cfg.cz_radii) > 0 and all(r > 0 for r in cfg.cz_radii), "cz_radii must be positive")
    _require(isinstance(cfg.workers, int) and cfg.workers >= 1, "workers must be >= 1")
    return cfg


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        _require(isinstance(data, dict), "config must be a JSON object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - names)
    _require(not unknown, f"unknown config keys: {', '.join(unknown)}")
    return validate(ExperimentConfig(**data))


# ---------------------------------------------------------------- reporting

def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {str(k): _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return FLOAT_FORMAT.format(float(v))
    return str(v)


class RunReport:
    """Collects results, tables and runtimes for one command."""

    def __init__(self, command: str, cfg: ExperimentConfig):
        self.command = command
        self.cfg = cfg
        self.out = Path(cfg.output)
        self.results: list[dict] = []
        self.tables: dict[str, str] = {}
        self.runtimes: dict[str, float] = {}
        self.plots: list[str] = []
        self.constants: dict = {}

    def add(self, operation: str, parameters: dict, **values) -> None:
        self.results.append({"operation": operation, "parameters": _num(parameters), **_num(values)})

    def table(self, name: str, rows: list[dict], columns: list[str]) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_cell(row.get(c)) for c in columns])
        self.tables[name] = path.name
        return path

    def timed(self, label: str, fn: Callable, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.runtimes[label] = round(time.perf_counter() - t0, 4)

    def plot(self, name: str, series, **kwargs) -> None:
        if self.cfg.svg:
            self.out.mkdir(parents=True, exist_ok=True)
            svgplot.line_plot(series, self.out / f"{name}.svg", **kwargs)
            self.plots.append(f"{name}.svg")

    def summary(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": "sgcalc",
            "version": __version__,
            "command": self.command,
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "config": _num(self.cfg.echo()),
            "conventions": CONVENTIONS,
            "decimation_constants": _num(self.constants),
            "results": self.results,
            "tables": self.tables,
            "plots": self.plots,
            "runtimes_s": self.runtimes,
        }

    def write(self) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / f"summary_{self.command}.json"
        path.write_text(json.dumps(self.summary(), indent=2, sort_keys=False) + "\n")
        return path


def _pmap(cfg: ExperimentConfig, fn, items) -> list:
    items = list(items)
    if cfg.workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, items))


def _space(cfg: ExperimentConfig, level: int, bc: str | None = None) -> gasket.GasketSpace:
    return gasket.space(level, bc or cfg.boundary_condition, cfg.metric, cfg.method)


def _constants(report: RunReport) -> decimation.GapConstants:
    gc = report.timed("gap_constants", decimation.gap_constants, 1e-12)
    report.constants = gc.as_dict()
    return gc


# ---------------------------------------------------------------- commands

def cmd_gaps(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("gaps", cfg)
    gc = _constants(rep)
    rep.add("gap_constants", {"tol": 1e-12}, alpha=gc.alpha, beta=gc.beta,
            reference_alpha=gc.reference_alpha, reference_beta=gc.reference_beta,
            beta_discrepancy=gc.beta_discrepancy)

    cand = rep.timed("generate_sg_eigenvalues", decimation.generate_sg_eigenvalues,
                     cfg.gap_level, 1e-10, cfg.method)
    rep.table("gaps_candidates", [{"index": i, "value": v} for i, v in enumerate(cand)],
              ["index", "value"])
    gaps = calculus.ratio_gaps(cand, GAP_WINDOW)
    rep.table("gaps_ratio_gaps", [{"lower": a, "upper": b, "width": b - a} for a, b in gaps],
              ["lower", "upper", "width"])
    widest = max(gaps, key=lambda g: g[1] - g[0])
    clear = widest[0] <= gc.alpha + 1e-9 and widest[1] >= gc.beta - 1e-9
    rep.add("generate_sg_eigenvalues", {"max_level": cfg.gap_level, "tol": 1e-10},
            count=len(cand), smallest=float(cand[0]), largest=float(cand[-1]))
    rep.add("ratio_gaps", {"window": GAP_WINDOW}, count=len(gaps), widest=list(widest),
            covers_alpha_beta=clear)

    c, d = cfg.riesz["c"], cfg.riesz["d"]
    rows = []
    sources = [("decimation_candidates", cand)]
    sp = _space(cfg, cfg.level, gasket.DIRICHLET)
    sources.append((f"graph_level_{cfg.level}", sp.decomposition.values))
    for name, spec in sources:
        q = calculus.quasielliptic_check(c, d, spec)
        row = {"spectrum": name, "c": c, "d": d, "ratio": q.ratio, "min_gap": q.min_gap,
               "in_gap": q.in_gap, "gap_lower": q.gap[0] if q.gap else None,
               "gap_upper": q.gap[1] if q.gap else None}
        rows.append(row)
        rep.add("quasielliptic_check", {"c": c, "d": d, "spectrum": name},
                min_gap=q.min_gap, in_gap=q.in_gap, gap=list(q.gap) if q.gap else None)
    rep.table("gaps_quasielliptic", rows,
              ["spectrum", "c", "d", "ratio", "min_gap", "in_gap", "gap_lower", "gap_upper"])
    return rep


def _riesz_row(cfg: ExperimentConfig, level: int, name: str, F: calculus.MultiplierSymbol) -> dict:
    sp = _space(cfg, level)
    row: dict[str, Any] = {"level": level, "symbol": name, "size": sp.size**2}
    t0 = time.perf_counter()
    try:
        op = calculus.ProductOperator.on(sp, F)
    except SingularSymbolError as exc:
        row.update(status="singular", message=str(exc))
        return row
    sampled = op.size > calculus.PRODUCT_BUDGET
    samples = 200 if sampled else None
    row["l2"] = calculus.l2_norm(op)
    row["l1"] = calculus.l1_norm(op, samples=samples, seed=cfg.seed)
    row["weak11"] = calculus.weak11_quantity(op, samples=samples, seed=cfg.seed)
    row["sampled"] = sampled
    for p in cfg.p_list:
        row[f"lp_{p:g}"] = max(calculus.lp_lower_bound(op, p, starts=cfg.starts, seed=s)
                               for s in cfg.seeds)
        row[f"rt_{p:g}"] = calculus.riesz_thorin_bound(row["l1"], row["l2"], p)
    row["status"] = "ok"
    row["runtime"] = time.perf_counter() - t0
    return row


def cmd_riesz(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("riesz", cfg)
    _constants(rep)
    a, b, c, d = (cfg.riesz[k] for k in "abcd")
    F1, F2 = calculus.riesz_symbols(a, b, c, d)
    spec = gasket.space(cfg.level, cfg.boundary_condition, cfg.metric, cfg.method).decomposition.values
    q = calculus.quasielliptic_check(c, d, spec)
    if not q.in_gap:
        warnings.warn(f"d/c = {d / c:g} is not in a ratio gap of the level-{cfg.level} spectrum; "
                      "the Riesz rows demonstrate the failure", RuntimeWarning, stacklevel=2)
    rep.add("quasielliptic_check", {"c": c, "d": d, "level": cfg.level},
            min_gap=q.min_gap, in_gap=q.in_gap)
    symbols = [("one", calculus.constant_symbol()), ("F1", F1), ("F2", F2)]
    tasks = [(lv, n, F) for lv in range(1, cfg.level + 1) for n, F in symbols]
    rows = rep.timed("riesz_table", _pmap, cfg, lambda x: _riesz_row(cfg, *x), tasks)
    for row in rows:
        params = {"level": row["level"], "symbol": row["symbol"], "a": a, "b": b, "c": c, "d": d,
                  "boundary_condition": cfg.boundary_condition, "seeds": cfg.seeds}
        vals = {k: v for k, v in row.items() if k not in ("level", "symbol", "runtime")}
        rep.add("riesz_norms", params, **vals)
        rep.runtimes[f"riesz_L{row['level']}_{row['symbol']}"] = round(row.get("runtime", 0.0), 4)
    pcols = [f"{k}_{p:g}" for p in cfg.p_list for k in ("lp", "rt")]
    rep.table("riesz_norms", rows, ["level", "symbol", "size", "status", "sampled", "l2", "l1",
                                    "weak11", *pcols, "message"])
    rep.plot("riesz_l1_trend",
             {n: ([r["level"] for r in rows if r["symbol"] == n and "l1" in r],
                  [r["l1"] for r in rows if r["symbol"] == n and "l1" in r]) for n, _ in symbols},
             title="L1 operator norm by level", xlabel="level", ylabel="l1 norm", logy=True)
    return rep


def cmd_heat(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("heat", cfg)
    _constants(rep)
    m = gasket.WALK_DIMENSION
    level = cfg.heat_level
    g = gasket.build(level)
    metric = (gasket.resistance_metric(g) if cfg.metric == "resistance" else gasket.euclidean_metric(g))
    mu = gasket.measure(g)
    fit = rep.timed("doubling_check", gasket.doubling_check, g, metric, mu,
                    cfg.doubling_samples, cfg.seed)
    rep.add("doubling_check", {"level": level, "samples": cfg.doubling_samples, "seed": cfg.seed,
                               "metric": cfg.metric},
            d_fit=fit.d_fit, C_fit=fit.C_fit, doubling_constant=fit.doubling_constant,
            resolved=fit.resolved, r_range=list(fit.r_range),
            reference_d=gasket.HAUSDORFF_DIMENSION)
    rep.table("heat_doubling", [{"level": level, "d_fit": fit.d_fit, "C_fit": fit.C_fit,
                                 "doubling_constant": fit.doubling_constant,
                                 "resolved": fit.resolved, "r_min": fit.r_range[0],
                                 "r_max": fit.r_range[1]}],
              ["level", "d_fit", "C_fit", "doubling_constant", "resolved", "r_min", "r_max"])

    sp = _space(cfg, level, gasket.NEUMANN)
    dec = rep.timed("neumann_decomposition", lambda: sp.decomposition)
    lo, hi = heatkernel.resolved_window(level)
    times = list(np.geomspace(lo, hi, 7))
    fields = [heatkernel.heat_kernel(dec, t) for t in times]
    gf = rep.timed("gaussian_fit", heatkernel.gaussian_fit, fields, sp.rho, sp.mass, m, (lo, hi))
    rep.add("gaussian_fit", {"level": level, "boundary_condition": "neumann", "m": m,
                             "window": [lo, hi], "times": len(times)},
            C=gf.C, b=gf.b, decay_exponent=gf.decay_exponent,
            reference_exponent=math.log(3) / math.log(5))
    V2 = dec.vectors**2
    decay_rows = [{"t": t, "mean_log_diagonal": float(np.mean(np.log(V2 @ np.exp(-t * dec.values))))}
                  for t in times]
    rep.table("heat_decay", decay_rows, ["t", "mean_log_diagonal"])
    rep.table("heat_gaussian_fit", [{"b": b, "C": C, "chosen": b == gf.b} for b, C in gf.C_by_b.items()],
              ["b", "C", "chosen"])

    t_check = 0.1
    P = heatkernel.heat_kernel(dec, t_check).values
    cons = float(np.max(np.abs(P.T @ sp.mass - 1.0)))
    semi = heatkernel.heat_kernel(dec, 2 * t_check).values
    semi_err = float(np.max(np.abs(P @ (sp.mass[:, None] * P) - semi)))
    sym = float(np.max(np.abs(P - P.T)))
    checks = [{"check": "conservation", "t": t_check, "value": 1.0 + cons, "error": cons},
              {"check": "semigroup", "t": t_check, "value": None, "error": semi_err},
              {"check": "symmetry", "t": t_check, "value": None, "error": sym}]
    rep.table("heat_checks", checks, ["check", "t", "value", "error"])
    for row in checks:
        rep.add("heat_kernel", {"level": level, "t": t_check, "check": row["check"]},
                error=row["error"])

    # ltu tail ratios against the fitted constants at the working level
    ltu = []
    for t in times:
        f = heatkernel.heat_kernel(dec, t)
        for r in tables.TAIL_DISTANCES:
            worst = max(heatkernel.tail_mass_ratio(f, sp.rho, sp.mass, y, r, gf.C, gf.b, m)
                        for y in range(0, sp.size, max(1, sp.size // 40)))
            ltu.append({"t": t, "r": r, "ratio": worst})
    rep.table("heat_ltu_fitted", ltu, ["t", "r", "ratio"])
    rep.add("tail_mass_ratio", {"level": level, "C": gf.C, "b": gf.b},
            max_ratio=max(r["ratio"] for r in ltu))

    rows_by_level = {}
    for lv in cfg.lemma_levels:
        rows_by_level[lv] = rep.timed(f"lemma_tables_L{lv}", tables.all_tables, _space(cfg, lv))
    lemma_rows = [r.flat() for lv in cfg.lemma_levels for r in rows_by_level[lv]]
    rep.table("heat_lemmas", lemma_rows,
              ["lemma", "level", "t", "R", "r", "b", "tau", "s", "constant", "resolved"])
    stab_rows = []
    levels = list(cfg.lemma_levels)
    for a, b in zip(levels[:-1], levels[1:]):
        for name, info in tables.stability(rows_by_level[a], rows_by_level[b]).items():
            stab_rows.append({"lemma": name, "level_a": a, "level_b": b, **info})
            rep.add("lemma_stability", {"lemma": name, "levels": [a, b],
                                        "boundary_condition": cfg.boundary_condition}, **info)
    rep.table("heat_lemma_stability", stab_rows,
              ["lemma", "level_a", "level_b", "first", "second", "rows", "finite", "stable"])

    logt = np.log(times)
    diag = [r["mean_log_diagonal"] for r in decay_rows]
    slope, icpt = np.polyfit(logt, diag, 1)
    rep.plot("heat_decay", {"mean log p_t(x,x)": (list(logt), diag),
                            f"fit slope {slope:.3f}": (list(logt), list(slope * logt + icpt))},
             title=f"On-diagonal decay, level {level}", xlabel="log t", ylabel="mean log p_t(x,x)")
    return rep


def _cutoff_pair(c: float, d: float, gamma: float, sigma: float, a: float = 1.0, b: float = 1.0):
    F1, F2 = calculus.riesz_symbols(a, b, c, d)
    om = calculus.CutoffOmega(gamma, sigma)
    return om, [("F1", F1, calculus.cutoff_multiply(F1, om)),
                ("F2", F2, calculus.cutoff_multiply(F2, om))]


def _hormander_row(cfg, eta, label, name, F) -> dict:
    row: dict[str, Any] = {"family": label, "symbol": name, "s": cfg.s}
    t0 = time.perf_counter()
    try:
        vals, spread = hormander.dilation_spread(F, eta, cfg.s, cfg.times(), cfg.hormander_h)
        row["t_spread"] = spread
        hr = hormander.hormander_sup(F, eta, cfg.s, cfg.times(), h=cfg.hormander_h,
                                     h_min=cfg.hormander_h_min)
        row.update(status="ok", value=hr.value, error_bar=hr.error_bar,
                   homogeneous_shortcut=hr.homogeneous_shortcut)
    except UnderResolvedError as exc:
        row.update(status="under_resolved", message=str(exc))
    except SingularSymbolError as exc:
        row.update(status="singular", message=str(exc))
    row["runtime"] = time.perf_counter() - t0
    return row


def cmd_hormander(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("hormander", cfg)
    _constants(rep)
    eta = hormander.make_eta(cfg.eta_m)
    a, b, c, d = (cfg.riesz[k] for k in "abcd")
    omega, pair = _cutoff_pair(c, d, cfg.gamma, cfg.sigma, a, b)
    tasks = [("configured", "raw_F1", pair[0][1])]
    tasks += [("configured", f"cutoff_{n}", Fc) for n, _, Fc in pair]
    if cfg.reference_cone is not None:
        rc = cfg.reference_cone
        _, ref = _cutoff_pair(rc["c"], rc["d"], rc["gamma"], rc["sigma"])
        tasks += [("reference", f"cutoff_{n}", Fc) for n, _, Fc in ref]
    rows = rep.timed("hormander_sup", _pmap, cfg,
                     lambda x: _hormander_row(cfg, eta, *x), tasks)
    for row in rows:
        fam = cfg.reference_cone if row["family"] == "reference" else \
            {"c": c, "d": d, "gamma": cfg.gamma, "sigma": cfg.sigma}
        rep.add("hormander_sup", {"family": row["family"], "symbol": row["symbol"], "s": cfg.s,
                                  "eta_m": cfg.eta_m, "h": cfg.hormander_h,
                                  "h_min": cfg.hormander_h_min, **fam},
                **{k: v for k, v in row.items() if k not in ("family", "symbol", "s", "runtime")})
    rep.table("hormander_sup", rows, ["family", "symbol", "s", "status", "value", "error_bar",
                                      "t_spread", "homogeneous_shortcut", "message"])

    d_h = gasket.HAUSDORFF_DIMENSION
    drows = []
    for n, _, Fc in pair:
        dr = rep.timed(f"derivative_condition_{n}", hormander.derivative_condition, Fc, d_h, d_h)
        for (i, j), v in sorted(dr.sups.items()):
            drows.append({"symbol": f"cutoff_{n}", "order": dr.order, "i": i, "j": j, "sup": v})
        rep.add("derivative_condition", {"symbol": f"cutoff_{n}", "d1": d_h, "d2": d_h,
                                         "k_range": list(dr.k_range)},
                order=dr.order, finite=dr.finite, max_sup=max(dr.sups.values()))
    rep.table("hormander_derivatives", drows, ["symbol", "order", "i", "j", "sup"])

    czrows, sups = [], {}
    for lv in cfg.cz_levels:
        sp = _space(cfg, lv)
        spec = sp.decomposition.values
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", calculus.CutoffWarning)
            Fc = calculus.cutoff_multiply(pair[0][1], omega, (spec, spec))
        op = calculus.ProductOperator.on(sp, Fc)
        for r in cfg.cz_radii:
            v = rep.timed(f"cz_L{lv}_r{r:g}", calculus.cz_truncation_integral,
                          op, r, sp.rho, sp.rho, gasket.WALK_DIMENSION)
            czrows.append({"level": lv, "r": r, "value": v, "beyond_diameter": r > sp.rho.max(),
                           "cutoff_meets_spectrum": bool(caught)})
        sups[lv] = max(row["value"] for row in czrows if row["level"] == lv)
        rep.add("cz_truncation_integral", {"level": lv, "symbol": "cutoff_F1", "radii": cfg.cz_radii,
                                           "gamma": cfg.gamma, "sigma": cfg.sigma},
                sup=sups[lv], cutoff_meets_spectrum=bool(caught))
    rep.table("hormander_cz_truncation", czrows,
              ["level", "r", "value", "beyond_diameter", "cutoff_meets_spectrum"])
    rep.plot("cz_truncation", {f"level {lv}": ([r["r"] for r in czrows if r["level"] == lv],
                                               [r["value"] for r in czrows if r["level"] == lv])
                               for lv in cfg.cz_levels},
             title="Truncated kernel tail", xlabel="r", ylabel="integral", logx=True)
    return rep


COMMANDS = {"gaps": cmd_gaps, "riesz": cmd_riesz, "heat": cmd_heat, "hormander": cmd_hormander}


def _level_override(command: str, level: int | None) -> dict:
    if level is None:
        return {}
    key = {"gaps": "gap_level", "heat": "heat_level"}.get(command, "level")
    return {key: level}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgcalc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=[*COMMANDS, "all"])
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--level", type=int, help="gasket level for the chosen command")
    p.add_argument("--seed", type=int, help="seed for sampled quantities")
    p.add_argument("--svg", action="store_true", help="also write SVG plots")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = {"output": args.out, "seeds": [args.seed] if args.seed is not None else None,
                 "svg": True if args.svg else None}
    overrides.update(_level_override(args.command, args.level))
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    names = list(COMMANDS) if args.command == "all" else [args.command]
    try:
        for name in names:
            log.info("running %s", name)
            path = COMMANDS[name](cfg).write()
            print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SGCalcError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
