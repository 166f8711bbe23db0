"""Seeded replicate experiments on the simulated scenarios.

Each suite yields rows with the fixed results header; ``summarize`` folds
them into per-cell aggregates.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from statistics import mean, median
from typing import Optional, Sequence

import numpy as np

from .evaluation import ari
from .greedy import STRATEGIES, FitConfig, FitResult, fit
from .simulate import scenario1, scenario2

RESULTS_HEADER = ["seed", "params", "strategy", "icl", "ari_c", "ari_y", "K", "D", "wall_ms"]
SUITES = ("scenario1-time", "scenario1-nodes", "scenario2", "strategies", "scaling")
GAMMA_GRID = tuple(round(1 + 0.05 * k, 2) for k in range(9))
PSI_GRID = (2.15, 2.35, 2.55)


@dataclass
class BenchParams:
    suite: str
    replicates: int = 50
    restarts: int = 10
    strategy: str = "A"
    init: str = "hierarchical"
    seed: int = 0
    jobs: int = 1
    timing: bool = False
    psi: Sequence[float] = ()
    gamma: Sequence[float] = ()
    N: Optional[int] = None
    U: Optional[int] = None
    fixed_y: bool = True
    baseline: bool = True


def static_baseline(tensor, config: FitConfig) -> FitResult:
    """Same engine on the time-aggregated graph, so all intervals share one cluster."""
    return fit(tensor.aggregate_time(), replace(config, D_max=1))


def _fmt(x: float) -> str:
    return repr(float(x))


def _row(seed, params, strategy, res: FitResult, c, y, wall_ms) -> dict:
    y_hat = res.partition.interval_labels
    if y_hat.size != len(y):  # static baseline: every original interval in one cluster
        y_hat = np.zeros(len(y), dtype=np.int64)
    return {
        "seed": seed,
        "params": params,
        "strategy": strategy,
        "icl": _fmt(res.icl.value),
        "ari_c": _fmt(ari(res.partition.node_labels, c)),
        "ari_y": _fmt(ari(y_hat, y)),
        "K": res.partition.K,
        "D": int(y_hat.max()) + 1,
        "wall_ms": wall_ms,
    }


def _cells(p: BenchParams) -> list[tuple[str, dict]]:
    """(params string, generator kwargs) for every grid point of the suite."""
    if p.suite == "scenario1-time":
        N, U = p.N or 50, p.U or 50
        psis = p.psi or (2.0,)
        return [(f"psi={ps};gamma={g};N={N};U={U}", dict(kind=1, psi=ps, gamma=g, N=N, U=U))
                for ps in psis for g in (p.gamma or GAMMA_GRID)]
    if p.suite == "scenario1-nodes":
        N, U = p.N or 50, p.U or 50
        return [(f"psi={ps};gamma={g};N={N};U={U}", dict(kind=1, psi=ps, gamma=g, N=N, U=U))
                for g in (p.gamma or (1.0,)) for ps in (p.psi or PSI_GRID)]
    if p.suite == "scenario2":
        N, U = p.N or 50, p.U or 100
        return [(f"N={N};U={U};fixed_y={int(p.fixed_y)}", dict(kind=2, N=N, U=U, fixed_y=p.fixed_y))]
    if p.suite == "strategies":
        N, U = p.N or 50, p.U or 50
        ps, g = (p.psi or (2.15,))[0], (p.gamma or (1.0,))[0]
        return [(f"psi={ps};gamma={g};N={N};U={U}", dict(kind=1, psi=ps, gamma=g, N=N, U=U))]
    if p.suite == "scaling":
        ps, g = (p.psi or (2.55,))[0], (p.gamma or (1.0,))[0]
        sizes = [(p.N, p.U or p.N)] if p.N else [(50, 50), (100, 100)]
        return [(f"psi={ps};gamma={g};N={n};U={u}", dict(kind=1, psi=ps, gamma=g, N=n, U=u)) for n, u in sizes]
    raise ValueError(f"unknown suite {p.suite!r}; choose from {', '.join(SUITES)}")


def _generate(gen: dict, seed: int):
    if gen["kind"] == 1:
        return scenario1(gen["psi"], gen["gamma"], gen["N"], gen["U"], seed)
    return scenario2(gen["N"], gen["U"], seed, fixed_balanced_y=gen["fixed_y"])


def _timed(fn, *args):
    t0 = time.perf_counter()
    res = fn(*args)
    return res, int(round(1000 * (time.perf_counter() - t0)))


def _replicate(task) -> list[dict]:
    p, params, gen, seed = task
    tensor, c, y = _generate(gen, seed)
    timing = p.timing or p.suite == "scaling"
    cfg = FitConfig(strategy=p.strategy, init=p.init, restarts=p.restarts, seed=seed)
    rows = []

    def emit(name, res, ms):
        rows.append(_row(seed, params, name, res, c, y, ms if timing else "NA"))

    if p.suite == "strategies":
        results = {}
        for s in STRATEGIES:
            results[s], ms = _timed(fit, tensor, replace(cfg, strategy=s))
            emit(s, results[s], ms)
        best = max(STRATEGIES, key=lambda s: (results[s].icl.value, -STRATEGIES.index(s)))
        emit("best:" + best, results[best], "NA")
        return rows
    res, ms = _timed(fit, tensor, cfg)
    emit(p.strategy, res, ms)
    if p.baseline and p.suite in ("scenario1-nodes", "scenario2"):
        res, ms = _timed(static_baseline, tensor, cfg)
        emit("sbm", res, ms)
    return rows


def run_suite(p: BenchParams) -> list[dict]:
    """All replicate rows for a suite, ordered by cell then replicate regardless of ``jobs``."""
    tasks = [(p, params, gen, p.seed + r) for params, gen in _cells(p) for r in range(p.replicates)]
    if p.jobs > 1:
        with ProcessPoolExecutor(max_workers=p.jobs) as ex:
            chunks = list(ex.map(_replicate, tasks))
    else:
        chunks = [_replicate(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def summarize(rows: list[dict]) -> list[dict]:
    cells: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        strat = r["strategy"].split(":")[0]
        cells.setdefault((r["params"], strat), []).append(r)
    out = []
    for (params, strat), rs in cells.items():
        walls = [float(r["wall_ms"]) for r in rs if r["wall_ms"] != "NA"]
        out.append({
            "params": params,
            "strategy": strat,
            "n": len(rs),
            "mean_icl": _fmt(mean(float(r["icl"]) for r in rs)),
            "median_ari_c": _fmt(median(float(r["ari_c"]) for r in rs)),
            "median_ari_y": _fmt(median(float(r["ari_y"]) for r in rs)),
            "mean_K": _fmt(mean(r["K"] for r in rs)),
            "mean_D": _fmt(mean(r["D"] for r in rs)),
            "mean_wall_ms": _fmt(mean(walls)) if walls else "NA",
        })
    return out


def strategy_table(summary: list[dict]) -> str:
    """Mean final ICL per strategy, one line each."""
    lines = [f"{'':<12}| mean ICL"]
    for s in STRATEGIES:
        for r in summary:
            if r["strategy"] == s:
                lines.append(f"{'strategy ' + s:<12}| {float(r['mean_icl']):.2f}")
    return "\n".join(lines)


def scaling_report(summary: list[dict]) -> str:
    """Observed wall-time ratio between the two sizes against the (N+U)*U*N^2 bound."""
    pts = []
    for r in summary:
        kv = dict(item.split("=") for item in r["params"].split(";"))
        if r["mean_wall_ms"] != "NA":
            pts.append((int(kv["N"]), int(kv["U"]), float(r["mean_wall_ms"])))
    if len(pts) < 2:
        return "scaling: need two sizes"
    (n0, u0, t0), (n1, u1, t1) = sorted(pts)[0], sorted(pts)[-1]
    bound = ((n1 + u1) * u1 * n1 ** 2) / ((n0 + u0) * u0 * n0 ** 2)
    return f"scaling N={n0},U={u0} -> N={n1},U={u1}: wall-time ratio {t1 / t0:.2f} (worst-case bound ratio {bound:.1f})"


def write_rows(rows: list[dict], path, header=RESULTS_HEADER, append: bool = False) -> None:
    path = Path(path)
    if append and path.exists() and path.stat().st_size > 0:
        with open(path, newline="") as fh:
            existing = next(csv.reader(fh), None)
        if existing != list(header):
            raise ValueError(f"{path}: cannot append, header differs from {','.join(header)}")
        mode, write_header = "a", False
    else:
        mode, write_header = "w", True
    with open(path, mode, newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(header), lineterminator="\n")
        if write_header:
            w.writeheader()
        w.writerows(rows)
