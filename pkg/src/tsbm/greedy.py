"""Greedy exchange / merge search over node and interval partitions."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .core import InteractionTensor, Move, Partition, Priors, SuffStats, compute_suffstats, relabel_contiguous
from .icl import IclValue, icl_full, node_exchange_gains, node_merge_gains, time_exchange_gains, time_merge_gains

STRATEGIES = ("A", "B", "C")
INITS = ("singletons", "random", "hierarchical")


@dataclass
class FitConfig:
    """Search settings.

    ``K_max``/``D_max`` default to ``ceil(N/2)``/``ceil(U/2)``. With
    ``reshuffle`` a fresh visiting order is drawn for each exchange sweep,
    otherwise once per exchange pass. ``until_stable`` repeats the whole
    phase sequence of a strategy until a full round commits nothing.
    ``loop_bracket`` repeats each GE + GM pair until neither moves; when off,
    each pair runs once.
    """

    strategy: str = "A"
    init: str = "hierarchical"
    K_max: Optional[int] = None
    D_max: Optional[int] = None
    restarts: int = 1
    seed: int = 0
    min_improvement: float = 1e-10
    priors: Priors = field(default_factory=Priors)
    reshuffle: bool = True
    until_stable: bool = True
    loop_bracket: bool = True
    jobs: int = 1

    def resolved(self, tensor: InteractionTensor) -> "FitConfig":
        N, U = tensor.n_nodes, tensor.n_intervals
        cfg = replace(
            self,
            K_max=math.ceil(N / 2) if self.K_max is None else int(self.K_max),
            D_max=math.ceil(U / 2) if self.D_max is None else int(self.D_max),
        )
        if cfg.strategy not in STRATEGIES + ("best",):
            raise ValueError(f"unknown strategy {cfg.strategy!r}")
        if cfg.init not in INITS:
            raise ValueError(f"unknown init {cfg.init!r}")
        if not 1 <= cfg.K_max <= N:
            raise ValueError(f"K_max must lie in [1, N={N}], got {cfg.K_max}")
        if not 1 <= cfg.D_max <= U:
            raise ValueError(f"D_max must lie in [1, U={U}], got {cfg.D_max}")
        if cfg.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if cfg.min_improvement < 0:
            raise ValueError("min_improvement must be >= 0")
        return cfg


@dataclass(frozen=True)
class TraceEntry:
    move: Move
    delta: float
    icl_after: float


@dataclass
class FitResult:
    partition: Partition
    icl: IclValue
    strategy: str
    restart_index: int
    trace: list
    initial_icl: float
    restart_icls: list = field(default_factory=list)
    strategy_icls: dict = field(default_factory=dict)


def _hier_labels(features: np.ndarray, n_clusters: int) -> np.ndarray:
    n = features.shape[0]
    if n_clusters >= n:
        return np.arange(n)
    if n_clusters == 1 or n < 2:
        return np.zeros(n, dtype=np.int64)
    z = linkage(features.astype(float), method="average", metric="euclidean")
    return fcluster(z, t=n_clusters, criterion="maxclust")


def init_partition(tensor: InteractionTensor, config: FitConfig, rng: Optional[np.random.Generator] = None) -> Partition:
    cfg = config.resolved(tensor)
    N, U = tensor.n_nodes, tensor.n_intervals
    if cfg.init == "singletons":
        c = np.arange(N) % cfg.K_max
        y = np.arange(U) % cfg.D_max
    elif cfg.init == "random":
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        c = rng.integers(0, cfg.K_max, N)
        y = rng.integers(0, cfg.D_max, U)
    else:
        x = tensor.dense()
        node_feat = np.concatenate([x.sum(axis=1), x.sum(axis=0)], axis=1)  # (N, 2U)
        interval_feat = (x.sum(axis=1) + x.sum(axis=0)).T  # (U, N)
        c = _hier_labels(node_feat, cfg.K_max)
        y = _hier_labels(interval_feat, cfg.D_max)
    return Partition.from_labels(c, y)


class SearchState:
    """Mutable fitting state: statistics, RNG, running ICL and move trace."""

    def __init__(self, stats: SuffStats, rng: np.random.Generator, min_improvement: float = 1e-10,
                 reshuffle: bool = True):
        self.stats = stats
        self.rng = rng
        self.min_improvement = min_improvement
        self.reshuffle = reshuffle
        self.icl = icl_full(stats).value
        self.initial_icl = self.icl
        self.trace: list[TraceEntry] = []

    def commit(self, move: Move, delta: float) -> None:
        self.stats.apply(move)
        self.icl += delta
        self.trace.append(TraceEntry(move, float(delta), self.icl))

    def try_node(self, i: int) -> bool:
        st = self.stats
        if st.K < 2:
            return False
        gains = node_exchange_gains(st, i)
        best = int(np.argmax(gains))
        if gains[best] <= self.min_improvement:
            return False
        k = int(st.c[i])
        kind = "merge_node" if st.node_sizes[k] == 1 else "node"
        self.commit(Move(kind, k, best, i if kind == "node" else -1), gains[best])
        return True

    def try_interval(self, u: int) -> bool:
        st = self.stats
        if st.D < 2:
            return False
        gains = time_exchange_gains(st, u)
        best = int(np.argmax(gains))
        if gains[best] <= self.min_improvement:
            return False
        d = int(st.y[u])
        kind = "merge_time" if st.time_sizes[d] == 1 else "time"
        self.commit(Move(kind, d, best, u if kind == "time" else -1), gains[best])
        return True


def ge_pass(state: SearchState, target: str) -> int:
    """Greedy exchange sweeps over ``target`` (nodes, times or mixed) until one accepts nothing."""
    if target not in ("nodes", "times", "mixed"):
        raise ValueError(f"unknown target {target!r}")
    N, U = state.stats.N, state.stats.U
    total = 0
    orders = None
    while True:
        if orders is None or state.reshuffle:
            orders = (state.rng.permutation(N), state.rng.permutation(U))
        accepted = 0
        if target == "nodes":
            accepted = sum(state.try_node(int(i)) for i in orders[0])
        elif target == "times":
            accepted = sum(state.try_interval(int(u)) for u in orders[1])
        else:
            for t in range(max(N, U)):
                if t < N:
                    accepted += state.try_node(int(orders[0][t]))
                if t < U:
                    accepted += state.try_interval(int(orders[1][t]))
        total += accepted
        if accepted == 0:
            return total


def _best_pair(gains: np.ndarray) -> tuple[int, int, float]:
    flat = int(np.argmax(gains))
    a, b = divmod(flat, gains.shape[1])
    return a, b, float(gains[a, b])


def gm_pass(state: SearchState, target: str) -> int:
    """Commit the best pairwise merge repeatedly while it improves the ICL."""
    if target not in ("nodes", "times", "mixed"):
        raise ValueError(f"unknown target {target!r}")
    total = 0
    while True:
        st = state.stats
        best = None
        if target in ("nodes", "mixed") and st.K >= 2:
            a, b, g = _best_pair(node_merge_gains(st))
            best = ("merge_node", a, b, g)
        if target in ("times", "mixed") and st.D >= 2:
            a, b, g = _best_pair(time_merge_gains(st))
            if best is None or g > best[3]:
                best = ("merge_time", a, b, g)
        if best is None or best[3] <= state.min_improvement:
            return total
        kind, a, b, g = best
        state.commit(Move(kind, b, a), g)
        total += 1


_PHASES = {"A": ("times", "nodes"), "B": ("nodes", "times"), "C": ("mixed",)}


def _bracket(state: SearchState, target: str, loop: bool = True) -> int:
    moved = 0
    while True:
        step = ge_pass(state, target) + gm_pass(state, target)
        moved += step
        if step == 0 or not loop:
            return moved


def run_strategy(tensor: InteractionTensor, config: FitConfig, restart_index: int = 0,
                 initial: Optional[Partition] = None) -> FitResult:
    """One greedy search: initialise, then run the strategy's phase brackets."""
    cfg = config.resolved(tensor)
    if cfg.strategy == "best":
        raise ValueError("run_strategy needs a concrete strategy; use fit() for 'best'")
    rng = np.random.default_rng([cfg.seed, restart_index])
    part = initial if initial is not None else init_partition(tensor, cfg, rng)
    stats = compute_suffstats(tensor, part, cfg.priors, cfg.K_max, cfg.D_max)
    state = SearchState(stats, rng, cfg.min_improvement, cfg.reshuffle)
    while True:
        moved = sum(_bracket(state, target, cfg.loop_bracket) for target in _PHASES[cfg.strategy])
        if moved == 0 or not cfg.until_stable or len(_PHASES[cfg.strategy]) == 1:
            break
    return FitResult(
        partition=stats.partition(),
        icl=icl_full(stats),
        strategy=cfg.strategy,
        restart_index=restart_index,
        trace=state.trace,
        initial_icl=state.initial_icl,
    )


def _run_one(args) -> FitResult:
    tensor, cfg, r, initial = args
    return run_strategy(tensor, cfg, r, initial)


def _fit_single_strategy(tensor: InteractionTensor, cfg: FitConfig) -> FitResult:
    # hierarchical initialisation does not depend on the restart, compute it once
    initial = init_partition(tensor, cfg) if cfg.init == "hierarchical" else None
    tasks = [(tensor, cfg, r, initial) for r in range(cfg.restarts)]
    if cfg.jobs > 1 and cfg.restarts > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    icls = [r.icl.value for r in results]
    best = results[int(np.argmax(icls))]
    best.restart_icls = icls
    return best


def fit(tensor: InteractionTensor, config: FitConfig) -> FitResult:
    """Best-ICL result over ``config.restarts`` searches (and over strategies for ``best``).

    Restart ``r`` draws from ``default_rng([seed, r])``, so the result does not
    depend on ``jobs`` or on scheduling order. Ties go to the lower restart
    index, then to the earlier strategy in A, B, C order.
    """
    cfg = config.resolved(tensor)
    if cfg.strategy != "best":
        return _fit_single_strategy(tensor, cfg)
    per = {s: _fit_single_strategy(tensor, replace(cfg, strategy=s)) for s in STRATEGIES}
    winner = max(STRATEGIES, key=lambda s: (per[s].icl.value, -STRATEGIES.index(s)))
    best = per[winner]
    best.strategy_icls = {s: per[s].icl.value for s in STRATEGIES}
    return best
