"""Count tensor, partitions, priors and the incrementally maintained block statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True, eq=False)
class InteractionTensor:
    """Directed interaction counts ``N_ij^u`` stored as sorted COO arrays.

    Only strictly positive counts are stored; an absent ``(i, j, u)`` key
    means zero. Instances are immutable once built (the arrays are flagged
    read-only), so a tensor can be shared between concurrent fits.
    """

    n_nodes: int
    n_intervals: int
    src: np.ndarray
    dst: np.ndarray
    interval: np.ndarray
    count: np.ndarray
    _dense: list = field(default_factory=list, repr=False, compare=False)

    @property
    def nnz(self) -> int:
        return int(self.count.size)

    @property
    def total(self) -> int:
        return int(self.count.sum())

    def dense(self) -> np.ndarray:
        """Dense ``(N, N, U)`` int64 view of the counts (cached, read-only)."""
        if not self._dense:
            x = np.zeros((self.n_nodes, self.n_nodes, self.n_intervals), dtype=np.int64)
            x[self.src, self.dst, self.interval] = self.count
            x.flags.writeable = False
            self._dense.append(x)
        return self._dense[0]

    def edges(self) -> list[tuple[int, int, int, int]]:
        return list(
            zip(self.src.tolist(), self.dst.tolist(), self.interval.tolist(), self.count.tolist())
        )

    def aggregate_time(self) -> "InteractionTensor":
        """Sum all intervals into a single one (the static-graph view)."""
        return build_tensor(
            zip(self.src.tolist(), self.dst.tolist(), [0] * self.nnz, self.count.tolist()),
            self.n_nodes,
            1,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InteractionTensor):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and self.n_intervals == other.n_intervals
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.interval, other.interval)
            and np.array_equal(self.count, other.count)
        )


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.flags.writeable = False
    return a


def build_tensor(edges: Iterable[Sequence[int]], n_nodes: int, n_intervals: int) -> InteractionTensor:
    """Build a tensor from ``(i, j, u, count)`` records; duplicate keys are summed."""
    if n_nodes < 1 or n_intervals < 1:
        raise ValueError(f"need n_nodes >= 1 and n_intervals >= 1, got {n_nodes}, {n_intervals}")
    acc: dict[tuple[int, int, int], int] = {}
    for rec in edges:
        i, j, u, c = (int(v) for v in rec)
        if not (0 <= i < n_nodes and 0 <= j < n_nodes):
            raise ValueError(f"node index out of range in {(i, j, u, c)} (N={n_nodes})")
        if not 0 <= u < n_intervals:
            raise ValueError(f"interval index out of range in {(i, j, u, c)} (U={n_intervals})")
        if i == j:
            raise ValueError(f"self-loop entry {(i, j, u, c)}")
        if c < 0:
            raise ValueError(f"negative count in {(i, j, u, c)}")
        if c:
            acc[(i, j, u)] = acc.get((i, j, u), 0) + c
    keys = sorted(acc)
    arr = np.array(keys, dtype=np.int64).reshape(-1, 3)
    counts = np.array([acc[k] for k in keys], dtype=np.int64)
    return InteractionTensor(
        n_nodes, n_intervals, _freeze(arr[:, 0]), _freeze(arr[:, 1]), _freeze(arr[:, 2]), _freeze(counts)
    )


def tensor_from_dense(x: np.ndarray) -> InteractionTensor:
    x = np.asarray(x)
    if x.ndim != 3 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected an (N, N, U) array, got shape {x.shape}")
    if (x < 0).any():
        raise ValueError("negative count")
    n = x.shape[0]
    if x[np.arange(n), np.arange(n), :].any():
        raise ValueError("self-loop entry")
    i, j, u = np.nonzero(x)  # C order == lexicographic (i, j, u)
    return InteractionTensor(n, x.shape[2], _freeze(i), _freeze(j), _freeze(u), _freeze(x[i, j, u]))


def aggregate_stream(
    contacts: Iterable[tuple[float, int, int]],
    delta: float,
    horizon: float,
    n_nodes: Optional[int] = None,
) -> InteractionTensor:
    """Bin timestamped contacts ``(t, i, j)`` into intervals ``(u*delta, (u+1)*delta]``.

    ``delta`` must tile ``(0, horizon]`` exactly; a short final interval is
    rejected rather than padded. ``n_nodes`` defaults to ``max id + 1``.
    """
    if delta <= 0 or horizon <= 0:
        raise ValueError("delta and horizon must be positive")
    ratio = horizon / delta
    n_intervals = int(round(ratio))
    if n_intervals < 1 or abs(ratio - n_intervals) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"delta={delta} does not divide horizon={horizon}")
    recs = []
    for t, i, j in contacts:
        if not 0 < t <= horizon:
            raise ValueError(f"contact time {t} outside (0, {horizon}]")
        u = min(math.ceil(t / delta) - 1, n_intervals - 1)
        recs.append((int(i), int(j), u, 1))
    if n_nodes is None:
        n_nodes = max((max(r[0], r[1]) for r in recs), default=0) + 1
    return build_tensor(recs, n_nodes, n_intervals)


@dataclass
class Partition:
    """Node labels in ``[0, K)`` and interval labels in ``[0, D)``."""

    node_labels: np.ndarray
    interval_labels: np.ndarray
    K: int
    D: int

    def __post_init__(self):
        self.node_labels = np.asarray(self.node_labels, dtype=np.int64)
        self.interval_labels = np.asarray(self.interval_labels, dtype=np.int64)
        for name, lab, n in (("node", self.node_labels, self.K), ("interval", self.interval_labels, self.D)):
            if lab.ndim != 1 or lab.size == 0:
                raise ValueError(f"{name} labels must be a non-empty 1-d array")
            if lab.min() < 0 or lab.max() >= n:
                raise ValueError(f"{name} labels must lie in [0, {n})")
            if np.bincount(lab, minlength=n).min() == 0:
                raise ValueError(f"empty {name} cluster")

    @classmethod
    def from_labels(cls, node_labels, interval_labels) -> "Partition":
        """Build a partition from arbitrary labels, renumbered by first appearance."""
        c = relabel_contiguous(node_labels)
        y = relabel_contiguous(interval_labels)
        return cls(c, y, int(c.max()) + 1, int(y.max()) + 1)

    def to_dict(self) -> dict:
        return {
            "node_labels": self.node_labels.tolist(),
            "interval_labels": self.interval_labels.tolist(),
            "K": int(self.K),
            "D": int(self.D),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Partition":
        return cls(d["node_labels"], d["interval_labels"], int(d["K"]), int(d["D"]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return (
            self.K == other.K
            and self.D == other.D
            and np.array_equal(self.node_labels, other.node_labels)
            and np.array_equal(self.interval_labels, other.interval_labels)
        )


def relabel_contiguous(labels) -> np.ndarray:
    _, first, inv = np.unique(np.asarray(labels), return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inv].astype(np.int64)


@dataclass(frozen=True)
class Priors:
    """Gamma(a, b) on the rates and symmetric Dirichlet(alpha) / Dirichlet(gamma) on the weights."""

    a: float = 1.0
    b: float = 1.0
    alpha: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "alpha", "gamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"prior {name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class Move:
    """A candidate or committed change of partition.

    ``kind`` is one of ``node``, ``time`` (exchange of a single item, given by
    ``item``), ``merge_node`` or ``merge_time`` (cluster ``src`` absorbed into
    ``dst``).
    """

    kind: str
    src: int
    dst: int
    item: int = -1

    def __str__(self) -> str:
        if self.kind in ("node", "time"):
            return f"{self.kind}:{self.item}:{self.src}->{self.dst}"
        return f"{self.kind}:{self.src}->{self.dst}"


def pair_exposure(sizes: np.ndarray) -> np.ndarray:
    """``|A_k||A_g|`` off the diagonal and ``|A_k|(|A_k|-1)`` on it."""
    r = np.multiply.outer(sizes, sizes)
    r[np.diag_indices_from(r)] -= sizes
    return r


def _onehot(labels: np.ndarray, width: int) -> np.ndarray:
    z = np.zeros((labels.size, width), dtype=np.int64)
    z[np.arange(labels.size), labels] = 1
    return z


class SuffStats:
    """Block statistics for one fitting state, sized once at ``K_max x K_max x D_max``.

    Holds the current labels as well, since every move has to update both.
    Live clusters always occupy ids ``[0, K)`` and ``[0, D)``. ``L`` caches the
    per-block log marginal likelihood and is kept in sync with ``S``, ``logP``
    and ``R``.
    """

    def __init__(self, tensor: InteractionTensor, partition: Partition, priors: Priors, K_max: int, D_max: int):
        if partition.node_labels.size != tensor.n_nodes or partition.interval_labels.size != tensor.n_intervals:
            raise ValueError("partition does not match tensor dimensions")
        if partition.K > K_max or partition.D > D_max:
            raise ValueError(f"K_max={K_max}, D_max={D_max} smaller than live K={partition.K}, D={partition.D}")
        self.tensor = tensor
        self.priors = priors
        self.K_max = int(K_max)
        self.D_max = int(D_max)
        self.N = tensor.n_nodes
        self.U = tensor.n_intervals
        self.X = tensor.dense()
        self.LF = gammaln(self.X + 1.0)
        self.c = partition.node_labels.copy()
        self.y = partition.interval_labels.copy()
        self.K = partition.K
        self.D = partition.D
        self._rebuild()

    def _rebuild(self) -> None:
        Km, Dm, N, U = self.K_max, self.D_max, self.N, self.U
        zc = _onehot(self.c, Km).astype(float)
        zy = _onehot(self.y, Dm).astype(float)

        def blocks(x):
            # float BLAS products; integer inputs stay exact below 2**53
            by_time = x @ zy  # (i, j, d)
            out = (by_time.transpose(0, 2, 1) @ zc).transpose(0, 2, 1)  # (i, g, d)
            inn = (by_time.transpose(1, 2, 0) @ zc).transpose(0, 2, 1)  # (i, g, d)
            rows = np.tensordot(zc, x, axes=([0], [0]))  # (k, j, u)
            per_u = (rows.transpose(0, 2, 1) @ zc).transpose(0, 2, 1)  # (k, g, u)
            return out, inn, per_u, per_u @ zy

        s_out, s_in, s_time, s = blocks(self.X.astype(float))
        self.S_out, self.S_in, self.S_time, self.S = (
            np.rint(a).astype(np.int64) for a in (s_out, s_in, s_time, s)
        )
        self.logP_out, self.logP_in, self.logP_time, self.logP = blocks(self.LF)
        self.node_sizes = np.bincount(self.c, minlength=Km).astype(np.int64)
        self.time_sizes = np.bincount(self.y, minlength=Dm).astype(np.int64)
        self.R = np.zeros((Km, Km, Dm), dtype=np.int64)
        self.L = np.zeros((Km, Km, Dm))
        self._refresh()

    def _refresh(self) -> None:
        """Recompute exposure and cached block likelihoods on the live region."""
        K, D = self.K, self.D
        self.R[...] = 0
        self.R[:K, :K, :D] = pair_exposure(self.node_sizes[:K])[:, :, None] * self.time_sizes[None, None, :D]
        self.L[...] = 0.0
        from .icl import log_block_likelihood

        self.L[:K, :K, :D] = log_block_likelihood(
            self.S[:K, :K, :D], self.logP[:K, :K, :D], self.R[:K, :K, :D], self.priors
        )

    def copy(self) -> "SuffStats":
        new = object.__new__(SuffStats)
        new.__dict__.update(self.__dict__)
        for name, val in self.__dict__.items():
            if isinstance(val, np.ndarray) and name not in ("X", "LF"):
                new.__dict__[name] = val.copy()
        return new

    def partition(self) -> Partition:
        return Partition(self.c.copy(), self.y.copy(), self.K, self.D)

    # -- views on the live region ----------------------------------------
    def live(self, name: str) -> np.ndarray:
        a = getattr(self, name)
        return a[: self.K, : self.K, : self.D]

    # -- move bookkeeping -------------------------------------------------
    def _node_transfer(self, i: int, k: int, sign: int) -> None:
        """Add (sign=+1) or remove (sign=-1) node ``i`` to/from cluster ``k``."""
        oi, ii = self.S_out[i].copy(), self.S_in[i].copy()
        lo, li = self.logP_out[i].copy(), self.logP_in[i].copy()
        self.S[k] += sign * oi
        self.S[:, k] += sign * ii
        self.logP[k] += sign * lo
        self.logP[:, k] += sign * li
        zc = _onehot(self.c, self.K_max)
        to_out = self.X[i].T @ zc  # (U, K): sum over j in g of N_ij^u
        to_in = self.X[:, i].T @ zc
        self.S_time[k] += sign * to_out.T
        self.S_time[:, k] += sign * to_in.T
        self.logP_time[k] += sign * (self.LF[i].T @ zc).T
        self.logP_time[:, k] += sign * (self.LF[:, i].T @ zc).T
        zy = _onehot(self.y, self.D_max)
        self.S_out[:, k] += sign * (self.X[:, i] @ zy)
        self.S_in[:, k] += sign * (self.X[i] @ zy)
        self.logP_out[:, k] += sign * (self.LF[:, i] @ zy)
        self.logP_in[:, k] += sign * (self.LF[i] @ zy)
        self.node_sizes[k] += sign

    def _interval_transfer(self, u: int, d: int, sign: int) -> None:
        self.S[:, :, d] += sign * self.S_time[:, :, u]
        self.logP[:, :, d] += sign * self.logP_time[:, :, u]
        zc = _onehot(self.c, self.K_max)
        self.S_out[:, :, d] += sign * (self.X[:, :, u] @ zc)
        self.S_in[:, :, d] += sign * (self.X[:, :, u].T @ zc)
        self.logP_out[:, :, d] += sign * (self.LF[:, :, u] @ zc)
        self.logP_in[:, :, d] += sign * (self.LF[:, :, u].T @ zc)
        self.time_sizes[d] += sign

    def _drop_node_cluster(self, k: int) -> None:
        last = self.K - 1
        if k != last:
            sw = [k, last]
            for name in ("S", "logP", "S_time", "logP_time"):
                a = getattr(self, name)
                a[sw] = a[sw[::-1]]
                a[:, sw] = a[:, sw[::-1]]
            for name in ("S_out", "S_in", "logP_out", "logP_in"):
                a = getattr(self, name)
                a[:, sw] = a[:, sw[::-1]]
            self.node_sizes[sw] = self.node_sizes[sw[::-1]]
            self.c[self.c == last] = k
        self.K -= 1

    def _drop_time_cluster(self, d: int) -> None:
        last = self.D - 1
        if d != last:
            sw = [d, last]
            for name in ("S", "logP", "S_out", "S_in", "logP_out", "logP_in"):
                a = getattr(self, name)
                a[:, :, sw] = a[:, :, sw[::-1]]
            self.time_sizes[sw] = self.time_sizes[sw[::-1]]
            self.y[self.y == last] = d
        self.D -= 1

    def apply(self, move: Move) -> None:
        """Commit ``move``; see :func:`apply_move`."""
        kind, src, dst = move.kind, move.src, move.dst
        live = self.K if kind in ("node", "merge_node") else self.D
        if not (0 <= src < live and 0 <= dst < live):
            raise ValueError(f"{move}: cluster id not live (have {live})")
        if src == dst:
            raise ValueError(f"{move}: source equals destination")
        if kind == "node":
            i = move.item
            if self.c[i] != src:
                raise ValueError(f"{move}: node {i} is in cluster {self.c[i]}")
            self._node_transfer(i, src, -1)
            self.c[i] = dst
            self._node_transfer(i, dst, +1)
            if self.node_sizes[src] == 0:
                self._drop_node_cluster(src)
        elif kind == "time":
            u = move.item
            if self.y[u] != src:
                raise ValueError(f"{move}: interval {u} is in cluster {self.y[u]}")
            self._interval_transfer(u, src, -1)
            self.y[u] = dst
            self._interval_transfer(u, dst, +1)
            if self.time_sizes[src] == 0:
                self._drop_time_cluster(src)
        elif kind == "merge_node":
            a, b = src, dst
            for name in ("S", "logP", "S_time", "logP_time"):
                arr = getattr(self, name)
                arr[b] += arr[a]
                arr[:, b] += arr[:, a]
                arr[a] = 0
                arr[:, a] = 0
            for name in ("S_out", "S_in", "logP_out", "logP_in"):
                arr = getattr(self, name)
                arr[:, b] += arr[:, a]
                arr[:, a] = 0
            self.node_sizes[b] += self.node_sizes[a]
            self.node_sizes[a] = 0
            self.c[self.c == a] = b
            self._drop_node_cluster(a)
        elif kind == "merge_time":
            a, b = src, dst
            for name in ("S", "logP", "S_out", "S_in", "logP_out", "logP_in"):
                arr = getattr(self, name)
                arr[:, :, b] += arr[:, :, a]
                arr[:, :, a] = 0
            self.time_sizes[b] += self.time_sizes[a]
            self.time_sizes[a] = 0
            self.y[self.y == a] = b
            self._drop_time_cluster(a)
        else:
            raise ValueError(f"unknown move kind {kind!r}")
        self._refresh()


def compute_suffstats(
    tensor: InteractionTensor,
    partition: Partition,
    priors: Priors = Priors(),
    K_max: Optional[int] = None,
    D_max: Optional[int] = None,
) -> SuffStats:
    """Build block statistics from scratch for ``partition``."""
    return SuffStats(
        tensor,
        partition,
        priors,
        partition.K if K_max is None else K_max,
        partition.D if D_max is None else D_max,
    )


def apply_move(stats: SuffStats, move: Move) -> None:
    """Commit ``move`` to ``stats`` (which carries the partition) in place.

    An exchange that empties its source cluster behaves as a merge: the
    emptied id is filled by the last live cluster (swap-remove) and K or D
    drops by one.
    """
    stats.apply(move)
