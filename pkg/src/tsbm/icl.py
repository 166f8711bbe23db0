"""Exact integrated complete-data likelihood and its incremental changes.

Everything is computed in the natural-log domain. A block with ``S = 0`` and
``R = 0`` (the blocks of an emptied cluster) has a log marginal likelihood of
exactly zero, which lets exchanges that empty a cluster reuse the exchange
formulas with only the label term switched to its merge form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import Priors, SuffStats, pair_exposure


@dataclass(frozen=True)
class IclValue:
    value: float
    block_term: float
    label_term: float


def log_block_likelihood(S, logP, R, priors: Priors):
    """Log of the Gamma-Poisson marginal of one block, elementwise over arrays."""
    a, b = priors.a, priors.b
    S = np.asarray(S, dtype=float)
    return a * math.log(b) - math.lgamma(a) - logP + gammaln(S + a) - (S + a) * np.log(R + b)


def _dirichlet_term(sizes, total: int, conc: float) -> float:
    n = len(sizes)
    return (
        math.lgamma(conc * n)
        - n * math.lgamma(conc)
        + float(np.sum(gammaln(np.asarray(sizes, dtype=float) + conc)))
        - math.lgamma(total + conc * n)
    )


def log_label_prior(node_sizes, time_sizes, N: int, U: int, priors: Priors) -> float:
    """Log of the Dirichlet-multinomial marginal of the node and interval labels."""
    return _dirichlet_term(node_sizes, N, priors.alpha) + _dirichlet_term(time_sizes, U, priors.gamma)


def icl_full(stats: SuffStats) -> IclValue:
    K, D = stats.K, stats.D
    block = float(
        np.sum(
            log_block_likelihood(
                stats.S[:K, :K, :D], stats.logP[:K, :K, :D], stats.R[:K, :K, :D], stats.priors
            )
        )
    )
    label = log_label_prior(stats.node_sizes[:K], stats.time_sizes[:D], stats.N, stats.U, stats.priors)
    return IclValue(block + label, block, label)


def _exchange_label(sizes: np.ndarray, src: int, conc: float, total: int) -> np.ndarray:
    """Label-term change for moving one item out of ``src`` into each cluster."""
    n = sizes.astype(float)
    live = len(sizes)
    gain_dst = gammaln(n + 1 + conc) - gammaln(n + conc)
    if sizes[src] >= 2:
        out = gammaln(n[src] - 1 + conc) - gammaln(n[src] + conc) + gain_dst
    else:
        # source disappears: the number of clusters drops by one
        out = (
            math.lgamma(conc * (live - 1))
            - math.lgamma(conc * live)
            + math.lgamma(conc)
            - math.lgamma(1 + conc)
            + gain_dst
            - math.lgamma(total + conc * (live - 1))
            + math.lgamma(total + conc * live)
        )
    return out


def _merge_label(sizes: np.ndarray, conc: float, total: int) -> np.ndarray:
    """Label-term change for merging each pair of clusters, shape (n, n)."""
    n = sizes.astype(float)
    live = len(sizes)
    lg = gammaln(n + conc)
    merged = gammaln(n[:, None] + n[None, :] + conc)
    return (
        math.lgamma(conc * (live - 1))
        - math.lgamma(conc * live)
        + math.lgamma(conc)
        + merged
        - lg[:, None]
        - lg[None, :]
        - math.lgamma(total + conc * (live - 1))
        + math.lgamma(total + conc * live)
    )


def time_exchange_gains(stats: SuffStats, u: int) -> np.ndarray:
    """ICL change for moving interval ``u`` into every live time cluster.

    Entry ``y_u`` is ``-inf``. A singleton source is scored as the merge it
    amounts to. Cost O(K^2 D).
    """
    K, D, pr = stats.K, stats.D, stats.priors
    src = stats.y[u]
    if D < 2:
        return np.full(D, -np.inf)
    st = stats.S_time[:K, :K, u]
    lt = stats.logP_time[:K, :K, u]
    rkg = pair_exposure(stats.node_sizes[:K])
    C = stats.time_sizes[:D]
    S, logP, L = stats.S[:K, :K, :D], stats.logP[:K, :K, :D], stats.L[:K, :K, :D]

    src_new = log_block_likelihood(S[:, :, src] - st, logP[:, :, src] - lt, rkg * (C[src] - 1), pr)
    src_change = float(np.sum(src_new - L[:, :, src]))
    dst_new = log_block_likelihood(S + st[:, :, None], logP + lt[:, :, None], rkg[:, :, None] * (C + 1), pr)
    dst_change = np.sum(dst_new - L, axis=(0, 1))

    gains = _exchange_label(C, src, pr.gamma, stats.U) + src_change + dst_change
    gains[src] = -np.inf
    return gains


def node_exchange_gains(stats: SuffStats, i: int) -> np.ndarray:
    """ICL change for moving node ``i`` into every live node cluster.

    Affected blocks are rows and columns of the source ``k`` and of the
    destination ``l``; they are recomputed from the node marginals of ``i``
    and diffed against the cached block likelihoods. Vectorised over ``l``;
    cost O(K^2 D) per node.
    """
    K, D, pr = stats.K, stats.D, stats.priors
    k = stats.c[i]
    if K < 2:
        return np.full(K, -np.inf)
    n = stats.node_sizes[:K]
    C = stats.time_sizes[:D]
    S, logP, L = stats.S[:K, :K, :D], stats.logP[:K, :K, :D], stats.L[:K, :K, :D]
    oi, ii = stats.S_out[i, :K, :D], stats.S_in[i, :K, :D]
    lo, li = stats.logP_out[i, :K, :D], stats.logP_in[i, :K, :D]
    nk = n[k]

    # row k and column k without i (entries g == k handled below)
    row_k = log_block_likelihood(S[k] - oi, logP[k] - lo, (nk - 1) * np.multiply.outer(n, C), pr) - L[k]
    col_k = log_block_likelihood(S[:, k] - ii, logP[:, k] - li, (nk - 1) * np.multiply.outer(n, C), pr) - L[:, k]
    row_k = row_k.sum(axis=1)
    col_k = col_k.sum(axis=1)
    row_k[k] = 0.0
    col_k[k] = 0.0

    # row l and column l with i, for every candidate l; shapes (l, g, d) and (h, l, d)
    r_rows = (n + 1)[:, None, None] * n[None, :, None] * C[None, None, :]
    row_l = log_block_likelihood(S + oi[None], logP + lo[None], r_rows, pr) - L
    col_l = log_block_likelihood(
        S + ii[:, None], logP + li[:, None], np.transpose(r_rows, (1, 0, 2)), pr
    ) - L
    row_l = row_l.sum(axis=2)
    col_l = col_l.sum(axis=2)
    idx = np.arange(K)
    row_l[idx, idx] = 0.0
    row_l[:, k] = 0.0
    col_l[idx, idx] = 0.0
    col_l[k, :] = 0.0

    # the four intersection blocks
    kk = float(np.sum(
        log_block_likelihood(S[k, k] - oi[k] - ii[k], logP[k, k] - lo[k] - li[k], (nk - 1) * (nk - 2) * C, pr)
        - L[k, k]
    ))
    diag_S = S[idx, idx] + oi + ii
    diag_P = logP[idx, idx] + lo + li
    ll = log_block_likelihood(diag_S, diag_P, ((n + 1) * n)[:, None] * C, pr) - L[idx, idx]
    r_cross = ((nk - 1) * (n + 1))[:, None] * C
    kl = log_block_likelihood(S[k] - oi + ii[k], logP[k] - lo + li[k], r_cross, pr) - L[k]
    lk = log_block_likelihood(S[:, k] - ii + oi[k], logP[:, k] - li + lo[k], r_cross, pr) - L[:, k]
    inter = kk + (ll + kl + lk).sum(axis=1)

    blocks = (
        (row_k.sum() - row_k)
        + (col_k.sum() - col_k)
        + row_l.sum(axis=1)
        + col_l.sum(axis=0)
        + inter
    )
    gains = _exchange_label(n, k, pr.alpha, stats.N) + blocks
    gains[k] = -np.inf
    return gains


def time_merge_gains(stats: SuffStats) -> np.ndarray:
    """ICL change for merging each pair of live time clusters; (D, D), upper triangle valid."""
    K, D, pr = stats.K, stats.D, stats.priors
    out = np.full((D, D), -np.inf)
    if D < 2:
        return out
    rkg = pair_exposure(stats.node_sizes[:K])
    C = stats.time_sizes[:D]
    S, logP, L = stats.S[:K, :K, :D], stats.logP[:K, :K, :D], stats.L[:K, :K, :D]
    label = _merge_label(C, pr.gamma, stats.U)
    for a in range(D - 1):
        b = slice(a + 1, D)
        new = log_block_likelihood(
            S[:, :, b] + S[:, :, a, None],
            logP[:, :, b] + logP[:, :, a, None],
            rkg[:, :, None] * (C[b] + C[a]),
            pr,
        )
        out[a, b] = np.sum(new - L[:, :, b] - L[:, :, a, None], axis=(0, 1)) + label[a, b]
    return out


def node_merge_gains(stats: SuffStats) -> np.ndarray:
    """ICL change for merging each pair of live node clusters; (K, K), upper triangle valid."""
    K, D, pr = stats.K, stats.D, stats.priors
    out = np.full((K, K), -np.inf)
    if K < 2:
        return out
    n = stats.node_sizes[:K]
    C = stats.time_sizes[:D]
    S, logP, L = stats.S[:K, :K, :D], stats.logP[:K, :K, :D], stats.L[:K, :K, :D]
    label = _merge_label(n, pr.alpha, stats.N)
    ng_c = np.multiply.outer(n, C)  # (g, d)
    for a in range(K - 1):
        bs = np.arange(a + 1, K)
        m = n[a] + n[bs]  # merged sizes, (b,)
        # rows: merged cluster -> g, shape (b, g, d)
        rows = log_block_likelihood(
            S[bs] + S[a][None], logP[bs] + logP[a][None], m[:, None, None] * ng_c[None], pr
        ) - L[bs] - L[a][None]
        # columns: h -> merged cluster, shape (b, h, d)
        cols = log_block_likelihood(
            S[:, bs].transpose(1, 0, 2) + S[:, a][None],
            logP[:, bs].transpose(1, 0, 2) + logP[:, a][None],
            m[:, None, None] * ng_c[None],
            pr,
        ) - L[:, bs].transpose(1, 0, 2) - L[:, a][None]
        mask = np.ones((bs.size, K), dtype=bool)
        mask[:, a] = False
        mask[np.arange(bs.size), bs] = False
        rows = (rows.sum(axis=2) * mask).sum(axis=1)
        cols = (cols.sum(axis=2) * mask).sum(axis=1)
        diag_S = S[a, a] + S[a, bs] + S[bs, a] + S[bs, bs]
        diag_P = logP[a, a] + logP[a, bs] + logP[bs, a] + logP[bs, bs]
        diag = log_block_likelihood(diag_S, diag_P, (m * (m - 1))[:, None] * C[None], pr)
        diag = (diag - L[a, a] - L[a, bs] - L[bs, a] - L[bs, bs]).sum(axis=1)
        out[a, bs] = rows + cols + diag + label[a, bs]
    return out


def _check_live(cluster: int, live: int, what: str) -> None:
    if not 0 <= cluster < live:
        raise ValueError(f"{what} cluster {cluster} is not live (have {live})")


def delta_exchange_time(stats: SuffStats, u: int, d_src: int, d_dst: int) -> float:
    _check_live(d_src, stats.D, "time")
    _check_live(d_dst, stats.D, "time")
    if stats.y[u] != d_src:
        raise ValueError(f"interval {u} is in time cluster {stats.y[u]}, not {d_src}")
    if d_src == d_dst:
        return 0.0
    if stats.time_sizes[d_src] < 2:
        raise ValueError("singleton source: use delta_merge_time")
    return float(time_exchange_gains(stats, u)[d_dst])


def delta_exchange_node(stats: SuffStats, i: int, k_src: int, k_dst: int) -> float:
    _check_live(k_src, stats.K, "node")
    _check_live(k_dst, stats.K, "node")
    if stats.c[i] != k_src:
        raise ValueError(f"node {i} is in cluster {stats.c[i]}, not {k_src}")
    if k_src == k_dst:
        return 0.0
    if stats.node_sizes[k_src] < 2:
        raise ValueError("singleton source: use delta_merge_node")
    return float(node_exchange_gains(stats, i)[k_dst])


def delta_merge_time(stats: SuffStats, d_a: int, d_b: int) -> float:
    _check_live(d_a, stats.D, "time")
    _check_live(d_b, stats.D, "time")
    if d_a == d_b:
        raise ValueError("cannot merge a cluster with itself")
    a, b = min(d_a, d_b), max(d_a, d_b)
    return float(time_merge_gains(stats)[a, b])


def delta_merge_node(stats: SuffStats, k_a: int, k_b: int) -> float:
    _check_live(k_a, stats.K, "node")
    _check_live(k_b, stats.K, "node")
    if k_a == k_b:
        raise ValueError("cannot merge a cluster with itself")
    a, b = min(k_a, k_b), max(k_a, k_b)
    return float(node_merge_gains(stats)[a, b])
