"""Partition agreement metrics."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def _check_pair(x, y, min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    x, y = np.asarray(x).ravel(), np.asarray(y).ravel()
    if x.size != y.size:
        raise ValueError(f"label vectors differ in length: {x.size} vs {y.size}")
    if x.size < min_len:
        raise ValueError(f"need at least {min_len} labels, got {x.size}")
    return x, y


def confusion(x, y) -> np.ndarray:
    """Contingency table; rows follow the sorted labels of ``x``, columns those of ``y``."""
    x, y = _check_pair(x, y)
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    table = np.zeros((xi.max() + 1, yi.max() + 1), dtype=np.int64)
    np.add.at(table, (xi, yi), 1)
    return table


def _comb2(v) -> int:
    return sum(int(n) * (int(n) - 1) // 2 for n in np.asarray(v).ravel())


def ari(x, y) -> float:
    """Hubert-Arabie adjusted Rand index, evaluated in exact rational arithmetic.

    When the chance-corrected denominator vanishes (both partitions trivial)
    the result is 1.0 for identical partitions and 0.0 otherwise.
    """
    x, y = _check_pair(x, y, min_len=2)
    table = confusion(x, y)
    index = _comb2(table)
    sa = _comb2(table.sum(axis=1))
    sb = _comb2(table.sum(axis=0))
    total = x.size * (x.size - 1) // 2
    num = 2 * total * index - 2 * sa * sb
    den = total * (sa + sb) - 2 * sa * sb
    if den == 0:
        return 1.0 if table.shape[0] == table.shape[1] == np.count_nonzero(table) else 0.0
    return float(Fraction(num, den))
