"""Competing link predictors.

Topological scores (common neighbours, Adamic-Adar, Jaccard, truncated Katz)
are evaluated on a single :class:`Snapshot`, usually the collapsed network.
The time-series family scores a pair by forecasting its per-snapshot
similarity and its connectivity one step ahead with a least-squares AR model.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from .dyngraph import DynamicNetwork, Snapshot

Pair = tuple[int, int]

KATZ_BETA = 0.005
KATZ_MAX_LEN = 5
JACK_COLUMNS = ("J", "AA", "CN", "Katz")
TS_METRICS = ("CN", "AA", "J", "PA")


@dataclass(frozen=True)
class TopoScore:
    pair: Pair
    cn: float
    aa: float
    j: float
    katz: float


@dataclass(frozen=True, eq=False)
class SimilaritySeries:
    pair: Pair
    metric: str
    values: np.ndarray
    adj: np.ndarray


def _check(g: Snapshot, u: int, v: int):
    if u == v:
        raise ValueError(f"pair ({u}, {v}) has identical endpoints")
    for x in (u, v):
        if not 0 <= x < g.n:
            raise IndexError(f"vertex {x} outside [0, {g.n})")


def common_neighbors(g: Snapshot, u: int, v: int) -> int:
    _check(g, u, v)
    return len(g.neighbors[u] & g.neighbors[v])


def adamic_adar(g: Snapshot, u: int, v: int) -> float:
    _check(g, u, v)
    total = 0.0
    for w in g.neighbors[u] & g.neighbors[v]:
        d = len(g.neighbors[w])
        assert d >= 2, "a common neighbour touches both endpoints"
        total += 1.0 / math.log(d)
    return total


def jaccard(g: Snapshot, u: int, v: int) -> float:
    """Neighbourhood overlap ratio; 0 when both vertices are isolated."""
    _check(g, u, v)
    union = g.neighbors[u] | g.neighbors[v]
    if not union:
        return 0.0
    return len(g.neighbors[u] & g.neighbors[v]) / len(union)


def katz(g: Snapshot, u: int, v: int, beta: float = KATZ_BETA, max_len: int = KATZ_MAX_LEN) -> float:
    """Sum over walk lengths 2..max_len of ``beta**p`` times the number of u-v walks."""
    _check(g, u, v)
    A = g.adjacency
    x = np.zeros(g.n)
    x[u] = 1.0
    x = A @ x
    total = 0.0
    for p in range(2, max_len + 1):
        x = A @ x
        total += beta ** p * x[v]
    return float(total)


# --- vectorised scorers over many pairs -----------------------------------

def _pairs_array(pairs: Sequence[Pair]) -> np.ndarray:
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def cn_scores(g: Snapshot, pairs: Sequence[Pair]) -> np.ndarray:
    P = _pairs_array(pairs)
    if not len(P):
        return np.zeros(0)
    A = g.adjacency
    return np.asarray(A[P[:, 0]].multiply(A[P[:, 1]]).sum(axis=1)).ravel()


def aa_scores(g: Snapshot, pairs: Sequence[Pair]) -> np.ndarray:
    P = _pairs_array(pairs)
    if not len(P):
        return np.zeros(0)
    A = g.adjacency
    deg = g.degrees
    inv = np.zeros(g.n)
    ok = deg >= 2
    inv[ok] = 1.0 / np.log(deg[ok])
    return np.asarray((A[P[:, 0]] @ sparse.diags(inv)).multiply(A[P[:, 1]]).sum(axis=1)).ravel()


def jaccard_scores(g: Snapshot, pairs: Sequence[Pair]) -> np.ndarray:
    P = _pairs_array(pairs)
    if not len(P):
        return np.zeros(0)
    cn = cn_scores(g, pairs)
    union = g.degrees[P[:, 0]] + g.degrees[P[:, 1]] - cn
    return np.divide(cn, union, out=np.zeros_like(cn), where=union > 0)


def pa_scores(g: Snapshot, pairs: Sequence[Pair]) -> np.ndarray:
    P = _pairs_array(pairs)
    if not len(P):
        return np.zeros(0)
    return g.degrees[P[:, 0]] * g.degrees[P[:, 1]]


def katz_scores(g: Snapshot, pairs: Sequence[Pair], beta: float = KATZ_BETA,
                max_len: int = KATZ_MAX_LEN) -> np.ndarray:
    """Truncated Katz for many pairs via repeated sparse products, one column per source."""
    P = _pairs_array(pairs)
    if not len(P):
        return np.zeros(0)
    A = g.adjacency
    sources, col = np.unique(P[:, 0], return_inverse=True)
    X = A[:, sources].toarray()
    S = np.zeros_like(X)
    for p in range(2, max_len + 1):
        X = A @ X
        S += beta ** p * X
    return S[P[:, 1], col]


def topo_scores(g: Snapshot, pairs: Sequence[Pair], beta: float = KATZ_BETA,
                max_len: int = KATZ_MAX_LEN) -> list[TopoScore]:
    cols = jack_features(g, pairs, beta, max_len)
    return [TopoScore(tuple(p), float(c), float(a), float(j), float(k))
            for p, (j, a, c, k) in zip(pairs, cols)]


def jack_features(g: Snapshot, pairs: Sequence[Pair], beta: float = KATZ_BETA,
                  max_len: int = KATZ_MAX_LEN) -> np.ndarray:
    """Columns ``[J, AA, CN, Katz]``, one row per pair."""
    if not len(pairs):
        return np.zeros((0, 4))
    return np.column_stack([
        jaccard_scores(g, pairs),
        aa_scores(g, pairs),
        cn_scores(g, pairs),
        katz_scores(g, pairs, beta, max_len),
    ])


_SCORERS = {"CN": cn_scores, "AA": aa_scores, "J": jaccard_scores, "PA": pa_scores}


# --- time series ----------------------------------------------------------

def _minmax_columns(M: np.ndarray) -> np.ndarray:
    lo = M.min(axis=0)
    span = M.max(axis=0) - lo
    out = np.zeros_like(M)
    ok = span > 0
    out[:, ok] = (M[:, ok] - lo[ok]) / span[ok]
    return out


def similarity_matrix(net: DynamicNetwork, metric: str, pairs: Sequence[Pair]) -> tuple[np.ndarray, np.ndarray]:
    """Normalised similarity and connectivity series for every pair.

    Returns ``(values, adj)``, both ``len(pairs) x t``. Each snapshot's
    similarity column is min-max normalised over ``pairs``.
    """
    if metric not in _SCORERS:
        raise ValueError(f"unknown similarity metric {metric!r}; expected one of {TS_METRICS}")
    P = _pairs_array(pairs)
    raw = np.zeros((len(P), net.t))
    adj = np.zeros((len(P), net.t))
    for i, g in enumerate(net.snapshots):
        raw[:, i] = _SCORERS[metric](g, pairs)
        if len(P):
            adj[:, i] = np.asarray(g.adjacency[P[:, 0], P[:, 1]]).ravel()
    return (_minmax_columns(raw) if len(P) else raw), adj


def similarity_series(net: DynamicNetwork, metric: str, u: int, v: int,
                      population: Sequence[Pair] | None = None) -> SimilaritySeries:
    """Series for one pair, normalised over ``population`` (default: all pairs)."""
    a, b = (u, v) if u < v else (v, u)
    if population is None:
        iu, iv = np.triu_indices(net.n, k=1)
        population = list(zip(iu.tolist(), iv.tolist()))
    pop = [tuple(p) for p in population]
    if (a, b) not in pop:
        pop.append((a, b))
    values, adj = similarity_matrix(net, metric, pop)
    row = pop.index((a, b))
    return SimilaritySeries((a, b), metric, values[row], adj[row])


def ar_order(t: int) -> int:
    return min(2, t - 2)


def forecast_many(Y: np.ndarray, order: int | None = None) -> np.ndarray:
    """One-step-ahead least-squares AR(p) forecast for each row of ``Y``.

    The model has an intercept; ``p`` defaults to ``min(2, t - 2)``. Rows
    shorter than 3 points fall back to their last value. Rank-deficient fits
    use the minimum-norm least-squares solution.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    t = Y.shape[1]
    if t < 2:
        raise ValueError("forecasting needs at least 2 observations")
    if t < 3:
        return Y[:, -1].copy()
    p = ar_order(t) if order is None else order
    if not 1 <= p <= t - 1:
        raise ValueError(f"AR order {p} not supported for series of length {t}")
    m = t - p
    # design rows [1, y_{s-1}, ..., y_{s-p}] for targets y_s, s = p..t-1
    lags = np.stack([Y[:, p - j - 1:p - j - 1 + m] for j in range(p)], axis=2)
    X = np.concatenate([np.ones((len(Y), m, 1)), lags], axis=2)
    target = Y[:, p:]
    coef = np.einsum("bij,bj->bi", np.linalg.pinv(X), target)
    x_next = np.concatenate([np.ones((len(Y), 1)), Y[:, ::-1][:, :p]], axis=1)
    return np.einsum("bi,bi->b", coef, x_next)


def forecast(values, order: int | None = None) -> float:
    return float(forecast_many(np.asarray(values, dtype=float)[None, :], order)[0])


def forecast_score(series: SimilaritySeries) -> float:
    """Similarity forecast plus connectivity forecast."""
    return forecast(series.values) + forecast(series.adj)


def ts_scores(net: DynamicNetwork, metric: str, pairs: Sequence[Pair]) -> np.ndarray:
    values, adj = similarity_matrix(net, metric, pairs)
    if not len(pairs):
        return np.zeros(0)
    return forecast_many(values) + forecast_many(adj)


def write_scores_csv(rows: Sequence[tuple[int, int, str, float]], path: str | Path) -> None:
    """Baseline scores as ``u,v,method,score``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v", "method", "score"])
        for u, v, method, s in rows:
            w.writerow([u, v, method, format(float(s), ".17g")])
