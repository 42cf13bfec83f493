"""Ranking metrics (PR curve, PRAUC, NDCG@k) and training-pair sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dyngraph import DynamicNetwork

Pair = tuple[int, int]


@dataclass(frozen=True, eq=False)
class RankedScores:
    """Scored candidate pairs. ``labels`` is ``None`` until ground truth is attached."""

    pairs: list[Pair]
    scores: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=float))
        if len(self.pairs) != len(self.scores):
            raise ValueError("pairs and scores differ in length")
        if self.labels is not None:
            lab = np.asarray(self.labels).astype(np.int64)
            if len(lab) != len(self.scores):
                raise ValueError("labels and scores differ in length")
            object.__setattr__(self, "labels", lab)

    def with_labels(self, labels) -> "RankedScores":
        return RankedScores(self.pairs, self.scores, np.asarray(labels))

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class SamplerConfig:
    ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.ratio >= 1:
            raise ValueError(f"negative:positive ratio must be >= 1, got {self.ratio}")


def _labels(rs: RankedScores) -> np.ndarray:
    if rs.labels is None:
        raise ValueError("scores carry no labels")
    return rs.labels


def pr_curve(rs: RankedScores) -> list[tuple[float, float]]:
    """(recall, precision) at distinct score thresholds, highest first.

    Tied scores form a single threshold. Thresholds that admit no positive
    yet (recall 0) are skipped and the curve ends at the first threshold
    reaching full recall, so every precision lies in ``(0, 1]``. The list
    starts with ``(0, precision of the first point)``.
    """
    y = _labels(rs)
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise ValueError("PR curve needs at least one positive and one negative")
    order = np.argsort(-rs.scores, kind="stable")
    s, yy = rs.scores[order], y[order]
    tp = np.cumsum(yy)
    seen = np.arange(1, len(yy) + 1)
    # last index of each tie group
    ends = np.r_[np.nonzero(np.diff(s) != 0)[0], len(s) - 1]
    ends = ends[(tp[ends] > 0) & (np.r_[0, tp[ends][:-1]] < n_pos)]
    rec = tp[ends] / n_pos
    prec = tp[ends] / seen[ends]
    return [(0.0, float(prec[0]))] + list(zip(rec.tolist(), prec.tolist()))


def prauc(rs: RankedScores) -> float:
    pts = pr_curve(rs)
    r = np.array([p[0] for p in pts])
    p = np.array([p[1] for p in pts])
    return float(np.sum(np.diff(r) * (p[1:] + p[:-1]) / 2.0))


def ranking_order(rs: RankedScores) -> np.ndarray:
    """Indices by descending score, ties broken by ascending pair id."""
    P = np.asarray(rs.pairs, dtype=np.int64).reshape(-1, 2)
    return np.lexsort((P[:, 1], P[:, 0], -rs.scores))


def ndcg_at_k(rs: RankedScores, k: int = 50) -> float:
    y = _labels(rs)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("NDCG needs at least one positive")
    if k < 1:
        raise ValueError("k must be at least 1")
    top = y[ranking_order(rs)][:k]
    disc = 1.0 / np.log2(np.arange(2, len(top) + 2))
    dcg = float(np.sum(top * disc))
    ideal = float(np.sum(disc[:min(k, n_pos, len(top))]))
    return dcg / ideal


def metric_report(method: str, rs: RankedScores, k: int = 50) -> dict:
    y = _labels(rs)
    return {
        "method": method,
        "prauc": prauc(rs),
        "ndcg_k": ndcg_at_k(rs, k),
        "k": k,
        "n_pos": int(y.sum()),
        "n_neg": int(len(y) - y.sum()),
    }


# --- sampling -------------------------------------------------------------

def _pair_index(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    # row-major index of (u, v), u < v, in the strict upper triangle
    return u * n - u * (u + 1) // 2 + (v - u - 1)


def _index_pair(idx: np.ndarray, n: int) -> np.ndarray:
    iu, iv = np.triu_indices(n, k=1)
    return np.stack([iu[idx], iv[idx]], axis=1)


def sample_non_edges(n: int, exclude: Sequence[Pair], count: int, seed: int) -> list[Pair]:
    """``count`` vertex pairs drawn uniformly without replacement, avoiding ``exclude``."""
    total = n * (n - 1) // 2
    excl = np.asarray(sorted(exclude), dtype=np.int64).reshape(-1, 2)
    mask = np.ones(total, dtype=bool)
    if len(excl):
        mask[_pair_index(excl[:, 0], excl[:, 1], n)] = False
    pool = np.nonzero(mask)[0]
    if count > len(pool):
        raise ValueError(f"requested {count} negatives but only {len(pool)} non-edges exist")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(pool, size=count, replace=False))
    return [tuple(p) for p in _index_pair(chosen, n).tolist()]


def sample_training_pairs(net: DynamicNetwork, label_snapshot: int,
                          cfg: SamplerConfig = SamplerConfig()) -> list[tuple[Pair, int]]:
    """All edges of the label snapshot plus ``ceil(ratio * #edges)`` uniform non-edges.

    Positives come first (sorted), then negatives (sorted).
    """
    g = net.snapshot(label_snapshot)
    pos = sorted(g.edges)
    if not pos:
        raise ValueError(f"snapshot {label_snapshot} has no edges to use as positives")
    n_neg = math.ceil(cfg.ratio * len(pos))
    neg = sample_non_edges(net.n, pos, n_neg, cfg.seed)
    return [(p, 1) for p in pos] + [(p, 0) for p in neg]
