"""Node-pair input vectors over a snapshot window.

For a pair ``(u, v)`` and a window of ``T`` snapshots the feature vector is
laid out as ``T`` adjacency-sum blocks of length ``n`` (window order) followed
by ``T`` weighted cumulative link-history values. Blocks are divided by 2 and
the history by ``(T + 1) / 2`` so every entry lies in ``[0, 1]``, the range a
sigmoid reconstruction can reach.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .dyngraph import DynamicNetwork

Pair = tuple[int, int]


@dataclass(frozen=True)
class PairFeature:
    u: int
    v: int
    window: tuple[int, int]
    values: np.ndarray


def feature_length(n: int, window: tuple[int, int]) -> int:
    T = window[1] - window[0] + 1
    return n * T + T


def _check_pair(net: DynamicNetwork, u: int, v: int) -> None:
    if u == v:
        raise ValueError(f"pair ({u}, {v}) has identical endpoints")
    for x in (u, v):
        if not 0 <= x < net.n:
            raise IndexError(f"vertex {x} outside [0, {net.n})")


def pair_adjacency_block(net: DynamicNetwork, i: int, u: int, v: int) -> np.ndarray:
    """Element-wise sum of the adjacency vectors of ``u`` and ``v`` at snapshot ``i``."""
    _check_pair(net, u, v)
    A = net.snapshot(i).adjacency
    return (A.getrow(u) + A.getrow(v)).toarray().ravel()


def weighted_link_history(net: DynamicNetwork, window: tuple[int, int], u: int, v: int) -> np.ndarray:
    """Link indicators over the window scaled by the linear decay ``j / T``.

    The decay is window-relative: the most recent snapshot always has weight 1.
    """
    lo, hi = net.check_window(window)
    _check_pair(net, u, v)
    T = hi - lo + 1
    linked = np.array([net.snapshot(i).has_edge(u, v) for i in range(lo, hi + 1)], dtype=float)
    return np.arange(1, T + 1) / T * linked


def weighted_cumulative_link_history(wlh: np.ndarray) -> np.ndarray:
    return np.cumsum(np.asarray(wlh, dtype=float))


def build_pair_feature(net: DynamicNetwork, window: tuple[int, int], u: int, v: int) -> PairFeature:
    lo, hi = net.check_window(window)
    T = hi - lo + 1
    blocks = [pair_adjacency_block(net, i, u, v) / 2.0 for i in range(lo, hi + 1)]
    wclh = weighted_cumulative_link_history(weighted_link_history(net, window, u, v))
    values = np.concatenate(blocks + [wclh / ((T + 1) / 2.0)])
    a, b = (u, v) if u < v else (v, u)
    return PairFeature(a, b, (lo, hi), values)


def build_dataset(net: DynamicNetwork, window: tuple[int, int], pairs: Sequence[Pair]) -> np.ndarray:
    """Stack pair features row-wise, one row per entry of ``pairs`` in order.

    Vectorised equivalent of calling :func:`build_pair_feature` per pair.
    """
    lo, hi = net.check_window(window)
    P = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len({(int(a), int(b)) for a, b in P}) != len(P):
        raise ValueError("duplicate pairs in dataset request")
    if len(P) and (np.any(P[:, 0] == P[:, 1]) or P.min() < 0 or P.max() >= net.n):
        raise ValueError("pairs must have distinct endpoints in [0, n)")
    T = hi - lo + 1
    n = net.n
    out = np.empty((len(P), n * T + T))
    us, vs = P[:, 0], P[:, 1]
    hist = np.empty((len(P), T))
    for j, i in enumerate(range(lo, hi + 1)):
        A = net.snapshot(i).adjacency
        out[:, j * n:(j + 1) * n] = (A[us] + A[vs]).toarray() / 2.0
        linked = np.asarray(A[us, vs]).ravel() if len(P) else np.zeros(0)
        hist[:, j] = (j + 1) / T * linked
    out[:, n * T:] = np.cumsum(hist, axis=1) / ((T + 1) / 2.0)
    return out


def iter_dataset(net: DynamicNetwork, window: tuple[int, int], pairs: Sequence[Pair],
                 chunk: int = 2048) -> Iterator[np.ndarray]:
    """Yield :func:`build_dataset` in row chunks, for pair sets too large to hold densely."""
    for start in range(0, len(pairs), chunk):
        yield build_dataset(net, window, pairs[start:start + chunk])


def all_pairs(n: int) -> list[Pair]:
    iu, iv = np.triu_indices(n, k=1)
    return list(zip(iu.tolist(), iv.tolist()))


# --- dataset dump ---------------------------------------------------------

def _fmt_value(x: float) -> str:
    # nine decimals when that reloads to the same double, else the shortest exact repr
    short = f"{x:.9f}"
    return short if float(short) == x else repr(x)


def format_dataset(X: np.ndarray) -> str:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lines = [f"{X.shape[0]} {X.shape[1]}"]
    lines.extend(" ".join(_fmt_value(float(x)) for x in row) for row in X)
    return "\n".join(lines) + "\n"


def parse_dataset(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty dataset dump")
    rows, k = (int(x) for x in lines[0].split())
    if len(lines) - 1 != rows:
        raise ValueError(f"header announces {rows} rows, found {len(lines) - 1}")
    X = np.zeros((rows, k))
    for r in range(rows):
        vals = lines[1 + r].split()
        if len(vals) != k:
            raise ValueError(f"row {r}: expected {k} values, got {len(vals)}")
        X[r] = [float(x) for x in vals]
    return X


def write_dataset(X: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(format_dataset(X), encoding="utf-8")


def read_dataset(path: str | Path) -> np.ndarray:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))
