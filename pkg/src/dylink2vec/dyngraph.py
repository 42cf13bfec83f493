"""Dynamic networks: snapshot sequences over a fixed vertex set.

A :class:`DynamicNetwork` is an ordered list of :class:`Snapshot` objects that
all share the same vertex count ``n``. Snapshot ordinals are 1-based, vertex
ids are 0-based. Edges are undirected and stored once as ``(min, max)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy import sparse

Edge = tuple[int, int]


def canonical(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Snapshot:
    index: int
    n: int
    edges: frozenset[Edge]

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(
                    f"snapshot {self.index}: edge ({u}, {v}) is not canonical "
                    f"or out of range for n={self.n}")

    def __eq__(self, other):
        if not isinstance(other, Snapshot):
            return NotImplemented
        return (self.index, self.n, self.edges) == (other.index, other.n, other.edges)

    def __hash__(self):
        return hash((self.index, self.n, self.edges))

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric binary adjacency matrix (CSR, float64)."""
        if not self.edges:
            return sparse.csr_matrix((self.n, self.n))
        e = np.array(sorted(self.edges), dtype=np.int64)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(len(rows))
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    @cached_property
    def neighbors(self) -> list[set[int]]:
        nbrs: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return nbrs

    def has_edge(self, u: int, v: int) -> bool:
        return canonical(u, v) in self.edges

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True, eq=False)
class DynamicNetwork:
    n: int
    snapshots: tuple[Snapshot, ...]

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        if not self.snapshots:
            raise ValueError("a dynamic network needs at least one snapshot")
        for pos, g in enumerate(self.snapshots, start=1):
            if g.n != self.n:
                raise ValueError(f"snapshot {g.index} has n={g.n}, expected {self.n}")
            if g.index != pos:
                raise ValueError(f"snapshot ordinals must be 1..t, found {g.index} at {pos}")

    def __eq__(self, other):
        if not isinstance(other, DynamicNetwork):
            return NotImplemented
        return self.n == other.n and self.snapshots == other.snapshots

    def __hash__(self):
        return hash((self.n, self.snapshots))

    @property
    def t(self) -> int:
        return len(self.snapshots)

    def snapshot(self, i: int) -> Snapshot:
        if not 1 <= i <= self.t:
            raise IndexError(f"snapshot ordinal {i} outside [1, {self.t}]")
        return self.snapshots[i - 1]

    def check_window(self, window: tuple[int, int]) -> tuple[int, int]:
        lo, hi = window
        if not 1 <= lo <= hi <= self.t:
            raise ValueError(f"invalid window [{lo}, {hi}] for t={self.t}")
        return lo, hi

    def prefix(self, t: int) -> "DynamicNetwork":
        """The network restricted to snapshots ``1..t``."""
        if not 1 <= t <= self.t:
            raise ValueError(f"prefix length {t} outside [1, {self.t}]")
        return DynamicNetwork(self.n, self.snapshots[:t])

    def edge_records(self) -> list[tuple[int, int, int]]:
        """Canonical ``(i, u, v)`` records, sorted."""
        return [(g.index, u, v) for g in self.snapshots for u, v in sorted(g.edges)]


@dataclass(frozen=True)
class IngestSpec:
    window_length: float
    min_active_snapshots: int = 0
    min_degree: int = 0

    def __post_init__(self):
        if not self.window_length > 0:
            raise ValueError("window_length must be positive")
        if self.min_active_snapshots < 0 or self.min_degree < 0:
            raise ValueError("filter thresholds must be non-negative")


def from_edge_sets(n: int, edge_sets: Sequence[Iterable[tuple[int, int]]]) -> DynamicNetwork:
    """Build a network from one iterable of vertex pairs per snapshot.

    Pairs are canonicalised, self-loops dropped, duplicates merged.
    """
    snaps = []
    for i, es in enumerate(edge_sets, start=1):
        snaps.append(Snapshot(i, n, frozenset(canonical(u, v) for u, v in es if u != v)))
    return DynamicNetwork(n, tuple(snaps))


def _key_order(key):
    return (0, key, "") if isinstance(key, int) else (1, 0, str(key))


def ingest(records: Sequence[tuple[Hashable, Hashable, float]], spec: IngestSpec) -> DynamicNetwork:
    """Bin timestamped edge records into fixed-width snapshots.

    Raw vertex keys are relabelled densely in sorted key order (integers
    numerically, before strings), so re-ingesting a canonical edge list is an
    identity.
    Record times are assigned to snapshot ``floor((time - min_time) / window_length) + 1``.
    Vertices active in fewer than ``min_active_snapshots`` snapshots, or with
    degree below ``min_degree`` in the collapsed network, are removed and the
    remaining ids re-densified.
    """
    if not records:
        raise ValueError("no edge records to ingest")
    t0 = min(r[2] for r in records)
    t = int(math.floor((max(r[2] for r in records) - t0) / spec.window_length)) + 1
    raw = {x for a, b, _ in records for x in (a, b)}
    keys = {k: i for i, k in enumerate(sorted(raw, key=_key_order))}
    binned: dict[int, set[Edge]] = {}
    for a, b, time in records:
        if a == b:
            continue
        i = int(math.floor((time - t0) / spec.window_length)) + 1
        binned.setdefault(i, set()).add(canonical(keys[a], keys[b]))
    n = len(keys)
    edge_sets = [binned.get(i, set()) for i in range(1, t + 1)]

    keep = np.ones(n, dtype=bool)
    if spec.min_active_snapshots > 0:
        active = np.zeros(n, dtype=np.int64)
        for es in edge_sets:
            touched = {x for e in es for x in e}
            active[list(touched)] += 1
        keep &= active >= spec.min_active_snapshots
    if spec.min_degree > 0:
        collapsed = set().union(*edge_sets)
        deg = np.zeros(n, dtype=np.int64)
        for u, v in collapsed:
            deg[u] += 1
            deg[v] += 1
        keep &= deg >= spec.min_degree
    if not keep.any():
        raise ValueError(
            f"all {n} vertices were filtered out (min_active_snapshots="
            f"{spec.min_active_snapshots}, min_degree={spec.min_degree})")
    if not keep.all():
        remap = -np.ones(n, dtype=np.int64)
        remap[keep] = np.arange(int(keep.sum()))
        edge_sets = [{(int(remap[u]), int(remap[v])) for u, v in es if keep[u] and keep[v]}
                     for es in edge_sets]
        n = int(keep.sum())
    return from_edge_sets(n, edge_sets)


def adjacency_vector(net: DynamicNetwork, i: int, u: int) -> np.ndarray:
    g = net.snapshot(i)
    if not 0 <= u < net.n:
        raise IndexError(f"vertex {u} outside [0, {net.n})")
    return g.adjacency.getrow(u).toarray().ravel()


def collapse(net: DynamicNetwork, start: int, stop: int) -> Snapshot:
    """Union of the edge sets of snapshots ``start..stop`` (inclusive)."""
    lo, hi = net.check_window((start, stop))
    edges = frozenset().union(*(net.snapshot(i).edges for i in range(lo, hi + 1)))
    return Snapshot(lo, net.n, edges)


# --- file formats ---------------------------------------------------------

def _parse_key(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def read_edge_list(path: str | Path) -> list[tuple]:
    """Parse ``u<TAB>v<TAB>time`` lines; ``#`` starts a comment.

    Vertex keys that look like integers are returned as ``int``.
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'u<TAB>v<TAB>time'")
            u, v = (_parse_key(x) for x in parts[:2])
            records.append((u, v, float(parts[2])))
    return records


def to_edge_records(net: DynamicNetwork) -> list[tuple[int, int, int]]:
    """Canonical ``(u, v, time)`` records with time equal to the snapshot ordinal."""
    return [(u, v, i) for i, u, v in net.edge_records()]


def write_edge_list(records: Iterable[tuple], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, time in records:
            fh.write(f"{u}\t{v}\t{time}\n")


def format_snapshots(net: DynamicNetwork) -> str:
    lines = [f"{net.n} {net.t}"]
    lines.extend(f"{i} {u} {v}" for i, u, v in net.edge_records())
    return "\n".join(lines) + "\n"


def parse_snapshots(text: str) -> DynamicNetwork:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty snapshot file")
    n, t = (int(x) for x in lines[0].split())
    edge_sets: list[set[Edge]] = [set() for _ in range(t)]
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        i, u, v = (int(x) for x in line.split())
        if not 1 <= i <= t:
            raise ValueError(f"line {lineno}: snapshot ordinal {i} outside [1, {t}]")
        if not (0 <= u < v < n):
            raise ValueError(f"line {lineno}: edge ({u}, {v}) not canonical for n={n}")
        edge_sets[i - 1].add((u, v))
    return from_edge_sets(n, edge_sets)


def write_snapshots(net: DynamicNetwork, path: str | Path) -> None:
    Path(path).write_text(format_snapshots(net), encoding="utf-8")


def read_snapshots(path: str | Path) -> DynamicNetwork:
    return parse_snapshots(Path(path).read_text(encoding="utf-8"))
