"""Sequence-constrained complete-link agglomerative clustering.

Only chronologically adjacent clusters may merge, so every cluster is a
contiguous interval of the document sequence and the dendrogram doubles as a
segmentation device.  Dissimilarity between clusters is the complete-link
criterion (maximum pairwise Euclidean distance), which keeps clusters
compact and guarantees non-decreasing merge heights under the adjacency
constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DimensionMismatch, InvalidK


@dataclass(frozen=True)
class Merge:
    left: int  # cluster id (leaves 0..n-1, internal n+step)
    right: int
    height: float
    size: int  # members in the merged cluster


@dataclass
class Dendrogram:
    """Full agglomeration history over chronologically ordered leaves."""

    leaves: list[int]  # document ids in sequence order
    merges: list[Merge]
    intervals: dict = field(repr=False, default_factory=dict)  # id -> (start, end)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def heights(self) -> np.ndarray:
        return np.array([m.height for m in self.merges])


def _validate_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise DimensionMismatch("points must form an (n, dims) array")
    if not np.all(np.isfinite(pts)):
        raise DimensionMismatch("points contain non-finite coordinates")
    return pts


class _Agglomerator:
    """Shared engine: clusters are intervals over 0..n-1; at each step the
    lowest-dissimilarity adjacent unblocked pair is proposed (ties broken
    toward the earliest pair)."""

    def __init__(self, points: np.ndarray):
        self.n = len(points)
        self.dist = squareform(pdist(points)) if self.n > 1 else np.zeros((1, 1))
        # parallel arrays over active clusters, kept in sequence order
        self.starts = list(range(self.n))
        self.ends = list(range(self.n))
        self.ids = list(range(self.n))
        self.sizes = [1] * self.n
        self.adj = [
            float(self.dist[i, i + 1]) for i in range(self.n - 1)
        ]  # complete-link dissimilarity between consecutive clusters
        self.blocked: set[int] = set()  # boundary position = end of left cluster
        self.next_id = self.n
        self.merges: list[Merge] = []
        self.intervals = {i: (i, i) for i in range(self.n)}

    def _boundary(self, pos: int) -> int:
        """Sequence position of the boundary right of active cluster pos."""
        return self.ends[pos]

    def candidates(self):
        for pos in range(len(self.adj)):
            if self._boundary(pos) not in self.blocked:
                yield pos

    def best_pair(self) -> int | None:
        best = None
        best_d = np.inf
        for pos in self.candidates():
            if self.adj[pos] < best_d:
                best_d = self.adj[pos]
                best = pos
        return best

    def cluster_members(self, pos: int) -> range:
        return range(self.starts[pos], self.ends[pos] + 1)

    def _link(self, a_start, a_end, b_start, b_end) -> float:
        return float(self.dist[a_start : a_end + 1, b_start : b_end + 1].max())

    def merge_at(self, pos: int) -> Merge:
        new_id = self.next_id
        self.next_id += 1
        merge = Merge(
            left=self.ids[pos],
            right=self.ids[pos + 1],
            height=self.adj[pos],
            size=self.sizes[pos] + self.sizes[pos + 1],
        )
        self.merges.append(merge)
        self.ends[pos] = self.ends[pos + 1]
        self.sizes[pos] = merge.size
        self.ids[pos] = new_id
        self.intervals[new_id] = (self.starts[pos], self.ends[pos])
        del self.starts[pos + 1], self.ends[pos + 1], self.ids[pos + 1], self.sizes[pos + 1]
        del self.adj[pos]
        if pos - 1 >= 0:
            self.adj[pos - 1] = self._link(
                self.starts[pos - 1], self.ends[pos - 1], self.starts[pos], self.ends[pos]
            )
        if pos < len(self.adj):
            self.adj[pos] = self._link(
                self.starts[pos], self.ends[pos], self.starts[pos + 1], self.ends[pos + 1]
            )
        return merge

    def block_at(self, pos: int):
        self.blocked.add(self._boundary(pos))

    def active_intervals(self) -> list[tuple[int, int]]:
        return list(zip(self.starts, self.ends))


def cluster(points, ids: list[int] | None = None) -> Dendrogram:
    """Agglomerate points (in sequence order) to a single cluster.

    Parameters
    ----------
    points : (n, dims) array
        Factor coordinates per document, chronologically ordered.  Full
        dimensionality is intended; pass a column slice to explore planar
        sub-spaces.
    ids : optional document ids for the leaves (defaults to 0..n-1).

    Returns a :class:`Dendrogram` with exactly n-1 merges whose heights are
    non-decreasing and whose clusters are contiguous intervals.
    """
    pts = _validate_points(points)
    n = len(pts)
    if n < 2:
        raise DimensionMismatch("need at least 2 points to cluster")
    if ids is not None and len(ids) != n:
        raise DimensionMismatch("ids length does not match points")
    eng = _Agglomerator(pts)
    for _ in range(n - 1):
        pos = eng.best_pair()
        eng.merge_at(pos)
    return Dendrogram(
        leaves=list(ids) if ids is not None else list(range(n)),
        merges=eng.merges,
        intervals=eng.intervals,
    )


def cut(dendro: Dendrogram, k: int) -> list[list[int]]:
    """Partition the sequence into k contiguous segments.

    Undoes the k-1 highest merges (the last k-1, since heights are
    monotone) and returns the member ids of each surviving cluster in
    sequence order.
    """
    n = dendro.n_leaves
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} outside 1..{n}")
    active = {i: (i, i) for i in range(n)}
    for step, m in enumerate(dendro.merges[: n - k]):
        lo = min(active[m.left][0], active[m.right][0])
        hi = max(active[m.left][1], active[m.right][1])
        del active[m.left], active[m.right]
        active[n + step] = (lo, hi)
    segments = sorted(active.values())
    return [[dendro.leaves[i] for i in range(lo, hi + 1)] for lo, hi in segments]


def to_newick(dendro: Dendrogram, labels: list[str] | None = None) -> str:
    """Ultrametric Newick string; the path between two leaves equals their
    merge height.  Built iteratively so deep (chain-shaped) dendrograms do
    not hit the recursion limit."""
    n = dendro.n_leaves
    if labels is None:
        labels = [str(v) for v in dendro.leaves]
    reps: dict[int, str] = {i: labels[i] for i in range(n)}
    height: dict[int, float] = {i: 0.0 for i in range(n)}
    node = n
    for m in dendro.merges:
        bl_left = (m.height - height[m.left]) / 2.0
        bl_right = (m.height - height[m.right]) / 2.0
        reps[node] = f"({reps.pop(m.left)}:{bl_left:.10g},{reps.pop(m.right)}:{bl_right:.10g})"
        height[node] = m.height
        node += 1
    # run to completion leaves one representative; partial trees become a
    # multifurcating root
    parts = [reps[key] for key in sorted(reps)]
    if len(parts) == 1:
        return parts[0] + ";"
    return "(" + ",".join(parts) + ");"


def dendrogram_json_dict(dendro: Dendrogram) -> dict:
    return {
        "leaves": list(dendro.leaves),
        "merges": [
            {
                "step": t,
                "left": m.left,
                "right": m.right,
                "height": m.height,
                "size": m.size,
            }
            for t, m in enumerate(dendro.merges)
        ],
    }


def dendrogram_csv_rows(dendro: Dendrogram):
    yield ("step", "left", "right", "height")
    for t, m in enumerate(dendro.merges):
        yield (t, m.left, m.right, repr(m.height))
