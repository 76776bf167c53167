"""Clock-tree baseline: worst-case skew between grid-adjacent sinks.

A clock tree spans a ``W x W`` grid of sinks. Every tree edge has a nominal
delay proportional to its length (in grid pitches) and a realized delay
within ``±p`` of nominal. Two grid-adjacent sinks whose tree path has length
``a + b`` below their lowest common ancestor can be skewed by
``p * nominal * (a + b)`` when the variation is adversarial, so trees that
separate neighbors pay a local skew that grows with ``W``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from gcsim.bounds import skew_bounds
from gcsim.params import InvalidArgument, ParamSet

STRATEGIES = ("h-tree", "bfs", "low-stretch-recursive")


@dataclass(frozen=True, eq=False)
class ClockTree:
    """Rooted tree whose first ``W*W`` vertices are the sinks ``r*W + c``.

    Vertices beyond the sinks are Steiner points (only the H-tree has them).
    ``length[v]`` is the length of the edge from ``v`` to ``parent[v]`` in
    grid pitches.
    """

    w: int
    strategy: str
    parent: tuple[int, ...]
    length: tuple[float, ...]
    root: int

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    @property
    def n_edges(self) -> int:
        return self.n_vertices - 1

    def edges(self) -> list[tuple[int, int, float]]:
        return [(v, self.parent[v], self.length[v]) for v in range(self.n_vertices) if v != self.root]

    @cached_property
    def _depths(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_vertices
        hops = np.full(n, -1, dtype=np.int64)
        dist = np.zeros(n)
        hops[self.root] = 0
        for v in range(n):
            chain = []
            u = v
            while hops[u] < 0:
                chain.append(u)
                u = self.parent[u]
            for x in reversed(chain):
                hops[x] = hops[self.parent[x]] + 1
                dist[x] = dist[self.parent[x]] + self.length[x]
        return hops, dist

    def lca(self, u: int, v: int) -> int:
        hops, _ = self._depths
        while hops[u] > hops[v]:
            u = self.parent[u]
        while hops[v] > hops[u]:
            v = self.parent[v]
        while u != v:
            u, v = self.parent[u], self.parent[v]
        return u

    def branch_lengths(self, u: int, v: int) -> tuple[float, float]:
        """Path lengths ``(a, b)`` from the lowest common ancestor down to ``u`` and ``v``."""
        _, dist = self._depths
        x = self.lca(u, v)
        return float(dist[u] - dist[x]), float(dist[v] - dist[x])

    def tree_distance(self, u: int, v: int) -> float:
        a, b = self.branch_lengths(u, v)
        return a + b

    def adjacent_pairs(self) -> list[tuple[int, int]]:
        w = self.w
        pairs = []
        for r in range(w):
            for c in range(w):
                v = r * w + c
                if c + 1 < w:
                    pairs.append((v, v + 1))
                if r + 1 < w:
                    pairs.append((v, v + w))
        return pairs

    def max_adjacent_distance(self) -> tuple[float, tuple[int, int]]:
        """Largest tree distance between grid-adjacent sinks and the pair attaining it."""
        best, pair = 0.0, (0, 0)
        for u, v in self.adjacent_pairs():
            d = self.tree_distance(u, v)
            if d > best:
                best, pair = d, (u, v)
        return best, pair

    def spans_grid(self) -> bool:
        hops, _ = self._depths
        return bool(np.all(hops[: self.w * self.w] >= 0))


def _lst_edges(r0: int, r1: int, c0: int, c1: int, w: int, out: list[tuple[int, int]]) -> None:
    """Recursive quadrant tree on rows ``[r0, r1)`` and columns ``[c0, c1)``."""
    if r1 - r0 <= 1 and c1 - c0 <= 1:
        return
    mr, mc = (r0 + r1 + 1) // 2, (c0 + c1 + 1) // 2
    quads = {
        "tl": (r0, mr, c0, mc), "tr": (r0, mr, mc, c1),
        "bl": (mr, r1, c0, mc), "br": (mr, r1, mc, c1),
    }
    present = {k: q for k, q in quads.items() if q[1] > q[0] and q[3] > q[2]}
    for q in present.values():
        _lst_edges(*q, w, out)
    corner = {"tl": (mr - 1, mc - 1), "tr": (mr - 1, mc), "bl": (mr, mc - 1), "br": (mr, mc)}
    for a, b in (("tl", "tr"), ("tl", "bl"), ("tr", "br")):
        if a in present and b in present:
            (ra, ca), (rb, cb) = corner[a], corner[b]
            out.append((ra * w + ca, rb * w + cb))


def _root_edges(n: int, root: int, edges: list[tuple[int, int]]) -> tuple[list[int], list[float]]:
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    parent = [-1] * n
    parent[root] = root
    stack = [root]
    while stack:
        u = stack.pop()
        for v in nbrs[u]:
            if parent[v] < 0:
                parent[v] = u
                stack.append(v)
    return parent, [1.0] * n


def _bfs_parent(w: int, root: int) -> list[int]:
    n = w * w
    parent = [-1] * n
    parent[root] = root
    queue = [root]
    for u in queue:
        r, c = divmod(u, w)
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= rr < w and 0 <= cc < w:
                v = rr * w + cc
                if parent[v] < 0:
                    parent[v] = u
                    queue.append(v)
    return parent


def _htree(w: int) -> tuple[list[int], list[float], int]:
    parent = list(range(w * w))
    length = [0.0] * (w * w)

    def new_vertex(par: int, ln: float) -> int:
        parent.append(par)
        length.append(ln)
        return len(parent) - 1

    def build(r0: int, c0: int, size: int, par: int, ln: float) -> int:
        """Attach the H over the ``size``-square at ``(r0, c0)``; returns its center vertex."""
        if size == 1:
            v = r0 * w + c0
            parent[v] = par
            length[v] = ln
            return v
        center = new_vertex(par, ln)
        half, arm = size // 2, size / 4
        for dc in (0, half):
            bar = new_vertex(center, arm)
            for dr in (0, half):
                build(r0 + dr, c0 + dc, half, bar, arm)
        return center

    root = build(0, 0, w, -1, 0.0)
    parent[root] = root
    return parent, length, root


def build_tree(w: int, strategy: str = "low-stretch-recursive") -> ClockTree:
    """Spanning clock tree over a ``w x w`` sink grid."""
    if strategy not in STRATEGIES:
        raise InvalidArgument(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if not isinstance(w, (int, np.integer)) or w < 2:
        raise InvalidArgument(f"clock tree needs W >= 2 (W={w})")
    w = int(w)
    center = (w // 2) * w + w // 2
    if strategy == "h-tree":
        if w & (w - 1):
            raise InvalidArgument(f"h-tree needs W a power of two (W={w})")
        parent, length, root = _htree(w)
    elif strategy == "bfs":
        parent, root = _bfs_parent(w, center), center
        length = [1.0] * (w * w)
    else:
        edges: list[tuple[int, int]] = []
        _lst_edges(0, w, 0, w, w, edges)
        root = (w // 2 - 1) * w + (w // 2 - 1)
        parent, length = _root_edges(w * w, root, edges)
    length[root] = 0.0
    return ClockTree(w=w, strategy=strategy, parent=tuple(parent), length=tuple(length), root=root)


def _check_p(p: float) -> None:
    if not 0 <= p < 1:
        raise InvalidArgument(f"delay variation p must lie in [0, 1) (p={p})")


def worst_case_local_skew(tree: ClockTree, nominal_edge_delay: float, p: float) -> tuple[float, tuple[int, int]]:
    """Adversarial skew ``p * nominal * (a + b)`` maximized over grid-adjacent sinks."""
    _check_p(p)
    if nominal_edge_delay < 0:
        raise InvalidArgument(f"nominal edge delay must be non-negative ({nominal_edge_delay})")
    dist, pair = tree.max_adjacent_distance()
    return p * nominal_edge_delay * dist, pair


def sampled_local_skew(
    tree: ClockTree, nominal_edge_delay: float, p: float, seed: int = 0, samples: int = 1
) -> np.ndarray:
    """Local skew under per-edge delays drawn uniformly from ``[(1-p), (1+p)] * nominal``.

    Nominal path imbalance is assumed balanced out by the tree synthesis, so
    only the deviation of each arrival from its nominal value counts.
    """
    _check_p(p)
    rng = np.random.default_rng(seed)
    n = tree.n_vertices
    hops, _ = tree._depths
    order = np.argsort(hops, kind="stable")
    parent = np.asarray(tree.parent)
    base = nominal_edge_delay * np.asarray(tree.length)
    pairs = np.asarray(tree.adjacent_pairs())
    out = np.empty(samples)
    for i in range(samples):
        # per-edge deviation from nominal, accumulated root to leaf
        dev = base * rng.uniform(-p, p, n)
        arrival = np.zeros(n)
        for v in order:
            if v != tree.root:
                arrival[v] = arrival[parent[v]] + dev[v]
        out[i] = np.abs(arrival[pairs[:, 0]] - arrival[pairs[:, 1]]).max()
    return out


@dataclass(frozen=True)
class CurveRow:
    w: int
    diameter: int
    tree_distance: float
    tree_skew: float
    gcs_local_bound: float
    witness: tuple[int, int]

    @property
    def ratio(self) -> float:
        return self.gcs_local_bound / self.tree_skew if self.tree_skew else float("inf")


def compare_curves(
    w_list, params: ParamSet, nominal_edge_delay: float = 50.0, p: float = 0.05,
    strategy: str = "low-stretch-recursive",
) -> list[CurveRow]:
    """Tree worst-case local skew next to the synchronization local bound for each grid width."""
    rows = []
    for w in w_list:
        tree = build_tree(w, strategy)
        skew, pair = worst_case_local_skew(tree, nominal_edge_delay, p)
        diameter = 2 * w - 2
        rows.append(CurveRow(
            w=w, diameter=diameter, tree_distance=tree.tree_distance(*pair), tree_skew=skew,
            gcs_local_bound=skew_bounds(params, diameter)[1], witness=pair,
        ))
    return rows


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares ``(slope, intercept, r_squared)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


CSV_COLUMNS = ("W", "D", "tree_distance", "tree_skew_ps", "gcs_local_bound_ps", "ratio")


def curves_csv(rows: list[CurveRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.w, r.diameter, repr(r.tree_distance), repr(r.tree_skew), repr(r.gcs_local_bound), repr(r.ratio)])
    return buf.getvalue()
