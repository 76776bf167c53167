"""Communication graphs with precomputed hop distances."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from gcsim.params import InvalidArgument


@dataclass(frozen=True, eq=False)
class Topology:
    """Undirected graph on nodes ``0..n-1``.

    ``edges`` is kept normalized (``u < v``, sorted, no duplicates) so two
    topologies compare equal iff they describe the same graph.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    kind: str = "edges"
    shape: tuple[int, ...] = field(default=())

    @classmethod
    def from_edges(cls, n: int, edges, kind: str = "edges", shape: tuple[int, ...] = ()) -> Topology:
        if n < 1:
            raise InvalidArgument(f"topology needs at least one node (n={n})")
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidArgument(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if u == v:
                raise InvalidArgument(f"self-loop at node {u}")
            norm.add((min(u, v), max(u, v)))
        return cls(n=n, edges=tuple(sorted(norm)), kind=kind, shape=tuple(shape))

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def dist(self) -> np.ndarray:
        """All-pairs hop distances; unreachable pairs are ``-1``."""
        if not self.edges:
            d = np.full((self.n, self.n), -1, dtype=np.int64)
            np.fill_diagonal(d, 0)
            return d
        rows = [u for u, v in self.edges] + [v for u, v in self.edges]
        cols = [v for u, v in self.edges] + [u for u, v in self.edges]
        g = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))
        d = shortest_path(g, method="D", unweighted=True, directed=False)
        out = np.where(np.isinf(d), -1, d).astype(np.int64)
        out.setflags(write=False)
        return out

    @cached_property
    def diameter(self) -> int:
        return int(self.dist.max())

    @property
    def connected(self) -> bool:
        return bool((self.dist >= 0).all())

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor lists as CSR arrays ``(ptr, idx)``; entry ``ptr[v]+j`` is channel ``w -> v``."""
        ptr = np.zeros(self.n + 1, dtype=np.int64)
        idx: list[int] = []
        for v, nb in enumerate(self.adjacency):
            idx.extend(nb)
            ptr[v + 1] = len(idx)
        return ptr, np.asarray(idx, dtype=np.int64)

    def problems(self) -> list[str]:
        out = []
        if self.n < 1:
            out.append("topology must have at least one node")
        elif not self.connected:
            out.append("topology must be connected")
        return out

    def to_dict(self) -> dict:
        if self.kind == "line":
            return {"kind": "line", "n": self.n}
        if self.kind == "grid":
            return {"kind": "grid", "w": self.shape[0]}
        return {"kind": "edges", "n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> Topology:
        kind = data.get("kind")
        if kind == "line":
            return build_line(int(data["n"]))
        if kind == "grid":
            return build_grid(int(data["w"]))
        if kind == "edges":
            return cls.from_edges(int(data["n"]), data.get("edges", []))
        raise InvalidArgument(f"unknown topology kind {kind!r}")


def build_line(n: int) -> Topology:
    """Path graph ``0 - 1 - ... - n-1``."""
    if n < 1:
        raise InvalidArgument(f"line needs n >= 1 (n={n})")
    return Topology.from_edges(n, [(i, i + 1) for i in range(n - 1)], kind="line", shape=(n,))


def build_grid(w: int) -> Topology:
    """``w x w`` 4-neighbor grid; node ``r*w + c`` sits at row ``r``, column ``c``."""
    if w < 1:
        raise InvalidArgument(f"grid needs w >= 1 (w={w})")
    edges = []
    for r in range(w):
        for c in range(w):
            v = r * w + c
            if c + 1 < w:
                edges.append((v, v + 1))
            if r + 1 < w:
                edges.append((v, v + w))
    return Topology.from_edges(w * w, edges, kind="grid", shape=(w, w))
