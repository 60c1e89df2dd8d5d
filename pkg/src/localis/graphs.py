"""Random structures and rooted neighbourhoods.

Samplers for configuration-model multigraphs, Erdos-Renyi graphs, and
truncated regular / Poisson-Galton-Watson trees, plus BFS extraction of
rooted neighbourhoods and the non-tree-neighbourhood count used by the
tree-to-graph projection.

All samplers are pure functions of (seed, parameters): identical inputs
produce byte-identical structures under serialisation.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .rng import (
    CHILD_TAG,
    LABEL_TAG,
    OFFSPRING_TAG,
    PERC_TAG,
    fold,
    label_unit,
    percolation_cut,
    poisson_from_unit,
    uniform_labels,
)


# ---------------------------------------------------------------------------
# Host descriptors (what to sample)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularTreeHost:
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"regular tree host needs d >= 2, got {self.d}")


@dataclass(frozen=True)
class PGWTreeHost:
    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"PGW host needs lam > 0, got {self.lam}")


@dataclass(frozen=True)
class ConfigModelHost:
    n: int
    d: int

    def __post_init__(self):
        if self.n < 1 or self.d < 1 or (self.n * self.d) % 2:
            raise ValueError(
                f"configuration host needs n >= 1, d >= 1, n*d even; "
                f"got n={self.n}, d={self.d}"
            )


@dataclass(frozen=True)
class ErdosRenyiHost:
    n: int
    lam: float

    def __post_init__(self):
        if self.n < 1 or not 0.0 <= self.lam <= self.n:
            raise ValueError(
                f"Erdos-Renyi host needs n >= 1 and 0 <= lam <= n; "
                f"got n={self.n}, lam={self.lam}"
            )


# ---------------------------------------------------------------------------
# Multigraphs
# ---------------------------------------------------------------------------


@dataclass
class MultiGraph:
    """Undirected multigraph on vertices 0..n-1; loops and parallel edges allowed.

    `adj[v]` lists (neighbour, edge_id) incidences sorted for deterministic
    traversal; a loop at v contributes two entries at v, so len(adj[v]) is the
    half-edge endpoint count of v.
    """

    n: int
    edges: list
    model: str = "explicit"
    params: dict = field(default_factory=dict)
    d: int | None = None
    pairing: np.ndarray | None = None  # configuration model half-edge matching
    adj: list = field(init=False, repr=False)

    def __post_init__(self):
        adj = [[] for _ in range(self.n)]
        for eid, (u, v) in enumerate(self.edges):
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        for lst in adj:
            lst.sort()
        self.adj = adj

    def endpoint_degrees(self) -> np.ndarray:
        return np.array([len(lst) for lst in self.adj], dtype=np.int64)

    def neighbors(self, v: int) -> list:
        return [w for w, _ in self.adj[v]]

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "edges": [[int(u), int(v)] for u, v in self.edges],
            "model": self.model,
            "params": self.params,
        }
        return json.dumps(payload, sort_keys=True)


def multigraph_from_json(text: str) -> MultiGraph:
    data = json.loads(text)
    edges = [tuple(e) for e in data["edges"]]
    return MultiGraph(data["n"], edges, data["model"], data.get("params", {}))


def sample_config_model(n: int, d: int, seed) -> MultiGraph:
    """Uniformly random pairing of the n*d half-edges, glued into edges.

    Half-edge h belongs to vertex h // d.  Loops and parallel edges are kept.

    Args:
        n: vertex count (>= 1).
        d: half-edges per vertex (>= 1); n*d must be even.
        seed: int seed or numpy Generator.

    Returns:
        MultiGraph with `pairing` holding the sampled matching as a sorted
        (nd/2, 2) array of half-edge indices.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if (n * d) % 2 != 0:
        raise ValueError("n*d must be even for a perfect half-edge pairing")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n * d)
    pairs = np.sort(perm.reshape(-1, 2), axis=1)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    edges = sorted(
        (min(int(a) // d, int(b) // d), max(int(a) // d, int(b) // d))
        for a, b in pairs
    )
    return MultiGraph(n, edges, model="config", params={"d": d}, d=d, pairing=pairs)


def sample_er(n: int, lam: float, seed) -> MultiGraph:
    """Erdos-Renyi graph: each pair independently present with probability lam/n."""
    if n < 1:
        raise ValueError("need n >= 1")
    if not 0.0 <= lam <= n:
        raise ValueError(f"need 0 <= lam <= n, got lam={lam}, n={n}")
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < lam / n
    edges = [(int(u), int(v)) for u, v in zip(iu[mask], iv[mask])]
    return MultiGraph(n, edges, model="er", params={"lambda": lam})


def enumerate_config_graphs(n: int, d: int):
    """Yield every configuration-model outcome ((nd-1)!! pairings) as a MultiGraph.

    Exponential; intended for exact small-case oracles only.
    """
    if (n * d) % 2 != 0:
        raise ValueError("n*d must be even")
    m = n * d

    def rec(remaining, acc):
        if not remaining:
            yield list(acc)
            return
        a = remaining[0]
        for idx in range(1, len(remaining)):
            b = remaining[idx]
            rest = remaining[1:idx] + remaining[idx + 1 :]
            acc.append((a, b))
            yield from rec(rest, acc)
            acc.pop()

    for pairing in rec(list(range(m)), []):
        edges = sorted((min(a // d, b // d), max(a // d, b // d)) for a, b in pairing)
        yield MultiGraph(n, edges, model="config", params={"d": d}, d=d)


# ---------------------------------------------------------------------------
# Rooted neighbourhoods
# ---------------------------------------------------------------------------


@dataclass
class RootedNeighborhood:
    """Rooted labelled graph of radius <= r with BFS-canonical vertex ids.

    Vertex 0 is the root and ids follow BFS discovery order (adjacency sorted
    by original id), which makes serialisation stable and factor evaluation
    independent of the host graph's labelling of vertices.
    """

    n: int
    edges: list
    labels: np.ndarray
    radius: int
    depths: np.ndarray
    source_vertices: np.ndarray | None = None  # original ids, if extracted
    root: int = 0
    adj: list = field(init=False, repr=False)

    def __post_init__(self):
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj:
            lst.sort()
        self.adj = adj

    # -- rooted-view protocol ------------------------------------------------

    def neighbors(self, v: int) -> list:
        return self.adj[v]

    def label(self, v: int) -> int:
        return int(self.labels[v])

    def order_key(self, v: int) -> int:
        return v

    # -------------------------------------------------------------------------

    def with_labels(self, labels: np.ndarray) -> "RootedNeighborhood":
        return RootedNeighborhood(
            self.n, self.edges, np.asarray(labels, dtype=np.uint64), self.radius,
            self.depths, self.source_vertices,
        )

    def to_json(self) -> str:
        payload = {
            "root": 0,
            "n": self.n,
            "radius": self.radius,
            "edges": [[int(u), int(v)] for u, v in self.edges],
            "labels": [int(x) for x in self.labels],
            "depths": [int(x) for x in self.depths],
        }
        return json.dumps(payload, sort_keys=True)


def neighborhood(g: MultiGraph, v: int, r: int, labels: np.ndarray) -> RootedNeighborhood:
    """Induced subgraph on vertices within distance r of v, rooted at v.

    Carries the restriction of `labels` (uint64 array indexed by vertex id).
    """
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} not in graph")
    order = {v: 0}
    depths = [0]
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = depths[order[u]]
        if du == r:
            continue
        for w, _ in g.adj[u]:
            if w not in order:
                order[w] = len(order)
                depths.append(du + 1)
                queue.append(w)
    edges = []
    seen_eids = set()
    for u in order:
        for w, eid in g.adj[u]:
            if eid in seen_eids or w not in order:
                continue
            seen_eids.add(eid)
            a, b = order[u], order[w]
            edges.append((min(a, b), max(a, b)))
    edges.sort()
    src = np.fromiter(order.keys(), dtype=np.int64)
    lab = np.asarray(labels, dtype=np.uint64)[src]
    return RootedNeighborhood(
        len(order), edges, lab, r, np.asarray(depths, dtype=np.int64), src
    )


def ball_is_tree(g: MultiGraph, v: int, radius: int) -> bool:
    """Whether the induced subgraph on the radius-ball around v is acyclic.

    Loops, parallel edges and cycles inside the ball all count as non-tree.
    Early-exits on the first cycle evidence.
    """
    seen = {v: 0}
    used = set()
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = seen[u]
        for w, eid in g.adj[u]:
            if w == u:
                return False  # loop, always inside the ball
            if eid in used:
                continue
            if w in seen:
                return False  # second path or parallel edge inside the ball
            if du == radius:
                continue  # w is outside the ball (BFS order argument)
            seen[w] = du + 1
            used.add(eid)
            queue.append(w)
    return True


def non_tree_ball_mask(g: MultiGraph, radius: int) -> np.ndarray:
    """Boolean mask of vertices whose radius-ball is not a tree."""
    return np.array([not ball_is_tree(g, v, radius) for v in range(g.n)], dtype=bool)


def count_non_tree_vertices(g: MultiGraph, r: int) -> int:
    """Number of vertices whose (r+1)-neighbourhood contains a cycle, loop or
    parallel edge; the loss term of the tree-to-graph projection."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return int(non_tree_ball_mask(g, r + 1).sum())


# ---------------------------------------------------------------------------
# Truncated trees (materialised)
# ---------------------------------------------------------------------------


@dataclass
class TruncatedTree:
    """Breadth-first sampled rooted tree cut at a fixed radius.

    Depth-r vertices are boundary-flagged: their offspring were not generated
    and their recorded child count is 0.
    """

    nb: RootedNeighborhood
    parents: np.ndarray
    child_counts: np.ndarray
    boundary: np.ndarray
    kind: str
    params: dict

    # -- rooted-view protocol, delegated to the neighbourhood -----------------

    @property
    def root(self) -> int:
        return 0

    @property
    def radius(self) -> int:
        return self.nb.radius

    @property
    def depths(self) -> np.ndarray:
        return self.nb.depths

    @property
    def n(self) -> int:
        return self.nb.n

    @property
    def labels(self) -> np.ndarray:
        return self.nb.labels

    @property
    def edges(self) -> list:
        return self.nb.edges

    def neighbors(self, v: int) -> list:
        return self.nb.adj[v]

    def label(self, v: int) -> int:
        return int(self.nb.labels[v])

    def order_key(self, v: int) -> int:
        return v

    def degree(self, v: int) -> int:
        """Known degree inside the generated window (parent edge included)."""
        return int(self.child_counts[v]) + (0 if v == 0 else 1)


def _build_tree(counts_per_level, r: int, rng, kind: str, params: dict) -> TruncatedTree:
    parents = [-1]
    depths = [0]
    child_counts = []
    level = [0]
    for depth in range(r):
        counts = counts_per_level(level, depth)
        child_counts.extend(int(c) for c in counts)
        nxt = []
        for v, c in zip(level, counts):
            for _ in range(int(c)):
                w = len(parents)
                parents.append(v)
                depths.append(depth + 1)
                nxt.append(w)
        level = nxt
    child_counts.extend(0 for _ in level)  # boundary vertices, not generated
    n = len(parents)
    edges = [(parents[v], v) for v in range(1, n)]
    labels = uniform_labels(rng, n)
    depths = np.asarray(depths, dtype=np.int64)
    nb = RootedNeighborhood(n, edges, labels, r, depths)
    boundary = depths == r
    return TruncatedTree(
        nb,
        np.asarray(parents, dtype=np.int64),
        np.asarray(child_counts, dtype=np.int64),
        boundary,
        kind,
        params,
    )


def sample_regular_tree(d: int, r: int, seed) -> TruncatedTree:
    """Rooted d-regular tree to depth r: the root has d children, every other
    internal vertex d-1. Structure is deterministic; labels are random."""
    if d < 2:
        raise ValueError("need d >= 2")
    if r < 0:
        raise ValueError("need r >= 0")
    rng = np.random.default_rng(seed)

    def counts(level, depth):
        return [d if v == 0 else d - 1 for v in level]

    return _build_tree(counts, r, rng, "regular", {"d": d})


def sample_pgw_tree(lam: float, r: int, seed) -> TruncatedTree:
    """Galton-Watson tree with Poisson(lam) offspring, generated to depth r."""
    if lam <= 0:
        raise ValueError("need lam > 0")
    if r < 0:
        raise ValueError("need r >= 0")
    rng = np.random.default_rng(seed)

    def counts(level, depth):
        return rng.poisson(lam, size=len(level)) if level else []

    return _build_tree(counts, r, rng, "pgw", {"lambda": lam})


# ---------------------------------------------------------------------------
# Lazy trees (generated on demand)
# ---------------------------------------------------------------------------


class _LazyNode:
    __slots__ = ("state", "depth", "parent", "children")

    def __init__(self, state: int, depth: int, parent):
        self.state = state
        self.depth = depth
        self.parent = parent
        self.children = None


class LazyTree:
    """Rooted random tree whose structure and labels derive on demand from a
    64-bit state.

    Only the region a local rule actually reads is ever generated, which makes
    large-radius factors affordable: the sampled law restricted to the visited
    region matches the eager sampler's law exactly.

    Vertices at depth == radius receive no children (truncation boundary).
    """

    def __init__(self, host, radius: int, state: int):
        if isinstance(host, RegularTreeHost):
            self.kind = "regular"
            self.d = host.d
            self.lam = None
        elif isinstance(host, PGWTreeHost):
            self.kind = "pgw"
            self.d = None
            self.lam = host.lam
        else:
            raise TypeError(f"unsupported tree host: {host!r}")
        self.radius = radius
        self.root = _LazyNode(state, 0, None)

    def _offspring_count(self, node: _LazyNode) -> int:
        if self.kind == "regular":
            return self.d if node.depth == 0 else self.d - 1
        u = label_unit(fold(node.state, OFFSPRING_TAG))
        return poisson_from_unit(u, self.lam)

    def children(self, node: _LazyNode) -> list:
        if node.children is None:
            if node.depth >= self.radius:
                node.children = []
            else:
                node.children = [
                    _LazyNode(fold(node.state, CHILD_TAG + j), node.depth + 1, node)
                    for j in range(self._offspring_count(node))
                ]
        return node.children

    def neighbors(self, node: _LazyNode) -> list:
        kids = self.children(node)
        if node.parent is None:
            return kids
        return [node.parent] + kids


class TreeLabels:
    """Label view over a LazyTree with percolated relabelling.

    Copy 0 is the base labelling X0.  Copy i >= 1 redraws labels on the
    percolated set S (density p, a fixed function of the tree's node states)
    and keeps the base labels elsewhere.  All copies over one tree share S
    and X0, which realises the coupled family of label vectors.
    """

    __slots__ = ("tree", "copy", "cut")

    def __init__(self, tree: LazyTree, copy: int = 0, p: float = 0.0):
        self.tree = tree
        self.copy = copy
        self.cut = percolation_cut(p)

    @property
    def root(self):
        return self.tree.root

    @property
    def radius(self) -> int:
        return self.tree.radius

    def neighbors(self, node) -> list:
        return self.tree.neighbors(node)

    def in_resample_set(self, node) -> bool:
        return fold(node.state, PERC_TAG) < self.cut

    def label(self, node) -> int:
        base = fold(node.state, LABEL_TAG)
        if self.copy and self.in_resample_set(node):
            return fold(base, self.copy)
        return fold(base, 0)

    def order_key(self, node) -> int:
        return node.state
