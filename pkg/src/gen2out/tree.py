"""Depth-limited randomized partition trees ("atomic trees").

Trees are grown breadth-first, one level at a time, with every split of a
level computed in a single vectorized pass. Nodes live in flat arrays indexed
by node id, which keeps million-point ensembles compact and makes traversal a
sequence of gathers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

LEAF = -1


@dataclass(frozen=True, eq=False)
class AtomicTree:
    """A binary partition tree stored as parallel node arrays.

    Internal nodes have ``feature >= 0`` and route a query left when
    ``x[feature] < threshold``. Leaves have ``feature == -1``; their
    ``size`` is the number of training points that terminated there.

    Attributes:
        feature: Split attribute per node, ``-1`` for leaves.
        threshold: Split value per node (``nan`` for leaves).
        left: Left child id per node, ``-1`` for leaves.
        right: Right child id per node, ``-1`` for leaves.
        size: Number of training points that reached each node.
        depth: Edge count from the root to each node.
        n_features: Training dimensionality.
        depth_limit: Maximum depth, or ``None`` for fully grown trees.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size: np.ndarray
    depth: np.ndarray
    n_features: int
    depth_limit: int | None = None

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature == LEAF

    @property
    def n_samples(self) -> int:
        return int(self.size[0])

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    def leaf_sizes(self) -> np.ndarray:
        return self.size[self.is_leaf]

    def _routing(self):
        # Leaves loop back to themselves so every query can take exactly
        # max_depth steps without masking.
        cached = self.__dict__.get("_routing_cache")
        if cached is None:
            leaf = self.is_leaf
            ids = np.arange(self.node_count)
            cached = (
                np.where(leaf, 0, self.feature),
                np.where(leaf, 0.0, self.threshold),
                np.where(leaf, ids, self.left),
                np.where(leaf, ids, self.right),
            )
            object.__setattr__(self, "_routing_cache", cached)
        return cached

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Return the id of the leaf each row of ``X`` lands in."""
        X = _check_query(X, self.n_features)
        feat, thr, left, right = self._routing()
        rows = np.arange(X.shape[0])
        node = np.zeros(X.shape[0], dtype=np.int64)
        for _ in range(self.max_depth):
            go_left = X[rows, feat[node]] < thr[node]
            node = np.where(go_left, left[node], right[node])
        return node

    def path_length(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Root-to-leaf edge counts and terminal leaf sizes for each row of ``X``.

        Ties (``x == threshold``) go right, as during construction.
        """
        leaves = self.apply(X)
        return self.depth[leaves].astype(np.int64), self.size[leaves].astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "depth_limit": self.depth_limit,
            "feature": self.feature.tolist(),
            "threshold": [None if np.isnan(t) else float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "size": self.size.tolist(),
            "depth": self.depth.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> AtomicTree:
        thr = np.array([np.nan if t is None else t for t in d["threshold"]], dtype=np.float64)
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=thr,
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            size=np.asarray(d["size"], dtype=np.int64),
            depth=np.asarray(d["depth"], dtype=np.int64),
            n_features=int(d["n_features"]),
            depth_limit=d["depth_limit"],
        )


def path_length(tree: AtomicTree, q: np.ndarray) -> tuple[int, int]:
    """Edge count and leaf size for a single query vector."""
    h0, size = tree.path_length(np.asarray(q, dtype=np.float64).reshape(1, -1))
    return int(h0[0]), int(size[0])


def _check_query(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(
            f"X has {X.shape[-1] if X.ndim else 0} features, tree was built on {n_features}"
        )
    return X


def build_tree(
    X: np.ndarray,
    depth_limit: int | None,
    rng: np.random.Generator,
    return_leaves: bool = False,
):
    """Grow one atomic tree on ``X``.

    A node becomes a leaf when it holds at most one point, when it sits at
    ``depth_limit``, or when all of its points are identical. Otherwise an
    attribute is drawn uniformly at random, redrawn uniformly among the
    non-constant ones if it is constant at this node, and the split value is
    drawn uniformly on the open interval (min, max) of that attribute. Points
    strictly below the split value go left.

    Args:
        X: Training matrix of shape (n, m), m >= 1.
        depth_limit: Maximum depth; ``None`` grows until leaves are atomic.
        rng: Generator that supplies every random draw for this tree.
        return_leaves: Also return the leaf id of every training row.

    Returns:
        The tree, or ``(tree, leaf_of_row)`` when ``return_leaves`` is set.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError(f"Expected a 2-D matrix with at least one column, got shape {X.shape}")
    if depth_limit is not None and depth_limit < 0:
        raise ValueError(f"depth_limit must be >= 0 or None, got {depth_limit}")
    n = X.shape[0]
    # Every split leaves both children nonempty, so there are at most n - 1
    # internal nodes; a depth limit d caps them at 2^d - 1 as well.
    max_internal = max(n - 1, 0)
    limit = -1
    if depth_limit is not None:
        limit = int(depth_limit)
        if limit < 62:
            max_internal = min(max_internal, 2**limit - 1)
    attr_u = rng.random(max_internal)
    split_u = rng.random(max_internal)

    feat, thr, left, right, size, depth, n_nodes, leaf_of_row = _grow(X, limit, attr_u, split_u)
    tree = AtomicTree(
        feature=feat[:n_nodes].copy(),
        threshold=thr[:n_nodes].copy(),
        left=left[:n_nodes].copy(),
        right=right[:n_nodes].copy(),
        size=size[:n_nodes].copy(),
        depth=depth[:n_nodes].copy(),
        n_features=X.shape[1],
        depth_limit=depth_limit,
    )
    if return_leaves:
        return tree, leaf_of_row
    return tree


@numba.njit(cache=True, nogil=True)
def _grow(X, limit, attr_u, split_u):
    n, m = X.shape
    cap = 2 * attr_u.shape[0] + 1
    feat = np.full(cap, LEAF, dtype=np.int64)
    thr = np.full(cap, np.nan)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    size = np.zeros(cap, dtype=np.int64)
    depth = np.zeros(cap, dtype=np.int64)
    start = np.zeros(cap, dtype=np.int64)
    order = np.arange(n)
    leaf_of_row = np.empty(n, dtype=np.int64)
    lo_all = np.empty(m)
    hi_all = np.empty(m)

    size[0] = n
    n_nodes = 1
    n_internal = 0
    node = 0
    # Nodes are created in breadth-first order, so walking ids in order is
    # a queue traversal.
    while node < n_nodes:
        s = start[node]
        cnt = size[node]
        e = s + cnt
        is_leaf = cnt <= 1 or (limit >= 0 and depth[node] >= limit)
        a = -1
        lo = 0.0
        hi = 0.0
        if not is_leaf:
            r = attr_u[n_internal] * m
            a = int(r)
            if a >= m:
                a = m - 1
            lo = X[order[s], a]
            hi = lo
            for i in range(s + 1, e):
                v = X[order[i], a]
                if v < lo:
                    lo = v
                elif v > hi:
                    hi = v
            if not hi > lo:
                # r - a is uniform on [0, 1) given a, so it can pick among
                # the attributes that still vary at this node.
                r2 = r - a
                for j in range(m):
                    lo_all[j] = X[order[s], j]
                    hi_all[j] = lo_all[j]
                for i in range(s + 1, e):
                    row = order[i]
                    for j in range(m):
                        v = X[row, j]
                        if v < lo_all[j]:
                            lo_all[j] = v
                        elif v > hi_all[j]:
                            hi_all[j] = v
                n_valid = 0
                for j in range(m):
                    if hi_all[j] > lo_all[j]:
                        n_valid += 1
                if n_valid == 0:
                    is_leaf = True
                else:
                    pick = int(r2 * n_valid)
                    if pick >= n_valid:
                        pick = n_valid - 1
                    for j in range(m):
                        if hi_all[j] > lo_all[j]:
                            if pick == 0:
                                a = j
                                break
                            pick -= 1
                    lo = lo_all[a]
                    hi = hi_all[a]
        if is_leaf:
            for i in range(s, e):
                leaf_of_row[order[i]] = node
            node += 1
            continue

        t = lo + split_u[n_internal] * (hi - lo)
        if t <= lo:
            t = hi
        n_internal += 1

        i = s
        j = e - 1
        while i <= j:
            if X[order[i], a] < t:
                i += 1
            else:
                tmp = order[i]
                order[i] = order[j]
                order[j] = tmp
                j -= 1
        n_left = i - s

        feat[node] = a
        thr[node] = t
        lc = n_nodes
        rc = n_nodes + 1
        left[node] = lc
        right[node] = rc
        start[lc] = s
        size[lc] = n_left
        depth[lc] = depth[node] + 1
        start[rc] = s + n_left
        size[rc] = cnt - n_left
        depth[rc] = depth[node] + 1
        n_nodes += 2
        node += 1
    return feat, thr, left, right, size, depth, n_nodes, leaf_of_row


def stack_trees(trees) -> tuple:
    """Concatenate node arrays of several trees; child ids are made global."""
    offsets = np.cumsum([0] + [t.node_count for t in trees])
    feat = np.concatenate([t.feature for t in trees])
    thr = np.concatenate([np.nan_to_num(t.threshold) for t in trees])
    left = np.concatenate([np.where(t.left >= 0, t.left + o, LEAF) for t, o in zip(trees, offsets)])
    right = np.concatenate([np.where(t.right >= 0, t.right + o, LEAF) for t, o in zip(trees, offsets)])
    depth = np.concatenate([t.depth for t in trees])
    size = np.concatenate([t.size for t in trees])
    return feat, thr, left, right, depth, size, offsets[:-1].astype(np.int64)


@numba.njit(cache=True, nogil=True)
def summed_path_lengths(X, feat, thr, left, right, depth, size, roots, leaf_depth):
    """Sum over trees of (edges to leaf + leaf_depth[leaf size]) for each row of ``X``."""
    n = X.shape[0]
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for r in range(roots.shape[0]):
            node = roots[r]
            while feat[node] != LEAF:
                if X[i, feat[node]] < thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            acc += depth[node] + leaf_depth[size[node]]
        out[i] = acc
    return out
