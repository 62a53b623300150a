"""Depth estimation H(n): how deep a randomized tree over n points gets.

Three routes to the same quantity:

* ``fit_depth_model`` measures it, by growing unlimited trees on nested
  power-of-two subsamples and regressing average depth on log2(size);
* ``if_coefficients`` gives the isolation-forest average path length as a
  special case of the linear form;
* ``fixed_cut_expected_depth`` solves the exact recurrence for trees whose
  cuts send each point left with a fixed probability, and
  ``simulate_fixed_cut_depth`` estimates the same thing by simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._random import generator, spawn
from .tree import build_tree

EULER_GAMMA = float(np.euler_gamma)
AGGREGATORS = ("mean", "mode")


@dataclass(frozen=True)
class DepthModel:
    """H(n) = w0 + w1 * log2(n), clamped at zero.

    ``kind="iforest"`` switches to the isolation-forest coefficients, where
    w0 depends on n itself.
    """

    w0: float
    w1: float
    fit_points: tuple = field(default=(), compare=False)
    kind: str = "fitted"

    def __call__(self, n):
        return estimate_depth(self, n)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "w0": self.w0,
            "w1": self.w1,
            "fit_points": [list(p) for p in self.fit_points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> DepthModel:
        return cls(
            w0=float(d["w0"]),
            w1=float(d["w1"]),
            fit_points=tuple(tuple(p) for p in d.get("fit_points", ())),
            kind=d.get("kind", "fitted"),
        )

    @classmethod
    def iforest(cls) -> DepthModel:
        return cls(w0=float("nan"), w1=2.0 * math.log(2.0), kind="iforest")


def if_coefficients(n: int) -> tuple[float, float]:
    """(w0, w1) that turn the linear form into the isolation-forest path length."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return 2.0 * EULER_GAMMA - 2.0 * (n - 1) / n, 2.0 * math.log(2.0)


def estimate_depth(model: DepthModel, n):
    """Evaluate H at ``n`` (scalar or array, n >= 1)."""
    n_arr = np.asarray(n, dtype=np.float64)
    if np.any(n_arr < 1):
        raise ValueError("n must be >= 1")
    log_n = np.log2(n_arr)
    if model.kind == "iforest":
        # w0 from if_coefficients, evaluated at each n
        out = 2.0 * EULER_GAMMA - 2.0 * (n_arr - 1.0) / n_arr + model.w1 * log_n
    else:
        out = np.maximum(model.w0 + model.w1 * log_n, 0.0)
    return float(out) if out.ndim == 0 else out


def linear_fit(x, y) -> tuple[float, float]:
    """Ordinary least squares y = w0 + w1 x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or np.ptp(x) == 0:
        raise ValueError("need at least two distinct x values")
    xm, ym = x.mean(), y.mean()
    w1 = float(np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2))
    return float(ym - w1 * xm), w1


def _aggregate(depths: list[np.ndarray], aggregator: str) -> float:
    if aggregator == "mean":
        return float(np.mean([d.mean() for d in depths]))
    pooled = np.bincount(np.concatenate(depths))
    return float(np.argmax(pooled))


def fit_depth_model(
    X,
    i_min: int = 8,
    trees_per_size: int = 5,
    aggregator: str = "mean",
    seed=None,
) -> DepthModel:
    """Measure H(n) on ``X``.

    For every i from ``i_min`` to floor(log2 n), a uniform subsample of 2^i
    rows (without replacement) is partitioned by ``trees_per_size`` unlimited
    trees. The per-point leaf depth of each tree is aggregated ("mean": mean
    depth averaged over trees; "mode": most frequent depth of the pooled
    histogram) and regressed on i.
    """
    X = np.asarray(X, dtype=np.float64)
    if aggregator not in AGGREGATORS:
        raise ValueError(f"aggregator must be one of {AGGREGATORS}, got {aggregator!r}")
    if i_min < 2:
        raise ValueError(f"i_min must be >= 2, got {i_min}")
    if trees_per_size < 1:
        raise ValueError(f"trees_per_size must be >= 1, got {trees_per_size}")
    n = X.shape[0]
    i_max = int(math.floor(math.log2(n))) if n > 0 else -1
    if i_max < i_min + 1:
        raise ValueError(
            f"{n} rows are too few to fit H(n) from i_min={i_min}: need at least 2^{i_min + 1} = {2 ** (i_min + 1)}"
        )

    sizes = list(range(i_min, i_max + 1))
    points = []
    for i, ss in zip(sizes, spawn(seed, len(sizes))):
        sample_ss, *tree_ss = spawn(ss, trees_per_size + 1)
        idx = generator(sample_ss).choice(n, size=2**i, replace=False)
        Xs = X[idx]
        depths = []
        for tss in tree_ss:
            tree, leaf = build_tree(Xs, None, generator(tss), return_leaves=True)
            depths.append(tree.depth[leaf])
        points.append((float(i), _aggregate(depths, aggregator)))
    w0, w1 = linear_fit([p[0] for p in points], [p[1] for p in points])
    return DepthModel(w0, w1, tuple(points))


def depth_model_from_points(points) -> DepthModel:
    """Regress already measured (log2 size, depth) pairs."""
    points = tuple((float(i), float(d)) for i, d in points)
    w0, w1 = linear_fit([p[0] for p in points], [p[1] for p in points])
    return DepthModel(w0, w1, points)


def _log_binom_weights(n: int, b: float) -> np.ndarray:
    k = np.arange(n + 1)
    log_c = (
        math.lgamma(n + 1)
        - np.array([math.lgamma(j + 1) for j in range(n + 1)])
        - np.array([math.lgamma(n - j + 1) for j in range(n + 1)])
    )
    return np.exp(log_c + k * math.log(b) + (n - k) * math.log1p(-b))


def fixed_cut_expected_depth(n: int, b: float, table: bool = False):
    """Expected depth H(n, b) of a fixed-cut tree on ``n`` points.

    Each cut sends every point left independently with probability ``b``.
    With H(0) = 0 and H(1) = 1,

        H(n) = sum_k C(n,k) b^k (1-b)^(n-k) [k/n H(k) + (n-k)/n H(n-k) + 1],

    and the k = 0 and k = n terms (which contain H(n) itself) are moved to
    the left-hand side. Solved bottom-up; binomial weights are computed in
    log space above n = 50.

    Returns H(n, b), or the whole table H(0..n, b) when ``table`` is set.
    """
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    H = np.zeros(max(n, 1) + 1)
    H[1] = 1.0
    for j in range(2, n + 1):
        if j > 50:
            w = _log_binom_weights(j, b)
        else:
            w = np.array([math.comb(j, k) * b**k * (1 - b) ** (j - k) for k in range(j + 1)])
        k = np.arange(1, j)
        inner = (k / j) * H[k] + ((j - k) / j) * H[j - k]
        H[j] = (1.0 + np.dot(w[1:j], inner)) / (1.0 - w[0] - w[j])
    if table:
        return H[: n + 1].copy()
    return float(H[n])


def simulate_fixed_cut_depth(n: int, b: float, trials: int, seed=None) -> float:
    """Monte-Carlo estimate of the mean per-point depth of fixed-cut trees.

    Groups of two or more points are split by sending each point left with
    probability ``b``; a group of one finishes with depth (level + 1), an
    empty group contributes nothing. All trials advance together.
    """
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if n <= 1:
        return float(n)
    rng = generator(seed)
    sizes = np.full(trials, n, dtype=np.int64)
    total = 0.0
    level = 0
    while sizes.size:
        done = sizes == 1
        total += float(done.sum()) * (level + 1)
        sizes = sizes[sizes >= 2]
        if not sizes.size:
            break
        left = rng.binomial(sizes, b)
        sizes = np.concatenate((left, sizes - left))
        sizes = sizes[sizes > 0]
        level += 1
    return total / (trials * n)
