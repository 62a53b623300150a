"""Point-anomaly detector: a depth-limited atomic-tree ensemble scored against H(n)."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._random import generator, spawn
from .depth import DepthModel, estimate_depth, fit_depth_model
from .tree import AtomicTree, build_tree, stack_trees, summed_path_lengths

MODEL_FORMAT = "gen2out0-model"
MODEL_VERSION = 1


def effective_i_min(n: int, i_min: int) -> int:
    """Largest usable starting exponent for the depth fit on ``n`` rows.

    Keeps the requested ``i_min`` when the data allows at least three sample
    sizes, otherwise lowers it (never below 2).
    """
    if n < 8:
        raise ValueError(f"need at least 8 rows to fit a detector, got {n}")
    top = int(math.floor(math.log2(n)))
    return min(i_min, max(2, top - 2))


def mean_plus_3std(scores) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    return float(scores.mean() + 3.0 * scores.std())


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    workers = None if n_jobs in (-1, 0) else int(n_jobs)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


class Gen2Out0(BaseEstimator, OutlierMixin):
    """Depth-limited randomized tree ensemble for point anomalies.

    Every tree is grown on the full training matrix (no per-tree subsampling)
    up to ``depth_limit``. A query's path length in one tree is the number of
    edges to its leaf, plus H(leaf size) when the leaf holds more than one
    training point. The anomaly score is ``2 ** (-mean_path / H(n_train))``,
    in (0, 1], larger meaning more anomalous.

    Parameters
    ----------
    n_estimators : int
        Number of trees.
    depth_limit : int
        Maximum tree depth.
    i_min : int
        Smallest log2 sample size for fitting H(n). Lowered automatically when
        the training set is too small for three sizes.
    trees_per_size : int
        Unlimited trees grown per sample size when fitting H(n).
    aggregator : {"mean", "mode"}
        How per-point depths of a sample are summarised for the H(n) fit.
    depth_model : {"fit", "iforest"} or DepthModel
        ``"fit"`` measures H(n) on the training data, ``"iforest"`` uses the
        isolation-forest average path length; a DepthModel is used as given.
    random_state : int, SeedSequence or None
        Master seed. ``None`` reads ``GEN2OUT_SEED`` (default 0).
    n_jobs : int or None
        Worker threads. Results do not depend on this value.
    """

    def __init__(
        self,
        n_estimators=100,
        depth_limit=8,
        i_min=8,
        trees_per_size=5,
        aggregator="mean",
        depth_model="fit",
        random_state=None,
        n_jobs=None,
    ):
        self.n_estimators = n_estimators
        self.depth_limit = depth_limit
        self.i_min = i_min
        self.trees_per_size = trees_per_size
        self.aggregator = aggregator
        self.depth_model = depth_model
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.depth_limit is not None and self.depth_limit < 0:
            raise ValueError(f"depth_limit must be >= 0, got {self.depth_limit}")
        n = X.shape[0]
        depth_ss, tree_ss = spawn(self.random_state, 2)

        if isinstance(self.depth_model, DepthModel):
            model = self.depth_model
        elif self.depth_model == "iforest":
            model = DepthModel.iforest()
        elif self.depth_model == "fit":
            model = fit_depth_model(
                X,
                i_min=effective_i_min(n, self.i_min),
                trees_per_size=self.trees_per_size,
                aggregator=self.aggregator,
                seed=depth_ss,
            )
        else:
            raise ValueError(f"depth_model must be 'fit', 'iforest' or a DepthModel, got {self.depth_model!r}")

        norm = estimate_depth(model, n)
        if not norm > 0:
            raise ValueError(f"H(n_train) = {norm} is not positive; cannot normalise scores")

        seeds = spawn(tree_ss, self.n_estimators)
        self.estimators_ = _map(lambda ss: build_tree(X, self.depth_limit, generator(ss)), seeds, self.n_jobs)
        self.depth_model_ = model
        self.n_train_ = n
        self.n_features_in_ = X.shape[1]
        return self

    def expected_path_length(self, X) -> np.ndarray:
        """Ensemble-average path length E[h(x)] for each row of ``X``."""
        check_is_fitted(self, "estimators_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, detector was fit on {self.n_features_in_}")
        model = self.depth_model_
        max_leaf = max(int(t.size.max()) for t in self.estimators_) if self.estimators_ else 1
        leaf_depth = np.zeros(max_leaf + 1)
        if max_leaf >= 2:
            leaf_depth[2:] = estimate_depth(model, np.arange(2, max_leaf + 1))

        stacked = self.__dict__.get("_stacked")
        if stacked is None or stacked[0] is not self.estimators_:
            stacked = (self.estimators_, stack_trees(self.estimators_))
            self._stacked = stacked
        arrays = stacked[1]
        X = np.ascontiguousarray(X)

        def chunk_paths(rows):
            return summed_path_lengths(X[rows], *arrays, leaf_depth)

        chunks = np.array_split(np.arange(X.shape[0]), max(1, min(X.shape[0] // 4096, 64)))
        parts = _map(chunk_paths, chunks, self.n_jobs)
        total = np.concatenate(parts) if parts else np.zeros(0)
        return total / len(self.estimators_)

    def score_samples(self, X) -> np.ndarray:
        """Anomaly scores in (0, 1]; higher is more anomalous."""
        check_is_fitted(self, "estimators_")
        norm = estimate_depth(self.depth_model_, self.n_train_)
        return np.exp2(-self.expected_path_length(X) / norm)

    def decision_function(self, X) -> np.ndarray:
        return self.score_samples(X)

    def predict(self, X, threshold=None) -> np.ndarray:
        """1 for anomalies, 0 otherwise.

        Without an explicit ``threshold`` the cut is the mean plus three
        (population) standard deviations of the scores of ``X`` itself.
        """
        scores = self.score_samples(X)
        if threshold is None:
            threshold = mean_plus_3std(scores)
        return (scores >= threshold).astype(np.int64)

    def to_dict(self) -> dict:
        check_is_fitted(self, "estimators_")
        params = self.get_params()
        if isinstance(params["depth_model"], DepthModel):
            params["depth_model"] = params["depth_model"].to_dict()
        if isinstance(params["random_state"], np.random.SeedSequence):
            params["random_state"] = None
        # the thread count never changes a fitted model, so it is not saved
        params.pop("n_jobs", None)
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "params": params,
            "n_train": self.n_train_,
            "n_features": self.n_features_in_,
            "depth_model": self.depth_model_.to_dict(),
            "trees": [t.to_dict() for t in self.estimators_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Gen2Out0:
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a {MODEL_FORMAT} document")
        if d.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')}")
        params = dict(d["params"])
        if isinstance(params.get("depth_model"), dict):
            params["depth_model"] = DepthModel.from_dict(params["depth_model"])
        est = cls(**params)
        est.estimators_ = [AtomicTree.from_dict(t) for t in d["trees"]]
        est.depth_model_ = DepthModel.from_dict(d["depth_model"])
        est.n_train_ = int(d["n_train"])
        est.n_features_in_ = int(d["n_features"])
        return est


def fit(X, num_trees: int = 100, depth_limit: int = 8, seed=None, **kwargs) -> Gen2Out0:
    return Gen2Out0(n_estimators=num_trees, depth_limit=depth_limit, random_state=seed, **kwargs).fit(X)


def score(detector: Gen2Out0, X) -> np.ndarray:
    return detector.score_samples(X)


def save_model(detector: Gen2Out0, path, **extra) -> None:
    """Write a fitted detector as JSON; ``extra`` keys are stored alongside."""
    import json
    from pathlib import Path

    doc = dict(extra)
    doc.update(detector.to_dict())
    Path(path).write_text(json.dumps(doc, separators=(",", ":")), encoding="utf-8")


def load_model(path) -> Gen2Out0:
    import json
    from pathlib import Path

    return Gen2Out0.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
