"""Benchmark datasets in the ODDS layout and the point-detection comparison.

ODDS files are not bundled. ``load_odds`` reads ``<name>.mat`` (arrays ``X``
and ``y``) or ``<name>.csv`` (last column, or a column named ``label``, is
the 0/1 outlier flag) from a directory given explicitly or through
``GEN2OUT_ODDS_DIR``. ``analogue`` rebuilds a few of them from the copies of
the underlying UCI data that ship with scikit-learn, following the ODDS
recipe (one class kept as inliers, a small class downsampled as outliers).
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from ._random import generator, spawn
from .data import DataMatrix, load_csv
from .detector import Gen2Out0
from .metrics import RankingEval, evaluate_ranking

ODDS_DIR_ENV = "GEN2OUT_ODDS_DIR"
SMALL_ODDS = ("wine", "lympho", "glass", "vertebral", "wbc")
ANALOGUES = ("wine", "wbc", "optdigits")


def odds_dir(directory=None) -> Path | None:
    directory = directory if directory is not None else os.environ.get(ODDS_DIR_ENV)
    return Path(directory) if directory else None


def load_odds(name: str, directory=None) -> DataMatrix:
    root = odds_dir(directory)
    if root is None:
        raise FileNotFoundError(f"no ODDS directory given and {ODDS_DIR_ENV} is unset")
    mat = root / f"{name}.mat"
    if mat.is_file():
        from scipy.io import loadmat

        doc = loadmat(mat)
        return DataMatrix(np.asarray(doc["X"], dtype=np.float64), np.asarray(doc["y"]).ravel().astype(np.int64))
    csv = root / f"{name}.csv"
    if csv.is_file():
        with csv.open(encoding="utf-8") as fh:
            first = fh.readline().strip().split(",")
        label = "label" if "label" in first else -1
        return load_csv(csv, label_column=label)
    raise FileNotFoundError(f"neither {mat} nor {csv} exists")


def _downsample(X, y, inlier_mask, outlier_mask, n_out, seed):
    rng = generator(seed)
    out_idx = np.flatnonzero(outlier_mask)
    if n_out is not None and out_idx.size > n_out:
        out_idx = np.sort(rng.choice(out_idx, size=n_out, replace=False))
    idx = np.concatenate([np.flatnonzero(inlier_mask), out_idx])
    labels = np.r_[np.zeros(int(inlier_mask.sum()), dtype=np.int64), np.ones(out_idx.size, dtype=np.int64)]
    return DataMatrix(X[idx].astype(np.float64), labels)


def analogue(name: str, seed=0) -> DataMatrix:
    """ODDS-style dataset rebuilt from scikit-learn's bundled UCI copies.

    * ``wine``: classes 2 and 3 are inliers, class 1 downsampled to 10 outliers (129 rows).
    * ``wbc``: benign inliers, malignant downsampled to 21 outliers (378 rows).
    * ``optdigits``: digits 1-9 inliers, digit 0 downsampled to 150 outliers.
    """
    from sklearn import datasets

    if name == "wine":
        d = datasets.load_wine()
        return _downsample(d.data, d.target, d.target != 0, d.target == 0, 10, seed)
    if name == "wbc":
        d = datasets.load_breast_cancer()
        # sklearn codes malignant as 0
        return _downsample(d.data, d.target, d.target == 1, d.target == 0, 21, seed)
    if name == "optdigits":
        d = datasets.load_digits()
        return _downsample(d.data, d.target, d.target != 0, d.target == 0, 150, seed)
    raise ValueError(f"no analogue for {name!r}; available: {ANALOGUES}")


def compare_with_iforest(data: DataMatrix, seed=None, **detector_params) -> dict[str, RankingEval]:
    """Rank ``data`` with the fitted depth model and with isolation-forest coefficients.

    Both detectors share every other setting and the same tree seed, so the
    comparison isolates the depth model.
    """
    if data.labels is None:
        raise ValueError("dataset has no labels")
    X = data.values
    fitted = Gen2Out0(random_state=seed, **detector_params).fit(X)
    baseline = Gen2Out0(random_state=seed, depth_model="iforest", **detector_params).fit(X)
    return {
        "gen2out0": evaluate_ranking(fitted.score_samples(X), data.labels),
        "iforest": evaluate_ranking(baseline.score_samples(X), data.labels),
    }


def mean_comparison(data: DataMatrix, seeds: int = 5, seed=None, **detector_params) -> dict[str, RankingEval]:
    """``compare_with_iforest`` averaged over ``seeds`` substreams of ``seed``."""
    runs = [compare_with_iforest(data, ss, **detector_params) for ss in spawn(seed, seeds)]
    out = {}
    for key in ("gen2out0", "iforest"):
        out[key] = RankingEval(
            float(np.mean([r[key].ap for r in runs])),
            float(np.mean([r[key].roc_auc for r in runs])),
            runs[0][key].n_pos,
            runs[0][key].n_neg,
        )
    return out
