"""Generalized anomalies: point- and group-anomalies found and ranked together.

Group members hide each other from a tree ensemble. Subsampling the data at
decreasing qualification rates (qr = 1, 1/2, 1/4, ...) strips a group of its
cohorts, and its members then score like point anomalies. Each point's score
trajectory over qr is its X-ray line; the apex of that line says how
anomalous the point gets and at which rate. Points whose apex clears the
threshold are clustered per rate, and every cluster (or lone point) is scored
by how close its apexes come to the ideal (qr=1, score=1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.cluster import DBSCAN
from sklearn.neighbors import NearestNeighbors
from sklearn.utils.validation import check_array, check_is_fitted

from ._random import generator, spawn
from .depth import DepthModel, fit_depth_model
from .detector import Gen2Out0, _map, effective_i_min, mean_plus_3std

ISO_QR_SCALE = 10.0


@dataclass(frozen=True, eq=False)
class XRayPlot:
    """Scores of every point under detectors fit at each qualification rate.

    ``trajectories[i, l]`` is point i's score under the detector fit on the
    level-l subsample; levels run from qr = 1 downwards.
    """

    qrs: np.ndarray
    sample_sizes: np.ndarray
    trajectories: np.ndarray
    detectors: tuple = field(default=(), repr=False)

    @property
    def n_levels(self) -> int:
        return int(self.qrs.size)

    def to_rows(self):
        """(point_index, qr, score) triples, level-major within each point."""
        n, L = self.trajectories.shape
        for i in range(n):
            for l in range(L):
                yield i, float(self.qrs[l]), float(self.trajectories[i, l])


@dataclass(frozen=True)
class Apex:
    point_index: int
    max_score: float
    max_qr: float


@dataclass(frozen=True, eq=False)
class ApexTable:
    """Per-point apex of the X-ray lines, stored column-wise."""

    max_score: np.ndarray
    max_qr: np.ndarray
    level: np.ndarray

    def __len__(self) -> int:
        return int(self.max_score.size)

    def __getitem__(self, i) -> Apex:
        return Apex(int(i), float(self.max_score[i]), float(self.max_qr[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))


@dataclass(frozen=True)
class GroupAnomaly:
    members: tuple
    qr: float
    score: float


@dataclass(frozen=True)
class PointAnomaly:
    index: int
    qr: float
    score: float


@dataclass(frozen=True)
class GeneralizedAnomalyReport:
    """Detected group- and point-anomalies, each list sorted by descending score."""

    groups: tuple
    point_anomalies: tuple
    threshold: float

    def ranking(self):
        """Groups and point anomalies interleaved in one descending order."""
        items = [("group", g.score, g.qr, g) for g in self.groups]
        items += [("point", p.score, p.qr, p) for p in self.point_anomalies]
        items.sort(key=lambda t: (-t[1], -t[2], t[0] != "group"))
        return [(kind, obj) for kind, _, _, obj in items]

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "groups": [
                {"rank": r + 1, "score": g.score, "qr": g.qr, "size": len(g.members), "members": list(g.members)}
                for r, g in enumerate(self.groups)
            ],
            "point_anomalies": [
                {"rank": r + 1, "index": p.index, "score": p.score, "qr": p.qr}
                for r, p in enumerate(self.point_anomalies)
            ],
        }

    def to_json(self, **extra) -> str:
        doc = dict(extra)
        doc.update(self.to_dict())
        return json.dumps(doc, indent=2, sort_keys=False)


def qualification_ladder(n: int, min_sample_size: int = 256, max_exponent: int = 10) -> list[float]:
    """qr = 1, 1/2, 1/4, ... while the sample keeps ``min_sample_size`` rows and qr >= 2^-max_exponent."""
    qrs = []
    for k in range(max_exponent + 1):
        qr = 2.0**-k
        if round(n * qr) < min_sample_size:
            break
        qrs.append(qr)
    return qrs


def build_xray(
    X,
    seed=None,
    min_sample_size: int = 256,
    max_exponent: int = 10,
    share_depth_model: bool = True,
    n_jobs=None,
    **detector_params,
) -> XRayPlot:
    """Fit a point detector per qualification rate and score all of ``X`` with each.

    Each level draws its own subsample without replacement; ``detector_params``
    go to :class:`Gen2Out0`. With ``share_depth_model`` (the default) H(n) is
    measured once on all of ``X`` and reused by every level, since each
    level's subsample comes from the same distribution.
    """
    X = check_array(X, dtype=np.float64)
    n = X.shape[0]
    if n < min_sample_size:
        raise ValueError(f"dataset has {n} rows, fewer than the minimum sample size {min_sample_size}")
    qrs = qualification_ladder(n, min_sample_size, max_exponent)
    if len(qrs) < 2:
        raise ValueError(
            f"{n} rows give only {len(qrs)} qualification level(s) with min_sample_size={min_sample_size}; need 2"
        )

    depth_ss, level_ss = spawn(seed, 2)
    if share_depth_model and not isinstance(detector_params.get("depth_model"), DepthModel):
        if detector_params.get("depth_model", "fit") == "fit":
            detector_params = dict(detector_params)
            detector_params["depth_model"] = fit_depth_model(
                X,
                i_min=effective_i_min(n, detector_params.pop("i_min", 8)),
                trees_per_size=detector_params.get("trees_per_size", 5),
                aggregator=detector_params.get("aggregator", "mean"),
                seed=depth_ss,
            )

    def run_level(args):
        qr, ss = args
        sample_ss, det_ss = spawn(ss, 2)
        size = int(round(n * qr))
        if size == n:
            Xs = X
        else:
            idx = np.sort(generator(sample_ss).choice(n, size=size, replace=False))
            Xs = X[idx]
        det = Gen2Out0(random_state=det_ss, **detector_params).fit(Xs)
        return size, det, det.score_samples(X)

    results = _map(run_level, list(zip(qrs, spawn(level_ss, len(qrs)))), n_jobs)
    return XRayPlot(
        qrs=np.asarray(qrs),
        sample_sizes=np.asarray([r[0] for r in results], dtype=np.int64),
        trajectories=np.column_stack([r[2] for r in results]),
        detectors=tuple(r[1] for r in results),
    )


def extract_apex(xray: XRayPlot) -> tuple[ApexTable, float, np.ndarray]:
    """Apex of every X-ray line, the candidate threshold and the candidate indices.

    The threshold is the mean plus three population standard deviations of
    the qr = 1 scores. Ties between levels go to the larger qr.
    """
    traj = xray.trajectories
    if traj.size == 0:
        raise ValueError("empty X-ray plot")
    level = np.argmax(traj, axis=1)
    rows = np.arange(traj.shape[0])
    apex = ApexTable(traj[rows, level], xray.qrs[level], level)
    threshold = mean_plus_3std(traj[:, 0])
    candidates = np.flatnonzero(apex.max_score >= threshold)
    return apex, threshold, candidates


def iso_score(max_qr, max_score):
    """Closeness of an apex to (qr=1, score=1), in [0, 1].

    ``(2 - |log2(qr)/10 + 1 - 1| - |score - 1|) / 2`` with the qr coordinate
    as ``log2(qr)/10 + 1``; clamped to [0, 1] for qr below 2^-10.
    """
    qr = np.asarray(max_qr, dtype=np.float64)
    s = np.asarray(max_score, dtype=np.float64)
    if np.any(qr <= 0) or np.any(qr > 1):
        raise ValueError("qr must lie in (0, 1]")
    x = np.log2(qr) / ISO_QR_SCALE + 1.0
    dist = np.abs(x - 1.0) + np.abs(s - 1.0)
    out = np.clip((2.0 - dist) / 2.0, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def default_eps(X, seed=None, k: int = 4, sample: int = 1000, factor: float = 3.0) -> float:
    """``factor`` times the median distance to the k-th nearest neighbour over a random subsample."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n <= k:
        raise ValueError(f"need more than {k} rows to estimate eps")
    if n > sample:
        X = X[np.sort(generator(seed).choice(n, size=sample, replace=False))]
    dist, _ = NearestNeighbors(n_neighbors=k + 1).fit(X).kneighbors(X)
    eps = factor * float(np.median(dist[:, k]))
    if eps <= 0:
        # duplicated data; fall back to the smallest positive spacing
        pos = dist[dist > 0]
        eps = factor * float(pos.min()) if pos.size else 1.0
    return eps


def dbscan_labels(points, eps: float, min_pts: int) -> np.ndarray:
    """DBSCAN labels (-1 noise); ``min_pts`` counts the point itself."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return DBSCAN(eps=eps, min_samples=min_pts).fit(points).labels_.astype(np.int64)


def group_candidates(X, candidates, max_qr, eps: float, min_pts: int = 4):
    """Cluster candidates separately within each apex qr.

    Returns ``(clusters, noise)``: clusters are ``(member_indices, qr)`` pairs
    with at least ``min_pts`` members, ``noise`` the candidates left over.
    Strata are visited from the largest qr down.
    """
    X = np.asarray(X, dtype=np.float64)
    candidates = np.asarray(candidates, dtype=np.int64)
    max_qr = np.asarray(max_qr, dtype=np.float64)
    cand_qr = max_qr[candidates]
    clusters, noise = [], []
    for qr in sorted(set(cand_qr.tolist()), reverse=True):
        idx = candidates[cand_qr == qr]
        labels = dbscan_labels(X[idx], eps, min_pts)
        noise.extend(idx[labels < 0].tolist())
        for lab in range(labels.max() + 1 if labels.size else 0):
            members = idx[labels == lab]
            if members.size >= min_pts:
                clusters.append((members, qr))
            else:
                noise.extend(members.tolist())
    return clusters, np.asarray(sorted(noise), dtype=np.int64)


def assemble_report(apex: ApexTable, threshold: float, clusters, noise) -> GeneralizedAnomalyReport:
    iso = iso_score(apex.max_qr, apex.max_score)
    groups = [
        GroupAnomaly(tuple(int(i) for i in members), float(qr), float(np.median(iso[members])))
        for members, qr in clusters
    ]
    groups.sort(key=lambda g: (-g.score, -g.qr, g.members[0]))
    points = [PointAnomaly(int(i), float(apex.max_qr[i]), float(iso[i])) for i in noise]
    points.sort(key=lambda p: (-p.score, -p.qr, p.index))
    return GeneralizedAnomalyReport(tuple(groups), tuple(points), float(threshold))


class Gen2Out(BaseEstimator):
    """Detect and rank point- and group-anomalies in one pass.

    Parameters
    ----------
    n_estimators, depth_limit, i_min, trees_per_size, aggregator :
        Passed to the :class:`Gen2Out0` detector of every qualification level.
    min_sample_size : int
        Smallest subsample a level may use.
    max_exponent : int
        Lowest qualification rate is 2 ** -max_exponent.
    eps : float or None
        DBSCAN radius; ``None`` picks 3x the median 4-NN distance of a 1k
        subsample of the data.
    min_pts : int
        DBSCAN core-point count (including the point) and minimum group size.
    random_state : int, SeedSequence or None
    n_jobs : int or None

    Attributes
    ----------
    xray_ : XRayPlot
    apex_ : ApexTable
    threshold_ : float
    candidates_ : ndarray of candidate indices
    eps_ : float
    report_ : GeneralizedAnomalyReport
    labels_ : ndarray
        Rank of the group each point belongs to (0 = top group), -1 otherwise.
    scores_ : ndarray
        Iso-curve score of each point's own apex.
    """

    def __init__(
        self,
        n_estimators=100,
        depth_limit=8,
        i_min=8,
        trees_per_size=5,
        aggregator="mean",
        min_sample_size=256,
        max_exponent=10,
        eps=None,
        min_pts=4,
        random_state=None,
        n_jobs=None,
    ):
        self.n_estimators = n_estimators
        self.depth_limit = depth_limit
        self.i_min = i_min
        self.trees_per_size = trees_per_size
        self.aggregator = aggregator
        self.min_sample_size = min_sample_size
        self.max_exponent = max_exponent
        self.eps = eps
        self.min_pts = min_pts
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _detector_params(self) -> dict:
        return dict(
            n_estimators=self.n_estimators,
            depth_limit=self.depth_limit,
            i_min=self.i_min,
            trees_per_size=self.trees_per_size,
            aggregator=self.aggregator,
        )

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        xray_ss, eps_ss = spawn(self.random_state, 2)
        self.xray_ = build_xray(
            X,
            seed=xray_ss,
            min_sample_size=self.min_sample_size,
            max_exponent=self.max_exponent,
            n_jobs=self.n_jobs,
            **self._detector_params(),
        )
        self.apex_, self.threshold_, self.candidates_ = extract_apex(self.xray_)
        self.eps_ = float(self.eps) if self.eps is not None else default_eps(X, seed=eps_ss, k=self.min_pts)
        clusters, noise = group_candidates(X, self.candidates_, self.apex_.max_qr, self.eps_, self.min_pts)
        self.report_ = assemble_report(self.apex_, self.threshold_, clusters, noise)
        self.scores_ = iso_score(self.apex_.max_qr, self.apex_.max_score)
        labels = np.full(X.shape[0], -1, dtype=np.int64)
        for rank, g in enumerate(self.report_.groups):
            labels[list(g.members)] = rank
        self.labels_ = labels
        self.n_features_in_ = X.shape[1]
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_

    def xray_rows(self):
        check_is_fitted(self, "xray_")
        return self.xray_.to_rows()


def detect(X, seed=None, **params) -> GeneralizedAnomalyReport:
    return Gen2Out(random_state=seed, **params).fit(X).report_
