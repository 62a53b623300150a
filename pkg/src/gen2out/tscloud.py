"""Multivariate time series to a sequence of point clouds, and their scoring.

Each sliding window of K samples becomes an M x 4 matrix: one row per
channel holding that channel's mean, population variance, skewness and
kurtosis over the window. The clouds are then scored one by one with the
generalized detector, so each window gets a group score and a set of
flagged channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._random import spawn

MOMENT_NAMES = ("mean", "variance", "skewness", "kurtosis")


@dataclass(frozen=True, eq=False)
class MultiSeries:
    """M channels x T samples."""

    values: np.ndarray
    sample_interval: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v.reshape(1, -1)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"values must be M x T with M, T >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_columns(cls, table, sample_interval: float = 1.0) -> MultiSeries:
        """Build from a T x M table (one column per channel, as in CSV input)."""
        return cls(np.asarray(table, dtype=np.float64).T, sample_interval)


@dataclass(frozen=True, eq=False)
class WindowCloud:
    window_index: int
    start_t: float
    matrix: np.ndarray


def window_moments(block: np.ndarray) -> np.ndarray:
    """Per-row (mean, population variance, skewness, raw kurtosis) of an M x K block.

    Rows with zero variance get skewness 0 and kurtosis 0.
    """
    block = np.asarray(block, dtype=np.float64)
    mean = block.mean(axis=1)
    dev = block - mean[:, None]
    var = np.mean(dev**2, axis=1)
    m3 = np.mean(dev**3, axis=1)
    m4 = np.mean(dev**4, axis=1)
    flat = var <= 0.0
    safe = np.where(flat, 1.0, var)
    skew = np.where(flat, 0.0, m3 / safe**1.5)
    kurt = np.where(flat, 0.0, m4 / safe**2)
    return np.column_stack((mean, var, skew, kurt))


def windows_to_clouds(series: MultiSeries, window: int, stride: int) -> list[WindowCloud]:
    """Slide a ``window``-sample window by ``stride``; floor((T - K) / stride) + 1 windows."""
    T = series.length
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be >= 1")
    if window > T:
        raise ValueError(f"window {window} is longer than the series ({T} samples)")
    count = (T - window) // stride + 1
    clouds = []
    for j in range(count):
        s = j * stride
        clouds.append(WindowCloud(j, s * series.sample_interval, window_moments(series.values[:, s : s + window])))
    return clouds


# Window clouds hold one row per channel, far fewer than a full dataset, so
# the qualification ladder may go down to 16 rows.
DEFAULT_WINDOW_CONFIG = {"min_sample_size": 16}


@dataclass(frozen=True)
class WindowScore:
    window_index: int
    start_t: float
    group_score: float
    member_channels: tuple
    n_groups: int


def robust_standardize(matrix: np.ndarray) -> np.ndarray:
    """Centre each column on its median and divide by its MAD (1 when the MAD is 0).

    Tree scores do not change under per-column affine maps; this only puts the
    moments on one scale for the Euclidean clustering step.
    """
    center = np.median(matrix, axis=0)
    scale = np.median(np.abs(matrix - center), axis=0)
    return (matrix - center) / np.where(scale > 0, scale, 1.0)


def score_windows(clouds, config: dict | None = None, seed=None, n_jobs=None, pooled: bool = False) -> list[WindowScore]:
    """Run the generalized detector on window clouds.

    By default every window is detected on its own: its group score is the
    highest iso-curve score among its reported groups (0 when it has none),
    and its member channels are the union of those groups' members.

    With ``pooled`` the channel rows of all windows are stacked and detected
    together, so one set of trees scores every window. A window's group
    score is then the highest score among groups that contain at least one
    of its channels; its member channels are those channels. This is the
    mode for spotting a window in which a sizeable share of channels moves
    together; within a single window such a share is too large to exceed
    the mean + 3 std threshold.
    """
    from .generalized import Gen2Out

    clouds = list(clouds)
    if not clouds:
        raise ValueError("need at least one window cloud")
    params = dict(DEFAULT_WINDOW_CONFIG)
    params.update(config or {})
    if pooled:
        M = clouds[0].matrix.shape[0]
        if any(c.matrix.shape[0] != M for c in clouds):
            raise ValueError("pooled scoring needs the same channel count in every window")
        model = Gen2Out(random_state=spawn(seed, 1)[0], n_jobs=n_jobs, **params)
        model.fit(robust_standardize(np.vstack([c.matrix for c in clouds])))
        best = np.zeros(len(clouds) * M)
        for g in model.report_.groups:
            idx = np.asarray(g.members)
            best[idx] = np.maximum(best[idx], g.score)
        out = []
        for k, cloud in enumerate(clouds):
            row = best[k * M : (k + 1) * M]
            members = np.flatnonzero(row > 0)
            n_groups = sum(1 for g in model.report_.groups if any(k * M <= i < (k + 1) * M for i in g.members))
            out.append(WindowScore(cloud.window_index, cloud.start_t, float(row.max()), tuple(int(i) for i in members), n_groups))
        return out

    out = []
    for cloud, ss in zip(clouds, spawn(seed, len(clouds))):
        model = Gen2Out(random_state=ss, n_jobs=n_jobs, **params).fit(robust_standardize(cloud.matrix))
        groups = model.report_.groups
        members = sorted({int(i) for g in groups for i in g.members})
        top = max((g.score for g in groups), default=0.0)
        out.append(WindowScore(cloud.window_index, cloud.start_t, float(top), tuple(members), len(groups)))
    return out
