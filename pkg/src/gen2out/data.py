"""Datasets: the DataMatrix container, CSV ingestion and seeded generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._random import generator, spawn


@dataclass(frozen=True)
class DataMatrix:
    """An n x m matrix of finite reals with optional binary outlier labels."""

    values: np.ndarray
    labels: np.ndarray | None = None
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[1] < 1:
            raise ValueError(f"values must be n x m with m >= 1, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (values.shape[0],):
                raise ValueError(f"labels must have length {values.shape[0]}, got shape {labels.shape}")
            if not np.all((labels == 0) | (labels == 1)):
                raise ValueError("labels must be 0 or 1")
            labels = labels.astype(np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __len__(self) -> int:
        return self.n


class CsvError(ValueError):
    pass


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column: str | int | None = None) -> DataMatrix:
    """Read a comma-separated numeric file.

    Lines starting with ``#`` are skipped. A header row is assumed when any
    cell of the first row is non-numeric.
    ``label_column`` may be a header name or a 0-based column index; its
    values must be 0 or 1 and are returned as ``labels``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"No such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.lstrip().startswith("#")]
    rows = [r for r in csv.reader(lines) if r and any(c.strip() for c in r)]
    if not rows:
        return DataMatrix(np.empty((0, 1)))

    header = None
    if not all(_is_number(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]

    width = len(header) if header is not None else len(rows[0]) if rows else 0
    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None or label_column not in header:
                raise CsvError(f"label column {label_column!r} not found in header")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if label_idx < 0:
                label_idx += width
            if not 0 <= label_idx < width:
                raise CsvError(f"label column index {label_column} out of range for {width} columns")

    offset = 2 if header is not None else 1
    values = np.empty((len(rows), width - (label_idx is not None)), dtype=np.float64)
    labels = np.empty(len(rows), dtype=np.int64) if label_idx is not None else None
    for i, row in enumerate(rows):
        if len(row) != width:
            raise CsvError(f"row {i + offset}: expected {width} columns, got {len(row)}")
        k = 0
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise CsvError(f"row {i + offset}, column {j + 1}: cannot parse {cell!r} as a number") from None
            if not math.isfinite(v):
                raise CsvError(f"row {i + offset}, column {j + 1}: non-finite value {cell!r}")
            if j == label_idx:
                if v not in (0.0, 1.0):
                    raise CsvError(f"row {i + offset}, column {j + 1}: label {cell!r} is not 0 or 1")
                labels[i] = int(v)
            else:
                values[i, k] = v
                k += 1

    columns = None
    if header is not None:
        columns = tuple(h for j, h in enumerate(header) if j != label_idx)
    if values.shape[1] == 0:
        raise CsvError("no feature columns")
    return DataMatrix(values, labels, columns)


def save_csv(path, data, header: Sequence[str] | None = None, comment: str | None = None) -> None:
    """Write ``data`` as CSV; ``comment`` becomes a leading ``#`` line."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if comment is not None:
            fh.write("# " + comment.replace("\n", " ") + "\n")
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in arr:
            w.writerow([repr(float(v)) for v in row])


def gen_gaussian_blobs(centers, stds, counts, seed=None) -> DataMatrix:
    """Isotropic Gaussian blobs, one independent stream per blob.

    Labels are not attached; use the blob order (``counts``) to recover
    membership.
    """
    centers = [np.atleast_1d(np.asarray(c, dtype=np.float64)) for c in centers]
    if not (len(centers) == len(stds) == len(counts)):
        raise ValueError(
            f"centers, stds and counts must have equal length, got {len(centers)}, {len(stds)}, {len(counts)}"
        )
    if not centers:
        raise ValueError("at least one blob is required")
    m = centers[0].size
    if any(c.size != m for c in centers):
        raise ValueError("all centers must have the same dimension")
    if any(s < 0 for s in stds):
        raise ValueError("stds must be nonnegative")
    if any(c < 0 for c in counts):
        raise ValueError("counts must be nonnegative")
    parts = []
    for c, s, k, ss in zip(centers, stds, counts, spawn(seed, len(centers))):
        rng = generator(ss)
        parts.append(c + s * rng.standard_normal((int(k), m)))
    return DataMatrix(np.vstack(parts))


@dataclass(frozen=True)
class IfsSpec:
    """An iterated function system: affine maps x -> A_i x + b_i chosen with probability p_i."""

    matrices: tuple
    offsets: tuple
    weights: tuple
    burn_in: int = 100
    name: str = field(default="", compare=False)

    def __post_init__(self):
        A = np.asarray(self.matrices, dtype=np.float64)
        b = np.asarray(self.offsets, dtype=np.float64)
        p = np.asarray(self.weights, dtype=np.float64)
        if A.ndim != 3 or A.shape[0] < 1 or A.shape[1:] != (2, 2):
            raise ValueError(f"matrices must be a nonempty list of 2x2 matrices, got shape {A.shape}")
        if b.shape != (A.shape[0], 2):
            raise ValueError(f"offsets must have shape ({A.shape[0]}, 2), got {b.shape}")
        if p.shape != (A.shape[0],):
            raise ValueError(f"need one weight per map, got {p.shape[0]} for {A.shape[0]} maps")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "matrices": np.asarray(self.matrices, dtype=float).tolist(),
            "offsets": np.asarray(self.offsets, dtype=float).tolist(),
            "weights": list(map(float, self.weights)),
            "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, d: dict) -> IfsSpec:
        return cls(
            matrices=tuple(tuple(tuple(row) for row in a) for a in d["matrices"]),
            offsets=tuple(tuple(o) for o in d["offsets"]),
            weights=tuple(d["weights"]),
            burn_in=int(d.get("burn_in", 100)),
            name=d.get("name", ""),
        )


def gen_ifs(spec: IfsSpec, n: int, seed=None) -> DataMatrix:
    """Chaos-game sample of an IFS attractor.

    Starts at the origin, applies a randomly drawn map at every step,
    discards the first ``spec.burn_in`` iterates and keeps the next ``n``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    A = np.asarray(spec.matrices, dtype=np.float64)
    b = np.asarray(spec.offsets, dtype=np.float64)
    p = np.asarray(spec.weights, dtype=np.float64)
    rng = generator(seed)
    total = spec.burn_in + n
    choice = rng.choice(len(p), size=total, p=p)

    coef = [tuple(float(v) for v in (*A[i].ravel(), *b[i])) for i in range(len(p))]
    out = np.empty((n, 2), dtype=np.float64)
    x = y = 0.0
    burn = spec.burn_in
    for t, i in enumerate(choice.tolist()):
        a11, a12, a21, a22, b1, b2 = coef[i]
        x, y = a11 * x + a12 * y + b1, a21 * x + a22 * y + b2
        if t >= burn:
            out[t - burn, 0] = x
            out[t - burn, 1] = y
    return DataMatrix(out)


_HALF = ((0.5, 0.0), (0.0, 0.5))

SIERPINSKI_VERTICES = ((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2))


def biased_line(bias: float = 0.8, burn_in: int = 100) -> IfsSpec:
    """Fraction ``bias`` of the mass recursively in the left half of [0, 1] (on the x axis)."""
    return IfsSpec((_HALF, _HALF), ((0.0, 0.0), (0.5, 0.0)), (bias, 1.0 - bias), burn_in, "biased_line")


def uniform_line(burn_in: int = 100) -> IfsSpec:
    return IfsSpec((_HALF, _HALF), ((0.0, 0.0), (0.5, 0.0)), (0.5, 0.5), burn_in, "uniform_line")


def sierpinski(weights=(1 / 3, 1 / 3, 1 / 3), burn_in: int = 100) -> IfsSpec:
    """Sierpinski triangle on the unit equilateral triangle; pass (0.6, 0.3, 0.1) for the biased one."""
    offsets = tuple((0.5 * vx, 0.5 * vy) for vx, vy in SIERPINSKI_VERTICES)
    w = tuple(float(v) for v in weights)
    w = w[:-1] + (1.0 - sum(w[:-1]),)
    return IfsSpec((_HALF,) * 3, offsets, w, burn_in, "sierpinski")


def uniform_square(burn_in: int = 100) -> IfsSpec:
    offsets = ((0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5))
    return IfsSpec((_HALF,) * 4, offsets, (0.25,) * 4, burn_in, "uniform_square")


# Barnsley's fern: stem, successively smaller leaflets, largest left and right leaflets.
FERN_TABLE = (
    (((0.00, 0.00), (0.00, 0.16)), (0.0, 0.00), 0.01),
    (((0.85, 0.04), (-0.04, 0.85)), (0.0, 1.60), 0.85),
    (((0.20, -0.26), (0.23, 0.22)), (0.0, 1.60), 0.07),
    (((-0.15, 0.28), (0.26, 0.24)), (0.0, 0.44), 0.07),
)


def fern(burn_in: int = 100) -> IfsSpec:
    return IfsSpec(
        tuple(r[0] for r in FERN_TABLE), tuple(r[1] for r in FERN_TABLE), tuple(r[2] for r in FERN_TABLE), burn_in, "fern"
    )


NAMED_IFS = {
    "biased_line": biased_line,
    "uniform_line": uniform_line,
    "sierpinski": sierpinski,
    "biased_sierpinski": lambda burn_in=100: sierpinski((0.6, 0.3, 0.1), burn_in),
    "uniform_square": uniform_square,
    "fern": fern,
}


def uniform_disc(n: int, radius: float = 1.0, center=(0.0, 0.0), rng: np.random.Generator | None = None) -> np.ndarray:
    """``n`` points uniform in a 2-D disc (radius = R * sqrt(u))."""
    rng = rng if rng is not None else generator(None)
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack((center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)))


def two_group_fixture(seed=None, n_background: int = 20000, spread: float = 0.4, n_points: int = 20) -> DataMatrix:
    """Gaussian background with two planted groups and scattered point outliers.

    Rows: ``n_background`` points from N(0, I) in 2-D, then group GA1 (1000
    points around (6, 6)), group GA2 (2000 points around (-6, 6)), both with
    standard deviation ``spread``, then ``n_points`` outliers on the ring of
    radius 8 to 12. ``labels`` is 1 on every non-background row;
    ``two_group_membership`` gives 0 background, 1 GA1, 2 GA2, 3 point outlier.
    """
    X = _two_group(seed, n_background, spread, n_points)
    member = two_group_membership(n_background, n_points)
    return DataMatrix(X, (member > 0).astype(np.int64))


def two_group_membership(n_background: int = 20000, n_points: int = 20) -> np.ndarray:
    return np.r_[
        np.zeros(n_background, dtype=np.int64),
        np.ones(1000, dtype=np.int64),
        np.full(2000, 2, dtype=np.int64),
        np.full(n_points, 3, dtype=np.int64),
    ]


def _two_group(seed, n_background, spread, n_points):
    bg_ss, g1_ss, g2_ss, pt_ss = spawn(seed, 4)
    bg = generator(bg_ss).standard_normal((n_background, 2))
    ga1 = np.array([6.0, 6.0]) + spread * generator(g1_ss).standard_normal((1000, 2))
    ga2 = np.array([-6.0, 6.0]) + spread * generator(g2_ss).standard_normal((2000, 2))
    rng = generator(pt_ss)
    ang = 2.0 * np.pi * rng.random(n_points)
    rad = 8.0 + 4.0 * rng.random(n_points)
    pts = np.column_stack((rad * np.cos(ang), rad * np.sin(ang)))
    return np.vstack([bg, ga1, ga2, pts])


def balanced_blobs(seed=None, n_blobs: int = 10, per_blob: int = 520, dim: int = 2, separation: float = 10.0) -> DataMatrix:
    """``n_blobs`` equal-size unit Gaussian blobs with centres on a circle of radius ``separation``.

    With ``dim > 2`` the extra coordinates of every centre are 0.
    """
    ang = 2.0 * np.pi * np.arange(n_blobs) / n_blobs
    centers = np.zeros((n_blobs, dim))
    centers[:, 0] = separation * np.cos(ang)
    centers[:, 1] = separation * np.sin(ang)
    return gen_gaussian_blobs(list(centers), [1.0] * n_blobs, [per_blob] * n_blobs, seed)


HTTP_CLUMPS = (((4.0, 4.0, -4.0), 300), ((-4.0, 5.0, 3.0), 400), ((5.0, -4.0, 4.0), 500))


def http_like(seed=None, n_background: int = 20000, spread: float = 0.1) -> DataMatrix:
    """3-D Gaussian background with three dense off-manifold clumps (the attacks).

    Labels mark clump members; ``http_membership`` tells the clumps apart.
    """
    bg_ss, *clump_ss = spawn(seed, 1 + len(HTTP_CLUMPS))
    bg = generator(bg_ss).standard_normal((n_background, 3))
    parts = [bg]
    for (center, count), ss in zip(HTTP_CLUMPS, clump_ss):
        parts.append(np.asarray(center) + spread * generator(ss).standard_normal((count, 3)))
    member = http_membership(n_background)
    return DataMatrix(np.vstack(parts), (member > 0).astype(np.int64))


def http_membership(n_background: int = 20000) -> np.ndarray:
    return np.concatenate([np.zeros(n_background, dtype=np.int64)] + [np.full(c, k + 1, dtype=np.int64) for k, (_, c) in enumerate(HTTP_CLUMPS)])
