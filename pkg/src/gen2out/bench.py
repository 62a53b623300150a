"""Wall-clock scaling of fit + score against dataset size."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._random import spawn
from .data import gen_ifs, uniform_square
from .detector import Gen2Out0


@dataclass(frozen=True)
class ScalingResult:
    sizes: tuple
    wall_times: tuple
    fitted_loglog_slope: float
    repeats: int = 1

    def extrapolate(self, n: int) -> float:
        """Seconds predicted at ``n`` rows from the largest measured size and the fitted slope."""
        n0, t0 = self.sizes[-1], self.wall_times[-1]
        return float(t0 * (n / n0) ** self.fitted_loglog_slope)

    def rows(self):
        return list(zip(self.sizes, self.wall_times))


def loglog_slope(sizes, times) -> float:
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(times, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def uniform_square_data(n: int, seed=None) -> np.ndarray:
    return gen_ifs(uniform_square(), n, seed).values


def scaling_benchmark(
    generator: Callable[[int, object], np.ndarray] = uniform_square_data,
    sizes=tuple(2**k for k in range(12, 19)),
    detector_config: dict | None = None,
    repeats: int = 3,
    seed=None,
    clock: Callable[[], float] = time.perf_counter,
) -> ScalingResult:
    """Median-of-``repeats`` wall time of fit + score per size, and the log-log slope.

    ``generator(n, seed)`` must return an (n, m) array. Data generation is
    excluded from the timing; sizes run one after another. One untimed run
    on the smallest size goes first so that kernel compilation is not
    charged to it.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise ValueError(f"need at least 3 sizes, got {len(sizes)}")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    config = dict(detector_config or {})
    warm_ss, *size_ss = spawn(seed, len(sizes) + 1)
    warm = np.ascontiguousarray(generator(sizes[0], warm_ss), dtype=np.float64)
    Gen2Out0(random_state=warm_ss, **config).fit(warm).score_samples(warm)
    times = []
    for n, ss in zip(sizes, size_ss):
        data_ss, det_ss = spawn(ss, 2)
        X = np.ascontiguousarray(generator(n, data_ss), dtype=np.float64)
        runs = []
        for _ in range(repeats):
            start = clock()
            Gen2Out0(random_state=det_ss, **config).fit(X).score_samples(X)
            runs.append(clock() - start)
        times.append(max(float(np.median(runs)), math.ulp(1.0)))
    return ScalingResult(tuple(sizes), tuple(times), loglog_slope(sizes, times), repeats)
