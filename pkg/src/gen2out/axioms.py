"""Paired scenarios for the five detector axioms and the Welch test that checks them.

Every scenario holds two datasets, S_a and S_b, built around uniform discs.
They differ only in the quantity an axiom is about (outlier distance, disc
density, disc radius, subtended angle or group size). A detector obeys the
axiom when the designated target in S_a scores higher than the one in S_b.
Over repeated seeded trials the two score samples are compared with Welch's
t-test.

Distances are measured from the disc's edge, in the same units as the radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from ._random import generator, spawn
from .data import DataMatrix, uniform_disc

AXIOM_IDS = ("A1", "A2", "A3", "A4", "A5")

# Returned in place of +/- infinity when both samples have zero variance but
# different means.
DEGENERATE_STATISTIC = 1e300

DEFAULT_PARAMS = {
    "A1": {"dist_a": 1.0, "dist_b": 0.5, "radius": 1.0, "n_background": 1024},
    "A2": {"n_a": 2048, "n_b": 512, "dist": 0.5, "radius": 1.0},
    "A3": {"radius_a": 0.5, "radius_b": 1.0, "dist": 0.5, "n_background": 1024},
    "A4": {"angle_a": 30.0, "angle_b": 60.0, "radius": 1.0, "n_background": 1024},
    "A5": {"size_a": 10, "size_b": 40, "dist": 1.0, "spread": 0.02, "radius": 1.0, "n_background": 1024},
}


@dataclass(frozen=True)
class AxiomScenario:
    axiom_id: str
    dataset_a: DataMatrix
    dataset_b: DataMatrix
    target_a: tuple
    target_b: tuple


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    n_trials: int
    df: float = float("nan")
    mean_a: float = float("nan")
    mean_b: float = float("nan")

    def passed(self, alpha: float = 0.01) -> bool:
        return self.statistic > 0 and self.p_value < alpha


def welch_t_test(sample_a, sample_b) -> TTestResult:
    """Welch's unequal-variance t-test, two-sided p-value.

    The statistic is positive when ``sample_a`` has the larger mean. Degrees
    of freedom follow Welch-Satterthwaite. If both samples have zero
    variance the result is ``(0, 1)`` for equal means and
    ``(+/-DEGENERATE_STATISTIC, 0)`` otherwise.
    """
    a = np.asarray(sample_a, dtype=np.float64).ravel()
    b = np.asarray(sample_b, dtype=np.float64).ravel()
    if a.size < 2 or b.size < 2:
        raise ValueError(f"both samples need at least 2 values, got {a.size} and {b.size}")
    n_trials = int(min(a.size, b.size))
    ma, mb = float(a.mean()), float(b.mean())
    va = float(a.var(ddof=1)) / a.size
    vb = float(b.var(ddof=1)) / b.size
    se2 = va + vb
    if se2 == 0.0:
        if ma == mb:
            return TTestResult(0.0, 1.0, n_trials, float("nan"), ma, mb)
        return TTestResult(math.copysign(DEGENERATE_STATISTIC, ma - mb), 0.0, n_trials, float("nan"), ma, mb)
    t = (ma - mb) / math.sqrt(se2)
    df = se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    # P(|T| > t) for Student's t with df degrees of freedom
    p = float(betainc(0.5 * df, 0.5, df / (df + t * t)))
    return TTestResult(float(t), min(max(p, 0.0), 1.0), n_trials, float(df), ma, mb)


def _params(axiom_id: str, params: dict | None) -> dict:
    if axiom_id not in AXIOM_IDS:
        raise ValueError(f"unknown axiom {axiom_id!r}; expected one of {AXIOM_IDS}")
    merged = dict(DEFAULT_PARAMS[axiom_id])
    unknown = set(params or {}) - set(merged)
    if unknown:
        raise ValueError(f"unknown parameter(s) for {axiom_id}: {sorted(unknown)}")
    merged.update(params or {})
    return merged


def _at_distance(center_dist: float, theta: float) -> np.ndarray:
    return np.array([[center_dist * math.cos(theta), center_dist * math.sin(theta)]])


def generate_axiom_scenario(axiom_id: str, params: dict | None = None, seed=None) -> AxiomScenario:
    """Build the S_a / S_b pair for one axiom.

    Parameters per axiom (defaults in ``DEFAULT_PARAMS``):

    * A1: ``dist_a > dist_b``; both datasets share the same disc sample.
    * A2: ``n_a > n_b`` background points on equal discs, outliers at ``dist``.
    * A3: ``radius_a < radius_b`` with equal counts, outliers at ``dist``.
    * A4: ``angle_a < angle_b`` in degrees, the angle the disc subtends at
      the outlier; the outlier sits at ``radius / sin(angle / 2)`` from the
      centre.
    * A5: planted groups of ``size_a < size_b`` points (Gaussian jitter
      ``spread``) at ``dist``, on top of equal backgrounds.

    Targets are row indices into the respective datasets; the planted
    points are appended after the background.
    """
    p = _params(axiom_id, params)
    bg_a_ss, bg_b_ss, place_ss = spawn(seed, 3)
    theta = 2.0 * math.pi * float(generator(place_ss).random())

    if axiom_id == "A1":
        if not p["dist_a"] > p["dist_b"] > 0:
            raise ValueError("A1 needs dist_a > dist_b > 0")
        R = p["radius"]
        bg = uniform_disc(p["n_background"], R, rng=generator(bg_a_ss))
        Xa = np.vstack([bg, _at_distance(R + p["dist_a"], theta)])
        Xb = np.vstack([bg, _at_distance(R + p["dist_b"], theta)])
    elif axiom_id == "A2":
        if not p["n_a"] > p["n_b"] > 0:
            raise ValueError("A2 needs n_a > n_b > 0 (denser S_a)")
        R = p["radius"]
        out = _at_distance(R + p["dist"], theta)
        Xa = np.vstack([uniform_disc(p["n_a"], R, rng=generator(bg_a_ss)), out])
        Xb = np.vstack([uniform_disc(p["n_b"], R, rng=generator(bg_b_ss)), out])
    elif axiom_id == "A3":
        if not 0 < p["radius_a"] < p["radius_b"]:
            raise ValueError("A3 needs 0 < radius_a < radius_b")
        n = p["n_background"]
        Xa = np.vstack([uniform_disc(n, p["radius_a"], rng=generator(bg_a_ss)), _at_distance(p["radius_a"] + p["dist"], theta)])
        Xb = np.vstack([uniform_disc(n, p["radius_b"], rng=generator(bg_b_ss)), _at_distance(p["radius_b"] + p["dist"], theta)])
    elif axiom_id == "A4":
        if not 0 < p["angle_a"] < p["angle_b"] < 180:
            raise ValueError("A4 needs 0 < angle_a < angle_b < 180 degrees")
        R, n = p["radius"], p["n_background"]
        da = R / math.sin(math.radians(p["angle_a"]) / 2)
        db = R / math.sin(math.radians(p["angle_b"]) / 2)
        Xa = np.vstack([uniform_disc(n, R, rng=generator(bg_a_ss)), _at_distance(da, theta)])
        Xb = np.vstack([uniform_disc(n, R, rng=generator(bg_b_ss)), _at_distance(db, theta)])
    else:
        if not 0 < p["size_a"] < p["size_b"]:
            raise ValueError("A5 needs 0 < size_a < size_b")
        R, n = p["radius"], p["n_background"]
        center = _at_distance(R + p["dist"], theta)
        jit_a, jit_b = spawn(place_ss, 2)
        ga = center + p["spread"] * generator(jit_a).standard_normal((p["size_a"], 2))
        gb = center + p["spread"] * generator(jit_b).standard_normal((p["size_b"], 2))
        Xa = np.vstack([uniform_disc(n, R, rng=generator(bg_a_ss)), ga])
        Xb = np.vstack([uniform_disc(n, R, rng=generator(bg_b_ss)), gb])
        return AxiomScenario(
            axiom_id,
            DataMatrix(Xa),
            DataMatrix(Xb),
            tuple(range(n, n + p["size_a"])),
            tuple(range(n, n + p["size_b"])),
        )

    return AxiomScenario(axiom_id, DataMatrix(Xa), DataMatrix(Xb), (len(Xa) - 1,), (len(Xb) - 1,))


def scenario_scores(scenario: AxiomScenario, detector_config: dict | None = None, seed=None) -> tuple[float, float]:
    """Score the two targets of one scenario.

    A1-A4 fit a point detector on each dataset and read the target's score.
    A5 runs the full generalized pipeline and takes the median iso-curve
    score of the planted group's members.
    """
    config = dict(detector_config or {})
    ss_a, ss_b = spawn(seed, 2)
    if scenario.axiom_id == "A5":
        from .generalized import Gen2Out

        out = []
        for data, target, ss in ((scenario.dataset_a, scenario.target_a, ss_a), (scenario.dataset_b, scenario.target_b, ss_b)):
            model = Gen2Out(random_state=ss, **config).fit(data.values)
            out.append(float(np.median(model.scores_[list(target)])))
        return out[0], out[1]

    from .detector import Gen2Out0

    out = []
    for data, target, ss in ((scenario.dataset_a, scenario.target_a, ss_a), (scenario.dataset_b, scenario.target_b, ss_b)):
        det = Gen2Out0(random_state=ss, **config).fit(data.values)
        out.append(float(det.score_samples(data.values[list(target)]).mean()))
    return out[0], out[1]


def run_axiom_test(
    axiom_id: str,
    detector_config: dict | None = None,
    n_trials: int = 30,
    seed=None,
    params: dict | None = None,
    return_samples: bool = False,
):
    """Repeat a scenario ``n_trials`` times and Welch-test s(a) against s(b).

    Each trial draws a fresh scenario and fresh detector seeds from its own
    substream of ``seed``.
    """
    if n_trials < 2:
        raise ValueError(f"n_trials must be >= 2, got {n_trials}")
    sa, sb = np.empty(n_trials), np.empty(n_trials)
    for t, ss in enumerate(spawn(seed, n_trials)):
        scen_ss, det_ss = spawn(ss, 2)
        scenario = generate_axiom_scenario(axiom_id, params, scen_ss)
        sa[t], sb[t] = scenario_scores(scenario, detector_config, det_ss)
    result = welch_t_test(sa, sb)
    if return_samples:
        return result, sa, sb
    return result
