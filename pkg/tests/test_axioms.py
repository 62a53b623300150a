import math

import mpmath
import numpy as np
import pytest

from gen2out.axioms import AXIOM_IDS, DEGENERATE_STATISTIC, generate_axiom_scenario, run_axiom_test, welch_t_test


def mp_welch(a, b):
    mpmath.mp.dps = 40
    a = [mpmath.mpf(float(x)) for x in a]
    b = [mpmath.mpf(float(x)) for x in b]
    ma, mb = sum(a) / len(a), sum(b) / len(b)
    va = sum((x - ma) ** 2 for x in a) / (len(a) - 1) / len(a)
    vb = sum((x - mb) ** 2 for x in b) / (len(b) - 1) / len(b)
    t = (ma - mb) / mpmath.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1))
    # two-sided tail by integrating the Student density
    dens = lambda x: mpmath.gamma((df + 1) / 2) / (mpmath.sqrt(df * mpmath.pi) * mpmath.gamma(df / 2)) * (1 + x * x / df) ** (-(df + 1) / 2)
    p = 2 * mpmath.quad(dens, [abs(t), mpmath.inf])
    return float(t), float(df), float(p)


@pytest.mark.parametrize("seed", range(6))
def test_welch_matches_mpmath(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.3 * seed, 1 + seed, size=5 + 3 * seed)
    b = rng.normal(0, 1, size=7 + seed)
    res = welch_t_test(a, b)
    t, df, p = mp_welch(a, b)
    assert res.statistic == pytest.approx(t, rel=1e-12)
    assert res.df == pytest.approx(df, rel=1e-12)
    assert res.p_value == pytest.approx(p, rel=1e-9, abs=1e-300)


def test_welch_small_example():
    res = welch_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert res.statistic == pytest.approx(-1.0)
    assert res.df == pytest.approx(8.0)
    assert res.n_trials == 5


def test_welch_antisymmetric(rng):
    a, b = rng.random(9), rng.random(12)
    ab, ba = welch_t_test(a, b), welch_t_test(b, a)
    assert ab.statistic == -ba.statistic and ab.p_value == ba.p_value


def test_welch_degenerate():
    assert welch_t_test([1.0, 1.0], [1.0, 1.0]).p_value == 1.0
    res = welch_t_test([2.0, 2.0, 2.0], [1.0, 1.0])
    assert res.statistic == DEGENERATE_STATISTIC and res.p_value == 0.0 and res.passed()
    assert welch_t_test([0.0, 0.0], [1.0, 1.0]).statistic == -DEGENERATE_STATISTIC
    with pytest.raises(ValueError):
        welch_t_test([1.0], [1.0, 2.0])


def test_passed_needs_right_direction():
    res = welch_t_test(np.arange(10.0), np.arange(10.0) + 100)
    assert res.p_value < 0.01 and not res.passed()


@pytest.mark.parametrize("axiom", AXIOM_IDS)
def test_scenarios_are_deterministic(axiom):
    s1 = generate_axiom_scenario(axiom, seed=3)
    s2 = generate_axiom_scenario(axiom, seed=3)
    assert np.array_equal(s1.dataset_a.values, s2.dataset_a.values)
    assert np.array_equal(s1.dataset_b.values, s2.dataset_b.values)


def _dist_from_origin(data, target):
    return float(np.linalg.norm(data.values[target[0]]))


def test_a1_shares_background():
    s = generate_axiom_scenario("A1", seed=0)
    assert np.array_equal(s.dataset_a.values[:-1], s.dataset_b.values[:-1])
    assert _dist_from_origin(s.dataset_a, s.target_a) == pytest.approx(2.0)
    assert _dist_from_origin(s.dataset_b, s.target_b) == pytest.approx(1.5)


def test_a2_density():
    s = generate_axiom_scenario("A2", seed=0)
    assert len(s.dataset_a) == 2049 and len(s.dataset_b) == 513
    assert np.array_equal(s.dataset_a.values[-1], s.dataset_b.values[-1])


def test_a3_radii():
    s = generate_axiom_scenario("A3", seed=0)
    assert np.linalg.norm(s.dataset_a.values[:-1], axis=1).max() <= 0.5
    assert _dist_from_origin(s.dataset_a, s.target_a) == pytest.approx(1.0)
    assert _dist_from_origin(s.dataset_b, s.target_b) == pytest.approx(1.5)


def test_a4_angles():
    s = generate_axiom_scenario("A4", seed=0)
    for data, target, angle in ((s.dataset_a, s.target_a, 30), (s.dataset_b, s.target_b, 60)):
        d = _dist_from_origin(data, target)
        assert 2 * math.degrees(math.asin(1.0 / d)) == pytest.approx(angle)


def test_a5_group_sizes():
    s = generate_axiom_scenario("A5", seed=0)
    assert len(s.target_a) == 10 and len(s.target_b) == 40
    assert s.target_a[0] == 1024


@pytest.mark.parametrize(
    "axiom,params",
    [("A1", {"dist_a": 0.5, "dist_b": 1.0}), ("A2", {"n_a": 10, "n_b": 20}), ("A3", {"radius_a": 2.0}), ("A4", {"angle_a": 90.0}), ("A5", {"size_a": 50})],
)
def test_violated_premises_rejected(axiom, params):
    with pytest.raises(ValueError):
        generate_axiom_scenario(axiom, params)


def test_unknown_axiom_and_param():
    with pytest.raises(ValueError):
        generate_axiom_scenario("A6")
    with pytest.raises(ValueError):
        generate_axiom_scenario("A1", {"bogus": 1})
    with pytest.raises(ValueError):
        run_axiom_test("A1", n_trials=1)


def test_run_returns_samples():
    res, sa, sb = run_axiom_test("A1", {"n_estimators": 20}, n_trials=4, seed=0, return_samples=True)
    assert sa.shape == sb.shape == (4,) and res.n_trials == 4
