import numpy as np
import pytest
from scipy import stats

from gen2out.tscloud import MultiSeries, robust_standardize, score_windows, window_moments, windows_to_clouds


def brute_moments(row):
    n = len(row)
    mean = sum(row) / n
    var = sum((x - mean) ** 2 for x in row) / n
    if var == 0:
        return [mean, 0.0, 0.0, 0.0]
    skew = sum((x - mean) ** 3 for x in row) / n / var**1.5
    kurt = sum((x - mean) ** 4 for x in row) / n / var**2
    return [mean, var, skew, kurt]


def test_window_count():
    s = MultiSeries(np.zeros((3, 100)))
    assert len(windows_to_clouds(s, 10, 3)) == 31
    assert len(windows_to_clouds(s, 100, 7)) == 1
    clouds = windows_to_clouds(MultiSeries(np.zeros((2, 50)), sample_interval=0.5), 10, 10)
    assert [c.start_t for c in clouds] == [0.0, 5.0, 10.0, 15.0, 20.0]
    assert clouds[0].matrix.shape == (2, 4)


def test_constant_channel():
    assert window_moments(np.full((1, 20), 4.0)).tolist() == [[4.0, 0.0, 0.0, 0.0]]


def test_against_brute_force(rng):
    block = rng.gamma(2.0, size=(5, 37))
    expected = np.array([brute_moments(list(r)) for r in block])
    assert np.allclose(window_moments(block), expected, rtol=1e-10, atol=1e-12)


def test_agrees_with_scipy(rng):
    block = rng.standard_normal((3, 500))
    m = window_moments(block)
    assert np.allclose(m[:, 2], stats.skew(block, axis=1))
    assert np.allclose(m[:, 3], stats.kurtosis(block, axis=1, fisher=False))


def test_normal_moments():
    x = np.random.default_rng(0).standard_normal((1, 100_000))
    mean, var, skew, kurt = window_moments(x)[0]
    assert abs(mean) < 0.02 and abs(var - 1) < 0.02 and abs(skew) < 0.05 and abs(kurt - 3) < 0.1


def test_shift_changes_only_the_mean(rng):
    block = rng.random((4, 60))
    a, b = window_moments(block), window_moments(block + 7.5)
    assert np.allclose(b[:, 0], a[:, 0] + 7.5)
    assert np.allclose(b[:, 1:], a[:, 1:])


def test_series_validation():
    with pytest.raises(ValueError):
        MultiSeries(np.array([[np.nan, 1.0]]))
    with pytest.raises(ValueError):
        MultiSeries(np.zeros((2, 5)), sample_interval=0)
    with pytest.raises(ValueError):
        windows_to_clouds(MultiSeries(np.zeros((2, 5))), 6, 1)
    assert MultiSeries.from_columns(np.zeros((10, 3))).channels == 3


def test_robust_standardize():
    out = robust_standardize(np.array([[1.0, 5.0], [2.0, 5.0], [4.0, 5.0]]))
    assert out[:, 0].tolist() == [-1.0, 0.0, 2.0]
    assert out[:, 1].tolist() == [0.0, 0.0, 0.0]


def _series(seed, planted=False):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((64, 2000))
    if planted:
        v[: int(0.3 * 64), 600:800] += 10.0
    return MultiSeries(v)


def test_single_window():
    out = score_windows(windows_to_clouds(_series(0), 2000, 1), seed=0)
    assert len(out) == 1 and out[0].window_index == 0


def test_null_windows_mostly_groupless():
    clean = 0
    for seed in range(10):
        out = score_windows(windows_to_clouds(_series(seed), 200, 200), seed=seed)
        clean += all(w.n_groups == 0 for w in out)
    assert clean >= 9


def test_pooled_finds_planted_window():
    hits = 0
    for seed in range(10):
        out = score_windows(windows_to_clouds(_series(seed, planted=True), 200, 200), seed=seed, pooled=True)
        scores = np.array([w.group_score for w in out])
        hits += int(np.argmax(scores) == 3 and np.sum(scores == scores.max()) == 1)
    assert hits >= 8


def test_deterministic():
    clouds = windows_to_clouds(_series(1, planted=True), 200, 200)
    assert score_windows(clouds, seed=5, pooled=True) == score_windows(clouds, seed=5, pooled=True)
    with pytest.raises(ValueError):
        score_windows([])
