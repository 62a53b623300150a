import math

import numpy as np
import pytest

from gen2out._random import generator, spawn
from gen2out.data import (
    FERN_TABLE,
    NAMED_IFS,
    SIERPINSKI_VERTICES,
    CsvError,
    DataMatrix,
    IfsSpec,
    balanced_blobs,
    biased_line,
    gen_gaussian_blobs,
    gen_ifs,
    http_like,
    http_membership,
    load_csv,
    save_csv,
    sierpinski,
    two_group_fixture,
    two_group_membership,
)


def test_spawn_is_stateless_and_position_dependent():
    a = spawn(7, 3)
    b = spawn(7, 3)
    assert [s.generate_state(2).tolist() for s in a] == [s.generate_state(2).tolist() for s in b]
    assert a[0].generate_state(2).tolist() != a[1].generate_state(2).tolist()


def test_seed_range_checked():
    with pytest.raises(ValueError):
        generator(-1)
    with pytest.raises(ValueError):
        generator(2**64)


def test_env_seed_is_default(monkeypatch):
    monkeypatch.setenv("GEN2OUT_SEED", "99")
    assert generator(None).random() == generator(99).random()


class TestDataMatrix:
    def test_shape_and_readonly(self):
        dm = DataMatrix(np.zeros((3, 2)))
        assert (dm.n, dm.m) == (3, 2)
        with pytest.raises(ValueError):
            dm.values[0, 0] = 1.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            DataMatrix(np.array([[1.0, np.nan]]))

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError):
            DataMatrix(np.zeros((2, 1)), labels=[0, 2])
        with pytest.raises(ValueError):
            DataMatrix(np.zeros((2, 1)), labels=[0])

    def test_empty_is_allowed(self):
        assert DataMatrix(np.empty((0, 3))).n == 0


class TestCsv:
    def test_plain_three_by_two(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3,4\n5,6\n")
        dm = load_csv(p)
        assert dm.shape == (3, 2) and dm.labels is None
        assert dm.values[2, 1] == 6.0

    def test_header_label_by_name(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("# comment\nf1,label,f2\n1,0,2\n3,1,4\n")
        dm = load_csv(p, label_column="label")
        assert dm.columns == ("f1", "f2")
        assert dm.labels.tolist() == [0, 1]
        assert dm.values.tolist() == [[1, 2], [3, 4]]

    def test_label_by_negative_index(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2,1\n3,4,0\n")
        assert load_csv(p, label_column=-1).labels.tolist() == [1, 0]

    def test_bad_cell_names_row_and_column(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("a,b\n1,2\n3,abc\n")
        with pytest.raises(CsvError, match=r"row 3, column 2.*'abc'"):
            load_csv(p)

    def test_label_outside_01(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3,5\n")
        with pytest.raises(CsvError, match="not 0 or 1"):
            load_csv(p, label_column=1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv")

    def test_ragged_row(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(CsvError, match="row 2"):
            load_csv(p)

    def test_round_trip_is_exact(self, tmp_path, rng):
        X = rng.standard_normal((20, 3))
        save_csv(tmp_path / "x.csv", X, header=["a", "b", "c"], comment='{"k": 1}')
        assert np.array_equal(load_csv(tmp_path / "x.csv").values, X)


class TestBlobs:
    def test_zero_std_is_the_center(self):
        dm = gen_gaussian_blobs([[1.0, -2.0]], [0.0], [5], seed=1)
        assert np.all(dm.values == [1.0, -2.0])

    def test_counts(self):
        assert gen_gaussian_blobs([[0, 0], [5, 5]], [1, 1], [100, 200], seed=1).n == 300

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            gen_gaussian_blobs([[0, 0]], [1, 1], [10], seed=1)

    def test_law_of_large_numbers(self):
        dm = gen_gaussian_blobs([[3.0, -1.0]], [2.0], [10000], seed=4)
        assert np.all(np.abs(dm.values.mean(axis=0) - [3.0, -1.0]) < 0.05)
        assert np.all(np.abs(dm.values.std(axis=0) / 2.0 - 1.0) < 0.05)

    def test_deterministic(self):
        a = gen_gaussian_blobs([[0, 0], [1, 1]], [1, 2], [10, 10], seed=9)
        b = gen_gaussian_blobs([[0, 0], [1, 1]], [1, 2], [10, 10], seed=9)
        assert np.array_equal(a.values, b.values)


class TestIfs:
    def test_identity_map_stays_at_origin(self):
        spec = IfsSpec((((1.0, 0.0), (0.0, 1.0)),), ((0.0, 0.0),), (1.0,))
        assert np.all(gen_ifs(spec, 50, seed=0).values == 0.0)

    def test_biased_line_fraction(self):
        x = gen_ifs(biased_line(0.8), 100000, seed=2).values
        assert abs(np.mean(x[:, 0] < 0.5) - 0.8) <= 0.01
        assert np.all(x[:, 1] == 0.0)

    def test_sierpinski_inside_hull(self):
        pts = gen_ifs(sierpinski(), 10000, seed=3).values
        (ax, ay), (bx, by), (cx, cy) = SIERPINSKI_VERTICES
        # barycentric coordinates must all be >= 0
        det = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy)
        l1 = ((by - cy) * (pts[:, 0] - cx) + (cx - bx) * (pts[:, 1] - cy)) / det
        l2 = ((cy - ay) * (pts[:, 0] - cx) + (ax - cx) * (pts[:, 1] - cy)) / det
        l3 = 1 - l1 - l2
        assert min(l1.min(), l2.min(), l3.min()) >= -1e-12

    @pytest.mark.parametrize("name", sorted(NAMED_IFS))
    def test_named_fractals_finite_and_deterministic(self, name):
        a = gen_ifs(NAMED_IFS[name](), 2000, seed=5).values
        b = gen_ifs(NAMED_IFS[name](), 2000, seed=5).values
        assert a.shape == (2000, 2) and np.all(np.isfinite(a))
        assert np.array_equal(a, b)

    def test_fern_table_weights(self):
        assert math.isclose(sum(r[2] for r in FERN_TABLE), 1.0)

    def test_weights_validated(self):
        with pytest.raises(ValueError, match="sum to 1"):
            IfsSpec((((0.5, 0), (0, 0.5)),), ((0, 0),), (0.9,))
        with pytest.raises(ValueError):
            IfsSpec((), (), ())

    def test_spec_dict_round_trip(self):
        spec = sierpinski((0.6, 0.3, 0.1))
        assert IfsSpec.from_dict(spec.as_dict()) == spec

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            gen_ifs(sierpinski(), 0, seed=0)


def test_fixture_shapes():
    tg = two_group_fixture(seed=0, n_background=500)
    assert tg.shape == (500 + 3000 + 20, 2)
    assert np.array_equal(tg.labels, (two_group_membership(500) > 0).astype(int))
    assert balanced_blobs(seed=0, per_blob=50).shape == (500, 2)
    h = http_like(seed=0, n_background=100)
    assert h.shape == (1300, 3) and h.labels.sum() == 1200
    assert np.bincount(http_membership(100)).tolist() == [100, 300, 400, 500]
