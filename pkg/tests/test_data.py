import hashlib

import numpy as np
import pytest

from lsvi.data import load_dataset, synth_dataset, write_dataset_csv
from lsvi.exceptions import DataError

# frozen after first generation; guards the synthetic-data RNG contract
GOLDEN_LINEAR_100x5_SEED1 = "996eb651407abba7ab08d37193f99ec667b8f8ed71d85e5ebe1b14a56b9653a0"


def dataset_digest(data):
    h = hashlib.sha256()
    h.update(np.round(data.X, 12).tobytes())
    h.update(np.round(data.y, 12).tobytes())
    return h.hexdigest()


class TestLoadDataset:
    def test_toy_csv_shape(self, tmp_path):
        path = tmp_path / "toy.csv"
        path.write_text("1.0,2.0,3.0\n4.0,5.0,6.0\n7.0,8.0,9.0\n")
        data = load_dataset(path, "linear")
        assert data.n == 3 and data.dim == 2
        assert np.array_equal(data.y, np.array([3.0, 6.0, 9.0]))

    def test_zero_one_labels_coerced(self, tmp_path):
        path = tmp_path / "logit.csv"
        path.write_text("0.5,1\n-0.5,0\n1.5,1\n")
        data = load_dataset(path, "logistic")
        assert np.array_equal(data.y, np.array([1.0, -1.0, 1.0]))

    def test_plus_minus_labels_kept(self, tmp_path):
        path = tmp_path / "logit.csv"
        path.write_text("0.5,1\n-0.5,-1\n")
        data = load_dataset(path, "logistic")
        assert np.array_equal(data.y, np.array([1.0, -1.0]))

    def test_bad_labels_rejected(self, tmp_path):
        path = tmp_path / "logit.csv"
        path.write_text("0.5,2\n-0.5,0\n")
        with pytest.raises(DataError, match="coded"):
            load_dataset(path, "logistic")

    def test_string_cell_names_location(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0,oops\n")
        with pytest.raises(DataError, match=r"row 2, column 2"):
            load_dataset(path, "linear")

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(DataError, match="columns"):
            load_dataset(path, "linear")

    def test_standardize_flag(self, tmp_path):
        path = tmp_path / "data.csv"
        rng = np.random.default_rng(0)
        X = rng.normal(loc=5.0, scale=3.0, size=(50, 2))
        y = rng.normal(size=50)
        lines = ["%r,%r,%r" % (float(a), float(b), float(t)) for (a, b), t in zip(X, y)]
        path.write_text("\n".join(lines) + "\n")
        data = load_dataset(path, "linear", standardize=True)
        assert np.allclose(data.X.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(data.X.std(axis=0), 1.0, atol=1e-12)
        # the response is untouched
        assert np.allclose(data.y, y)


class TestSynthDataset:
    def test_deterministic(self):
        a = synth_dataset("linear", 20, 3, seed=9)
        b = synth_dataset("linear", 20, 3, seed=9)
        assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)

    def test_golden_checksum(self):
        data = synth_dataset("linear", 100, 5, seed=1)
        assert dataset_digest(data) == GOLDEN_LINEAR_100x5_SEED1

    def test_minimal_shape(self):
        data = synth_dataset("linear", 1, 1, seed=0)
        assert data.X.shape == (1, 1) and data.y.shape == (1,)

    def test_logistic_labels(self):
        data = synth_dataset("logistic", 200, 4, seed=2)
        assert set(np.unique(data.y)) <= {-1.0, 1.0}

    def test_validation(self):
        with pytest.raises(DataError):
            synth_dataset("linear", 0, 3, seed=0)
        with pytest.raises(DataError):
            synth_dataset("poisson", 5, 3, seed=0)


class TestRoundTrip:
    @pytest.mark.parametrize("kind", ["linear", "logistic"])
    def test_write_then_load(self, tmp_path, kind):
        data = synth_dataset(kind, 12, 3, seed=4)
        path = tmp_path / "out.csv"
        write_dataset_csv(data, path)
        back = load_dataset(path, kind)
        assert np.array_equal(back.X, data.X)
        assert np.array_equal(back.y, data.y)
