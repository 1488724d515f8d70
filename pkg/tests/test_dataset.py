import numpy as np
import pytest

from robsparse.dataset import Dataset, export_to_csv, load_from_csv
from robsparse.errors import InputError


def _dataset(with_y=True):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((6, 3))
    y = rng.standard_normal(6) if with_y else None
    labels = np.array([True, True, False, True, False, True])
    return Dataset(x=x, y=y, labels=labels, epsilon=0.2, seed=5)


def test_csv_reload_is_exact(tmp_path):
    data = _dataset()
    path = tmp_path / 'data.csv'
    export_to_csv(data, path, with_labels=True)
    loaded = load_from_csv(path, epsilon=0.2, seed=5)
    np.testing.assert_array_equal(loaded.x, data.x)
    np.testing.assert_array_equal(loaded.y, data.y)
    np.testing.assert_array_equal(loaded.labels, data.labels)
    assert path.read_text().splitlines()[0] == 'y,x0,x1,x2,label'


def test_csv_without_labels_or_response(tmp_path):
    data = _dataset(with_y=False)
    path = tmp_path / 'data.csv'
    export_to_csv(data, path)
    loaded = load_from_csv(path)
    assert loaded.y is None
    assert loaded.labels is None
    np.testing.assert_array_equal(loaded.x, data.x)


def test_export_labels_requires_labels(tmp_path):
    with pytest.raises(InputError):
        export_to_csv(Dataset(x=np.zeros((2, 2))), tmp_path / 'x.csv', with_labels=True)


def test_empty_file_is_rejected(tmp_path):
    path = tmp_path / 'empty.csv'
    path.write_text('x0,x1\n')
    with pytest.raises(InputError):
        load_from_csv(path)


def test_subset_and_split():
    data = _dataset()
    sub = data.subset(data.labels)
    assert sub.n == 4
    np.testing.assert_array_equal(sub.indices, [0, 1, 3, 5])
    assert sub[0][0] == data.y[0]

    batches = data.split(4)
    assert [b.n for b in batches] == [1, 1, 1, 1]
    np.testing.assert_array_equal(batches[3].indices, [3])
    with pytest.raises(InputError):
        data.split(7)


def test_validation():
    with pytest.raises(InputError):
        Dataset(x=np.zeros((3, 2)), epsilon=0.5)
    with pytest.raises(InputError):
        Dataset(x=np.zeros((3, 2)), y=[1.0, 2.0])
    with pytest.raises(InputError):
        Dataset(x=np.zeros((3, 2)), labels=[True])
