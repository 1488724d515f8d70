"""
This module defines the `Dataset` container shared by the models,
the simulator and the estimator, and its line-oriented CSV format.

Classes
-------
- Dataset: contaminated sample with optional hidden Good/Bad labels.

Functions
---------
- export_to_csv: write a Dataset, one sample per line.
- load_from_csv: read a file written by `export_to_csv`.

Notes
-----
- Labels are diagnostic only. The estimator never reads them; the
  oracle_weights baseline, the condition checker and the replay
  diagnostics do.
- `indices` records each sample's position in the dataset it was
  drawn from, so pruned subsets can be traced back.
"""
import csv
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InputError


@dataclass
class Dataset:
    """
    Samples x_i (and responses y_i for regression-type models).

    Attributes:
        x (np.ndarray): (n, d) design or observation matrix.
        y (np.ndarray, optional): (n,) responses; None for mean and
            covariance models.
        labels (np.ndarray, optional): (n,) booleans, True for samples
            drawn from P (Good), False for samples drawn from Q (Bad).
        epsilon (float): Contamination fraction in [0, 1/2).
        seed (int): Seed the data was generated with.
        indices (np.ndarray, optional): Original positions of the samples.
    """
    x: np.ndarray
    y: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None
    epsilon: float = 0.0
    seed: int = 0
    indices: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        n = self.x.shape[0]
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=float).reshape(-1)
            if self.y.shape[0] != n:
                raise InputError(f"y has {self.y.shape[0]} entries, x has {n} rows")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=bool).reshape(-1)
            if self.labels.shape[0] != n:
                raise InputError(f"labels have {self.labels.shape[0]} entries, x has {n} rows")
        if not 0 <= self.epsilon < 0.5:
            raise InputError(f"epsilon must lie in [0, 1/2), got {self.epsilon}")
        if self.indices is None:
            self.indices = np.arange(n)
        else:
            self.indices = np.asarray(self.indices, dtype=int).reshape(-1)

    def __len__(self):
        return self.x.shape[0]

    def __getitem__(self, i):
        """Raw observation: x_i, or (y_i, x_i) for response models."""
        if self.y is None:
            return self.x[i]
        return self.y[i], self.x[i]

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]

    @property
    def has_labels(self):
        return self.labels is not None

    def subset(self, mask):
        """Rows selected by a boolean mask or index array, order preserved."""
        mask = np.asarray(mask)
        if mask.dtype == bool:
            mask = np.flatnonzero(mask)
        return replace(
            self,
            x=self.x[mask].copy(),
            y=None if self.y is None else self.y[mask].copy(),
            labels=None if self.labels is None else self.labels[mask].copy(),
            indices=self.indices[mask].copy(),
        )

    def split(self, parts):
        """Split into `parts` consecutive batches of equal size (remainder dropped)."""
        size = self.n // parts
        if size == 0:
            raise InputError(f"cannot split {self.n} samples into {parts} batches")
        return [self.subset(np.arange(k * size, (k + 1) * size)) for k in range(parts)]


def export_to_csv(dataset, filename, with_labels=False):
    """
    Export a Dataset to a CSV file, one sample per line.

    Columns are `y` (response models only), `x0 ... x{d-1}` and, when
    `with_labels` is set, `label` (1 Good, 0 Bad). Floats are written
    with 17 significant digits so a reload is exact.

    Raises:
        InputError: If labels are requested but the dataset has none.
    """
    if with_labels and not dataset.has_labels:
        raise InputError("dataset carries no labels to export")

    header = (['y'] if dataset.y is not None else []) + [f'x{j}' for j in range(dataset.d)]
    if with_labels:
        header.append('label')

    with open(filename, mode='w', newline='') as csvfile:
        writer = csv.writer(csvfile, lineterminator='\n')
        writer.writerow(header)
        for i in range(dataset.n):
            row = [] if dataset.y is None else [f'{dataset.y[i]:.17g}']
            row.extend(f'{v:.17g}' for v in dataset.x[i])
            if with_labels:
                row.append('1' if dataset.labels[i] else '0')
            writer.writerow(row)


def load_from_csv(filename, epsilon=0.0, seed=0):
    """Load a Dataset written by `export_to_csv`."""
    with open(filename, mode='r', newline='') as csvfile:
        reader = csv.reader(csvfile)
        header = next(reader)
        rows = [row for row in reader if row]

    if not rows:
        raise InputError(f"{filename} holds no samples")
    table = np.array(rows, dtype=float)
    has_y = header[0] == 'y'
    has_labels = header[-1] == 'label'

    start = 1 if has_y else 0
    stop = -1 if has_labels else None
    return Dataset(
        x=table[:, start:stop],
        y=table[:, 0] if has_y else None,
        labels=table[:, -1].astype(bool) if has_labels else None,
        epsilon=epsilon,
        seed=seed,
    )
