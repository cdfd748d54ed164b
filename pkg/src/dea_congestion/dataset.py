"""Observed input/output data for a set of decision making units (DMUs)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    """``X`` is m x n (inputs by DMU), ``Y`` is s x n (outputs by DMU)."""

    X: np.ndarray
    Y: np.ndarray
    labels: tuple[str, ...] = ()
    input_names: tuple[str, ...] = ()
    output_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.atleast_2d(np.array(self.X, dtype=float))
        Y = np.atleast_2d(np.array(self.Y, dtype=float))
        if X.shape[1] != Y.shape[1]:
            raise DatasetError(f"X has {X.shape[1]} DMUs but Y has {Y.shape[1]}")
        m, n = X.shape
        s = Y.shape[0]
        if n < 1 or m < 1 or s < 1:
            raise DatasetError("need at least one DMU, one input and one output")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DatasetError("inputs and outputs must be finite")
        if np.any(X < 0) or np.any(Y < 0):
            raise DatasetError("inputs and outputs must be nonnegative")
        for j in range(n):
            if not (X[:, j].max() > 0 and Y[:, j].max() > 0):
                raise DatasetError(f"DMU {j} needs a positive input and a positive output")
        labels = tuple(self.labels) or tuple(f"DMU{j + 1}" for j in range(n))
        if len(labels) != n:
            raise DatasetError("label count != DMU count")
        if len(set(labels)) != n:
            raise DatasetError("DMU labels must be unique")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "input_names", tuple(self.input_names) or tuple(f"x{i + 1}" for i in range(m)))
        object.__setattr__(self, "output_names", tuple(self.output_names) or tuple(f"y{r + 1}" for r in range(s)))

    @classmethod
    def from_rows(cls, inputs: Sequence[Sequence[float]], outputs: Sequence[Sequence[float]],
                  labels: Sequence[str] = ()) -> "Dataset":
        """Build from per-DMU rows (n x m inputs, n x s outputs)."""
        return cls(np.asarray(inputs, dtype=float).reshape(len(inputs), -1).T,
                   np.asarray(outputs, dtype=float).reshape(len(outputs), -1).T,
                   tuple(labels))

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def s(self) -> int:
        return self.Y.shape[0]

    def x(self, j: int) -> np.ndarray:
        return self.X[:, j]

    def y(self, j: int) -> np.ndarray:
        return self.Y[:, j]

    def check_index(self, j: int) -> int:
        if not 0 <= j < self.n:
            raise IndexError(f"DMU index {j} out of range for {self.n} DMUs")
        return j

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no DMU labelled {label!r}") from None

    def replace_outputs(self, j: int, y: np.ndarray) -> "Dataset":
        Y = self.Y.copy()
        Y[:, j] = y
        return Dataset(self.X, Y, self.labels, self.input_names, self.output_names)
