"""Observation datasets: predictor durations (minutes) and production capacity (trays).

The canonical on-disk format is a UTF-8 CSV whose header is ``x1,...,xm,y``:
every column but the last is a predictor, the last is the response.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed or inconsistent observation data."""


@dataclass(frozen=True, eq=False)
class ObservationDataset:
    """Immutable table of predictor times ``X`` (n x m) and capacities ``y`` (n,).

    Construction validates shapes and values but does not enforce a minimum
    row count; use :meth:`require_fit_rows` where a regression must be possible.
    """

    predictor_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    response_name: str = "y"
    name: str = field(default="dataset", compare=False)

    def __post_init__(self):
        names = tuple(str(s) for s in self.predictor_names)
        X = np.array(self.X, dtype=float, copy=True)
        y = np.array(self.y, dtype=float, copy=True)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or y.ndim != 1:
            raise DatasetError("X must be 2-D and y 1-D")
        m = X.shape[1]
        if m < 1:
            raise DatasetError("at least one predictor is required")
        if len(names) != m:
            raise DatasetError(
                f"{len(names)} predictor names given for {m} predictor columns"
            )
        if X.shape[0] != y.shape[0]:
            raise DatasetError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if X.shape[0] < 1:
            raise DatasetError("dataset has no rows")
        if not np.all(np.isfinite(X)):
            raise DatasetError("predictor values must be finite")
        if np.any(X < 0):
            i, j = np.argwhere(X < 0)[0]
            raise DatasetError(
                f"negative duration at row {i + 1}, column {names[j]!r}"
            )
        if not np.all(np.isfinite(y)):
            raise DatasetError("response values must be finite")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "predictor_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.predictor_names + (self.response_name,)

    def design(self) -> np.ndarray:
        """Design matrix with a leading column of ones (intercept first)."""
        return np.column_stack([np.ones(self.n), self.X])

    def predictor_means(self) -> np.ndarray:
        return self.X.mean(axis=0)

    def require_fit_rows(self) -> None:
        if self.n < self.m + 2:
            raise DatasetError(
                f"need at least m + 2 = {self.m + 2} rows to fit an intercept "
                f"model, got {self.n}"
            )

    def __eq__(self, other):
        if not isinstance(other, ObservationDataset):
            return NotImplemented
        return (
            self.columns == other.columns
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    __hash__ = None

    def describe(self) -> dict:
        """Summary document: name, m, n and per-column mean/sd."""
        table = np.column_stack([self.X, self.y])
        sd = table.std(axis=0, ddof=1) if self.n > 1 else np.zeros(table.shape[1])
        return {
            "name": self.name,
            "m": self.m,
            "n": self.n,
            "columns": [
                {"name": c, "mean": float(mu), "sd": float(s)}
                for c, mu, s in zip(self.columns, table.mean(axis=0), sd)
            ],
        }


def load_csv(path, name: str | None = None) -> ObservationDataset:
    """Read a dataset CSV. The last header column is the response."""
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        if len(header) < 2 or any(h == "" for h in header):
            raise DatasetError(
                f"{path}: header needs at least one predictor and a response column"
            )
        rows = []
        for lineno, record in enumerate(reader, start=1):
            if not record or all(c.strip() == "" for c in record):
                continue
            if len(record) != len(header):
                raise DatasetError(
                    f"{path}: row {lineno} has {len(record)} cells, "
                    f"expected {len(header)}"
                )
            values = []
            for col, cell in zip(header, record):
                text = cell.strip()
                if text == "":
                    raise DatasetError(f"{path}: missing value at row {lineno}, column {col!r}")
                try:
                    v = float(text)
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-numeric value {text!r} at row {lineno}, column {col!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DatasetError(
                        f"{path}: non-finite value at row {lineno}, column {col!r}"
                    )
                values.append(v)
            rows.append(values)
    m = len(header) - 1
    if len(rows) < m + 2:
        raise DatasetError(
            f"{path}: {len(rows)} data rows, need at least m + 2 = {m + 2}"
        )
    table = np.asarray(rows, dtype=float)
    return ObservationDataset(
        predictor_names=tuple(header[:-1]),
        X=table[:, :-1],
        y=table[:, -1],
        response_name=header[-1],
        name=name or path.stem,
    )


def write_csv(data: ObservationDataset, path) -> None:
    # repr() of a float is the shortest string that round-trips exactly
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(data.columns)
        for xs, yv in zip(data.X, data.y):
            writer.writerow([repr(float(v)) for v in xs] + [repr(float(yv))])


def write_summary(data: ObservationDataset, path) -> None:
    Path(path).write_text(json.dumps(data.describe(), indent=2) + "\n", encoding="utf-8")


def from_arrays(
    X, y, predictor_names: Sequence[str] | None = None, name: str = "dataset"
) -> ObservationDataset:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if predictor_names is None:
        predictor_names = [f"x{j + 1}" for j in range(X.shape[1])]
    return ObservationDataset(tuple(predictor_names), X, np.asarray(y, dtype=float), name=name)


def bootstrap_resample(
    data: ObservationDataset, size: int, seed=None
) -> ObservationDataset:
    """Draw ``size`` rows uniformly with replacement.

    ``seed`` may be an int, a ``numpy.random.SeedSequence`` or a ``Generator``.
    """
    if size < data.m + 2:
        raise DatasetError(f"bootstrap size {size} is below m + 2 = {data.m + 2}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, data.n, size=size)
    return ObservationDataset(
        data.predictor_names, data.X[idx], data.y[idx], data.response_name, data.name
    )
