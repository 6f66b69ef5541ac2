"""Train-fitted preprocessing: ordinal code mapping and column scaling.

All states are fitted on training rows only and applied unchanged to test
rows, so no test-partition statistic can reach a fitted model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ColumnMismatchError,
    NonIntegerCategoricalError,
    TooFewRowsError,
)
from .dataset import Dataset
from .schema import KIND_BINARY, KIND_CONTINUOUS, KIND_ORDINAL


@dataclass(frozen=True)
class ScalerState:
    """Per-column mean/stddev (sample, n−1) and min/max over the training rows.

    Constant columns are flagged and get a stddev substitute of 1 so a
    degenerate column rescales to zero instead of aborting a run.
    """

    columns: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    constant: np.ndarray

    def __post_init__(self):
        for name in ("mean", "std", "minimum", "maximum", "constant"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def fit_standardizer(train: Dataset, columns=None) -> ScalerState:
    """Fit per-column statistics over the training rows.

    columns defaults to the continuous feature columns of the schema.
    """
    if train.n < 2:
        raise TooFewRowsError("need at least 2 training rows to fit a scaler")
    if columns is None:
        columns = [
            c.name for c in train.schema.feature_columns if c.kind == KIND_CONTINUOUS
        ]
    columns = tuple(columns)
    idx = [train.schema.feature_index(name) for name in columns]
    block = train.rows[:, idx]
    mean = block.mean(axis=0)
    std = block.std(axis=0, ddof=1)
    constant = std == 0.0
    std = np.where(constant, 1.0, std)
    return ScalerState(
        columns, mean, std, block.min(axis=0), block.max(axis=0), constant
    )


def _state_indices(ds: Dataset, state: ScalerState) -> list[int]:
    missing = [c for c in state.columns if c not in ds.schema.feature_names]
    if missing:
        raise ColumnMismatchError(f"scaler columns absent from data: {missing}")
    return [ds.schema.feature_index(c) for c in state.columns]


def apply_standardizer(ds: Dataset, state: ScalerState) -> Dataset:
    """x → (x − mean) / stddev on the state's columns; others pass through."""
    idx = _state_indices(ds, state)
    rows = ds.rows.copy()
    rows[:, idx] = (rows[:, idx] - state.mean) / state.std
    return ds.with_rows(rows)


def apply_minmax(ds: Dataset, state: ScalerState) -> Dataset:
    """x → (x − min) / (max − min), clamped to [0, 1]; constant columns map to 0."""
    idx = _state_indices(ds, state)
    rows = ds.rows.copy()
    span = np.where(state.constant, 1.0, state.maximum - state.minimum)
    scaled = (rows[:, idx] - state.minimum) / span
    scaled = np.clip(scaled, 0.0, 1.0)
    scaled[:, state.constant] = 0.0
    rows[:, idx] = scaled
    return ds.with_rows(rows)


@dataclass(frozen=True)
class OrdinalEncoderState:
    """Sorted distinct training codes per encoded column (rank encoding)."""

    codes: dict[str, np.ndarray]

    def mapping(self, column: str) -> dict[int, int]:
        return {int(v): i for i, v in enumerate(self.codes[column])}


def encodable_columns(ds: Dataset) -> list[str]:
    return [
        c.name
        for c in ds.schema.feature_columns
        if c.kind in (KIND_ORDINAL, KIND_BINARY)
    ]


def fit_ordinal_encoder(train: Dataset, columns=None) -> OrdinalEncoderState:
    """Learn the distinct sorted codes of each ordinal/binary column."""
    if columns is None:
        columns = encodable_columns(train)
    codes = {}
    for name in columns:
        col = train.column(name)
        if not np.array_equal(col, np.round(col)):
            raise NonIntegerCategoricalError(name)
        codes[name] = np.unique(col)
    return OrdinalEncoderState(codes)


def encode_value(state: OrdinalEncoderState, column: str, value: float) -> int:
    """Rank of the nearest trained code (ties toward the lower code)."""
    codes = state.codes[column]
    pos = int(np.searchsorted(codes, value))
    if pos == 0:
        return 0
    if pos == len(codes):
        return len(codes) - 1
    below, above = codes[pos - 1], codes[pos]
    if value - below <= above - value:
        return pos - 1
    return pos


def apply_ordinal_encoder(ds: Dataset, state: OrdinalEncoderState) -> Dataset:
    """Map each encoded column's values to consecutive ranks 0..m−1.

    Values unseen at fit time map to the rank of the nearest trained code
    so a legitimate test split cannot abort a run.
    """
    rows = ds.rows.copy()
    for name, codes in state.codes.items():
        if name not in ds.schema.feature_names:
            raise ColumnMismatchError(f"encoded column absent from data: {name}")
        j = ds.schema.feature_index(name)
        col = rows[:, j]
        pos = np.clip(np.searchsorted(codes, col), 0, len(codes) - 1)
        below = codes[np.maximum(pos - 1, 0)]
        above = codes[pos]
        use_below = (pos > 0) & ((col - below) <= (above - col))
        rows[:, j] = np.where(use_below, pos - 1, pos)
    return ds.with_rows(rows)


def encode_ordinals(ds: Dataset) -> Dataset:
    """Fit-and-apply rank encoding on the dataset itself."""
    return apply_ordinal_encoder(ds, fit_ordinal_encoder(ds))
