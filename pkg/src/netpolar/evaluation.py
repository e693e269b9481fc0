"""Separating planted polarization from noise: ROC analysis and helpers.

Given scores for a labeled corpus of networks ("polarized" vs
"non_polarized"), these tools build ROC curves with exact tie handling,
slide an AUC window along a covariate (typically network size or mean
degree, the things a raw score confounds), and combine several scores
by min-max rescaling and averaging.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "CLASS_LABELS",
    "LabeledScore",
    "RocCurve",
    "roc",
    "roc_from_arrays",
    "windowed_auc",
    "minmax_rescale",
    "mean_combine",
    "read_labeled_csv",
]

CLASS_LABELS = ("polarized", "non_polarized")


@dataclass(frozen=True)
class LabeledScore:
    """One network's score with its class label and covariates."""

    network_id: str
    value: float
    label: str
    covariates: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.label not in CLASS_LABELS:
            raise ValueError(
                f"label must be one of {CLASS_LABELS}, got {self.label!r}"
            )


@dataclass(frozen=True)
class RocCurve:
    """ROC points from (0,0) to (1,1), its AUC, and the Gini 2*AUC - 1."""

    points: np.ndarray
    auc: float
    gini: float


def roc_from_arrays(values, positives) -> RocCurve:
    """ROC by descending-threshold sweep with tied values grouped.

    Tied scores enter the curve as a single point, which makes the
    trapezoidal AUC equal to the probability a random positive outranks
    a random negative, ties counting one half.
    """
    values = np.asarray(values, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    if values.shape != positives.shape or values.ndim != 1:
        raise ValueError("values and positives must be matching 1d arrays")
    n_pos = int(positives.sum())
    n_neg = positives.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative")
    order = np.argsort(-values, kind="stable")
    v = values[order]
    y = positives[order]
    group_end = np.flatnonzero(np.append(v[1:] != v[:-1], True))
    tp = np.cumsum(y)[group_end]
    fp = np.cumsum(~y)[group_end]
    points = np.concatenate(
        [np.zeros((1, 2)), np.stack([fp / n_neg, tp / n_pos], axis=1)]
    )
    auc = float(np.sum(np.diff(points[:, 0]) * (points[1:, 1] + points[:-1, 1]) / 2.0))
    return RocCurve(points=points, auc=auc, gini=2.0 * auc - 1.0)


def roc(labeled: Sequence[LabeledScore]) -> RocCurve:
    """ROC for "polarized" as the positive class."""
    values = np.array([s.value for s in labeled])
    positives = np.array([s.label == "polarized" for s in labeled])
    return roc_from_arrays(values, positives)


def windowed_auc(
    labeled: Sequence[LabeledScore], covariate: str, window: int = 100
) -> list[dict]:
    """AUC inside a window sliding along a covariate, step 1.

    Networks are sorted by the covariate (ties broken by network id,
    then input order, so the windows are reproducible). Windows holding
    a single class get ``auc: None``. Raises if the corpus is smaller
    than the window or the covariate is missing somewhere.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if len(labeled) < window:
        raise ValueError(
            f"corpus of {len(labeled)} networks is smaller than window={window}"
        )
    missing = [s.network_id for s in labeled if covariate not in s.covariates]
    if missing:
        raise ValueError(
            f"covariate {covariate!r} missing for: {', '.join(missing[:5])}"
        )
    order = sorted(
        range(len(labeled)),
        key=lambda i: (labeled[i].covariates[covariate], labeled[i].network_id, i),
    )
    arranged = [labeled[i] for i in order]
    out = []
    for start in range(len(arranged) - window + 1):
        chunk = arranged[start : start + window]
        values = np.array([s.value for s in chunk])
        positives = np.array([s.label == "polarized" for s in chunk])
        n_pos = int(positives.sum())
        record = {
            "covariate_min": chunk[0].covariates[covariate],
            "covariate_max": chunk[-1].covariates[covariate],
            "n_pos": n_pos,
            "n_neg": window - n_pos,
        }
        if n_pos == 0 or n_pos == window:
            record["auc"] = None
        else:
            record["auc"] = roc_from_arrays(values, positives).auc
        out.append(record)
    return out


def minmax_rescale(
    columns: Mapping[str, np.ndarray],
) -> tuple[dict[str, np.ndarray], tuple[str, ...]]:
    """Rescale each column to [0, 1] over the corpus; drop constants.

    Returns the rescaled columns and the tuple of dropped (zero-span)
    column names.
    """
    rescaled: dict[str, np.ndarray] = {}
    dropped = []
    for name, col in columns.items():
        arr = np.asarray(col, dtype=np.float64)
        span = float(arr.max() - arr.min()) if arr.size else 0.0
        if span == 0.0:
            dropped.append(name)
            continue
        rescaled[name] = (arr - arr.min()) / span
    return rescaled, tuple(dropped)


def mean_combine(
    columns: Mapping[str, np.ndarray],
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Average min-max rescaled score columns into one combined score.

    Constant columns carry no ranking information at this corpus size
    and are dropped (reported in the second return value). Raises when
    nothing survives or column lengths disagree.
    """
    if not columns:
        raise ValueError("no score columns to combine")
    lengths = {len(np.asarray(c)) for c in columns.values()}
    if len(lengths) != 1:
        raise ValueError("score columns differ in length")
    rescaled, dropped = minmax_rescale(columns)
    if not rescaled:
        raise ValueError("all score columns are constant; nothing to combine")
    stack = np.stack(list(rescaled.values()), axis=0)
    return stack.mean(axis=0), dropped


def read_labeled_csv(path) -> tuple[list[str], list[str], dict[str, np.ndarray]]:
    """Read a labeled corpus CSV: network_id, label, numeric columns.

    Returns (network_ids, labels, columns); every column beyond the
    first two is parsed as float64. Raises on malformed rows, unknown
    class labels or non-numeric cells.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "network_id" or header[1] != "label":
            raise ValueError(
                f"{path}: header must start with network_id,label and have "
                "at least one score column"
            )
        names = header[2:]
        ids: list[str] = []
        labels: list[str] = []
        cols: list[list[float]] = [[] for _ in names]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            if row[1] not in CLASS_LABELS:
                raise ValueError(
                    f"{path}:{lineno}: label must be one of {CLASS_LABELS}"
                )
            ids.append(row[0])
            labels.append(row[1])
            for k, cell in enumerate(row[2:]):
                try:
                    cols[k].append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: non-numeric value {cell!r} "
                        f"in column {names[k]}"
                    ) from None
    return ids, labels, {
        name: np.asarray(col, dtype=np.float64) for name, col in zip(names, cols)
    }
