"""Pixel classifiers and classification accuracy metrics.

Classifiers are pluggable: the built-ins are a nearest-centroid rule and a
k-nearest-neighbour vote, and any callable (train_x, train_y, all_x) ->
predicted labels can be passed in their place.  Training uses the split's
training pixels; predictions are produced for every pixel, labeled or not.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput

DEFAULT_KNN_K = 5
_PREDICT_CHUNK = 4096


@dataclass
class LabelField:
    """Per-pixel class ids on the image grid: 0 = unlabeled, classes 1..C."""

    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 2:
            raise ValueError("labels must be a 2-d raster")
        if (self.labels < 0).any():
            raise ValueError("labels must be non-negative")

    @property
    def shape(self):
        return self.labels.shape

    @property
    def n_classes(self):
        return int(self.labels.max())


@dataclass
class TrainSplit:
    """Disjoint per-pixel training and test masks over the labeled pixels."""

    train_mask: np.ndarray
    test_mask: np.ndarray
    seed: int
    percent: float


def split(labels, percent, seed):
    """Draw max(1, ceil(percent * n_c)) training pixels per class, uniformly
    without replacement; the remaining labeled pixels become test pixels."""
    if not 0.0 < percent < 1.0:
        raise DegenerateInput("percent must lie strictly between 0 and 1")
    flat = labels.labels.ravel()
    n_classes = labels.n_classes
    if n_classes < 2:
        raise DegenerateInput("need at least two classes to split")
    rng = np.random.default_rng(seed)
    train = np.zeros(flat.size, dtype=bool)
    for c in range(1, n_classes + 1):
        idx = np.flatnonzero(flat == c)
        if idx.size == 0:
            raise DegenerateInput(f"class {c} has no labeled pixels")
        # The 1e-9 slack keeps exact products (e.g. 5% of 20) from being
        # pushed over the next integer by float rounding.
        n_train = max(1, math.ceil(percent * idx.size - 1e-9))
        n_train = min(n_train, idx.size)
        train[rng.choice(idx, size=n_train, replace=False)] = True
    test = (flat > 0) & ~train
    shape = labels.shape
    return TrainSplit(train.reshape(shape), test.reshape(shape), seed, percent)


def _nearest_centroid(train_x, train_y, all_x):
    classes = np.unique(train_y)
    centroids = np.stack([train_x[train_y == c].mean(axis=0) for c in classes])
    pred = np.empty(all_x.shape[0], dtype=np.int64)
    for start in range(0, all_x.shape[0], _PREDICT_CHUNK):
        chunk = all_x[start : start + _PREDICT_CHUNK]
        d2 = (
            np.sum(chunk**2, axis=1)[:, None]
            - 2.0 * chunk @ centroids.T
            + np.sum(centroids**2, axis=1)[None, :]
        )
        pred[start : start + chunk.shape[0]] = classes[np.argmin(d2, axis=1)]
    return pred


def _knn(train_x, train_y, all_x, k):
    k = min(k, train_x.shape[0])
    n_classes = int(train_y.max())
    pred = np.empty(all_x.shape[0], dtype=np.int64)
    sq_train = np.sum(train_x**2, axis=1)
    for start in range(0, all_x.shape[0], _PREDICT_CHUNK):
        chunk = all_x[start : start + _PREDICT_CHUNK]
        d2 = np.sum(chunk**2, axis=1)[:, None] - 2.0 * chunk @ train_x.T + sq_train
        # Stable sort: equidistant neighbours resolve by training index.
        nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
        votes = np.zeros((chunk.shape[0], n_classes + 1), dtype=np.int64)
        np.add.at(votes, (np.arange(chunk.shape[0])[:, None], train_y[nn]), 1)
        # argmax returns the first maximum, i.e. the smallest class id on ties.
        pred[start : start + chunk.shape[0]] = np.argmax(votes[:, 1:], axis=1) + 1
    return pred


def train_predict(features, tsplit, labels, kind="nearest-centroid", k=DEFAULT_KNN_K):
    """Train on the split's training pixels and predict a class for every
    pixel.

    `features` is the bands x pixels matrix; `kind` names a built-in
    ("nearest-centroid" or "knn") or is a callable
    (train_x, train_y, all_x) -> labels operating on pixels-as-rows.
    """
    all_x = np.asarray(features, dtype=np.float64).T
    flat = labels.labels.ravel()
    train_idx = np.flatnonzero(tsplit.train_mask.ravel())
    train_y = flat[train_idx]
    if train_y.size == 0:
        raise DegenerateInput("empty training mask")
    for c in range(1, labels.n_classes + 1):
        if not (train_y == c).any():
            raise DegenerateInput(f"class {c} has no training pixels")
    train_x = all_x[train_idx]
    if callable(kind):
        pred = np.asarray(kind(train_x, train_y, all_x), dtype=np.int64)
    elif kind == "nearest-centroid":
        pred = _nearest_centroid(train_x, train_y, all_x)
    elif kind == "knn":
        pred = _knn(train_x, train_y, all_x, k)
    else:
        raise ValueError(f"unknown classifier kind {kind!r}")
    return LabelField(pred.reshape(labels.shape))


@dataclass
class MetricsReport:
    """Confusion counts (rows = truth, cols = predicted, classes 1..C) with
    the derived accuracy summaries."""

    confusion: np.ndarray
    per_class: np.ndarray
    oa: float
    aa: float
    kappa: float

    def to_json_dict(self):
        return {
            "oa": self.oa,
            "aa": self.aa,
            "kappa": self.kappa,
            "per_class": [None if math.isnan(v) else v for v in self.per_class],
            "confusion": self.confusion.astype(int).tolist(),
        }


def metrics_from_confusion(confusion):
    """Overall/average accuracy and Cohen's kappa from a confusion matrix.

    Classes with no truth pixels get NaN per-class accuracy and are skipped
    by the average.  The degenerate chance-agreement case p_e = 1 maps to
    kappa = 1 for perfect agreement and 0 otherwise.
    """
    confusion = np.asarray(confusion, dtype=np.float64)
    total = confusion.sum()
    if total <= 0:
        raise DegenerateInput("empty confusion matrix")
    row = confusion.sum(axis=1)
    col = confusion.sum(axis=0)
    diag = np.diag(confusion)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(row > 0, diag / np.where(row > 0, row, 1), np.nan)
    oa = float(diag.sum() / total)
    aa = float(np.nanmean(per_class))
    p_e = float(row @ col) / (total * total)
    if p_e == 1.0:
        kappa = 1.0 if oa == 1.0 else 0.0
    else:
        kappa = (oa - p_e) / (1.0 - p_e)
    return MetricsReport(confusion, per_class, oa, aa, float(kappa))


def evaluate(predictions, truth, mask):
    """Score predictions against ground truth over the masked pixels."""
    mask = np.asarray(mask, dtype=bool)
    t = truth.labels[mask]
    p = predictions.labels[mask]
    if t.size == 0:
        raise DegenerateInput("empty evaluation mask")
    if (t < 1).any():
        raise DegenerateInput("evaluation mask includes unlabeled pixels")
    if (p < 1).any():
        raise DegenerateInput("predictions must be classes >= 1 on the mask")
    n_classes = int(max(t.max(), p.max()))
    confusion = np.bincount(
        (t - 1) * n_classes + (p - 1), minlength=n_classes * n_classes
    ).reshape(n_classes, n_classes)
    return metrics_from_confusion(confusion)
