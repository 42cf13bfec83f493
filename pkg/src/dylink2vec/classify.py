"""Supervised scorers for embedded node pairs.

AdaBoost.M1 over decision stumps is the main classifier; a plain logistic
regression trained by gradient descent serves as a cross-check. Both map a
feature matrix to real-valued link scores where higher means more likely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .autoenc import sigmoid

ENSEMBLE_HEADER = "dylink2vec-stumps v1"
EPS_CLAMP = 1e-10


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    pair_ids: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.features, dtype=float))
        y = np.asarray(self.labels).astype(np.int64).ravel()
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if not self.pair_ids:
            object.__setattr__(self, "pair_ids", [(-1, -1)] * len(y))
        if not (len(X) == len(y) == len(self.pair_ids)):
            raise ValueError(
                f"row count mismatch: {len(X)} features, {len(y)} labels, "
                f"{len(self.pair_ids)} pair ids")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def check_two_classes(self):
        if len(np.unique(self.labels)) < 2:
            raise ValueError("training data must contain both classes")


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float
    polarity: int  # +1: predict positive above threshold, -1: below
    weight: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        above = X[:, self.feature] > self.threshold
        return np.where(above, self.polarity, -self.polarity).astype(float)


@dataclass(frozen=True)
class StumpEnsemble:
    stumps: tuple[Stump, ...]
    n_features: int
    errors: tuple[float, ...] = ()

    def __post_init__(self):
        for s in self.stumps:
            if not 0 <= s.feature < self.n_features:
                raise ValueError(f"stump feature {s.feature} outside [0, {self.n_features})")
            if not (math.isfinite(s.weight) and math.isfinite(s.threshold)):
                raise ValueError("stump weights and thresholds must be finite")

    @property
    def rounds(self) -> int:
        return len(self.stumps)

    def error_bound(self) -> float:
        """Product of ``2 * sqrt(eps_m * (1 - eps_m))`` over the fitted rounds."""
        return float(np.prod([2.0 * math.sqrt(e * (1.0 - e)) for e in self.errors]))


class _SortedColumns:
    """Per-feature sort order and midpoint cut positions, fixed across rounds."""

    def __init__(self, X: np.ndarray):
        self.order = np.argsort(X, axis=0, kind="stable")
        self.xs = np.take_along_axis(X, self.order, axis=0)
        # cut after row i of a column when the next sorted value is larger
        self.valid = np.diff(self.xs, axis=0) > 0


def _best_stump(X: np.ndarray, ys: np.ndarray, w: np.ndarray, cols: _SortedColumns | None = None):
    """Weighted-error minimising stump over all features and midpoint thresholds.

    Ties go to the lowest feature index, then the lowest threshold, then
    polarity +1.
    """
    cols = cols or _SortedColumns(X)
    if not cols.valid.any():
        return (math.inf, -1, 0.0, 1)
    total = w.sum()
    wo = w[cols.order]
    pos = ys[cols.order] > 0
    wpos = np.cumsum(np.where(pos, wo, 0.0), axis=0)
    wneg = np.cumsum(np.where(pos, 0.0, wo), axis=0)
    # polarity +1 predicts negative for x <= thr: errors are positives
    # at or below the cut plus negatives above it
    err_plus = wpos[:-1] + (wneg[-1] - wneg[:-1])
    err_minus = total - err_plus
    errs = np.where(cols.valid, np.minimum(err_plus, err_minus), math.inf)
    rows = np.argmin(errs, axis=0)
    col_best = errs[rows, np.arange(errs.shape[1])]
    j = int(np.argmin(col_best))
    i = int(rows[j])
    thr = 0.5 * (cols.xs[i, j] + cols.xs[i + 1, j])
    pol = 1 if err_plus[i, j] <= err_minus[i, j] else -1
    return (float(errs[i, j]), j, float(thr), pol)


def train_adaboost(data: LabeledDataset, rounds: int = 100) -> StumpEnsemble:
    """AdaBoost.M1 with decision stumps.

    Stops early when the best stump's weighted error reaches 0.5 (the stump
    is discarded) or 0 (the stump is kept and boosting ends).
    """
    data.check_two_classes()
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    X = data.features
    cols = _SortedColumns(X)
    ys = np.where(data.labels > 0, 1.0, -1.0)
    w = np.full(len(ys), 1.0 / len(ys))
    stumps: list[Stump] = []
    errors: list[float] = []
    for _ in range(rounds):
        err, j, thr, pol = _best_stump(X, ys, w, cols)
        if j < 0 or err >= 0.5:
            break
        eps = min(max(err, EPS_CLAMP), 1.0 - EPS_CLAMP)
        alpha = 0.5 * math.log((1.0 - eps) / eps)
        stump = Stump(j, thr, pol, alpha)
        stumps.append(stump)
        errors.append(eps)
        if err <= 0.0:
            break
        w = w * np.exp(-alpha * ys * stump.predict(X))
        w /= w.sum()
    return StumpEnsemble(tuple(stumps), X.shape[1], tuple(errors))


def margin(model: StumpEnsemble, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ValueError(f"feature width {X.shape[1]} does not match training width {model.n_features}")
    total = sum(s.weight for s in model.stumps)
    if not model.stumps or total == 0:
        return np.zeros(len(X))
    votes = np.zeros(len(X))
    for s in model.stumps:
        votes += s.weight * s.predict(X)
    return votes / total


def score(model: StumpEnsemble, X) -> np.ndarray:
    """Normalised ensemble margin mapped to ``[0, 1]``."""
    return (margin(model, X) + 1.0) / 2.0


def training_error(model: StumpEnsemble, data: LabeledDataset) -> float:
    ys = np.where(data.labels > 0, 1.0, -1.0)
    return float(np.mean(np.sign(margin(model, data.features)) != ys))


def format_ensemble(model: StumpEnsemble) -> str:
    lines = [ENSEMBLE_HEADER, f"{model.n_features} {model.rounds}"]
    for s, e in zip(model.stumps, model.errors):
        lines.append(f"{s.feature} {s.threshold:.17g} {s.polarity} {s.weight:.17g} {e:.17g}")
    return "\n".join(lines) + "\n"


def parse_ensemble(text: str) -> StumpEnsemble:
    lines = text.splitlines()
    if lines[0].strip() != ENSEMBLE_HEADER:
        raise ValueError(f"not a stump ensemble file (expected {ENSEMBLE_HEADER!r})")
    d, m = (int(x) for x in lines[1].split())
    if len(lines) - 2 != m:
        raise ValueError(f"header announces {m} stumps, found {len(lines) - 2}")
    stumps, errors = [], []
    for line in lines[2:2 + m]:
        f, thr, pol, wt, e = line.split()
        stumps.append(Stump(int(f), float(thr), int(pol), float(wt)))
        errors.append(float(e))
    return StumpEnsemble(tuple(stumps), d, tuple(errors))


def write_ensemble(model: StumpEnsemble, path: str | Path) -> None:
    Path(path).write_text(format_ensemble(model), encoding="utf-8")


def read_ensemble(path: str | Path) -> StumpEnsemble:
    return parse_ensemble(Path(path).read_text(encoding="utf-8"))


# --- logistic regression --------------------------------------------------

@dataclass(frozen=True, eq=False)
class LogisticModel:
    weights: np.ndarray
    bias: float

    def score(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.weights):
            raise ValueError(f"feature width {X.shape[1]} does not match {len(self.weights)}")
        return sigmoid(X @ self.weights + self.bias)


def log_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray) -> float:
    z = X @ w + b
    # log(1 + exp(z)) - y z, evaluated stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def log_loss_gradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray):
    r = sigmoid(X @ w + b) - y
    return X.T @ r / len(y), float(r.mean())


def train_logistic(data: LabeledDataset, steps: int = 500, rate: float = 0.5,
                   seed: int = 0) -> LogisticModel:
    """Full-batch gradient descent on the mean log-loss from zero weights.

    ``seed`` is accepted for interface symmetry; zero initialisation makes the
    result independent of it.
    """
    data.check_two_classes()
    X, y = data.features, data.labels.astype(float)
    w, b = np.zeros(X.shape[1]), 0.0
    for _ in range(steps):
        gw, gb = log_loss_gradient(w, b, X, y)
        w = w - rate * gw
        b = b - rate * gb
    return LogisticModel(w, b)


def fit_scorer(kind: str, data: LabeledDataset, rounds: int = 100, steps: int = 500,
               rate: float = 0.5):
    """Train the named classifier; returns ``(model, score_fn)``."""
    if kind == "adaboost":
        m = train_adaboost(data, rounds)
        return m, lambda X: score(m, X)
    if kind == "logistic":
        m = train_logistic(data, steps, rate)
        return m, m.score
    raise ValueError(f"unknown classifier {kind!r} (expected 'adaboost' or 'logistic')")


def as_dataset(features, labels, pairs: Sequence[tuple[int, int]] = ()) -> LabeledDataset:
    return LabeledDataset(np.asarray(features, dtype=float), np.asarray(labels), list(pairs))
