"""F-measures, seeded k-fold splits, cross-validation and score tables."""
from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ContractError, ParseError
from .linear import TrainConfig
from .multilabel import Strategy, derive_seed, predict
from .parallel import map_ordered


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)


def _pair(Y_true, Y_pred):
    t = np.asarray(Y_true).astype(bool)
    p = np.asarray(Y_pred).astype(bool)
    if t.ndim == 1:
        t = t[:, None]
    if p.ndim == 1:
        p = p[:, None]
    if t.shape != p.shape:
        raise ContractError(f"shape mismatch: truth {t.shape} vs prediction {p.shape}")
    return t, p


def confusion(Y_true, Y_pred) -> list[ConfusionCounts]:
    """Per-label confusion counts."""
    t, p = _pair(Y_true, Y_pred)
    tp = (t & p).sum(axis=0)
    fp = (~t & p).sum(axis=0)
    fn = (t & ~p).sum(axis=0)
    tn = (~t & ~p).sum(axis=0)
    return [ConfusionCounts(int(a), int(b), int(c), int(d)) for a, b, c, d in zip(tp, fp, fn, tn)]


def f1_per_label(Y_true, Y_pred, label: int | None = None):
    """F1 of one label, or an array over all labels when ``label`` is None. 0/0 counts as 0."""
    counts = confusion(Y_true, Y_pred)
    if label is None:
        return np.array([c.f1 for c in counts])
    return counts[label].f1


def micro_f1(Y_true, Y_pred) -> float:
    pooled = sum(confusion(Y_true, Y_pred), ConfusionCounts())
    return pooled.f1


def macro_f1(Y_true, Y_pred) -> float:
    return float(np.mean(f1_per_label(Y_true, Y_pred)))


@dataclass(frozen=True)
class FoldSplit:
    n_folds: int
    seed: int
    assignment: np.ndarray = field(repr=False)  # instance -> fold id

    def test_indices(self, fold):
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.assignment != fold)

    def sizes(self):
        return np.bincount(self.assignment, minlength=self.n_folds)

    @property
    def signature(self) -> str:
        """Short digest of the assignment; equal signatures mean identical folds."""
        blob = np.asarray(self.assignment, dtype="<i4").tobytes()
        return hashlib.sha256(blob).hexdigest()[:16]


def kfold_split(n_instances: int, n_folds: int, seed: int = 0) -> FoldSplit:
    """Seeded shuffle, then deal instances round-robin into folds (unstratified)."""
    if n_folds < 2:
        raise ContractError("n_folds must be >= 2")
    if n_instances < n_folds:
        raise ContractError(f"{n_instances} instances cannot fill {n_folds} folds")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    perm = rng.permutation(n_instances)
    assignment = np.empty(n_instances, dtype=np.int64)
    assignment[perm] = np.arange(n_instances) % n_folds
    return FoldSplit(n_folds, int(seed), assignment)


@dataclass
class CVResult:
    predictions: np.ndarray  # pooled held-out predictions, instances x labels
    counts: list
    per_label_f1: np.ndarray
    micro_f1: float
    macro_f1: float
    split: FoldSplit

    def metadata(self):
        return {
            "n_folds": self.split.n_folds,
            "fold_seed": self.split.seed,
            "fold_signature": self.split.signature,
            "fold_sizes": [int(s) for s in self.split.sizes()],
            "f1_aggregation": "pooled",
        }


def cross_validate(X, Y, strategy: Strategy, cfg: TrainConfig, split: FoldSplit, seed: int = 0) -> CVResult:
    """Train on k-1 folds, predict the held-out fold, and score the pooled predictions.

    Every fold gets its own derived seed, so results do not depend on how
    folds are scheduled.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y).astype(np.int8)
    if X.shape[0] != Y.shape[0] or X.shape[0] != len(split.assignment):
        raise ContractError("X, Y and the fold split disagree on the number of instances")

    def run_fold(fold):
        train, test = split.train_indices(fold), split.test_indices(fold)
        fold_seed = derive_seed(seed, 0xF01D, fold)
        model = strategy.fit(X[train], Y[train], cfg.with_seed(fold_seed), seed=fold_seed)
        return test, predict(model, X[test])

    pred = np.zeros_like(Y)
    for test, fold_pred in map_ordered(run_fold, range(split.n_folds)):
        pred[test] = fold_pred
    counts = confusion(Y, pred)
    per_label = np.array([c.f1 for c in counts])
    return CVResult(pred, counts, per_label, micro_f1(Y, pred), float(per_label.mean()), split)


@dataclass(frozen=True)
class ScoreTable:
    """Scores of ``methods`` (columns) on ``items`` (rows); higher is better."""

    methods: tuple
    items: tuple
    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.shape != (len(self.items), len(self.methods)):
            raise ContractError(f"scores shape {scores.shape} != ({len(self.items)}, {len(self.methods)})")
        if not np.all(np.isfinite(scores)):
            raise ContractError("scores must be finite")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "items", tuple(self.items))

    @classmethod
    def from_columns(cls, columns: dict, items: Sequence[str]):
        methods = tuple(columns)
        return cls(methods, tuple(items), np.column_stack([np.asarray(columns[m], dtype=float) for m in methods]))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["item", *self.methods])
        for item, row in zip(self.items, self.scores):
            writer.writerow([item, *(repr(float(v)) for v in row)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or len(rows[0]) < 2 or rows[0][0] != "item":
            raise ParseError("expected header 'item,<method>,...'", line=1, path=path)
        methods = rows[0][1:]
        items, scores = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(methods) + 1:
                raise ParseError(f"expected {len(methods) + 1} fields, got {len(row)}", line=lineno, path=path)
            try:
                scores.append([float(v) for v in row[1:]])
            except ValueError:
                raise ParseError("unparseable score", line=lineno, path=path) from None
            items.append(row[0])
        return cls(tuple(methods), tuple(items), np.array(scores).reshape(len(items), len(methods)))
