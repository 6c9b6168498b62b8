"""Multi-label strategies over the linear base learner: binary relevance,
classifier chains, ensembles of classifier chains, and MLkNN.

All ``*_predict`` functions accept a single feature vector or a 2-D batch and
return 0/1 label vectors (``int8``) in label-space order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linear
from .errors import ContractError, ParseError
from .linear import LinearModel, TrainConfig
from .parallel import map_ordered

_BUNDLE_VERSION = 1


def _as_batch(x):
    x = np.asarray(x, dtype=np.float64)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def _check_xy(X, Y):
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y).astype(np.int8)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ContractError(f"incompatible shapes X{X.shape} Y{Y.shape}")
    return X, Y


def derive_seed(seed, *stream) -> int:
    """Deterministic 63-bit child seed for a sub-task."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *stream])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def seeded_order(n_labels, seed) -> tuple:
    """Fisher-Yates shuffle of ``range(n_labels)`` driven by ``seed``."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    order = list(range(n_labels))
    for i in range(n_labels - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return tuple(order)


# -- binary relevance ---------------------------------------------------------

@dataclass(frozen=True)
class BRModel:
    models: tuple  # LinearModel per label

    @property
    def n_labels(self):
        return len(self.models)


def br_train(X, Y, cfg: TrainConfig = TrainConfig()) -> BRModel:
    X, Y = _check_xy(X, Y)
    models = map_ordered(lambda l: linear.train(X, Y[:, l], cfg), range(Y.shape[1]))
    return BRModel(tuple(models))


def br_scores(model: BRModel, x):
    X, single = _as_batch(x)
    scores = np.column_stack([linear.predict_prob(m, X) for m in model.models])
    return scores[0] if single else scores


def br_predict(model: BRModel, x, threshold=0.5):
    return (br_scores(model, x) >= threshold).astype(np.int8)


# -- classifier chains --------------------------------------------------------

@dataclass(frozen=True)
class ChainModel:
    order: tuple  # label index at each chain position
    models: tuple  # LinearModel per position; position p sees d + p inputs
    seed: int = 0
    threshold: float = 0.5

    @property
    def n_labels(self):
        return len(self.order)


def cc_train(X, Y, order: Sequence[int] | None = None, cfg: TrainConfig = TrainConfig(), seed=None) -> ChainModel:
    """Train one chain; position ``p`` sees the features plus the true labels
    of positions ``0..p-1`` (as 0/1 columns, chain order)."""
    X, Y = _check_xy(X, Y)
    n_labels = Y.shape[1]
    order = tuple(range(n_labels)) if order is None else tuple(int(o) for o in order)
    if sorted(order) != list(range(n_labels)):
        raise ContractError(f"chain order {order} is not a permutation of {n_labels} labels")
    augmented = np.hstack([X, Y[:, order].astype(np.float64)])
    d = X.shape[1]
    models = tuple(linear.train(augmented[:, : d + p], Y[:, label], cfg) for p, label in enumerate(order))
    return ChainModel(order, models, cfg.seed if seed is None else int(seed))


def _chain_run(model: ChainModel, X):
    """Walk the chain; returns (probabilities, binary predictions) in label order."""
    n = X.shape[0]
    probs = np.zeros((n, model.n_labels))
    preds = np.zeros((n, model.n_labels), dtype=np.int8)
    feats = X
    for m, label in zip(model.models, model.order):
        p = linear.predict_prob(m, feats)
        bit = (p >= model.threshold).astype(np.int8)
        probs[:, label] = p
        preds[:, label] = bit
        feats = np.hstack([feats, bit[:, None].astype(np.float64)])
    return probs, preds


def cc_scores(model: ChainModel, x):
    X, single = _as_batch(x)
    probs, _ = _chain_run(model, X)
    return probs[0] if single else probs


def cc_predict(model: ChainModel, x):
    X, single = _as_batch(x)
    _, preds = _chain_run(model, X)
    return preds[0] if single else preds


# -- ensembles of chains ------------------------------------------------------

@dataclass(frozen=True)
class EnsembleModel:
    chains: tuple
    seed: int = 0
    vote_threshold: float = 0.5

    @property
    def chain_seeds(self):
        return tuple(c.seed for c in self.chains)

    @property
    def n_labels(self):
        return self.chains[0].n_labels


def ecc_chain_seed(seed, i) -> int:
    return derive_seed(seed, 0xECC, i)


def ecc_train(X, Y, n_chains: int, cfg: TrainConfig = TrainConfig(), seed=0, vote_threshold=0.5) -> EnsembleModel:
    """``n_chains`` chains, each with its own seeded random order.

    Chain ``i`` uses seed ``ecc_chain_seed(seed, i)`` both for its order and
    as its base learners' seed, so an ensemble of one is exactly
    ``cc_train(X, Y, seeded_order(L, s), cfg.with_seed(s))``.
    """
    if n_chains < 1:
        raise ContractError("ensemble size must be >= 1")
    X, Y = _check_xy(X, Y)
    n_labels = Y.shape[1]

    def one(i):
        s = ecc_chain_seed(seed, i)
        return cc_train(X, Y, seeded_order(n_labels, s), cfg.with_seed(s), seed=s)

    chains = map_ordered(one, range(n_chains))
    return EnsembleModel(tuple(chains), int(seed), vote_threshold)


def ecc_scores(model: EnsembleModel, x):
    """Fraction of chains voting for each label."""
    X, single = _as_batch(x)
    votes = np.zeros((X.shape[0], model.n_labels))
    for chain in model.chains:
        votes += _chain_run(chain, X)[1]
    votes /= len(model.chains)
    return votes[0] if single else votes


def ecc_predict(model: EnsembleModel, x):
    return (ecc_scores(model, x) >= model.vote_threshold).astype(np.int8)


# -- MLkNN ------------------------------------------------------------------

@dataclass(frozen=True)
class MLkNNModel:
    k: int
    smoothing: float
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    priors: np.ndarray  # P(H_l)
    cond_pos: np.ndarray  # (k+1, L): P(C_j | H_l)
    cond_neg: np.ndarray  # (k+1, L): P(C_j | not H_l)

    @property
    def n_labels(self):
        return self.Y.shape[1]


def _neighbours(X, query, k, exclude=None):
    """Indices of the k nearest training rows (Euclidean; ties by index)."""
    diff = X - query
    dist = np.einsum("ij,ij->i", diff, diff)
    if exclude is not None:
        dist[exclude] = np.inf
    return np.argsort(dist, kind="stable")[:k]


def mlknn_train(X, Y, k=10, s=1.0) -> MLkNNModel:
    X, Y = _check_xy(X, Y)
    n, n_labels = Y.shape
    if k < 1 or k > n - 1:
        raise ContractError(f"k={k} must lie in 1..{n - 1} for {n} training instances")
    if not s > 0:
        raise ContractError("smoothing must be positive")
    priors = (s + Y.sum(axis=0)) / (2 * s + n)

    hits_pos = np.zeros((k + 1, n_labels))
    hits_neg = np.zeros((k + 1, n_labels))
    cols = np.arange(n_labels)
    for i in range(n):
        counts = Y[_neighbours(X, X[i], k, exclude=i)].sum(axis=0)
        pos = Y[i] == 1
        hits_pos[counts[pos], cols[pos]] += 1
        hits_neg[counts[~pos], cols[~pos]] += 1
    cond_pos = (s + hits_pos) / (s * (k + 1) + hits_pos.sum(axis=0))
    cond_neg = (s + hits_neg) / (s * (k + 1) + hits_neg.sum(axis=0))
    return MLkNNModel(k, float(s), X, Y, priors, cond_pos, cond_neg)


def _mlknn_terms(model: MLkNNModel, X):
    cols = np.arange(model.n_labels)
    pos = np.empty((X.shape[0], model.n_labels))
    neg = np.empty_like(pos)
    for r, q in enumerate(X):
        counts = model.Y[_neighbours(model.X, q, model.k)].sum(axis=0)
        pos[r] = model.priors * model.cond_pos[counts, cols]
        neg[r] = (1 - model.priors) * model.cond_neg[counts, cols]
    return pos, neg


def mlknn_scores(model: MLkNNModel, x):
    """Posterior P(H_l | C_j) for each label."""
    X, single = _as_batch(x)
    if X.shape[1] != model.X.shape[1]:
        raise ContractError(f"feature length {X.shape[1]} != trained dimension {model.X.shape[1]}")
    pos, neg = _mlknn_terms(model, X)
    scores = pos / (pos + neg)
    return scores[0] if single else scores


def mlknn_predict(model: MLkNNModel, x):
    X, single = _as_batch(x)
    if X.shape[1] != model.X.shape[1]:
        raise ContractError(f"feature length {X.shape[1]} != trained dimension {model.X.shape[1]}")
    pos, neg = _mlknn_terms(model, X)
    out = (pos >= neg).astype(np.int8)
    return out[0] if single else out


# -- uniform entry points ---------------------------------------------------

def predict(model, x):
    if isinstance(model, BRModel):
        return br_predict(model, x)
    if isinstance(model, ChainModel):
        return cc_predict(model, x)
    if isinstance(model, EnsembleModel):
        return ecc_predict(model, x)
    if isinstance(model, MLkNNModel):
        return mlknn_predict(model, x)
    raise TypeError(f"not a multi-label model: {type(model).__name__}")


def predict_scores(model, x):
    """Per-label real scores: probabilities (BR, CC), vote fractions (ECC),
    posteriors (MLkNN)."""
    if isinstance(model, BRModel):
        return br_scores(model, x)
    if isinstance(model, ChainModel):
        return cc_scores(model, x)
    if isinstance(model, EnsembleModel):
        return ecc_scores(model, x)
    if isinstance(model, MLkNNModel):
        return mlknn_scores(model, x)
    raise TypeError(f"not a multi-label model: {type(model).__name__}")


@dataclass(frozen=True)
class Strategy:
    """Which multi-label method to train, with its own knobs."""

    name: str = "br"  # br | cc | ecc | mlknn
    n_chains: int = 10
    k: int = 10
    smoothing: float = 1.0
    order: tuple | None = None

    def __post_init__(self):
        if self.name not in ("br", "cc", "ecc", "mlknn"):
            raise ContractError(f"unknown strategy {self.name!r}")

    def fit(self, X, Y, cfg: TrainConfig, seed=0):
        if self.name == "br":
            return br_train(X, Y, cfg)
        if self.name == "cc":
            return cc_train(X, Y, self.order, cfg)
        if self.name == "ecc":
            return ecc_train(X, Y, self.n_chains, cfg, seed)
        return mlknn_train(X, Y, self.k, self.smoothing)


# -- bundles ------------------------------------------------------------------

def _chain_manifest(chain: ChainModel, prefix):
    return {"order": list(chain.order), "seed": chain.seed, "threshold": chain.threshold,
            "models": [f"{prefix}{p:03d}.json" for p in range(len(chain.models))]}


def save_bundle(model, directory) -> Path:
    """Write ``manifest.json`` plus one JSON file per base learner (or ``data.npz`` for MLkNN)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    if isinstance(model, BRModel):
        manifest = {"strategy": "br", "models": []}
        for l, m in enumerate(model.models):
            name = f"label{l:03d}.json"
            manifest["models"].append(name)
            files[name] = m
    elif isinstance(model, ChainModel):
        manifest = {"strategy": "cc", **_chain_manifest(model, "pos")}
        files.update(zip(manifest["models"], model.models))
    elif isinstance(model, EnsembleModel):
        manifest = {"strategy": "ecc", "seed": model.seed, "vote_threshold": model.vote_threshold, "chains": []}
        for c, chain in enumerate(model.chains):
            entry = _chain_manifest(chain, f"chain{c:03d}_pos")
            manifest["chains"].append(entry)
            files.update(zip(entry["models"], chain.models))
    elif isinstance(model, MLkNNModel):
        manifest = {"strategy": "mlknn", "k": model.k, "smoothing": model.smoothing, "data": "data.npz"}
        np.savez(directory / "data.npz", X=model.X, Y=model.Y, priors=model.priors,
                 cond_pos=model.cond_pos, cond_neg=model.cond_neg)
    else:
        raise TypeError(f"not a multi-label model: {type(model).__name__}")
    manifest["version"] = _BUNDLE_VERSION
    for name, m in files.items():
        (directory / name).write_text(m.to_json(), encoding="utf-8")
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return directory


def load_bundle(directory):
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("version") != _BUNDLE_VERSION:
        raise ParseError(f"unsupported bundle version {manifest.get('version')!r}", path=directory)

    def lin(name):
        return LinearModel.from_json((directory / name).read_text(encoding="utf-8"))

    def chain(entry):
        return ChainModel(tuple(entry["order"]), tuple(lin(n) for n in entry["models"]),
                          entry["seed"], entry["threshold"])

    strategy = manifest["strategy"]
    if strategy == "br":
        return BRModel(tuple(lin(n) for n in manifest["models"]))
    if strategy == "cc":
        return chain(manifest)
    if strategy == "ecc":
        return EnsembleModel(tuple(chain(e) for e in manifest["chains"]), manifest["seed"], manifest["vote_threshold"])
    if strategy == "mlknn":
        with np.load(directory / manifest["data"]) as data:
            return MLkNNModel(manifest["k"], manifest["smoothing"], data["X"], data["Y"], data["priors"],
                              data["cond_pos"], data["cond_neg"])
    raise ParseError(f"unknown strategy {strategy!r} in manifest", path=directory)
