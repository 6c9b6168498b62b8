"""L2-regularised logistic regression, the base learner for every multi-label strategy.

The objective is the mean logistic loss plus ``ridge / 2 * ||w||^2``; the
bias is not penalised. Two solvers are provided: full-batch gradient descent
with a backtracking line search, and plain SGD with a ``1/sqrt(t)`` step
decay.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.special import expit

from .errors import ContractError, ParseError

SOLVERS = ("batch", "sgd")
_MAGIC = b"ICDL"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    ridge: float = 1.0
    solver: str = "batch"
    epochs: int = 50
    learning_rate: float = 0.01
    tolerance: float = 1e-6
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not (self.ridge >= 0 and math.isfinite(self.ridge)):
            raise ContractError("ridge must be a finite non-negative number")
        if self.solver not in SOLVERS:
            raise ContractError(f"solver must be one of {SOLVERS}")
        if self.epochs < 1:
            raise ContractError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ContractError("learning_rate must be positive")
        if not self.tolerance > 0:
            raise ContractError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ContractError("max_iterations must be >= 1")

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    config: TrainConfig = TrainConfig()
    iterations: int = 0

    @property
    def trained_on_dim(self):
        return len(self.weights)

    def to_dict(self):
        return {
            "format": "icdlab.linear",
            "version": _FORMAT_VERSION,
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "config": asdict(self.config),
            "iterations": self.iterations,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != "icdlab.linear" or data.get("version") != _FORMAT_VERSION:
            raise ParseError("not an icdlab linear model (format/version mismatch)")
        weights = np.asarray(data["weights"], dtype=np.float64)
        return cls(weights, float(data["bias"]), TrainConfig(**data["config"]), int(data.get("iterations", 0)))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_bytes(self):
        """Little-endian binary: magic, version, dim, bias, weights, then the JSON config echo."""
        cfg = json.dumps(asdict(self.config), sort_keys=True).encode("utf-8")
        head = struct.pack("<4sHIdI", _MAGIC, _FORMAT_VERSION, len(self.weights), self.bias, self.iterations)
        return head + np.asarray(self.weights, dtype="<f8").tobytes() + struct.pack("<I", len(cfg)) + cfg

    @classmethod
    def from_bytes(cls, blob):
        head = struct.calcsize("<4sHIdI")
        if len(blob) < head:
            raise ParseError("truncated model blob")
        magic, version, dim, bias, iterations = struct.unpack_from("<4sHIdI", blob)
        if magic != _MAGIC or version != _FORMAT_VERSION:
            raise ParseError("not an icdlab linear model (magic/version mismatch)")
        end = head + 8 * dim
        weights = np.frombuffer(blob[head:end], dtype="<f8").astype(np.float64)
        (n_cfg,) = struct.unpack_from("<I", blob, end)
        cfg = json.loads(blob[end + 4 : end + 4 + n_cfg].decode("utf-8"))
        return cls(weights, bias, TrainConfig(**cfg), iterations)


def logistic_objective(weights, bias, X, y, ridge):
    """Value and gradient of mean logistic loss + ridge/2 * ||w||^2.

    Returns ``(value, grad_weights, grad_bias)``.
    """
    z = X @ weights + bias
    # log(1 + e^z) - y z, computed without overflow
    value = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * ridge * float(weights @ weights)
    resid = expit(z) - y
    n = len(y)
    grad_w = X.T @ resid / n + ridge * weights
    grad_b = float(resid.sum() / n)
    return value, grad_w, grad_b


def _check_inputs(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2:
        raise ContractError(f"X must be 2-D, got shape {X.shape}")
    if X.shape[0] != len(y) or len(y) == 0:
        raise ContractError(f"X has {X.shape[0]} rows but y has {len(y)} entries")
    if not np.all(np.isfinite(X)):
        raise ContractError("X contains non-finite values")
    if not np.all((y == 0) | (y == 1)):
        raise ContractError("y must be binary (0/1)")
    return X, y


def _prior_only(X, y, cfg):
    # finite log-odds of a single-class target, smoothed by half a count each side
    pos = float(y.sum())
    bias = math.log((pos + 0.5) / (len(y) - pos + 0.5))
    return LinearModel(np.zeros(X.shape[1]), bias, cfg, 0)


def train_logistic(X, y, cfg: TrainConfig = TrainConfig()) -> LinearModel:
    """Batch gradient descent with Armijo backtracking.

    Stops once the gradient norm (weights and bias together) drops to
    ``cfg.tolerance`` or after ``cfg.max_iterations`` steps. A target with a
    single class yields a weightless model predicting its smoothed prior.
    """
    X, y = _check_inputs(X, y)
    if y.min() == y.max():
        return _prior_only(X, y, cfg)

    w = np.zeros(X.shape[1])
    b = 0.0
    value, gw, gb = logistic_objective(w, b, X, y, cfg.ridge)
    step = 1.0
    it = 0
    while it < cfg.max_iterations:
        gnorm2 = float(gw @ gw) + gb * gb
        if math.sqrt(gnorm2) <= cfg.tolerance:
            break
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            v_new, gw_new, gb_new = logistic_objective(w_new, b_new, X, y, cfg.ridge)
            if v_new <= value - 1e-4 * step * gnorm2:
                break
            step *= 0.5
            if step < 1e-16:
                # no further decrease representable
                return LinearModel(w, b, cfg, it)
        w, b, value, gw, gb = w_new, b_new, v_new, gw_new, gb_new
        it += 1
        step = min(step * 2.0, 1e6)
    return LinearModel(w, float(b), cfg, it)


def _rng(seed, *stream):
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), *stream]))


def train_sgd(X, y, cfg: TrainConfig) -> LinearModel:
    """``cfg.epochs`` passes of per-example SGD on the same regularised objective.

    Each epoch reshuffles with a generator seeded from ``(cfg.seed, epoch)``;
    the step at update ``t`` is ``learning_rate / sqrt(t)``.
    """
    X, y = _check_inputs(X, y)
    if y.min() == y.max():
        return _prior_only(X, y, cfg)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    t = 0
    ridge = cfg.ridge
    for epoch in range(cfg.epochs):
        order = _rng(cfg.seed, epoch).permutation(n)
        for i in order:
            t += 1
            lr = cfg.learning_rate / math.sqrt(t)
            x = X[i]
            g = 1.0 / (1.0 + math.exp(-_clip(float(x @ w) + b))) - y[i]
            w -= lr * (g * x + ridge * w)
            b -= lr * g
    return LinearModel(w, float(b), cfg, t)


def _clip(z):
    return max(-700.0, min(700.0, z))


def train(X, y, cfg: TrainConfig) -> LinearModel:
    """Dispatch on ``cfg.solver``."""
    return train_sgd(X, y, cfg) if cfg.solver == "sgd" else train_logistic(X, y, cfg)


def predict_prob(model: LinearModel, x):
    """Sigmoid of ``w . x + b``; ``x`` may be one vector or a 2-D batch."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.trained_on_dim:
        raise ContractError(f"feature length {x.shape[-1]} != trained dimension {model.trained_on_dim}")
    z = x @ model.weights + model.bias
    if np.ndim(z) == 0:
        return float(expit(z))
    return expit(z)


def predict_binary(model: LinearModel, x, threshold=0.5):
    """1 where the probability reaches ``threshold`` (inclusive), else 0."""
    p = predict_prob(model, x)
    if np.ndim(p) == 0:
        return int(p >= threshold)
    return (p >= threshold).astype(np.int8)
