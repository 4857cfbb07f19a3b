"""The Verifier: a binary judge of whether a label set is a valid annotation
for a sample. Trained on gold pairs plus label-perturbation negatives; its
score p_v feeds the refinement loop's inconsistency metric.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .checkpoints import load_linear_checkpoint, save_linear_checkpoint
from .corpus import ErrorLabelSet, LabeledSample, QGSample
from .features import DENSE_DIM, DENSE_FEATURE_NAMES, HASH_BUCKETS, TOTAL_DIM, extract_features
from .identifier import NotFittedError
from .linear import FitResult, Hyperparameters, fit_logistic, sigmoid
from .taxonomy import NUM_ERROR_TYPES, ErrorType

__all__ = [
    "Validity",
    "VerificationPair",
    "VerifierModel",
    "LabelVerifier",
    "RemoteVerifier",
    "perturb_labels",
    "build_verifier_training_set",
    "train_verifier",
    "verify",
    "verify_batch",
    "save_verifier",
    "load_verifier",
    "VERIFIER_DIM",
]

CHECKPOINT_KIND = "verifier"

# sample features + 11 label bits + (label bit x dense feature) interactions
VERIFIER_DIM = TOTAL_DIM + NUM_ERROR_TYPES + NUM_ERROR_TYPES * DENSE_DIM

_FEATURE_NAMES = (
    list(DENSE_FEATURE_NAMES)
    + [f"hash_{i}" for i in range(HASH_BUCKETS)]
    + [f"bit_{e.value}" for e in ErrorType]
    + [f"bit_{e.value}*{name}" for e in ErrorType for name in DENSE_FEATURE_NAMES]
)


class Validity(str, Enum):
    VALID = "valid"
    INVALID = "invalid"


@dataclass(frozen=True)
class VerificationPair:
    sample: QGSample
    labels: ErrorLabelSet
    validity: Validity


@dataclass
class VerifierModel:
    weights: np.ndarray  # (1, VERIFIER_DIM)
    bias: np.ndarray  # (1,)
    metadata: Dict = field(default_factory=dict)
    loss_curve: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("model parameters must be finite")


def perturb_labels(labels: ErrorLabelSet, rng: random.Random) -> ErrorLabelSet:
    """Return a different, still-valid label set.

    One move is drawn uniformly from the applicable ones: flip a single
    non-NoErr bit, swap a set bit for an unset one, replace {NoErr} with a
    random single error, or collapse an error set to {NoErr}.
    """
    current = labels.errors
    error_types = [e for e in ErrorType if e is not ErrorType.NO_ERR]

    moves = []
    if ErrorType.NO_ERR in current:
        moves.append("replace_noerr")
    else:
        flips = [e for e in error_types if e not in current]
        if len(current) >= 2:
            flips += [e for e in error_types if e in current]
        if flips:
            moves.append("flip")
        swaps = [
            (out_e, in_e)
            for out_e in current
            for in_e in error_types
            if in_e not in current
        ]
        if swaps:
            moves.append("swap")
        moves.append("to_noerr")

    move = rng.choice(moves)
    if move == "replace_noerr":
        return ErrorLabelSet({rng.choice(error_types)})
    if move == "to_noerr":
        return ErrorLabelSet({ErrorType.NO_ERR})
    if move == "flip":
        flippable = [e for e in error_types if e not in current]
        if len(current) >= 2:
            flippable += [e for e in error_types if e in current]
        target = rng.choice(flippable)
        new = set(current) ^ {target}
        return ErrorLabelSet(new)
    out_e = rng.choice(sorted(current, key=lambda e: e.ordinal))
    in_e = rng.choice([e for e in error_types if e not in current])
    new = (set(current) - {out_e}) | {in_e}
    return ErrorLabelSet(new)


def build_verifier_training_set(
    data: Sequence[LabeledSample], neg_ratio: float, rng: random.Random
) -> List[VerificationPair]:
    """All gold pairs plus ceil(neg_ratio * n) perturbed negatives, shuffled."""
    if not data:
        raise ValueError("data must be non-empty")
    if neg_ratio <= 0:
        raise ValueError("neg_ratio must be positive")
    pairs = [
        VerificationPair(item.sample, item.labels, Validity.VALID) for item in data
    ]
    n_neg = math.ceil(neg_ratio * len(data))
    order = list(range(len(data)))
    rng.shuffle(order)
    for j in range(n_neg):
        item = data[order[j % len(data)]]
        pairs.append(
            VerificationPair(item.sample, perturb_labels(item.labels, rng), Validity.INVALID)
        )
    rng.shuffle(pairs)
    return pairs


def pair_features(sample: QGSample, labels: ErrorLabelSet) -> np.ndarray:
    sample_vec = extract_features(sample).to_array()
    bits = np.array(labels.bits(), dtype=float)
    interactions = np.outer(bits, sample_vec[:DENSE_DIM]).ravel()
    return np.concatenate([sample_vec, bits, interactions])


def _pairs_matrix(pairs: Sequence[VerificationPair]) -> np.ndarray:
    x = np.zeros((len(pairs), VERIFIER_DIM))
    for i, pair in enumerate(pairs):
        x[i] = pair_features(pair.sample, pair.labels)
    return x


def _binary_f1(pred: np.ndarray, gold: np.ndarray) -> float:
    tp = float((pred * gold).sum())
    fp = float((pred * (1 - gold)).sum())
    fn = float(((1 - pred) * gold).sum())
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def train_verifier(
    pairs: Sequence[VerificationPair],
    h: Hyperparameters = Hyperparameters(learning_rate=0.2),
    dev_pairs: Optional[Sequence[VerificationPair]] = None,
) -> VerifierModel:
    if not pairs:
        raise ValueError("training pairs must be non-empty")
    x = _pairs_matrix(pairs)
    y = np.array([[1.0 if p.validity is Validity.VALID else 0.0] for p in pairs])

    dev_metric = None
    if dev_pairs is not None:
        if not dev_pairs:
            raise ValueError("dev pairs must be non-empty when provided")
        dev_x = _pairs_matrix(dev_pairs)
        dev_y = np.array(
            [1.0 if p.validity is Validity.VALID else 0.0 for p in dev_pairs]
        )

        def dev_metric(weights: np.ndarray, bias: np.ndarray) -> float:
            scores = sigmoid(dev_x @ weights.T + bias).ravel()
            return _binary_f1((scores >= 0.5).astype(float), dev_y)

    result: FitResult = fit_logistic(x, y, h, dev_metric=dev_metric)
    metadata = {
        "epochs": h.epochs,
        "learning_rate": h.learning_rate,
        "l2": h.l2,
        "seed": h.seed,
        "n_train": len(pairs),
        "best_epoch": result.best_epoch,
    }
    return VerifierModel(
        weights=result.weights,
        bias=result.bias,
        metadata=metadata,
        loss_curve=result.loss_curve,
    )


def verify(model: VerifierModel, sample: QGSample, labels: ErrorLabelSet) -> float:
    """p_v: the verifier's probability that (sample, labels) is a valid annotation."""
    score = pair_features(sample, labels) @ model.weights.ravel() + float(model.bias[0])
    return float(sigmoid(np.array([score]))[0])


def verify_batch(
    model: VerifierModel,
    items: Sequence[tuple],
) -> np.ndarray:
    """Vectorized verify over (sample, labels) tuples."""
    x = np.zeros((len(items), VERIFIER_DIM))
    for i, (sample, labels) in enumerate(items):
        x[i] = pair_features(sample, labels)
    return sigmoid(x @ model.weights.T + model.bias).ravel()


def save_verifier(model: VerifierModel, path: Union[str, Path]) -> None:
    save_linear_checkpoint(
        path,
        kind=CHECKPOINT_KIND,
        labels=[Validity.VALID.value],
        feature_names=_FEATURE_NAMES,
        weights=model.weights,
        bias=model.bias,
        metadata=dict(model.metadata),
    )


def load_verifier(path: Union[str, Path]) -> VerifierModel:
    payload = load_linear_checkpoint(path, expected_kind=CHECKPOINT_KIND)
    return VerifierModel(
        weights=payload["weights"], bias=payload["bias"], metadata=payload["metadata"]
    )


class RemoteVerifier:
    """Drop-in verifier backed by an HTTP endpoint.

    Wire contract: POST {id, passage, answer, question, labels} and receive
    {"p_v": float} -- the same contract as verify.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, session=None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.session = session

    def verify(self, sample: QGSample, labels: ErrorLabelSet) -> float:
        import requests

        client = self.session or requests
        response = client.post(
            self.endpoint,
            json={
                "id": sample.id,
                "passage": sample.passage,
                "answer": sample.answer,
                "question": sample.question,
                "labels": labels.to_codes(),
            },
            timeout=self.timeout,
        )
        if response.status_code >= 400:
            raise RuntimeError(f"remote verifier returned HTTP {response.status_code}")
        p_v = float(response.json()["p_v"])
        if not 0.0 <= p_v <= 1.0:
            raise ValueError("remote p_v must lie in [0, 1]")
        return p_v


class LabelVerifier:
    """Estimator-style facade mirroring ErrorIdentifier."""

    def __init__(
        self,
        learning_rate: float = 0.2,
        epochs: int = 300,
        l2: float = 1e-3,
        neg_ratio: float = 1.0,
        seed: int = 0,
    ):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.neg_ratio = neg_ratio
        self.seed = seed
        self.model_: Optional[VerifierModel] = None

    def get_params(self) -> Dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "l2": self.l2,
            "neg_ratio": self.neg_ratio,
            "seed": self.seed,
        }

    def set_params(self, **params: object) -> "LabelVerifier":
        valid = self.get_params()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(
        self,
        data: Sequence[LabeledSample],
        dev: Optional[Sequence[LabeledSample]] = None,
    ) -> "LabelVerifier":
        rng = random.Random(self.seed)
        pairs = build_verifier_training_set(data, self.neg_ratio, rng)
        dev_pairs = None
        if dev is not None:
            dev_pairs = build_verifier_training_set(dev, self.neg_ratio, random.Random(self.seed + 1))
        h = Hyperparameters(
            learning_rate=self.learning_rate, epochs=self.epochs, l2=self.l2, seed=self.seed
        )
        self.model_ = train_verifier(pairs, h, dev_pairs=dev_pairs)
        return self

    def _require_fitted(self) -> VerifierModel:
        if self.model_ is None:
            raise NotFittedError("LabelVerifier is not fitted; call fit() first")
        return self.model_

    def verify(self, sample: QGSample, labels: ErrorLabelSet) -> float:
        return verify(self._require_fitted(), sample, labels)
