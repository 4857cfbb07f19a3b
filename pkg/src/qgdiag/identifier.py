"""The Error Identifier: one-vs-rest logistic regression over the fixed
feature recipe, producing per-label confidences, a decided label set, and a
scalar sample confidence.

Anything that can map a sample to an 11-vector of confidences (e.g. a
remote classifier behind HTTP) can stand in for the native model: the rest
of the pipeline only consumes the ``confidences`` contract.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Union

import numpy as np

from .checkpoints import load_linear_checkpoint, save_linear_checkpoint
from .corpus import ErrorLabelSet, LabeledSample, QGSample
from .features import DENSE_FEATURE_NAMES, HASH_BUCKETS, features_matrix
from .linear import FitResult, Hyperparameters, fit_logistic, sigmoid
from .taxonomy import ErrorType

__all__ = [
    "EIModel",
    "ErrorIdentifier",
    "RemoteIdentifier",
    "ConfidenceSource",
    "confidences_for",
    "NotFittedError",
    "train_identifier",
    "predict_confidences",
    "predict_confidences_batch",
    "decide_labels",
    "sample_confidence",
    "labels_matrix",
    "save_identifier",
    "load_identifier",
    "dataset_hash",
]

CHECKPOINT_KIND = "error-identifier"

_FEATURE_NAMES = list(DENSE_FEATURE_NAMES) + [f"hash_{i}" for i in range(HASH_BUCKETS)]


class NotFittedError(RuntimeError):
    pass


class ConfidenceSource(Protocol):
    """Minimal contract a drop-in identifier must satisfy."""

    def confidences(self, sample: QGSample) -> np.ndarray: ...


@dataclass
class EIModel:
    """Immutable after training; predictions are pure functions of (model, sample)."""

    weights: np.ndarray  # (11, TOTAL_DIM)
    bias: np.ndarray  # (11,)
    decision_threshold: float = 0.5
    metadata: Dict = field(default_factory=dict)
    loss_curve: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision threshold must lie in (0, 1)")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("model parameters must be finite")

    def confidences(self, sample: QGSample) -> np.ndarray:
        return predict_confidences(self, sample)


def labels_matrix(data: Sequence[LabeledSample]) -> np.ndarray:
    return np.array([item.labels.bits() for item in data], dtype=float)


def dataset_hash(data: Sequence[LabeledSample]) -> str:
    digest = hashlib.sha256()
    for item in data:
        record = (item.sample.id, item.sample.passage, item.sample.answer,
                  item.sample.question, item.labels.to_codes())
        digest.update(json.dumps(record, ensure_ascii=False).encode("utf-8"))
    return digest.hexdigest()


def _micro_f1_bits(pred_bits: np.ndarray, gold_bits: np.ndarray) -> float:
    tp = float((pred_bits * gold_bits).sum())
    fp = float((pred_bits * (1 - gold_bits)).sum())
    fn = float(((1 - pred_bits) * gold_bits).sum())
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def _decide_bits(conf: np.ndarray, threshold: float) -> np.ndarray:
    out = np.zeros_like(conf)
    for i, row in enumerate(conf):
        out[i] = decide_labels(row, threshold).bits()
    return out


def train_identifier(
    data: Sequence[LabeledSample],
    h: Hyperparameters = Hyperparameters(),
    dev: Optional[Sequence[LabeledSample]] = None,
    decision_threshold: float = 0.5,
) -> EIModel:
    """Fit the one-vs-rest model; with ``dev`` given, keep the epoch with the
    best dev micro-F1 (evaluated every ``h.eval_every`` epochs)."""
    if not data:
        raise ValueError("training data must be non-empty")
    x = features_matrix([item.sample for item in data])
    y = labels_matrix(data)

    dev_metric = None
    if dev is not None:
        if not dev:
            raise ValueError("dev set must be non-empty when provided")
        dev_x = features_matrix([item.sample for item in dev])
        dev_y = labels_matrix(dev)

        def dev_metric(weights: np.ndarray, bias: np.ndarray) -> float:
            conf = _sigmoid_scores(weights, bias, dev_x)
            return _micro_f1_bits(_decide_bits(conf, decision_threshold), dev_y)

    result: FitResult = fit_logistic(x, y, h, dev_metric=dev_metric)
    metadata = {
        "epochs": h.epochs,
        "learning_rate": h.learning_rate,
        "l2": h.l2,
        "seed": h.seed,
        "data_hash": dataset_hash(data),
        "n_train": len(data),
        "best_epoch": result.best_epoch,
    }
    return EIModel(
        weights=result.weights,
        bias=result.bias,
        decision_threshold=decision_threshold,
        metadata=metadata,
        loss_curve=result.loss_curve,
    )


def _sigmoid_scores(weights: np.ndarray, bias: np.ndarray, x: np.ndarray) -> np.ndarray:
    return sigmoid(x @ weights.T + bias)


def predict_confidences(model: EIModel, sample: QGSample) -> np.ndarray:
    return predict_confidences_batch(model, [sample])[0]


def predict_confidences_batch(model: EIModel, samples: Sequence[QGSample]) -> np.ndarray:
    x = features_matrix(samples)
    return _sigmoid_scores(model.weights, model.bias, x)


def decide_labels(conf: np.ndarray, threshold: float) -> ErrorLabelSet:
    """Threshold confidences into a valid label set.

    NoErr exclusivity is resolved toward the higher-confidence side; when
    nothing passes, the single argmax label (lowest ordinal on ties) wins.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("decision threshold must lie in (0, 1)")
    conf = np.asarray(conf, dtype=float)
    passing = [e for e in ErrorType if conf[e.ordinal] >= threshold]
    if not passing:
        return ErrorLabelSet({list(ErrorType)[int(np.argmax(conf))]})
    if ErrorType.NO_ERR in passing and len(passing) > 1:
        others = [e for e in passing if e is not ErrorType.NO_ERR]
        best_other = max(conf[e.ordinal] for e in others)
        if conf[ErrorType.NO_ERR.ordinal] > best_other:
            return ErrorLabelSet({ErrorType.NO_ERR})
        return ErrorLabelSet(others)
    return ErrorLabelSet(passing)


def sample_confidence(conf: np.ndarray, labels: ErrorLabelSet) -> float:
    """Mean per-label certainty of the decided set: conf[k] where the label is
    on, 1 - conf[k] where it is off."""
    conf = np.asarray(conf, dtype=float)
    bits = np.array(labels.bits(), dtype=float)
    return float(np.mean(bits * conf + (1.0 - bits) * (1.0 - conf)))


def save_identifier(model: EIModel, path: Union[str, Path]) -> None:
    metadata = dict(model.metadata)
    metadata["decision_threshold"] = repr(model.decision_threshold)
    save_linear_checkpoint(
        path,
        kind=CHECKPOINT_KIND,
        labels=[e.value for e in ErrorType],
        feature_names=_FEATURE_NAMES,
        weights=model.weights,
        bias=model.bias,
        metadata=metadata,
    )


def load_identifier(path: Union[str, Path]) -> EIModel:
    payload = load_linear_checkpoint(path, expected_kind=CHECKPOINT_KIND)
    metadata = payload["metadata"]
    threshold = float(metadata.pop("decision_threshold", "0.5"))
    return EIModel(
        weights=payload["weights"],
        bias=payload["bias"],
        decision_threshold=threshold,
        metadata=metadata,
    )


class RemoteIdentifier:
    """Drop-in identifier backed by an HTTP endpoint.

    Wire contract: POST {id, passage, answer, question} and receive
    {"confidences": [11 floats]} -- the same contract as predict, so a
    fine-tuned encoder served remotely can replace the native model.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, session=None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.session = session

    def confidences(self, sample: QGSample) -> np.ndarray:
        import requests

        client = self.session or requests
        response = client.post(
            self.endpoint,
            json={
                "id": sample.id,
                "passage": sample.passage,
                "answer": sample.answer,
                "question": sample.question,
            },
            timeout=self.timeout,
        )
        if response.status_code >= 400:
            raise RuntimeError(f"remote identifier returned HTTP {response.status_code}")
        values = np.asarray(response.json()["confidences"], dtype=float)
        if values.shape != (len(ErrorType),) or not np.isfinite(values).all():
            raise ValueError("remote identifier must return 11 finite confidences")
        if ((values < 0) | (values > 1)).any():
            raise ValueError("remote confidences must lie in [0, 1]")
        return values


def confidences_for(model: ConfidenceSource, samples: Sequence[QGSample]) -> np.ndarray:
    """Batch confidences from any identifier implementation."""
    if isinstance(model, EIModel):
        return predict_confidences_batch(model, samples)
    return np.array([model.confidences(sample) for sample in samples])


class ErrorIdentifier:
    """Estimator-style facade over the functional training/prediction API."""

    def __init__(
        self,
        learning_rate: float = 0.5,
        epochs: int = 300,
        l2: float = 1e-3,
        decision_threshold: float = 0.5,
        seed: int = 0,
    ):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.decision_threshold = decision_threshold
        self.seed = seed
        self.model_: Optional[EIModel] = None

    def get_params(self) -> Dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "l2": self.l2,
            "decision_threshold": self.decision_threshold,
            "seed": self.seed,
        }

    def set_params(self, **params: object) -> "ErrorIdentifier":
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
    ) -> "ErrorIdentifier":
        h = Hyperparameters(
            learning_rate=self.learning_rate, epochs=self.epochs, l2=self.l2, seed=self.seed
        )
        self.model_ = train_identifier(
            data, h, dev=dev, decision_threshold=self.decision_threshold
        )
        return self

    def _require_fitted(self) -> EIModel:
        if self.model_ is None:
            raise NotFittedError("ErrorIdentifier is not fitted; call fit() first")
        return self.model_

    def predict_proba(self, samples: Sequence[QGSample]) -> np.ndarray:
        return predict_confidences_batch(self._require_fitted(), samples)

    def predict(self, samples: Sequence[QGSample]) -> List[ErrorLabelSet]:
        model = self._require_fitted()
        return [
            decide_labels(conf, model.decision_threshold)
            for conf in predict_confidences_batch(model, samples)
        ]

    def confidences(self, sample: QGSample) -> np.ndarray:
        return predict_confidences(self._require_fitted(), sample)
