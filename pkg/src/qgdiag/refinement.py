"""Iterative refinement: score the unlabeled pool with the identifier and
verifier, split it into reliable / unreliable / undecided sets, grow the
training data (automatically and via human review), retrain, and track dev
metrics per iteration.

Iteration 0 trains on the initial data alone; pool actions start at
iteration 1, once models exist to assess with.
"""
from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .corpus import (
    ErrorLabelSet,
    LabeledSample,
    LabelSource,
    QGSample,
    load_samples,
    save_samples,
)
from .identifier import (
    ConfidenceSource,
    EIModel,
    Hyperparameters,
    confidences_for,
    decide_labels,
    load_identifier,
    predict_confidences_batch,
    sample_confidence,
    save_identifier,
    train_identifier,
)
from .metrics import MultilabelReport, multilabel_report
from .verifier import (
    VerifierModel,
    build_verifier_training_set,
    load_verifier,
    save_verifier,
    train_verifier,
    verify_batch,
)

__all__ = [
    "Partition",
    "ReviewStatus",
    "Assessment",
    "ReviewItem",
    "Thresholds",
    "RefinementConfig",
    "IterationRecord",
    "IterationState",
    "ReviewError",
    "StateLockHeld",
    "StateLock",
    "uncertainty",
    "inconsistency",
    "assess_pool",
    "partition_pool",
    "run_iteration",
    "resolve_review",
    "skip_review",
    "select_checkpoint",
    "train_loop",
    "init_state",
    "persist_iteration",
    "load_state",
]


def uncertainty(p_e: float) -> float:
    """1 - |p_e - 0.5|: maximal at an undecided 0.5, floor 0.5 at the extremes."""
    if not 0.0 <= p_e <= 1.0:
        raise ValueError(f"p_e must lie in [0, 1], got {p_e}")
    return 1.0 - abs(p_e - 0.5)


def inconsistency(p_e: float, p_v: float) -> float:
    """|p_e - p_v|: disagreement between identifier and verifier confidence."""
    if not 0.0 <= p_e <= 1.0:
        raise ValueError(f"p_e must lie in [0, 1], got {p_e}")
    if not 0.0 <= p_v <= 1.0:
        raise ValueError(f"p_v must lie in [0, 1], got {p_v}")
    return abs(p_e - p_v)


class Partition(str, Enum):
    RELIABLE = "reliable"
    UNRELIABLE = "unreliable"
    UNDECIDED = "undecided"


class ReviewStatus(str, Enum):
    PENDING = "pending"
    VERIFIED = "verified"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class Thresholds:
    """Partition cutoffs; reliable bounds must sit strictly below unreliable ones."""

    tau_u: float = 0.6
    tau_i: float = 0.1
    theta_u: float = 0.9
    theta_i: float = 0.3

    def __post_init__(self) -> None:
        if not (self.tau_u < self.theta_u and self.tau_i < self.theta_i):
            raise ValueError(
                "invalid threshold ordering: need tau_u < theta_u and tau_i < theta_i"
            )


@dataclass
class Assessment:
    sample_id: str
    confidences: Tuple[float, ...]
    predicted: ErrorLabelSet
    p_e: float
    p_v: float
    uncertainty: float
    inconsistency: float
    partition: Partition = Partition.UNDECIDED


@dataclass
class ReviewItem:
    assessment: Assessment
    sample: QGSample
    status: ReviewStatus = ReviewStatus.PENDING
    human_labels: Optional[ErrorLabelSet] = None
    reviewer: Optional[str] = None
    timestamp: Optional[str] = None


@dataclass(frozen=True)
class RefinementConfig:
    thresholds: Thresholds = Thresholds()
    cap_reliable: int = 300
    cap_unreliable: int = 100
    ei_hparams: Hyperparameters = Hyperparameters()
    verifier_hparams: Hyperparameters = Hyperparameters(learning_rate=0.2)
    neg_ratio: float = 1.0
    decision_threshold: float = 0.5
    seed: int = 0
    max_iterations: int = 5


@dataclass(frozen=True)
class IterationRecord:
    index: int
    added_reliable: int
    added_human: int
    train_size: int
    pool_size: int
    queue_pending: int
    micro_f1: float
    macro_f1: float
    weighted_f1: float
    emr: float
    opr: float

    def as_dict(self) -> Dict[str, object]:
        return {
            "index": self.index,
            "added_reliable": self.added_reliable,
            "added_human": self.added_human,
            "train_size": self.train_size,
            "pool_size": self.pool_size,
            "queue_pending": self.queue_pending,
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "emr": self.emr,
            "opr": self.opr,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "IterationRecord":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


@dataclass
class IterationState:
    """Mutable workspace for the loop; persisted via the state-directory layout."""

    training_set: List[LabeledSample]
    pool: List[QGSample]
    dev: List[LabeledSample]
    review_queue: List[ReviewItem] = field(default_factory=list)
    history: List[IterationRecord] = field(default_factory=list)
    ei_model: Optional[EIModel] = None
    verifier_model: Optional[VerifierModel] = None

    @property
    def index(self) -> int:
        """Index of the next iteration to run."""
        return len(self.history)


class ReviewError(ValueError):
    def __init__(self, message: str, code: str):
        self.code = code
        super().__init__(message)


def assess_pool(
    ei: ConfidenceSource,
    verifier: VerifierModel,
    pool: Sequence[QGSample],
    decision_threshold: float,
) -> List[Assessment]:
    """Score pool samples with any identifier implementation plus the verifier."""
    if not pool:
        return []
    conf = confidences_for(ei, pool)
    decided = [decide_labels(row, decision_threshold) for row in conf]
    p_v = verify_batch(verifier, list(zip(pool, decided)))
    out = []
    for sample, row, labels, pv in zip(pool, conf, decided, p_v):
        pe = sample_confidence(row, labels)
        out.append(
            Assessment(
                sample_id=sample.id,
                confidences=tuple(float(c) for c in row),
                predicted=labels,
                p_e=pe,
                p_v=float(pv),
                uncertainty=uncertainty(pe),
                inconsistency=inconsistency(pe, float(pv)),
            )
        )
    return out


def partition_pool(
    assessments: Sequence[Assessment], thresholds: Thresholds
) -> List[Assessment]:
    """Tag each assessment: reliable when both metrics are low, unreliable when
    either is high, undecided otherwise (those stay in the pool)."""
    tagged = []
    for a in assessments:
        if a.uncertainty <= thresholds.tau_u and a.inconsistency <= thresholds.tau_i:
            partition = Partition.RELIABLE
        elif a.uncertainty >= thresholds.theta_u or a.inconsistency >= thresholds.theta_i:
            partition = Partition.UNRELIABLE
        else:
            partition = Partition.UNDECIDED
        tagged.append(replace(a, partition=partition))
    return tagged


def _absorb_reviews(state: IterationState) -> int:
    """Move verified review items into the training set; return skipped
    samples to the pool. Pending items stay queued."""
    absorbed = 0
    remaining: List[ReviewItem] = []
    training_ids = {item.sample.id for item in state.training_set}
    for item in state.review_queue:
        if item.status is ReviewStatus.VERIFIED:
            assert item.human_labels is not None
            if item.sample.id not in training_ids:
                state.training_set.append(
                    LabeledSample(
                        sample=item.sample,
                        labels=item.human_labels,
                        label_source=LabelSource.HUMAN_VERIFIED,
                    )
                )
                training_ids.add(item.sample.id)
                absorbed += 1
        elif item.status is ReviewStatus.SKIPPED:
            state.pool.append(item.sample)
        else:
            remaining.append(item)
    state.review_queue = remaining
    return absorbed


def _retrain(state: IterationState, config: RefinementConfig) -> None:
    state.ei_model = train_identifier(
        state.training_set,
        config.ei_hparams,
        dev=state.dev,
        decision_threshold=config.decision_threshold,
    )
    pair_rng = random.Random(f"{config.seed}:verifier-pairs:{state.index}")
    pairs = build_verifier_training_set(state.training_set, config.neg_ratio, pair_rng)
    dev_rng = random.Random(f"{config.seed}:verifier-dev:{state.index}")
    dev_pairs = build_verifier_training_set(state.dev, config.neg_ratio, dev_rng)
    state.verifier_model = train_verifier(pairs, config.verifier_hparams, dev_pairs=dev_pairs)


def _evaluate_dev(state: IterationState, config: RefinementConfig) -> MultilabelReport:
    assert state.ei_model is not None
    conf = predict_confidences_batch(state.ei_model, [item.sample for item in state.dev])
    preds = [decide_labels(row, config.decision_threshold) for row in conf]
    golds = [item.labels for item in state.dev]
    return multilabel_report(preds, golds)


def run_iteration(
    state: IterationState,
    config: RefinementConfig,
    reviewer: Optional["Reviewer"] = None,
) -> IterationRecord:
    """Run one full iteration and append its history record.

    Iteration 0 only absorbs any verified reviews, trains, and evaluates.
    Later iterations additionally assess the pool, auto-absorb the top
    reliable samples (highest p_e first), and queue the worst unreliable
    ones (highest uncertainty, then inconsistency) for human review.

    A ``reviewer`` callback resolves pending queue items inside the
    iteration, so its verdicts are used before this round's retraining;
    without one, pending items wait for the service and are absorbed by a
    later iteration.
    """
    if config.cap_reliable <= 0 or config.cap_unreliable <= 0:
        raise ValueError("caps must be positive")
    if not state.dev:
        raise ValueError("dev set must be non-empty")
    added_reliable = 0

    is_bootstrap = state.ei_model is None
    if not is_bootstrap:
        has_verified = any(
            item.status is not ReviewStatus.PENDING for item in state.review_queue
        )
        if not state.pool and not has_verified:
            raise ValueError("nothing to do: pool empty and no resolved reviews")
        assert state.verifier_model is not None
        assessments = partition_pool(
            assess_pool(state.ei_model, state.verifier_model, state.pool, config.decision_threshold),
            config.thresholds,
        )
        by_id = {a.sample_id: a for a in assessments}
        samples_by_id = {s.id: s for s in state.pool}

        reliable = sorted(
            (a for a in assessments if a.partition is Partition.RELIABLE),
            key=lambda a: (-a.p_e, a.sample_id),
        )[: config.cap_reliable]
        unreliable = sorted(
            (a for a in assessments if a.partition is Partition.UNRELIABLE),
            key=lambda a: (-a.uncertainty, -a.inconsistency, a.sample_id),
        )[: config.cap_unreliable]

        taken = set()
        for a in reliable:
            state.training_set.append(
                LabeledSample(
                    sample=samples_by_id[a.sample_id],
                    labels=a.predicted,
                    label_source=LabelSource.MODEL_RELIABLE,
                )
            )
            taken.add(a.sample_id)
        added_reliable = len(reliable)

        queued_ids = {item.sample.id for item in state.review_queue}
        for a in unreliable:
            if a.sample_id in queued_ids:
                continue
            state.review_queue.append(
                ReviewItem(assessment=a, sample=samples_by_id[a.sample_id])
            )
            taken.add(a.sample_id)
        state.pool = [s for s in state.pool if s.id not in taken]

    if reviewer is not None:
        _apply_reviewer(state, reviewer)
    added_human = _absorb_reviews(state)
    _retrain(state, config)
    report = _evaluate_dev(state, config)
    record = IterationRecord(
        index=state.index,
        added_reliable=added_reliable,
        added_human=added_human,
        train_size=len(state.training_set),
        pool_size=len(state.pool),
        queue_pending=sum(
            1 for item in state.review_queue if item.status is ReviewStatus.PENDING
        ),
        micro_f1=report.micro_f1,
        macro_f1=report.macro_f1,
        weighted_f1=report.weighted_f1,
        emr=report.emr,
        opr=report.opr,
    )
    state.history.append(record)
    return record


def resolve_review(
    state: IterationState,
    sample_id: str,
    labels: ErrorLabelSet,
    reviewer: Optional[str] = None,
    timestamp: Optional[str] = None,
) -> ReviewItem:
    """Record a human verdict on a pending queue item. The sample enters the
    training set at the next iteration, not immediately."""
    item = _find_item(state, sample_id)
    if item.status is not ReviewStatus.PENDING:
        raise ReviewError(
            f"review item {sample_id!r} already {item.status.value}",
            code="already_resolved",
        )
    item.status = ReviewStatus.VERIFIED
    item.human_labels = labels
    item.reviewer = reviewer
    item.timestamp = timestamp
    return item


def skip_review(
    state: IterationState, sample_id: str, reviewer: Optional[str] = None,
    timestamp: Optional[str] = None,
) -> ReviewItem:
    """Mark a pending item skipped; its sample returns to the pool next iteration."""
    item = _find_item(state, sample_id)
    if item.status is not ReviewStatus.PENDING:
        raise ReviewError(
            f"review item {sample_id!r} already {item.status.value}",
            code="already_resolved",
        )
    item.status = ReviewStatus.SKIPPED
    item.reviewer = reviewer
    item.timestamp = timestamp
    return item


def _find_item(state: IterationState, sample_id: str) -> ReviewItem:
    for item in state.review_queue:
        if item.sample.id == sample_id:
            return item
    raise ReviewError(f"no review item for sample {sample_id!r}", code="unknown_item")


def select_checkpoint(history: Sequence) -> int:
    """Index of the iteration with the best dev micro-F1; earliest on ties.

    Accepts IterationRecords or bare numbers.
    """
    if not history:
        raise ValueError("history must be non-empty")

    def score(entry) -> float:
        if isinstance(entry, IterationRecord):
            return entry.micro_f1
        return float(entry)

    return max(range(len(history)), key=lambda i: (score(history[i]), -i))


Reviewer = Callable[[ReviewItem], Optional[ErrorLabelSet]]


def _apply_reviewer(state: IterationState, reviewer: Reviewer) -> None:
    for item in list(state.review_queue):
        if item.status is not ReviewStatus.PENDING:
            continue
        labels = reviewer(item)
        if labels is None:
            skip_review(state, item.sample.id, reviewer="oracle")
        else:
            resolve_review(state, item.sample.id, labels, reviewer="oracle")


def train_loop(
    state: IterationState,
    config: RefinementConfig,
    iterations: int,
    state_dir: Optional[Union[str, Path]] = None,
    reviewer: Optional[Reviewer] = None,
) -> List[IterationRecord]:
    """Run ``iterations`` refinement rounds, persisting after each when a
    state directory is given. The reviewer callback (returning corrected
    labels, or None to skip) resolves queue items within each iteration."""
    records = []
    for _ in range(iterations):
        records.append(run_iteration(state, config, reviewer=reviewer))
        if state_dir is not None:
            persist_iteration(state, state_dir)
    return records


# --- state-directory persistence ---------------------------------------------

LOCK_FILENAME = "iteration.lock"


class StateLockHeld(RuntimeError):
    pass


class StateLock:
    """Exclusive advisory lock over a state directory (O_CREAT | O_EXCL)."""

    def __init__(self, state_dir: Union[str, Path]):
        self.path = Path(state_dir) / LOCK_FILENAME
        self._fd: Optional[int] = None

    def acquire(self) -> "StateLock":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StateLockHeld(f"state directory is locked: {self.path}")
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def release(self) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
            self.path.unlink(missing_ok=True)

    def __enter__(self) -> "StateLock":
        return self.acquire()

    def __exit__(self, *exc_info) -> None:
        self.release()


def init_state(
    training: Sequence[LabeledSample],
    pool: Sequence[QGSample],
    dev: Sequence[LabeledSample],
) -> IterationState:
    training_ids = {item.sample.id for item in training}
    clean_pool = [s for s in pool if s.id not in training_ids]
    return IterationState(
        training_set=list(training), pool=clean_pool, dev=list(dev)
    )


def _queue_record(item: ReviewItem) -> dict:
    a = item.assessment
    record = {
        "sample_id": item.sample.id,
        "passage": item.sample.passage,
        "answer": item.sample.answer,
        "question": item.sample.question,
        "predicted": a.predicted.to_codes(),
        "confidences": [float(c) for c in a.confidences],
        "p_e": a.p_e,
        "p_v": a.p_v,
        "uncertainty": a.uncertainty,
        "inconsistency": a.inconsistency,
        "partition": a.partition.value,
        "status": item.status.value,
    }
    if item.sample.source is not None:
        record["source"] = item.sample.source
    if item.human_labels is not None:
        record["human_labels"] = item.human_labels.to_codes()
    if item.reviewer is not None:
        record["reviewer"] = item.reviewer
    if item.timestamp is not None:
        record["timestamp"] = item.timestamp
    return record


def _queue_item_from_record(record: dict) -> ReviewItem:
    sample = QGSample(
        id=record["sample_id"],
        passage=record["passage"],
        answer=record["answer"],
        question=record["question"],
        source=record.get("source"),
    )
    assessment = Assessment(
        sample_id=sample.id,
        confidences=tuple(record["confidences"]),
        predicted=ErrorLabelSet.from_codes(record["predicted"]),
        p_e=record["p_e"],
        p_v=record["p_v"],
        uncertainty=record["uncertainty"],
        inconsistency=record["inconsistency"],
        partition=Partition(record["partition"]),
    )
    human = record.get("human_labels")
    return ReviewItem(
        assessment=assessment,
        sample=sample,
        status=ReviewStatus(record["status"]),
        human_labels=ErrorLabelSet.from_codes(human) if human else None,
        reviewer=record.get("reviewer"),
        timestamp=record.get("timestamp"),
    )


def save_queue(queue: Sequence[ReviewItem], path: Union[str, Path]) -> None:
    lines = [
        json.dumps(_queue_record(item), ensure_ascii=False, separators=(",", ":"))
        for item in queue
    ]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(path).with_suffix(".tmp")
    tmp.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    os.replace(tmp, path)


def load_queue(path: Union[str, Path]) -> List[ReviewItem]:
    items = []
    text = Path(path).read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.strip():
            items.append(_queue_item_from_record(json.loads(line)))
    return items


def persist_iteration(state: IterationState, state_dir: Union[str, Path]) -> Path:
    """Write the just-completed iteration's artifacts plus current pool/queue."""
    if not state.history:
        raise ValueError("no completed iteration to persist")
    state_dir = Path(state_dir)
    index = state.history[-1].index
    iter_dir = state_dir / f"iter_{index}"
    iter_dir.mkdir(parents=True, exist_ok=True)
    save_samples(state.training_set, iter_dir / "training.jsonl")
    assert state.ei_model is not None and state.verifier_model is not None
    save_identifier(state.ei_model, iter_dir / "ei.ckpt")
    save_verifier(state.verifier_model, iter_dir / "verifier.ckpt")
    (iter_dir / "report.json").write_text(
        json.dumps(state.history[-1].as_dict(), indent=1) + "\n", encoding="utf-8"
    )
    save_samples(state.pool, state_dir / "pool.jsonl")
    save_samples(state.dev, state_dir / "dev.jsonl")
    save_queue(state.review_queue, state_dir / "queue.jsonl")
    return iter_dir


def load_state(state_dir: Union[str, Path]) -> IterationState:
    """Rebuild the workspace from a state directory written by persist_iteration."""
    state_dir = Path(state_dir)
    iter_dirs = sorted(
        (p for p in state_dir.glob("iter_*") if p.is_dir()),
        key=lambda p: int(p.name.split("_")[1]),
    )
    if not iter_dirs:
        raise FileNotFoundError(f"no completed iterations under {state_dir}")
    history = []
    for iter_dir in iter_dirs:
        record = json.loads((iter_dir / "report.json").read_text(encoding="utf-8"))
        history.append(IterationRecord.from_dict(record))
    latest = iter_dirs[-1]
    state = IterationState(
        training_set=load_samples(latest / "training.jsonl", kind="labeled"),
        pool=load_samples(state_dir / "pool.jsonl", kind="unlabeled"),
        dev=load_samples(state_dir / "dev.jsonl", kind="labeled"),
        review_queue=load_queue(state_dir / "queue.jsonl"),
        history=history,
        ei_model=load_identifier(latest / "ei.ckpt"),
        verifier_model=load_verifier(latest / "verifier.ckpt"),
    )
    return state
