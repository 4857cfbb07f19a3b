"""Data model and persistence for samples, labels, and human scores.

Storage is line-delimited JSON with a fixed key order, so serializing the
same dataset twice yields identical bytes and diffs stay readable.
"""
from __future__ import annotations

import json
import os
import random
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .taxonomy import Dimension, ErrorType, Scale

__all__ = [
    "CorpusError",
    "QGSample",
    "ErrorLabelSet",
    "LabelSource",
    "LabeledSample",
    "HumanScoreRecord",
    "load_samples",
    "save_samples",
    "load_human_scores",
    "save_human_scores",
    "split",
]


class CorpusError(ValueError):
    """Malformed record or label-invariant violation; carries the line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class QGSample:
    """A (passage, answer, question) triple, the unit of diagnosis."""

    id: str
    passage: str
    answer: str
    question: str
    source: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.passage:
            raise CorpusError(f"sample {self.id!r}: passage must be non-empty")
        if not self.question:
            raise CorpusError(f"sample {self.id!r}: question must be non-empty")


class ErrorLabelSet:
    """Immutable set of error labels over the 11-type catalog.

    Invariants: never empty, and NoErr excludes every other label --
    an error-free sample is written {NoErr}, not {}.
    """

    __slots__ = ("_errors",)

    def __init__(self, errors: Iterable[ErrorType]):
        errs = frozenset(ErrorType(e) for e in errors)
        if not errs:
            raise CorpusError("label set must not be empty; use {NoErr} for clean samples")
        if ErrorType.NO_ERR in errs and len(errs) > 1:
            others = sorted(e.value for e in errs if e is not ErrorType.NO_ERR)
            raise CorpusError(f"NoErr excludes other labels, got NoErr plus {others}")
        object.__setattr__(self, "_errors", errs)

    @classmethod
    def from_codes(cls, codes: Sequence[str]) -> "ErrorLabelSet":
        try:
            return cls(ErrorType(c) for c in codes)
        except ValueError as exc:
            if isinstance(exc, CorpusError):
                raise
            raise CorpusError(f"unknown error code in {list(codes)!r}") from exc

    @classmethod
    def no_error(cls) -> "ErrorLabelSet":
        return cls({ErrorType.NO_ERR})

    def to_codes(self) -> List[str]:
        """Codes in catalog order (canonical serialization)."""
        return [e.value for e in ErrorType if e in self._errors]

    def bits(self) -> Tuple[int, ...]:
        return tuple(1 if e in self._errors else 0 for e in ErrorType)

    @property
    def errors(self) -> frozenset:
        return self._errors

    @property
    def is_no_error(self) -> bool:
        return ErrorType.NO_ERR in self._errors

    def __contains__(self, e: ErrorType) -> bool:
        return e in self._errors

    def __iter__(self) -> Iterator[ErrorType]:
        return iter(sorted(self._errors, key=lambda e: e.ordinal))

    def __len__(self) -> int:
        return len(self._errors)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ErrorLabelSet) and self._errors == other._errors

    def __hash__(self) -> int:
        return hash(self._errors)

    def __repr__(self) -> str:
        return f"ErrorLabelSet({self.to_codes()})"


class LabelSource(str, Enum):
    SYNTHESIZED = "synthesized"
    MODEL_RELIABLE = "model_reliable"
    HUMAN_VERIFIED = "human_verified"
    SEED = "seed"


@dataclass(frozen=True)
class LabeledSample:
    sample: QGSample
    labels: ErrorLabelSet
    label_source: LabelSource = LabelSource.SEED


@dataclass(frozen=True)
class HumanScoreRecord:
    sample_id: str
    dimension: Dimension
    score: int
    scale: Scale = Scale.LIKERT3

    def __post_init__(self) -> None:
        if self.score not in self.scale.valid_scores:
            raise CorpusError(
                f"score {self.score} not on {self.scale.value} scale for {self.sample_id!r}"
            )


# --- jsonl persistence -------------------------------------------------------

def _sample_record(item: Union[QGSample, LabeledSample]) -> dict:
    if isinstance(item, LabeledSample):
        sample, labels, label_source = item.sample, item.labels, item.label_source
    else:
        sample, labels, label_source = item, None, None
    record: dict = {
        "id": sample.id,
        "passage": sample.passage,
        "answer": sample.answer,
        "question": sample.question,
    }
    if labels is not None:
        record["labels"] = labels.to_codes()
    if sample.source is not None:
        record["source"] = sample.source
    if label_source is not None:
        record["label_source"] = label_source.value
    return record


def _dump_line(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def _iter_lines(path: Union[str, Path]) -> Iterator[Tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(record, dict):
                raise CorpusError("record must be a JSON object", line=lineno)
            yield lineno, record


def _parse_sample(record: dict, lineno: int) -> QGSample:
    try:
        return QGSample(
            id=str(record["id"]),
            passage=str(record["passage"]),
            answer=str(record.get("answer", "")),
            question=str(record["question"]),
            source=record.get("source"),
        )
    except KeyError as exc:
        raise CorpusError(f"missing field {exc.args[0]!r}", line=lineno) from exc
    except CorpusError as exc:
        raise CorpusError(str(exc), line=lineno) from exc


def load_samples(
    path: Union[str, Path], kind: str = "labeled"
) -> Union[List[QGSample], List[LabeledSample], List["HumanScoreRecord"]]:
    """Load a .jsonl dataset file.

    kind="unlabeled" returns QGSamples; kind="labeled" returns LabeledSamples
    and rejects records whose labels violate the label-set invariants;
    kind="human_scores" returns HumanScoreRecords.
    """
    if kind == "human_scores":
        return load_human_scores(path)
    if kind not in ("unlabeled", "labeled"):
        raise ValueError(f"unknown kind {kind!r}")
    out: list = []
    seen_ids: set = set()
    for lineno, record in _iter_lines(path):
        sample = _parse_sample(record, lineno)
        if sample.id in seen_ids:
            raise CorpusError(f"duplicate sample id {sample.id!r}", line=lineno)
        seen_ids.add(sample.id)
        if kind == "unlabeled":
            out.append(sample)
            continue
        if "labels" not in record:
            raise CorpusError(f"sample {sample.id!r} has no labels", line=lineno)
        try:
            labels = ErrorLabelSet.from_codes(record["labels"])
        except CorpusError as exc:
            raise CorpusError(str(exc), line=lineno) from exc
        source = LabelSource(record.get("label_source", LabelSource.SEED.value))
        out.append(LabeledSample(sample=sample, labels=labels, label_source=source))
    return out


def _atomic_write(path: Union[str, Path], lines: List[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_samples(
    dataset: Sequence[Union[QGSample, LabeledSample]], path: Union[str, Path]
) -> None:
    """Write samples as canonical .jsonl, atomically (write-temp-then-rename)."""
    _atomic_write(path, [_dump_line(_sample_record(item)) for item in dataset])


def load_human_scores(path: Union[str, Path]) -> List[HumanScoreRecord]:
    out: List[HumanScoreRecord] = []
    for lineno, record in _iter_lines(path):
        try:
            scale = Scale(record.get("scale", Scale.LIKERT3.value))
            out.append(
                HumanScoreRecord(
                    sample_id=str(record["sample_id"]),
                    dimension=Dimension(record["dimension"]),
                    score=int(record["score"]),
                    scale=scale,
                )
            )
        except KeyError as exc:
            raise CorpusError(f"missing field {exc.args[0]!r}", line=lineno) from exc
        except (ValueError, CorpusError) as exc:
            raise CorpusError(str(exc), line=lineno) from exc
    return out


def save_human_scores(records: Sequence[HumanScoreRecord], path: Union[str, Path]) -> None:
    lines = []
    for r in records:
        rec = {"sample_id": r.sample_id, "dimension": r.dimension.value, "score": r.score}
        if r.scale is not Scale.LIKERT3:
            rec["scale"] = r.scale.value
        lines.append(_dump_line(rec))
    _atomic_write(path, lines)


def split(dataset: Sequence, dev_fraction: float, seed: int) -> Tuple[list, list]:
    """Deterministic train/dev split: disjoint, exhaustive, seed-stable."""
    if not 0.0 < dev_fraction < 1.0:
        raise ValueError(f"dev_fraction must be in (0, 1), got {dev_fraction}")
    if len(dataset) < 2:
        raise ValueError("need at least 2 samples to split")
    n_dev = int(round(len(dataset) * dev_fraction))
    n_dev = max(1, min(len(dataset) - 1, n_dev))
    indices = list(range(len(dataset)))
    random.Random(seed).shuffle(indices)
    dev_idx = set(indices[:n_dev])
    train = [dataset[i] for i in range(len(dataset)) if i not in dev_idx]
    dev = [dataset[i] for i in range(len(dataset)) if i in dev_idx]
    return train, dev
