"""Initialization-phase data synthesis: one-shot error-simulation prompts,
judge-filter prompts, and the multi-model agreement filter.

The prompt templates are repo-local and pinned by golden-file tests; the
agreement rule keeps a candidate only when at least ``quorum`` judges are
at least ``tau_conf`` confident the target errors are present.
"""
from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .backends import LLMBackend
from .corpus import ErrorLabelSet, LabeledSample, LabelSource, QGSample
from .taxonomy import ErrorType

__all__ = [
    "SeedExample",
    "SynthesisCandidate",
    "build_simulation_prompt",
    "build_filter_prompt",
    "parse_confidence",
    "parse_generated_question",
    "agreement_filter",
    "judge_candidate",
    "synthesize",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeedExample:
    sample: QGSample
    labels: ErrorLabelSet


@dataclass(frozen=True)
class SynthesisCandidate:
    sample: QGSample
    target_errors: ErrorLabelSet
    backend_confidences: Tuple[Tuple[str, Optional[float]], ...] = ()


def _describe_targets(targets: ErrorLabelSet) -> str:
    return "\n".join(
        f"- {e.display_name}: {e.description}" for e in targets
    )


def build_simulation_prompt(
    seed: SeedExample, passage: str, answer: str, targets: ErrorLabelSet
) -> str:
    """One-shot prompt asking a generator to write a question exhibiting the
    target error types (or a clean question for a NoErr target)."""
    if ErrorType.NO_ERR in targets and len(targets.errors) > 1:
        raise ValueError("NoErr cannot be combined with other targets")
    seed_labels = ", ".join(e.display_name for e in seed.labels)
    if targets.is_no_error:
        instruction = (
            "Write one new question for the passage and answer below. The "
            "question must be error-free: clear, relevant, and answerable "
            "without any issues."
        )
    else:
        instruction = (
            "Write one new question for the passage and answer below. The "
            "question must exhibit exactly the target error types listed "
            "above and no others."
        )
    return (
        "You write questions for reading-comprehension passages, deliberately "
        "introducing specified error types for training data synthesis.\n"
        "\n"
        "Target Error Types:\n"
        f"{_describe_targets(targets)}\n"
        "\n"
        "Example:\n"
        f"Passage: {seed.sample.passage}\n"
        f"Answer: {seed.sample.answer}\n"
        f"Question: {seed.sample.question}\n"
        f"Error Types: {seed_labels}\n"
        "\n"
        f"{instruction}\n"
        "Reply with a single line in the form 'Question: <text>'.\n"
        "\n"
        f"Passage: {passage}\n"
        f"Answer: {answer}\n"
        "Question:"
    )


def build_filter_prompt(candidate: SynthesisCandidate) -> str:
    """Ask a judge how confident it is that the target errors are present."""
    return (
        "You audit synthesized questions for a quality-control filter.\n"
        "\n"
        "Given the passage, answer, and question below, estimate your "
        "confidence that the question exhibits ALL of the target error types "
        "listed, and only deliberate ones.\n"
        "\n"
        "Target Error Types:\n"
        f"{_describe_targets(candidate.target_errors)}\n"
        "\n"
        f"Passage: {candidate.sample.passage}\n"
        f"Answer: {candidate.sample.answer}\n"
        f"Question: {candidate.sample.question}\n"
        "\n"
        "Reply with a single line in the form 'Confidence: <x>' where <x> is "
        "a decimal between 0 and 1.\n"
    )


_CONFIDENCE_PATTERN = re.compile(r"confidence\W{0,4}([01](?:\.\d+)?)", re.IGNORECASE)
_QUESTION_PATTERN = re.compile(r"question\s*[:：]\s*(.+)", re.IGNORECASE)


def parse_confidence(reply: str) -> Optional[float]:
    """Decimal from a 'Confidence: <x>' line, or None when absent/out of range.

    None is fail-closed: the caller treats it as below any threshold.
    """
    match = _CONFIDENCE_PATTERN.search(reply)
    if not match:
        return None
    value = float(match.group(1))
    if not 0.0 <= value <= 1.0:
        return None
    return value


def parse_generated_question(reply: str) -> Optional[str]:
    match = _QUESTION_PATTERN.search(reply)
    if match:
        return match.group(1).strip()
    text = reply.strip()
    return text or None


def agreement_filter(
    confidences: Sequence[Optional[float]], quorum: int = 2, tau_conf: float = 0.8
) -> bool:
    """Keep iff at least ``quorum`` judges report confidence >= ``tau_conf``.

    Unparseable reports (None) never count toward the quorum.
    """
    if len(confidences) < quorum:
        raise ValueError(
            f"need at least {quorum} judge reports, got {len(confidences)}"
        )
    return sum(1 for c in confidences if c is not None and c >= tau_conf) >= quorum


def judge_candidate(
    candidate: SynthesisCandidate,
    judges: Sequence[LLMBackend],
    max_inflight: int = 3,
) -> SynthesisCandidate:
    """Fan the filter prompt out to every judge and record their confidences."""
    prompt = build_filter_prompt(candidate)

    def one(judge: LLMBackend) -> Tuple[str, Optional[float]]:
        reply = judge.send(prompt)
        confidence = parse_confidence(reply)
        if confidence is None:
            logger.warning(
                "judge %s returned an unparseable confidence; treating as below threshold",
                judge.backend_id,
            )
        return (judge.backend_id, confidence)

    with ThreadPoolExecutor(max_workers=max(1, max_inflight)) as pool:
        reports = tuple(pool.map(one, judges))
    return SynthesisCandidate(
        sample=candidate.sample,
        target_errors=candidate.target_errors,
        backend_confidences=reports,
    )


def synthesize(
    generator: LLMBackend,
    judges: Sequence[LLMBackend],
    seeds: Sequence[SeedExample],
    pairs: Sequence[Tuple[str, str]],
    targets: Sequence[ErrorLabelSet],
    quorum: int = 2,
    tau_conf: float = 0.8,
    id_prefix: str = "synth",
    max_inflight: int = 3,
) -> List[LabeledSample]:
    """Generate one candidate per (passage, answer) x target and keep those
    passing the agreement filter."""
    if not seeds:
        raise ValueError("need at least one seed example")
    kept: List[LabeledSample] = []
    counter = 0
    for passage, answer in pairs:
        for target in targets:
            seed = seeds[counter % len(seeds)]
            prompt = build_simulation_prompt(seed, passage, answer, target)
            question = parse_generated_question(generator.send(prompt))
            if not question:
                logger.warning("generator returned no question; candidate dropped")
                counter += 1
                continue
            candidate = SynthesisCandidate(
                sample=QGSample(
                    id=f"{id_prefix}-{counter:05d}",
                    passage=passage,
                    answer=answer,
                    question=question,
                    source=generator.backend_id,
                ),
                target_errors=target,
            )
            candidate = judge_candidate(candidate, judges, max_inflight=max_inflight)
            if agreement_filter(
                [c for _, c in candidate.backend_confidences], quorum, tau_conf
            ):
                kept.append(
                    LabeledSample(
                        sample=candidate.sample,
                        labels=candidate.target_errors,
                        label_source=LabelSource.SYNTHESIZED,
                    )
                )
            counter += 1
    return kept
