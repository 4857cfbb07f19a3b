"""Dimension-specific question scoring through LLM prompts.

Builds the plain chain-of-thought prompt and its error-aware variant (the
same prompt plus a diagnostics block and one adjusted evaluation step),
dispatches to a backend, and parses (score, reason) out of the reply.
"""
from __future__ import annotations

import hashlib
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .backends import DEFAULT_MAX_TOKENS, LLMBackend, TransportError
from .corpus import ErrorLabelSet, QGSample
from .taxonomy import Dimension, ErrorType, Scale, errors_for_dimension

__all__ = [
    "PromptMode",
    "ScoringCriteria",
    "EvaluationRequest",
    "EvaluationResult",
    "EvaluationFailure",
    "ParseError",
    "default_criteria",
    "binary_answerability_criteria",
    "format_error_info",
    "build_prompt",
    "parse_response",
    "evaluate",
    "evaluate_batch",
]


class PromptMode(str, Enum):
    VANILLA = "vanilla"
    ERROR_AWARE = "error_aware"


@dataclass(frozen=True)
class ScoringCriteria:
    dimension: Dimension
    scale: Scale
    definition: str
    score_criteria: Dict[int, str]
    requirement: str

    def __post_init__(self) -> None:
        expected = set(self.scale.valid_scores)
        if set(self.score_criteria) != expected:
            raise ValueError(
                f"criteria must cover scores {sorted(expected)}, got {sorted(self.score_criteria)}"
            )


_DEFINITIONS: Dict[Dimension, str] = {
    Dimension.FLUENCY: "Whether the question is natural, grammatical, and readable.",
    Dimension.CLARITY: "Whether the question is clearly stated and understandable without ambiguity.",
    Dimension.CONCISENESS: "Whether the question is appropriately brief, without redundant copied material.",
    Dimension.RELEVANCE: "Whether the question is about the topic of the passage.",
    Dimension.CONSISTENCY: "Whether the question agrees with the facts stated in the passage.",
    Dimension.ANSWERABILITY: "Whether the question can be answered from the passage.",
    Dimension.ANSWER_CONSISTENCY: "Whether the question aligns with the provided answer.",
}

_SCORE_CRITERIA: Dict[Dimension, Dict[int, str]] = {
    Dimension.FLUENCY: {
        1: "The question is unnatural or contains errors that make it hard to read.",
        2: "The question is mostly readable but contains minor spelling or grammatical issues.",
        3: "The question is natural, grammatical, and easy to read.",
    },
    Dimension.CLARITY: {
        1: "The question is unclear, ill-formed, or too ambiguous to understand.",
        2: "The question is understandable but leaves some ambiguity about what is being asked.",
        3: "The question is clear and unambiguous about what it asks.",
    },
    Dimension.CONCISENESS: {
        1: "The question copies large spans of the passage or is heavily redundant.",
        2: "The question contains some unnecessary or repeated material.",
        3: "The question is brief and contains no redundant content.",
    },
    Dimension.RELEVANCE: {
        1: "The question is unrelated to the passage.",
        2: "The question is only loosely related to the passage topic.",
        3: "The question is clearly about the passage content.",
    },
    Dimension.CONSISTENCY: {
        1: "The question contradicts the passage or relies on information the passage does not state.",
        2: "The question is mostly consistent but includes a questionable detail.",
        3: "Every detail in the question is consistent with the passage.",
    },
    Dimension.ANSWERABILITY: {
        1: "The question cannot be answered from the passage.",
        2: "The question is only partially answerable from the passage.",
        3: "The question is fully answerable from the passage.",
    },
    Dimension.ANSWER_CONSISTENCY: {
        1: "The question cannot be answered by the provided answer.",
        2: "The provided answer only partially addresses the question.",
        3: "The provided answer fully and directly addresses the question.",
    },
}

_REQUIREMENTS: Dict[Dimension, str] = {
    Dimension.FLUENCY: (
        "Evaluate the fluency of the generated question: check spelling, grammar, "
        "and whether it reads as complete, well-formed language."
    ),
    Dimension.CLARITY: (
        "Evaluate whether the generated question states clearly what it asks for, "
        "with a proper interrogative form and no vague wording."
    ),
    Dimension.CONCISENESS: (
        "Evaluate whether the generated question avoids overquoting the passage "
        "and stays as short as the information need allows."
    ),
    Dimension.RELEVANCE: (
        "Evaluate whether the generated question concerns the topic and content "
        "of the provided passage."
    ),
    Dimension.CONSISTENCY: (
        "Evaluate whether the facts referenced by the generated question match "
        "the passage, with no contradictions or unsupported details."
    ),
    Dimension.ANSWERABILITY: (
        "Evaluate whether a reader of the passage could answer the generated "
        "question, considering its completeness, clarity, and grounding."
    ),
    Dimension.ANSWER_CONSISTENCY: (
        "Evaluate whether the generated question aligns with the provided answer "
        "and determine if the answer fully, partially, or fails to address it."
    ),
}


def default_criteria(dimension: Dimension) -> ScoringCriteria:
    """The stock three-point criteria for a dimension."""
    return ScoringCriteria(
        dimension=dimension,
        scale=Scale.LIKERT3,
        definition=_DEFINITIONS[dimension],
        score_criteria=dict(_SCORE_CRITERIA[dimension]),
        requirement=_REQUIREMENTS[dimension],
    )


def binary_answerability_criteria() -> ScoringCriteria:
    """0/1 answerability classification, for SQuAD-style evaluation."""
    return ScoringCriteria(
        dimension=Dimension.ANSWERABILITY,
        scale=Scale.BINARY,
        definition="Whether the question is answerable from the passage.",
        score_criteria={
            0: "The question is unanswerable from the passage.",
            1: "The question is answerable from the passage.",
        },
        requirement=(
            "Decide whether the generated question can be answered using only the "
            "passage: score 1 if answerable, 0 otherwise."
        ),
    )


@dataclass(frozen=True)
class EvaluationRequest:
    sample: QGSample
    criteria: ScoringCriteria
    mode: PromptMode = PromptMode.VANILLA
    diagnostics: Optional[ErrorLabelSet] = None

    def __post_init__(self) -> None:
        if self.mode is PromptMode.ERROR_AWARE and self.diagnostics is None:
            raise ValueError("error-aware evaluation requires diagnostics")


@dataclass(frozen=True)
class EvaluationResult:
    score: int
    reason: str
    raw_reply: str
    backend_id: str
    prompt_hash: str
    mode: PromptMode
    dimension: Dimension
    sample_id: str
    decoding: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class EvaluationFailure:
    sample_id: str
    dimension: Dimension
    mode: PromptMode
    error: str
    detail: str


class ParseError(ValueError):
    def __init__(self, message: str, reply: str):
        self.reply = reply
        super().__init__(message)


NO_ERROR_STATEMENT = ErrorType.NO_ERR.description


def format_error_info(labels: ErrorLabelSet, dimension: Dimension) -> str:
    """Render the diagnostics relevant to ``dimension``, one per line.

    Only errors mapped to the dimension appear; an empty intersection (or a
    clean sample) renders the No Error statement instead.
    """
    relevant = [
        e
        for e in ErrorType
        if e in labels and e in errors_for_dimension(dimension) and e is not ErrorType.NO_ERR
    ]
    if not relevant:
        return f"- {ErrorType.NO_ERR.display_name}: {NO_ERROR_STATEMENT}"
    return "\n".join(f"- {e.display_name}: {e.description}" for e in relevant)


_VANILLA_STEP = (
    "2. Analyze the question against the dimension definition and the scoring criteria."
)
_ERROR_AWARE_STEP = (
    "2. Review the reported error diagnostics below and weigh each one against "
    "the question, the passage, and the answer."
)


def build_prompt(request: EvaluationRequest) -> str:
    """Deterministic prompt text; the two modes differ only in the adjusted
    step and the diagnostics block."""
    criteria = request.criteria
    scores = sorted(criteria.score_criteria)
    criteria_lines = "\n".join(
        f"Score {s}: {criteria.score_criteria[s]}" for s in scores
    )
    if request.mode is PromptMode.ERROR_AWARE:
        assert request.diagnostics is not None
        step2 = _ERROR_AWARE_STEP
        diagnostics_block = (
            "Error Diagnostics:\n"
            + format_error_info(request.diagnostics, criteria.dimension)
            + "\n\n"
        )
    else:
        step2 = _VANILLA_STEP
        diagnostics_block = ""
    name = criteria.dimension.display_name
    return (
        "You are an expert evaluator of machine-generated questions.\n"
        "\n"
        f"Evaluation Dimension: {name}\n"
        f"Dimension Definition: {criteria.definition}\n"
        "\n"
        "Scoring Criteria:\n"
        f"{criteria_lines}\n"
        "\n"
        "Evaluation Steps:\n"
        "1. Read the passage, the answer, and the generated question carefully.\n"
        f"{step2}\n"
        "3. Decide which scoring criterion fits the question best.\n"
        "4. Reply with 'Score: <n>' on the first line, then 'Reason: <why>'.\n"
        "\n"
        f"{diagnostics_block}"
        f"Evaluation Requirement: {criteria.requirement}\n"
        "\n"
        f"Passage: {request.sample.passage}\n"
        f"Answer: {request.sample.answer}\n"
        f"Question: {request.sample.question}\n"
        "\n"
        f"Now evaluate the question on {name}.\n"
    )


_SCORE_PATTERN = re.compile(r"score\W{0,4}(\d+)", re.IGNORECASE)
_REASON_PATTERN = re.compile(r"reason\s*[:：]\s*", re.IGNORECASE)


def parse_response(reply: str, scale: Scale) -> Tuple[int, str]:
    """Extract (score, reason); raises ParseError when no on-scale score exists."""
    score: Optional[int] = None
    for match in _SCORE_PATTERN.finditer(reply):
        candidate = int(match.group(1))
        if candidate in scale.valid_scores:
            score = candidate
            break
    if score is None:
        raise ParseError(f"no score on the {scale.value} scale found in reply", reply)
    reason_match = _REASON_PATTERN.search(reply)
    if reason_match:
        reason = reply[reason_match.end():].strip()
    else:
        reason = reply.strip()
    return score, reason


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def evaluate(
    backend: LLMBackend,
    request: EvaluationRequest,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    retries: int = 3,
    backoff: float = 0.5,
) -> EvaluationResult:
    """build -> send -> parse, with exponential backoff on transport failure."""
    prompt = build_prompt(request)
    attempt = 0
    while True:
        try:
            reply = backend.send(prompt, max_tokens=max_tokens)
            break
        except TransportError:
            attempt += 1
            if attempt > retries:
                raise
            time.sleep(backoff * 2 ** (attempt - 1))
    score, reason = parse_response(reply, request.criteria.scale)
    return EvaluationResult(
        score=score,
        reason=reason,
        raw_reply=reply,
        backend_id=backend.backend_id,
        prompt_hash=prompt_hash(prompt),
        mode=request.mode,
        dimension=request.criteria.dimension,
        sample_id=request.sample.id,
        decoding=backend.decoding_settings(),
    )


def evaluate_batch(
    backend: LLMBackend,
    requests: Sequence[EvaluationRequest],
    max_inflight: int = 4,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    retries: int = 3,
    backoff: float = 0.5,
) -> List[Union[EvaluationResult, EvaluationFailure]]:
    """Evaluate many requests concurrently; results keep input order and
    per-item failures never poison the rest of the batch."""
    if max_inflight < 1:
        raise ValueError("max_inflight must be >= 1")
    if not requests:
        return []

    def one(request: EvaluationRequest) -> Union[EvaluationResult, EvaluationFailure]:
        try:
            return evaluate(
                backend, request, max_tokens=max_tokens, retries=retries, backoff=backoff
            )
        except ParseError as exc:
            return EvaluationFailure(
                sample_id=request.sample.id,
                dimension=request.criteria.dimension,
                mode=request.mode,
                error="parse_failure",
                detail=str(exc),
            )
        except TransportError as exc:
            return EvaluationFailure(
                sample_id=request.sample.id,
                dimension=request.criteria.dimension,
                mode=request.mode,
                error="transport_failure",
                detail=str(exc),
            )

    with ThreadPoolExecutor(max_workers=max_inflight) as pool:
        return list(pool.map(one, requests))
