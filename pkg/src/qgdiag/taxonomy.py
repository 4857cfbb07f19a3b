"""Error taxonomy: the 11 error types, their categories, the 7 evaluation
dimensions, and the bidirectional error <-> dimension mapping.

Everything in this module is immutable after import and safe to share
across threads.
"""
from __future__ import annotations

from enum import Enum
from typing import Dict, FrozenSet, List


class Category(str, Enum):
    STRUCTURAL = "structural"
    LINGUISTIC = "linguistic"
    CONTENT_RELATED = "content_related"
    NONE = "none"


class ErrorType(str, Enum):
    """Canonical error codes. Enum order is catalog order."""

    INC = "Inc"
    NAQ = "NAQ"
    SPELL = "Spell"
    GRAM = "Gram"
    VAG = "Vag"
    COPY = "Copy"
    OTP = "OTP"
    FACT = "Fact"
    INM = "INM"
    OTA = "OTA"
    NO_ERR = "NoErr"

    @property
    def ordinal(self) -> int:
        return _ORDINALS[self]

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]

    @property
    def category(self) -> Category:
        return _CATEGORIES[self]


_ORDINALS: Dict[ErrorType, int] = {e: i for i, e in enumerate(ErrorType)}

_DISPLAY_NAMES: Dict[ErrorType, str] = {
    ErrorType.INC: "Incomplete",
    ErrorType.NAQ: "Not A Question",
    ErrorType.SPELL: "Spell Error",
    ErrorType.GRAM: "Grammar Error",
    ErrorType.VAG: "Vague",
    ErrorType.COPY: "Unnecessary Copy from Passage",
    ErrorType.OTP: "Off Topic",
    ErrorType.FACT: "Factual Error",
    ErrorType.INM: "Information Not Mentioned",
    ErrorType.OTA: "Off Target Answer",
    ErrorType.NO_ERR: "No Error",
}

_DESCRIPTIONS: Dict[ErrorType, str] = {
    ErrorType.INC: "Misses essential components, making the question unfinished.",
    ErrorType.NAQ: "Lacks interrogative structure or is a statement rather than a question.",
    ErrorType.SPELL: "Contains misspelled words affecting readability or clarity.",
    ErrorType.GRAM: "Grammatical issues such as incorrect word order, tense, subject-verb agreement.",
    ErrorType.VAG: "The question is unclear, overly broad, or ambiguous in meaning.",
    ErrorType.COPY: "Overquotes or redundantly copies large portions of the passage.",
    ErrorType.OTP: "The question is unrelated to the topic of the passage.",
    ErrorType.FACT: "Includes incorrect facts that contradict the passage.",
    ErrorType.INM: "Asks for information not present in the passage.",
    ErrorType.OTA: "Does not align with the provided answer.",
    ErrorType.NO_ERR: "The question is clear, relevant, and answerable without any issues.",
}

_CATEGORIES: Dict[ErrorType, Category] = {
    ErrorType.INC: Category.STRUCTURAL,
    ErrorType.NAQ: Category.STRUCTURAL,
    ErrorType.SPELL: Category.LINGUISTIC,
    ErrorType.GRAM: Category.LINGUISTIC,
    ErrorType.VAG: Category.LINGUISTIC,
    ErrorType.COPY: Category.LINGUISTIC,
    ErrorType.OTP: Category.CONTENT_RELATED,
    ErrorType.FACT: Category.CONTENT_RELATED,
    ErrorType.INM: Category.CONTENT_RELATED,
    ErrorType.OTA: Category.CONTENT_RELATED,
    ErrorType.NO_ERR: Category.NONE,
}

NUM_ERROR_TYPES = len(ErrorType)


class Scale(str, Enum):
    LIKERT3 = "likert3"
    BINARY = "binary"

    @property
    def valid_scores(self) -> tuple:
        return (1, 2, 3) if self is Scale.LIKERT3 else (0, 1)


class Dimension(str, Enum):
    FLUENCY = "fluency"
    CLARITY = "clarity"
    CONCISENESS = "conciseness"
    RELEVANCE = "relevance"
    CONSISTENCY = "consistency"
    ANSWERABILITY = "answerability"
    ANSWER_CONSISTENCY = "answer_consistency"

    @property
    def display_name(self) -> str:
        return _DIMENSION_NAMES[self]

    @property
    def default_scale(self) -> Scale:
        # All seven quality facets are rated 1-3 by default; binary scoring
        # is an alternative scale for answerability-style classification.
        return Scale.LIKERT3


_DIMENSION_NAMES: Dict[Dimension, str] = {
    Dimension.FLUENCY: "Fluency",
    Dimension.CLARITY: "Clarity",
    Dimension.CONCISENESS: "Conciseness",
    Dimension.RELEVANCE: "Relevance",
    Dimension.CONSISTENCY: "Consistency",
    Dimension.ANSWERABILITY: "Answerability",
    Dimension.ANSWER_CONSISTENCY: "Answer Consistency",
}

_DIMENSION_ERRORS: Dict[Dimension, FrozenSet[ErrorType]] = {
    Dimension.FLUENCY: frozenset(
        {ErrorType.INC, ErrorType.SPELL, ErrorType.GRAM, ErrorType.NO_ERR}
    ),
    Dimension.CLARITY: frozenset(
        {ErrorType.INC, ErrorType.NAQ, ErrorType.GRAM, ErrorType.VAG, ErrorType.NO_ERR}
    ),
    Dimension.CONCISENESS: frozenset({ErrorType.COPY, ErrorType.NO_ERR}),
    Dimension.RELEVANCE: frozenset({ErrorType.OTP, ErrorType.NO_ERR}),
    Dimension.CONSISTENCY: frozenset(
        {ErrorType.OTP, ErrorType.FACT, ErrorType.INM, ErrorType.NO_ERR}
    ),
    Dimension.ANSWERABILITY: frozenset(
        {
            ErrorType.INC,
            ErrorType.NAQ,
            ErrorType.VAG,
            ErrorType.OTP,
            ErrorType.FACT,
            ErrorType.INM,
            ErrorType.NO_ERR,
        }
    ),
    Dimension.ANSWER_CONSISTENCY: frozenset(
        {
            ErrorType.INC,
            ErrorType.NAQ,
            ErrorType.VAG,
            ErrorType.OTP,
            ErrorType.FACT,
            ErrorType.INM,
            ErrorType.OTA,
            ErrorType.NO_ERR,
        }
    ),
}

_ERROR_DIMENSIONS: Dict[ErrorType, FrozenSet[Dimension]] = {
    e: frozenset(d for d, errs in _DIMENSION_ERRORS.items() if e in errs)
    for e in ErrorType
}


def error_catalog() -> List[ErrorType]:
    """All 11 error types in catalog order."""
    return list(ErrorType)


def errors_for_dimension(dimension: Dimension) -> FrozenSet[ErrorType]:
    """The error types that directly affect ``dimension`` (always contains NoErr)."""
    return _DIMENSION_ERRORS[dimension]


def dimensions_for_error(error: ErrorType) -> FrozenSet[Dimension]:
    """The dimensions whose mapped error set contains ``error``."""
    return _ERROR_DIMENSIONS[error]


def taxonomy_records() -> List[dict]:
    """Machine-readable catalog: one record per error type.

    This is the payload served at GET /api/taxonomy.
    """
    return [
        {
            "id": e.value,
            "name": e.display_name,
            "category": e.category.value,
            "description": e.description,
            "dimensions": sorted(d.value for d in dimensions_for_error(e)),
        }
        for e in error_catalog()
    ]
