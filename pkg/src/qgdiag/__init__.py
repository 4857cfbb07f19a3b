"""Error-aware evaluation engine for generated questions.

Diagnoses eleven error types in (passage, answer, question) triples with a
natively trained Error Identifier + Verifier pair, refines both models
iteratively with human review in the loop, and injects dimension-relevant
diagnostics into LLM-evaluator prompts.
"""

__version__ = "0.1.0"

from .corpus import ErrorLabelSet, LabeledSample, LabelSource, QGSample
from .taxonomy import (
    Category,
    Dimension,
    ErrorType,
    Scale,
    dimensions_for_error,
    error_catalog,
    errors_for_dimension,
)

__all__ = [
    "Category",
    "Dimension",
    "ErrorLabelSet",
    "ErrorType",
    "LabelSource",
    "LabeledSample",
    "QGSample",
    "Scale",
    "dimensions_for_error",
    "error_catalog",
    "errors_for_dimension",
    "__version__",
]
