from __future__ import annotations

import numpy as np

from qgdiag.corpus import QGSample
from qgdiag.features import (
    DENSE_DIM,
    DENSE_FEATURE_NAMES,
    TOTAL_DIM,
    answer_wh_compatibility,
    extract_features,
    features_matrix,
)

IDX = {name: i for i, name in enumerate(DENSE_FEATURE_NAMES)}


def sample(question: str, passage: str = "Marie Duval was born in Lyon in 1885.",
           answer: str = "Lyon") -> QGSample:
    return QGSample(id="t", passage=passage, answer=answer, question=question)


def test_question_mark_flag() -> None:
    yes = extract_features(sample("What is the capital of France?"))
    no = extract_features(sample("What is the capital of France"))
    assert yes.dense[IDX["ends_with_question_mark"]] == 1.0
    assert no.dense[IDX["ends_with_question_mark"]] == 0.0


def test_common_span_ratio_for_copied_question() -> None:
    passage = (
        "The old harbor town grew quickly after the railway arrived in the "
        "valley and connected its markets to the coast."
    )
    # Question that IS a 20-token passage span.
    question = (
        "The old harbor town grew quickly after the railway arrived in the "
        "valley and connected its markets"
    )
    fv = extract_features(sample(question, passage=passage, answer="the coast"))
    assert fv.dense[IDX["common_passage_span_ratio"]] == 1.0


def test_absent_fraction_with_no_shared_content() -> None:
    fv = extract_features(
        sample(
            "Why do penguins migrate south every winter?",
            passage="The committee approved the annual budget for road repairs.",
            answer="budget",
        )
    )
    # Oracle: no content token of the question appears in the passage.
    assert fv.dense[IDX["passage_absent_fraction"]] == 1.0
    assert fv.dense[IDX["passage_content_overlap"]] == 0.0


def test_determinism_and_shape() -> None:
    s = sample("In which city was Marie Duval born?")
    a = extract_features(s)
    b = extract_features(s)
    assert a == b
    vec = a.to_array()
    assert vec.shape == (TOTAL_DIM,)
    assert np.isfinite(vec).all()


def test_dense_features_bounded() -> None:
    questions = [
        "In which city was Marie Duval born?",
        "x?",
        "Given that Marie Duval was born in Lyon in 1885, in which city was Marie Duval born?",
        "Marie Duval was born in Lyon.",
    ]
    for q in questions:
        fv = extract_features(sample(q))
        assert all(0.0 <= v <= 1.0 for v in fv.dense), (q, fv.dense)


def test_too_short_flag() -> None:
    assert extract_features(sample("Why?")).dense[IDX["too_short"]] == 1.0
    assert extract_features(sample("Why is that so?")).dense[IDX["too_short"]] == 0.0


def test_answer_wh_compatibility_pairs() -> None:
    assert answer_wh_compatibility("In what year was she born?", "1885") == 1.0
    assert answer_wh_compatibility("In which city was she born?", "1885") == 0.0
    assert answer_wh_compatibility("Who founded the museum?", "Marie Duval") == 1.0
    assert answer_wh_compatibility("In what year was it founded?", "Marie Duval") == 0.0


def test_matrix_stacks_rows() -> None:
    samples = [sample("What is this?"), sample("Where is that place?")]
    matrix = features_matrix(samples)
    assert matrix.shape == (2, TOTAL_DIM)
    assert np.array_equal(matrix[0], extract_features(samples[0]).to_array())


def test_out_of_lexicon_fires_on_misspelling() -> None:
    clean = extract_features(sample("What profession did Marie Duval pursue?"))
    typo = extract_features(sample("What profesison did Marie Duval pursue?"))
    assert clean.dense[IDX["out_of_lexicon_rate"]] == 0.0
    assert typo.dense[IDX["out_of_lexicon_rate"]] > 0.0
